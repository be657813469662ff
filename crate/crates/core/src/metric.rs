//! Ambient geometry for radial experiments.
//!
//! Either flat ℝⁿ or a rotationally symmetric warped metric
//! g = dρ² + h(ρ)²·g_{S^{n-1}}, with h restricted to polynomials so that
//! pole regularity and all derivatives are exact. The flat case is the
//! warp h(ρ) = ρ.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Warp function of a rotationally symmetric metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Warp {
    /// h(ρ) = ρ, serialized as the string "flat".
    Flat(FlatTag),
    /// h(ρ) = Σ cᵢ ρⁱ with c₀ = 0, c₁ = 1.
    Polynomial { coeffs: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FlatTag {
    #[serde(rename = "flat")]
    Flat,
}

impl Warp {
    pub fn flat() -> Self {
        Warp::Flat(FlatTag::Flat)
    }

    pub fn h(&self, rho: f64) -> f64 {
        match self {
            Warp::Flat(_) => rho,
            Warp::Polynomial { coeffs } => horner(coeffs, rho),
        }
    }

    pub fn h_prime(&self, rho: f64) -> f64 {
        match self {
            Warp::Flat(_) => 1.0,
            Warp::Polynomial { coeffs } => {
                let d: Vec<f64> = coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, c)| k as f64 * c)
                    .collect();
                horner(&d, rho)
            }
        }
    }

    pub fn h_second(&self, rho: f64) -> f64 {
        match self {
            Warp::Flat(_) => 0.0,
            Warp::Polynomial { coeffs } => {
                let d2: Vec<f64> = coeffs
                    .iter()
                    .enumerate()
                    .skip(2)
                    .map(|(k, c)| (k * (k - 1)) as f64 * c)
                    .collect();
                horner(&d2, rho)
            }
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, Warp::Flat(_))
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Dimension plus warp; immutable value object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub n: usize,
    pub warp: Warp,
}

impl MetricSpec {
    pub fn flat(n: usize) -> Result<Self> {
        Self::new(n, Warp::flat())
    }

    pub fn new(n: usize, warp: Warp) -> Result<Self> {
        if !(2..=16).contains(&n) {
            return Err(Error::InvalidConfig(format!(
                "dimension n = {n} outside supported range [2, 16]"
            )));
        }
        if let Warp::Polynomial { coeffs } = &warp {
            if coeffs.len() < 2 || coeffs[0] != 0.0 || coeffs[1] != 1.0 {
                return Err(Error::InvalidConfig(
                    "warp coefficients must satisfy h(0) = 0, h'(0) = 1".into(),
                ));
            }
            if coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidConfig("non-finite warp coefficient".into()));
            }
        }
        Ok(MetricSpec { n, warp })
    }

    /// Mean curvature of the geodesic sphere of radius ρ with respect to the
    /// outward normal: H̃(ρ) = −h'(ρ)/h(ρ); flat case −1/ρ.
    pub fn sphere_mean_curvature(&self, rho: f64) -> Result<f64> {
        if rho <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "sphere_mean_curvature requires rho > 0, got {rho}"
            )));
        }
        Ok(-self.warp.h_prime(rho) / self.warp.h(rho))
    }

    /// Radial sufficient condition for Ric ≥ 0: h''(ρ) ≤ 0 sampled on a
    /// dense grid of [0, R]. The radial Ricci of the warp is −(n−1)h''/h.
    pub fn check_ricci_sign(&self, r: f64) -> bool {
        debug_assert!(r > 0.0);
        const SAMPLES: usize = 1024;
        (0..=SAMPLES).all(|i| {
            let rho = r * i as f64 / SAMPLES as f64;
            self.warp.h_second(rho) <= 1e-12
        })
    }

    /// h > 0 and h' > 0 on (0, R]: the working-radius admissibility check.
    pub fn admissible_on(&self, r: f64) -> Result<()> {
        const SAMPLES: usize = 1024;
        for i in 1..=SAMPLES {
            let rho = r * i as f64 / SAMPLES as f64;
            if self.warp.h(rho) <= 0.0 || self.warp.h_prime(rho) <= 0.0 {
                return Err(Error::InvalidGeometry(format!(
                    "warp not admissible on (0, {r}]: h or h' nonpositive at rho = {rho}"
                )));
            }
        }
        Ok(())
    }

    /// Surface measure of the unit (n−1)-sphere, ω_{n−1} = 2π^{n/2}/Γ(n/2).
    pub fn unit_sphere_area(&self) -> f64 {
        let n = self.n;
        let pi = std::f64::consts::PI;
        let gamma_half_n = if n % 2 == 0 {
            // Γ(n/2) = (n/2 − 1)!
            (1..n / 2).map(|k| k as f64).product::<f64>()
        } else {
            // Γ(m + 1/2) = (2m)!/(4^m m!) √π with m = (n−1)/2
            let m = (n - 1) / 2;
            let num: f64 = (1..=2 * m).map(|k| k as f64).product();
            let den: f64 = (1..=m).map(|k| k as f64).product();
            num / (4f64.powi(m as i32) * den) * pi.sqrt()
        };
        2.0 * pi.powf(n as f64 / 2.0) / gamma_half_n
    }
}

/// Closed conformal field used in the Pohozaev identity.
///
/// Warped case: Υ = h(ρ)∂ρ with conformal factor φ = h'(ρ). Flat case:
/// Υ = x − x₀ with φ ≡ 1 (the base point only matters on 2-D meshes; for
/// radial runs it is the origin). div Υ = nφ holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalField {
    pub metric: MetricSpec,
    /// Base point of the flat position field; ignored for warped metrics.
    #[serde(default)]
    pub base_point: [f64; 2],
}

impl ConformalField {
    pub fn for_metric(metric: &MetricSpec) -> Self {
        ConformalField {
            metric: metric.clone(),
            base_point: [0.0, 0.0],
        }
    }

    /// Conformal factor φ(ρ) = h'(ρ); ≡ 1 in the flat case.
    pub fn phi(&self, rho: f64) -> f64 {
        self.metric.warp.h_prime(rho)
    }

    /// Radial component of D(ln φ): (ln φ)'(ρ) = h''(ρ)/h'(ρ); 0 when flat.
    pub fn log_gradient(&self, rho: f64) -> Result<f64> {
        let phi = self.phi(rho);
        if phi <= 0.0 {
            return Err(Error::HypothesisViolated(format!(
                "conformal factor phi = {phi} <= 0 at rho = {rho}"
            )));
        }
        Ok(self.metric.warp.h_second(rho) / phi)
    }

    /// φ > 0 sampled on [0, R].
    pub fn phi_positive_on(&self, r: f64) -> bool {
        const SAMPLES: usize = 1024;
        (0..=SAMPLES).all(|i| self.phi(r * i as f64 / SAMPLES as f64) > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic_warp(c3: f64) -> MetricSpec {
        MetricSpec::new(
            2,
            Warp::Polynomial {
                coeffs: vec![0.0, 1.0, 0.0, c3],
            },
        )
        .unwrap()
    }

    #[test]
    fn flat_sphere_curvature() {
        let m = MetricSpec::flat(2).unwrap();
        assert_eq!(m.sphere_mean_curvature(0.5).unwrap(), -2.0);
        let v = m.sphere_mean_curvature(0.6).unwrap();
        assert!((v - (-1.0 / 0.6)).abs() < 1e-15);
        assert!(m.sphere_mean_curvature(0.0).is_err());
        assert!(m.sphere_mean_curvature(-1.0).is_err());
    }

    #[test]
    fn warped_sphere_curvature() {
        // h = ρ − 0.1ρ³ at ρ = 0.6: −(1 − 0.108)/(0.6 − 0.0216)
        let m = cubic_warp(-0.1);
        let v = m.sphere_mean_curvature(0.6).unwrap();
        let exact = -(1.0 - 0.108) / (0.6 - 0.0216);
        assert!((v - exact).abs() < 1e-15);
        assert!((v - (-1.54219)).abs() < 1e-5);
    }

    #[test]
    fn ricci_sign_cases() {
        assert!(MetricSpec::flat(2).unwrap().check_ricci_sign(10.0));
        assert!(cubic_warp(-0.1).check_ricci_sign(0.6)); // h'' = −0.6ρ ≤ 0
        assert!(!cubic_warp(0.1).check_ricci_sign(0.6)); // h'' = 0.6ρ > 0
    }

    #[test]
    fn conformal_log_gradient_values() {
        let flat = ConformalField::for_metric(&MetricSpec::flat(2).unwrap());
        assert_eq!(flat.log_gradient(0.3).unwrap(), 0.0);
        let cf = ConformalField::for_metric(&cubic_warp(-0.1));
        let v = cf.log_gradient(0.5).unwrap();
        assert!((v - (-0.3 / 0.925)).abs() < 1e-15);
        assert_eq!(cf.log_gradient(0.0).unwrap(), 0.0); // h''(0) = 0
    }

    #[test]
    fn log_gradient_rejects_nonpositive_phi() {
        // h = ρ − ρ³ has h'(ρ) = 1 − 3ρ² ≤ 0 for ρ ≥ 1/√3
        let m = MetricSpec::new(
            2,
            Warp::Polynomial {
                coeffs: vec![0.0, 1.0, 0.0, -1.0],
            },
        )
        .unwrap();
        let cf = ConformalField::for_metric(&m);
        assert!(cf.log_gradient(0.8).is_err());
        assert!(!cf.phi_positive_on(0.8));
        assert!(cf.phi_positive_on(0.5));
    }

    #[test]
    fn flat_curvature_times_radius() {
        let m = MetricSpec::flat(3).unwrap();
        for i in 1..50 {
            let rho = 0.05 * i as f64;
            let v = m.sphere_mean_curvature(rho).unwrap();
            assert!((v * rho + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn admissible_warp_has_negative_curvature() {
        let m = cubic_warp(-0.1);
        m.admissible_on(0.9).unwrap();
        for i in 1..=20 {
            let rho = 0.9 * i as f64 / 20.0;
            assert!(m.sphere_mean_curvature(rho).unwrap() < 0.0);
        }
    }

    #[test]
    fn warp_derivatives_match_finite_differences() {
        let m = cubic_warp(-0.1);
        let d = 1e-6;
        for i in 1..=10 {
            let rho = 0.06 * i as f64;
            let h = |x: f64| m.warp.h(x);
            let fd1 = (h(rho + d) - h(rho - d)) / (2.0 * d);
            let fd2 = (h(rho + d) - 2.0 * h(rho) + h(rho - d)) / (d * d);
            assert!((m.warp.h_prime(rho) - fd1).abs() < 1e-8);
            assert!((m.warp.h_second(rho) - fd2).abs() < 1e-3);
            // div Υ = nφ: for Υ = h∂ρ the divergence is h' + (n−1)h'(ρ) = nφ
            let div = fd1 + (m.n as f64 - 1.0) * m.warp.h_prime(rho);
            assert!((div - m.n as f64 * m.warp.h_prime(rho)).abs() < 1e-8);
        }
    }

    #[test]
    fn pole_closure_enforced() {
        assert!(MetricSpec::new(
            2,
            Warp::Polynomial {
                coeffs: vec![0.1, 1.0]
            }
        )
        .is_err());
        assert!(MetricSpec::new(
            2,
            Warp::Polynomial {
                coeffs: vec![0.0, 0.9]
            }
        )
        .is_err());
        assert!(MetricSpec::new(1, Warp::flat()).is_err());
    }

    #[test]
    fn unit_sphere_areas() {
        let pi = std::f64::consts::PI;
        assert!((MetricSpec::flat(2).unwrap().unit_sphere_area() - 2.0 * pi).abs() < 1e-14);
        assert!((MetricSpec::flat(3).unwrap().unit_sphere_area() - 4.0 * pi).abs() < 1e-14);
        assert!((MetricSpec::flat(4).unwrap().unit_sphere_area() - 2.0 * pi * pi).abs() < 1e-13);
    }

    #[test]
    fn config_fragments() {
        let m: MetricSpec = serde_json::from_str(r#"{"n": 2, "warp": "flat"}"#).unwrap();
        assert!(m.warp.is_flat());
        let m: MetricSpec =
            serde_json::from_str(r#"{"n": 2, "warp": {"coeffs": [0, 1, 0, -0.1]}}"#).unwrap();
        assert!((m.warp.h(0.6) - (0.6 - 0.1 * 0.216)).abs() < 1e-15);
    }
}
