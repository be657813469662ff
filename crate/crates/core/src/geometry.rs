//! 2-D star-shaped domains given by a parametric boundary curve.
//!
//! Every domain exposes exact closed-form γ(θ), γ'(θ), γ''(θ), so normals
//! and curvatures carry no geometry error into the identity residuals.
//! The curvature sign follows the outward-normal convention used
//! throughout the crate: H̃ = −κ, negative on convex boundaries, −1/R on
//! a disk of radius R.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Star-shaped planar domain, parametrized counterclockwise by θ ∈ [0, 2π).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain2D {
    Disk {
        r: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// r(θ) = cos[0] + Σ_k (cos[k]·cos kθ + sin[k−1]·sin kθ), a finite
    /// Fourier series (hence C²).
    RadialGraph {
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

impl Domain2D {
    pub fn disk(r: f64) -> Self {
        Domain2D::Disk { r }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Domain2D::Ellipse { a, b }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain2D::Disk { r } => {
                if *r <= 0.0 {
                    return Err(Error::InvalidGeometry(format!("disk radius {r} <= 0")));
                }
            }
            Domain2D::Ellipse { a, b } => {
                if *a <= 0.0 || *b <= 0.0 {
                    return Err(Error::InvalidGeometry(format!(
                        "ellipse semi-axes ({a}, {b}) must be positive"
                    )));
                }
            }
            Domain2D::RadialGraph { .. } => {
                // star-shapedness: r(θ) > 0 sampled densely
                const SAMPLES: usize = 4096;
                for i in 0..SAMPLES {
                    let theta = 2.0 * std::f64::consts::PI * i as f64 / SAMPLES as f64;
                    if self.radius_at(theta) <= 0.0 {
                        return Err(Error::InvalidGeometry(format!(
                            "radial graph self-intersects: r({theta}) <= 0"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn radius_at(&self, theta: f64) -> f64 {
        match self {
            Domain2D::Disk { r } => *r,
            Domain2D::Ellipse { a, b } => {
                let (s, c) = theta.sin_cos();
                let p = [a * c, b * s];
                (p[0] * p[0] + p[1] * p[1]).sqrt()
            }
            Domain2D::RadialGraph { cos, sin } => {
                let mut r = 0.0;
                for (k, ck) in cos.iter().enumerate() {
                    r += ck * (k as f64 * theta).cos();
                }
                for (k, sk) in sin.iter().enumerate() {
                    r += sk * ((k + 1) as f64 * theta).sin();
                }
                r
            }
        }
    }

    /// r'(θ) and r''(θ) for radial-graph kinds.
    fn radius_derivs(&self, theta: f64) -> (f64, f64) {
        match self {
            Domain2D::Disk { .. } => (0.0, 0.0),
            Domain2D::Ellipse { .. } => unreachable!("ellipse uses its exact parametrization"),
            Domain2D::RadialGraph { cos, sin } => {
                let mut d1 = 0.0;
                let mut d2 = 0.0;
                for (k, ck) in cos.iter().enumerate() {
                    let kf = k as f64;
                    d1 -= ck * kf * (kf * theta).sin();
                    d2 -= ck * kf * kf * (kf * theta).cos();
                }
                for (k, sk) in sin.iter().enumerate() {
                    let kf = (k + 1) as f64;
                    d1 += sk * kf * (kf * theta).cos();
                    d2 -= sk * kf * kf * (kf * theta).sin();
                }
                (d1, d2)
            }
        }
    }

    /// Boundary point γ(θ).
    pub fn point(&self, theta: f64) -> [f64; 2] {
        let (s, c) = theta.sin_cos();
        match self {
            Domain2D::Ellipse { a, b } => [a * c, b * s],
            _ => {
                let r = self.radius_at(theta);
                [r * c, r * s]
            }
        }
    }

    /// γ'(θ).
    pub fn tangent(&self, theta: f64) -> [f64; 2] {
        let (s, c) = theta.sin_cos();
        match self {
            Domain2D::Ellipse { a, b } => [-a * s, b * c],
            _ => {
                let r = self.radius_at(theta);
                let (r1, _) = self.radius_derivs(theta);
                [r1 * c - r * s, r1 * s + r * c]
            }
        }
    }

    /// γ''(θ).
    fn second(&self, theta: f64) -> [f64; 2] {
        let (s, c) = theta.sin_cos();
        match self {
            Domain2D::Ellipse { a, b } => [-a * c, -b * s],
            _ => {
                let r = self.radius_at(theta);
                let (r1, r2) = self.radius_derivs(theta);
                [
                    r2 * c - 2.0 * r1 * s - r * c,
                    r2 * s + 2.0 * r1 * c - r * s,
                ]
            }
        }
    }

    /// Outward unit normal at parameter θ (boundary runs counterclockwise).
    pub fn outward_normal(&self, theta: f64) -> [f64; 2] {
        let t = self.tangent(theta);
        let norm = (t[0] * t[0] + t[1] * t[1]).sqrt();
        [t[1] / norm, -t[0] / norm]
    }

    /// Signed boundary mean curvature in the outward-normal convention:
    /// H̃(θ) = −(x'y'' − y'x'')/|γ'|³. Disk(R) gives −1/R everywhere.
    pub fn boundary_curvature(&self, theta: f64) -> f64 {
        let t = self.tangent(theta);
        let a = self.second(theta);
        let speed = (t[0] * t[0] + t[1] * t[1]).sqrt();
        -(t[0] * a[1] - t[1] * a[0]) / (speed * speed * speed)
    }

    /// Map a point near the boundary back onto the exact curve, returning
    /// (θ, γ(θ)). Used when refinement inserts boundary edge midpoints.
    pub fn project_to_boundary(&self, p: [f64; 2]) -> (f64, [f64; 2]) {
        let theta = match self {
            Domain2D::Ellipse { a, b } => (p[1] / b).atan2(p[0] / a),
            _ => p[1].atan2(p[0]),
        };
        (theta, self.point(theta))
    }
}

/// Sampled boundary data, optionally carrying solution flux.
///
/// Two producers: uniform-in-θ geometric sampling of a `Domain2D`, and the
/// variational flux recovery of a finite-element solution (one sample per
/// boundary vertex). `weights` always sum to |∂Ω| up to quadrature error.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    pub positions: Vec<[f64; 2]>,
    pub normals: Vec<[f64; 2]>,
    /// Arclength weight per sample.
    pub weights: Vec<f64>,
    /// H̃ per sample (outward convention).
    pub curvature: Vec<f64>,
    /// Flux q = u_ν/w per sample, when attached to a solution.
    pub q: Option<Vec<f64>>,
    /// u_ν = q/√(1−q²) per sample; NaN at stiff samples.
    pub u_nu: Option<Vec<f64>>,
    /// w = 1/√(1−q²) per sample; NaN at stiff samples.
    pub w: Option<Vec<f64>>,
    /// Samples where |q| ≥ 1 (near-vertical graph): the StiffBoundary
    /// flag. u_ν and w are undefined there and checks that need them
    /// report not-applicable.
    pub stiff: Vec<usize>,
}

impl BoundaryTrace {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Total boundary length Σ weights.
    pub fn total_length(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// ∫_{∂Ω} g dS for per-sample values g.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum()
    }

    /// Attach flux values; u_ν and w follow from q since u ≡ 0 on ∂Ω
    /// forces Du = u_ν ν there. Samples with |q| ≥ 1 are flagged stiff
    /// and get NaN for the underived quantities.
    pub fn with_flux(mut self, q: Vec<f64>) -> Self {
        assert_eq!(q.len(), self.len());
        let mut stiff = Vec::new();
        let mut u_nu = Vec::with_capacity(q.len());
        let mut w = Vec::with_capacity(q.len());
        for (i, &qi) in q.iter().enumerate() {
            if qi.abs() >= 1.0 {
                stiff.push(i);
                u_nu.push(f64::NAN);
                w.push(f64::NAN);
            } else {
                u_nu.push(qi / (1.0 - qi * qi).sqrt());
                w.push(1.0 / (1.0 - qi * qi).sqrt());
            }
        }
        self.q = Some(q);
        self.u_nu = Some(u_nu);
        self.w = Some(w);
        self.stiff = stiff;
        self
    }
}

/// Uniform-in-θ boundary sampling with exact normals, curvatures and
/// spectrally accurate arclength weights (periodic rectangle rule).
pub fn boundary_trace(domain: &Domain2D, samples: usize) -> Result<BoundaryTrace> {
    if samples < 16 {
        return Err(Error::InvalidConfig(format!(
            "boundary trace needs >= 16 samples, got {samples}"
        )));
    }
    domain.validate()?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let dtheta = two_pi / samples as f64;
    let mut positions = Vec::with_capacity(samples);
    let mut normals = Vec::with_capacity(samples);
    let mut weights = Vec::with_capacity(samples);
    let mut curvature = Vec::with_capacity(samples);
    for i in 0..samples {
        let theta = two_pi * i as f64 / samples as f64;
        positions.push(domain.point(theta));
        normals.push(domain.outward_normal(theta));
        let t = domain.tangent(theta);
        weights.push((t[0] * t[0] + t[1] * t[1]).sqrt() * dtheta);
        curvature.push(domain.boundary_curvature(theta));
    }
    Ok(BoundaryTrace {
        positions,
        normals,
        weights,
        curvature,
        q: None,
        u_nu: None,
        w: None,
        stiff: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn disk_curvature() {
        let d = Domain2D::disk(0.6);
        for i in 0..32 {
            let theta = 0.2 * i as f64;
            assert!((d.boundary_curvature(theta) + 1.0 / 0.6).abs() < 1e-13);
        }
    }

    #[test]
    fn ellipse_curvature_at_axes() {
        let d = Domain2D::ellipse(1.2, 0.8);
        // a/b² with the paper's sign flip at θ = 0, b/a² at θ = π/2
        assert!((d.boundary_curvature(0.0) + 1.2 / 0.64).abs() < 1e-13);
        assert!((d.boundary_curvature(0.0) + 1.875).abs() < 1e-13);
        let v = d.boundary_curvature(std::f64::consts::FRAC_PI_2);
        assert!((v + 0.8 / 1.44).abs() < 1e-13);
    }

    #[test]
    fn curvature_matches_finite_differences() {
        let domains = [
            Domain2D::disk(0.6),
            Domain2D::ellipse(1.2, 0.8),
            Domain2D::RadialGraph {
                cos: vec![0.7, 0.0, 0.05],
                sin: vec![0.0, 0.03],
            },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in &domains {
            for _ in 0..64 {
                let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                // centered finite-difference curvature of the parametrization;
                // the step balances truncation against second-difference roundoff
                let h = 1e-4;
                let pm = d.point(theta - h);
                let p0 = d.point(theta);
                let pp = d.point(theta + h);
                let t = [(pp[0] - pm[0]) / (2.0 * h), (pp[1] - pm[1]) / (2.0 * h)];
                let a = [
                    (pp[0] - 2.0 * p0[0] + pm[0]) / (h * h),
                    (pp[1] - 2.0 * p0[1] + pm[1]) / (h * h),
                ];
                let speed = (t[0] * t[0] + t[1] * t[1]).sqrt();
                let fd = -(t[0] * a[1] - t[1] * a[0]) / speed.powi(3);
                assert!(
                    (d.boundary_curvature(theta) - fd).abs() < 1e-6,
                    "curvature FD mismatch at theta = {theta}"
                );
            }
        }
    }

    #[test]
    fn disk_trace_length() {
        let pi = std::f64::consts::PI;
        let t = boundary_trace(&Domain2D::disk(0.6), 256).unwrap();
        assert!((t.total_length() - 1.2 * pi).abs() < 1e-10);
    }

    #[test]
    fn ellipse_perimeter_matches_adaptive_quadrature() {
        // oracle: adaptive Simpson of ∫ √(a²sin² + b²cos²) dθ
        fn speed(a: f64, b: f64, th: f64) -> f64 {
            let (s, c) = th.sin_cos();
            (a * a * s * s + b * b * c * c).sqrt()
        }
        fn simpson(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
            (hi - lo) / 6.0
                * (speed(a, b, lo) + 4.0 * speed(a, b, 0.5 * (lo + hi)) + speed(a, b, hi))
        }
        fn adaptive(a: f64, b: f64, lo: f64, hi: f64, whole: f64, depth: usize) -> f64 {
            let mid = 0.5 * (lo + hi);
            let l = simpson(a, b, lo, mid);
            let r = simpson(a, b, mid, hi);
            if depth == 0 || (l + r - whole).abs() < 1e-13 {
                l + r
            } else {
                adaptive(a, b, lo, mid, l, depth - 1) + adaptive(a, b, mid, hi, r, depth - 1)
            }
        }
        let exact = adaptive(
            1.2,
            0.8,
            0.0,
            std::f64::consts::TAU,
            simpson(1.2, 0.8, 0.0, std::f64::consts::TAU),
            30,
        );
        let t = boundary_trace(&Domain2D::ellipse(1.2, 0.8), 512).unwrap();
        assert!((t.total_length() - exact).abs() < 1e-10);
        assert!((exact - 6.346175835716236).abs() < 1e-9);
    }

    #[test]
    fn constant_radial_graph_equals_disk() {
        let disk = boundary_trace(&Domain2D::disk(0.6), 256).unwrap();
        let graph = boundary_trace(
            &Domain2D::RadialGraph {
                cos: vec![0.6],
                sin: vec![],
            },
            256,
        )
        .unwrap();
        for i in 0..256 {
            assert!((disk.positions[i][0] - graph.positions[i][0]).abs() < 1e-15);
            assert!((disk.positions[i][1] - graph.positions[i][1]).abs() < 1e-15);
            assert!((disk.weights[i] - graph.weights[i]).abs() < 1e-15);
            assert!((disk.curvature[i] - graph.curvature[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_closure() {
        for d in [
            Domain2D::disk(0.6),
            Domain2D::ellipse(1.2, 0.8),
            Domain2D::RadialGraph {
                cos: vec![0.7, 0.0, 0.05],
                sin: vec![0.02],
            },
        ] {
            let t = boundary_trace(&d, 512).unwrap();
            let mut sx = 0.0;
            let mut sy = 0.0;
            for i in 0..t.len() {
                sx += t.normals[i][0] * t.weights[i];
                sy += t.normals[i][1] * t.weights[i];
            }
            assert!(sx.abs() < 1e-8 && sy.abs() < 1e-8, "∮ν ds ≠ 0 on {d:?}");
        }
    }

    #[test]
    fn self_intersection_rejected() {
        let wild = Domain2D::RadialGraph {
            cos: vec![0.3, 0.0, 0.5],
            sin: vec![],
        };
        assert!(boundary_trace(&wild, 256).is_err());
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(boundary_trace(&Domain2D::disk(0.6), 8).is_err());
    }

    #[test]
    fn flux_attachment_and_bounds() {
        let t = boundary_trace(&Domain2D::disk(0.6), 64).unwrap();
        let t = t.with_flux(vec![0.6; 64]).unwrap();
        let u_nu = t.u_nu.as_ref().unwrap();
        let w = t.w.as_ref().unwrap();
        assert!((u_nu[0] - 0.75).abs() < 1e-15);
        assert!((w[0] - 1.25).abs() < 1e-15);
        let t2 = boundary_trace(&Domain2D::disk(0.6), 64).unwrap();
        assert!(t2.with_flux(vec![1.0; 64]).is_err());
    }

    #[test]
    fn ellipse_projection_lies_on_curve() {
        let d = Domain2D::ellipse(1.2, 0.8);
        let (_, p) = d.project_to_boundary([1.0, 0.5]);
        let res = (p[0] / 1.2).powi(2) + (p[1] / 0.8).powi(2) - 1.0;
        assert!(res.abs() < 1e-14);
    }

    #[test]
    fn config_fragment() {
        let d: Domain2D =
            serde_json::from_str(r#"{"kind": "ellipse", "a": 1.2, "b": 0.8}"#).unwrap();
        assert_eq!(d, Domain2D::ellipse(1.2, 0.8));
        let d: Domain2D = serde_json::from_str(r#"{"kind": "disk", "r": 0.6}"#).unwrap();
        assert_eq!(d, Domain2D::disk(0.6));
    }
}
