//! Right-hand side f of the curvature equation, with exact antiderivative.
//!
//! Only closed-form families are supported so that F(u) = ∫₀ᵘ f and f'
//! are exact; the integral identities under test are sensitive to
//! quadrature error in F.

use serde::{Deserialize, Serialize};

/// Closed-form nonlinearity: affine a + b·u, or a polynomial in u.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Nonlinearity {
    Affine { a: f64, b: f64 },
    Polynomial { coeffs: Vec<f64> },
}

impl Nonlinearity {
    pub fn constant(c: f64) -> Self {
        Nonlinearity::Affine { a: c, b: 0.0 }
    }

    /// f(u)
    pub fn f(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::Affine { a, b } => a + b * u,
            Nonlinearity::Polynomial { coeffs } => horner(coeffs, u),
        }
    }

    /// Antiderivative F(u) = ∫₀ᵘ f(t) dt, normalized so F(0) = 0.
    pub fn big_f(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::Affine { a, b } => a * u + 0.5 * b * u * u,
            Nonlinearity::Polynomial { coeffs } => {
                // ∫ c_k u^k = c_k u^(k+1)/(k+1); evaluate by Horner on the lifted coeffs
                let lifted: Vec<f64> = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c / (k as f64 + 1.0))
                    .collect();
                u * horner(&lifted, u)
            }
        }
    }

    /// f'(u); the caller uses the sign to validate the monotonicity hypothesis.
    pub fn f_prime(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::Affine { b, .. } => *b,
            Nonlinearity::Polynomial { coeffs } => {
                let d: Vec<f64> = coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, c)| k as f64 * c)
                    .collect();
                horner(&d, u)
            }
        }
    }

    /// Positive part f₊(u) = max(f(u), 0).
    pub fn f_plus(&self, u: f64) -> f64 {
        self.f(u).max(0.0)
    }

    /// True when f'(u) ≥ 0 at every sampled value. A `false` is a
    /// hypothesis-violation flag, not a failure: hypothesis-violating
    /// experiments run to completion and are reported as diagnostics.
    pub fn monotone_on(&self, samples: &[f64]) -> bool {
        samples.iter().all(|&u| self.f_prime(u) >= -1e-14)
    }
}

fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Adaptive Simpson quadrature, the independent oracle for F.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn recurse(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            whole: f64,
            tol: f64,
            depth: usize,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                recurse(f, a, m, left, 0.5 * tol, depth - 1)
                    + recurse(f, m, b, right, 0.5 * tol, depth - 1)
            }
        }
        let whole = simpson(f, a, b);
        recurse(f, a, b, whole, tol, 40)
    }

    #[test]
    fn affine_eval() {
        let nl = Nonlinearity::Affine { a: 2.0, b: 0.0 };
        assert_eq!(nl.f(-0.2), 2.0);
        let nl = Nonlinearity::Affine { a: 2.0, b: 1.0 };
        assert_eq!(nl.f(0.0), 2.0);
    }

    #[test]
    fn polynomial_eval() {
        // 2 + 0·u + 3u² at u = 1
        let nl = Nonlinearity::Polynomial {
            coeffs: vec![2.0, 0.0, 3.0],
        };
        assert_eq!(nl.f(1.0), 5.0);
    }

    #[test]
    fn antiderivative_values() {
        let nl = Nonlinearity::Affine { a: 2.0, b: 0.0 };
        assert_eq!(nl.big_f(-0.2), -0.4);
        assert_eq!(nl.big_f(0.0), 0.0);
        let nl = Nonlinearity::Polynomial {
            coeffs: vec![2.0, 0.0, 3.0],
        };
        assert_eq!(nl.big_f(0.0), 0.0);
        // quadrature oracle: affine(2,1) from 0 to 1 -> 2.5
        let nl = Nonlinearity::Affine { a: 2.0, b: 1.0 };
        let quad = adaptive_simpson(&|t| nl.f(t), 0.0, 1.0, 1e-13);
        assert!((nl.big_f(1.0) - 2.5).abs() < 1e-15);
        assert!((nl.big_f(1.0) - quad).abs() < 1e-12);
    }

    #[test]
    fn derivative_values() {
        let nl = Nonlinearity::Affine { a: 2.0, b: 1.0 };
        assert_eq!(nl.f_prime(-3.7), 1.0);
        let nl = Nonlinearity::Affine { a: 2.0, b: 0.0 };
        assert_eq!(nl.f_prime(0.3), 0.0);
        // finite-difference check on u², step 1e-6, tol 1e-5
        let nl = Nonlinearity::Polynomial {
            coeffs: vec![0.0, 0.0, 1.0],
        };
        assert_eq!(nl.f_prime(2.0), 4.0);
        let fd = (nl.f(2.0 + 1e-6) - nl.f(2.0 - 1e-6)) / 2e-6;
        assert!((nl.f_prime(2.0) - fd).abs() < 1e-5);
    }

    #[test]
    fn positive_part() {
        assert_eq!(Nonlinearity::constant(2.0).f_plus(0.0), 2.0);
        assert_eq!(Nonlinearity::constant(-1.0).f_plus(0.0), 0.0);
        let nl = Nonlinearity::Affine { a: 0.0, b: 1.0 };
        assert_eq!(nl.f_plus(-3.0), 0.0);
    }

    #[test]
    fn monotone_flag() {
        let nl = Nonlinearity::Affine { a: 2.0, b: -1.0 };
        assert!(!nl.monotone_on(&[0.0]));
        let nl = Nonlinearity::Affine { a: 2.0, b: 1.0 };
        assert!(nl.monotone_on(&[-1.0, 0.0, 1.0]));
    }

    #[test]
    fn config_fragment_round_trip() {
        let nl: Nonlinearity =
            serde_json::from_str(r#"{"kind": "affine", "a": 2.0, "b": 0.0}"#).unwrap();
        assert_eq!(nl, Nonlinearity::Affine { a: 2.0, b: 0.0 });
        let nl: Nonlinearity =
            serde_json::from_str(r#"{"kind": "polynomial", "coeffs": [2, 0, 3]}"#).unwrap();
        assert_eq!(nl.f(1.0), 5.0);
    }

    proptest! {
        /// |F(u) − quadrature(f, 0, u)| ≤ 1e-10·(1+|u|) for both families.
        #[test]
        fn antiderivative_matches_quadrature(
            a in -5.0..5.0f64,
            b in -5.0..5.0f64,
            c2 in -2.0..2.0f64,
            u in -3.0..3.0f64,
        ) {
            for nl in [
                Nonlinearity::Affine { a, b },
                Nonlinearity::Polynomial { coeffs: vec![a, b, c2] },
            ] {
                let quad = adaptive_simpson(&|t| nl.f(t), 0.0, u, 1e-13);
                prop_assert!((nl.big_f(u) - quad).abs() <= 1e-10 * (1.0 + u.abs()));
            }
        }

        /// f₊ ≥ 0 and f₊ ≥ f pointwise.
        #[test]
        fn positive_part_bounds(a in -5.0..5.0f64, b in -5.0..5.0f64, u in -3.0..3.0f64) {
            let nl = Nonlinearity::Affine { a, b };
            prop_assert!(nl.f_plus(u) >= 0.0);
            prop_assert!(nl.f_plus(u) >= nl.f(u));
        }
    }
}
