//! Chebyshev–Lobatto grids and Clenshaw–Curtis quadrature on [0, R].
//!
//! Used by the radial solver so that nodal data integrates with spectral
//! accuracy: identity residuals end up limited by solver tolerance, not
//! by the quadrature rule.

/// Chebyshev–Lobatto nodes mapped to [0, R] together with the matching
/// Clenshaw–Curtis weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevGrid {
    pub nodes: Vec<f64>,
    weights: Vec<f64>,
    pub r: f64,
}

impl ChebyshevGrid {
    /// m + 1 nodes ρ_j = R(1 − cos(πj/m))/2, j = 0..m; ρ_0 = 0, ρ_m = R.
    pub fn new(m: usize, r: f64) -> Self {
        assert!(m >= 2 && r > 0.0);
        let pi = std::f64::consts::PI;
        let nodes: Vec<f64> = (0..=m)
            .map(|j| {
                // 2 sin²(x/2) = 1 − cos(x), evaluated in the stable form
                let s = (0.5 * pi * j as f64 / m as f64).sin();
                r * s * s
            })
            .collect();
        let weights = clenshaw_curtis_weights(m)
            .into_iter()
            .map(|w| w * 0.5 * r)
            .collect();
        ChebyshevGrid { nodes, weights, r }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// ∫₀^R g dρ for nodal values g_j.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.nodes.len());
        values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum()
    }
}

/// Clenshaw–Curtis weights on [−1, 1] for the m+1 Lobatto nodes.
///
/// Derived from exact integration of the Chebyshev interpolant:
/// ∫T_k = 2/(1−k²) for even k, 0 for odd k.
fn clenshaw_curtis_weights(m: usize) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let mut w = vec![0.0; m + 1];
    for (j, wj) in w.iter_mut().enumerate() {
        let mut s = 0.0;
        let mut k = 0;
        while k <= m {
            let mut term = 2.0 / (1.0 - (k * k) as f64);
            if k == 0 || k == m {
                term *= 0.5;
            }
            s += term * (pi * (k * j) as f64 / m as f64).cos();
            k += 2;
        }
        *wj = s * 2.0 / m as f64;
        if j == 0 || j == m {
            *wj *= 0.5;
        }
    }
    w
}
