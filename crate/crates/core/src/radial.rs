//! Radial reduction of the curvature problem on a geodesic ball.
//!
//! Solves (h^{n−1} u'/√(1+u'²))' = h^{n−1} f(u) with u'(0) = 0, u(R) = 0
//! by shooting on α = u(0). Writing s = u'/√(1+u'²) the system integrated
//! is
//!
//!     u' = s/√(1−s²),    s' = f(u) − (n−1)(h'/h)·s,
//!
//! which keeps the flux variable s in (−1, 1) and makes the degeneracy of
//! the operator visible as s → ±1. The removable pole singularity is
//! handled by the series u(ρ) = α + f(α)ρ²/(2n) + O(ρ⁴) on [0, ε].

use crate::error::{Error, Result};
use crate::metric::MetricSpec;
use crate::nonlinearity::Nonlinearity;
use crate::quadrature::ChebyshevGrid;

/// Slope cap beyond which the graph is declared near-vertical.
const SLOPE_CAP: f64 = 1e6;
/// Scan points for the shooting bracket.
const SCAN_POINTS: usize = 64;
/// Default Chebyshev node count (m intervals, m+1 nodes).
pub const DEFAULT_GRID: usize = 256;

/// Converged radial profile with derived pointwise quantities.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub grid: ChebyshevGrid,
    pub u: Vec<f64>,
    pub u_prime: Vec<f64>,
    /// w = √(1+u'²) per node.
    pub w: Vec<f64>,
    /// Angle function Θ = 1/w per node.
    pub theta: Vec<f64>,
    /// P = n/w + F(u) per node.
    pub p: Vec<f64>,
    /// Boundary slope c = u'(R); equals u_ν since ν = ∂ρ.
    pub c: f64,
    pub r: f64,
    pub metric: MetricSpec,
    pub nonlinearity: Nonlinearity,
    /// Defect estimate: max nodal |u − u_refined| from a half-step re-integration,
    /// plus the boundary residual |u(R)|.
    pub residual: f64,
    /// Number of sign-change brackets found in the shooting scan; > 1 flags
    /// possible non-uniqueness (the first bracket is the one solved).
    pub bracket_count: usize,
}

impl RadialSolution {
    pub fn n(&self) -> usize {
        self.metric.n
    }

    /// ∫_Ω g dv = ω_{n−1} ∫₀^R g(ρ) h(ρ)^{n−1} dρ for nodal values g.
    pub fn integral_domain(&self, nodal: &[f64]) -> f64 {
        let nm1 = (self.metric.n - 1) as i32;
        let vals: Vec<f64> = nodal
            .iter()
            .zip(&self.grid.nodes)
            .map(|(g, &rho)| g * self.metric.warp.h(rho).powi(nm1))
            .collect();
        self.metric.unit_sphere_area() * self.grid.integrate(&vals)
    }

    /// ∫_{∂Ω} g dS = ω_{n−1} h(R)^{n−1} g(R) for a boundary-constant g.
    pub fn integral_boundary(&self, value_at_r: f64) -> f64 {
        let nm1 = (self.metric.n - 1) as i32;
        self.metric.unit_sphere_area() * self.metric.warp.h(self.r).powi(nm1) * value_at_r
    }

    /// |Ω| and |∂Ω|.
    pub fn volume(&self) -> f64 {
        self.integral_domain(&vec![1.0; self.grid.len()])
    }

    pub fn boundary_area(&self) -> f64 {
        self.integral_boundary(1.0)
    }

    /// Mean curvature of ∂Ω in the outward convention, H̃ = −h'(R)/h(R).
    pub fn boundary_mean_curvature(&self) -> f64 {
        -self.metric.warp.h_prime(self.r) / self.metric.warp.h(self.r)
    }
}

/// Right-hand side of the first-order system in (u, s).
struct Ivp<'a> {
    metric: &'a MetricSpec,
    nl: &'a Nonlinearity,
}

impl Ivp<'_> {
    fn rhs(&self, rho: f64, u: f64, s: f64) -> (f64, f64) {
        let one_minus = (1.0 - s * s).max(1e-300);
        let du = s / one_minus.sqrt();
        let h = self.metric.warp.h(rho);
        let hp = self.metric.warp.h_prime(rho);
        let ds = self.nl.f(u) - (self.metric.n as f64 - 1.0) * (hp / h) * s;
        (du, ds)
    }
}

/// One classical RK4 step on (u, s).
fn rk4_step(ivp: &Ivp, rho: f64, u: f64, s: f64, dt: f64) -> (f64, f64) {
    let (k1u, k1s) = ivp.rhs(rho, u, s);
    let (k2u, k2s) = ivp.rhs(rho + 0.5 * dt, u + 0.5 * dt * k1u, s + 0.5 * dt * k1s);
    let (k3u, k3s) = ivp.rhs(rho + 0.5 * dt, u + 0.5 * dt * k2u, s + 0.5 * dt * k2s);
    let (k4u, k4s) = ivp.rhs(rho + dt, u + dt * k3u, s + dt * k3s);
    (
        u + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        s + dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s),
    )
}

/// Integrate the IVP from the pole to R over the given grid, with `substeps`
/// RK4 steps per grid interval. Returns nodal (u, s) or a stiffness report.
fn integrate(
    metric: &MetricSpec,
    nl: &Nonlinearity,
    grid: &ChebyshevGrid,
    alpha: f64,
    substeps: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let ivp = Ivp { metric, nl };
    let n = metric.n as f64;
    let m = grid.len() - 1;
    let eps = 1e-6 * grid.r;

    let mut us = Vec::with_capacity(m + 1);
    let mut ss = Vec::with_capacity(m + 1);
    us.push(alpha);
    ss.push(0.0);

    // series start: u(ε) = α + f(α)ε²/(2n), u'(ε) = f(α)ε/n
    let f0 = nl.f(alpha);
    let mut rho = eps;
    let mut u = alpha + f0 * eps * eps / (2.0 * n);
    let du = f0 * eps / n;
    let mut s = du / (1.0 + du * du).sqrt();

    for j in 1..=m {
        let target = grid.nodes[j];
        let dt = (target - rho) / substeps as f64;
        for _ in 0..substeps {
            let (nu, ns) = rk4_step(&ivp, rho, u, s, dt);
            u = nu;
            s = ns;
            rho += dt;
            if !s.is_finite() || s.abs() >= 1.0 - 1e-13 {
                return Err(Error::StiffProfile {
                    rho,
                    cap: SLOPE_CAP,
                });
            }
            let slope = s / (1.0 - s * s).sqrt();
            if slope.abs() > SLOPE_CAP {
                return Err(Error::StiffProfile {
                    rho,
                    cap: SLOPE_CAP,
                });
            }
        }
        rho = target;
        us.push(u);
        ss.push(s);
    }
    Ok((us, ss))
}

/// Options for the radial solve.
#[derive(Debug, Clone, Copy)]
pub struct RadialOptions {
    /// Boundary and defect tolerance.
    pub tol: f64,
    /// Chebyshev interval count (m+1 nodes).
    pub grid: usize,
    /// RK4 substeps per grid interval.
    pub substeps: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions {
            tol: 1e-10,
            grid: DEFAULT_GRID,
            substeps: 8,
        }
    }
}

/// Shooting solve of the radial boundary value problem.
pub fn solve_radial(
    metric: &MetricSpec,
    nl: &Nonlinearity,
    r: f64,
    opts: RadialOptions,
) -> Result<RadialSolution> {
    if r <= 0.0 {
        return Err(Error::InvalidConfig(format!("radius R = {r} must be > 0")));
    }
    if opts.tol <= 0.0 {
        return Err(Error::InvalidConfig("tol must be > 0".into()));
    }
    metric.admissible_on(r)?;

    let grid = ChebyshevGrid::new(opts.grid, r);

    // shooting map α ↦ u_α(R); stiff profiles poison the scan point
    let boundary_value = |alpha: f64| -> Option<f64> {
        integrate(metric, nl, &grid, alpha, opts.substeps)
            .ok()
            .map(|(us, _)| us[grid.len() - 1])
    };

    // scan window [−2n/|f(0)|, 0]; the cap solution has u(0) = O(R²f(0)/n),
    // comfortably inside
    let f0 = nl.f(0.0);
    let lo = if f0.abs() > 1e-9 {
        -2.0 * metric.n as f64 / f0.abs()
    } else {
        -2.0 * metric.n as f64
    };
    let hi = 0.0;

    let mut scan: Vec<(f64, f64)> = Vec::with_capacity(SCAN_POINTS);
    for i in 0..SCAN_POINTS {
        let alpha = lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64;
        if let Some(v) = boundary_value(alpha) {
            scan.push((alpha, v));
        }
    }
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    for pair in scan.windows(2) {
        let (a0, v0) = pair[0];
        let (a1, v1) = pair[1];
        if v0 == 0.0 {
            brackets.push((a0, a0));
        } else if v0 * v1 < 0.0 {
            brackets.push((a0, a1));
        }
    }
    if let Some(&(alpha, v)) = scan.last() {
        if v == 0.0 {
            brackets.push((alpha, alpha));
        }
    }
    if brackets.is_empty() {
        return Err(Error::BracketFailure { lo, hi });
    }
    let bracket_count = brackets.len();
    let (mut a, mut b) = brackets[0];

    // safeguarded Newton on the bracket, bisection fallback
    let mut alpha = 0.5 * (a + b);
    if a == b {
        alpha = a;
    }
    let mut fa = boundary_value(a).ok_or(Error::BracketFailure { lo, hi })?;
    let mut converged = false;
    let mut last_res = f64::INFINITY;
    for _ in 0..80 {
        let v = match boundary_value(alpha) {
            Some(v) => v,
            None => {
                return Err(Error::StiffProfile {
                    rho: r,
                    cap: SLOPE_CAP,
                })
            }
        };
        last_res = v.abs();
        if v.abs() <= opts.tol * 1e-2 {
            converged = true;
            break;
        }
        // maintain the bracket
        if a < b {
            if (v < 0.0) == (fa < 0.0) {
                a = alpha;
                fa = v;
            } else {
                b = alpha;
            }
        }
        // Newton step with finite-difference slope
        let dal = 1e-7 * (1.0 + alpha.abs());
        let vp = boundary_value(alpha + dal);
        let newton = vp.and_then(|vp| {
            let slope = (vp - v) / dal;
            if slope.abs() > 1e-14 {
                Some(alpha - v / slope)
            } else {
                None
            }
        });
        alpha = match newton {
            Some(next) if a < b && next > a && next < b => next,
            Some(next) if a >= b => next,
            _ => 0.5 * (a + b),
        };
    }
    if !converged {
        return Err(Error::NonConvergence {
            residual: last_res,
            iterations: 80,
        });
    }

    let (u, s) = integrate(metric, nl, &grid, alpha, opts.substeps)?;
    // defect estimate by half-step re-integration
    let (u2, _) = integrate(metric, nl, &grid, alpha, opts.substeps * 2)?;
    let defect = u
        .iter()
        .zip(&u2)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let boundary_defect = u[grid.len() - 1].abs();
    let residual = defect + boundary_defect;
    if residual > opts.tol {
        return Err(Error::NonConvergence {
            residual,
            iterations: 80,
        });
    }

    Ok(assemble(metric, nl, grid, u, s, residual, bracket_count))
}

fn assemble(
    metric: &MetricSpec,
    nl: &Nonlinearity,
    grid: ChebyshevGrid,
    u: Vec<f64>,
    s: Vec<f64>,
    residual: f64,
    bracket_count: usize,
) -> RadialSolution {
    let n = metric.n as f64;
    let u_prime: Vec<f64> = s.iter().map(|&s| s / (1.0 - s * s).sqrt()).collect();
    let w: Vec<f64> = u_prime.iter().map(|&d| (1.0 + d * d).sqrt()).collect();
    let theta: Vec<f64> = w.iter().map(|&w| 1.0 / w).collect();
    let p: Vec<f64> = w
        .iter()
        .zip(&u)
        .map(|(&w, &u)| n / w + nl.big_f(u))
        .collect();
    let c = *u_prime.last().unwrap();
    let r = grid.r;
    RadialSolution {
        grid,
        u,
        u_prime,
        w,
        theta,
        p,
        c,
        r,
        metric: metric.clone(),
        nonlinearity: nl.clone(),
        residual,
        bracket_count,
    }
}

/// Exact spherical-cap solution for flat metric and constant f ≡ f0:
/// the graph is a piece of the sphere of radius n/f0,
/// u(ρ) = √((n/f0)² − R²) − √((n/f0)² − ρ²).
pub fn cap_oracle(n: usize, r: f64, f0: f64, grid_m: usize) -> Result<RadialSolution> {
    let metric = MetricSpec::flat(n)?;
    if f0 <= 0.0 {
        return Err(Error::InvalidGeometry(format!(
            "cap oracle requires f0 > 0, got {f0}"
        )));
    }
    let q = n as f64 / f0;
    if r >= q {
        return Err(Error::InvalidGeometry(format!(
            "cap infeasible: R = {r} >= n/f0 = {q}; the cap cannot project over the ball"
        )));
    }
    if r <= 0.0 {
        return Err(Error::InvalidGeometry("cap requires R > 0".into()));
    }
    let nl = Nonlinearity::constant(f0);
    let grid = ChebyshevGrid::new(grid_m, r);
    let base = (q * q - r * r).sqrt();
    let u: Vec<f64> = grid
        .nodes
        .iter()
        .map(|&rho| base - (q * q - rho * rho).sqrt())
        .collect();
    let s: Vec<f64> = grid.nodes.iter().map(|&rho| rho / q).collect();
    Ok(assemble(&metric, &nl, grid, u, s, 0.0, 1))
}
