//! P1 finite-element solver for div(Du/w) = f(u), u = 0 on ∂Ω.
//!
//! Weak form: ∫ ⟨Du/w, Dv⟩ + ∫ f(u)·v = 0 over interior hat functions v.
//! Linear elements make w element-constant, so the flux integrals are
//! exact; the nonlinear term uses one-point quadrature at the barycenter.
//! Newton runs with the exact flux Jacobian M = I/w − (Du⊗Du)/w³ per
//! triangle plus the mass-weighted f'(u) term, damped by backtracking
//! halving, under 4-step continuation in the amplitude of f. Dirichlet
//! rows are eliminated, not penalized.
//!
//! Boundary flux is recovered variationally: q at boundary vertices
//! solves ∫_∂Ω q·v = ∫_Ω ⟨Du/w, Dv⟩ + ∫_Ω f(u)·v for every boundary hat
//! v, which makes the divergence-theorem identity ∫_∂Ω q = ∫_Ω f(u) hold
//! at the discrete level up to the converged interior residual.

use crate::error::{Error, Result};
use crate::geometry::BoundaryTrace;
use crate::linalg::{reverse_cuthill_mckee, solve_cyclic_tridiagonal, SymBandMatrix};
use crate::mesh::{refine, Mesh, ScalarField};
use crate::nonlinearity::Nonlinearity;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct FemOptions {
    /// Convergence tolerance on the Newton decrement √(rᵀJ⁻¹r).
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Number of continuation steps scaling f by k/steps, k = 1..steps.
    pub continuation_steps: usize,
}

impl Default for FemOptions {
    fn default() -> Self {
        FemOptions {
            newton_tol: 1e-10,
            max_iter: 50,
            continuation_steps: 4,
        }
    }
}

/// One Newton iteration record: (continuation scale, iteration, ℓ2
/// residual before the step, accepted damping factor).
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub scale: f64,
    pub iteration: usize,
    pub residual_norm: f64,
    pub damping: f64,
}

/// Converged discrete solution.
#[derive(Debug, Clone)]
pub struct FemSolution {
    pub mesh: Mesh,
    pub u: ScalarField,
    /// Du per triangle (constant for P1).
    pub tri_gradient: Vec<[f64; 2]>,
    /// w = √(1+|Du|²) per triangle.
    pub tri_w: Vec<f64>,
    pub tri_area: Vec<f64>,
    /// Flux q = u_ν/w per boundary-cycle vertex (variationally recovered).
    pub boundary_q: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
    pub nonlinearity: Nonlinearity,
    /// Final ℓ2 norm of the interior weak residual.
    pub residual_norm: f64,
}

impl FemSolution {
    /// ∫_Ω of the P1 interpolant of nodal values.
    pub fn integral_domain(&self, nodal: &[f64]) -> f64 {
        let mut s = 0.0;
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            s += self.tri_area[t] * (nodal[tri[0]] + nodal[tri[1]] + nodal[tri[2]]) / 3.0;
        }
        s
    }

    /// ∫_Ω f(u) with the same one-point barycenter rule the residual uses,
    /// so the flux-recovery compatibility identity is construction-exact.
    pub fn integral_f_of_u(&self) -> f64 {
        let u = &self.u.0;
        let mut s = 0.0;
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let ubar = (u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0;
            s += self.tri_area[t] * self.nonlinearity.f(ubar);
        }
        s
    }

    /// max q − min q over boundary vertices: the rigidity diagnostic.
    pub fn flux_spread(&self) -> f64 {
        let max = self.boundary_q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.boundary_q.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Area-weighted nodal reconstruction of the element-constant w.
    pub fn nodal_w(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.mesh.vertex_count()];
        let mut wt = vec![0.0; self.mesh.vertex_count()];
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            for &v in tri {
                acc[v] += self.tri_area[t] * self.tri_w[t];
                wt[v] += self.tri_area[t];
            }
        }
        acc.iter().zip(&wt).map(|(a, w)| a / w).collect()
    }
}

/// Interior degree-of-freedom numbering in RCM order.
struct DofMap {
    /// dof -> vertex
    vertices: Vec<usize>,
    /// vertex -> dof
    dof_of: Vec<Option<usize>>,
    bandwidth: usize,
}

fn build_dof_map(mesh: &Mesh) -> DofMap {
    let interior: Vec<usize> = (0..mesh.vertex_count())
        .filter(|&v| !mesh.is_boundary[v])
        .collect();
    let mut index_of = vec![usize::MAX; mesh.vertex_count()];
    for (i, &v) in interior.iter().enumerate() {
        index_of[v] = i;
    }
    // adjacency among interior vertices through triangle edges
    let mut adj = vec![Vec::new(); interior.len()];
    for tri in &mesh.triangles {
        for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
            let (ia, ib) = (index_of[a], index_of[b]);
            if ia != usize::MAX && ib != usize::MAX {
                adj[ia].push(ib);
                adj[ib].push(ia);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let perm = reverse_cuthill_mckee(&adj);
    let vertices: Vec<usize> = perm.iter().map(|&i| interior[i]).collect();
    let mut dof_of = vec![None; mesh.vertex_count()];
    for (dof, &v) in vertices.iter().enumerate() {
        dof_of[v] = Some(dof);
    }
    let mut bandwidth = 0usize;
    for tri in &mesh.triangles {
        for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
            if let (Some(da), Some(db)) = (dof_of[a], dof_of[b]) {
                bandwidth = bandwidth.max(da.abs_diff(db));
            }
        }
    }
    DofMap {
        vertices,
        dof_of,
        bandwidth,
    }
}

/// Per-triangle geometric data reused across iterations.
struct Elements {
    area: Vec<f64>,
    hat_grads: Vec<[[f64; 2]; 3]>,
}

fn build_elements(mesh: &Mesh) -> Elements {
    let mut area = Vec::with_capacity(mesh.triangle_count());
    let mut hat_grads = Vec::with_capacity(mesh.triangle_count());
    for t in 0..mesh.triangle_count() {
        area.push(mesh.triangle_area(t));
        hat_grads.push(mesh.hat_gradients(t));
    }
    Elements { area, hat_grads }
}

fn tri_gradient_of(elements: &Elements, tri: &[usize; 3], t: usize, u: &[f64]) -> [f64; 2] {
    let g = &elements.hat_grads[t];
    let mut gx = 0.0;
    let mut gy = 0.0;
    for (local, &v) in tri.iter().enumerate() {
        gx += u[v] * g[local][0];
        gy += u[v] * g[local][1];
    }
    [gx, gy]
}

/// Weak residual restricted to interior dofs, with f scaled by `scale`.
fn assemble_residual(
    mesh: &Mesh,
    elements: &Elements,
    dofs: &DofMap,
    nl: &Nonlinearity,
    scale: f64,
    u: &[f64],
) -> Vec<f64> {
    let mut r = vec![0.0; dofs.vertices.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let g = tri_gradient_of(elements, tri, t, u);
        let w = (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt();
        let area = elements.area[t];
        let ubar = (u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0;
        let fval = scale * nl.f(ubar);
        for (local, &v) in tri.iter().enumerate() {
            if let Some(d) = dofs.dof_of[v] {
                let hg = elements.hat_grads[t][local];
                r[d] += area * (g[0] * hg[0] + g[1] * hg[1]) / w + area * fval / 3.0;
            }
        }
    }
    r
}

/// Exact Newton Jacobian: flux part area·(Dλ_jᵀ M Dλ_i) with
/// M = I/w − (Du⊗Du)/w³, plus the mass-weighted f'(ū)/9 term.
fn assemble_jacobian(
    mesh: &Mesh,
    elements: &Elements,
    dofs: &DofMap,
    nl: &Nonlinearity,
    scale: f64,
    u: &[f64],
) -> SymBandMatrix {
    let mut a = SymBandMatrix::zeros(dofs.vertices.len(), dofs.bandwidth);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let g = tri_gradient_of(elements, tri, t, u);
        let w2 = 1.0 + g[0] * g[0] + g[1] * g[1];
        let w = w2.sqrt();
        let w3 = w2 * w;
        let area = elements.area[t];
        let ubar = (u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0;
        let fp = scale * nl.f_prime(ubar);
        let m = [
            [1.0 / w - g[0] * g[0] / w3, -g[0] * g[1] / w3],
            [-g[0] * g[1] / w3, 1.0 / w - g[1] * g[1] / w3],
        ];
        for (li, &vi) in tri.iter().enumerate() {
            let Some(di) = dofs.dof_of[vi] else { continue };
            let gi = elements.hat_grads[t][li];
            let mgi = [
                m[0][0] * gi[0] + m[0][1] * gi[1],
                m[1][0] * gi[0] + m[1][1] * gi[1],
            ];
            for (lj, &vj) in tri.iter().enumerate() {
                let Some(dj) = dofs.dof_of[vj] else { continue };
                if dj > di {
                    continue; // symmetric: assemble lower triangle once
                }
                let gj = elements.hat_grads[t][lj];
                let val = area * (mgi[0] * gj[0] + mgi[1] * gj[1]) + area * fp / 9.0;
                a.add(di, dj, val);
            }
        }
    }
    a
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton with continuation in the f-amplitude.
pub fn solve_fem(mesh: &Mesh, nl: &Nonlinearity, opts: FemOptions) -> Result<FemSolution> {
    mesh.validate()?;
    if opts.continuation_steps == 0 || opts.max_iter == 0 || opts.newton_tol <= 0.0 {
        return Err(Error::InvalidConfig(
            "fem options must be positive".into(),
        ));
    }
    let elements = build_elements(mesh);
    let dofs = build_dof_map(mesh);
    if dofs.vertices.is_empty() {
        return Err(Error::InvalidMesh("mesh has no interior vertices".into()));
    }

    let mut u = vec![0.0; mesh.vertex_count()];
    let mut log = Vec::new();
    let mut final_res = 0.0;

    for k in 1..=opts.continuation_steps {
        let scale = k as f64 / opts.continuation_steps as f64;
        let last = k == opts.continuation_steps;
        match newton_at_scale(
            mesh, &elements, &dofs, nl, scale, opts, &mut u, &mut log,
        ) {
            Ok(res) => final_res = res,
            Err(e) => {
                if last {
                    return Err(e);
                }
                return Err(Error::ContinuationStalled { scale });
            }
        }
    }

    let u_field = ScalarField(u.clone());
    let mut tri_gradient = Vec::with_capacity(mesh.triangle_count());
    let mut tri_w = Vec::with_capacity(mesh.triangle_count());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let g = tri_gradient_of(&elements, tri, t, &u);
        tri_w.push((1.0 + g[0] * g[0] + g[1] * g[1]).sqrt());
        tri_gradient.push(g);
    }

    let mut sol = FemSolution {
        mesh: mesh.clone(),
        u: u_field,
        tri_gradient,
        tri_w,
        tri_area: elements.area.clone(),
        boundary_q: Vec::new(),
        iterations: log,
        nonlinearity: nl.clone(),
        residual_norm: final_res,
    };
    sol.boundary_q = recover_flux_values(&sol, &elements, &dofs)?;
    Ok(sol)
}

/// Newton loop at one continuation scale. Returns the final ℓ2 residual.
#[allow(clippy::too_many_arguments)]
fn newton_at_scale(
    mesh: &Mesh,
    elements: &Elements,
    dofs: &DofMap,
    nl: &Nonlinearity,
    scale: f64,
    opts: FemOptions,
    u: &mut Vec<f64>,
    log: &mut Vec<IterationRecord>,
) -> Result<f64> {
    let mut r = assemble_residual(mesh, elements, dofs, nl, scale, u);
    let mut r_norm = norm2(&r);

    for iter in 0..opts.max_iter {
        if r_norm <= 1e-14 {
            return Ok(r_norm);
        }
        let jac = assemble_jacobian(mesh, elements, dofs, nl, scale, u);
        let neg_r: Vec<f64> = r.iter().map(|x| -x).collect();
        let step = jac.factor_ldlt()?.solve(&neg_r);
        // Newton decrement √(rᵀJ⁻¹r) = √(−rᵀd): the dual-norm residual
        let decrement = (-r
            .iter()
            .zip(&step)
            .map(|(ri, di)| ri * di)
            .sum::<f64>())
        .abs()
        .sqrt();

        // backtracking halving; never accept a residual increase
        let mut damping = 1.0f64;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = u
                .iter()
                .enumerate()
                .map(|(v, &uv)| {
                    if let Some(d) = dofs.dof_of[v] {
                        uv + damping * step[d]
                    } else {
                        uv
                    }
                })
                .collect();
            let r_new = assemble_residual(mesh, elements, dofs, nl, scale, &trial);
            let n_new = norm2(&r_new);
            if n_new < r_norm {
                accepted = Some((trial, r_new, n_new));
                break;
            }
            damping *= 0.5;
        }
        let Some((trial, r_new, n_new)) = accepted else {
            return Err(Error::NewtonDiverged {
                iteration: iter,
                residual: r_norm,
            });
        };
        log.push(IterationRecord {
            scale,
            iteration: iter,
            residual_norm: r_norm,
            damping,
        });
        *u = trial;
        r = r_new;
        r_norm = n_new;
        if decrement <= opts.newton_tol {
            return Ok(r_norm);
        }
    }
    Err(Error::NewtonDiverged {
        iteration: opts.max_iter,
        residual: r_norm,
    })
}

/// Solve the boundary consistency system M_∂ q = r_∂ for the nodal flux.
fn recover_flux_values(
    sol: &FemSolution,
    elements: &Elements,
    dofs: &DofMap,
) -> Result<Vec<f64>> {
    let mesh = &sol.mesh;
    let cycle = mesh.boundary_cycle();
    let nb = cycle.len();
    let mut slot = vec![usize::MAX; mesh.vertex_count()];
    for (i, &v) in cycle.iter().enumerate() {
        slot[v] = i;
    }
    // residual functional applied to boundary hats
    let u = &sol.u.0;
    let mut rhs = vec![0.0; nb];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let g = sol.tri_gradient[t];
        let w = sol.tri_w[t];
        let area = elements.area[t];
        let ubar = (u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0;
        let fval = sol.nonlinearity.f(ubar);
        for (local, &v) in tri.iter().enumerate() {
            if dofs.dof_of[v].is_none() {
                let hg = elements.hat_grads[t][local];
                rhs[slot[v]] += area * (g[0] * hg[0] + g[1] * hg[1]) / w + area * fval / 3.0;
            }
        }
    }
    // P1 boundary mass matrix along the polygonal boundary
    let lengths: Vec<f64> = (0..nb)
        .map(|k| {
            let a = mesh.vertices[cycle[k]];
            let b = mesh.vertices[cycle[(k + 1) % nb]];
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
        .collect();
    let diag: Vec<f64> = (0..nb)
        .map(|k| (lengths[(k + nb - 1) % nb] + lengths[k]) / 3.0)
        .collect();
    let off: Vec<f64> = (0..nb).map(|k| lengths[k] / 6.0).collect();
    let q = solve_cyclic_tridiagonal(&diag, &off, &rhs)?;
    Ok(q)
}

/// Boundary trace of a finite-element solution: one sample per boundary
/// vertex in cycle order, with recovered q, u_ν, w and exact curvature
/// when the mesh carries its generating curve.
pub fn recover_boundary_flux(sol: &FemSolution) -> Result<BoundaryTrace> {
    let mesh = &sol.mesh;
    let cycle = mesh.boundary_cycle();
    let nb = cycle.len();
    let lengths: Vec<f64> = (0..nb)
        .map(|k| {
            let a = mesh.vertices[cycle[k]];
            let b = mesh.vertices[cycle[(k + 1) % nb]];
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
        .collect();
    let positions: Vec<[f64; 2]> = cycle.iter().map(|&v| mesh.vertices[v]).collect();
    let weights: Vec<f64> = (0..nb)
        .map(|k| 0.5 * (lengths[(k + nb - 1) % nb] + lengths[k]))
        .collect();
    let mut normals = Vec::with_capacity(nb);
    let mut curvature = Vec::with_capacity(nb);
    match &mesh.curve {
        Some(curve) => {
            for p in &positions {
                let (theta, _) = curve.project_to_boundary(*p);
                normals.push(curve.outward_normal(theta));
                curvature.push(curve.boundary_curvature(theta));
            }
        }
        None => {
            // polygon fallback: averaged edge normals, circumcircle curvature
            for k in 0..nb {
                let prev = positions[(k + nb - 1) % nb];
                let cur = positions[k];
                let next = positions[(k + 1) % nb];
                let e0 = [cur[0] - prev[0], cur[1] - prev[1]];
                let e1 = [next[0] - cur[0], next[1] - cur[1]];
                let mut n = [e0[1] + e1[1], -(e0[0] + e1[0])];
                let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
                n = [n[0] / len, n[1] / len];
                normals.push(n);
                let area2 = e0[0] * e1[1] - e0[1] * e1[0];
                let a = (e0[0] * e0[0] + e0[1] * e0[1]).sqrt();
                let b = (e1[0] * e1[0] + e1[1] * e1[1]).sqrt();
                let c = {
                    let d = [next[0] - prev[0], next[1] - prev[1]];
                    (d[0] * d[0] + d[1] * d[1]).sqrt()
                };
                curvature.push(-2.0 * area2 / (a * b * c));
            }
        }
    }
    let trace = BoundaryTrace {
        positions,
        normals,
        weights,
        curvature,
        q: None,
        u_nu: None,
        w: None,
        stiff: Vec::new(),
    };
    Ok(trace.with_flux(sol.boundary_q.clone()))
}

/// Per-level row of a refinement study.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub level: usize,
    pub h: f64,
    pub vertices: usize,
    pub error: f64,
    pub order: Option<f64>,
}

/// Solve on a mesh hierarchy obtained by uniform refinement and report
/// per-level errors: against an exact radial profile when one is supplied,
/// otherwise Cauchy differences against the finest level.
pub fn convergence_sweep(
    base: &Mesh,
    nl: &Nonlinearity,
    levels: usize,
    opts: FemOptions,
    exact: Option<&dyn Fn([f64; 2]) -> f64>,
) -> Result<Vec<SweepRow>> {
    if levels < 2 {
        return Err(Error::InvalidConfig("convergence sweep needs >= 2 levels".into()));
    }
    let mut meshes = vec![base.clone()];
    for _ in 1..levels {
        meshes.push(refine(meshes.last().unwrap()));
    }
    let mut solutions = Vec::with_capacity(levels);
    for m in &meshes {
        solutions.push(solve_fem(m, nl, opts)?);
    }
    let mut rows: Vec<SweepRow> = Vec::with_capacity(levels);
    for (l, sol) in solutions.iter().enumerate() {
        let error = match exact {
            Some(f) => sol
                .mesh
                .vertices
                .iter()
                .zip(&sol.u.0)
                .map(|(p, &u)| (u - f(*p)).abs())
                .fold(0.0f64, f64::max),
            None => {
                // vertices of level l keep their indices in the finest mesh
                let finest = &solutions[levels - 1];
                if l == levels - 1 {
                    f64::NAN
                } else {
                    sol.u
                        .0
                        .iter()
                        .enumerate()
                        .map(|(v, &u)| (u - finest.u.0[v]).abs())
                        .fold(0.0f64, f64::max)
                }
            }
        };
        let order = if l > 0 && rows[l - 1].error > 0.0 && error > 0.0 {
            Some((rows[l - 1].error / error).log2())
        } else {
            None
        };
        rows.push(SweepRow {
            level: l,
            h: meshes[l].mesh_size(),
            vertices: meshes[l].vertex_count(),
            error,
            order,
        });
    }
    Ok(rows)
}

/// Compare the assembled Jacobian action against central finite
/// differences of the weak residual along random interior directions.
/// Returns the maximum relative ℓ2 error over `dirs` directions.
pub fn jacobian_fd_check(
    mesh: &Mesh,
    nl: &Nonlinearity,
    u_state: &[f64],
    dirs: usize,
    seed: u64,
) -> f64 {
    let elements = build_elements(mesh);
    let dofs = build_dof_map(mesh);
    let jac = assemble_jacobian(mesh, &elements, &dofs, nl, 1.0, u_state);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..dirs {
        let mut dir: Vec<f64> = (0..dofs.vertices.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let n = norm2(&dir);
        dir.iter_mut().for_each(|x| *x /= n);
        let jv = jac.mul_vec(&dir);
        let mut up = u_state.to_vec();
        let mut um = u_state.to_vec();
        for (d, &v) in dofs.vertices.iter().enumerate() {
            up[v] += eps * dir[d];
            um[v] -= eps * dir[d];
        }
        let rp = assemble_residual(mesh, &elements, &dofs, nl, 1.0, &up);
        let rm = assemble_residual(mesh, &elements, &dofs, nl, 1.0, &um);
        let fd: Vec<f64> = rp
            .iter()
            .zip(&rm)
            .map(|(p, m)| (p - m) / (2.0 * eps))
            .collect();
        let diff: Vec<f64> = fd.iter().zip(&jv).map(|(a, b)| a - b).collect();
        worst = worst.max(norm2(&diff) / norm2(&jv).max(1e-300));
    }
    worst
}
