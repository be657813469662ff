use pmc_core::fem::{solve_fem, FemOptions};
use pmc_core::geometry::Domain2D;
use pmc_core::mesh::mesh_polar;
use pmc_core::nonlinearity::Nonlinearity;

fn main() {
    let (nr, nt) = (32, 128);
    let mesh = mesh_polar(&Domain2D::ellipse(1.2, 0.8), nr, nt).unwrap();
    let sol = solve_fem(&mesh, &Nonlinearity::constant(2.0), FemOptions::default()).unwrap();
    let cycle = mesh.boundary_cycle();
    let (mut imax, mut imin) = (0, 0);
    for (i, &q) in sol.boundary_q.iter().enumerate() {
        if q > sol.boundary_q[imax] { imax = i; }
        if q < sol.boundary_q[imin] { imin = i; }
    }
    let pmax = mesh.vertices[cycle[imax]];
    let pmin = mesh.vertices[cycle[imin]];
    println!("qmax {:.5} at ({:.3},{:.3}); qmin {:.5} at ({:.3},{:.3})",
        sol.boundary_q[imax], pmax[0], pmax[1], sol.boundary_q[imin], pmin[0], pmin[1]);
    let over: usize = sol.boundary_q.iter().filter(|q| q.abs() >= 1.0).count();
    println!("samples with |q|>=1: {over}/{}", sol.boundary_q.len());
}
