//! Structured polar triangulations of star-shaped domains.
//!
//! Meshes are deterministic by construction: a center fan plus quad rings
//! split into triangles, with boundary vertices placed exactly on the
//! domain curve. Uniform 1→4 refinement projects new boundary midpoints
//! back to the exact curve. The plain-text file format is line-oriented:
//! `v x y`, `t i j k`, `b i j`, 0-based indices, floats with 17
//! significant digits (exact f64 round trip).

use crate::error::{Error, Result};
use crate::geometry::Domain2D;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

/// Conforming triangle mesh with an oriented boundary cycle.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex-index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Boundary edges as ordered (tail, head) pairs forming one ccw cycle.
    pub boundary_edges: Vec<[usize; 2]>,
    pub is_boundary: Vec<bool>,
    /// Generating curve, kept so refinement can project midpoints; absent
    /// on meshes loaded from file.
    pub curve: Option<Domain2D>,
}

/// One value per mesh vertex; the P1 interpolant has a constant gradient
/// per triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(pub Vec<f64>);

impl ScalarField {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

impl Mesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [i, j, k] = self.triangles[t];
        signed_area(self.vertices[i], self.vertices[j], self.vertices[k])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Radius ratio quality 2·r_in/r_circ ∈ (0, 1]; 1 for equilateral.
    pub fn triangle_quality(&self, t: usize) -> f64 {
        let [i, j, k] = self.triangles[t];
        let (a, b, c) = (self.vertices[i], self.vertices[j], self.vertices[k]);
        let la = dist(b, c);
        let lb = dist(c, a);
        let lc = dist(a, b);
        let area = signed_area(a, b, c).abs();
        let s = 0.5 * (la + lb + lc);
        let r_in = area / s;
        let r_circ = la * lb * lc / (4.0 * area);
        2.0 * r_in / r_circ
    }

    /// Mesh size h = max circumdiameter over all triangles.
    pub fn mesh_size(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [i, j, k] = self.triangles[t];
                let (a, b, c) = (self.vertices[i], self.vertices[j], self.vertices[k]);
                let area = signed_area(a, b, c).abs();
                dist(b, c) * dist(c, a) * dist(a, b) / (2.0 * area)
            })
            .fold(0.0, f64::max)
    }

    /// Constant gradient of the P1 interpolant of `values` on triangle `t`.
    pub fn tri_gradient(&self, t: usize, values: &[f64]) -> [f64; 2] {
        let [i, j, k] = self.triangles[t];
        let (a, b, c) = (self.vertices[i], self.vertices[j], self.vertices[k]);
        let area2 = 2.0 * signed_area(a, b, c);
        // ∇λ_a = rot90(c − b)/(2A) with rot90(x, y) = (−y, x), cyclically
        let ga = [-(c[1] - b[1]) / area2, (c[0] - b[0]) / area2];
        let gb = [-(a[1] - c[1]) / area2, (a[0] - c[0]) / area2];
        let gc = [-(b[1] - a[1]) / area2, (b[0] - a[0]) / area2];
        [
            values[i] * ga[0] + values[j] * gb[0] + values[k] * gc[0],
            values[i] * ga[1] + values[j] * gb[1] + values[k] * gc[1],
        ]
    }

    /// Gradients of the three hat functions on triangle `t`.
    pub fn hat_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [i, j, k] = self.triangles[t];
        let (a, b, c) = (self.vertices[i], self.vertices[j], self.vertices[k]);
        let area2 = 2.0 * signed_area(a, b, c);
        [
            [-(c[1] - b[1]) / area2, (c[0] - b[0]) / area2],
            [-(a[1] - c[1]) / area2, (a[0] - c[0]) / area2],
            [-(b[1] - a[1]) / area2, (b[0] - a[0]) / area2],
        ]
    }

    /// Boundary vertices in cycle order, starting from the first edge tail.
    pub fn boundary_cycle(&self) -> Vec<usize> {
        self.boundary_edges.iter().map(|e| e[0]).collect()
    }

    /// Outward unit normal of boundary edge `e` (ccw boundary orientation).
    pub fn boundary_edge_normal(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.boundary_edges[e];
        let t = [
            self.vertices[b][0] - self.vertices[a][0],
            self.vertices[b][1] - self.vertices[a][1],
        ];
        let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
        [t[1] / len, -t[0] / len]
    }

    /// Structural validation: positive areas, single closed boundary cycle.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            let [i, j, k] = self.triangles[t];
            if i >= self.vertices.len() || j >= self.vertices.len() || k >= self.vertices.len() {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a vertex out of range"
                )));
            }
            if self.triangle_area(t) <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has nonpositive signed area {}",
                    self.triangle_area(t)
                )));
            }
        }
        if self.boundary_edges.is_empty() {
            return Err(Error::InvalidMesh("no boundary edges".into()));
        }
        // closed single cycle: every tail appears once as a head, and
        // walking successor links visits all edges exactly once
        let mut next: BTreeMap<usize, usize> = BTreeMap::new();
        for e in &self.boundary_edges {
            if next.insert(e[0], e[1]).is_some() {
                return Err(Error::InvalidMesh(format!(
                    "boundary vertex {} has two outgoing edges",
                    e[0]
                )));
            }
        }
        let start = self.boundary_edges[0][0];
        let mut cur = start;
        for step in 0..self.boundary_edges.len() {
            cur = match next.get(&cur) {
                Some(&n) => n,
                None => {
                    return Err(Error::InvalidMesh(format!(
                        "boundary cycle is open at vertex {cur} after {step} steps"
                    )))
                }
            };
        }
        if cur != start {
            return Err(Error::InvalidMesh(
                "boundary edges do not close into a single cycle".into(),
            ));
        }
        Ok(())
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Triangulate a star-shaped domain on a polar grid: one center vertex,
/// `nr` rings of `ntheta` vertices, a fan at the center, and two triangles
/// per ring quad. Boundary vertices lie exactly on the curve.
pub fn mesh_polar(domain: &Domain2D, nr: usize, ntheta: usize) -> Result<Mesh> {
    if nr < 2 || ntheta < 8 {
        return Err(Error::InvalidConfig(format!(
            "mesh_polar needs nr >= 2 and ntheta >= 8, got ({nr}, {ntheta})"
        )));
    }
    domain.validate()?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut vertices = vec![[0.0, 0.0]];
    for ring in 1..=nr {
        let t = ring as f64 / nr as f64;
        for j in 0..ntheta {
            let theta = two_pi * j as f64 / ntheta as f64;
            let p = domain.point(theta);
            vertices.push([t * p[0], t * p[1]]);
        }
    }
    let idx = |ring: usize, j: usize| -> usize { 1 + (ring - 1) * ntheta + j % ntheta };

    let mut triangles = Vec::with_capacity(ntheta * (2 * nr - 1));
    for j in 0..ntheta {
        triangles.push([0, idx(1, j), idx(1, j + 1)]);
    }
    for ring in 1..nr {
        for j in 0..ntheta {
            let a = idx(ring, j);
            let a1 = idx(ring, j + 1);
            let b = idx(ring + 1, j);
            let b1 = idx(ring + 1, j + 1);
            triangles.push([a, b, b1]);
            triangles.push([a, b1, a1]);
        }
    }

    let boundary_edges: Vec<[usize; 2]> = (0..ntheta)
        .map(|j| [idx(nr, j), idx(nr, j + 1)])
        .collect();
    let mut is_boundary = vec![false; vertices.len()];
    for j in 0..ntheta {
        is_boundary[idx(nr, j)] = true;
    }

    let mesh = Mesh {
        vertices,
        triangles,
        boundary_edges,
        is_boundary,
        curve: Some(domain.clone()),
    };
    mesh.validate()?;
    for t in 0..mesh.triangles.len() {
        let q = mesh.triangle_quality(t);
        if q < 1e-3 {
            let [i, j, k] = mesh.triangles[t];
            return Err(Error::InvalidMesh(format!(
                "degenerate triangle {t} (vertices {i},{j},{k}): quality {q:e} < 1e-3"
            )));
        }
    }
    Ok(mesh)
}

/// Uniform 1→4 refinement. New boundary midpoints are projected back to
/// the exact curve when the mesh carries one; h halves up to the
/// curvature correction.
pub fn refine(mesh: &Mesh) -> Mesh {
    let mut vertices = mesh.vertices.clone();
    let mut is_boundary = mesh.is_boundary.clone();

    let mut boundary_edge_set: BTreeMap<(usize, usize), ()> = BTreeMap::new();
    for e in &mesh.boundary_edges {
        boundary_edge_set.insert(key(e[0], e[1]), ());
    }

    let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>, is_boundary: &mut Vec<bool>| {
        *midpoint.entry(key(a, b)).or_insert_with(|| {
            let pa = vertices[a];
            let pb = vertices[b];
            let mut p = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let on_boundary = boundary_edge_set.contains_key(&key(a, b));
            if on_boundary {
                if let Some(curve) = &mesh.curve {
                    let (_, proj) = curve.project_to_boundary(p);
                    p = proj;
                }
            }
            vertices.push(p);
            is_boundary.push(on_boundary);
            vertices.len() - 1
        })
    };

    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let mab = mid(a, b, &mut vertices, &mut is_boundary);
        let mbc = mid(b, c, &mut vertices, &mut is_boundary);
        let mca = mid(c, a, &mut vertices, &mut is_boundary);
        triangles.push([a, mab, mca]);
        triangles.push([mab, b, mbc]);
        triangles.push([mca, mbc, c]);
        triangles.push([mab, mbc, mca]);
    }

    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for &[a, b] in &mesh.boundary_edges {
        let m = midpoint[&key(a, b)];
        boundary_edges.push([a, m]);
        boundary_edges.push([m, b]);
    }

    Mesh {
        vertices,
        triangles,
        boundary_edges,
        is_boundary,
        curve: mesh.curve.clone(),
    }
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Write the line-oriented text format.
pub fn write_mesh<W: Write>(mesh: &Mesh, out: &mut W) -> Result<()> {
    for v in &mesh.vertices {
        writeln!(out, "v {:.16e} {:.16e}", v[0], v[1])?;
    }
    for t in &mesh.triangles {
        writeln!(out, "t {} {} {}", t[0], t[1], t[2])?;
    }
    for e in &mesh.boundary_edges {
        writeln!(out, "b {} {}", e[0], e[1])?;
    }
    Ok(())
}

/// Parse the text format, validating structure; errors carry line numbers.
pub fn read_mesh<R: BufRead>(input: R) -> Result<Mesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut boundary_edges = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let tag = parts.next().unwrap();
        let fields: Vec<&str> = parts.collect();
        let parse_err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        match tag {
            "v" => {
                if fields.len() != 2 {
                    return Err(parse_err(format!(
                        "vertex record needs 2 coordinates, got {}",
                        fields.len()
                    )));
                }
                let x: f64 = fields[0]
                    .parse()
                    .map_err(|e| parse_err(format!("bad x coordinate: {e}")))?;
                let y: f64 = fields[1]
                    .parse()
                    .map_err(|e| parse_err(format!("bad y coordinate: {e}")))?;
                vertices.push([x, y]);
            }
            "t" => {
                if fields.len() != 3 {
                    return Err(parse_err(format!(
                        "triangle record needs 3 indices, got {}",
                        fields.len()
                    )));
                }
                let mut tri = [0usize; 3];
                for (slot, f) in tri.iter_mut().zip(&fields) {
                    *slot = f
                        .parse()
                        .map_err(|e| parse_err(format!("bad vertex index: {e}")))?;
                }
                triangles.push(tri);
            }
            "b" => {
                if fields.len() != 2 {
                    return Err(parse_err(format!(
                        "boundary record needs 2 indices, got {}",
                        fields.len()
                    )));
                }
                let a: usize = fields[0]
                    .parse()
                    .map_err(|e| parse_err(format!("bad edge index: {e}")))?;
                let b: usize = fields[1]
                    .parse()
                    .map_err(|e| parse_err(format!("bad edge index: {e}")))?;
                boundary_edges.push([a, b]);
            }
            other => {
                return Err(parse_err(format!("unknown record tag '{other}'")));
            }
        }
    }
    let mut is_boundary = vec![false; vertices.len()];
    for e in &boundary_edges {
        if e[0] >= vertices.len() || e[1] >= vertices.len() {
            return Err(Error::InvalidMesh(
                "boundary edge references vertex out of range".into(),
            ));
        }
        is_boundary[e[0]] = true;
        is_boundary[e[1]] = true;
    }
    let mesh = Mesh {
        vertices,
        triangles,
        boundary_edges,
        is_boundary,
        curve: None,
    };
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::BufReader;

    fn disk_mesh(nr: usize, ntheta: usize) -> Mesh {
        mesh_polar(&Domain2D::disk(0.6), nr, ntheta).unwrap()
    }

    #[test]
    fn counts_by_construction_rule() {
        let m = disk_mesh(2, 8);
        assert_eq!(m.vertex_count(), 17); // 1 center + 2·8 ring vertices
        assert_eq!(m.triangle_count(), 24); // 8 fan + 16 ring triangles
        assert_eq!(m.boundary_edges.len(), 8);
    }

    #[test]
    fn disk_area_defect() {
        let pi = std::f64::consts::PI;
        let m = disk_mesh(16, 64);
        let exact = pi * 0.36;
        assert!((m.total_area() - exact).abs() / exact < 0.002);
    }

    #[test]
    fn ellipse_boundary_vertices_on_curve() {
        let m = mesh_polar(&Domain2D::ellipse(1.2, 0.8), 16, 64).unwrap();
        for (i, v) in m.vertices.iter().enumerate() {
            if m.is_boundary[i] {
                let res = (v[0] / 1.2).powi(2) + (v[1] / 0.8).powi(2) - 1.0;
                assert!(res.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn refine_counts() {
        let m = disk_mesh(2, 8);
        let r = refine(&m);
        assert_eq!(r.triangle_count(), 96);
        // V' = V + E
        let mut edges = std::collections::BTreeSet::new();
        for t in &m.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                edges.insert(key(a, b));
            }
        }
        assert_eq!(r.vertex_count(), m.vertex_count() + edges.len());
        r.validate().unwrap();
    }

    #[test]
    fn refine_area_error_shrinks_fourfold() {
        let pi = std::f64::consts::PI;
        let exact = pi * 0.36;
        let mut m = disk_mesh(4, 16);
        let mut prev = (m.total_area() - exact).abs();
        for _ in 0..3 {
            m = refine(&m);
            let err = (m.total_area() - exact).abs();
            let ratio = prev / err;
            assert!(
                (3.3..4.7).contains(&ratio),
                "area error ratio {ratio} not ~4"
            );
            prev = err;
        }
    }

    #[test]
    fn orientation_preserved_everywhere() {
        let mut m = mesh_polar(&Domain2D::ellipse(1.2, 0.8), 8, 32).unwrap();
        for _ in 0..2 {
            for t in 0..m.triangle_count() {
                assert!(m.triangle_area(t) > 0.0);
            }
            m.validate().unwrap();
            m = refine(&m);
        }
    }

    #[test]
    fn interpolation_order_for_quadratic() {
        // nodal interpolation of u = x² + y², error sampled at barycenters
        let mut m = disk_mesh(8, 32);
        let mut errors = Vec::new();
        for _ in 0..4 {
            let vals: Vec<f64> = m
                .vertices
                .iter()
                .map(|v| v[0] * v[0] + v[1] * v[1])
                .collect();
            let mut emax = 0.0f64;
            for t in 0..m.triangle_count() {
                let [i, j, k] = m.triangles[t];
                let bx =
                    (m.vertices[i][0] + m.vertices[j][0] + m.vertices[k][0]) / 3.0;
                let by =
                    (m.vertices[i][1] + m.vertices[j][1] + m.vertices[k][1]) / 3.0;
                let interp = (vals[i] + vals[j] + vals[k]) / 3.0;
                emax = emax.max((interp - (bx * bx + by * by)).abs());
            }
            errors.push(emax);
            m = refine(&m);
        }
        for pair in errors.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!(order >= 1.9, "interpolation order {order} < 1.9");
        }
    }

    #[test]
    fn io_round_trip_bitwise() {
        let m = disk_mesh(2, 8);
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let m2 = read_mesh(BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(m.vertices, m2.vertices);
        assert_eq!(m.triangles, m2.triangles);
        assert_eq!(m.boundary_edges, m2.boundary_edges);
    }

    #[test]
    fn negative_area_rejected_with_index() {
        let text = "v 0 0\nv 1 0\nv 0 1\nt 0 2 1\nb 0 1\nb 1 2\nb 2 0\n";
        let err = read_mesh(BufReader::new(text.as_bytes())).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("triangle 0"), "unexpected message: {msg}");
    }

    #[test]
    fn open_boundary_cycle_rejected() {
        let text = "v 0 0\nv 1 0\nv 0 1\nt 0 1 2\nb 0 1\nb 1 2\n";
        assert!(read_mesh(BufReader::new(text.as_bytes())).is_err());
    }

    #[test]
    fn parse_error_carries_line_number() {
        let text = "v 0 0\nv 1 0\nv nope 1\n";
        match read_mesh(BufReader::new(text.as_bytes())) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn quality_guard_rejects_degenerate() {
        // boundary radius collapsing over one step creates slivers
        let spiky = Domain2D::RadialGraph {
            cos: vec![0.5001, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
            sin: vec![],
        };
        assert!(mesh_polar(&spiky, 2, 64).is_err());
    }
}
