//! Conforming triangle meshes with oriented-edge topology.
//!
//! Local edge `i` of a triangle is the edge opposite its local vertex `i`.
//! Every edge carries a global orientation from its lower to its higher
//! vertex index; its global normal is the clockwise rotation of that unit
//! tangent. `tri_edges` stores, per triangle, the edge index together with
//! the sign relating the triangle's outward normal to the global normal.

mod generators;
mod io;
mod refine;

use std::collections::HashMap;

pub use generators::{
    make_lshape_mesh, make_square_piecewise_uniform, make_unit_square_uniform, reference_triangle,
};
pub use io::{read_mesh, write_mesh};
pub use refine::{refine_marked, uniform_quad_refine};

use crate::error::{Error, Result};
use crate::scalar::{cross, midpoint, norm, sub, Point, Real};

/// Two triangles produced by a green bisection of `parent`.
///
/// `parent` lists the parent's vertices counterclockwise; `midpoint` is the
/// vertex inserted on the bisected parent edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreenPair {
    pub triangles: [usize; 2],
    pub parent: [usize; 3],
    pub midpoint: usize,
}

#[derive(Clone, Debug)]
pub struct Mesh<T> {
    vertices: Vec<Point<T>>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[(usize, i8); 3]>,
    edge_tris: Vec<[Option<usize>; 2]>,
    boundary_edges: Vec<usize>,
    region: Vec<u32>,
    green_pairs: Vec<GreenPair>,
}

/// Size and shape-regularity summary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshStats<T> {
    pub nt: usize,
    pub h_max: T,
    pub h_min: T,
    /// Largest circumradius / inradius ratio (2 for an equilateral triangle).
    pub max_ratio: T,
}

/// Builds a mesh, reorienting clockwise triangles and constructing the edge topology.
pub fn build_mesh<T: Real>(
    vertices: Vec<Point<T>>,
    triangles: Vec<[usize; 3]>,
    region: Vec<u32>,
) -> Result<Mesh<T>> {
    Mesh::new(vertices, triangles, region, Vec::new())
}

impl<T: Real> Mesh<T> {
    pub(crate) fn new(
        vertices: Vec<Point<T>>,
        mut triangles: Vec<[usize; 3]>,
        region: Vec<u32>,
        green_pairs: Vec<GreenPair>,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if region.len() != triangles.len() {
            return Err(Error::RegionLength { got: region.len(), expected: triangles.len() });
        }
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= nv) {
                return Err(Error::VertexOutOfRange { triangle: t, vertex: v, nv });
            }
        }

        let mut h_max = T::zero();
        for tri in &triangles {
            for i in 0..3 {
                let e = norm(sub(vertices[tri[(i + 1) % 3]], vertices[tri[(i + 2) % 3]]));
                h_max = h_max.max(e);
            }
        }
        let area_floor = T::lit(1e-14) * h_max * h_max;
        for (t, tri) in triangles.iter_mut().enumerate() {
            let a2 = cross(sub(vertices[tri[1]], vertices[tri[0]]), sub(vertices[tri[2]], vertices[tri[0]]));
            if a2.abs() * T::lit(0.5) <= area_floor {
                return Err(Error::DegenerateTriangle(t, (a2 * T::lit(0.5)).as_f64()));
            }
            if a2 < T::zero() {
                tri.swap(1, 2);
            }
        }

        let mut seen: HashMap<[usize; 3], usize> = HashMap::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut key = *tri;
            key.sort_unstable();
            if let Some(&first) = seen.get(&key) {
                return Err(Error::DuplicateTriangle(t, first));
            }
            seen.insert(key, t);
        }

        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges = Vec::new();
        let mut edge_tris: Vec<[Option<usize>; 2]> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [(0usize, 1i8); 3];
            for (i, slot) in local.iter_mut().enumerate() {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                let key = [a.min(b), a.max(b)];
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_tris.push([None, None]);
                    edges.len() - 1
                });
                match edge_tris[e] {
                    [None, _] => edge_tris[e][0] = Some(t),
                    [Some(_), None] => edge_tris[e][1] = Some(t),
                    _ => return Err(Error::NonManifoldEdge(key[0], key[1])),
                }
                *slot = (e, if a < b { 1 } else { -1 });
            }
            tri_edges.push(local);
        }
        let boundary_edges = (0..edges.len()).filter(|&e| edge_tris[e][1].is_none()).collect();

        Ok(Self { vertices, triangles, edges, tri_edges, edge_tris, boundary_edges, region, green_pairs })
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Per triangle: (global edge index, orientation sign) for local edges 0..3.
    pub fn tri_edges(&self) -> &[[(usize, i8); 3]] {
        &self.tri_edges
    }

    /// The one or two triangles adjacent to an edge.
    pub fn edge_triangles(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_tris[e]
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_tris[e][1].is_none()
    }

    pub fn region(&self) -> &[u32] {
        &self.region
    }

    pub fn green_pairs(&self) -> &[GreenPair] {
        &self.green_pairs
    }

    pub fn nv(&self) -> usize {
        self.vertices.len()
    }

    pub fn nt(&self) -> usize {
        self.triangles.len()
    }

    pub fn ne(&self) -> usize {
        self.edges.len()
    }

    pub fn points(&self, t: usize) -> [Point<T>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> T {
        let [a, b, c] = self.points(t);
        cross(sub(b, a), sub(c, a)) * T::lit(0.5)
    }

    pub fn area(&self, t: usize) -> T {
        self.signed_area(t).abs()
    }

    pub fn domain_area(&self) -> T {
        (0..self.nt()).map(|t| self.area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> Point<T> {
        let [a, b, c] = self.points(t);
        let third = T::one() / T::lit(3.0);
        [(a[0] + b[0] + c[0]) * third, (a[1] + b[1] + c[1]) * third]
    }

    /// Longest edge length of triangle `t`.
    pub fn diameter(&self, t: usize) -> T {
        let p = self.points(t);
        (0..3).map(|i| norm(sub(p[(i + 1) % 3], p[(i + 2) % 3]))).fold(T::zero(), T::max)
    }

    pub fn edge_length(&self, e: usize) -> T {
        let [a, b] = self.edges[e];
        norm(sub(self.vertices[b], self.vertices[a]))
    }

    pub fn edge_midpoint(&self, e: usize) -> Point<T> {
        let [a, b] = self.edges[e];
        midpoint(self.vertices[a], self.vertices[b])
    }

    /// Unit normal of edge `e` in its global orientation.
    pub fn edge_normal(&self, e: usize) -> Point<T> {
        let [a, b] = self.edges[e];
        let d = sub(self.vertices[b], self.vertices[a]);
        let l = norm(d);
        [d[1] / l, -d[0] / l]
    }

    /// Physical point for reference coordinates `(xi, eta)` on triangle `t`.
    pub fn map_reference(&self, t: usize, xi: T, eta: T) -> Point<T> {
        let [a, b, c] = self.points(t);
        [
            a[0] + xi * (b[0] - a[0]) + eta * (c[0] - a[0]),
            a[1] + xi * (b[1] - a[1]) + eta * (c[1] - a[1]),
        ]
    }

    /// Barycentric coordinates of a physical point with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, x: Point<T>) -> [T; 3] {
        let [a, b, c] = self.points(t);
        let det = cross(sub(b, a), sub(c, a));
        let l1 = cross(sub(x, a), sub(c, a)) / det;
        let l2 = cross(sub(b, a), sub(x, a)) / det;
        [T::one() - l1 - l2, l1, l2]
    }

    /// Triangles incident to each vertex, in increasing index order.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nv()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                out[v].push(t);
            }
        }
        out
    }

    /// Vertices adjacent to each vertex through an edge, sorted.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nv()];
        for &[a, b] in &self.edges {
            out[a].push(b);
            out[b].push(a);
        }
        for n in &mut out {
            n.sort_unstable();
        }
        out
    }

    pub fn boundary_vertex_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.nv()];
        for &e in &self.boundary_edges {
            let [a, b] = self.edges[e];
            flags[a] = true;
            flags[b] = true;
        }
        flags
    }

    pub fn boundary_length(&self) -> T {
        self.boundary_edges.iter().map(|&e| self.edge_length(e)).sum()
    }

    /// `nv - ne + nt`; equals 1 for a simply connected triangulated domain.
    pub fn euler_characteristic(&self) -> isize {
        self.nv() as isize - self.ne() as isize + self.nt() as isize
    }

    pub fn stats(&self) -> MeshStats<T> {
        let mut h_max = T::zero();
        let mut h_min = T::infinity();
        let mut max_ratio = T::zero();
        for t in 0..self.nt() {
            let p = self.points(t);
            let l: [T; 3] = std::array::from_fn(|i| norm(sub(p[(i + 1) % 3], p[(i + 2) % 3])));
            let d = l[0].max(l[1]).max(l[2]);
            h_max = h_max.max(d);
            h_min = h_min.min(d);
            let area = self.area(t);
            let circum = l[0] * l[1] * l[2] / (T::lit(4.0) * area);
            let inradius = area / ((l[0] + l[1] + l[2]) * T::lit(0.5));
            max_ratio = max_ratio.max(circum / inradius);
        }
        MeshStats { nt: self.nt(), h_max, h_min, max_ratio }
    }

    /// Checks the topological invariants; used by tests and after refinement.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for t in 0..self.nt() {
            if self.signed_area(t) <= T::zero() {
                return Err(format!("triangle {t} has nonpositive signed area"));
            }
        }
        for e in 0..self.ne() {
            match self.edge_tris[e] {
                [Some(t0), Some(t1)] => {
                    let s0 = self.tri_edges[t0].iter().find(|x| x.0 == e).map(|x| x.1);
                    let s1 = self.tri_edges[t1].iter().find(|x| x.0 == e).map(|x| x.1);
                    match (s0, s1) {
                        (Some(a), Some(b)) if a == -b => {}
                        _ => return Err(format!("edge {e} signs are not opposite")),
                    }
                }
                [Some(_), None] => {}
                _ => return Err(format!("edge {e} has no triangle")),
            }
        }
        Ok(())
    }

    /// True when every interior edge whose two triangles share a region tag
    /// bounds an exact parallelogram (`v_a + v_c = v_b + v_d`).
    pub fn regions_are_uniform(&self, tol: T) -> bool {
        (0..self.ne()).all(|e| match self.edge_tris[e] {
            [Some(t0), Some(t1)] if self.region[t0] == self.region[t1] => {
                let [a, c] = self.edges[e];
                let b = self.opposite_vertex(t0, e);
                let d = self.opposite_vertex(t1, e);
                let (va, vb, vc, vd) = (self.vertices[a], self.vertices[b], self.vertices[c], self.vertices[d]);
                (va[0] + vc[0] - vb[0] - vd[0]).abs() <= tol && (va[1] + vc[1] - vb[1] - vd[1]).abs() <= tol
            }
            _ => true,
        })
    }

    /// Vertex of triangle `t` not on edge `e`.
    pub fn opposite_vertex(&self, t: usize, e: usize) -> usize {
        let i = self.tri_edges[t].iter().position(|x| x.0 == e).expect("edge belongs to triangle");
        self.triangles[t][i]
    }
}
