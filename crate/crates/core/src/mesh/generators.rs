//! Built-in initial meshes.

use super::{build_mesh, Mesh};
use crate::scalar::Real;

/// Vertices of the 19-triangle unit-square mesh: 13 on the boundary, 4 interior.
const SQUARE19_VERTICES: [[f64; 2]; 17] = [
    [0.0, 0.0],
    [1.0, 0.0],
    [1.0, 1.0],
    [0.0, 1.0],
    [0.638, 0.0],
    [1.0, 0.462],
    [0.441, 1.0],
    [0.193, 1.0],
    [0.379, 0.0],
    [0.732, 1.0],
    [0.0, 0.697],
    [0.0, 0.233],
    [1.0, 0.628],
    [0.476, 0.743],
    [0.471, 0.357],
    [0.774, 0.431],
    [0.654, 0.828],
];

/// Triangles of the 19-triangle mesh, counterclockwise.
const SQUARE19_TRIANGLES: [[usize; 3]; 19] = [
    [13, 10, 14],
    [8, 4, 14],
    [15, 13, 14],
    [4, 15, 14],
    [15, 4, 1],
    [5, 15, 1],
    [10, 11, 14],
    [8, 11, 0],
    [11, 8, 14],
    [7, 10, 13],
    [6, 7, 13],
    [10, 7, 3],
    [16, 9, 6],
    [16, 6, 13],
    [15, 16, 13],
    [9, 16, 2],
    [16, 12, 2],
    [12, 15, 5],
    [12, 16, 15],
];

fn to_points<T: Real>(raw: &[[f64; 2]]) -> Vec<[T; 2]> {
    raw.iter().map(|p| [T::lit(p[0]), T::lit(p[1])]).collect()
}

/// The single reference triangle (0,0), (1,0), (0,1).
pub fn reference_triangle<T: Real>() -> Mesh<T> {
    build_mesh(to_points(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), vec![[0, 1, 2]], vec![0])
        .expect("reference triangle is valid")
}

/// Unstructured 19-triangle triangulation of the unit square.
///
/// Every coarse triangle is its own region, so each region of any uniform
/// quad-refinement is a uniform grid and the refined meshes are piecewise
/// uniform.
pub fn make_square_piecewise_uniform<T: Real>() -> Mesh<T> {
    let region = (0..SQUARE19_TRIANGLES.len() as u32).collect();
    build_mesh(to_points(&SQUARE19_VERTICES), SQUARE19_TRIANGLES.to_vec(), region)
        .expect("built-in square mesh is valid")
}

/// Uniform `n x n` grid of the unit square, each cell cut by its
/// south-west to north-east diagonal; one region.
pub fn make_unit_square_uniform<T: Real>(n: usize) -> Mesh<T> {
    assert!(n > 0, "grid needs at least one cell");
    let step = T::one() / T::from_usize_lossy(n);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([step * T::from_usize_lossy(i), step * T::from_usize_lossy(j)]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let region = vec![0; triangles.len()];
    build_mesh(vertices, triangles, region).expect("uniform square grid is valid")
}

/// L-shaped domain `[-1,1]^2 \ [0,1]x[-1,0]` built from three unit squares,
/// each split into four triangles through its center (12 triangles). The
/// reentrant corner `(0,0)` is a vertex.
pub fn make_lshape_mesh<T: Real>() -> Mesh<T> {
    let squares = [[-1.0, -1.0], [-1.0, 0.0], [0.0, 0.0]];
    let mut raw: Vec<[f64; 2]> = vec![
        [-1.0, -1.0],
        [0.0, -1.0],
        [-1.0, 0.0],
        [0.0, 0.0],
        [1.0, 0.0],
        [-1.0, 1.0],
        [0.0, 1.0],
        [1.0, 1.0],
    ];
    let find = |raw: &[[f64; 2]], p: [f64; 2]| raw.iter().position(|q| *q == p).expect("corner present");
    let mut triangles = Vec::new();
    let mut region = Vec::new();
    for (s, lo) in squares.iter().enumerate() {
        let corners = [
            find(&raw, [lo[0], lo[1]]),
            find(&raw, [lo[0] + 1.0, lo[1]]),
            find(&raw, [lo[0] + 1.0, lo[1] + 1.0]),
            find(&raw, [lo[0], lo[1] + 1.0]),
        ];
        raw.push([lo[0] + 0.5, lo[1] + 0.5]);
        let c = raw.len() - 1;
        for k in 0..4 {
            triangles.push([corners[k], corners[(k + 1) % 4], c]);
            region.push((4 * s + k) as u32);
        }
    }
    build_mesh(to_points(&raw), triangles, region).expect("built-in L-shape mesh is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square19_is_a_simply_connected_conforming_mesh() {
        let m = make_square_piecewise_uniform::<f64>();
        assert_eq!(m.nt(), 19);
        assert_eq!(m.euler_characteristic(), 1);
        m.check_invariants().unwrap();
        assert!((m.domain_area() - 1.0).abs() < 1e-14);
        assert!((m.boundary_length() - 4.0).abs() < 1e-14);
        assert!(m.regions_are_uniform(1e-14));
    }

    #[test]
    fn lshape_geometry() {
        let m = make_lshape_mesh::<f64>();
        assert_eq!(m.nt(), 12);
        assert_eq!(m.euler_characteristic(), 1);
        assert!((m.domain_area() - 3.0).abs() < 1e-14);
        for v in m.vertices() {
            let inside = (-1.0..=1.0).contains(&v[0]) && (-1.0..=1.0).contains(&v[1]);
            let cut = v[0] > 0.0 && v[1] < 0.0;
            assert!(inside && !cut, "vertex {v:?} outside L-shape");
        }
        assert!(m.vertices().contains(&[0.0, 0.0]));
    }

    #[test]
    fn uniform_square_counts() {
        let m = make_unit_square_uniform::<f64>(4);
        assert_eq!(m.nt(), 32);
        assert_eq!(m.nv(), 25);
        assert!(m.regions_are_uniform(1e-14));
    }
}
