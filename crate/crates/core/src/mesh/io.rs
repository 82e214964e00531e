//! Plain-text mesh files.
//!
//! ```text
//! nv nt
//! x y            (nv lines)
//! i0 i1 i2 region (nt lines, 0-based)
//! ```
//! Coordinates are written with 17 significant digits so `f64` values
//! round-trip exactly.

use std::io::{BufRead, Write};

use super::{build_mesh, Mesh};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn write_mesh<T: Real, W: Write>(mesh: &Mesh<T>, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", mesh.nv(), mesh.nt())?;
    for v in mesh.vertices() {
        writeln!(out, "{:.16e} {:.16e}", v[0].as_f64(), v[1].as_f64())?;
    }
    for (tri, r) in mesh.triangles().iter().zip(mesh.region()) {
        writeln!(out, "{} {} {} {}", tri[0], tri[1], tri[2], r)?;
    }
    Ok(())
}

pub fn read_mesh<T: Real, R: BufRead>(input: R) -> Result<Mesh<T>> {
    let mut lines = input.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let mut next = || -> Result<(usize, Vec<String>)> {
        let (n, line) = lines.next().ok_or(Error::Parse { line: 0, msg: "unexpected end of file".into() })?;
        Ok((n, line?.split_whitespace().map(str::to_owned).collect()))
    };
    fn num<V: std::str::FromStr>(tok: &[String], k: usize, line: usize) -> Result<V> {
        tok.get(k)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse { line, msg: format!("expected number in field {}", k + 1) })
    }

    let (line, head) = next()?;
    let nv: usize = num(&head, 0, line)?;
    let nt: usize = num(&head, 1, line)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, tok) = next()?;
        let x: f64 = num(&tok, 0, line)?;
        let y: f64 = num(&tok, 1, line)?;
        vertices.push([T::lit(x), T::lit(y)]);
    }
    let mut triangles = Vec::with_capacity(nt);
    let mut region = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, tok) = next()?;
        triangles.push([num(&tok, 0, line)?, num(&tok, 1, line)?, num(&tok, 2, line)?]);
        region.push(num(&tok, 3, line)?);
    }
    build_mesh(vertices, triangles, region)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_square_piecewise_uniform, uniform_quad_refine};

    #[test]
    fn dump_and_load_is_bit_exact() {
        let m = uniform_quad_refine(&make_square_piecewise_uniform::<f64>()).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back: Mesh<f64> = read_mesh(buf.as_slice()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.region(), m.region());
        let mut again = Vec::new();
        write_mesh(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let r: Result<Mesh<f64>> = read_mesh("3 1\n0 0\n1 0\n".as_bytes());
        assert!(matches!(r, Err(Error::Parse { .. })));
    }
}
