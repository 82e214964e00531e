//! Sparse matrix kernel: triplet accumulation, CSR storage, direct LU solve
//! and Matrix Market I/O.
//!
//! The LU factorization (fill-reducing column ordering, partial pivoting)
//! is delegated to `faer`; values are passed to it in `f64`.

use std::io::{BufRead, Write};

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Unsorted `(row, col, value)` entries; duplicates are summed on conversion.
#[derive(Clone, Debug, Default)]
pub struct TripletBuffer<T> {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> TripletBuffer<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    pub fn push(&mut self, row: usize, col: usize, value: T) {
        assert!(row < self.nrows && col < self.ncols, "triplet ({row}, {col}) outside {}x{}", self.nrows, self.ncols);
        self.entries.push((row, col, value));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn to_csr(&self) -> CsrMatrix<T> {
        let mut counts = vec![0usize; self.nrows + 1];
        for &(r, _, _) in &self.entries {
            counts[r + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; self.entries.len()];
        let mut vals = vec![T::zero(); self.entries.len()];
        for &(r, c, v) in &self.entries {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, T)> = Vec::new();
        for r in 0..self.nrows {
            scratch.clear();
            scratch.extend((counts[r]..counts[r + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        d
    }

    /// Stores only the nonzero entries of `dense`.
    pub fn from_dense(dense: &[Vec<T>]) -> Self {
        let nrows = dense.len();
        let ncols = dense.first().map_or(0, Vec::len);
        let mut buf = TripletBuffer::new(nrows, ncols);
        for (r, row) in dense.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    buf.push(r, c, v);
                }
            }
        }
        buf.to_csr()
    }

    pub fn transpose(&self) -> Self {
        let mut buf = TripletBuffer::with_capacity(self.ncols, self.nrows, self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                buf.push(c, r, v);
            }
        }
        buf.to_csr()
    }

    /// Rows without any stored entry.
    pub fn empty_rows(&self) -> Vec<usize> {
        (0..self.nrows).filter(|&r| self.row_ptr[r] == self.row_ptr[r + 1]).collect()
    }

    pub fn max_row_norm(&self) -> T {
        (0..self.nrows).map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<T>()).fold(T::zero(), T::max)
    }

    /// `Matrix Market` coordinate/real/general export (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                writeln!(out, "{} {} {:.17e}", r + 1, c + 1, v.as_f64())?;
            }
        }
        Ok(())
    }

    pub fn read_matrix_market<R: BufRead>(input: R) -> Result<Self> {
        let mut shape: Option<(usize, usize)> = None;
        let mut buf = TripletBuffer::new(0, 0);
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if i == 0 {
                let head = line.to_ascii_lowercase();
                if !head.starts_with("%%matrixmarket matrix coordinate real general") {
                    return Err(Error::Parse { line: lineno, msg: "unsupported Matrix Market header".into() });
                }
                continue;
            }
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            let tok: Vec<&str> = t.split_whitespace().collect();
            let bad = || Error::Parse { line: lineno, msg: format!("malformed line `{t}`") };
            if shape.is_none() {
                if tok.len() != 3 {
                    return Err(bad());
                }
                let r: usize = tok[0].parse().map_err(|_| bad())?;
                let c: usize = tok[1].parse().map_err(|_| bad())?;
                shape = Some((r, c));
                buf = TripletBuffer::new(r, c);
                continue;
            }
            if tok.len() != 3 {
                return Err(bad());
            }
            let r: usize = tok[0].parse().map_err(|_| bad())?;
            let c: usize = tok[1].parse().map_err(|_| bad())?;
            let v: f64 = tok[2].parse().map_err(|_| bad())?;
            let (nr, nc) = shape.unwrap();
            if r == 0 || c == 0 || r > nr || c > nc {
                return Err(Error::Parse { line: lineno, msg: format!("entry ({r}, {c}) outside {nr}x{nc}") });
            }
            buf.push(r - 1, c - 1, T::lit(v));
        }
        if shape.is_none() {
            return Err(Error::Parse { line: 0, msg: "missing size line".into() });
        }
        Ok(buf.to_csr())
    }
}

/// `‖a x - b‖₂ / ‖b‖₂`, or `‖a x‖₂` when `b = 0`.
pub fn relative_residual<T: Real>(a: &CsrMatrix<T>, x: &[T], b: &[T]) -> T {
    let ax = a.matvec(x);
    let r = ax.iter().zip(b).map(|(p, q)| (*p - *q) * (*p - *q)).sum::<T>().sqrt();
    let nb = b.iter().map(|v| *v * *v).sum::<T>().sqrt();
    if nb > T::zero() {
        r / nb
    } else {
        r
    }
}

/// Solves `a x = rhs` by sparse LU with partial pivoting.
///
/// Fails with [`Error::Singular`] if the factorization breaks down or
/// produces non-finite values, and with [`Error::Residual`] if the relative
/// residual stays above [`Real::residual_tolerance`] after one step of
/// iterative refinement.
pub fn lu_solve<T: Real>(a: &CsrMatrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!("matrix is {}x{}, not square", n, a.ncols())));
    }
    if rhs.len() != n {
        return Err(Error::Dimension(format!("rhs has length {}, expected {n}", rhs.len())));
    }
    if rhs.iter().all(|v| *v == T::zero()) {
        return Ok(vec![T::zero(); n]);
    }
    let singular = || Error::Singular { n, h: f64::NAN };

    let mut trip = Vec::with_capacity(a.nnz());
    for r in 0..n {
        for (c, v) in a.row(r) {
            trip.push(Triplet::new(r, c, v.as_f64()));
        }
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::Dimension(format!("{e:?}")))?;
    let lu = mat.sp_lu().map_err(|_| singular())?;

    let solve = |b: &[f64]| -> Vec<f64> {
        let col = faer::Col::<f64>::from_fn(n, |i| b[i]);
        let x = lu.solve(&col);
        (0..n).map(|i| x[i]).collect()
    };
    let b64: Vec<f64> = rhs.iter().map(|v| v.as_f64()).collect();
    let mut x64 = solve(&b64);
    if x64.iter().any(|v| !v.is_finite()) {
        return Err(singular());
    }
    let to_t = |x: &[f64]| -> Vec<T> { x.iter().map(|&v| T::lit(v)).collect() };
    let tol = T::residual_tolerance();
    let mut x = to_t(&x64);
    let mut res = relative_residual(a, &x, rhs);
    if res > tol {
        let ax = a.matvec(&x);
        let r64: Vec<f64> = rhs.iter().zip(&ax).map(|(b, p)| (*b - *p).as_f64()).collect();
        let dx = solve(&r64);
        for (xi, di) in x64.iter_mut().zip(&dx) {
            *xi += di;
        }
        x = to_t(&x64);
        res = relative_residual(a, &x, rhs);
    }
    if !res.is_finite() {
        return Err(singular());
    }
    if res > tol {
        return Err(Error::Residual { residual: res.as_f64(), tolerance: tol.as_f64() });
    }
    Ok(x)
}
