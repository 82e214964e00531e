//! Small dense solves used by local element and patch computations.

use crate::scalar::Real;

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
/// `a` is row-major `n x n`. Returns `None` when a pivot falls below
/// `rel_tol` times the largest absolute entry of `a`.
pub(crate) fn solve_in_place<T: Real>(a: &mut [T], b: &mut [T], n: usize, rel_tol: T) -> Option<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() {
        return None;
    }
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i * n + k].abs().partial_cmp(&a[j * n + k].abs()).unwrap())?;
        if a[p * n + k].abs() <= rel_tol * scale {
            return None;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        let piv = a[k * n + k];
        for i in (k + 1)..n {
            let f = a[i * n + k] / piv;
            if f == T::zero() {
                continue;
            }
            for j in k..n {
                let v = a[k * n + j];
                a[i * n + j] -= f * v;
            }
            let bk = b[k];
            b[i] -= f * bk;
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in (k + 1)..n {
            s -= a[k * n + j] * b[j];
        }
        b[k] = s / a[k * n + k];
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pivoting_solves_permutation() {
        let mut a = vec![0.0, 1.0, 1.0, 0.0];
        let mut b = vec![1.0, 2.0];
        solve_in_place(&mut a, &mut b, 2, 1e-14).unwrap();
        assert_eq!(b, vec![2.0, 1.0]);
    }

    #[test]
    fn singular_is_detected() {
        let mut a = vec![1.0, 2.0, 2.0, 4.0];
        let mut b = vec![1.0, 2.0];
        assert!(solve_in_place(&mut a, &mut b, 2, 1e-12).is_none());
    }
}
