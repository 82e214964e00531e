use oseen_core::sparse::relative_residual;
use oseen_core::{lu_solve, CsrMatrix, TripletBuffer};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Gaussian elimination with partial pivoting on a dense copy.
#[allow(clippy::needless_range_loop)]
fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(row, &bi)| row.iter().copied().chain([bi]).collect()).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        m.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..=n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// Random nonsymmetric sparse matrix with a few entries per row and a
/// moderately dominant diagonal, so it is well conditioned but not trivial.
fn random_system(rng: &mut StdRng, n: usize) -> (CsrMatrix<f64>, Vec<f64>) {
    let mut t = TripletBuffer::new(n, n);
    for i in 0..n {
        let mut off = 0.0;
        for _ in 0..rng.gen_range(1..6) {
            let j = rng.gen_range(0..n);
            let v: f64 = rng.gen_range(-1.0..1.0);
            off += v.abs();
            t.push(i, j, v);
        }
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        t.push(i, i, sign * (0.5 * off + rng.gen_range(0.1..1.0)));
    }
    let b = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (t.to_csr(), b)
}

#[test]
fn lu_matches_dense_oracle_on_random_systems() {
    let mut rng = StdRng::seed_from_u64(7);
    for case in 0..20 {
        let n = rng.gen_range(5..150);
        let (a, b) = random_system(&mut rng, n);
        let x = lu_solve(&a, &b).unwrap();
        let y = dense_solve(&a.to_dense(), &b);
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = x.iter().zip(&y).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        assert!(diff <= 1e-10 * scale.max(1.0), "case {case} (n = {n}): {diff:e}");
        assert!(relative_residual(&a, &x, &b) < 1e-12);
    }
}

#[test]
fn singular_system_is_reported() {
    let dense = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![0.0, 1.0, 1.0]];
    let a = CsrMatrix::from_dense(&dense);
    assert!(lu_solve(&a, &[1.0, 0.0, 0.0]).is_err());
}

#[test]
fn matrix_market_round_trip_through_a_file() {
    let mut rng = StdRng::seed_from_u64(3);
    let (a, _) = random_system(&mut rng, 40);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    a.write_matrix_market(&mut file).unwrap();
    let text = std::fs::read(file.path()).unwrap();
    let back = CsrMatrix::<f64>::read_matrix_market(&text[..]).unwrap();
    assert_eq!(back.to_dense(), a.to_dense());
}

proptest! {
    #[test]
    fn csr_agrees_with_dense_accumulation(
        entries in prop::collection::vec((0usize..8, 0usize..6, -10.0f64..10.0), 0..40),
        x in prop::collection::vec(-5.0f64..5.0, 6),
    ) {
        let mut t = TripletBuffer::new(8, 6);
        let mut dense = vec![vec![0.0; 6]; 8];
        for &(i, j, v) in &entries {
            t.push(i, j, v);
            dense[i][j] += v;
        }
        let a = t.to_csr();
        let y = a.matvec(&x);
        for i in 0..8 {
            let expect: f64 = (0..6).map(|j| dense[i][j] * x[j]).sum();
            prop_assert!((y[i] - expect).abs() < 1e-12);
        }
        prop_assert_eq!(a.transpose().transpose().to_dense(), a.to_dense());
        prop_assert!(a.row_ptr().windows(2).all(|w| w[0] <= w[1]));
    }
}
