use std::sync::Arc;

use proptest::prelude::*;
use stfd::kronop::{kron_matvec, multi_index, KronFactor, KronSumOperator, KronTerm, Tensor};
use stfd::matrix::{BandedMatrix, CsrMatrix, DenseMatrix};
use stfd::LinearOperator;

fn dense(rows: usize, cols: usize, seed: &[f64]) -> DenseMatrix<f64> {
    DenseMatrix::from_fn(rows, cols, |i, j| seed[(i * cols + j) % seed.len()] + 0.1 * (i as f64) - 0.05 * j as f64)
}

/// `J_k ⊗ ... ⊗ J_1` as a dense matrix.
fn dense_kron(factors: &[DenseMatrix<f64>]) -> DenseMatrix<f64> {
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = f.kron(&acc);
    }
    acc
}

fn shapes() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((1usize..=4, 1usize..=4), 1..=3)
}

proptest! {
    #[test]
    fn matvec_matches_dense_kronecker(shape in shapes(), seed in prop::collection::vec(-1.0f64..1.0, 16)) {
        let factors: Vec<DenseMatrix<f64>> = shape.iter().map(|&(r, c)| dense(r, c, &seed)).collect();
        let n: usize = shape.iter().map(|s| s.1).product();
        let x: Vec<f64> = (0..n).map(|i| seed[i % seed.len()] * (1.0 + i as f64)).collect();
        let refs: Vec<&dyn KronFactor<f64>> = factors.iter().map(|f| f as &dyn KronFactor<f64>).collect();
        let y = kron_matvec(&refs, &x).unwrap();
        let expected = dense_kron(&factors).matvec(&x);
        for (a, b) in y.iter().zip(&expected) {
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn matvec_is_linear(seed in prop::collection::vec(-1.0f64..1.0, 16), alpha in -3.0f64..3.0) {
        let a = dense(3, 3, &seed);
        let b = dense(2, 2, &seed[3..]);
        let refs: [&dyn KronFactor<f64>; 2] = [&a, &b];
        let x: Vec<f64> = (0..6).map(|i| seed[i]).collect();
        let z: Vec<f64> = (0..6).map(|i| seed[15 - i]).collect();
        let comb: Vec<f64> = x.iter().zip(&z).map(|(p, q)| alpha * p + q).collect();
        let lhs = kron_matvec(&refs, &comb).unwrap();
        let (kx, kz) = (kron_matvec(&refs, &x).unwrap(), kron_matvec(&refs, &z).unwrap());
        for i in 0..6 {
            prop_assert!((lhs[i] - (alpha * kx[i] + kz[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn mode_products_commute(seed in prop::collection::vec(-1.0f64..1.0, 24)) {
        let x = Tensor::new(vec![2, 3, 4], seed.clone()).unwrap();
        let a = dense(3, 3, &seed);
        let b = dense(2, 4, &seed[5..]);
        let ab = x.mode_product(&a, 1).unwrap().mode_product(&b, 2).unwrap();
        let ba = x.mode_product(&b, 2).unwrap().mode_product(&a, 1).unwrap();
        for (p, q) in ab.data().iter().zip(ba.data()) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }
}

#[test]
fn colexicographic_layout() {
    let t = Tensor::new(vec![2, 3], (0..6).map(|v| v as f64).collect()).unwrap();
    assert_eq!(t.linear_index(&[1, 2]), 1 + 2 * 2);
    assert_eq!(t.get(&[1, 2]), 5.0);
    assert_eq!(multi_index(5, &[2, 3]), vec![1, 2]);
}

#[test]
fn sparse_formats_agree_with_dense() {
    let d = DenseMatrix::from_fn(4, 4, |i, j| if i.abs_diff(j) <= 1 { 1.0 + (i + 2 * j) as f64 } else { 0.0 });
    let banded = BandedMatrix::from_dense(&d, 1).unwrap();
    let trip: Vec<(usize, usize, f64)> = (0..4usize)
        .flat_map(|i| (0..4usize).map(move |j| (i, j)))
        .filter(|&(i, j)| i.abs_diff(j) <= 1)
        .map(|(i, j)| (i, j, d.row(i)[j]))
        .collect();
    let csr = CsrMatrix::from_triplets(4, 4, trip).unwrap();
    let x = Tensor::new(vec![3, 4, 2], (0..24).map(|v| (v as f64).sin()).collect()).unwrap();
    let via_dense = x.mode_product(&d, 1).unwrap();
    for f in [&banded as &dyn KronFactor<f64>, &csr] {
        let y = x.mode_product(f, 1).unwrap();
        for (p, q) in y.data().iter().zip(via_dense.data()) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}

#[test]
fn kron_sum_operator_matches_dense_and_diagonal() {
    let a = DenseMatrix::from_fn(3, 3, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
    let b = DenseMatrix::from_fn(2, 2, |i, j| if i == j { 2.0 } else { -0.5 });
    let id2 = DenseMatrix::identity(2);
    let id3 = DenseMatrix::identity(3);
    let op = KronSumOperator::new(
        vec![3, 2],
        vec![
            KronTerm::new(2.0, vec![Arc::new(a.clone()), Arc::new(id2.clone())]),
            KronTerm::new(-1.0, vec![Arc::new(id3.clone()), Arc::new(b.clone())]),
        ],
    )
    .unwrap();
    let expected = id2.kron(&a).scale(2.0).sub(&b.kron(&id3));
    assert!(op.to_dense().sub(&expected).max_abs() < 1e-14);
    assert_eq!(op.diagonal(), expected.diagonal());
    let x: Vec<f64> = (0..6).map(|v| v as f64 - 2.5).collect();
    let y = op.apply_vec(&x);
    let e = expected.matvec(&x);
    assert!(y.iter().zip(&e).all(|(p, q)| (p - q).abs() < 1e-13));
}

#[test]
fn mismatched_shapes_are_errors() {
    let a = DenseMatrix::<f64>::identity(3);
    assert!(kron_matvec(&[&a as &dyn KronFactor<f64>], &[1.0, 2.0]).is_err());
    assert!(KronSumOperator::new(vec![2], vec![KronTerm::new(1.0, vec![Arc::new(a)])]).is_err());
}
