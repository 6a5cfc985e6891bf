//! In-crate Jacobi eigensolver and PSD projection against nalgebra.

use hypervsa::linalg::{symmetric_eigen, SquareMatrix};
use hypervsa::rff::{psd_factor, rbf_target, sin_transform, SimilarityTarget};
use hypervsa::SeededRng;
use nalgebra::DMatrix;
use rand::Rng;

fn random_symmetric(n: usize, seed: u64) -> SquareMatrix {
    let mut rng = SeededRng::new(seed);
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = rng.random_range(-1.0..1.0);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

fn oracle(m: &SquareMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.n(), m.n(), m.as_slice())
}

#[test]
fn eigenvalues_match_nalgebra() {
    for (n, seed) in [(2, 1), (5, 2), (17, 3), (64, 4)] {
        let m = random_symmetric(n, seed);
        let ours = symmetric_eigen(&m).unwrap();
        let mut theirs: Vec<f64> = oracle(&m)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.values.iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-8, "n = {n}: {a} vs {b}");
        }
        // A V = V diag(lambda).
        let a = oracle(&m);
        let v = oracle(&ours.vectors);
        let av = &a * &v;
        for k in 0..n {
            for i in 0..n {
                assert!((av[(i, k)] - ours.values[k] * v[(i, k)]).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn psd_projection_matches_clipped_oracle() {
    let levels: Vec<f64> = (0..40).map(|v| f64::from(v) * 6.0).collect();
    let targets = [
        rbf_target(&levels, 16.0, None).unwrap(),
        SimilarityTarget::uniform(4, -0.5).unwrap(),
    ];
    for t in &targets {
        let s = sin_transform(t);
        let f = psd_factor(&s).unwrap();
        let e = oracle(&s).symmetric_eigen();
        let clipped = e.eigenvalues.map(|l| l.max(0.0));
        let want = &e.eigenvectors * DMatrix::from_diagonal(&clipped) * e.eigenvectors.transpose();
        let got = f.reconstruction();
        for i in 0..s.n() {
            for j in 0..s.n() {
                assert!((got[(i, j)] - want[(i, j)]).abs() < 1e-8);
            }
        }
    }
}
