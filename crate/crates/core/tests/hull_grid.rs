//! For three entities the binary hull is the tetrahedron spanned by the four
//! sign atoms; the LP must agree with that closed form everywhere on a grid.

use hypervsa::expressivity::{check_binary_expressible, enumerate_atoms, mixture_residual};
use hypervsa::linalg::SquareMatrix;
use hypervsa::rff::SimilarityTarget;

const EPS: f64 = 1e-9;

fn target(a: f64, b: f64, c: f64) -> SimilarityTarget {
    SimilarityTarget::new(
        SquareMatrix::from_row_major(3, vec![1.0, a, b, a, 1.0, c, b, c, 1.0]).unwrap(),
    )
    .unwrap()
}

/// `(a, b, c) = (M01, M02, M12)` lies in the hull iff every face inequality holds.
fn in_tetrahedron(a: f64, b: f64, c: f64) -> bool {
    [
        1.0 + a + b + c,
        1.0 + a - b - c,
        1.0 - a + b - c,
        1.0 - a - b + c,
    ]
    .iter()
    .all(|&f| f >= -EPS)
}

#[test]
fn lp_matches_tetrahedron_on_grid() {
    let atoms = enumerate_atoms(3).unwrap();
    let grid: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * f64::from(k)).collect();
    let (mut inside, mut checked) = (0, 0);
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                let t = target(a, b, c);
                let r = check_binary_expressible(&t, EPS).unwrap();
                let want = in_tetrahedron(a, b, c);
                assert_eq!(r.feasible, want, "({a}, {b}, {c})");
                if r.feasible {
                    inside += 1;
                    assert!(r.weights.iter().all(|&w| w >= -1e-12));
                    assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                    assert!(mixture_residual(&t, &atoms, &r.weights) <= EPS + 1e-12);
                }
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 21 * 21 * 21);
    // The tetrahedron fills a third of the cube; the grid count is close to that.
    assert!(inside > 2500 && inside < 3700, "{inside} feasible points");
}

#[test]
fn minus_one_third_uses_the_three_mixed_atoms() {
    let t = target(-1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0);
    let r = check_binary_expressible(&t, EPS).unwrap();
    assert!(r.feasible);
    let atoms = enumerate_atoms(3).unwrap();
    for (atom, w) in atoms.iter().zip(&r.weights) {
        let all_same = atom.pattern().iter().all(|&s| s == atom.pattern()[0]);
        let want = if all_same { 0.0 } else { 1.0 / 3.0 };
        assert!((w - want).abs() < 1e-8, "{:?}: {w}", atom.pattern());
    }
}
