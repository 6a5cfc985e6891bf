//! Dense phase-one simplex for `A x = b, x >= 0` with Bland's rule.

/// Pivot and reduced-cost tolerance.
const PIVOT_TOL: f64 = 1e-12;
/// Phase-one optimum at or below this counts as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-11;

#[derive(Clone, Debug)]
pub enum Feasibility {
    Feasible {
        x: Vec<f64>,
    },
    /// `dual` satisfies `dual^T A <= 0` column-wise and `dual^T b = infeasibility > 0`.
    Infeasible {
        dual: Vec<f64>,
        infeasibility: f64,
    },
}

/// Finds `x >= 0` with `A x = b` (`a` is row-major, `rows x cols`).
///
/// One artificial variable per row, minimizing their sum; Bland's rule on
/// both the entering and leaving choice, so the method terminates.
pub fn find_feasible(a: &[f64], b: &[f64], cols: usize) -> Feasibility {
    let rows = b.len();
    assert_eq!(a.len(), rows * cols, "constraint matrix shape");
    let width = cols + rows + 1;
    let rhs = cols + rows;
    let mut t = vec![0.0; (rows + 1) * width];
    let mut flip = vec![1.0; rows];
    for i in 0..rows {
        if b[i] < 0.0 {
            flip[i] = -1.0;
        }
        for j in 0..cols {
            t[i * width + j] = flip[i] * a[i * cols + j];
        }
        t[i * width + cols + i] = 1.0;
        t[i * width + rhs] = flip[i] * b[i];
    }
    // Objective row holds reduced costs; artificials start basic with cost 1.
    let obj = rows * width;
    for j in 0..cols {
        t[obj + j] = -(0..rows).map(|i| t[i * width + j]).sum::<f64>();
    }
    t[obj + rhs] = -(0..rows).map(|i| t[i * width + rhs]).sum::<f64>();
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    loop {
        let entering = (0..cols + rows).find(|&j| t[obj + j] < -PIVOT_TOL);
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            let coef = t[i * width + e];
            if coef > PIVOT_TOL {
                let ratio = t[i * width + rhs] / coef;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - PIVOT_TOL || (ratio <= lr + PIVOT_TOL && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // Phase one is bounded below by zero, so an entering column always has a pivot row.
        let Some((r, _)) = leave else { break };
        pivot(&mut t, width, rows, r, e);
        basis[r] = e;
    }

    let infeasibility = -t[obj + rhs];
    if infeasibility <= FEASIBILITY_TOL {
        let mut x = vec![0.0; cols];
        for (i, &bv) in basis.iter().enumerate() {
            if bv < cols {
                x[bv] = t[i * width + rhs].max(0.0);
            }
        }
        Feasibility::Feasible { x }
    } else {
        // Reduced cost of artificial i is 1 - y_i.
        let dual = (0..rows)
            .map(|i| flip[i] * (1.0 - t[obj + cols + i]))
            .collect();
        Feasibility::Infeasible {
            dual,
            infeasibility,
        }
    }
}

fn pivot(t: &mut [f64], width: usize, rows: usize, r: usize, e: usize) {
    let p = t[r * width + e];
    for j in 0..width {
        t[r * width + j] /= p;
    }
    t[r * width + e] = 1.0;
    let pivot_row: Vec<f64> = t[r * width..(r + 1) * width].to_vec();
    for i in 0..=rows {
        if i == r {
            continue;
        }
        let f = t[i * width + e];
        if f == 0.0 {
            continue;
        }
        let row = &mut t[i * width..(i + 1) * width];
        for (x, &pv) in row.iter_mut().zip(&pivot_row) {
            *x -= f * pv;
        }
        row[e] = 0.0;
    }
}
