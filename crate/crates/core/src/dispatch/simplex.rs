//! Dense tableau simplex for `min c·x` subject to `A x = b`, `x ≥ 0`,
//! started from a caller-supplied feasible identity basis.
//!
//! Pricing is Dantzig's most negative reduced cost. After a run of
//! degenerate pivots the solver switches to Bland's rule until the
//! objective moves again, which rules out cycling.

const TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub enum SimplexError {
    Unbounded { column: usize },
    Stall { iterations: usize },
}

#[derive(Clone, Debug)]
pub struct StandardLp {
    /// Row-major, `rows × cols`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// `basis[r]` is a column equal to unit vector `r`; requires `b ≥ 0`.
    pub basis: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

pub fn solve(lp: &StandardLp, max_iterations: usize) -> Result<SimplexResult, SimplexError> {
    let m = lp.b.len();
    let n = lp.c.len();
    debug_assert_eq!(lp.a.len(), m);
    debug_assert_eq!(lp.basis.len(), m);
    debug_assert!(lp.b.iter().all(|v| *v >= 0.0));

    // Each row stores its coefficients followed by the right-hand side.
    let mut t: Vec<Vec<f64>> =
        lp.a.iter()
            .zip(&lp.b)
            .map(|(row, &rhs)| {
                let mut r = row.clone();
                r.push(rhs);
                r
            })
            .collect();
    let mut basis = lp.basis.clone();

    // Reduced costs; the last entry holds minus the objective.
    let mut z: Vec<f64> = lp.c.clone();
    z.push(0.0);
    for (r, &bv) in basis.iter().enumerate() {
        let cb = lp.c[bv];
        if cb != 0.0 {
            for (zj, tj) in z.iter_mut().zip(&t[r]) {
                *zj -= cb * tj;
            }
        }
    }

    let mut bland = false;
    let mut degenerate = 0;
    let mut iterations = 0;
    loop {
        let entering = if bland {
            (0..n).find(|&j| z[j] < -TOL)
        } else {
            (0..n)
                .filter(|&j| z[j] < -TOL)
                .min_by(|&i, &j| z[i].total_cmp(&z[j]).then(i.cmp(&j)))
        };
        let Some(j) = entering else { break };

        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let arj = t[r][j];
            if arj > TOL {
                let ratio = t[r][n] / arj;
                let better = match leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < best - TOL || (ratio <= best + TOL && basis[r] < basis[lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((p, ratio)) = leave else {
            return Err(SimplexError::Unbounded { column: j });
        };

        if iterations == max_iterations {
            return Err(SimplexError::Stall { iterations });
        }
        iterations += 1;

        if ratio <= TOL {
            degenerate += 1;
            if degenerate >= DEGENERATE_RUN {
                bland = true;
            }
        } else {
            degenerate = 0;
            bland = false;
        }

        pivot(&mut t, &mut z, p, j);
        basis[p] = j;
    }

    let mut x = vec![0.0; n];
    for (r, &bv) in basis.iter().enumerate() {
        x[bv] = t[r][n].max(0.0);
    }
    let objective = lp.c.iter().zip(&x).map(|(c, x)| c * x).sum();
    Ok(SimplexResult {
        x,
        objective,
        iterations,
    })
}

fn pivot(t: &mut [Vec<f64>], z: &mut [f64], p: usize, j: usize) {
    let inv = 1.0 / t[p][j];
    for v in t[p].iter_mut() {
        *v *= inv;
    }
    t[p][j] = 1.0;
    let nonzero: Vec<usize> = (0..t[p].len()).filter(|&k| t[p][k] != 0.0).collect();
    let pivot_row = t[p].clone();

    let eliminate = |row: &mut [f64]| {
        let factor = row[j];
        if factor != 0.0 {
            for &k in &nonzero {
                row[k] -= factor * pivot_row[k];
            }
            row[j] = 0.0;
        }
    };
    for (r, row) in t.iter_mut().enumerate() {
        if r != p {
            eliminate(row);
        }
    }
    eliminate(z);
}
