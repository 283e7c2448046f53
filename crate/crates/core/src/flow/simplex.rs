//! Dense primal simplex for small LPs in the form
//! max c.x subject to A.x <= b, x >= 0, with every b_i >= 0,
//! so the all-slack basis is feasible and no phase-1 is needed.

use super::FlowError;

#[derive(Debug)]
pub(crate) struct SimplexResult {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Shadow price per constraint row.
    pub duals: Vec<f64>,
    /// Final objective-row coefficient per structural variable.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

const ENTER_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;

/// Bland's rule on both the entering and leaving choice, which cannot cycle.
pub(crate) fn simplex_max(c: &[f64], rows: &[(Vec<f64>, f64)]) -> Result<SimplexResult, FlowError> {
    let n = c.len();
    let m = rows.len();
    for (a, b) in rows {
        assert_eq!(a.len(), n, "constraint width mismatch");
        assert!(*b >= 0.0, "negative right-hand side breaks the slack basis");
    }
    let width = n + m + 1;
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    for (i, (a, b)) in rows.iter().enumerate() {
        let mut row = vec![0.0; width];
        row[..n].copy_from_slice(a);
        row[n + i] = 1.0;
        row[width - 1] = *b;
        t.push(row);
    }
    let mut obj = vec![0.0; width];
    for (j, &cj) in c.iter().enumerate() {
        obj[j] = -cj;
    }
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_iterations = 1000 + 50 * (n + m);
    let mut iterations = 0;
    loop {
        let entering = (0..n + m).find(|&j| t[m][j] < -ENTER_TOL);
        let Some(enter) = entering else { break };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let a = t[i][enter];
            if a > PIVOT_TOL {
                let ratio = t[i][width - 1] / a;
                let better = ratio < best_ratio - PIVOT_TOL
                    || (ratio < best_ratio + PIVOT_TOL
                        && leave.is_some_and(|l| basis[i] < basis[l]));
                if better || leave.is_none() {
                    best_ratio = best_ratio.min(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return Err(FlowError::Unbounded);
        };
        iterations += 1;
        if iterations > max_iterations {
            return Err(FlowError::Stalled { iterations });
        }
        let pivot = t[leave][enter];
        for v in t[leave].iter_mut() {
            *v /= pivot;
        }
        for i in 0..=m {
            if i == leave {
                continue;
            }
            let factor = t[i][enter];
            if factor == 0.0 {
                continue;
            }
            let (pivot_row, target) = if i < leave {
                let (head, tail) = t.split_at_mut(leave);
                (&tail[0], &mut head[i])
            } else {
                let (head, tail) = t.split_at_mut(i);
                (&head[leave], &mut tail[0])
            };
            for (tv, pv) in target.iter_mut().zip(pivot_row) {
                *tv -= factor * pv;
            }
        }
        basis[leave] = enter;
    }

    let mut x = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = t[i][width - 1];
        }
    }
    Ok(SimplexResult {
        x,
        objective: t[m][width - 1],
        duals: t[m][n..n + m].to_vec(),
        reduced_costs: t[m][..n].to_vec(),
        iterations,
    })
}
