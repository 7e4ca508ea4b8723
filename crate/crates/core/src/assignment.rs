//! Rectangular minimum-cost assignment (Hungarian method, potentials form).

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `columns[row]` is the column matched to `row`.
    pub columns: Vec<usize>,
    /// Sum of the matched costs, accumulated in row order.
    pub total_cost: f64,
}

/// Matches every row of `cost` to a distinct column at minimum total cost.
///
/// Requires `rows <= cols` and finite entries. Among equal-cost optimal
/// matchings, lower rows get lower columns wherever a swap keeps the cost.
pub fn hungarian(cost: &[Vec<f64>]) -> Result<Assignment> {
    let rows = cost.len();
    if rows == 0 {
        return Ok(Assignment {
            columns: Vec::new(),
            total_cost: 0.0,
        });
    }
    let cols = cost[0].len();
    if cost.iter().any(|r| r.len() != cols) || rows > cols {
        return Err(Error::AssignmentShape { rows, cols });
    }
    for (i, row) in cost.iter().enumerate() {
        if let Some(j) = row.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCost { row: i, col: j });
        }
    }

    // 1-based potentials; column 0 is the virtual source.
    let mut u = vec![0.0f64; rows + 1];
    let mut v = vec![0.0f64; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];

    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut columns = vec![0usize; rows];
    for j in 1..=cols {
        if owner[j] > 0 {
            columns[owner[j] - 1] = j - 1;
        }
    }
    canonicalize_ties(cost, &mut columns);
    let total_cost = columns.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok(Assignment {
        columns,
        total_cost,
    })
}

/// Swaps crossed row pairs whenever the swap leaves the cost bit-identical.
fn canonicalize_ties(cost: &[Vec<f64>], columns: &mut [usize]) {
    let n = columns.len();
    let mut changed = true;
    while changed {
        changed = false;
        for a in 0..n {
            for b in a + 1..n {
                let (ca, cb) = (columns[a], columns[b]);
                if ca > cb && cost[a][cb] + cost[b][ca] == cost[a][ca] + cost[b][cb] {
                    columns.swap(a, b);
                    changed = true;
                }
            }
        }
    }
}
