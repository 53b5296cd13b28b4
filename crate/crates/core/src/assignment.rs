//! Dense linear assignment (Hungarian method with potentials, O(n^3)).

use ndarray::Array2;

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `column[i]` is the column matched to row `i`.
    pub column: Vec<usize>,
    /// Total cost of the matching.
    pub cost: f64,
}

/// Minimum-cost perfect matching on a square cost matrix.
pub fn solve(cost: &Array2<f64>) -> Assignment {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "assignment requires a square cost matrix");
    if n == 0 {
        return Assignment {
            column: Vec::new(),
            cost: 0.0,
        };
    }
    // 1-based shortest augmenting path formulation; index 0 is a sentinel.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|f| *f = false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            let row = cost.row(i0 - 1);
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut column = vec![0usize; n];
    for j in 1..=n {
        column[row_of[j] - 1] = j - 1;
    }
    let total = column
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[[i, j]])
        .sum();
    Assignment {
        column,
        cost: total,
    }
}
