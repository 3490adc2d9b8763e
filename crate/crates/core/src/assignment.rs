//! Minimum-cost linear sum assignment on rectangular matrices.

use crate::error::AssignmentError;

const EPS: f64 = 1e-9;

/// A validated M×N matrix of finite, nonnegative costs.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, AssignmentError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(AssignmentError::Ragged {
                    row: r,
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Row-major `data` of length `rows * cols`.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, AssignmentError> {
        assert_eq!(data.len(), rows * cols, "cost matrix data has the wrong length");
        for (i, &value) in data.iter().enumerate() {
            let (row, col) = (i / cols.max(1), i % cols.max(1));
            if !value.is_finite() {
                return Err(AssignmentError::NonFiniteEntry { row, col, value });
            }
            if value < 0.0 {
                return Err(AssignmentError::NegativeEntry { row, col, value });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, AssignmentError> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn transpose(&self) -> CostMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        CostMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub min_sum: f64,
    /// `(row, col)` pairs sorted by row; `min(M, N)` of them.
    pub pairs: Vec<(usize, usize)>,
}

/// Solves the rectangular assignment problem exactly.
///
/// Among optimal matchings the one chosen is lexicographically smallest on
/// the smaller side: each row (or column, when there are more rows than
/// columns) in turn takes the lowest-indexed partner that still admits an
/// optimal completion.
pub fn linear_sum_assignment(d: &CostMatrix) -> Assignment {
    if d.rows == 0 || d.cols == 0 {
        return Assignment {
            min_sum: 0.0,
            pairs: Vec::new(),
        };
    }
    if d.rows > d.cols {
        let t = linear_sum_assignment(&d.transpose());
        let mut pairs: Vec<(usize, usize)> = t.pairs.into_iter().map(|(c, r)| (r, c)).collect();
        pairs.sort_unstable();
        return Assignment {
            min_sum: t.min_sum,
            pairs,
        };
    }

    let all_rows: Vec<usize> = (0..d.rows).collect();
    let mut free_cols: Vec<usize> = (0..d.cols).collect();
    let (mut budget, mut plan) = hungarian(d, &all_rows, &free_cols);

    let mut pairs = Vec::with_capacity(d.rows);
    for r in 0..d.rows {
        let rest = &all_rows[r + 1..];
        // `plan` is an optimal completion for rows r.., so its partner for
        // row r is always feasible; only lower columns need checking.
        let fallback = plan[0];
        let mut chosen = fallback;
        for &c in free_cols.iter().take_while(|&&c| c < fallback) {
            let others: Vec<usize> = free_cols.iter().copied().filter(|&x| x != c).collect();
            let (sub, _) = hungarian(d, rest, &others);
            if d.get(r, c) + sub <= budget + EPS {
                chosen = c;
                break;
            }
        }
        free_cols.retain(|&x| x != chosen);
        plan = if chosen == fallback {
            plan.split_off(1)
        } else {
            hungarian(d, rest, &free_cols).1
        };
        pairs.push((r, chosen));
        budget -= d.get(r, chosen);
    }
    let min_sum = pairs.iter().map(|&(r, c)| d.get(r, c)).sum();
    Assignment { min_sum, pairs }
}

/// Shortest augmenting path Hungarian method with potentials, O(n²m), on
/// the submatrix `rows × cols` (requires `rows.len() <= cols.len()`).
/// Returns the optimum and, per row position, the chosen column index.
fn hungarian(d: &CostMatrix, rows: &[usize], cols: &[usize]) -> (f64, Vec<usize>) {
    let n = rows.len();
    let m = cols.len();
    debug_assert!(n <= m);
    if n == 0 {
        return (0.0, Vec::new());
    }
    let a = |i: usize, j: usize| d.get(rows[i - 1], cols[j - 1]);
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = a(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut partner = vec![0usize; n];
    let mut total = 0.0;
    for j in 1..=m {
        if p[j] != 0 {
            partner[p[j] - 1] = cols[j - 1];
            total += a(p[j], j);
        }
    }
    (total, partner)
}
