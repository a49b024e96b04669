//! Minimum-cost assignment (Kuhn-Munkres with potentials) on integer costs.
//!
//! Among all optimal assignments the solver returns the lexicographically
//! smallest one, comparing the column chosen by row 0, then row 1, and so
//! on. Every optimal assignment is a perfect matching on the edges that are
//! tight under the optimal duals, so the refinement only has to pick the
//! smallest such matching.

/// Solves the square `n x n` problem given row-major `cost`; returns the
/// column assigned to each row.
pub fn min_cost_assignment(cost: &[i64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    if n == 0 {
        return Vec::new();
    }
    let (u, v, row_to_col) = solve(cost, n);
    let tight = |i: usize, j: usize| cost[i * n + j] - u[i] - v[j] == 0;
    lexicographic_matching(n, &tight, row_to_col)
}

/// Total cost of `assignment`.
pub fn assignment_cost(cost: &[i64], n: usize, assignment: &[usize]) -> i64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * n + j])
        .sum()
}

/// Classic O(n^3) shortest augmenting path formulation. Returns row duals,
/// column duals and the assignment; `cost[i][j] >= u[i] + v[j]` everywhere
/// with equality on assigned pairs.
fn solve(cost: &[i64], n: usize) -> (Vec<i64>, Vec<i64>, Vec<usize>) {
    const INF: i64 = i64::MAX / 4;
    // 1-based internally; index 0 is the virtual root.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
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
    let mut row_to_col = vec![0; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    (u[1..].to_vec(), v[1..].to_vec(), row_to_col)
}

/// Lexicographically smallest perfect matching of the bipartite graph given
/// by `edge`, starting from any perfect matching `row_to_col` of it.
fn lexicographic_matching(
    n: usize,
    edge: &dyn Fn(usize, usize) -> bool,
    mut row_to_col: Vec<usize>,
) -> Vec<usize> {
    let mut col_to_row = vec![0; n];
    for (r, &c) in row_to_col.iter().enumerate() {
        col_to_row[c] = r;
    }
    let mut fixed = vec![false; n];
    for r in 0..n {
        for c in 0..n {
            if !edge(r, c) {
                continue;
            }
            if row_to_col[r] == c {
                break;
            }
            let holder = col_to_row[c];
            if fixed[holder] {
                continue;
            }
            // Give c to r; the displaced holder must reach r's old column
            // through an alternating path over unfixed rows.
            let freed = row_to_col[r];
            let mut trial_r2c = row_to_col.clone();
            let mut trial_c2r = col_to_row.clone();
            trial_r2c[r] = c;
            trial_c2r[c] = r;
            let mut visited = vec![false; n];
            visited[r] = true;
            fixed[r] = true;
            let ok = augment(
                holder,
                freed,
                edge,
                &fixed,
                &mut visited,
                &mut trial_r2c,
                &mut trial_c2r,
            );
            fixed[r] = false;
            if ok {
                row_to_col = trial_r2c;
                col_to_row = trial_c2r;
                break;
            }
        }
        fixed[r] = true;
    }
    row_to_col
}

/// Kuhn-style search: rematch `row` so that `target` becomes covered.
fn augment(
    row: usize,
    target: usize,
    edge: &dyn Fn(usize, usize) -> bool,
    fixed: &[bool],
    visited: &mut [bool],
    r2c: &mut [usize],
    c2r: &mut [usize],
) -> bool {
    visited[row] = true;
    let n = r2c.len();
    for c in 0..n {
        if !edge(row, c) || c2r[c] == row {
            continue;
        }
        if c == target {
            r2c[row] = c;
            c2r[c] = row;
            return true;
        }
        let next = c2r[c];
        if fixed[next] || visited[next] {
            continue;
        }
        if augment(next, target, edge, fixed, visited, r2c, c2r) {
            r2c[row] = c;
            c2r[c] = row;
            return true;
        }
    }
    false
}
