//! Dense O(n^3) Hungarian solver for rectangular maximum-weight assignment.

/// Assign each of the `m` rows of `weights` (m x n, m <= n) to a distinct
/// column maximizing the total weight. The first `pinned.len()` rows are
/// forced onto the given columns; the rest are solved optimally over the
/// remaining columns. Missing rows are padded with zero-weight dummies.
pub fn max_weight_assignment(weights: &[Vec<f64>], pinned: &[usize]) -> Vec<usize> {
    let m = weights.len();
    let n = weights.first().map_or(0, Vec::len);
    assert!(m <= n, "more rows than columns");
    assert!(pinned.len() <= m);

    let free_rows: Vec<usize> = (pinned.len()..m).collect();
    let free_cols: Vec<usize> = (0..n).filter(|c| !pinned.contains(c)).collect();
    let size = free_cols.len();

    // min-cost on negated weights; dummy rows cost zero everywhere
    let cost = |r: usize, c: usize| -> f64 {
        match free_rows.get(r) {
            Some(&row) => -weights[row][free_cols[c]],
            None => 0.0,
        }
    };
    let cols_of_rows = hungarian(size, cost);

    let mut out = pinned.to_vec();
    out.extend(free_rows.iter().enumerate().map(|(r, _)| free_cols[cols_of_rows[r]]));
    out
}

/// Square min-cost assignment; returns the column chosen for every row.
fn hungarian(n: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    // 1-based potentials, column 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}
