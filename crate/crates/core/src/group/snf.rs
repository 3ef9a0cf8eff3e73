use alloc::vec::Vec;

/// Invariant factors `t_1 | t_2 | … | t_k` of an integer matrix, `k = min(rows, cols)`.
///
/// Zero factors (free directions) come last. The computation is the
/// classical elimination: bring the smallest nonzero entry of the trailing
/// block to the pivot, clear its row and column, and fold in any row whose
/// entries the pivot does not divide. Intermediates are `i128`.
///
/// Panics if a factor does not fit in `u64`.
pub fn smith_normal_form(matrix: &[Vec<i64>]) -> Vec<u64> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    assert!(matrix.iter().all(|r| r.len() == cols), "ragged matrix");
    let mut a: Vec<Vec<i128>> = matrix
        .iter()
        .map(|r| r.iter().map(|&v| v as i128).collect())
        .collect();
    let k = rows.min(cols);
    let mut out = Vec::with_capacity(k);
    for t in 0..k {
        loop {
            let Some((pi, pj)) = min_nonzero(&a, t) else {
                break;
            };
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[i][t].div_euclid(a[t][t]);
                if q != 0 {
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = a[t][j].div_euclid(a[t][t]);
                if q != 0 {
                    for i in t..rows {
                        a[i][j] -= q * a[i][t];
                    }
                }
                clean &= a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // Pivot must divide the whole trailing block.
            let p = a[t][t];
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| a[i][j] % p != 0));
            match bad {
                Some(i) => {
                    for j in t..cols {
                        a[t][j] += a[i][j];
                    }
                }
                None => break,
            }
        }
        out.push(u64::try_from(a[t][t].abs()).expect("invariant factor overflow"));
    }
    out
}

fn min_nonzero(a: &[Vec<i128>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(i128, usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, &v) in row.iter().enumerate().skip(t) {
            if v != 0 && best.is_none_or(|(b, _, _)| v.abs() < b) {
                best = Some((v.abs(), i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}
