//! Exhaustive greedy regression-tree reference, written independently of the
//! library's presorted search.

#![allow(dead_code)]

/// Reference tree predictions for a single boosted round with learning rate
/// 1, lambda 0, gamma 0 and base score = mean(y).
/// Gains within 1e-12 of the node's squared-gradient sum are ties, resolved
/// toward the first candidate (lowest feature, then lowest threshold).
pub fn greedy_tree_predictions(x: &[Vec<f64>], y: &[f64], max_depth: usize) -> Vec<f64> {
    let n = y.len();
    let base = y.iter().sum::<f64>() / n as f64;
    let g: Vec<f64> = y.iter().map(|v| base - v).collect();
    let rows: Vec<usize> = (0..n).collect();
    let mut leaf_of = vec![0.0; n];
    grow(x, &g, &rows, 0, max_depth, &mut leaf_of);
    leaf_of.iter().map(|w| base + w).collect()
}

fn sum_g(g: &[f64], rows: &[usize]) -> f64 {
    let mut s = 0.0;
    for &r in rows {
        s += g[r];
    }
    s
}

fn grow(x: &[Vec<f64>], g: &[f64], rows: &[usize], depth: usize, max_depth: usize, leaf_of: &mut [f64]) {
    let total = sum_g(g, rows);
    let weight = -total / rows.len() as f64;
    let tol = 1e-12 * rows.iter().map(|&r| g[r] * g[r]).sum::<f64>();
    let mut best: Option<(f64, usize, f64)> = None;
    if depth < max_depth && rows.len() >= 2 {
        let n_features = x[0].len();
        for f in 0..n_features {
            let mut values: Vec<f64> = rows.iter().map(|&r| x[r][f]).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for w in values.windows(2) {
                let mut t = w[0] + (w[1] - w[0]) / 2.0;
                if t <= w[0] {
                    t = w[1];
                }
                let left: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] < t).collect();
                let right: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] >= t).collect();
                let (gl, gr) = (sum_g(g, &left), sum_g(g, &right));
                let (hl, hr) = (left.len() as f64, right.len() as f64);
                let gain = 0.5 * (gl * gl / hl + gr * gr / hr - (gl + gr) * (gl + gr) / (hl + hr));
                if best.is_none_or(|(b, _, _)| gain > b + tol) {
                    best = Some((gain, f, t));
                }
            }
        }
    }
    match best {
        Some((gain, f, t)) if gain > tol => {
            let left: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] < t).collect();
            let right: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] >= t).collect();
            grow(x, g, &left, depth + 1, max_depth, leaf_of);
            grow(x, g, &right, depth + 1, max_depth, leaf_of);
        }
        _ => {
            for &r in rows {
                leaf_of[r] = weight;
            }
        }
    }
}

/// Deterministic fixture set: small datasets of up to 8 rows with repeated
/// feature values and mixed integer and fractional targets.
pub fn fixture_set() -> Vec<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut state: u64 = 0x2545_f491_4f6c_dd1d;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let mut out = Vec::new();
    for case in 0..400 {
        let n = 1 + (next() % 8) as usize;
        let n_features = 1 + (next() % 3) as usize;
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n_features).map(|_| (next() % 5) as f64 * 0.5).collect())
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|_| {
                if case % 2 == 0 {
                    (next() % 11) as f64 - 5.0
                } else {
                    (next() % 10_000) as f64 / 997.0
                }
            })
            .collect();
        out.push((x, y));
    }
    out
}
