/// Guard substituted for zero weight components.
pub const ZERO_WEIGHT_GUARD: f64 = 1e-6;

/// Tchebycheff scalarization `max_j w_j·|f_j − z_j|`.
pub fn tchebycheff(f: &[f64; 2], weight: &[f64; 2], ideal: &[f64; 2]) -> f64 {
    (0..2)
        .map(|j| {
            let w = if weight[j] == 0.0 { ZERO_WEIGHT_GUARD } else { weight[j] };
            w * (f[j] - ideal[j]).abs()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Evenly spread bi-objective weights, first objective weight descending.
pub fn generate_weights(n: usize) -> Vec<[f64; 2]> {
    assert!(n >= 2, "need at least two weight vectors");
    let d = (n - 1) as f64;
    (0..n)
        .map(|i| [(n - 1 - i) as f64 / d, i as f64 / d])
        .collect()
}

/// Indices of the `t` weight vectors closest to each weight (itself included).
pub fn neighborhoods(weights: &[[f64; 2]], t: usize) -> Vec<Vec<usize>> {
    weights
        .iter()
        .map(|w| {
            let mut idx: Vec<usize> = (0..weights.len()).collect();
            idx.sort_by(|&a, &b| {
                let da = (weights[a][0] - w[0]).powi(2) + (weights[a][1] - w[1]).powi(2);
                let db = (weights[b][0] - w[0]).powi(2) + (weights[b][1] - w[1]).powi(2);
                da.total_cmp(&db).then(a.cmp(&b))
            });
            idx.truncate(t);
            idx
        })
        .collect()
}
