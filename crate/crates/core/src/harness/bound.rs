use crate::hierarchy::Decomposition;
use crate::policies::PolicyConfig;

fn confidence_radius(dim: usize, t: f64, ridge: f64, delta: f64, norm_term: f64) -> f64 {
    (dim as f64 * ((1.0 + t / ridge) / delta).ln()).sqrt() + norm_term
}

/// `β_t = √(D log((1 + t/λ)/δ)) + √(2λ) S⊥`.
pub fn beta_full(cfg: &PolicyConfig, s_perp: f64, dim: usize, t: f64) -> f64 {
    confidence_radius(dim, t, cfg.lambda, cfg.delta, (2.0 * cfg.lambda).sqrt() * s_perp)
}

/// `β̃_t = √(K log((1 + t/λ̃)/δ)) + √λ̃ S̃`.
pub fn beta_coarse(cfg: &PolicyConfig, s_tilde: f64, k: usize, t: f64) -> f64 {
    confidence_radius(k, t, cfg.lambda_tilde, cfg.delta, cfg.lambda_tilde.sqrt() * s_tilde)
}

/// CoFineUCB regret bound `(β_t√D + β̃_t√K)·√(2t log(1+t))` for `t = 0..=horizon`.
pub fn cofine_regret_bound(cfg: &PolicyConfig, decomp: &Decomposition, dim: usize, k: usize, horizon: usize) -> Vec<f64> {
    (0..=horizon)
        .map(|t| {
            let t = t as f64;
            let growth = (2.0 * t * (1.0 + t).ln()).sqrt();
            (beta_full(cfg, decomp.s_perp, dim, t) * (dim as f64).sqrt()
                + beta_coarse(cfg, decomp.s_tilde, k, t) * (k as f64).sqrt())
                * growth
        })
        .collect()
}

/// The single-space LinUCB bound evaluated the same way:
/// `(√(D log((1 + t/λ)/δ)) + √λ‖w*‖)·√D·√(2t log(1+t))`.
pub fn linucb_bound(cfg: &PolicyConfig, w_norm: f64, dim: usize, horizon: usize) -> Vec<f64> {
    (0..=horizon)
        .map(|t| {
            let t = t as f64;
            confidence_radius(dim, t, cfg.lambda, cfg.delta, cfg.lambda.sqrt() * w_norm)
                * (dim as f64).sqrt()
                * (2.0 * t * (1.0 + t).ln()).sqrt()
        })
        .collect()
}
