//! Volterra transforms used to check the closed loop against its target
//! system. These are diagnostics; the controller never evaluates them.

use nalgebra::DVector;

use super::gains::trapezoid_weight;
use super::KernelSet;
use crate::error::{Error, Result};
use crate::exosystem::Exosystem;
use crate::pipeline::PipelineParams;

fn check_len(set: &KernelSet, fields: &[&[f64]]) -> Result<()> {
    if fields.iter().any(|f| f.len() != set.n + 1) {
        return Err(Error::InvalidInput(format!(
            "fields must have {} samples to match the kernel grid",
            set.n + 1
        )));
    }
    Ok(())
}

/// `α = v − ∫₀^x̄ K¹¹ v + K¹² w`, `β = w − ∫₀^x̄ K²¹ v + K²² w`.
pub fn backstepping(set: &KernelSet, v: &[f64], w: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(set, &[v, w])?;
    let n = set.n;
    let h = 1.0 / n as f64;
    let mut alpha = v.to_vec();
    let mut beta = w.to_vec();
    for i in 0..=n {
        for j in 0..=i {
            let q = trapezoid_weight(j, i + 1, h);
            alpha[i] -= q * (set.k11.get(i, j) * v[j] + set.k12.get(i, j) * w[j]);
            beta[i] -= q * (set.k21.get(i, j) * v[j] + set.k22.get(i, j) * w[j]);
        }
    }
    Ok((alpha, beta))
}

/// `ṽ = α̃ − ∫_x̄^1 P¹¹ α̃ + P¹² β̃`, `w̃ = β̃ − ∫_x̄^1 P²¹ α̃ + P²² β̃`.
pub fn observer_error_from_target(
    set: &KernelSet,
    alpha: &[f64],
    beta: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(set, &[alpha, beta])?;
    let n = set.n;
    let h = 1.0 / n as f64;
    let mut v = alpha.to_vec();
    let mut w = beta.to_vec();
    for i in 0..=n {
        for j in i..=n {
            let q = trapezoid_weight(j - i, n - i + 1, h);
            v[i] -= q * (set.p11.get(i, j) * alpha[j] + set.p12.get(i, j) * beta[j]);
            w[i] -= q * (set.p21.get(i, j) * alpha[j] + set.p22.get(i, j) * beta[j]);
        }
    }
    Ok((v, w))
}

/// `γ(x̄) = α̃(x̄) + (1/σ) C e^{−Aℓx̄/σ} X̃`.
pub fn gamma(
    exo: &Exosystem,
    p: &PipelineParams,
    alpha: &[f64],
    x_err: &DVector<f64>,
) -> Result<Vec<f64>> {
    if alpha.len() < 2 {
        return Err(Error::InvalidInput("gamma needs at least two samples".into()));
    }
    let n = alpha.len() - 1;
    let t = p.transit_time();
    alpha
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let xbar = i as f64 / n as f64;
            Ok(a + exo.output(&(exo.flow(-t * xbar)? * x_err))? / p.sound_speed)
        })
        .collect()
}
