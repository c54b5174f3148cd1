//! Feedback gain row `K` and output-injection gain functions `p₁`, `p₂`.

use nalgebra::DVector;

use super::{TriKernel, Triangle};
use crate::error::{Error, Result};
use crate::exosystem::{spectral_abscissa, Exosystem};
use crate::pipeline::PipelineParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainVariant {
    KnownExo,
    Uncertain,
}

/// Gains consumed by the observers and control laws.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    pub variant: GainVariant,
    /// Feedback row `K` (stored as a column), once computed.
    pub k: Option<DVector<f64>>,
    /// `p₁(x̄_i)` on the kernel grid.
    pub p1: Vec<f64>,
    /// `p₂(x̄_i)` on the kernel grid.
    pub p2: Vec<f64>,
}

impl GainSet {
    pub fn with_feedback(mut self, k: DVector<f64>) -> Self {
        self.k = Some(k);
        self
    }
}

/// Trapezoid weights for `len` equally spaced samples with spacing `h`.
pub(crate) fn trapezoid_weight(k: usize, len: usize, h: f64) -> f64 {
    if len < 2 {
        0.0
    } else if k == 0 || k == len - 1 {
        0.5 * h
    } else {
        h
    }
}

fn expect_triangle(k: &TriKernel, t: Triangle, name: &str) -> Result<()> {
    if k.triangle() != t {
        return Err(Error::InvalidInput(format!("{name} must live on the {t:?} triangle")));
    }
    Ok(())
}

/// `K = (1/2σ) C e^{Aℓ/σ} − (1/σ) ∫₀¹ K²¹(τ, 0) C e^{Aℓ(1−τ)/σ} dτ`.
pub fn feedback_gain(exo: &Exosystem, p: &PipelineParams, k21: &TriKernel) -> Result<DVector<f64>> {
    expect_triangle(k21, Triangle::Lower, "K21")?;
    let sigma = p.sound_speed;
    let t = p.transit_time();
    let n = k21.n();
    let h = k21.step();
    let row = |s: f64| -> Result<DVector<f64>> { Ok(exo.flow(s)?.transpose() * exo.c()) };
    let mut gain = row(t)? / (2.0 * sigma);
    for k in 0..=n {
        let w = trapezoid_weight(k, n + 1, h) * k21.get(k, 0);
        if w != 0.0 {
            gain -= row(t * (1.0 - k as f64 * h))? * (w / sigma);
        }
    }
    Ok(gain)
}

/// `p₁ = −(σ/ℓ) P¹¹(x̄, 1)`, `p₂ = −(σ/ℓ) P²¹(x̄, 1)`.
pub fn observer_gains_known(p: &PipelineParams, p11: &TriKernel, p21: &TriKernel) -> Result<GainSet> {
    expect_triangle(p11, Triangle::Upper, "P11")?;
    expect_triangle(p21, Triangle::Upper, "P21")?;
    let n = p11.n();
    let s = 1.0 / p.transit_time();
    Ok(GainSet {
        variant: GainVariant::KnownExo,
        k: None,
        p1: (0..=n).map(|i| -s * p11.get(i, n)).collect(),
        p2: (0..=n).map(|i| -s * p21.get(i, n)).collect(),
    })
}

/// Gains for the observer that also estimates the exosystem state.
pub fn observer_gains_uncertain(
    exo: &Exosystem,
    h_gain: &DVector<f64>,
    p: &PipelineParams,
    p11: &TriKernel,
    p21: &TriKernel,
) -> Result<GainSet> {
    if h_gain.len() != exo.dim() {
        return Err(Error::InvalidInput(format!(
            "H has {} entries, exosystem has dimension {}",
            h_gain.len(),
            exo.dim()
        )));
    }
    let sigma = p.sound_speed;
    let closed = exo.a() + h_gain * exo.c().transpose() / sigma;
    let abscissa = spectral_abscissa(&closed)?;
    if !(abscissa < 0.0) {
        return Err(Error::InvalidGain(format!(
            "A + HC/σ is not Hurwitz (largest real part {abscissa:e})"
        )));
    }
    let mut gains = observer_gains_known(p, p11, p21)?;
    gains.variant = GainVariant::Uncertain;
    let n = p11.n();
    let h = p11.step();
    let t = p.transit_time();
    let g: Vec<f64> = (0..=n)
        .map(|j| exo.output(&(exo.flow(t * (1.0 - j as f64 * h))? * h_gain)))
        .collect::<Result<_>>()?;
    for i in 0..=n {
        let len = n - i + 1;
        let (mut s1, mut s2) = (0.0, 0.0);
        for j in i..=n {
            let w = trapezoid_weight(j - i, len, h) * g[j];
            s1 += w * p11.get(i, j);
            s2 += w * p21.get(i, j);
        }
        gains.p1[i] += (s1 - g[0]) / sigma;
        gains.p2[i] += s2 / sigma;
    }
    if gains.p1.iter().chain(&gains.p2).any(|x| !x.is_finite()) {
        return Err(Error::InvalidGain("observer gains are not finite".into()));
    }
    Ok(gains)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSet;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn base() -> PipelineParams {
        PipelineParams::new(0.011, 0.5, 25000.0, 378.0, 289.0, 46.0).unwrap()
    }

    fn base_exo() -> Exosystem {
        Exosystem::harmonic(2.0 * PI / 21600.0, [0.0, 0.1 * 289.0 / 3600.0]).unwrap()
    }

    #[test]
    fn frictionless_feedback_gain() {
        let p = PipelineParams { lambda_f: 0.0, ..base() };
        let set = KernelSet::solve(&p, 16).unwrap();
        let exo = base_exo();
        let k = feedback_gain(&exo, &p, &set.k21).unwrap();
        let expect = exo.flow(p.transit_time()).unwrap().transpose() * exo.c() / (2.0 * 378.0);
        assert_eq!(k, expect);

        let scalar = Exosystem::new(
            DMatrix::zeros(1, 1),
            DVector::from_vec(vec![1.0]),
            DVector::zeros(1),
        )
        .unwrap();
        let k = feedback_gain(&scalar, &p, &set.k21).unwrap();
        assert_eq!(k[0], 1.0 / 756.0);
    }

    #[test]
    fn known_gains_follow_diagonal_at_inlet() {
        let p = base();
        let n = 40;
        let set = KernelSet::solve(&p, n).unwrap();
        let g = observer_gains_known(&p, &set.p11, &set.p21).unwrap();
        let (_, m2) = p.mu_coeffs(1.0).unwrap();
        assert!((g.p2[n] - 0.5 * m2).abs() <= 1e-15 * m2.abs().max(1e-300) + 1e-18);
        assert!(g.k.is_none());
        let z = PipelineParams { lambda_f: 0.0, ..p };
        let set = KernelSet::solve(&z, n).unwrap();
        let g = observer_gains_known(&z, &set.p11, &set.p21).unwrap();
        assert!(g.p1.iter().chain(&g.p2).all(|&x| x == 0.0));
    }

    #[test]
    fn uncertain_gains_frictionless_are_constant() {
        let p = PipelineParams { lambda_f: 0.0, ..base() };
        let exo = base_exo();
        let w = 2.0 * PI / 21600.0;
        let poles = [nalgebra::Complex::new(-3.0 * w, 0.0), nalgebra::Complex::new(-4.0 * w, 0.0)];
        let h = exo.place_observer_gain(378.0, &poles).unwrap();
        let set = KernelSet::solve(&p, 16).unwrap();
        let g = observer_gains_uncertain(&exo, &h, &p, &set.p11, &set.p21).unwrap();
        let expect = -exo.output(&(exo.flow(p.transit_time()).unwrap() * &h)).unwrap() / 378.0;
        assert!(g.p1.iter().all(|&x| (x - expect).abs() <= 1e-15 * expect.abs()));
        assert!(g.p2.iter().all(|&x| x == 0.0));
        assert_eq!(g.variant, GainVariant::Uncertain);
    }

    #[test]
    fn zero_h_is_rejected_for_oscillator() {
        let p = base();
        let set = KernelSet::solve(&p, 16).unwrap();
        let err = observer_gains_uncertain(&base_exo(), &DVector::zeros(2), &p, &set.p11, &set.p21);
        assert!(matches!(err, Err(Error::InvalidGain(_))));
        let err = observer_gains_uncertain(&base_exo(), &DVector::zeros(3), &p, &set.p11, &set.p21);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn wrong_triangle_is_rejected() {
        let p = base();
        let set = KernelSet::solve(&p, 8).unwrap();
        assert!(feedback_gain(&base_exo(), &p, &set.p21).is_err());
        assert!(observer_gains_known(&p, &set.k22, &set.k21).is_err());
    }
}
