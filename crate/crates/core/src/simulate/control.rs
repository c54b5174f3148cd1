//! Output-feedback boundary control law
//!
//! ```text
//! δU = (r₁/r₂) v(1) + (1/r₂) [∫₀¹ K²¹(1,ξ) v̂ dξ + ∫₀¹ K²²(1,ξ) ŵ dξ + K X]
//! ```
//!
//! with `X` replaced by `X̂` for the uncertain-disturbance variant.

use nalgebra::DVector;

use super::observer::ObserverState;
use crate::error::{Error, Result};
use crate::kernels::{KernelSet, TriKernel};
use crate::pipeline::PipelineParams;

#[derive(Debug, Clone)]
pub struct ControlLaw {
    r1: f64,
    r2: f64,
    /// Trapezoid-weighted `K²¹(1, ξ_j)` and `K²²(1, ξ_j)`.
    k21: Vec<f64>,
    k22: Vec<f64>,
    k: DVector<f64>,
}

fn weighted_last_row(kernel: &TriKernel) -> Vec<f64> {
    let n = kernel.n();
    let h = kernel.step();
    (0..=n)
        .map(|j| {
            let w = if j == 0 || j == n { 0.5 * h } else { h };
            w * kernel.get(n, j)
        })
        .collect()
}

impl ControlLaw {
    pub fn new(p: &PipelineParams, kernels: &KernelSet, k: DVector<f64>) -> Self {
        let (r1, r2) = p.reflection_coeffs();
        Self {
            r1,
            r2,
            k21: weighted_last_row(&kernels.k21),
            k22: weighted_last_row(&kernels.k22),
            k,
        }
    }

    pub fn gain(&self) -> &DVector<f64> {
        &self.k
    }

    fn check(&self, vhat: &[f64], what: &[f64], x: &DVector<f64>) -> Result<()> {
        if vhat.len() != self.k21.len() || what.len() != self.k22.len() {
            return Err(Error::InvalidInput("observer fields do not match the kernel grid".into()));
        }
        if x.len() != self.k.len() {
            return Err(Error::InvalidInput("exosystem state does not match K".into()));
        }
        Ok(())
    }

    /// The control law evaluated on the given fields.
    pub fn evaluate(&self, y: f64, vhat: &[f64], what: &[f64], x: &DVector<f64>) -> Result<f64> {
        self.check(vhat, what, x)?;
        let integral: f64 = self
            .k21
            .iter()
            .zip(vhat)
            .chain(self.k22.iter().zip(what))
            .map(|(k, f)| k * f)
            .sum();
        Ok((self.r1 * y + integral + self.k.dot(x)) / self.r2)
    }

    /// The control law with `ŵ(1) = −r₁ y + r₂ δU` substituted, so that the
    /// result is consistent with the observer boundary it feeds. `what[N]`
    /// is ignored.
    pub fn evaluate_closed(
        &self,
        y: f64,
        vhat: &[f64],
        what: &[f64],
        x: &DVector<f64>,
    ) -> Result<f64> {
        self.check(vhat, what, x)?;
        let n = what.len() - 1;
        let integral: f64 = self
            .k21
            .iter()
            .zip(vhat)
            .chain(self.k22[..n].iter().zip(&what[..n]))
            .map(|(k, f)| k * f)
            .sum();
        let c = self.k22[n];
        let den = self.r2 * (1.0 - c);
        if den.abs() < 1e-300 {
            return Err(Error::InvalidGain("control law is singular at the inlet node".into()));
        }
        Ok((self.r1 * y * (1.0 - c) + integral + self.k.dot(x)) / den)
    }
}

/// Control law with the true exosystem state.
pub fn control_known(law: &ControlLaw, y: f64, obs: &ObserverState, x: &DVector<f64>) -> Result<f64> {
    law.evaluate(y, &obs.vhat, &obs.what, x)
}

/// Control law with the estimated exosystem state `X̂`.
pub fn control_uncertain(law: &ControlLaw, y: f64, obs: &ObserverState) -> Result<f64> {
    let xhat = obs
        .xhat
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("observer state lacks X̂".into()))?;
    law.evaluate(y, &obs.vhat, &obs.what, xhat)
}
