//! Boundary observers for the canonical fields, with and without an
//! estimate of the exosystem state.

use nalgebra::{DMatrix, DVector};

use super::canonical::Transport;
use crate::error::{Error, Result};
use crate::exosystem::{spectral_abscissa, Exosystem};
use crate::kernels::{GainSet, GainVariant};
use crate::pipeline::PipelineParams;

/// Observer copies `v̂`, `ŵ` and, for the uncertain variant, `X̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    pub vhat: Vec<f64>,
    pub what: Vec<f64>,
    pub xhat: Option<DVector<f64>>,
}

impl ObserverState {
    pub fn zeros(n: usize, exo_dim: Option<usize>) -> Self {
        Self {
            vhat: vec![0.0; n + 1],
            what: vec![0.0; n + 1],
            xhat: exo_dim.map(DVector::zeros),
        }
    }

    pub fn inlet_v(&self) -> f64 {
        self.vhat[self.vhat.len() - 1]
    }
}

/// Observer stepper sharing the plant clock.
#[derive(Debug, Clone)]
pub struct Observer {
    tr: Transport,
    gains: GainSet,
    /// `e^{A dt}` and `G = e^{Aℓ/σ} H` for the exosystem estimate.
    exo: Option<(DMatrix<f64>, DVector<f64>, DVector<f64>)>,
}

impl Observer {
    /// Observer that uses the true exosystem state.
    pub fn known(p: &PipelineParams, n: usize, dt: f64, gains: GainSet) -> Result<Self> {
        if gains.variant != GainVariant::KnownExo {
            return Err(Error::InvalidGain("known-exosystem observer needs known-exo gains".into()));
        }
        Self::check_len(&gains, n)?;
        Ok(Self { tr: Transport::new(p, n, dt)?, gains, exo: None })
    }

    /// Observer that also estimates `X` with injection gain `H`.
    pub fn uncertain(
        p: &PipelineParams,
        n: usize,
        dt: f64,
        gains: GainSet,
        exo: &Exosystem,
        h: &DVector<f64>,
    ) -> Result<Self> {
        if gains.variant != GainVariant::Uncertain {
            return Err(Error::InvalidGain("uncertain observer needs uncertain gains".into()));
        }
        Self::check_len(&gains, n)?;
        if h.len() != exo.dim() {
            return Err(Error::InvalidInput("H does not match the exosystem dimension".into()));
        }
        let closed = exo.a() + h * exo.c().transpose() / p.sound_speed;
        if !(spectral_abscissa(&closed)? < 0.0) {
            return Err(Error::InvalidGain("A + HC/σ is not Hurwitz".into()));
        }
        let g = exo.flow(p.transit_time())? * h;
        Ok(Self {
            tr: Transport::new(p, n, dt)?,
            gains,
            exo: Some((exo.flow(dt)?, g, exo.c().clone())),
        })
    }

    fn check_len(gains: &GainSet, n: usize) -> Result<()> {
        if gains.p1.len() != n + 1 || gains.p2.len() != n + 1 {
            return Err(Error::InvalidInput("gain functions do not match the grid".into()));
        }
        Ok(())
    }

    pub fn variant(&self) -> GainVariant {
        self.gains.variant
    }

    pub fn gains(&self) -> &GainSet {
        &self.gains
    }

    /// Interior update with the innovation `y − v̂(1)` of the current step.
    /// For the uncertain variant `X̂` is advanced with the exact flow plus an
    /// explicit trapezoid on the injection, which needs the innovation after
    /// the update as well; it is formed here from `y_next`.
    pub fn advance(&self, obs: &ObserverState, y: f64, y_next: f64) -> Result<ObserverState> {
        let innov = y - obs.inlet_v();
        let (vhat, what) =
            self.tr.advance(&obs.vhat, &obs.what, Some((&self.gains.p1, &self.gains.p2, innov)));
        let xhat = match (&self.exo, &obs.xhat) {
            (None, _) => None,
            (Some((flow, g, _)), Some(x)) => {
                let innov_next = y_next - vhat[vhat.len() - 1];
                let dt = self.tr.dt;
                Some(flow * x + (flow * g * innov + g * innov_next) * (0.5 * dt))
            }
            (Some(_), None) => {
                return Err(Error::InvalidInput("uncertain observer state lacks X̂".into()))
            }
        };
        Ok(ObserverState { vhat, what, xhat })
    }

    /// `v̂(0) = ŵ(0) − s_used/σ`, where `s_used` is `CX` (known) or `CX̂`.
    pub fn close_outlet(&self, obs: &mut ObserverState, s_known: f64) {
        let s = match (&self.exo, &obs.xhat) {
            (Some((_, _, c)), Some(x)) => c.dot(x),
            _ => s_known,
        };
        obs.vhat[0] = obs.what[0] - s / self.tr.sigma;
    }

    /// `ŵ(1) = −r₁ y + r₂ δU`.
    pub fn close_inlet(&self, obs: &mut ObserverState, y: f64, d_u: f64) {
        let n = self.tr.n;
        obs.what[n] = -self.tr.r1 * y + self.tr.r2 * d_u;
    }

    /// Full step: advance, then both boundary closures.
    pub fn step(
        &self,
        obs: &ObserverState,
        y: f64,
        y_next: f64,
        s_next: f64,
        d_u: f64,
    ) -> Result<ObserverState> {
        let mut next = self.advance(obs, y, y_next)?;
        self.close_outlet(&mut next, s_next);
        self.close_inlet(&mut next, y_next, d_u);
        Ok(next)
    }
}
