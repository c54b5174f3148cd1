//! First-order upwind stepper for the linear canonical system
//!
//! ```text
//! v_t + (σ/ℓ) v_x̄ = −μ₁ w,   w_t − (σ/ℓ) w_x̄ = μ₂ v,
//! v(0) = w(0) − (CX + ε)/σ,  w(1) = −r₁ v(1) + r₂ δU.
//! ```
//!
//! A step is split into `advance` (interior update), `close_outlet` and
//! `close_inlet`, so a controller can read `v(1)` before choosing `δU`.

use crate::error::{Error, Result};
use crate::pipeline::PipelineParams;

/// Largest accepted Courant number.
pub const CFL_LIMIT: f64 = 0.95;

/// Sampled Riemann fields on the canonical grid `x̄_k = k/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalState {
    pub t: f64,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl CanonicalState {
    pub fn zeros(n: usize) -> Self {
        Self { t: 0.0, v: vec![0.0; n + 1], w: vec![0.0; n + 1] }
    }

    pub fn n(&self) -> usize {
        self.v.len() - 1
    }

    /// `δρ(ℓ) = v(0) + w(0)`.
    pub fn outlet_drho(&self) -> f64 {
        self.v[0] + self.w[0]
    }

    /// `v(1)`, the inlet boundary value.
    pub fn inlet_v(&self) -> f64 {
        self.v[self.n()]
    }
}

/// Upwind transport with the canonical couplings, shared by the plant and
/// the observers.
#[derive(Debug, Clone)]
pub struct Transport {
    pub(crate) n: usize,
    pub(crate) dt: f64,
    pub(crate) courant: f64,
    pub(crate) mu1: Vec<f64>,
    pub(crate) mu2: Vec<f64>,
    pub(crate) r1: f64,
    pub(crate) r2: f64,
    pub(crate) sigma: f64,
}

impl Transport {
    pub fn new(p: &PipelineParams, n: usize, dt: f64) -> Result<Self> {
        p.validate()?;
        if n < 2 {
            return Err(Error::InvalidInput(format!("grid N = {n} is too small")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("time step {dt} must be positive")));
        }
        let courant = dt * n as f64 / p.transit_time();
        if courant > CFL_LIMIT {
            return Err(Error::Cfl { cfl: courant, limit: CFL_LIMIT });
        }
        let (mu1, mu2) = (0..=n).map(|k| p.mu_unchecked(k as f64 / n as f64)).unzip();
        let (r1, r2) = p.reflection_coeffs();
        Ok(Self { n, dt, courant, mu1, mu2, r1, r2, sigma: p.sound_speed })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn reflection(&self) -> (f64, f64) {
        (self.r1, self.r2)
    }

    /// Interior update; `inject` adds `(p₁, p₂) · e` with a scalar `e`.
    /// Entries `v[0]` and `w[N]` are left for the boundary closures.
    pub(crate) fn advance(
        &self,
        v: &[f64],
        w: &[f64],
        inject: Option<(&[f64], &[f64], f64)>,
    ) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let (lam, dt) = (self.courant, self.dt);
        let mut v_new = vec![0.0; n + 1];
        let mut w_new = vec![0.0; n + 1];
        // coupling averaged over the cell each characteristic crosses
        let h = 0.5 * dt;
        for k in 1..=n {
            let src = self.mu1[k] * w[k] + self.mu1[k - 1] * w[k - 1];
            v_new[k] = v[k] - lam * (v[k] - v[k - 1]) - h * src;
        }
        for k in 0..n {
            let src = self.mu2[k] * v[k] + self.mu2[k + 1] * v[k + 1];
            w_new[k] = w[k] + lam * (w[k + 1] - w[k]) + h * src;
        }
        if let Some((p1, p2, e)) = inject {
            if e != 0.0 {
                for k in 1..=n {
                    v_new[k] += dt * p1[k] * e;
                }
                for k in 0..n {
                    w_new[k] += dt * p2[k] * e;
                }
            }
        }
        v_new[0] = v[0];
        w_new[n] = w[n];
        (v_new, w_new)
    }
}

/// Linear canonical plant.
#[derive(Debug, Clone)]
pub struct CanonicalPlant {
    tr: Transport,
}

impl CanonicalPlant {
    pub fn new(p: &PipelineParams, n: usize, dt: f64) -> Result<Self> {
        Ok(Self { tr: Transport::new(p, n, dt)? })
    }

    pub fn transport(&self) -> &Transport {
        &self.tr
    }

    /// Interior update to `t + dt`; boundaries still need closing.
    pub fn advance(&self, st: &CanonicalState) -> CanonicalState {
        let (v, w) = self.tr.advance(&st.v, &st.w, None);
        CanonicalState { t: st.t + self.tr.dt, v, w }
    }

    /// `v(0) = w(0) − d/σ` with `d = CX + ε`.
    pub fn close_outlet(&self, st: &mut CanonicalState, d: f64) {
        st.v[0] = st.w[0] - d / self.tr.sigma;
    }

    /// `w(1) = −r₁ v(1) + r₂ δU`.
    pub fn close_inlet(&self, st: &mut CanonicalState, d_u: f64) {
        let n = self.tr.n;
        st.w[n] = -self.tr.r1 * st.v[n] + self.tr.r2 * d_u;
    }

    pub fn step(&self, st: &CanonicalState, d_u: f64, d: f64) -> CanonicalState {
        let mut next = self.advance(st);
        self.close_outlet(&mut next, d);
        self.close_inlet(&mut next, d_u);
        next
    }
}

/// One step of the canonical plant; `s` is `CX` at the new time.
pub fn step_canonical(
    p: &PipelineParams,
    st: &CanonicalState,
    d_u: f64,
    s: f64,
    eps: f64,
    dt: f64,
) -> Result<CanonicalState> {
    if !(s.is_finite() && eps.is_finite() && d_u.is_finite()) {
        return Err(Error::InvalidInput("non-finite boundary input".into()));
    }
    Ok(CanonicalPlant::new(p, st.n(), dt)?.step(st, d_u, s + eps))
}
