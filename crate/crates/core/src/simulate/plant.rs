//! Nonlinear isothermal pipe flow
//!
//! ```text
//! ρ_t + φ_x = 0,   φ_t + σ² ρ_x = −(λ/2D) φ|φ|/ρ,
//! ρ(t, 0) = U(t),  φ(t, ℓ) = φ_L + d(t),
//! ```
//!
//! stepped with the Richtmyer two-step Lax–Wendroff scheme. Friction is
//! treated semi-implicitly in both stages, and the scheme's defect on the
//! steady profile is subtracted so the steady profile is a discrete fixed
//! point. The boundary value that is not
//! prescribed comes from the characteristic invariant `φ ∓ σρ` traced back
//! from the foot of the outgoing characteristic.

use super::canonical::CFL_LIMIT;
use crate::error::{Error, Result};
use crate::pipeline::PipelineParams;

/// Density and mass flux on the physical grid `x_i = i ℓ/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub t: f64,
    pub rho: Vec<f64>,
    pub phi: Vec<f64>,
}

impl PlantState {
    /// Steady profile `(ρ★(x_i), φ_L)`.
    pub fn equilibrium(p: &PipelineParams, n: usize) -> Result<Self> {
        let dx = p.length / n as f64;
        let rho = (0..=n)
            .map(|i| p.equilibrium_density((i as f64 * dx).min(p.length)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { t: 0.0, rho, phi: vec![p.phi_l; n + 1] })
    }

    pub fn n(&self) -> usize {
        self.rho.len() - 1
    }

    /// Mass per unit area carried by the interior nodes, `Σ_{0<i<N} ρ_i Δx`.
    pub fn interior_mass(&self, dx: f64) -> f64 {
        let n = self.n();
        self.rho[1..n].iter().sum::<f64>() * dx
    }
}

/// Result of the interior/outlet stage of a step; the inlet awaits `U`.
#[derive(Debug, Clone)]
pub struct PlantAdvance {
    pub state: PlantState,
    /// `φ − σρ` arriving at the inlet.
    pub r_minus: f64,
    /// Half-step fluxes through the first and last cell faces.
    pub flux_in: f64,
    pub flux_out: f64,
}

#[derive(Debug, Clone)]
pub struct NonlinearPlant {
    n: usize,
    dx: f64,
    dt: f64,
    sigma: f64,
    /// `λ/(2D)`
    fric: f64,
    courant: f64,
    balance: Balance,
}

/// Defect of the raw scheme on the continuous equilibrium, subtracted each
/// step so that `(ρ★, φ_L)` is a discrete fixed point.
#[derive(Debug, Clone, Default)]
struct Balance {
    flux_h: Vec<f64>,
    phi_n: Vec<f64>,
    r_minus: f64,
    r_plus: f64,
}

struct Raw {
    rho_n: Vec<f64>,
    phi_n: Vec<f64>,
    phi_h: Vec<f64>,
    r_minus: f64,
    r_plus: f64,
}

impl NonlinearPlant {
    pub fn new(p: &PipelineParams, n: usize, dt: f64) -> Result<Self> {
        p.validate()?;
        if n < 2 {
            return Err(Error::InvalidInput(format!("grid N = {n} is too small")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("time step {dt} must be positive")));
        }
        let dx = p.length / n as f64;
        let courant = p.sound_speed * dt / dx;
        if courant > CFL_LIMIT {
            return Err(Error::Cfl { cfl: courant, limit: CFL_LIMIT });
        }
        let mut plant = Self {
            n,
            dx,
            dt,
            sigma: p.sound_speed,
            fric: p.lambda_f / (2.0 * p.diameter),
            courant,
            balance: Balance::default(),
        };
        let eq = PlantState::equilibrium(p, n)?;
        let flux_h: Vec<f64> = plant.half_step(&eq).1.iter().map(|f| f - p.phi_l).collect();
        plant.balance.flux_h = flux_h;
        let raw = plant.raw(&eq);
        plant.balance = Balance {
            phi_n: raw.phi_n.iter().map(|f| f - p.phi_l).collect(),
            r_minus: raw.r_minus - (p.phi_l - plant.sigma * eq.rho[0]),
            r_plus: raw.r_plus - (p.phi_l + plant.sigma * eq.rho[n]),
            ..plant.balance
        };
        Ok(plant)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn source(&self, rho: f64, phi: f64) -> f64 {
        -self.fric * phi * phi.abs() / rho
    }

    fn half_step(&self, st: &PlantState) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let (dt, s2) = (self.dt, self.sigma * self.sigma);
        let r = dt / self.dx;
        let (rho, phi) = (&st.rho, &st.phi);
        let mut rho_h = vec![0.0; n];
        let mut phi_h = vec![0.0; n];
        for i in 0..n {
            let rh = 0.5 * (rho[i] + rho[i + 1]) - 0.5 * r * (phi[i + 1] - phi[i]);
            let pbar = 0.5 * (phi[i] + phi[i + 1]);
            let ph = pbar - 0.5 * r * s2 * (rho[i + 1] - rho[i]);
            rho_h[i] = rh;
            phi_h[i] = ph / (1.0 + 0.5 * dt * self.fric * pbar.abs() / rh);
        }
        (rho_h, phi_h)
    }

    /// Scheme with balanced half-step fluxes; `phi_n` and the
    /// characteristic values are not yet balanced.
    fn raw(&self, st: &PlantState) -> Raw {
        let n = self.n;
        let (dt, s2) = (self.dt, self.sigma * self.sigma);
        let r = dt / self.dx;
        let (rho, phi) = (&st.rho, &st.phi);
        let (rho_h, mut phi_h) = self.half_step(st);
        for (f, c) in phi_h.iter_mut().zip(&self.balance.flux_h) {
            *f -= c;
        }

        let mut rho_n = vec![0.0; n + 1];
        let mut phi_n = vec![0.0; n + 1];
        for i in 1..n {
            let rn = rho[i] - r * (phi_h[i] - phi_h[i - 1]);
            let pn = phi[i] - r * s2 * (rho_h[i] - rho_h[i - 1]);
            rho_n[i] = rn;
            phi_n[i] = pn / (1.0 + dt * self.fric * phi[i].abs() / rn);
        }

        // characteristic feet lie inside the first and last cells
        let c = self.courant;
        let mid = 0.5 * c;
        let lerp = |a: f64, b: f64, f: f64| a + f * (b - a);
        let r_minus = lerp(phi[0] - self.sigma * rho[0], phi[1] - self.sigma * rho[1], c)
            + dt * self.source(lerp(rho[0], rho[1], mid), lerp(phi[0], phi[1], mid));
        let r_plus = lerp(phi[n] + self.sigma * rho[n], phi[n - 1] + self.sigma * rho[n - 1], c)
            + dt * self.source(lerp(rho[n], rho[n - 1], mid), lerp(phi[n], phi[n - 1], mid));
        Raw { rho_n, phi_n, phi_h, r_minus, r_plus }
    }

    /// Interior nodes and the outlet at `t + dt` for outlet flux `phi_out`.
    pub fn advance(&self, st: &PlantState, phi_out: f64) -> Result<PlantAdvance> {
        let n = self.n;
        if st.rho.len() != n + 1 || st.phi.len() != n + 1 {
            return Err(Error::InvalidInput("plant state does not match the grid".into()));
        }
        let Raw { mut rho_n, mut phi_n, phi_h, r_minus, r_plus } = self.raw(st);
        for i in 1..n {
            phi_n[i] -= self.balance.phi_n[i];
        }
        let r_minus = r_minus - self.balance.r_minus;
        let r_plus = r_plus - self.balance.r_plus;
        phi_n[n] = phi_out;
        rho_n[n] = (r_plus - phi_out) / self.sigma;

        // inlet placeholders until `close_inlet`
        rho_n[0] = st.rho[0];
        phi_n[0] = st.phi[0];

        let t = st.t + self.dt;
        for (i, &x) in rho_n.iter().enumerate().skip(1) {
            if !(x > 0.0) || !phi_n[i].is_finite() {
                return Err(Error::BlowUp { t, node: i, rho: x });
            }
        }
        Ok(PlantAdvance {
            state: PlantState { t, rho: rho_n, phi: phi_n },
            r_minus,
            flux_in: phi_h[0],
            flux_out: phi_h[n - 1],
        })
    }

    /// Imposes `ρ(0) = u_in` and `φ(0) = R⁻ + σ u_in`.
    pub fn close_inlet(&self, adv: &mut PlantAdvance, u_in: f64) -> Result<()> {
        if !(u_in > 0.0) || !u_in.is_finite() {
            return Err(Error::BlowUp { t: adv.state.t, node: 0, rho: u_in });
        }
        adv.state.rho[0] = u_in;
        adv.state.phi[0] = adv.r_minus + self.sigma * u_in;
        Ok(())
    }

    pub fn step(&self, st: &PlantState, u_in: f64, phi_out: f64) -> Result<PlantAdvance> {
        let mut adv = self.advance(st, phi_out)?;
        self.close_inlet(&mut adv, u_in)?;
        Ok(adv)
    }
}

/// One plant step with inlet density `u_in` and outlet disturbance `d_out`.
pub fn step_plant(
    p: &PipelineParams,
    st: &PlantState,
    u_in: f64,
    d_out: f64,
    dt: f64,
) -> Result<PlantState> {
    let plant = NonlinearPlant::new(p, st.n(), dt)?;
    Ok(plant.step(st, u_in, p.phi_l + d_out)?.state)
}
