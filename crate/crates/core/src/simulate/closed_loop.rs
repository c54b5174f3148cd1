//! Closed-loop driver: exosystem, plant, observer and control law on one
//! clock.
//!
//! Each step runs, in order:
//! 1. `X ← e^{A dt} X`, then `s = CX` and `ε(s, t)` at the new time;
//! 2. the plant interior and outlet (`φ(ℓ) = φ_L + s + ε`), giving `y = v(1)`;
//! 3. the observer interior and outlet;
//! 4. the control law, solved together with the observer inlet closure;
//! 5. the plant and observer inlet closures with the new `δU`.

use log::{debug, warn};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::canonical::{CanonicalPlant, CanonicalState};
use super::control::ControlLaw;
use super::observer::{Observer, ObserverState};
use super::plant::{NonlinearPlant, PlantAdvance, PlantState};
use crate::error::{Error, Result};
use crate::kernels::{feedback_gain, observer_gains_known, observer_gains_uncertain, KernelSet};
use crate::pipeline::PipelineParams;
use crate::scenario::{Controller, ObserverInit, PlantKind, Scenario};

/// Inlet density excursion allowed on the nonlinear plant, as a fraction of `U★`.
pub const SATURATION_FRACTION: f64 = 0.5;

/// One logged sample. Column order is the CSV layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRow {
    pub t: f64,
    pub rho_in: f64,
    pub rho_mid: f64,
    pub rho_out: f64,
    pub phi_in: f64,
    pub phi_mid: f64,
    pub phi_out: f64,
    #[serde(rename = "dU")]
    pub d_u: f64,
    pub s: f64,
    pub eps: f64,
    pub err_v: f64,
    pub err_w: f64,
    #[serde(rename = "err_X")]
    pub err_x: f64,
}

pub const COLUMNS: [&str; 13] = [
    "t", "rho_in", "rho_mid", "rho_out", "phi_in", "phi_mid", "phi_out", "dU", "s", "eps", "err_v",
    "err_w", "err_X",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub rows: Vec<TimeSeriesRow>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// `δρ(t, ℓ) = ρ(t, ℓ) − ρ★(ℓ)` per row.
    pub fn outlet_deviation(&self, rho_out_star: f64) -> Vec<f64> {
        self.rows.iter().map(|r| r.rho_out - rho_out_star).collect()
    }

    /// `max |δρ(t, ℓ)|` over rows with `t >= from`.
    pub fn max_outlet_deviation(&self, rho_out_star: f64, from: f64) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.t >= from)
            .map(|r| (r.rho_out - rho_out_star).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: TimeSeries,
    pub warnings: Vec<String>,
    pub dt: f64,
    pub steps: usize,
    /// `ρ★(ℓ)`
    pub rho_out_star: f64,
    pub saturated_steps: usize,
}

enum Plant {
    Nonlinear { plant: NonlinearPlant, state: PlantState, pending: Option<PlantAdvance> },
    Linear { plant: CanonicalPlant, state: CanonicalState },
}

impl Plant {
    fn new(sc: &Scenario, dt: f64) -> Result<Self> {
        let (p, n) = (&sc.params, sc.grid);
        Ok(match sc.plant {
            PlantKind::Nonlinear => Plant::Nonlinear {
                plant: NonlinearPlant::new(p, n, dt)?,
                state: PlantState::equilibrium(p, n)?,
                pending: None,
            },
            PlantKind::LinearCanonical => {
                Plant::Linear { plant: CanonicalPlant::new(p, n, dt)?, state: CanonicalState::zeros(n) }
            }
        })
    }

    /// Interior and outlet update with outlet disturbance `d`; returns `v(1)`.
    fn advance(&mut self, p: &PipelineParams, d: f64) -> Result<f64> {
        match self {
            Plant::Nonlinear { plant, state, pending } => {
                let adv = plant.advance(state, p.phi_l + d)?;
                // δρ(0) = δU cancels in v(1); only the outgoing invariant remains
                let dphi = adv.r_minus - (p.phi_l - p.sound_speed * p.u_star);
                let (f_v, _) = p.weights_unchecked(0.0);
                let y = -f_v * dphi / (2.0 * p.sound_speed);
                *pending = Some(adv);
                Ok(y)
            }
            Plant::Linear { plant, state } => {
                let mut next = plant.advance(state);
                plant.close_outlet(&mut next, d);
                *state = next;
                Ok(state.inlet_v())
            }
        }
    }

    fn close_inlet(&mut self, d_u: f64, u_star: f64) -> Result<()> {
        match self {
            Plant::Nonlinear { plant, state, pending } => {
                let mut adv = pending.take().expect("advance precedes close_inlet");
                plant.close_inlet(&mut adv, u_star + d_u)?;
                *state = adv.state;
            }
            Plant::Linear { plant, state } => plant.close_inlet(state, d_u),
        }
        Ok(())
    }

    /// Riemann fields on the canonical grid.
    fn canonical(&self, p: &PipelineParams) -> (Vec<f64>, Vec<f64>) {
        match self {
            Plant::Nonlinear { state, .. } => {
                let n = state.n();
                let dx = p.length / n as f64;
                (0..=n)
                    .map(|k| {
                        let i = n - k;
                        let x = (i as f64 * dx).min(p.length);
                        let rho_star = p.equilibrium_density(x).expect("grid lies in the pipe");
                        let (f_v, f_w) = p.weights_unchecked(x);
                        let drho = state.rho[i] - rho_star;
                        let dphi = state.phi[i] - p.phi_l;
                        let a = dphi / (2.0 * p.sound_speed);
                        (f_v * (0.5 * drho - a), f_w * (0.5 * drho + a))
                    })
                    .unzip()
            }
            Plant::Linear { state, .. } => (state.v.clone(), state.w.clone()),
        }
    }

    /// `(ρ, φ)` at physical node `i`.
    fn physical(&self, p: &PipelineParams, i: usize) -> Result<(f64, f64)> {
        match self {
            Plant::Nonlinear { state, .. } => Ok((state.rho[i], state.phi[i])),
            Plant::Linear { state, .. } => {
                let n = state.n();
                let k = n - i;
                let x = (i as f64 * p.length / n as f64).min(p.length);
                let (drho, dphi) = p.from_riemann(state.v[k], state.w[k], k as f64 / n as f64)?;
                Ok((p.equilibrium_density(x)? + drho, p.phi_l + dphi))
            }
        }
    }

    fn probes(&self, p: &PipelineParams, n: usize) -> Result<[(f64, f64); 3]> {
        let inlet = self.physical(p, 0)?;
        let outlet = self.physical(p, n)?;
        let mid = if n.is_multiple_of(2) {
            self.physical(p, n / 2)?
        } else {
            let (a, b) = (self.physical(p, n / 2)?, self.physical(p, n / 2 + 1)?);
            (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1))
        };
        Ok([inlet, mid, outlet])
    }
}

struct Estimator {
    observer: Observer,
    law: ControlLaw,
    state: ObserverState,
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() - 1;
    let h = 1.0 / n as f64;
    let sum: f64 = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(k, (x, y))| {
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            w * (x - y) * (x - y)
        })
        .sum();
    (h * sum).sqrt()
}

fn build_estimator(sc: &Scenario, dt: f64, plant: &Plant) -> Result<Option<Estimator>> {
    let (p, n) = (&sc.params, sc.grid);
    if sc.controller == Controller::Off {
        return Ok(None);
    }
    let set = KernelSet::solve(p, n)?;
    let k = feedback_gain(&sc.exo, p, &set.k21)?;
    let law = ControlLaw::new(p, &set, k.clone());
    let (observer, xhat0) = match sc.controller {
        Controller::KnownExo => {
            let gains = observer_gains_known(p, &set.p11, &set.p21)?.with_feedback(k);
            (Observer::known(p, n, dt, gains)?, None)
        }
        Controller::Uncertain => {
            let poles = sc.observer_poles()?;
            let h = sc.exo.place_observer_gain(p.sound_speed, &poles)?;
            debug!("observer gain H = {:?}", h.as_slice());
            let gains = observer_gains_uncertain(&sc.exo, &h, p, &set.p11, &set.p21)?.with_feedback(k);
            let x0 = match sc.observer_init {
                ObserverInit::Zero => DVector::zeros(sc.exo.dim()),
                ObserverInit::Truth => sc.exo.x0().clone(),
            };
            (Observer::uncertain(p, n, dt, gains, &sc.exo, &h)?, Some(x0))
        }
        Controller::Off => unreachable!(),
    };
    let state = match sc.observer_init {
        ObserverInit::Zero => ObserverState { xhat: xhat0, ..ObserverState::zeros(n, None) },
        ObserverInit::Truth => {
            let (vhat, what) = plant.canonical(p);
            ObserverState { vhat, what, xhat: xhat0 }
        }
    };
    Ok(Some(Estimator { observer, law, state }))
}

/// Runs a scenario to its horizon.
pub fn run_closed_loop(sc: &Scenario) -> Result<RunOutput> {
    sc.validate()?;
    let p = &sc.params;
    let n = sc.grid;
    let steps = sc.steps();
    let dt = sc.time_step();
    let mut warnings = sc.warnings()?;
    for w in &warnings {
        warn!("{}: {w}", sc.name);
    }

    let mut plant = Plant::new(sc, dt)?;
    let mut est = build_estimator(sc, dt, &plant)?;
    let flow = sc.exo.flow(dt)?;
    let saturate = sc.plant == PlantKind::Nonlinear;
    let limit = SATURATION_FRACTION * p.u_star;

    let mut x = sc.exo.x0().clone();
    let mut d_u = 0.0;
    let mut s = sc.exo.output(&x)?;
    let mut eps = sc.uncertainty.epsilon(s, 0.0);
    let mut y = plant.canonical(p).0[n];
    let mut saturated_steps = 0;
    let mut rows = Vec::with_capacity(steps / sc.log_stride + 2);

    let log_row = |t: f64, plant: &Plant, est: &Option<Estimator>, x: &DVector<f64>, d_u, s, eps| {
        let [(rho_in, phi_in), (rho_mid, phi_mid), (rho_out, phi_out)] = plant.probes(p, n)?;
        let (err_v, err_w, err_x) = match est {
            Some(e) => {
                let (v, w) = plant.canonical(p);
                let ex = e.state.xhat.as_ref().map_or(0.0, |xh| (xh - x).norm());
                (l2(&v, &e.state.vhat), l2(&w, &e.state.what), ex)
            }
            None => (0.0, 0.0, 0.0),
        };
        Ok::<_, Error>(TimeSeriesRow {
            t,
            rho_in,
            rho_mid,
            rho_out,
            phi_in,
            phi_mid,
            phi_out,
            d_u,
            s,
            eps,
            err_v,
            err_w,
            err_x,
        })
    };
    rows.push(log_row(0.0, &plant, &est, &x, d_u, s, eps)?);

    for step in 1..=steps {
        let t = step as f64 * dt;
        x = &flow * x;
        s = sc.exo.output(&x)?;
        eps = sc.uncertainty.epsilon(s, t);
        let y_next = plant.advance(p, s + eps)?;

        if let Some(e) = est.as_mut() {
            let mut next = e.observer.advance(&e.state, y, y_next)?;
            e.observer.close_outlet(&mut next, s);
            let x_used = next.xhat.clone().unwrap_or_else(|| x.clone());
            let raw = e.law.evaluate_closed(y_next, &next.vhat, &next.what, &x_used)?;
            d_u = if saturate && raw.abs() > limit {
                if saturated_steps == 0 {
                    warn!("{}: δU saturated at t = {t} s (requested {raw})", sc.name);
                }
                saturated_steps += 1;
                raw.clamp(-limit, limit)
            } else {
                raw
            };
            e.observer.close_inlet(&mut next, y_next, d_u);
            e.state = next;
        }
        if !d_u.is_finite() {
            return Err(Error::BlowUp { t, node: 0, rho: d_u });
        }
        plant.close_inlet(d_u, p.u_star)?;
        y = y_next;

        if step % sc.log_stride == 0 || step == steps {
            rows.push(log_row(t, &plant, &est, &x, d_u, s, eps)?);
        }
    }
    if saturated_steps > 0 {
        warnings.push(format!("δU saturated at ±{limit} on {saturated_steps} steps"));
    }
    Ok(RunOutput {
        series: TimeSeries { rows },
        warnings,
        dt,
        steps,
        rho_out_star: p.outlet_density(),
        saturated_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::preset;

    fn short(name: &str, plant: PlantKind) -> Scenario {
        let mut sc = preset(name).unwrap();
        sc.plant = plant;
        sc.grid = 40;
        sc.horizon = 1200.0;
        sc.log_stride = 5;
        sc
    }

    #[test]
    fn first_row_is_the_equilibrium() {
        let out = run_closed_loop(&short("paper-iv-a-closed", PlantKind::Nonlinear)).unwrap();
        let r = out.series.rows[0];
        assert_eq!(r.t, 0.0);
        assert_eq!(r.rho_in, 46.0);
        assert!((r.rho_out - out.rho_out_star).abs() < 1e-12);
        assert_eq!(r.d_u, 0.0);
        assert_eq!(r.s, 0.0);
    }

    #[test]
    fn last_row_is_at_the_horizon() {
        let sc = short("paper-iv-a-open", PlantKind::LinearCanonical);
        let out = run_closed_loop(&sc).unwrap();
        assert_eq!(out.series.rows.last().unwrap().t, out.steps as f64 * out.dt);
        assert!((out.steps as f64 * out.dt - sc.horizon).abs() < 1e-9);
    }

    #[test]
    fn open_loop_has_no_control_or_estimation_error() {
        let out = run_closed_loop(&short("paper-iv-b-open", PlantKind::Nonlinear)).unwrap();
        assert!(out.series.rows.iter().all(|r| r.d_u == 0.0 && r.err_v == 0.0 && r.err_x == 0.0));
        let last = out.series.rows.last().unwrap();
        assert!((last.eps - 0.001 * last.s.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn linear_plant_probes_start_at_equilibrium() {
        let out = run_closed_loop(&short("paper-iv-a-closed", PlantKind::LinearCanonical)).unwrap();
        let r = out.series.rows[0];
        assert_eq!(r.phi_out, 289.0);
        assert!((r.rho_in - 46.0).abs() < 1e-12);
    }

    #[test]
    fn truth_initialised_uncertain_observer_stays_exact_without_disturbance() {
        let mut sc = short("paper-iv-a-closed", PlantKind::LinearCanonical);
        sc.controller = Controller::Uncertain;
        sc.observer_init = ObserverInit::Truth;
        let out = run_closed_loop(&sc).unwrap();
        let worst = out.series.rows.iter().map(|r| r.err_v.max(r.err_w).max(r.err_x)).fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
    }
}
