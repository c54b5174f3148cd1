//! Scenario files (JSON, schema version 1) and the built-in presets.
//!
//! ```json
//! {
//!   "version": 1,
//!   "name": "example",
//!   "pipeline": {"lambda_f": 0.011, "diameter": 0.5, "length": 25000,
//!                "sound_speed": 378, "phi_l": 289, "u_star": 46},
//!   "exosystem": {"a": [[0, 1], [-8.46e-8, 0]], "c": [1, 0], "x0": [0, 0.00803]},
//!   "uncertainty": {"kind": "cubic-of-s", "coeff": 0.001},
//!   "controller": "uncertain",
//!   "plant": "nonlinear",
//!   "grid": 200,
//!   "horizon": 43200,
//!   "log_stride": 20,
//!   "observer_init": "zero"
//! }
//! ```
//!
//! Optional keys: `h_poles` (list of `[re, im]`), `cfl`, `settle_band`,
//! `steady_from`.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exosystem::{Exosystem, SampledSeries, Uncertainty};
use crate::pipeline::PipelineParams;

pub const SCHEMA_VERSION: u32 = 1;
pub const MIN_GRID: usize = 32;
pub const DEFAULT_CFL: f64 = 0.9;
/// Fraction of `φ_L` above which `max |s|` leaves the linear regime.
pub const LINEAR_REGIME_FRACTION: f64 = 0.15;

pub const PRESETS: [&str; 4] =
    ["paper-iv-a-open", "paper-iv-a-closed", "paper-iv-b-open", "paper-iv-b-closed"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Controller {
    Off,
    KnownExo,
    Uncertain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantKind {
    Nonlinear,
    LinearCanonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObserverInit {
    Zero,
    Truth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: PipelineParams,
    pub exo: Exosystem,
    pub uncertainty: Uncertainty,
    pub controller: Controller,
    pub plant: PlantKind,
    pub grid: usize,
    pub horizon: f64,
    pub log_stride: usize,
    pub observer_init: ObserverInit,
    /// Poles of `A + HC/σ`; defaulted when absent.
    pub h_poles: Option<Vec<Complex<f64>>>,
    pub cfl: f64,
    /// Settling band on `|δρ(ℓ)|`; defaults to `0.005 ρ★(ℓ)`.
    pub settle_band: Option<f64>,
    /// Start of the steady window; defaults to `horizon / 2`.
    pub steady_from: Option<f64>,
}

impl Scenario {
    /// Resolves a preset name, or loads the file at `spec`.
    pub fn resolve(spec: &str) -> Result<Self> {
        match preset(spec) {
            Some(s) => Ok(s),
            None => load_scenario(spec),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.grid < MIN_GRID {
            return Err(Error::field("grid", format!("{} is below {MIN_GRID}", self.grid)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::field("horizon", format!("{} must be positive", self.horizon)));
        }
        if self.log_stride == 0 {
            return Err(Error::field("log_stride", "must be at least 1"));
        }
        if !(self.cfl > 0.0 && self.cfl <= crate::simulate::CFL_LIMIT) {
            return Err(Error::field(
                "cfl",
                format!("{} must lie in (0, {}]", self.cfl, crate::simulate::CFL_LIMIT),
            ));
        }
        for (name, v) in [("settle_band", self.settle_band), ("steady_from", self.steady_from)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::field(name, format!("{v} must be finite and >= 0")));
                }
            }
        }
        if let Some(poles) = &self.h_poles {
            if poles.len() != self.exo.dim() {
                return Err(Error::field(
                    "h_poles",
                    format!("{} poles for an exosystem of dimension {}", poles.len(), self.exo.dim()),
                ));
            }
            if poles.iter().any(|z| !(z.re < 0.0) || !z.im.is_finite()) {
                return Err(Error::field("h_poles", "poles must have negative real part"));
            }
        }
        if let Uncertainty::CubicOfS { coeff, bound } = &self.uncertainty {
            if !coeff.is_finite() {
                return Err(Error::field("uncertainty.coeff", "must be finite"));
            }
            if let Some(b) = bound {
                if !(b.is_finite() && *b >= 0.0) {
                    return Err(Error::field("uncertainty.bound", "must be finite and >= 0"));
                }
            }
        }
        Ok(())
    }

    /// Time step `horizon / ceil(horizon / (cfl Δx / σ))`.
    pub fn time_step(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    pub fn steps(&self) -> usize {
        let dx = self.params.length / self.grid as f64;
        let target = self.cfl * dx / self.params.sound_speed;
        (self.horizon / target).ceil().max(1.0) as usize
    }

    pub fn settle_band(&self) -> f64 {
        self.settle_band.unwrap_or(0.005 * self.params.outlet_density())
    }

    pub fn steady_from(&self) -> f64 {
        self.steady_from.unwrap_or(0.5 * self.horizon)
    }

    /// Observer poles, explicit or defaulted.
    pub fn observer_poles(&self) -> Result<Vec<Complex<f64>>> {
        match &self.h_poles {
            Some(p) => Ok(p.clone()),
            None => self.exo.default_observer_poles(1.0 / self.params.transit_time()),
        }
    }

    /// Warnings about the configuration, such as leaving the linear regime.
    pub fn warnings(&self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        let peak = self.peak_fluctuation()?;
        let limit = LINEAR_REGIME_FRACTION * self.params.phi_l;
        if peak > limit {
            out.push(format!(
                "max |s| = {peak:.4} exceeds {LINEAR_REGIME_FRACTION} φ_L = {limit:.4}; \
                 the linearisation may be inaccurate"
            ));
        }
        Ok(out)
    }

    /// `max |s(t)|` sampled on the simulation clock.
    pub fn peak_fluctuation(&self) -> Result<f64> {
        let dt = self.time_step();
        let flow = self.exo.flow(dt)?;
        let mut x = self.exo.x0().clone();
        let mut peak = self.exo.output(&x)?.abs();
        for _ in 0..self.steps() {
            x = &flow * x;
            peak = peak.max(self.exo.output(&x)?.abs());
        }
        Ok(peak)
    }

    pub fn to_json(&self) -> String {
        let raw = RawScenario::from(self);
        serde_json::to_string_pretty(&raw).expect("scenario serialises")
    }
}

/// Parses and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

/// Parses and validates scenario JSON.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        let msg = full.strip_suffix(&suffix).unwrap_or(&full).to_string();
        Error::Parse { line: e.line(), col: e.column(), msg }
    })?;
    raw.into_scenario()
}

/// Oscillator period used by the presets, 6 h.
pub const PRESET_PERIOD: f64 = 21600.0;

/// Pipeline parameters shared by every preset.
pub fn preset_params() -> PipelineParams {
    PipelineParams {
        lambda_f: 0.011,
        diameter: 0.5,
        length: 25000.0,
        sound_speed: 378.0,
        phi_l: 289.0,
        u_star: 46.0,
    }
}

/// Harmonic exosystem with period 6 h and `X(0) = (0, 0.1 φ_L / 3600)`.
pub fn preset_exosystem() -> Exosystem {
    let omega = 2.0 * PI / PRESET_PERIOD;
    Exosystem::harmonic(omega, [0.0, 0.1 * 289.0 / 3600.0]).expect("preset exosystem is valid")
}

/// Built-in scenario by name.
pub fn preset(name: &str) -> Option<Scenario> {
    let (uncertainty, controller) = match name {
        "paper-iv-a-open" => (Uncertainty::None, Controller::Off),
        "paper-iv-a-closed" => (Uncertainty::None, Controller::KnownExo),
        "paper-iv-b-open" => (Uncertainty::CubicOfS { coeff: 0.001, bound: None }, Controller::Off),
        "paper-iv-b-closed" => {
            (Uncertainty::CubicOfS { coeff: 0.001, bound: None }, Controller::Uncertain)
        }
        _ => return None,
    };
    Some(Scenario {
        name: name.to_string(),
        params: preset_params(),
        exo: preset_exosystem(),
        uncertainty,
        controller,
        plant: PlantKind::Nonlinear,
        grid: 200,
        horizon: 2.0 * PRESET_PERIOD,
        log_stride: 20,
        observer_init: ObserverInit::Zero,
        h_poles: None,
        cfl: DEFAULT_CFL,
        settle_band: None,
        steady_from: None,
    })
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPipeline {
    lambda_f: Option<f64>,
    diameter: Option<f64>,
    length: Option<f64>,
    sound_speed: Option<f64>,
    phi_l: Option<f64>,
    u_star: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExosystem {
    a: Option<Vec<Vec<f64>>>,
    c: Option<Vec<f64>>,
    x0: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawUncertainty {
    None,
    CubicOfS {
        coeff: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bound: Option<f64>,
    },
    CustomSamples {
        t: Option<Vec<f64>>,
        eps: Option<Vec<f64>>,
        bound: Option<f64>,
    },
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    pipeline: Option<RawPipeline>,
    exosystem: Option<RawExosystem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    uncertainty: Option<RawUncertainty>,
    controller: Option<Controller>,
    plant: Option<PlantKind>,
    grid: Option<usize>,
    horizon: Option<f64>,
    log_stride: Option<usize>,
    observer_init: Option<ObserverInit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h_poles: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cfl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    settle_band: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    steady_from: Option<f64>,
}

fn need<T>(v: Option<T>, field: &str) -> Result<T> {
    v.ok_or_else(|| Error::field(field, "missing"))
}

fn finite(v: f64, field: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::field(field, "must be finite"))
    }
}

impl RawScenario {
    fn into_scenario(self) -> Result<Scenario> {
        let version = need(self.version, "version")?;
        if version != SCHEMA_VERSION {
            return Err(Error::field("version", format!("unsupported version {version}")));
        }
        let rp = need(self.pipeline, "pipeline")?;
        let params = PipelineParams {
            lambda_f: need(rp.lambda_f, "pipeline.lambda_f")?,
            diameter: need(rp.diameter, "pipeline.diameter")?,
            length: need(rp.length, "pipeline.length")?,
            sound_speed: need(rp.sound_speed, "pipeline.sound_speed")?,
            phi_l: need(rp.phi_l, "pipeline.phi_l")?,
            u_star: need(rp.u_star, "pipeline.u_star")?,
        };

        let re = need(self.exosystem, "exosystem")?;
        let rows = need(re.a, "exosystem.a")?;
        let c = need(re.c, "exosystem.c")?;
        let x0 = need(re.x0, "exosystem.x0")?;
        let n = rows.len();
        if n == 0 {
            return Err(Error::field("exosystem.a", "must not be empty"));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::field("exosystem.a", "must be square"));
        }
        if c.len() != n || x0.len() != n {
            return Err(Error::field("exosystem", "c and x0 must match the size of a"));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let exo = Exosystem::new(
            DMatrix::from_row_slice(n, n, &flat),
            DVector::from_vec(c),
            DVector::from_vec(x0),
        )?;

        let uncertainty = match self.uncertainty {
            None | Some(RawUncertainty::None) => Uncertainty::None,
            Some(RawUncertainty::CubicOfS { coeff, bound }) => Uncertainty::CubicOfS {
                coeff: finite(need(coeff, "uncertainty.coeff")?, "uncertainty.coeff")?,
                bound,
            },
            Some(RawUncertainty::CustomSamples { t, eps, bound }) => {
                Uncertainty::CustomSamples(SampledSeries::new(
                    need(t, "uncertainty.t")?,
                    need(eps, "uncertainty.eps")?,
                    need(bound, "uncertainty.bound")?,
                )?)
            }
        };

        let h_poles = self.h_poles.map(|v| v.into_iter().map(|[re, im]| Complex::new(re, im)).collect());
        let scenario = Scenario {
            name: self.name.unwrap_or_else(|| "scenario".to_string()),
            params,
            exo,
            uncertainty,
            controller: need(self.controller, "controller")?,
            plant: need(self.plant, "plant")?,
            grid: need(self.grid, "grid")?,
            horizon: need(self.horizon, "horizon")?,
            log_stride: need(self.log_stride, "log_stride")?,
            observer_init: need(self.observer_init, "observer_init")?,
            h_poles,
            cfl: self.cfl.unwrap_or(DEFAULT_CFL),
            settle_band: self.settle_band,
            steady_from: self.steady_from,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

impl From<&Scenario> for RawScenario {
    fn from(s: &Scenario) -> Self {
        let a = s.exo.a();
        let p = &s.params;
        RawScenario {
            version: Some(SCHEMA_VERSION),
            name: Some(s.name.clone()),
            pipeline: Some(RawPipeline {
                lambda_f: Some(p.lambda_f),
                diameter: Some(p.diameter),
                length: Some(p.length),
                sound_speed: Some(p.sound_speed),
                phi_l: Some(p.phi_l),
                u_star: Some(p.u_star),
            }),
            exosystem: Some(RawExosystem {
                a: Some((0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()),
                c: Some(s.exo.c().iter().copied().collect()),
                x0: Some(s.exo.x0().iter().copied().collect()),
            }),
            uncertainty: Some(match &s.uncertainty {
                Uncertainty::None => RawUncertainty::None,
                Uncertainty::CubicOfS { coeff, bound } => {
                    RawUncertainty::CubicOfS { coeff: Some(*coeff), bound: *bound }
                }
                Uncertainty::CustomSamples(series) => RawUncertainty::CustomSamples {
                    t: Some(series.times().to_vec()),
                    eps: Some(series.values().to_vec()),
                    bound: Some(series.bound()),
                },
            }),
            controller: Some(s.controller),
            plant: Some(s.plant),
            grid: Some(s.grid),
            horizon: Some(s.horizon),
            log_stride: Some(s.log_stride),
            observer_init: Some(s.observer_init),
            h_poles: s.h_poles.as_ref().map(|v| v.iter().map(|z| [z.re, z.im]).collect()),
            cfl: Some(s.cfl),
            settle_band: s.settle_band,
            steady_from: s.steady_from,
        }
    }
}
