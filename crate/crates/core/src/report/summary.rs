//! Run summary written as `summary.json`.

use serde::{Deserialize, Serialize};

use crate::scenario::{Controller, PlantKind, Scenario};
use crate::simulate::{RunOutput, TimeSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub controller: Controller,
    pub plant: PlantKind,
    pub grid: usize,
    pub horizon: f64,
    pub dt: f64,
    pub steps: usize,
    /// `ρ★(ℓ)`
    pub rho_out_star: f64,
    /// `max |δρ(t, ℓ)|` over the logged rows.
    pub peak_outlet_deviation: f64,
    pub settle_band: f64,
    /// First logged time after which `|δρ(ℓ)| ≤ settle_band` holds to the
    /// end; `null` if the last row is outside the band.
    pub settling_time: Option<f64>,
    pub steady_from: f64,
    /// `max |δρ(t, ℓ)|` over rows with `t ≥ steady_from`.
    pub steady_residual: f64,
    pub saturated_steps: usize,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn new(sc: &Scenario, out: &RunOutput) -> Self {
        let star = out.rho_out_star;
        let band = sc.settle_band();
        let from = sc.steady_from();
        Summary {
            scenario: sc.name.clone(),
            controller: sc.controller,
            plant: sc.plant,
            grid: sc.grid,
            horizon: sc.horizon,
            dt: out.dt,
            steps: out.steps,
            rho_out_star: star,
            peak_outlet_deviation: out.series.max_outlet_deviation(star, f64::NEG_INFINITY),
            settle_band: band,
            settling_time: settling_time(&out.series, star, band),
            steady_from: from,
            steady_residual: steady_residual(&out.series, star, from),
            saturated_steps: out.saturated_steps,
            warnings: out.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialises")
    }
}

/// First logged time from which `|ρ_out − ρ★(ℓ)| ≤ band` to the end.
pub fn settling_time(series: &TimeSeries, rho_out_star: f64, band: f64) -> Option<f64> {
    let rows = &series.rows;
    match rows.iter().rposition(|r| (r.rho_out - rho_out_star).abs() > band) {
        None => rows.first().map(|r| r.t),
        Some(k) if k + 1 < rows.len() => Some(rows[k + 1].t),
        Some(_) => None,
    }
}

pub fn steady_residual(series: &TimeSeries, rho_out_star: f64, from: f64) -> f64 {
    series.max_outlet_deviation(rho_out_star, from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::TimeSeriesRow;

    fn series(devs: &[f64]) -> TimeSeries {
        TimeSeries {
            rows: devs
                .iter()
                .enumerate()
                .map(|(k, d)| TimeSeriesRow {
                    t: 10.0 * k as f64,
                    rho_in: 0.0,
                    rho_mid: 0.0,
                    rho_out: 40.0 + d,
                    phi_in: 0.0,
                    phi_mid: 0.0,
                    phi_out: 0.0,
                    d_u: 0.0,
                    s: 0.0,
                    eps: 0.0,
                    err_v: 0.0,
                    err_w: 0.0,
                    err_x: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn settling_time_cases() {
        assert_eq!(settling_time(&series(&[0.0, 0.5, 0.05, 0.01]), 40.0, 0.1), Some(20.0));
        assert_eq!(settling_time(&series(&[0.0, 0.01]), 40.0, 0.1), Some(0.0));
        assert_eq!(settling_time(&series(&[0.0, 0.5]), 40.0, 0.1), None);
        assert_eq!(settling_time(&TimeSeries::default(), 40.0, 0.1), None);
    }

    #[test]
    fn steady_residual_uses_the_window() {
        let s = series(&[3.0, -2.0, 0.25, -0.5]);
        assert_eq!(steady_residual(&s, 40.0, 15.0), 0.5);
        assert_eq!(steady_residual(&s, 40.0, 0.0), 3.0);
    }
}
