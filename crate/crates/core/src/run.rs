//! Batch driver: resolve scenarios, run them and write their artefacts.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{feedback_gain, KernelSet};
use crate::report::{standard_charts, write_timeseries, Summary};
use crate::scenario::{PlantKind, Scenario};
use crate::simulate::run_closed_loop;

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Command-line overrides applied after a scenario is resolved.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub horizon: Option<f64>,
    pub plant: Option<PlantKind>,
}

impl Overrides {
    pub fn apply(&self, mut sc: Scenario) -> Result<Scenario> {
        if let Some(n) = self.grid {
            sc.grid = n;
        }
        if let Some(h) = self.horizon {
            sc.horizon = h;
        }
        if let Some(p) = self.plant {
            sc.plant = p;
        }
        sc.validate()?;
        Ok(sc)
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Runs one scenario and writes `timeseries.csv`, `summary.json` and the
/// three charts into `out_dir`.
pub fn run(sc: &Scenario, out_dir: &Path) -> Result<Summary> {
    create_dir(out_dir)?;
    info!("{}: N = {}, horizon = {} s", sc.name, sc.grid, sc.horizon);
    let out = run_closed_loop(sc)?;
    write_timeseries(BufWriter::new(File::create(out_dir.join(TIMESERIES_FILE))?), &out.series)?;
    let summary = Summary::new(sc, &out);
    fs::write(out_dir.join(SUMMARY_FILE), summary.to_json())?;
    for (name, svg) in standard_charts(&out.series) {
        fs::write(out_dir.join(name), svg)?;
    }
    info!(
        "{}: peak {:.4e}, steady residual {:.4e}",
        sc.name, summary.peak_outlet_deviation, summary.steady_residual
    );
    Ok(summary)
}

/// Runs several scenarios on worker threads. A single scenario writes into
/// `out_dir` directly; several get one subdirectory each, named after the
/// scenario.
pub fn run_batch(scenarios: &[Scenario], out_dir: &Path) -> Vec<(String, Result<Summary>)> {
    let dirs: Vec<PathBuf> = if scenarios.len() == 1 {
        vec![out_dir.to_path_buf()]
    } else {
        scenarios.iter().map(|s| out_dir.join(sanitize(&s.name))).collect()
    };
    let mut seen = std::collections::HashSet::new();
    let clash: Vec<bool> = dirs.iter().map(|d| !seen.insert(d.clone())).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .zip(&dirs)
            .zip(clash)
            .map(|((sc, dir), clash)| {
                scope.spawn(move || {
                    let res = if clash {
                        Err(Error::InvalidInput(format!(
                            "two scenarios share the output directory {}",
                            dir.display()
                        )))
                    } else {
                        run(sc, dir)
                    };
                    (sc.name.clone(), res)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker thread panicked")).collect()
    })
}

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if s.is_empty() || s.chars().all(|c| c == '.') {
        "scenario".into()
    } else {
        s
    }
}

#[derive(Serialize)]
struct GainsFile {
    grid: usize,
    r1: f64,
    r2: f64,
    k: Vec<f64>,
    sweeps: Vec<(String, usize)>,
}

/// Writes the eight kernels as `<name>.csv` (`xbar,xi,value`) plus
/// `gains.json` with the reflection coefficients and the feedback row `K`.
pub fn export_kernels(sc: &Scenario, out_dir: &Path) -> Result<()> {
    sc.validate()?;
    create_dir(out_dir)?;
    let p = &sc.params;
    let set = KernelSet::solve(p, sc.grid)?;
    for name in KernelSet::NAMES {
        let kernel = set.get(name).expect("known kernel name");
        let file = File::create(out_dir.join(format!("{}.csv", name.to_ascii_lowercase())))?;
        kernel.write_csv(BufWriter::new(file))?;
    }
    let (r1, r2) = p.reflection_coeffs();
    let k = feedback_gain(&sc.exo, p, &set.k21)?;
    let gains = GainsFile {
        grid: sc.grid,
        r1,
        r2,
        k: k.iter().copied().collect(),
        sweeps: set.reports.iter().map(|r| (r.family.name().to_string(), r.sweeps())).collect(),
    };
    fs::write(out_dir.join("gains.json"), serde_json::to_string_pretty(&gains).expect("serialises"))?;
    Ok(())
}
