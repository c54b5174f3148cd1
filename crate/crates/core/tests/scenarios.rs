//! Scenario loading, batch runs and their artefacts.

use std::fs;
use std::path::Path;

use pipeflow::report::{read_timeseries, settling_time, Summary};
use pipeflow::run::{run, SUMMARY_FILE, TIMESERIES_FILE};
use pipeflow::scenario::{load_scenario, parse_scenario, preset, PlantKind, Scenario};
use pipeflow::simulate::run_closed_loop;
use pipeflow::Error;

fn corpus(kind: &str) -> Vec<(String, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(kind);
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn closed_a_preset_resolves_with_base_values() {
    let sc = Scenario::resolve("paper-iv-a-closed").unwrap();
    let p = &sc.params;
    assert_eq!((p.lambda_f, p.sound_speed, p.diameter, p.length, p.phi_l, p.u_star), (0.011, 378.0, 0.5, 25000.0, 289.0, 46.0));
    assert_eq!(sc.controller, pipeflow::scenario::Controller::KnownExo);
    let omega = sc.exo.dominant_frequency().unwrap();
    assert!((2.0 * std::f64::consts::PI / omega - 21600.0).abs() < 1e-6);
}

#[test]
fn low_inlet_density_file_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&preset("paper-iv-a-open").unwrap().to_json()).unwrap();
    v["pipeline"]["u_star"] = 10.0.into();
    let path = dir.path().join("s.json");
    fs::write(&path, v.to_string()).unwrap();
    match load_scenario(&path) {
        Err(Error::InfeasibleEquilibrium { bound, .. }) => assert!((bound - 17.93).abs() < 5e-3, "{bound}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_horizon_is_named() {
    let mut v: serde_json::Value = serde_json::from_str(&preset("paper-iv-a-open").unwrap().to_json()).unwrap();
    v.as_object_mut().unwrap().remove("horizon");
    let err = parse_scenario(&v.to_string()).unwrap_err();
    assert!(err.is_validation());
    assert!(err.to_string().contains("horizon"), "{err}");
}

#[test]
fn open_loop_outlet_oscillates_with_the_disturbance_period() {
    let out = run_closed_loop(&preset("paper-iv-a-open").unwrap()).unwrap();
    let dev = out.series.outlet_deviation(out.rho_out_star);
    let t = out.series.times();
    // peaks of δρ(ℓ) in each 6 h window are one period apart
    let peak_time = |lo: f64| {
        (0..t.len()).filter(|&k| t[k] >= lo && t[k] < lo + 21600.0).max_by(|&a, &b| dev[a].total_cmp(&dev[b])).map(|k| t[k]).unwrap()
    };
    let gap = peak_time(21600.0) - peak_time(0.0);
    assert!((gap - 21600.0).abs() < 0.01 * 21600.0, "{gap}");
}

#[test]
fn closed_a_on_linear_plant_settles_within_three_transits() {
    let sc = Scenario { plant: PlantKind::LinearCanonical, ..preset("paper-iv-a-closed").unwrap() };
    let out = run_closed_loop(&sc).unwrap();
    let summary = Summary::new(&sc, &out);
    let ts = summary.settling_time.expect("settles");
    let bound = 3.0 * sc.params.transit_time() + 12.0;
    assert!(ts <= bound, "settling time {ts} > {bound}");
}

#[test]
fn closed_b_residual_is_positive_and_within_the_band() {
    let sc = preset("paper-iv-b-closed").unwrap();
    let out = run_closed_loop(&sc).unwrap();
    let summary = Summary::new(&sc, &out);
    assert!(summary.steady_residual > 0.0);
    assert!(
        summary.steady_residual <= summary.settle_band,
        "steady residual {} exceeds the band {} (saturated steps {})",
        summary.steady_residual,
        summary.settle_band,
        summary.saturated_steps
    );
    let distorted = out.series.rows.iter().any(|r| r.eps != 0.0);
    assert!(distorted);
}

#[test]
fn linear_plant_uncertain_residual_is_bounded_and_monotone_in_epsilon() {
    let base = Scenario { plant: PlantKind::LinearCanonical, ..preset("paper-iv-b-closed").unwrap() };
    let open = run_closed_loop(&Scenario { plant: PlantKind::LinearCanonical, ..preset("paper-iv-b-open").unwrap() }).unwrap();
    let from = base.steady_from();
    let open_res = open.series.max_outlet_deviation(open.rho_out_star, from);
    let mut res = Vec::new();
    for k in [0.5, 1.0, 2.0] {
        let sc = Scenario { uncertainty: base.uncertainty.scaled(k), ..base.clone() };
        let out = run_closed_loop(&sc).unwrap();
        res.push(out.series.max_outlet_deviation(out.rho_out_star, from));
    }
    assert!(res.windows(2).all(|w| w[0] < w[1]), "{res:?}");
    assert!(res[2] <= 2.5 * res[1], "{res:?}");
    assert!(open_res >= 5.0 * res[1], "{open_res} vs {res:?}");
}

#[test]
fn run_writes_artefacts_and_summary_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let sc = Scenario { horizon: 3600.0, plant: PlantKind::LinearCanonical, ..preset("paper-iv-a-closed").unwrap() };
    let summary = run(&sc, dir.path()).unwrap();
    let series = read_timeseries(fs::File::open(dir.path().join(TIMESERIES_FILE)).unwrap()).unwrap();
    let on_disk: Summary = serde_json::from_str(&fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(on_disk, summary);
    assert_eq!(settling_time(&series, on_disk.rho_out_star, on_disk.settle_band), on_disk.settling_time);
    let peak = series.max_outlet_deviation(on_disk.rho_out_star, f64::NEG_INFINITY);
    assert_eq!(peak, on_disk.peak_outlet_deviation);
    assert_eq!(series.max_outlet_deviation(on_disk.rho_out_star, on_disk.steady_from), on_disk.steady_residual);
    for svg in ["disturbance.svg", "density.svg", "flow.svg"] {
        let text = fs::read_to_string(dir.path().join(svg)).unwrap();
        assert!(text.starts_with("<svg") && text.contains("<polyline"), "{svg}");
    }
}

#[test]
fn scenario_corpus_seeds_round_trip() {
    let mut accepted = 0;
    for (name, bytes) in corpus("scenario_json") {
        let Ok(text) = std::str::from_utf8(&bytes) else { continue };
        if let Ok(sc) = parse_scenario(text) {
            accepted += 1;
            assert_eq!(parse_scenario(&sc.to_json()).unwrap(), sc, "{name}");
        }
    }
    assert!(accepted >= 4);
}

#[test]
fn timeseries_corpus_seeds_round_trip() {
    let mut accepted = 0;
    for (name, bytes) in corpus("timeseries_csv") {
        if let Ok(series) = read_timeseries(bytes.as_slice()) {
            accepted += 1;
            let mut buf = Vec::new();
            pipeflow::report::write_timeseries(&mut buf, &series).unwrap();
            let back = read_timeseries(buf.as_slice()).unwrap();
            assert_eq!(back.len(), series.len(), "{name}");
        }
    }
    assert!(accepted >= 2);
}
