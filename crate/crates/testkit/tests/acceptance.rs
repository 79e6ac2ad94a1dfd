//! Acceptance criteria for the bundled models, engine, parser, CLI and API.
//! Every test prints one `PASS`/`FAIL` line before asserting.

use std::io::Write;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use permadss_core::calibration::{fixed_values, min_step_x, min_step_y, sweep_axes};
use permadss_core::fis_text::parse_fis_bytes;
use permadss_core::inference::DEFAULT_RESOLUTION;
use permadss_core::permanence::{models_dir, INPUTS};
use permadss_testkit as common;
use permadss_core::{
    check_coverage, npv, parse_fis, serialize_fis, sweep, CashFlowSchedule, PermanenceInput,
    PermanenceModels, Scenario, SurfaceGrid,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;
use tower::ServiceExt;

const STEPS: usize = 21;
const MONO_TOL: f64 = 1e-6;

fn models() -> &'static PermanenceModels {
    static M: OnceLock<PermanenceModels> = OnceLock::new();
    M.get_or_init(|| PermanenceModels::load_default().unwrap())
}

/// Prints the verdict line outside the test harness' capture, then asserts.
fn verdict(criterion: &str, passed: bool, detail: String) {
    let line = format!("{} {criterion}: {detail}\n", if passed { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(passed, "{criterion}: {detail}");
}

fn grid(scenario: Scenario, fixed: &str, value: f64) -> SurfaceGrid {
    let (x, y) = sweep_axes(fixed);
    sweep(models().system(scenario), (fixed, value), x, y, STEPS).unwrap()
}

#[test]
fn worked_example_value_and_latency() {
    let input = PermanenceInput::new(20e6, 18.0, 4.0);
    let value = models().evaluate(Scenario::Stable, input).unwrap().output;
    let mut times: Vec<Duration> = (0..15)
        .map(|_| {
            let t = Instant::now();
            models().evaluate(Scenario::Stable, input).unwrap();
            t.elapsed()
        })
        .collect();
    times.sort();
    let median = times[times.len() / 2];
    let ok = (66.4..=76.4).contains(&value) && median < Duration::from_millis(10);
    verdict(
        "worked example stable(20e6, 18, 4) in [66.4, 76.4], < 10 ms",
        ok,
        format!("incentive {value:.4}, median runtime {median:?}"),
    );
}

#[test]
fn high_npv_stable_floor_and_ceiling() {
    let g = grid(Scenario::Stable, "NPV", 20e6);
    let ok = (55.0..=65.0).contains(&g.stats.min) && (80.0..=90.0).contains(&g.stats.max);
    verdict(
        "stable NPV=20e6 GEN x DIVERS: min in [55, 65], max in [80, 90]",
        ok,
        format!("min {:.4}, max {:.4}", g.stats.min, g.stats.max),
    );
}

#[test]
fn high_npv_stable_monotone_on_both_axes() {
    let g = grid(Scenario::Stable, "NPV", 20e6);
    let (dx, dy) = (min_step_x(&g), min_step_y(&g));
    verdict(
        "stable NPV=20e6 GEN x DIVERS: both axes non-decreasing within 1e-6",
        dx >= -MONO_TOL && dy >= -MONO_TOL,
        format!("smallest step along GEN {dx:.6}, along DIVERS {dy:.6}"),
    );
}

#[test]
fn mid_divers_stable_threshold_and_peak() {
    let g = grid(Scenario::Stable, "DIVERS", 2.5);
    let xs = g.x_axis.coords();
    let mut low = f64::INFINITY;
    for row in &g.values {
        for (v, x) in row.iter().zip(&xs) {
            if *x >= 2e7 {
                low = low.min(*v);
            }
        }
    }
    for gen in g.y_axis.coords() {
        let v = models().evaluate(Scenario::Stable, PermanenceInput::new(2e7, gen, 2.5)).unwrap().output;
        low = low.min(v);
    }
    let ok = low >= 50.0 && (65.0..=76.0).contains(&g.stats.max);
    verdict(
        "stable DIVERS=2.5 NPV x GEN: >= 50 for NPV >= 2e7, max in [65, 76]",
        ok,
        format!("lowest at NPV >= 2e7 {low:.4}, max {:.4}", g.stats.max),
    );
}

#[test]
fn low_npv_stable_cap_monotone_and_gain() {
    let g = grid(Scenario::Stable, "NPV", 0.0);
    let dy = min_step_y(&g);
    let last = g.values.len() - 1;
    let gain = |ix: usize| g.values[last][ix] - g.values[0][ix];
    let (g0, g30) = (gain(0), gain(STEPS - 1));
    let ok = g.stats.max <= 32.0 && dy >= -MONO_TOL && g0 >= g30 - MONO_TOL;
    verdict(
        "stable NPV=0: max <= 32, DIVERS-monotone per GEN line, gain at GEN=0 >= gain at GEN=30",
        ok,
        format!("max {:.4}, smallest DIVERS step {dy:.6}, gains {g0:.4} vs {g30:.4}", g.stats.max),
    );
}

#[test]
fn mid_npv_growth_peak_cap_and_unimodal_line() {
    let g = grid(Scenario::Growth, "NPV", 10e6);
    let ys = g.y_axis.coords();
    let low_divers = g
        .values
        .iter()
        .zip(&ys)
        .filter(|(_, d)| **d <= 1.25)
        .flat_map(|(r, _)| r.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    let line = g.row(STEPS - 1);
    let unimodal = permadss_core::surface::is_unimodal(line);
    let ok = (65.0..=76.0).contains(&g.stats.max) && low_divers < 50.0 && unimodal;
    verdict(
        "growth NPV=10e6: max in [65, 76], DIVERS <= 1.25 below 50, GEN line at DIVERS=5 unimodal",
        ok,
        format!("max {:.4}, highest at DIVERS <= 1.25 {low_divers:.4}, unimodal {unimodal}", g.stats.max),
    );
}

#[test]
fn high_npv_growth_floor_and_ceiling() {
    let g = grid(Scenario::Growth, "NPV", 20e6);
    let ok = (66.0..=76.0).contains(&g.stats.min) && g.stats.max >= 93.0;
    verdict(
        "growth NPV=20e6: min in [66, 76], max >= 93",
        ok,
        format!("min {:.4}, max {:.4}", g.stats.min, g.stats.max),
    );
}

#[test]
fn growth_dominates_on_shared_grids() {
    let mut worst = f64::INFINITY;
    for fixed in INPUTS {
        for value in fixed_values(fixed) {
            let s = grid(Scenario::Stable, fixed, value);
            let g = grid(Scenario::Growth, fixed, value);
            for (a, b) in s.values.iter().flatten().zip(g.values.iter().flatten()) {
                worst = worst.min(b - a);
            }
        }
    }
    verdict(
        "growth >= stable - 1e-6 on all 9 shared grids",
        worst >= -MONO_TOL,
        format!("smallest growth - stable {worst:.6}"),
    );
}

#[test]
fn ruspini_partitions() {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut covered = true;
    for s in Scenario::ALL {
        let fis = models().system(s);
        for var in fis.inputs().iter().chain([fis.output()]) {
            covered &= check_coverage(var, 1001).is_covered();
            for _ in 0..1000 {
                let x = rng.random_range(var.lo()..=var.hi());
                let sum: f64 = var.degrees(x).iter().sum();
                worst = worst.max((sum - 1.0).abs());
            }
        }
    }
    verdict(
        "Ruspini sum-to-1 within 1e-9 at 1000 random points per bundled variable",
        covered && worst <= 1e-9,
        format!("largest deviation {worst:.3e}"),
    );
}

#[test]
fn centroid_against_dense_oracle() {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let fis = models().system(Scenario::ALL[i % 2]);
        let x = common::random_point(&mut rng, fis);
        let got = fis.infer(&x).unwrap().output;
        let want = common::naive_mamdani(fis, &x, 100_000, false).unwrap();
        worst = worst.max((got - want).abs());
    }
    verdict(
        "engine vs 1e5-point naive oracle, 100 random inputs, |diff| <= 0.2",
        worst <= 0.2,
        format!("largest diff {worst:.5}"),
    );
}

#[test]
fn resolution_doubling_converges() {
    let mut rng = StdRng::seed_from_u64(3);
    let fine: Vec<_> = Scenario::ALL
        .iter()
        .map(|&s| models().system(s).with_resolution(2 * DEFAULT_RESOLUTION - 1).unwrap())
        .collect();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let coarse = models().system(Scenario::ALL[i % 2]);
        let x = common::random_point(&mut rng, coarse);
        let d = coarse.infer(&x).unwrap().output - fine[i % 2].infer(&x).unwrap().output;
        worst = worst.max(d.abs());
    }
    verdict(
        "resolution doubling changes the output by <= 0.2",
        worst <= 0.2,
        format!("largest change {worst:.5}"),
    );
}

#[test]
fn parser_round_trip() {
    let mut failures = Vec::new();
    for s in Scenario::ALL {
        let text = std::fs::read_to_string(models_dir().join(s.file_name())).unwrap();
        let fis = parse_fis(&text).unwrap();
        if parse_fis(&serialize_fis(&fis)).as_ref() != Ok(&fis) {
            failures.push(s.to_string());
        }
    }
    let mut rng = StdRng::seed_from_u64(4);
    for i in 0..200 {
        let fis = common::random_system(&mut rng);
        let text = serialize_fis(&fis);
        if parse_fis(&text).as_ref() != Ok(&fis) {
            failures.push(format!("random #{i}"));
        }
    }
    verdict(
        "parse(serialize(x)) == x for both bundled files and 200 random systems",
        failures.is_empty(),
        format!("{} failures {failures:?}", failures.len()),
    );
}

#[test]
fn parser_survives_random_bytes() {
    let mut rng = StdRng::seed_from_u64(5);
    let result = std::panic::catch_unwind(move || {
        for _ in 0..10_000 {
            let len = rng.random_range(0..512);
            let bytes: Vec<u8> = (0..len).map(|_| rng.random()).collect();
            let _ = parse_fis_bytes(&bytes);
        }
    });
    verdict(
        "parser never panics on 1e4 random byte inputs",
        result.is_ok(),
        "10000 inputs parsed".to_string(),
    );
}

#[test]
fn npv_examples() {
    let s = |flows: Vec<(u32, f64)>, rate| CashFlowSchedule { flows, rate };
    // exact fractions: -100 + 600/11 + 6000/121 = 500/121
    let cases = [
        (npv(&s(vec![(0, -100.0), (1, 50.0)], 0.0)).unwrap(), -50.0),
        (npv(&s(vec![(0, 42.0)], 0.37)).unwrap(), 42.0),
        (npv(&s(vec![(0, -100.0), (1, 60.0), (2, 60.0)], 0.1)).unwrap(), 500.0 / 121.0),
    ];
    let worst = cases.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    verdict(
        "npv examples exact to 1e-9",
        worst <= 1e-9,
        format!("values {:?}, largest error {worst:.2e}", cases.map(|c| c.0)),
    );
}

struct CliOutput {
    code: u8,
    stdout: Vec<u8>,
    stderr: Vec<u8>,
}

/// One in-process `permadss` invocation.
fn cli(args: &[&str]) -> CliOutput {
    let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
    let argv = std::iter::once("permadss").chain(args.iter().copied());
    let code = permadss_cli::run(argv, &mut stdout, &mut stderr);
    CliOutput { code, stdout, stderr }
}

async fn post(app: &axum::Router, uri: &str, body: String) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn get(app: &axum::Router, uri: &str) -> (StatusCode, Value) {
    let res = app.clone().oneshot(Request::get(uri).body(Body::empty()).unwrap()).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn is_api_error(status: StatusCode, v: &Value) -> bool {
    let Some(obj) = v.as_object() else { return false };
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort();
    keys == ["code", "field", "message", "status"]
        && obj["status"].as_u64() == Some(status.as_u16() as u64)
        && ["out_of_range", "bad_scenario", "bad_request", "no_rule_fired"].contains(&obj["code"].as_str().unwrap_or(""))
        && obj["message"].is_string()
        && (obj["field"].is_null() || obj["field"].is_string())
}

#[tokio::test]
async fn cli_and_service_agree() {
    let app = permadss_service::router(Arc::new(PermanenceModels::load_default().unwrap()), None);
    let mut rng = StdRng::seed_from_u64(6);
    let mut mismatches = Vec::new();
    for _ in 0..50 {
        let scenario = Scenario::ALL[rng.random_range(0..2)];
        let (n, g, d) = (
            rng.random_range(-0.5e6..=185e6),
            rng.random_range(0.0..=30.0),
            rng.random_range(0.0..=5.0),
        );
        let (ns, gs, ds) = (n.to_string(), g.to_string(), d.to_string());
        let out = cli(&["eval", "--scenario", scenario.as_str(), "--npv", &ns, "--gen", &gs, "--divers", &ds, "--json"]);
        let from_cli: Value = serde_json::from_slice(&out.stdout).unwrap();
        let plain = cli(&["eval", "--scenario", scenario.as_str(), "--npv", &ns, "--gen", &gs, "--divers", &ds]);
        let plain: f64 = String::from_utf8(plain.stdout).unwrap().trim().parse().unwrap();
        let body = serde_json::json!({"scenario": scenario, "npv": n, "gen": g, "divers": d}).to_string();
        let (status, from_api) = post(&app, "/api/v1/evaluate?trace=true", body).await;
        if status != StatusCode::OK || from_cli != from_api || from_cli["incentive"].as_f64() != Some(plain) {
            mismatches.push((scenario, n, g, d));
        }
    }

    let mut bad_shapes = Vec::new();
    let error_posts = [
        r#"{"scenario":"stable","npv":-10e6,"gen":1,"divers":1}"#,
        r#"{"scenario":"boom","npv":1,"gen":1,"divers":1}"#,
        r#"{"scenario":"stable","npv":1}"#,
        r#"not json"#,
    ];
    for body in error_posts {
        let (status, v) = post(&app, "/api/v1/evaluate", body.to_string()).await;
        if status.is_success() || !is_api_error(status, &v) {
            bad_shapes.push(body.to_string());
        }
    }
    for uri in [
        "/api/v1/surface?scenario=stable&fix=NPV:20e6&steps=1000",
        "/api/v1/surface?scenario=stable&fix=NPV:20e6&fix=GEN:5",
        "/api/v1/surface?scenario=stable&fix=NPV:999e6",
        "/api/v1/model/boom",
        "/api/v1/unknown",
    ] {
        let (status, v) = get(&app, uri).await;
        if status.is_success() || !is_api_error(status, &v) {
            bad_shapes.push(uri.to_string());
        }
    }
    let out = cli(&["eval", "--scenario", "stable", "--npv", "999e6", "--gen", "1", "--divers", "1"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let cli_error_ok = out.code == 1 && stderr.contains("NPV") && out.stdout.is_empty();

    verdict(
        "CLI eval --json equals /evaluate for 50 random inputs; error bodies match the ApiError shape",
        mismatches.is_empty() && bad_shapes.is_empty() && cli_error_ok,
        format!("{} mismatches, bad error shapes {bad_shapes:?}, CLI range error ok {cli_error_ok}", mismatches.len()),
    );
}
