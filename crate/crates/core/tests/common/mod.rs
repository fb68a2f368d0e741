#![allow(dead_code)]

use std::path::PathBuf;

use hetalloc::scenario::parse_scenario;
use hetalloc::{load_scenario, Scenario, StepReport};
use rand::Rng;
use serde_json::{json, Value};

pub fn table3_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/table3.scenario")
}

pub fn table3() -> Scenario {
    load_scenario(table3_path()).expect("bundled scenario loads")
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Small random scenario as JSON. With `homogeneous` every user has the same
/// modulation and identical service rates.
pub fn random_scenario_json(rng: &mut impl Rng, homogeneous: bool) -> Value {
    let n_sub = rng.gen_range(0..=2);
    let subzones: Vec<Value> = [(-250.0, 0.0), (250.0, 0.0)]
        .iter()
        .take(n_sub)
        .enumerate()
        .map(|(i, (x, y))| {
            json!({"id": i + 2, "center_x": x, "center_y": y, "radius": rng.gen_range(50.0..200.0), "network": 2})
        })
        .collect();
    let n_users = rng.gen_range(1..=5);
    let shared_rates: Vec<f64> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0.005..0.08)).collect();
    let shared_mod = (rng.gen_range(1..=7u32), rng.gen_range(1..=6u32));
    let users: Vec<Value> = (0..n_users)
        .map(|id| {
            let zone = if n_sub == 0 { 0 } else { [0, 2, 3][rng.gen_range(0..=n_sub)] };
            let rates: Vec<f64> = if homogeneous {
                shared_rates.clone()
            } else {
                (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0.005..0.08)).collect()
            };
            let services: Vec<Value> =
                rates.iter().enumerate().map(|(k, r)| json!({"id": k + 1, "rate": r})).collect();
            let (n_of, n_bit) = if homogeneous {
                shared_mod
            } else {
                (rng.gen_range(1..=7u32), rng.gen_range(1..=6u32))
            };
            json!({
                "id": id,
                "zone": zone,
                "services": services,
                "ofdm_symbols": n_of,
                "bits_per_symbol": n_bit,
                "data_size": 1000,
            })
        })
        .collect();
    let k_mobile = rng.gen_range(12..=96);
    let k_wireless = rng.gen_range(k_mobile..=128);
    json!({
        "schema_version": 1,
        "service_area": {"radius": 500},
        "subzones": subzones,
        "networks": [
            {"id": 1, "kind": "mobile", "subcarriers": k_mobile, "ofdm_symbols": 7,
             "bits_per_symbol": 2, "initial_resources": rng.gen_range(1.0..500.0)},
            {"id": 2, "kind": "wireless", "subcarriers": k_wireless, "ofdm_symbols": 7,
             "bits_per_symbol": 2, "initial_resources": rng.gen_range(1.0..500.0)}
        ],
        "mobility": {"mean_speed": rng.gen_range(0.5..3.0)},
        "users": users,
        "horizon": rng.gen_range(1..=8),
        "seed": rng.gen::<u32>(),
        "options": {
            "selection": if rng.gen_bool(0.5) { "resources" } else { "occupancy" },
            "overload": if rng.gen_bool(0.5) { "scale" } else { "block" }
        }
    })
}

pub fn random_scenario(rng: &mut impl Rng, homogeneous: bool) -> Scenario {
    parse_scenario(&random_scenario_json(rng, homogeneous).to_string()).expect("generated scenario is valid")
}

/// Worst violation of resource conservation and state monotonicity, or `None` if the run is clean.
pub fn conservation_violation(scenario: &Scenario, reports: &[StepReport]) -> Option<String> {
    let initial = scenario.initial_pools();
    let mut granted = std::collections::BTreeMap::new();
    let mut prev = 0.0;
    for r in reports {
        for rec in &r.records {
            *granted.entry((rec.zone, rec.network)).or_insert(0.0) += rec.granted;
        }
        if r.system_state < prev {
            return Some(format!("system_state fell at step {}: {} -> {}", r.step, prev, r.system_state));
        }
        prev = r.system_state;
    }
    let last = &reports.last()?.resources;
    for (pool, x0) in &initial {
        let expected = x0 - granted.get(pool).copied().unwrap_or(0.0);
        let got = last.get(pool).copied().unwrap_or(f64::NAN);
        if !((expected - got).abs() <= 1e-9) {
            return Some(format!("pool {pool:?}: final {got}, initial minus grants {expected}"));
        }
    }
    None
}
