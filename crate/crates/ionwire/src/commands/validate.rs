use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ionwire_core::circuit::exchange_rate_circuit;
use ionwire_core::dynamics::exchange_time;
use ionwire_core::electrostatics::{coupling_constant, coupling_constant_oracle, default_oracle_step};
use ionwire_core::SystemConfig;

use super::Outcome;
use crate::error::{exit, CliResult};
use crate::table::{Cell, Format, Table};

const ORACLE_TOLERANCE: f64 = 1e-6;
const ROUTE_TOLERANCE: f64 = 1e-9;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Geometry jittered by up to ±20 % per length, kept inside the valid region.
fn perturb(base: &SystemConfig, rng: &mut ChaCha8Rng) -> SystemConfig {
    loop {
        let mut jitter = || (rng.gen_range(-0.2_f64..0.2)).exp();
        let mut cfg = base.clone();
        let g = &mut cfg.geometry;
        g.wire_height *= jitter();
        g.wire_radius *= jitter();
        g.wire_length *= jitter();
        for h in &mut g.ion_heights {
            *h *= jitter();
        }
        if cfg.validate().is_ok() {
            return cfg;
        }
    }
}

struct Check {
    name: String,
    value: Option<f64>,
    tolerance: Option<f64>,
    passed: Option<bool>,
    detail: String,
}

fn oracle_check(cfg: &SystemConfig, name: String) -> Check {
    let result = coupling_constant(cfg)
        .and_then(|c| Ok((c.gamma, coupling_constant_oracle(cfg, default_oracle_step(&cfg.geometry))?)));
    match result {
        Ok((gamma, oracle)) => {
            let err = rel(oracle.gamma, gamma);
            Check {
                name,
                value: Some(err),
                tolerance: Some(ORACLE_TOLERANCE),
                passed: Some(err < ORACLE_TOLERANCE),
                detail: oracle.accuracy_warning.unwrap_or_default(),
            }
        }
        Err(e) => Check { name, value: None, tolerance: None, passed: Some(false), detail: e.to_string() },
    }
}

fn route_check(cfg: &SystemConfig, name: String) -> Check {
    let result = exchange_time(cfg).and_then(|x| Ok((x.rate(), exchange_rate_circuit(cfg)?)));
    match result {
        Ok((direct, circuit)) => {
            let err = rel(circuit, direct);
            Check {
                name,
                value: Some(err),
                tolerance: Some(ROUTE_TOLERANCE),
                passed: Some(err < ROUTE_TOLERANCE),
                detail: String::new(),
            }
        }
        Err(e) => Check { name, value: None, tolerance: None, passed: Some(false), detail: e.to_string() },
    }
}

/// Warnings of the configuration, then relative agreement of the
/// closed-form coupling with its finite-difference oracle and of the two
/// exchange-rate routes, on the configuration and on `samples` seeded
/// perturbations of it. Any failed check exits 3.
pub fn validate(cfg: &SystemConfig, samples: usize, seed: u64, format: Format) -> CliResult<Outcome> {
    let mut checks = Vec::new();
    for w in cfg.validate().warnings {
        checks.push(Check { name: "warning".into(), value: None, tolerance: None, passed: None, detail: w.message });
    }
    let routes = cfg.ion_count() == 2 && cfg.modes.is_resonant();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let configs = std::iter::once((String::from("config"), cfg.clone()))
        .chain((1..=samples).map(|k| (format!("sample_{k}"), perturb(cfg, &mut rng))));
    for (label, c) in configs {
        checks.push(oracle_check(&c, format!("oracle/{label}")));
        if routes {
            checks.push(route_check(&c, format!("rate_routes/{label}")));
        }
    }
    if !routes {
        checks.push(Check {
            name: "rate_routes".into(),
            value: None,
            tolerance: None,
            passed: None,
            detail: "skipped: needs two resonant ions".into(),
        });
    }

    let failed = checks.iter().any(|c| c.passed == Some(false));
    let mut table = Table::new(["check", "relative_error", "tolerance", "status", "detail"]);
    for c in checks {
        let status = match c.passed {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None if c.name == "warning" => "warn",
            None => "skip",
        };
        table.push(vec![c.name.into(), Cell::from(c.value), Cell::from(c.tolerance), status.into(), c.detail.into()]);
    }
    Ok(Outcome { output: table.render(format), exit_code: if failed { exit::NUMERICAL } else { exit::SUCCESS } })
}
