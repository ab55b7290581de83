use rayon::prelude::*;

use ionwire_core::circuit::quality_factor;
use ionwire_core::decoherence::{noise_budget, Mechanism, NoiseBudget};
use ionwire_core::dynamics::exchange_time;
use ionwire_core::electrostatics::coupling_constant;
use ionwire_core::{Error, SystemConfig};

use crate::manifest::{SweepAxis, SweepParam};
use crate::table::{Cell, Table};

struct Point {
    gamma: f64,
    t_ex: f64,
    q: f64,
    budget: NoiseBudget,
}

fn evaluate(cfg: &SystemConfig) -> Result<Point, String> {
    let report = cfg.validate();
    if let Some(first) = report.errors.first() {
        return Err(first.message.clone());
    }
    let run = || -> ionwire_core::Result<Point> {
        let gamma = coupling_constant(cfg)?.gamma;
        let t_ex = exchange_time(cfg)?.exchange_time;
        let q = match quality_factor(cfg) {
            Ok(q) => q,
            Err(Error::Lossless) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        Ok(Point { gamma, t_ex, q, budget: noise_budget(cfg)? })
    };
    run().map_err(|e| e.to_string())
}

/// The configuration at one grid point. A scale factor applies to the base
/// geometry before any explicit geometric axis overrides it.
fn point_config(base: &SystemConfig, axes: &[SweepAxis], values: &[f64]) -> SystemConfig {
    let mut cfg = base.clone();
    let mut order: Vec<usize> = (0..axes.len()).collect();
    order.sort_by_key(|&k| axes[k].param != SweepParam::Scale);
    for k in order {
        axes[k].param.apply(base, &mut cfg, values[k]);
    }
    cfg
}

/// One row per grid point; the last axis varies fastest.
pub fn sweep(base: &SystemConfig, axes: &[SweepAxis]) -> Table {
    let grids: Vec<Vec<f64>> = axes.iter().map(SweepAxis::values).collect();
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for grid in &grids {
        points = points.into_iter().flat_map(|p| grid.iter().map(move |v| [p.clone(), vec![*v]].concat())).collect();
    }

    let mut mechanisms = vec![Mechanism::Dissipation, Mechanism::JohnsonHeating, Mechanism::Leakage];
    if base.environment.anomalous_heating_rate.is_some() {
        mechanisms.push(Mechanism::AnomalousHeating);
    }

    let mut columns: Vec<String> = axes.iter().map(|a| a.param.header()).collect();
    columns.extend(
        ["gamma [N/m]", "t_ex [s]", "Q", "tau_johnson [s/quantum]", "tau_diss [s]", "leakage_decay [s]"]
            .map(String::from),
    );
    columns.extend(mechanisms.iter().map(|m| format!("verdict_{}", m.as_str())));
    columns.extend(["overall".to_string(), "error".to_string()]);
    let width = columns.len();

    let rows: Vec<Vec<Cell>> = points
        .par_iter()
        .map(|values| {
            let mut row: Vec<Cell> = values.iter().map(|&v| Cell::from(v)).collect();
            match evaluate(&point_config(base, axes, values)) {
                Ok(p) => {
                    let b = &p.budget;
                    row.extend(
                        [p.gamma, p.t_ex, p.q, b.johnson_heating_time, b.dissipation_time, b.leakage_decay]
                            .map(Cell::from),
                    );
                    row.extend(mechanisms.iter().map(|&m| Cell::from(b.get(m).map(|e| e.verdict.as_str()))));
                    row.push(b.overall().as_str().into());
                    row.push(Cell::Empty);
                }
                Err(message) => {
                    row.resize(width - 1, Cell::Empty);
                    row.push(message.into());
                }
            }
            row
        })
        .collect();

    let mut table = Table::new(columns);
    for row in rows {
        table.push(row);
    }
    table
}
