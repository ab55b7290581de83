use ionwire_core::circuit::{ion_equivalent_lc, quality_factor, wire_capacitance};
use ionwire_core::decoherence::{cryo_heating_time, noise_budget, CRYOGENIC_TEMPERATURE};
use ionwire_core::dynamics::exchange_time;
use ionwire_core::electrostatics::coupling_constant;
use ionwire_core::{Error, SystemConfig};

use super::Outcome;
use crate::error::{exit, CliResult};
use crate::table::{fmt_float, Cell, Format, Table};

/// One reported quantity.
pub struct Row {
    pub section: &'static str,
    pub quantity: String,
    pub value: Cell,
    pub unit: &'static str,
    pub note: String,
}

fn row(section: &'static str, quantity: impl Into<String>, value: impl Into<Cell>, unit: &'static str) -> Row {
    Row { section, quantity: quantity.into(), value: value.into(), unit, note: String::new() }
}

/// Every budget quantity in report order, plus whether any verdict blocks.
pub fn budget_rows(cfg: &SystemConfig) -> CliResult<(Vec<Row>, bool)> {
    let coupling = coupling_constant(cfg)?;
    let exchange = exchange_time(cfg)?;
    let budget = noise_budget(cfg)?;
    let n = cfg.ion_count();
    let mut rows = Vec::new();

    rows.push(row("coupling", "alpha", coupling.alpha, ""));
    for (i, b) in coupling.beta.iter().enumerate() {
        rows.push(row("coupling", format!("beta_{}", i + 1), *b, ""));
    }
    rows.push(row("coupling", "gamma", coupling.gamma, "N/m"));
    let mw2 = cfg.mass() * cfg.modes.omega(0) * cfg.modes.omega(0);
    rows.push(row("coupling", "gamma/(m*omega^2)", coupling.gamma / mw2, ""));

    rows.push(row("exchange", "t_ex", exchange.exchange_time, "s"));
    let mut theta = row("exchange", "theta", exchange.theta.principal, "rad");
    theta.note = "principal value in (-pi, pi]".into();
    rows.push(theta);
    let mut winding = row("exchange", "theta_winding", Cell::Int(exchange.theta.winding), "turns");
    winding.note = "theta = principal + 2*pi*winding".into();
    rows.push(winding);
    rows.push(row("exchange", "dtheta/dgamma", exchange.theta_sensitivity, "rad*m/N"));

    for i in 0..n {
        let (l, c) = ion_equivalent_lc(cfg, i)?;
        rows.push(row("circuit", format!("L_{}", i + 1), l, "H"));
        rows.push(row("circuit", format!("C_{}", i + 1), c, "F"));
    }
    rows.push(row("circuit", "C_wire", wire_capacitance(&cfg.geometry)?, "F"));
    match quality_factor(cfg) {
        Ok(q) => rows.push(row("circuit", "Q", q, "")),
        Err(Error::Lossless) => {
            let mut q = row("circuit", "Q", f64::INFINITY, "");
            q.note = "lossless wire".into();
            rows.push(q);
        }
        Err(e) => return Err(e.into()),
    }

    rows.push(row("noise", "temperature", budget.temperature, "K"));
    rows.push(row("noise", "R_eff", budget.effective_resistance, "ohm"));
    rows.push(row("noise", "induced_current", budget.induced_current, "A"));
    rows.push(row("noise", "dissipation_time", budget.dissipation_time, "s"));
    rows.push(row("noise", "johnson_heating_time", budget.johnson_heating_time, "s/quantum"));
    let mut cryo = row("noise", "johnson_heating_time_4K", cryo_heating_time(cfg, CRYOGENIC_TEMPERATURE)?, "s/quantum");
    cryo.note = format!("R/{} at 4 K", cfg.environment.resistivity_ratio);
    rows.push(cryo);
    rows.push(row("noise", "leakage_decay", budget.leakage_decay, "s"));
    if let Some(t) = budget.anomalous_heating_time {
        rows.push(row("noise", "anomalous_heating_time", t, "s/quantum"));
    }

    for m in &budget.mechanisms {
        let mut r = row("verdict", format!("margin_{}", m.mechanism.as_str()), m.margin, "");
        r.note = m.verdict.to_string();
        rows.push(r);
    }
    rows.push(row("verdict", "overall", budget.overall().to_string(), ""));

    let mut warnings: Vec<String> = Vec::new();
    for issue in cfg.validate().warnings.iter().chain(&coupling.validity.warnings) {
        if !warnings.contains(&issue.message) {
            warnings.push(issue.message.clone());
        }
    }
    for w in warnings {
        let mut r = row("warning", "warning", Cell::Empty, "");
        r.note = w;
        rows.push(r);
    }
    Ok((rows, budget.is_blocking()))
}

fn text_report(cfg: &SystemConfig, rows: &[Row]) -> String {
    let mut out = format!("{} ions of {}\n", cfg.ion_count(), cfg.species.name);
    let width = rows.iter().map(|r| r.quantity.chars().count()).max().unwrap_or(0);
    let mut section = "";
    for r in rows {
        if r.section != section {
            section = r.section;
            out.push_str(&format!("\n{section}\n"));
        }
        let value = match &r.value {
            Cell::Num(v) => fmt_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        };
        let mut line = if r.section == "warning" {
            format!("  {}", r.note)
        } else {
            let mut l = format!("  {:<width$}  {value:>15} {}", r.quantity, r.unit);
            if !r.note.is_empty() {
                l = format!("{}  {}", l.trim_end(), r.note);
            }
            l
        };
        line = line.trim_end().to_string();
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub(super) fn budget(cfg: &SystemConfig, format: Format) -> CliResult<Outcome> {
    let (rows, blocking) = budget_rows(cfg)?;
    let output = match format {
        Format::Text => text_report(cfg, &rows),
        _ => {
            let mut table = Table::new(["section", "quantity", "value", "unit", "note"]);
            for r in rows {
                table.push(vec![r.section.into(), r.quantity.into(), r.value, r.unit.into(), r.note.into()]);
            }
            table.render(format)
        }
    };
    Ok(Outcome { output, exit_code: if blocking { exit::BLOCKING } else { exit::SUCCESS } })
}
