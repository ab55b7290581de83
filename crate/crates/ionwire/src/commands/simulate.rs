use std::f64::consts::PI;

use ionwire_core::circuit::{simulate_circuit, CircuitEquivalent, SolverOptions};
use ionwire_core::constants::PLANCK_HBAR;
use ionwire_core::dynamics::{
    build_n_ion_coupling, time_grid, ClassicalState, NormalModes, QuantumPropagator, QuantumState, RwaPropagator,
    TwoModeClassical, TwoModeSystem,
};
use ionwire_core::{Complex64, SystemConfig};

use crate::error::{CliError, CliResult};
use crate::manifest::{InitialState, SimMode, SimulateOptions};
use crate::table::{Cell, Table};

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn two_mode(cfg: &SystemConfig, opts: &SimulateOptions) -> CliResult<TwoModeSystem> {
    if cfg.ion_count() != 2 {
        return Err(input(format!("{:?} mode needs exactly 2 ions, the configuration has {}", opts.mode, cfg.ion_count())));
    }
    let sys = TwoModeSystem::from_config(cfg)?;
    Ok(match opts.coupling_ratio {
        Some(r) => sys.with_coupling_ratio(r),
        None => sys,
    })
}

/// Two exchange times of the (first) ion pair.
fn default_t_max(cfg: &SystemConfig, opts: &SimulateOptions) -> CliResult<f64> {
    if cfg.ion_count() == 2 {
        let sys = two_mode(cfg, opts)?;
        if !sys.is_resonant() {
            return Err(input("ions are detuned, so there is no exchange time to default to; give --tmax"));
        }
        return Ok(2.0 * sys.exchange()?.exchange_time);
    }
    if cfg.ion_count() < 2 {
        return Err(input("a single ion has no exchange time to default to; give --tmax"));
    }
    let gamma = build_n_ion_coupling(cfg)?.matrix.get(0, 1);
    Ok(2.0 * PI * cfg.mass() * cfg.modes.omega(0) / gamma)
}

/// Ion 1 prepared as requested, every other ion at rest at the origin.
fn classical_start(cfg: &SystemConfig, initial: InitialState) -> CliResult<ClassicalState> {
    let n = cfg.ion_count();
    let mut positions = vec![0.0; n];
    let mut momenta = vec![0.0; n];
    match initial {
        InitialState::Displaced(y0) => positions[0] = y0,
        InitialState::Coherent(mu) => {
            let l = (PLANCK_HBAR / (2.0 * cfg.mass() * cfg.modes.omega(0))).sqrt();
            positions[0] = 2.0 * l * mu.re;
            momenta[0] = PLANCK_HBAR / l * mu.im;
        }
        InitialState::Fock(_) | InitialState::Superposition(_) => {
            return Err(input("classical and circuit modes take --initial displaced:LENGTH or coherent:MU"));
        }
    }
    Ok(ClassicalState::new(positions, momenta)?)
}

fn quantum_start(sys: &TwoModeSystem, initial: InitialState, n_max: Option<usize>) -> CliResult<QuantumState> {
    let zero = Complex64::new(0.0, 0.0);
    let coherent = |mu: Complex64| -> CliResult<QuantumState> {
        let n_max = n_max.unwrap_or((4.0 * mu.norm_sqr()).ceil() as usize + 20);
        Ok(QuantumState::coherent(mu, zero, n_max)?)
    };
    match initial {
        InitialState::Fock(n) => Ok(QuantumState::fock(n, 0, n_max.unwrap_or(n + 4))?),
        InitialState::Superposition(n) => Ok(QuantumState::fock_superposition(n, n_max.unwrap_or(n + 4))?),
        InitialState::Coherent(mu) => coherent(mu),
        InitialState::Displaced(y0) => coherent(Complex64::new(y0 / (2.0 * sys.oscillator_length(0)), 0.0)),
    }
}

fn per_ion(n: usize, name: &str, unit: &str) -> Vec<String> {
    (1..=n).map(|i| format!("{name}_{i} [{unit}]")).collect()
}

fn classical(cfg: &SystemConfig, opts: &SimulateOptions, times: &[f64]) -> CliResult<Table> {
    let n = cfg.ion_count();
    let m = cfg.mass();
    let start = classical_start(cfg, opts.initial)?;
    let mut columns = vec!["t [s]".to_string()];
    columns.extend(per_ion(n, "y", "m"));
    columns.extend(per_ion(n, "v", "m/s"));
    columns.extend(per_ion(n, "E", "J"));
    columns.push("E_total [J]".into());
    let mut table = Table::new(columns);

    let ion_energy = |s: &ClassicalState, i: usize| {
        let (y, p, w) = (s.positions[i], s.momenta[i], cfg.modes.omega(i));
        p * p / (2.0 * m) + 0.5 * m * w * w * y * y
    };
    let mut emit = |t: f64, s: &ClassicalState, total: f64| {
        let mut row: Vec<Cell> = vec![t.into()];
        row.extend(s.positions.iter().map(|&y| Cell::from(y)));
        row.extend(s.velocities(m).into_iter().map(Cell::from));
        row.extend((0..n).map(|i| Cell::from(ion_energy(s, i))));
        row.push(total.into());
        table.push(row);
    };

    if n == 2 {
        let sys = two_mode(cfg, opts)?;
        let prop = TwoModeClassical::new(&sys)?;
        for &t in times {
            let s = prop.evolve(&start, t)?;
            emit(t, &s, sys.energy(&s));
        }
    } else {
        if opts.coupling_ratio.is_some() {
            return Err(input("--coupling-ratio applies to two-ion configurations only"));
        }
        let coupling = build_n_ion_coupling(cfg)?;
        let modes = NormalModes::new(m, cfg.modes.omegas(), &coupling.matrix)?;
        for &t in times {
            let s = modes.evolve(&start, t)?;
            emit(t, &s, modes.energy(&s));
        }
    }
    Ok(table)
}

fn quantum(cfg: &SystemConfig, opts: &SimulateOptions, times: &[f64]) -> CliResult<Table> {
    let sys = two_mode(cfg, opts)?;
    let start = quantum_start(&sys, opts.initial, opts.n_max)?;
    let states = match opts.mode {
        SimMode::Quantum => QuantumPropagator::new(&sys, start.n_max())?.propagate_many(&start, times)?,
        _ => RwaPropagator::new(&sys)?.propagate_many(&start, times)?,
    };
    let mut table = Table::new([
        "t [s]",
        "n_1",
        "n_2",
        "re_a_1",
        "im_a_1",
        "re_a_2",
        "im_a_2",
        "norm",
        "top_layer_population",
    ]);
    for (&t, s) in times.iter().zip(&states) {
        let (a1, a2) = (s.annihilation_expectation(0), s.annihilation_expectation(1));
        table.push(vec![
            t.into(),
            s.mean_occupation(0).into(),
            s.mean_occupation(1).into(),
            a1.re.into(),
            a1.im.into(),
            a2.re.into(),
            a2.im.into(),
            s.norm_sqr().into(),
            s.top_layer_population().into(),
        ]);
    }
    Ok(table)
}

fn circuit(cfg: &SystemConfig, opts: &SimulateOptions, times: &[f64]) -> CliResult<Table> {
    let n = cfg.ion_count();
    let mut circ = CircuitEquivalent::from_config(cfg)?;
    if let Some(r) = opts.coupling_ratio {
        if n != 2 {
            return Err(input("--coupling-ratio applies to two-ion configurations only"));
        }
        if r >= 1.0 {
            return Err(input(format!("circuit mode needs --coupling-ratio below 1, got {r}")));
        }
        circ = circ.with_coupling(r * cfg.mass() * cfg.modes.omega(0) * cfg.modes.omega(1));
    }
    let start = circ.state_from_ions(&classical_start(cfg, opts.initial)?)?;
    let options = SolverOptions { rtol: opts.rtol, ..SolverOptions::default() };
    let trace = simulate_circuit(&circ, &start, times, options)?;

    let mut columns = vec!["t [s]".to_string()];
    columns.extend(per_ion(n, "I", "A"));
    columns.extend(per_ion(n, "q", "C"));
    columns.push("V [V]".into());
    columns.extend(per_ion(n, "v", "m/s"));
    columns.push("E [J]".into());
    let mut table = Table::new(columns);
    for ((&t, s), &e) in trace.times.iter().zip(&trace.states).zip(&trace.energies) {
        let mut row: Vec<Cell> = vec![t.into()];
        row.extend(s.currents.iter().map(|&x| Cell::from(x)));
        row.extend(s.charges.iter().map(|&x| Cell::from(x)));
        row.push(s.node_voltage.into());
        row.extend(circ.ion_velocities(s).into_iter().map(Cell::from));
        row.push(e.into());
        table.push(row);
    }
    Ok(table)
}

pub fn simulate(cfg: &SystemConfig, opts: &SimulateOptions) -> CliResult<Table> {
    if opts.samples == 0 {
        return Err(input("--samples must be at least 1"));
    }
    let t_max = match opts.t_max {
        Some(t) => t,
        None => default_t_max(cfg, opts)?,
    };
    // A zero-length run is the initial state alone.
    let times = time_grid(t_max, if t_max == 0.0 { 1 } else { opts.samples });
    match opts.mode {
        SimMode::Classical => classical(cfg, opts, &times),
        SimMode::Quantum | SimMode::Rwa => quantum(cfg, opts, &times),
        SimMode::Circuit => circuit(cfg, opts, &times),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(mode: SimMode, initial: InitialState) -> SimulateOptions {
        SimulateOptions { mode, initial, t_max: None, samples: 21, n_max: None, coupling_ratio: Some(1e-2), rtol: 1e-10 }
    }

    fn column(table: &Table, name: &str) -> Vec<f64> {
        let k = table.columns.iter().position(|c| c == name).unwrap();
        table
            .rows
            .iter()
            .map(|r| match r[k] {
                Cell::Num(v) => v,
                _ => panic!(),
            })
            .collect()
    }

    #[test]
    fn rwa_fock_swaps_and_returns() {
        let cfg = SystemConfig::ca40_baseline();
        let table = simulate(&cfg, &opts(SimMode::Rwa, InitialState::Fock(1))).unwrap();
        let n2 = column(&table, "n_2");
        assert!(n2[0].abs() < 1e-12);
        assert!((n2[10] - 1.0).abs() < 1e-9, "{}", n2[10]);
        assert!(n2[20].abs() < 1e-9);
    }

    #[test]
    fn zero_time_gives_the_initial_state() {
        let cfg = SystemConfig::ca40_baseline();
        let mut o = opts(SimMode::Classical, InitialState::Displaced(1e-8));
        o.t_max = Some(0.0);
        let table = simulate(&cfg, &o).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(column(&table, "y_1 [m]"), vec![1e-8]);
        assert_eq!(column(&table, "v_2 [m/s]"), vec![0.0]);
    }

    #[test]
    fn circuit_velocities_follow_classical_ions() {
        let mut cfg = SystemConfig::ca40_baseline();
        cfg.environment.wire_resistance = 0.0;
        cfg.environment.leakage_resistance = f64::INFINITY;
        let classical = simulate(&cfg, &opts(SimMode::Classical, InitialState::Displaced(1e-8))).unwrap();
        let circuit = simulate(&cfg, &opts(SimMode::Circuit, InitialState::Displaced(1e-8))).unwrap();
        let scale = column(&classical, "v_1 [m/s]").iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        for name in ["v_1 [m/s]", "v_2 [m/s]"] {
            for (a, b) in column(&classical, name).iter().zip(column(&circuit, name)) {
                assert!((a - b).abs() < 1e-6 * scale, "{name}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn mode_and_state_mismatch_is_an_input_error() {
        let cfg = SystemConfig::ca40_baseline();
        let err = simulate(&cfg, &opts(SimMode::Classical, InitialState::Fock(1))).unwrap_err();
        assert!(matches!(err, CliError::Input(_)));
    }

    #[test]
    fn three_ions_classical() {
        let mut cfg = SystemConfig::ca40_baseline();
        cfg.geometry = ionwire_core::TrapGeometry::new(200e-6, 12.5e-6, 10e-3, vec![150e-6; 3]);
        cfg.modes = ionwire_core::ModeSpec::from_angular(vec![cfg.modes.omega(0); 3]);
        let mut o = opts(SimMode::Classical, InitialState::Displaced(1e-8));
        o.coupling_ratio = None;
        let table = simulate(&cfg, &o).unwrap();
        let e = column(&table, "E_total [J]");
        assert!(e.iter().all(|x| (x / e[0] - 1.0).abs() < 1e-9));
    }
}
