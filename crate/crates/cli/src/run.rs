//! The three sweeps. Each returns a [`RunOutput`] whose rows follow grid
//! order, then protocol order, whatever the execution strategy.

use distil::pumping::{plus_plus, pump_setup, ExplicitPump};
use distil::scheduling::YieldCell;
use distil::{apply_pump, jamiolkowski_fidelity, yield_sweep, BasePair, Error, Protocol};

use crate::config::{GridPoint, Mode, SweepConfig};
use crate::format::{fmt_g, Table};

/// Pump rounds up to which the explicit oracle column is filled.
pub const ORACLE_MAX_N: usize = 4;

pub const ONE_ROUND_HEADER: [&str; 7] = ["param", "protocol", "F_prime", "P_filter", "P_distil", "P_all", "error"];
pub const YIELD_HEADER: [&str; 6] = ["param", "protocol", "rounds", "yield", "final_fidelity", "error"];
pub const PUMP_HEADER: [&str; 5] = ["n", "fidelity_closed_form", "fidelity_oracle", "success_prob", "error"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub table: Table,
    /// Rows whose error is an internal breakdown rather than a property of
    /// the input.
    pub numerical_failures: usize,
}

fn is_breakdown(e: &Error) -> bool {
    matches!(e, Error::NumericalBreakdown(_))
}

fn param_cell(v: Option<f64>) -> String {
    v.map(fmt_g).unwrap_or_default()
}

pub fn run(cfg: &SweepConfig) -> crate::CliResult<RunOutput> {
    match cfg.mode {
        Mode::OneRound => run_one_round_sweep(cfg),
        Mode::Yield => run_yield_sweep(cfg),
        Mode::Pump => run_pump_curve(cfg),
    }
}

pub fn run_one_round_sweep(cfg: &SweepConfig) -> crate::CliResult<RunOutput> {
    let grid = cfg.grid()?;
    let np = cfg.protocols.len();
    let cells = cfg.exec.map_range(grid.len() * np, |k| {
        let point = grid[k / np];
        let protocol = cfg.protocols[k % np];
        (point, protocol, point.pair.state().and_then(|rho| protocol.round(&rho)))
    });
    let mut out = RunOutput { table: Table::new(ONE_ROUND_HEADER.to_vec()), numerical_failures: 0 };
    for (point, protocol, result) in cells {
        let mut row = vec![param_cell(point.value), protocol.name().to_string()];
        match result {
            Ok(o) => {
                row.extend([o.output_fidelity, o.filter_prob, o.distil_prob, o.overall_prob].map(fmt_g));
                row.push(String::new());
            }
            Err(e) => {
                out.numerical_failures += usize::from(is_breakdown(&e));
                row.extend(std::iter::repeat_n(String::new(), 4));
                row.push(e.to_string());
            }
        }
        out.table.rows.push(row);
    }
    Ok(out)
}

pub fn run_yield_sweep(cfg: &SweepConfig) -> crate::CliResult<RunOutput> {
    let grid = cfg.grid()?;
    let pairs: Vec<BasePair> = grid.iter().map(|p| p.pair).collect();
    let cells = yield_sweep(&pairs, &cfg.protocols, cfg.target, cfg.max_rounds, cfg.exec);
    let mut out = RunOutput { table: Table::new(YIELD_HEADER.to_vec()), numerical_failures: 0 };
    let np = cfg.protocols.len();
    for (k, YieldCell { protocol, result, .. }) in cells.into_iter().enumerate() {
        let point: GridPoint = grid[k / np];
        let mut row = vec![param_cell(point.value), protocol.name().to_string()];
        match result {
            Ok(r) if r.reached_target => {
                row.extend([r.rounds.to_string(), fmt_g(r.yield_value), fmt_g(r.final_fidelity), String::new()]);
            }
            Ok(r) => row.extend([
                r.rounds.to_string(),
                "0".into(),
                fmt_g(r.final_fidelity),
                format!("target {} not reached within {} rounds", fmt_g(cfg.target), r.rounds),
            ]),
            Err(e @ Error::TargetUnreachable { reached, rounds, .. }) => {
                row.extend([rounds.to_string(), "0".into(), fmt_g(reached), e.to_string()]);
            }
            Err(e) => {
                out.numerical_failures += usize::from(is_breakdown(&e));
                row.extend([String::new(), String::new(), String::new(), e.to_string()]);
            }
        }
        out.table.rows.push(row);
    }
    Ok(out)
}

pub fn run_pump_curve(cfg: &SweepConfig) -> crate::CliResult<RunOutput> {
    let pair = cfg.grid()?[0].pair;
    let mut out = RunOutput { table: Table::new(PUMP_HEADER.to_vec()), numerical_failures: 0 };
    let setup = pair.state().and_then(|rho| {
        let s = pump_setup(&rho, cfg.objective)?;
        let oracle = ExplicitPump::from_setup(&rho, &s)?;
        Ok((s, oracle))
    });
    let (setup, oracle) = match setup {
        Ok(v) => v,
        Err(e) => {
            for n in 1..=cfg.pump_rounds {
                out.numerical_failures += usize::from(is_breakdown(&e));
                let blank = String::new;
                out.table.rows.push(vec![n.to_string(), blank(), blank(), blank(), e.to_string()]);
            }
            return Ok(out);
        }
    };
    let start = plus_plus();
    let rows = cfg.exec.map_range(cfg.pump_rounds, |i| {
        let n = i + 1;
        let closed = jamiolkowski_fidelity(&setup.channel, n);
        let oracle_cell = if n <= ORACLE_MAX_N { fmt_g(oracle.choi_fidelity(n)) } else { String::new() };
        let prob = apply_pump(&start, &setup.channel, n).map(|(_, p)| p);
        match (closed, prob) {
            (Ok(f), Ok(p)) => (vec![n.to_string(), fmt_g(f), oracle_cell, fmt_g(p), String::new()], false),
            (Err(e), _) | (_, Err(e)) => {
                (vec![n.to_string(), String::new(), oracle_cell, String::new(), e.to_string()], is_breakdown(&e))
            }
        }
    });
    for (row, failed) in rows {
        out.numerical_failures += usize::from(failed);
        out.table.rows.push(row);
    }
    Ok(out)
}

/// Cells of the named column.
pub fn column<'a>(table: &'a Table, name: &str) -> Vec<&'a str> {
    let i = table.header.iter().position(|h| *h == name).expect("known column");
    table.rows.iter().map(|r| r[i].as_str()).collect()
}

pub fn rows_for(table: &Table, protocol: Protocol) -> impl Iterator<Item = &Vec<String>> {
    table.rows.iter().filter(move |r| r[1] == protocol.name())
}
