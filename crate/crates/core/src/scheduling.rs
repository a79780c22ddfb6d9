//! Symmetric scheduling: one round of the chosen protocol, then DEJMPS
//! rounds until the target fidelity, with the expected base-pair cost.

use std::fmt;
use std::str::FromStr;

use crate::entanglement::concurrence;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::filtering::Objective;
use crate::noise::BasePair;
use crate::protocols::{dejmps_round, horodecki_round, lomm_round, zinf_round, ProtocolOutcome};
use crate::qstate::DensityMatrix;

pub const DEFAULT_MAX_ROUNDS: usize = 50;
/// A round gaining less fidelity than this is a plateau.
pub const PLATEAU_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Dejmps,
    Horodecki,
    Lomm,
    Zinf(Objective),
}

impl Protocol {
    pub const ALL: [Protocol; 4] =
        [Protocol::Dejmps, Protocol::Horodecki, Protocol::Lomm, Protocol::Zinf(Objective::MaxPall)];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Dejmps => "dejmps",
            Protocol::Horodecki => "horodecki",
            Protocol::Lomm => "lomm",
            Protocol::Zinf(_) => "zinf",
        }
    }

    pub fn round(self, rho: &DensityMatrix) -> Result<ProtocolOutcome> {
        match self {
            Protocol::Dejmps => dejmps_round(rho),
            Protocol::Horodecki => horodecki_round(rho),
            Protocol::Lomm => lomm_round(rho),
            Protocol::Zinf(obj) => zinf_round(rho, obj),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dejmps" => Ok(Protocol::Dejmps),
            "horodecki" => Ok(Protocol::Horodecki),
            "lomm" => Ok(Protocol::Lomm),
            "zinf" => Ok(Protocol::Zinf(Objective::MaxPall)),
            other => Err(Error::InvalidParameter(format!("unknown protocol {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub fidelity: f64,
    pub distil_prob: f64,
    pub filter_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YieldReport {
    pub rounds: usize,
    pub final_fidelity: f64,
    pub expected_base_pairs_per_output: f64,
    pub yield_value: f64,
    pub per_round_trace: Vec<RoundRecord>,
    /// False when `max_rounds` ran out first.
    pub reached_target: bool,
}

impl YieldReport {
    /// Rebuild the cost from the trace alone.
    pub fn cost_from_trace(&self) -> f64 {
        let mut cost = 1.0;
        for (k, r) in self.per_round_trace.iter().enumerate() {
            if k == 0 {
                cost /= r.filter_prob;
            }
            cost = 2.0 * cost / r.distil_prob;
        }
        cost
    }
}

pub fn symmetric_yield(rho: &DensityMatrix, protocol: Protocol, target: f64, max_rounds: usize) -> Result<YieldReport> {
    if !(target > 0.5 && target < 1.0) {
        return Err(Error::InvalidParameter(format!("target fidelity {target} outside (1/2, 1)")));
    }
    if max_rounds == 0 {
        return Err(Error::InvalidParameter("max_rounds must be at least 1".into()));
    }
    let f0 = rho.fully_entangled_fraction();
    if f0 >= target {
        return Ok(YieldReport {
            rounds: 0,
            final_fidelity: f0,
            expected_base_pairs_per_output: 1.0,
            yield_value: 1.0,
            per_round_trace: Vec::new(),
            reached_target: true,
        });
    }
    if concurrence(rho)? <= 1e-12 {
        return Err(Error::TargetUnreachable { target, reached: f0, rounds: 0 });
    }

    let first = protocol.round(rho)?;
    let mut cost = 2.0 / (first.filter_prob * first.distil_prob);
    let mut fidelity = first.output_fidelity;
    let mut state = first.output_state;
    let mut trace = vec![RoundRecord { fidelity, distil_prob: first.distil_prob, filter_prob: first.filter_prob }];
    while fidelity < target && trace.len() < max_rounds {
        let next = dejmps_round(&state)?;
        let gain = next.output_fidelity - fidelity;
        if gain < PLATEAU_TOL {
            return Err(Error::TargetUnreachable { target, reached: fidelity, rounds: trace.len() });
        }
        cost = 2.0 * cost / next.distil_prob;
        fidelity = next.output_fidelity;
        state = next.output_state;
        trace.push(RoundRecord { fidelity, distil_prob: next.distil_prob, filter_prob: 1.0 });
    }
    Ok(YieldReport {
        rounds: trace.len(),
        final_fidelity: fidelity,
        expected_base_pairs_per_output: cost,
        yield_value: 1.0 / cost,
        per_round_trace: trace,
        reached_target: fidelity >= target,
    })
}

/// One sweep cell: a grid point, a protocol and its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct YieldCell {
    pub point: BasePair,
    pub protocol: Protocol,
    pub result: Result<YieldReport>,
}

/// Every (grid point, protocol) pair, grid-major. Errors stay in their cell.
pub fn yield_sweep(
    grid: &[BasePair],
    protocols: &[Protocol],
    target: f64,
    max_rounds: usize,
    exec: Execution,
) -> Vec<YieldCell> {
    let np = protocols.len();
    exec.map_range(grid.len() * np, |k| {
        let point = grid[k / np];
        let protocol = protocols[k % np];
        let result = point.state().and_then(|rho| symmetric_yield(&rho, protocol, target, max_rounds));
        YieldCell { point, protocol, result }
    })
}
