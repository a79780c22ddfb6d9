//! Run configuration: flags, an optional `key = value` file, and the
//! resolved sweep grid.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use distil::noise::bell_diagonal_state;
use distil::{AmplitudeDampingParams, BasePair, Execution, Objective, PhotonLossParams, Protocol};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "distil", version, about = "Entanglement distillation sweeps as CSV")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fidelity and success probabilities after one round.
    OneRound(RunArgs),
    /// Yield of symmetric scheduling to a target fidelity.
    Yield(RunArgs),
    /// Fidelity of repeated pumping against the number of rounds.
    Pump(RunArgs),
}

impl Command {
    pub fn split(self) -> (Mode, RunArgs) {
        match self {
            Command::OneRound(a) => (Mode::OneRound, a),
            Command::Yield(a) => (Mode::Yield, a),
            Command::Pump(a) => (Mode::Pump, a),
        }
    }
}

/// Every flag is optional so the config file can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// photon-loss, amp-damp or bell-diagonal.
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Bell weights Φ⁺,Ψ⁻,Ψ⁺,Φ⁻ for bell-diagonal.
    #[arg(long)]
    pub weights: Option<String>,
    /// param:min:max:steps:lin|log
    #[arg(long)]
    pub sweep: Option<String>,
    /// Comma-separated subset of dejmps,horodecki,lomm,zinf.
    #[arg(long)]
    pub protocols: Option<String>,
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Zinf objective: max-pall or max-fidelity.
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub pump_rounds: Option<usize>,
    #[arg(long)]
    pub max_rounds: Option<usize>,
    /// Allow θ outside [0, π/4].
    #[arg(long)]
    pub wide_theta: bool,
    /// Evaluate grid cells on one thread.
    #[arg(long)]
    pub sequential: bool,
}

impl RunArgs {
    /// Fill every unset flag from `key = value` lines.
    pub fn merge_file(mut self, text: &str) -> CliResult<Self> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().replace('_', "-");
            let value = value.trim().to_string();
            let bad = |what: &str| CliError::Config(format!("config line {}: bad {what} {value:?}", lineno + 1));
            match key.as_str() {
                "noise" => fill(&mut self.noise, || Ok(value.clone()))?,
                "eps" => fill(&mut self.eps, || value.parse().map_err(|_| bad("eps")))?,
                "g" => fill(&mut self.g, || value.parse().map_err(|_| bad("g")))?,
                "gamma" => fill(&mut self.gamma, || value.parse().map_err(|_| bad("gamma")))?,
                "theta" => fill(&mut self.theta, || value.parse().map_err(|_| bad("theta")))?,
                "weights" => fill(&mut self.weights, || Ok(value.clone()))?,
                "sweep" => fill(&mut self.sweep, || Ok(value.clone()))?,
                "protocols" => fill(&mut self.protocols, || Ok(value.clone()))?,
                "target" => fill(&mut self.target, || value.parse().map_err(|_| bad("target")))?,
                "out" => fill(&mut self.out, || Ok(PathBuf::from(&value)))?,
                "objective" => fill(&mut self.objective, || Ok(value.clone()))?,
                "pump-rounds" => fill(&mut self.pump_rounds, || value.parse().map_err(|_| bad("pump-rounds")))?,
                "max-rounds" => fill(&mut self.max_rounds, || value.parse().map_err(|_| bad("max-rounds")))?,
                "wide-theta" => self.wide_theta |= value.parse::<bool>().map_err(|_| bad("wide-theta"))?,
                "sequential" => self.sequential |= value.parse::<bool>().map_err(|_| bad("sequential"))?,
                other => return Err(CliError::Config(format!("config line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        Ok(self)
    }

    /// Read `--config` if given and resolve into a [`SweepConfig`].
    pub fn resolve(self, mode: Mode) -> CliResult<SweepConfig> {
        let args = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                self.clone().merge_file(&text)?
            }
            None => self,
        };
        SweepConfig::from_args(mode, args)
    }
}

fn fill<T>(slot: &mut Option<T>, value: impl FnOnce() -> CliResult<T>) -> CliResult<()> {
    if slot.is_none() {
        *slot = Some(value()?);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    OneRound,
    Yield,
    Pump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseFamily {
    PhotonLoss,
    AmpDamp,
    BellDiagonal,
}

impl FromStr for NoiseFamily {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim() {
            "photon-loss" => Ok(NoiseFamily::PhotonLoss),
            "amp-damp" => Ok(NoiseFamily::AmpDamp),
            "bell-diagonal" => Ok(NoiseFamily::BellDiagonal),
            other => Err(CliError::Config(format!("unknown noise family {other:?}"))),
        }
    }
}

/// Parameters a sweep can vary. `p` is the Werner parameter of a
/// bell-diagonal family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Eps,
    G,
    Gamma,
    Theta,
    P,
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "eps" => Ok(SweepParam::Eps),
            "g" => Ok(SweepParam::G),
            "gamma" => Ok(SweepParam::Gamma),
            "theta" => Ok(SweepParam::Theta),
            "p" => Ok(SweepParam::P),
            other => Err(CliError::Config(format!("unknown sweep parameter {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub spacing: Spacing,
}

impl FromStr for Sweep {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || CliError::Config(format!("sweep {s:?} is not param:min:max:steps:lin|log"));
        let [param, min, max, steps, spacing] = parts.as_slice() else {
            return Err(bad());
        };
        let min: f64 = min.parse().map_err(|_| bad())?;
        let max: f64 = max.parse().map_err(|_| bad())?;
        let steps: usize = steps.parse().map_err(|_| bad())?;
        let spacing = match *spacing {
            "lin" => Spacing::Lin,
            "log" => Spacing::Log,
            _ => return Err(bad()),
        };
        if steps == 0 {
            return Err(CliError::Config("sweep needs at least one step".into()));
        }
        if !(min.is_finite() && max.is_finite()) || min > max {
            return Err(CliError::Config(format!("sweep range [{min}, {max}] is empty or not finite")));
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err(CliError::Config("log sweep needs a positive minimum".into()));
        }
        Ok(Sweep { param: param.parse()?, min, max, steps, spacing })
    }
}

impl Sweep {
    /// Grid values, endpoints included.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let t = i as f64 / last;
                let v = match self.spacing {
                    Spacing::Lin => self.min + t * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                };
                if i == self.steps - 1 {
                    self.max
                } else if i == 0 {
                    self.min
                } else {
                    v
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub mode: Mode,
    pub family: NoiseFamily,
    pub eps: f64,
    pub g: f64,
    pub gamma: f64,
    pub theta: f64,
    pub weights: Option<[f64; 4]>,
    pub sweep: Option<Sweep>,
    pub protocols: Vec<Protocol>,
    pub objective: Objective,
    pub target: f64,
    pub pump_rounds: usize,
    pub max_rounds: usize,
    pub wide_theta: bool,
    pub out: Option<PathBuf>,
    pub exec: Execution,
}

/// One grid point: the swept value (if any) and its base pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub value: Option<f64>,
    pub pair: BasePair,
}

pub fn parse_objective(s: &str) -> CliResult<Objective> {
    match s.trim() {
        "max-pall" => Ok(Objective::MaxPall),
        "max-fidelity" => Ok(Objective::MaxFidelity),
        other => Err(CliError::Config(format!("unknown objective {other:?}"))),
    }
}

fn parse_weights(s: &str) -> CliResult<[f64; 4]> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Config(format!("weights {s:?} are not four numbers")))?;
    <[f64; 4]>::try_from(vals).map_err(|_| CliError::Config(format!("weights {s:?} are not four numbers")))
}

impl SweepConfig {
    pub fn from_args(mode: Mode, a: RunArgs) -> CliResult<Self> {
        let family = a.noise.as_deref().unwrap_or("photon-loss").parse()?;
        let objective = parse_objective(a.objective.as_deref().unwrap_or("max-pall"))?;
        let protocols = match &a.protocols {
            None => Protocol::ALL.to_vec(),
            Some(list) => list
                .split(',')
                .map(|p| {
                    p.parse::<Protocol>().map(|p| match p {
                        Protocol::Zinf(_) => Protocol::Zinf(objective),
                        other => other,
                    })
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Config(e.to_string()))?,
        };
        if protocols.is_empty() {
            return Err(CliError::Config("no protocols selected".into()));
        }
        let cfg = SweepConfig {
            mode,
            family,
            eps: a.eps.unwrap_or(0.4),
            g: a.g.unwrap_or(0.01),
            gamma: a.gamma.unwrap_or(0.5),
            theta: a.theta.unwrap_or(0.0),
            weights: a.weights.as_deref().map(parse_weights).transpose()?,
            sweep: a.sweep.as_deref().map(str::parse).transpose()?,
            protocols,
            objective,
            target: a.target.unwrap_or(0.99),
            pump_rounds: a.pump_rounds.unwrap_or(10),
            max_rounds: a.max_rounds.unwrap_or(distil::scheduling::DEFAULT_MAX_ROUNDS),
            wide_theta: a.wide_theta,
            out: a.out,
            exec: if a.sequential { Execution::Sequential } else { Execution::Parallel },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        if self.mode == Mode::Yield && !(self.target > 0.5 && self.target < 1.0) {
            return Err(CliError::Config(format!("target {} outside (1/2, 1)", self.target)));
        }
        if self.max_rounds == 0 {
            return Err(CliError::Config("max-rounds must be at least 1".into()));
        }
        if self.mode == Mode::Pump {
            if self.sweep.is_some() {
                return Err(CliError::Config("pump mode takes a single base pair, not a sweep".into()));
            }
            if self.pump_rounds == 0 {
                return Err(CliError::Config("pump-rounds must be at least 1".into()));
            }
        }
        if let Some(s) = &self.sweep {
            let allowed: &[SweepParam] = match self.family {
                NoiseFamily::PhotonLoss => &[SweepParam::Eps, SweepParam::G],
                NoiseFamily::AmpDamp => &[SweepParam::Gamma, SweepParam::Theta],
                NoiseFamily::BellDiagonal => &[SweepParam::P],
            };
            if !allowed.contains(&s.param) {
                return Err(CliError::Config(format!("{:?} cannot be swept for this noise family", s.param)));
            }
        }
        if self.family == NoiseFamily::BellDiagonal && self.weights.is_none() && self.sweep.is_none() {
            return Err(CliError::Config("bell-diagonal needs --weights or a p sweep".into()));
        }
        // Every grid point must lie in the parameter domain.
        self.grid().map(|_| ())
    }

    fn pair_at(&self, param: Option<SweepParam>, v: f64) -> CliResult<BasePair> {
        let pick = |p: SweepParam, fixed: f64| if param == Some(p) { v } else { fixed };
        let cfg_err = |e: distil::Error| CliError::Config(e.to_string());
        Ok(match self.family {
            NoiseFamily::PhotonLoss => BasePair::PhotonLoss(
                PhotonLossParams::new(pick(SweepParam::Eps, self.eps), pick(SweepParam::G, self.g)).map_err(cfg_err)?,
            ),
            NoiseFamily::AmpDamp => {
                let (gamma, theta) = (pick(SweepParam::Gamma, self.gamma), pick(SweepParam::Theta, self.theta));
                let p = if self.wide_theta {
                    AmplitudeDampingParams::new_unrestricted(gamma, theta)
                } else {
                    AmplitudeDampingParams::new(gamma, theta)
                };
                BasePair::AmplitudeDamping(p.map_err(cfg_err)?)
            }
            NoiseFamily::BellDiagonal => {
                let w = if param == Some(SweepParam::P) {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(CliError::Config(format!("p = {v} outside [0, 1]")));
                    }
                    let r = (1.0 - v) / 4.0;
                    [v + r, r, r, r]
                } else {
                    self.weights.expect("checked in validate")
                };
                bell_diagonal_state(w).map_err(cfg_err)?;
                BasePair::BellDiagonal(w)
            }
        })
    }

    /// Grid points in sweep order (one point without a sweep).
    pub fn grid(&self) -> CliResult<Vec<GridPoint>> {
        match &self.sweep {
            None => Ok(vec![GridPoint { value: None, pair: self.pair_at(None, 0.0)? }]),
            Some(s) => s
                .values()
                .into_iter()
                .map(|v| Ok(GridPoint { value: Some(v), pair: self.pair_at(Some(s.param), v)? }))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> RunArgs {
        RunArgs::default()
    }

    #[test]
    fn sweep_parsing() {
        let s: Sweep = "g:0.001:1:4:log".parse().unwrap();
        let v = s.values();
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], 0.001);
        assert_eq!(v[3], 1.0);
        assert!((v[1] - 0.01).abs() < 1e-15);
        assert_eq!("theta:0:0.5:1:lin".parse::<Sweep>().unwrap().values(), vec![0.0]);
        for bad in ["g:1:0:3:lin", "g:0:1:0:lin", "g:0:1:3:log", "g:0:1:3", "x:0:1:3:lin", "g:0:1:3:cubic"] {
            assert!(bad.parse::<Sweep>().is_err(), "{bad}");
        }
    }

    #[test]
    fn file_fills_but_flags_win() {
        let a = RunArgs { eps: Some(0.3), ..args() };
        let merged = a.merge_file("eps = 0.1\n# comment\ng = 0.5\nprotocols = zinf, lomm\n").unwrap();
        assert_eq!(merged.eps, Some(0.3));
        assert_eq!(merged.g, Some(0.5));
        assert_eq!(merged.protocols.as_deref(), Some("zinf, lomm"));
        assert!(args().merge_file("bogus = 1").is_err());
        assert!(args().merge_file("eps 0.1").is_err());
        assert!(args().merge_file("eps = x").is_err());
    }

    #[test]
    fn domain_checks() {
        let ok = SweepConfig::from_args(Mode::OneRound, RunArgs { sweep: Some("g:0.001:1:5:log".into()), ..args() });
        assert_eq!(ok.unwrap().grid().unwrap().len(), 5);
        let out_of_domain = RunArgs { sweep: Some("eps:0:1.5:3:lin".into()), ..args() };
        assert!(SweepConfig::from_args(Mode::OneRound, out_of_domain).is_err());
        let wrong_param = RunArgs { sweep: Some("gamma:0:1:3:lin".into()), ..args() };
        assert!(SweepConfig::from_args(Mode::OneRound, wrong_param).is_err());
        let theta = RunArgs { noise: Some("amp-damp".into()), theta: Some(1.0), ..args() };
        assert!(SweepConfig::from_args(Mode::OneRound, theta.clone()).is_err());
        assert!(SweepConfig::from_args(Mode::OneRound, RunArgs { wide_theta: true, ..theta }).is_ok());
        let bd = RunArgs { noise: Some("bell-diagonal".into()), ..args() };
        assert!(SweepConfig::from_args(Mode::OneRound, bd.clone()).is_err());
        let bd = RunArgs { weights: Some("0.7,0.1,0.1,0.1".into()), ..bd };
        assert!(SweepConfig::from_args(Mode::OneRound, bd).is_ok());
        assert!(SweepConfig::from_args(Mode::Yield, RunArgs { target: Some(1.0), ..args() }).is_err());
        let pump_sweep = RunArgs { sweep: Some("g:0.1:1:2:lin".into()), ..args() };
        assert!(SweepConfig::from_args(Mode::Pump, pump_sweep).is_err());
    }

    #[test]
    fn protocol_list_follows_objective() {
        let a = RunArgs { protocols: Some("zinf,dejmps".into()), objective: Some("max-fidelity".into()), ..args() };
        let cfg = SweepConfig::from_args(Mode::OneRound, a).unwrap();
        assert_eq!(cfg.protocols, vec![Protocol::Zinf(Objective::MaxFidelity), Protocol::Dejmps]);
        assert!(SweepConfig::from_args(Mode::OneRound, RunArgs { protocols: Some("bbpssw".into()), ..args() }).is_err());
    }
}
