//! Command-line flags, the JSON config file and the resolved run settings.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coupled_bec::equilibrium::SweepAxis;
use coupled_bec::lattice::DEFAULT_ENERGY_CUTOFF;
use coupled_bec::{Beta, ModelParams, Momentum};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Raised for bad or missing input; exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser, Debug)]
#[command(
    name = "coupled-bec",
    version,
    args_override_self = true,
    about = "Equilibrium, fluctuations and dynamics of two Josephson-coupled Bose gases",
    long_about = "Equilibrium, fluctuations and dynamics of two Josephson-coupled Bose gases.\n\n\
Units: hbar = k_B = 1. Energies, gamma, lambda*rho and temperatures share one unit; \
beta is its inverse, momenta and lengths follow from the mass. \
Flags override values read with --config, a flat JSON object keyed by flag name."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Chemical potential and condensate density over a rho or beta grid
    PhaseDiagram,
    /// Branch energies and occupations over |k|
    Occupations,
    /// Static fluctuations of the total and relative pairs
    Fluctuations,
    /// Time-dependent correlations of the relative pair
    Dynamics,
    /// Finite-box lattice sums against their infinite-volume values
    Converge,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::PhaseDiagram => "phase-diagram",
            Command::Occupations => "occupations",
            Command::Fluctuations => "fluctuations",
            Command::Dynamics => "dynamics",
            Command::Converge => "converge",
        }
    }
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Rho,
    Beta,
}

/// β as given on the command line or in a config file: a number or "inf".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaArg(pub Beta);

impl FromStr for BetaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.parse::<Beta>().map(BetaArg).map_err(|e| e.to_string())
    }
}

impl Serialize for BetaArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Beta::Finite(b) => s.serialize_f64(b),
            Beta::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for BetaArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Beta::finite(v)
                .map(BetaArg)
                .map_err(serde::de::Error::custom),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(Some(match Raw::deserialize(d)? {
        Raw::One(v) => vec![v],
        Raw::Many(v) => v,
    }))
}

/// Every flag, optional so that command line and config file can be merged.
/// The same struct is the config-file schema and the echoed run config.
#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Flags {
    /// Particle mass m
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,

    /// Mean-field coupling lambda (> 0)
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,

    /// Josephson coupling gamma (> 0); the branch gap is 2 gamma
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,

    /// Relative phase phi of the tunnelling term [default: 0]
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,

    /// Total density rho of both gases
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,

    /// Inverse temperature; "inf" selects the ground state
    #[arg(long, global = true, conflicts_with = "temp")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaArg>,

    /// Temperature T = 1/beta; 0 selects the ground state
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temp: Option<f64>,

    /// Momentum k: one value (along x) or kx,ky,kz
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(
        default,
        deserialize_with = "one_or_many",
        skip_serializing_if = "Option::is_none"
    )]
    pub k: Option<Vec<f64>>,

    /// Box lengths for `converge`, in units of the thermal wavelength [default: 10,20,40]
    #[arg(long = "L-seq", global = true, value_delimiter = ',')]
    #[serde(
        rename = "L-seq",
        default,
        deserialize_with = "one_or_many",
        skip_serializing_if = "Option::is_none"
    )]
    pub l_seq: Option<Vec<f64>>,

    /// Largest time of the `dynamics` grid [default: 2 pi / gamma]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,

    /// Points of the `dynamics` grid [default: 512]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_steps: Option<usize>,

    /// Swept parameter of `phase-diagram`
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Axis>,

    /// First value of the sweep
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,

    /// Last value of the sweep
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,

    /// Number of sweep points [default: 32]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,

    /// Lattice quantity for `converge`: density, c-rel, var-n-rel, var-phi-tot, var-n-tot [default: c-rel]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,

    /// Energy cutoff beta*eps of the lattice sums [default: 40]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,

    /// Largest |k| for `occupations` [default: beta*eps = 20]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,

    /// Number of |k| points for `occupations` [default: 64]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_steps: Option<usize>,

    /// Output file, written atomically; standard output if absent
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,

    /// Worker threads [default: available cores]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,

    /// JSON config file keyed by flag names
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Flags {
    /// Flag values win; β and T count as one setting.
    pub fn over(self, file: Flags) -> Flags {
        let temperature_given = self.beta.is_some() || self.temp.is_some();
        Flags {
            mass: self.mass.or(file.mass),
            lambda: self.lambda.or(file.lambda),
            gamma: self.gamma.or(file.gamma),
            phi: self.phi.or(file.phi),
            rho: self.rho.or(file.rho),
            beta: if temperature_given {
                self.beta
            } else {
                file.beta
            },
            temp: if temperature_given {
                self.temp
            } else {
                file.temp
            },
            k: self.k.or(file.k),
            l_seq: self.l_seq.or(file.l_seq),
            t_max: self.t_max.or(file.t_max),
            t_steps: self.t_steps.or(file.t_steps),
            sweep: self.sweep.or(file.sweep),
            from: self.from.or(file.from),
            to: self.to.or(file.to),
            steps: self.steps.or(file.steps),
            quantity: self.quantity.or(file.quantity),
            cutoff: self.cutoff.or(file.cutoff),
            k_max: self.k_max.or(file.k_max),
            k_steps: self.k_steps.or(file.k_steps),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            workers: self.workers.or(file.workers),
            config: self.config,
        }
    }
}

pub fn parse_config_file(text: &str) -> anyhow::Result<Flags> {
    serde_json::from_str(text).map_err(|e| usage(format!("config file: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let s = i as f64 / last;
                self.from + (self.to - self.from) * s
            })
            .collect()
    }

    pub fn core_axis(&self) -> SweepAxis {
        match self.axis {
            Axis::Rho => SweepAxis::Rho,
            Axis::Beta => SweepAxis::Beta,
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: ModelParams,
    pub k: Momentum,
    pub k_given: bool,
    pub l_seq: Vec<f64>,
    pub t_max: f64,
    pub t_steps: usize,
    pub sweep: Option<Sweep>,
    pub quantity: String,
    pub cutoff: f64,
    pub k_max: Option<f64>,
    pub k_steps: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: usize,
}

fn positive(name: &str, v: f64) -> anyhow::Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be finite and > 0, got {v}")))
    }
}

fn required(name: &str, v: Option<f64>) -> anyhow::Result<f64> {
    v.ok_or_else(|| usage(format!("missing required --{name}")))
}

impl RunConfig {
    pub fn resolve(command: Command, flags: Flags) -> anyhow::Result<RunConfig> {
        if flags.beta.is_some() && flags.temp.is_some() {
            return Err(usage("--beta and --temp are mutually exclusive"));
        }
        let sweep = match flags.sweep {
            None => {
                if flags.from.is_some() || flags.to.is_some() || flags.steps.is_some() {
                    return Err(usage("--from/--to/--steps need --sweep rho|beta"));
                }
                None
            }
            Some(axis) => {
                if command != Command::PhaseDiagram {
                    return Err(usage("--sweep applies to phase-diagram only"));
                }
                let from = required("from", flags.from)?;
                let to = required("to", flags.to)?;
                let steps = flags.steps.unwrap_or(32);
                if steps == 0 {
                    return Err(usage("--steps must be at least 1"));
                }
                if !(from.is_finite() && to.is_finite()) || (steps > 1 && from == to) {
                    return Err(usage("sweep range must be finite with --from != --to"));
                }
                Some(Sweep {
                    axis,
                    from,
                    to,
                    steps,
                })
            }
        };

        let beta = match (flags.beta, flags.temp) {
            (Some(b), _) => b.0,
            (None, Some(t)) => Beta::from_temperature(t)?,
            (None, None) => match sweep {
                Some(s) if s.axis == Axis::Beta => Beta::finite(s.from)?,
                _ => return Err(usage("missing required --beta or --temp")),
            },
        };
        let rho = match (flags.rho, sweep) {
            (Some(r), _) => r,
            (None, Some(s)) if s.axis == Axis::Rho => s.from,
            _ => return Err(usage("missing required --rho")),
        };
        let params = ModelParams::new(
            required("mass", flags.mass)?,
            required("lambda", flags.lambda)?,
            required("gamma", flags.gamma)?,
            flags.phi.unwrap_or(0.0),
            rho,
            beta,
        )?;

        let k_given = flags.k.is_some();
        let k = match flags.k.as_deref() {
            None => Momentum::along_x(1.0),
            Some([x]) => Momentum::along_x(*x),
            Some([x, y, z]) => Momentum::new(*x, *y, *z),
            Some(other) => {
                return Err(usage(format!(
                    "--k takes 1 or 3 components, got {}",
                    other.len()
                )))
            }
        };
        if k.0.iter().any(|c| !c.is_finite()) {
            return Err(usage("--k must be finite"));
        }

        let l_seq = flags.l_seq.unwrap_or_else(|| vec![10.0, 20.0, 40.0]);
        for &l in &l_seq {
            positive("L-seq", l)?;
        }
        let t_max = match flags.t_max {
            Some(t) => positive("t-max", t)?,
            None => std::f64::consts::TAU / params.gamma(),
        };
        let t_steps = flags.t_steps.unwrap_or(512);
        if t_steps < 2 {
            return Err(usage("--t-steps must be at least 2"));
        }
        let cutoff = positive("cutoff", flags.cutoff.unwrap_or(DEFAULT_ENERGY_CUTOFF))?;
        let k_max = flags.k_max.map(|v| positive("k-max", v)).transpose()?;
        let k_steps = flags.k_steps.unwrap_or(64);
        if k_steps == 0 {
            return Err(usage("--k-steps must be at least 1"));
        }
        let workers = match flags.workers {
            Some(0) => return Err(usage("--workers must be at least 1")),
            Some(w) => w,
            None => std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
        };
        Ok(RunConfig {
            command,
            params,
            k,
            k_given,
            l_seq,
            t_max,
            t_steps,
            sweep,
            quantity: flags.quantity.unwrap_or_else(|| "c-rel".into()),
            cutoff,
            k_max,
            k_steps,
            out: flags.out,
            format: flags.format.unwrap_or_default(),
            workers,
        })
    }

    /// Settings that determine the output, in config-file form. Output path
    /// and worker count are left out: neither changes the result.
    pub fn echo(&self) -> Flags {
        let p = &self.params;
        let mut f = Flags {
            mass: Some(p.mass()),
            lambda: Some(p.lambda()),
            gamma: Some(p.gamma()),
            phi: Some(p.phi()),
            rho: Some(p.rho()),
            beta: Some(BetaArg(p.beta())),
            format: Some(self.format),
            ..Flags::default()
        };
        match self.command {
            Command::PhaseDiagram => {
                if let Some(s) = self.sweep {
                    f.sweep = Some(s.axis);
                    f.from = Some(s.from);
                    f.to = Some(s.to);
                    f.steps = Some(s.steps);
                }
            }
            Command::Occupations => {
                f.k_max = self.k_max;
                f.k_steps = Some(self.k_steps);
            }
            Command::Fluctuations => f.k = Some(self.k.0.to_vec()),
            Command::Dynamics => {
                f.t_max = Some(self.t_max);
                f.t_steps = Some(self.t_steps);
            }
            Command::Converge => {
                f.l_seq = Some(self.l_seq.clone());
                f.quantity = Some(self.quantity.clone());
                f.cutoff = Some(self.cutoff);
                if self.k_given {
                    f.k = Some(self.k.0.to_vec());
                }
            }
        }
        f
    }
}
