//! Command-line grammar and its translation into a [`RunConfig`].
//!
//! Every flag is optional. Flags that are present become an override layer
//! on top of the config file, which sits on top of the per-command defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{parse_env_threads, Command, RunConfig, THREADS_ENV};
use crate::error::{LabError, LabResult};

#[derive(Debug, Parser)]
#[command(name = "silt", version, about = "Monte Carlo and oracle runs for planar self-intersection local time")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct Common {
    /// Partial JSON config; flags override its values.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Worker-pool size; overrides the SILT_THREADS environment variable.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Accept eps/dt below the resolution floor.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "is_false")]
    pub allow_coarse_eps: bool,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gn_tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Ground state and sharp Gagliardo–Nirenberg constants.
    Gn(GnArgs),
    /// Closed-form expectations.
    Expect(ExpectArgs),
    /// Replica batch of the centered self-intersection estimator.
    Beta(BetaArgs),
    /// Replica batch of the mutual intersection estimator.
    Alpha(AlphaArgs),
    /// Sub-path decomposition audit over random partitions.
    DecompCheck(DecompArgs),
    /// Pairwise versus occupation-density identity audit.
    IdentityCheck(IdentityArgs),
    /// Upper, lower and small-a tail curves.
    Tails(TailsArgs),
    /// Iterated-logarithm trace batches.
    Lil(LilArgs),
    /// Dyadic ball-occupation statistic batch.
    OccSup(OccArgs),
    /// Replica means of the block cross-term sums.
    Cn(CnArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GnArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExpectArgs {
    /// alpha, centering or cn.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BetaArgs {
    /// Also compare against the Brownian-rescaled batch with this factor.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AlphaArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Comma-separated mollifier scales evaluated on common paths.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_sweep: Option<Vec<f64>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecompArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_pieces: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_pieces: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IdentityArgs {
    /// Occupation-grid cell size (default √eps/4).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TailsArgs {
    /// alpha, beta-upper, beta-lower, beta or small-a.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    /// Slope window as `lo,hi`.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "pair")]
    pub fit_window: Option<Vec<f64>>,
    /// Flat list of `lo,hi` pairs.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "pairs")]
    pub level_windows: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_values: Option<Vec<f64>>,
    /// Survival band as `p_high,p_low`.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "pair")]
    pub survival_band: Option<Vec<f64>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LilArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<usize>,
    /// Skip the from-scratch recomputation at each checkpoint.
    #[arg(long)]
    #[serde(skip)]
    pub no_audit: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OccArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CnArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn pair<S: serde::Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
    match v.as_deref() {
        Some([a, b]) => (a, b).serialize(s),
        // other lengths pass through for the config parser to reject
        other => other.serialize(s),
    }
}

fn pairs<S: serde::Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
    match v.as_deref() {
        Some(flat) if flat.len() % 2 == 0 => {
            let p: Vec<(f64, f64)> = flat.chunks(2).map(|c| (c[0], c[1])).collect();
            p.serialize(s)
        }
        other => other.serialize(s),
    }
}

impl Sub {
    pub fn command(&self) -> Command {
        match self {
            Sub::Gn(_) => Command::Gn,
            Sub::Expect(_) => Command::Expect,
            Sub::Beta(_) => Command::Beta,
            Sub::Alpha(_) => Command::Alpha,
            Sub::DecompCheck(_) => Command::DecompCheck,
            Sub::IdentityCheck(_) => Command::IdentityCheck,
            Sub::Tails(_) => Command::Tails,
            Sub::Lil(_) => Command::Lil,
            Sub::OccSup(_) => Command::OccSup,
            Sub::Cn(_) => Command::Cn,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Sub::Gn(a) => &a.common,
            Sub::Expect(a) => &a.common,
            Sub::Beta(a) => &a.common,
            Sub::Alpha(a) => &a.common,
            Sub::DecompCheck(a) => &a.common,
            Sub::IdentityCheck(a) => &a.common,
            Sub::Tails(a) => &a.common,
            Sub::Lil(a) => &a.common,
            Sub::OccSup(a) => &a.common,
            Sub::Cn(a) => &a.common,
        }
    }

    /// Flags given on the command line, keyed like the config document.
    pub fn overrides(&self) -> LabResult<Map<String, Value>> {
        let v = match self {
            Sub::Gn(a) => serde_json::to_value(a),
            Sub::Expect(a) => serde_json::to_value(a),
            Sub::Beta(a) => serde_json::to_value(a),
            Sub::Alpha(a) => serde_json::to_value(a),
            Sub::DecompCheck(a) => serde_json::to_value(a),
            Sub::IdentityCheck(a) => serde_json::to_value(a),
            Sub::Tails(a) => serde_json::to_value(a),
            Sub::Lil(a) => serde_json::to_value(a),
            Sub::OccSup(a) => serde_json::to_value(a),
            Sub::Cn(a) => serde_json::to_value(a),
        }?;
        let Value::Object(mut map) = v else {
            unreachable!("argument structs serialize to objects")
        };
        if let Sub::Lil(a) = self {
            if a.no_audit {
                map.insert("audit".into(), Value::Bool(false));
            }
        }
        Ok(map)
    }
}

/// Builds the effective config: defaults, then the config file, then the
/// thread count from `env_threads` (the value of `SILT_THREADS`), then the
/// flags.
pub fn resolve(cli: &Cli, env_threads: Option<&str>) -> LabResult<RunConfig> {
    let sub = &cli.command;
    let file = match &sub.common().config {
        Some(p) => Some(RunConfig::load_file(p)?),
        None => None,
    };
    let mut layer = Map::new();
    if let Some(raw) = env_threads {
        let t = parse_env_threads(raw)?;
        layer.insert("threads".into(), Value::from(t));
    }
    layer.extend(sub.overrides()?);
    RunConfig::resolve(sub.command(), file.as_ref(), &layer)
}

/// Reads `SILT_THREADS`; an unset or non-unicode variable counts as absent.
pub fn env_threads() -> Option<String> {
    std::env::var(THREADS_ENV).ok()
}

/// Parses arguments, resolves the config and runs it.
pub fn main_with<I, T>(args: I, env_threads: Option<&str>) -> LabResult<crate::RunOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| LabError::config(e.to_string()))?;
    let config = resolve(&cli, env_threads)?;
    crate::run(&config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(args).unwrap()
    }

    #[test]
    fn flags_become_overrides() {
        let cli = parse(&["silt", "tails", "--kind", "small-a", "--seed", "9", "--fit-window", "0.5,1.5", "--a-values", "0.1,0.2"]);
        let c = resolve(&cli, None).unwrap();
        assert_eq!(c.kind.as_deref(), Some("small-a"));
        assert_eq!(c.seed, 9);
        assert_eq!(c.fit_window, (0.5, 1.5));
        assert_eq!(c.a_values, vec![0.1, 0.2]);
        assert_eq!(c.dt, RunConfig::defaults(Command::Tails).dt);
    }

    #[test]
    fn expect_kind_is_positional() {
        let c = resolve(&parse(&["silt", "expect", "alpha", "--s", "1", "--t", "0.25"]), None).unwrap();
        assert_eq!(c.kind.as_deref(), Some("alpha"));
        assert_eq!(c.t, 0.25);
    }

    #[test]
    fn threads_precedence() {
        let c = resolve(&parse(&["silt", "beta"]), Some("3")).unwrap();
        assert_eq!(c.threads, Some(3));
        let c = resolve(&parse(&["silt", "beta", "--threads", "2"]), Some("3")).unwrap();
        assert_eq!(c.threads, Some(2));
        assert!(resolve(&parse(&["silt", "beta"]), Some("x")).is_err());
    }

    #[test]
    fn level_windows_pair_up() {
        let cli = parse(&["silt", "tails", "--kind", "beta-lower", "--level-windows", "0,0.1,0.1,0.3"]);
        let c = resolve(&cli, None).unwrap();
        assert_eq!(c.level_windows, vec![(0.0, 0.1), (0.1, 0.3)]);
        let odd = parse(&["silt", "tails", "--level-windows", "0,0.1,0.2"]);
        assert_eq!(resolve(&odd, None).unwrap_err().exit_code(), 2);
        let short = parse(&["silt", "tails", "--fit-window", "1"]);
        assert_eq!(resolve(&short, None).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn no_audit_switch() {
        let c = resolve(&parse(&["silt", "lil", "--no-audit"]), None).unwrap();
        assert!(!c.audit);
        assert!(resolve(&parse(&["silt", "lil"]), None).unwrap().audit);
    }
}
