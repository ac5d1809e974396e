//! One function per subcommand. Each turns a validated [`RunConfig`] into a
//! [`Report`]; nothing here touches the file system.

mod audit;
mod lil;
mod oracles;
mod replicas;
mod tails;

use serde_json::{json, Value};
use silt_core::asymptotics::BatchSpec;
use silt_core::stats::{EstimatorResult, Summary};
use silt_core::MollifierScale;

use crate::config::{Command, RunConfig};
use crate::error::LabResult;
use crate::exec::PoolExecutor;
use crate::output::Report;

pub fn dispatch(config: &RunConfig, exec: &PoolExecutor) -> LabResult<Report> {
    match config.command {
        Command::Gn => oracles::gn(config),
        Command::Expect => oracles::expect(config),
        Command::Beta => replicas::beta(config, exec),
        Command::Alpha => replicas::alpha(config, exec),
        Command::Cn => replicas::cn(config, exec),
        Command::OccSup => replicas::occ_sup(config, exec),
        Command::DecompCheck => audit::decomp_check(config, exec),
        Command::IdentityCheck => audit::identity_check(config, exec),
        Command::Tails => tails::tails(config, exec),
        Command::Lil => lil::lil(config, exec),
    }
}

fn eps_of(config: &RunConfig) -> LabResult<MollifierScale> {
    Ok(MollifierScale::new(config.eps)?)
}

fn batch(config: &RunConfig) -> LabResult<BatchSpec> {
    Ok(BatchSpec::new(config.seed, config.replicas, config.dt, eps_of(config)?)?)
}

fn summary_json(s: &Summary) -> Value {
    json!({"mean": s.mean, "std_error": s.std_error, "n": s.n})
}

fn estimator_json(r: &EstimatorResult) -> Value {
    json!({
        "value": r.value,
        "std_error": r.std_error,
        "n_replicas": r.n_replicas,
        "config_fingerprint": format!("{:016x}", r.config_fingerprint),
    })
}

/// `|mean − target| / std_error`, `None` when the error is zero.
fn z(s: &Summary, target: f64) -> Option<f64> {
    (s.std_error > 0.0).then(|| s.z_score(target))
}
