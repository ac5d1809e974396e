use serde_json::{json, Value};
use silt_core::asymptotics::{lil_summary, lil_trace, lil_trace_audited, loglog, logloglog, Quartiles, ReplicaExecutor};
use silt_core::gn::{gn_constants, solve_ground_state};

use super::eps_of;
use crate::config::RunConfig;
use crate::error::LabResult;
use crate::exec::PoolExecutor;
use crate::output::{num, opt, Report, Table};

fn quartiles_json(q: Option<Quartiles>) -> Value {
    q.map_or(Value::Null, |q| json!({"q1": q.q1, "median": q.median, "q3": q.q3}))
}

pub fn lil(config: &RunConfig, exec: &PoolExecutor) -> LabResult<Report> {
    let eps = eps_of(config)?;
    let (q, n, dt) = (config.q, config.checkpoints, config.dt);
    let seeds = super::batch(config)?;
    let traces = exec
        .map_indexed(config.replicas, |i| {
            let seed = seeds.seed(i);
            if config.audit {
                lil_trace_audited(seed, q, n, eps, dt)
            } else {
                lil_trace(seed, q, n, eps, dt)
            }
        })
        .into_iter()
        .collect::<silt_core::Result<Vec<_>>>()?;
    let gamma = gn_constants(&solve_ground_state(config.gn_tol)?)?.gamma_beta;
    let summary = lil_summary(&traces, gamma)?;
    let mut table = Table::new("lil", &["replica_index", "checkpoint_t", "beta_hat", "norm_up", "norm_down"]);
    let mut domains_ok = true;
    for (i, tr) in traces.iter().enumerate() {
        for k in 0..tr.checkpoints.len() {
            let t = tr.checkpoints[k];
            domains_ok &= tr.normalized_up[k].is_some() == loglog(t).is_some();
            domains_ok &= tr.normalized_down[k].is_some() == logloglog(t).is_some();
            table.push(vec![
                i.to_string(),
                num(t),
                num(tr.values[k]),
                opt(tr.normalized_up[k]),
                opt(tr.normalized_down[k]),
            ]);
        }
    }
    let max_gap = traces
        .iter()
        .filter_map(|t| t.max_audit_gap())
        .reduce(f64::max);
    let checkpoints = traces.first().map(|t| t.checkpoints.clone()).unwrap_or_default();
    let stdout = format!(
        "max normalized_up median {} (reference {}), max normalized_down median {} (reference {})\n",
        opt(summary.max_up.map(|q| q.median)),
        summary.reference_up,
        opt(summary.max_down.map(|q| q.median)),
        summary.reference_down,
    );
    Ok(Report {
        tables: vec![table],
        results: json!({
            "exploratory": true,
            "checkpoints": checkpoints,
            "n_replicas": summary.n_replicas,
            "max_normalized_up": quartiles_json(summary.max_up),
            "max_normalized_down": quartiles_json(summary.max_down),
            "reference_up_inverse_gamma_beta": summary.reference_up,
            "reference_down_inverse_two_pi": summary.reference_down,
            "gamma_beta": gamma,
            "max_audit_rel_gap": max_gap,
            "normalizations_on_valid_domains": domains_ok,
        }),
        stdout,
        engineering_corridors: true,
    })
}
