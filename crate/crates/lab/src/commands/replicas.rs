//! Replica batches of `β̂`, `α̂`, `Ĉ_n` and the occupation statistic.

use serde_json::{json, Value};
use silt_core::asymptotics::{
    alpha_replica, beta_replica, expected_occupation_at_start, geometric_thresholds, occupation_in_ball,
    occupation_sup_stat, sample_alpha, sample_beta, sample_c_n, steps_for, BatchSpec, ReplicaExecutor,
    TailCurve,
};
use silt_core::path::{generate_path, replica_seed, rescale};
use silt_core::silt::{
    beta_hat, centering_term, expected_alpha, expected_alpha_eps, expected_c_n, grid_centering,
};
use silt_core::stats::{ks_two_sample, quantile, Summary};
use silt_core::MollifierScale;

use super::{batch, estimator_json, summary_json, z};
use crate::config::RunConfig;
use crate::error::LabResult;
use crate::exec::PoolExecutor;
use crate::output::{num, Report, Table};

/// Index of the stream that seeds the independent comparison batch of the
/// scaling audit.
const SCALING_STREAM: u64 = u64::MAX;

/// Tolerated ε-bias of the `Ĉ_n` means, as a fraction of the limit.
pub const CN_BIAS_BUDGET: f64 = 0.03;

/// Radii `2^{−1}, …, 2^{−5}` of the start-point occupation check.
const START_RADII: [f64; 5] = [0.5, 0.25, 0.125, 0.0625, 0.03125];

fn value_table(name: &str, sample: &[f64]) -> Table {
    let mut t = Table::new(name, &["replica_index", "value"]);
    for (i, v) in sample.iter().enumerate() {
        t.push(vec![i.to_string(), num(*v)]);
    }
    t
}

fn line(label: &str, s: &Summary) -> String {
    format!("{label}: mean {} ± {} (n = {})\n", s.mean, s.std_error, s.n)
}

pub fn beta(config: &RunConfig, exec: &PoolExecutor) -> LabResult<Report> {
    let spec = batch(config)?;
    let horizon = config.horizon;
    let sample = sample_beta(exec, &spec, horizon)?;
    let est = spec.summarize(&sample, horizon, "beta")?;
    let s = Summary::of(&sample)?;
    let centering = centering_term(horizon, spec.eps)?;
    let grid_bias = grid_centering(steps_for(horizon, spec.dt)? as usize, spec.dt, spec.eps)? - centering;
    let mut results = json!({
        "estimate": estimator_json(&est),
        "centering": centering,
        "grid_bias": grid_bias,
        "z_vs_zero": z(&s, 0.0),
        "z_vs_grid_bias": z(&s, grid_bias),
    });
    let mut tables = vec![value_table("beta", &sample)];
    let mut stdout = line("beta_hat", &s);
    if let Some(c) = config.scale {
        let (rescaled, scaled) = scaling_samples(exec, &spec, horizon, c)?;
        let ks = ks_two_sample(&rescaled, &scaled)?;
        let mut t = Table::new("beta_scaling", &["replica_index", "rescaled", "scaled_independent"]);
        for (i, (a, b)) in rescaled.iter().zip(&scaled).enumerate() {
            t.push(vec![i.to_string(), num(*a), num(*b)]);
        }
        tables.push(t);
        results["scaling"] = json!({
            "c": c,
            "ks_statistic": ks.statistic,
            "ks_p_value": ks.p_value,
            "rescaled": summary_json(&Summary::of(&rescaled)?),
            "scaled_independent": summary_json(&Summary::of(&scaled)?),
        });
        stdout.push_str(&format!("scaling c = {c}: KS D = {}, p = {}\n", ks.statistic, ks.p_value));
    }
    Ok(Report {
        tables,
        results,
        stdout,
        engineering_corridors: false,
    })
}

/// `β̂` of Brownian-rescaled paths at the matching `c·ε`, next to `c·β̂` of
/// an independent batch at `ε`. Equal in law under the scaling relation.
fn scaling_samples(
    exec: &PoolExecutor,
    spec: &BatchSpec,
    horizon: f64,
    c: f64,
) -> LabResult<(Vec<f64>, Vec<f64>)> {
    let steps = steps_for(horizon, spec.dt)?;
    let eps_c = spec.eps.scaled(c)?;
    let rescaled = exec
        .map_indexed(spec.n_replicas, |i| -> silt_core::Result<f64> {
            let p = rescale(&generate_path(spec.seed(i), spec.dt, steps)?, c)?;
            Ok(beta_hat(&p, p.full(), eps_c)?.value)
        })
        .into_iter()
        .collect::<silt_core::Result<Vec<_>>>()?;
    let other = BatchSpec::new(
        replica_seed(spec.base_seed, SCALING_STREAM),
        spec.n_replicas,
        spec.dt,
        spec.eps,
    )?;
    let scaled = exec
        .map_indexed(other.n_replicas, |i| beta_replica(other.seed(i), other.dt, other.eps, horizon))
        .into_iter()
        .map(|v| v.map(|b| c * b))
        .collect::<silt_core::Result<Vec<_>>>()?;
    Ok((rescaled, scaled))
}

pub fn alpha(config: &RunConfig, exec: &PoolExecutor) -> LabResult<Report> {
    let spec = batch(config)?;
    let (s, t) = (config.s, config.t);
    let limit = expected_alpha(s, t, [0.0, 0.0], [0.0, 0.0])?;
    let Some(sweep) = &config.eps_sweep else {
        let sample = sample_alpha(exec, &spec, s, t)?;
        let est = spec.summarize(&sample, s.max(t), "alpha")?;
        let sum = Summary::of(&sample)?;
        let exact = expected_alpha_eps(s, t, spec.eps)?;
        return Ok(Report {
            tables: vec![value_table("alpha", &sample)],
            results: json!({
                "estimate": estimator_json(&est),
                "exact_finite_eps": exact,
                "limit": limit,
                "z_vs_exact": z(&sum, exact),
            }),
            stdout: line("alpha_hat", &sum),
            engineering_corridors: false,
        });
    };
    let scales = sweep
        .iter()
        .map(|&e| MollifierScale::new(e))
        .collect::<silt_core::Result<Vec<_>>>()?;
    steps_for(s, spec.dt)?;
    steps_for(t, spec.dt)?;
    // one pair of paths per replica, shared by every scale
    let rows = exec
        .map_indexed(spec.n_replicas, |i| {
            scales
                .iter()
                .map(|&e| alpha_replica(spec.seed(i), spec.dt, e, s, t))
                .collect::<silt_core::Result<Vec<f64>>>()
        })
        .into_iter()
        .collect::<silt_core::Result<Vec<_>>>()?;
    let mut table = Table::new("alpha_sweep", &["replica_index", "eps", "value"]);
    for (i, row) in rows.iter().enumerate() {
        for (e, v) in sweep.iter().zip(row) {
            table.push(vec![i.to_string(), num(*e), num(*v)]);
        }
    }
    let mut per_eps = Vec::new();
    let mut exact = Vec::new();
    let mut stdout = String::new();
    for (k, &e) in sweep.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        let sum = Summary::of(&col)?;
        let ex = expected_alpha_eps(s, t, scales[k])?;
        exact.push(ex);
        stdout.push_str(&line(&format!("alpha_hat eps={e}"), &sum));
        per_eps.push(json!({"eps": e, "summary": summary_json(&sum), "exact_finite_eps": ex, "z_vs_exact": z(&sum, ex)}));
    }
    // consecutive scales in the order given
    let mut pairs = Vec::new();
    let mut analytic_ok = true;
    let mut mc_ok = true;
    for k in 0..sweep.len().saturating_sub(1) {
        let diff: Vec<f64> = rows.iter().map(|r| r[k] - r[k + 1]).collect();
        let d = Summary::of(&diff)?;
        let analytic = exact[k] - exact[k + 1];
        // the larger ε gives the smaller mean
        let sign = if sweep[k] < sweep[k + 1] { 1.0 } else { -1.0 };
        let a_ok = sign * analytic > 0.0;
        let m_ok = sign * d.mean > -3.0 * d.std_error;
        analytic_ok &= a_ok;
        mc_ok &= m_ok;
        pairs.push(json!({
            "eps_pair": [sweep[k], sweep[k + 1]],
            "analytic_difference": analytic,
            "paired_difference": summary_json(&d),
            "analytic_ordered": a_ok,
            "mc_ordered_within_3se": m_ok,
        }));
    }
    Ok(Report {
        tables: vec![table],
        results: json!({
            "limit": limit,
            "per_eps": per_eps,
            "pairs": pairs,
            "analytic_monotone": analytic_ok,
            "mc_monotone": mc_ok,
        }),
        stdout,
        engineering_corridors: false,
    })
}

pub fn cn(config: &RunConfig, exec: &PoolExecutor) -> LabResult<Report> {
    let spec = batch(config)?;
    let prefixes = sample_c_n(exec, &spec, config.n)?;
    let mut table = Table::new("cn", &["replica_index", "n", "value"]);
    for (i, p) in prefixes.iter().enumerate() {
        for (k, v) in p.iter().enumerate() {
            table.push(vec![i.to_string(), (k + 1).to_string(), num(*v)]);
        }
    }
    let mut per_n = Vec::new();
    let mut stdout = String::new();
    for k in 2..=config.n {
        let col: Vec<f64> = prefixes.iter().map(|p| p[k - 1]).collect();
        let s = Summary::of(&col)?;
        let limit = expected_c_n(k, None);
        let finite = expected_c_n(k, Some(spec.eps));
        let bias = (limit - finite).abs();
        let tolerance = 3.0 * s.std_error + bias;
        let within = (s.mean - limit).abs() <= tolerance && bias <= CN_BIAS_BUDGET * limit;
        stdout.push_str(&line(&format!("c_n_hat n={k}"), &s));
        per_n.push(json!({
            "n": k,
            "summary": summary_json(&s),
            "limit": limit,
            "exact_finite_eps": finite,
            "eps_bias": bias,
            "eps_bias_fraction": bias / limit,
            "tolerance": tolerance,
            "z_vs_finite_eps": z(&s, finite),
            "within_tolerance": within,
        }));
    }
    Ok(Report {
        tables: vec![table],
        results: json!({"per_n": per_n, "bias_budget_fraction": CN_BIAS_BUDGET}),
        stdout,
        engineering_corridors: false,
    })
}

pub fn occ_sup(config: &RunConfig, exec: &PoolExecutor) -> LabResult<Report> {
    let spec = batch(config)?;
    let steps = steps_for(1.0, spec.dt)?;
    let rows = exec
        .map_indexed(spec.n_replicas, |i| -> silt_core::Result<(f64, Vec<f64>)> {
            let p = generate_path(spec.seed(i), spec.dt, steps)?;
            let at_start = START_RADII
                .iter()
                .map(|&r| occupation_in_ball(&p, p.point(0), r, 1.0))
                .collect::<silt_core::Result<Vec<_>>>()?;
            Ok((occupation_sup_stat(&p, 1.0)?, at_start))
        })
        .into_iter()
        .collect::<silt_core::Result<Vec<_>>>()?;
    let stat: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let s = Summary::of(&stat)?;
    let mut sorted = stat.clone();
    sorted.sort_by(f64::total_cmp);
    let lo = quantile(&sorted, 0.05)?;
    let hi = quantile(&sorted, 0.999)?;
    let tail = if lo > 0.0 && hi > lo {
        let curve = TailCurve::from_sample(&stat, geometric_thresholds(lo, hi, 20)?, (lo, hi))?;
        json!({"thresholds": curve.thresholds, "exceed_counts": curve.exceed_counts})
    } else {
        Value::Null
    };
    let mut start = Vec::new();
    for (k, &r) in START_RADII.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|row| row.1[k]).collect();
        let sum = Summary::of(&col)?;
        let exact = expected_occupation_at_start(r)?;
        let shape = r * r * (1.0 + (1.0 / r).ln().max(0.0));
        start.push(json!({
            "r": r,
            "summary": summary_json(&sum),
            "exact": exact,
            "z_vs_exact": z(&sum, exact),
            "ratio_to_shape": sum.mean / shape,
        }));
    }
    Ok(Report {
        tables: vec![value_table("occ_sup", &stat)],
        results: json!({
            "statistic": summary_json(&s),
            "quantiles": {"q05": lo, "median": quantile(&sorted, 0.5)?, "q999": hi},
            "tail": tail,
            "occupation_at_start": start,
        }),
        stdout: line("occupation sup", &s),
        engineering_corridors: false,
    })
}
