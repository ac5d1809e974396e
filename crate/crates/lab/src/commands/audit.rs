//! Exact-identity audits over random paths.

use std::collections::BTreeSet;

use serde_json::json;
use silt_core::asymptotics::{steps_for, ReplicaExecutor};
use silt_core::estimators::identity_check as semigroup_check;
use silt_core::path::{generate_path, replica_seed};
use silt_core::silt::{beta_hat, decompose};
use silt_core::stats::Summary;
use silt_core::{Error, Interval};

use super::{batch, eps_of, summary_json};
use crate::config::RunConfig;
use crate::error::LabResult;
use crate::exec::PoolExecutor;
use crate::output::{num, Report, Table};

/// Random partition of `[0, n_steps]` into `pieces` grid intervals, drawn
/// from the hash stream of `seed`.
pub fn random_partition(seed: u64, n_steps: usize, pieces: usize) -> silt_core::Result<Vec<Interval>> {
    if pieces == 0 || pieces > n_steps {
        return Err(Error::InvalidParameter {
            name: "pieces",
            reason: format!("cannot cut {n_steps} steps into {pieces} pieces"),
        });
    }
    let mut cuts = BTreeSet::new();
    let mut k = 1u64;
    while cuts.len() < pieces - 1 {
        cuts.insert(1 + (replica_seed(seed, k) % (n_steps as u64 - 1)) as usize);
        k += 1;
    }
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(n_steps);
    bounds.windows(2).map(|w| Interval::new(w[0], w[1])).collect()
}

pub fn decomp_check(config: &RunConfig, exec: &PoolExecutor) -> LabResult<Report> {
    let spec = batch(config)?;
    let steps = steps_for(config.horizon, spec.dt)?;
    let span = (config.max_pieces - config.min_pieces + 1) as u64;
    let rows = exec
        .map_indexed(spec.n_replicas, |i| -> silt_core::Result<(usize, f64, f64)> {
            let seed = spec.seed(i);
            let path = generate_path(seed, spec.dt, steps)?;
            let pieces = config.min_pieces + (replica_seed(seed, 0) % span) as usize;
            let partition = random_partition(seed, path.n_steps(), pieces)?;
            let whole = beta_hat(&path, path.full(), spec.eps)?.value;
            let total = decompose(&path, &partition, spec.eps)?.total;
            Ok((pieces, whole, total))
        })
        .into_iter()
        .collect::<silt_core::Result<Vec<_>>>()?;
    let mut table = Table::new("decomp", &["replica_index", "n_pieces", "whole", "reconstructed", "rel_gap"]);
    let mut max_gap: f64 = 0.0;
    for (i, (pieces, whole, total)) in rows.iter().enumerate() {
        let gap = (total - whole).abs() / whole.abs().max(f64::MIN_POSITIVE);
        max_gap = max_gap.max(gap);
        table.push(vec![i.to_string(), pieces.to_string(), num(*whole), num(*total), num(gap)]);
    }
    Ok(Report {
        tables: vec![table],
        results: json!({"max_rel_gap": max_gap, "n_paths": rows.len()}),
        stdout: format!("max relative reconstruction gap: {max_gap:e}\n"),
        engineering_corridors: false,
    })
}

pub fn identity_check(config: &RunConfig, exec: &PoolExecutor) -> LabResult<Report> {
    let spec = batch(config)?;
    let eps = eps_of(config)?;
    let cell = config.cell.unwrap_or(config.eps.sqrt() / 4.0);
    let steps = steps_for(config.horizon, spec.dt)?;
    let rows = exec
        .map_indexed(spec.n_replicas, |i| {
            let path = generate_path(spec.seed(i), spec.dt, steps)?;
            semigroup_check(&path, eps, config.horizon, cell)
        })
        .into_iter()
        .collect::<silt_core::Result<Vec<_>>>()?;
    let mut table = Table::new("identity", &["replica_index", "pairwise", "half_l2", "rel_gap"]);
    let gaps: Vec<f64> = rows.iter().map(|r| r.rel_gap()).collect();
    for (i, (r, g)) in rows.iter().zip(&gaps).enumerate() {
        table.push(vec![i.to_string(), num(r.pairwise), num(r.half_l2), num(*g)]);
    }
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    Ok(Report {
        tables: vec![table],
        results: json!({
            "cell": cell,
            "max_rel_gap": max_gap,
            "rel_gap": summary_json(&Summary::of(&gaps)?),
        }),
        stdout: format!("max relative identity gap: {max_gap:e} (cell {cell})\n"),
        engineering_corridors: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_cover_the_span() {
        for seed in 0..50 {
            let p = random_partition(seed, 100, 2 + (seed as usize % 7)).unwrap();
            assert_eq!(p.len(), 2 + (seed as usize % 7));
            assert_eq!(p[0].lo, 0);
            assert_eq!(p.last().unwrap().hi, 100);
            assert!(p.windows(2).all(|w| w[0].hi == w[1].lo && w[0].lo < w[0].hi));
        }
        assert!(random_partition(1, 3, 5).is_err());
    }
}
