use std::f64::consts::PI;
use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use silt_core::asymptotics::steps_for;
use silt_core::gn::{
    consistency_triangle, evaluate_objective, gn_constants, GroundStateSolver, PUBLISHED_GAMMA_BETA,
    PUBLISHED_WEINSTEIN_FACTOR,
};
use silt_core::silt::{centering_term, expected_alpha, expected_alpha_eps, expected_c_n, grid_centering};

use super::eps_of;
use crate::config::RunConfig;
use crate::error::LabResult;
use crate::output::{num, Report, Table};

/// Relative step of the central difference that probes stationarity of the
/// objective along the dilation family.
const DILATION_PROBE: f64 = 1e-3;

fn quantity_table(name: &str, rows: &[(String, f64)]) -> (Table, Value, String) {
    let mut table = Table::new(name, &["quantity", "value"]);
    let mut results = Map::new();
    let mut text = String::new();
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        table.push(vec![k.clone(), num(*v)]);
        results.insert(k.clone(), json!(v));
        let _ = writeln!(text, "{k:<width$}  {v}");
    }
    (table, Value::Object(results), text)
}

pub fn gn(config: &RunConfig) -> LabResult<Report> {
    let solver = GroundStateSolver::with_tol(config.gn_tol);
    let gs = solver.solve()?;
    let c = gn_constants(&gs)?;
    let tri = consistency_triangle(&gs)?;
    let fine = GroundStateSolver {
        step: solver.step / 2.0,
        ..solver
    }
    .solve()?;
    let cf = gn_constants(&fine)?;
    let lambda = gs.optimal_dilation();
    let at = |l: f64| -> LabResult<f64> { Ok(evaluate_objective(&gs.dilated_unit_profile(l)?)?.value) };
    let h = DILATION_PROBE * lambda;
    let stationarity = (at(lambda + h)? - at(lambda - h)?) / (2.0 * h);
    let rows = [
        ("u0", gs.u0),
        ("l2_sq", gs.l2_sq),
        ("grad_sq", gs.grad_sq),
        ("l4_pow4", gs.l4_pow4),
        ("a", c.a),
        ("gamma_beta", c.gamma_beta),
        ("m", c.m),
        ("a_from_published", (PI * PUBLISHED_WEINSTEIN_FACTOR).powf(-0.25)),
        ("triangle_from_l2", tri.from_l2),
        ("triangle_published", tri.published),
        ("triangle_from_objective", tri.from_objective),
        ("triangle_spread", tri.spread()),
        ("grid_delta_a", (cf.a - c.a).abs()),
        ("grid_delta_gamma_beta", (cf.gamma_beta - c.gamma_beta).abs()),
        ("objective_stationarity", stationarity),
        ("r_match", gs.r_match),
    ]
    .map(|(k, v)| (k.to_string(), v));
    let (table, results, stdout) = quantity_table("gn", &rows);
    Ok(Report {
        tables: vec![table],
        results: json!({
            "constants": results,
            "published_gamma_beta": PUBLISHED_GAMMA_BETA,
        }),
        stdout,
        engineering_corridors: false,
    })
}

pub fn expect(config: &RunConfig) -> LabResult<Report> {
    let eps = eps_of(config)?;
    let mut rows: Vec<(String, f64)> = Vec::new();
    match config.kind() {
        "alpha" => {
            let (s, t) = (config.s, config.t);
            rows.push(("alpha_limit".into(), expected_alpha(s, t, [0.0, 0.0], [config.separation, 0.0])?));
            if config.separation == 0.0 {
                rows.push(("alpha_finite_eps".into(), expected_alpha_eps(s, t, eps)?));
            }
        }
        "centering" => {
            let c = centering_term(config.horizon, eps)?;
            rows.push(("centering".into(), c));
            let steps = steps_for(config.horizon, config.dt)? as usize;
            let g = grid_centering(steps, config.dt, eps)?;
            rows.push(("grid_centering".into(), g));
            rows.push(("grid_bias".into(), g - c));
        }
        "cn" => {
            for k in 1..=config.n {
                rows.push((format!("c_n_limit[{k}]"), expected_c_n(k, None)));
                rows.push((format!("c_n_finite_eps[{k}]"), expected_c_n(k, Some(eps))));
            }
        }
        other => unreachable!("kind {other} passed validation"),
    }
    let (table, results, stdout) = quantity_table("expect", &rows);
    Ok(Report {
        tables: vec![table],
        results: json!({"kind": config.kind(), "values": results}),
        stdout,
        engineering_corridors: false,
    })
}
