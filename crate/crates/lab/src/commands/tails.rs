//! Empirical tail curves with their windowed slope fits.

use serde_json::{json, Value};
use silt_core::asymptotics::{
    geometric_thresholds, l_proxy, sample_alpha, sample_beta, steps_for, SlopeFit, TailCurve,
};
use silt_core::gn::PUBLISHED_GAMMA_BETA;
use silt_core::silt::{centering_term, expected_alpha_eps, grid_centering};
use silt_core::stats::{quantile, Summary};

use super::{batch, summary_json, z};
use crate::config::RunConfig;
use crate::error::LabResult;
use crate::exec::PoolExecutor;
use crate::output::{num, opt, Report, Table};

/// Points in a data-driven small-a threshold grid.
const SMALL_A_POINTS: usize = 60;

pub fn curve_table(name: &str, curve: &TailCurve) -> Table {
    let mut t = Table::new(
        name,
        &["threshold", "exceed_count", "n_replicas", "log_survival", "in_fit_window"],
    );
    let ls = curve.log_survival();
    let win = curve.in_fit_window();
    for k in 0..curve.thresholds.len() {
        t.push(vec![
            num(curve.thresholds[k]),
            curve.exceed_counts[k].to_string(),
            curve.n_replicas.to_string(),
            opt(ls[k]),
            win[k].to_string(),
        ]);
    }
    t
}

pub fn slope_json(fit: &SlopeFit) -> Value {
    json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "std_error": fit.std_error,
        "ci95": [fit.ci_low, fit.ci_high],
        "window": [fit.window.0, fit.window.1],
        "n_points": fit.n_points,
    })
}

fn slope_line(label: &str, fit: Option<&SlopeFit>) -> String {
    match fit {
        Some(f) => format!(
            "{label}: slope {} ± {} over [{}, {}] ({} points)\n",
            f.slope, f.std_error, f.window.0, f.window.1, f.n_points
        ),
        None => format!("{label}: too few qualifying thresholds for a slope\n"),
    }
}

pub fn tails(config: &RunConfig, exec: &PoolExecutor) -> LabResult<Report> {
    match config.kind() {
        "alpha" => {
            let spec = batch(config)?;
            let sample = sample_alpha(exec, &spec, 1.0, 1.0)?;
            let exact = expected_alpha_eps(1.0, 1.0, spec.eps)?;
            upper_report(config, "alpha", &sample, exact)
        }
        "beta-upper" | "beta-lower" | "beta" => {
            let spec = batch(config)?;
            let sample = sample_beta(exec, &spec, 1.0)?;
            let centering = centering_term(1.0, spec.eps)?;
            let bias = grid_centering(steps_for(1.0, spec.dt)? as usize, spec.dt, spec.eps)? - centering;
            let mut parts = Vec::new();
            if config.kind() != "beta-lower" {
                parts.push(upper_report(config, "beta_upper", &sample, bias)?);
            }
            if config.kind() != "beta-upper" {
                parts.push(lower_report(config, &sample, centering)?);
            }
            Ok(merge(parts))
        }
        "small-a" => small_a(config, exec),
        other => unreachable!("kind {other} passed validation"),
    }
}

fn merge(parts: Vec<Report>) -> Report {
    let mut out = Report {
        tables: Vec::new(),
        results: json!({}),
        stdout: String::new(),
        engineering_corridors: true,
    };
    for p in parts {
        out.tables.extend(p.tables);
        out.stdout.push_str(&p.stdout);
        if let (Value::Object(dst), Value::Object(src)) = (&mut out.results, p.results) {
            dst.extend(src);
        }
    }
    out
}

/// Upper-tail curve and the corridor `|slope| ∈ [γ/3, 3γ]`. `mean_target`
/// is the exact finite-ε mean of the sample.
fn upper_report(config: &RunConfig, name: &str, sample: &[f64], mean_target: f64) -> LabResult<Report> {
    let thresholds = match &config.thresholds {
        Some(t) => t.clone(),
        None => geometric_thresholds(0.25, 4.0, 41)?,
    };
    let curve = TailCurve::from_sample(sample, thresholds, config.fit_window)?;
    let s = Summary::of(sample)?;
    let gamma = PUBLISHED_GAMMA_BETA;
    let corridor = (gamma / 3.0, 3.0 * gamma);
    let in_corridor = curve
        .slope_fit
        .map(|f| f.slope < 0.0 && (corridor.0..=corridor.1).contains(&-f.slope));
    Ok(Report {
        tables: vec![curve_table(&format!("tails_{name}"), &curve)],
        results: json!({
            (name): {
                "summary": summary_json(&s),
                "exact_mean": mean_target,
                "z_vs_exact_mean": z(&s, mean_target),
                "slope_fit": curve.slope_fit.as_ref().map(slope_json),
                "corridor": [corridor.0, corridor.1],
                "in_corridor": in_corridor,
            }
        }),
        stdout: slope_line(name, curve.slope_fit.as_ref()),
        engineering_corridors: true,
    })
}

/// Curve of `P(−β̂₁ ≥ ℓ)` with slopes over successive level windows.
fn lower_report(config: &RunConfig, beta: &[f64], centering: f64) -> LabResult<Report> {
    let d: Vec<f64> = beta.iter().map(|b| -b).collect();
    let levels = match &config.levels {
        Some(t) => t.clone(),
        None => geometric_thresholds(0.02, 0.64, 31)?,
    };
    let first = config.level_windows[0];
    let curve = TailCurve::from_sample(&d, levels, first)?;
    let mut fits = Vec::new();
    for &w in &config.level_windows {
        fits.push(curve.window_slope(w).ok());
    }
    let slopes: Option<Vec<&SlopeFit>> = fits.iter().map(Option::as_ref).collect();
    // concave log-survival: every later window is strictly steeper
    let steepening = slopes.as_ref().map(|s| {
        s.windows(2)
            .map(|w| {
                let se = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
                json!({
                    "windows": [[w[0].window.0, w[0].window.1], [w[1].window.0, w[1].window.1]],
                    "magnitude_increase": w[0].slope - w[1].slope,
                    "z": (w[0].slope - w[1].slope) / se,
                })
            })
            .collect::<Vec<_>>()
    });
    let strictly_steeper = slopes
        .as_ref()
        .map(|s| s.iter().all(|f| f.slope < 0.0) && s.windows(2).all(|w| w[1].slope < w[0].slope));
    let mut proxy = Table::new("l_proxy", &["level", "l_proxy"]);
    for (l, p) in curve.thresholds.iter().zip(l_proxy(&curve)) {
        proxy.push(vec![num(*l), opt(p)]);
    }
    let mut stdout = String::new();
    for (k, f) in fits.iter().enumerate() {
        stdout.push_str(&slope_line(&format!("beta_lower window {k}"), f.as_ref()));
    }
    let n = d.len() as f64;
    Ok(Report {
        tables: vec![curve_table("tails_beta_lower", &curve), proxy],
        results: json!({
            "beta_lower": {
                "p_nonpositive_beta": d.iter().filter(|&&x| x >= 0.0).count() as f64 / n,
                "max_observed": d.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                // the raw functional is nonnegative, so −β̂ never exceeds its centering
                "support_bound": centering,
                "window_slopes": fits.iter().map(|f| f.as_ref().map(slope_json)).collect::<Vec<_>>(),
                "steepening": steepening,
                "concave_strictly_steepening": strictly_steeper,
            }
        }),
        stdout,
        engineering_corridors: true,
    })
}

fn small_a(config: &RunConfig, exec: &PoolExecutor) -> LabResult<Report> {
    let spec = batch(config)?;
    let (p_high, p_low) = config.survival_band;
    let mut a_values = config.a_values.clone();
    a_values.sort_by(f64::total_cmp);
    let mut tables = Vec::new();
    let mut per_a = Vec::new();
    let mut fits: Vec<Option<SlopeFit>> = Vec::new();
    let mut stdout = String::new();
    for &a in &a_values {
        let sample = sample_alpha(exec, &spec, 1.0, a)?;
        let thresholds = match &config.thresholds {
            Some(t) => t.clone(),
            None => {
                let mut sorted = sample.clone();
                sorted.sort_by(f64::total_cmp);
                let lo = quantile(&sorted, (1.0 - 2.0 * p_high).max(0.0))?;
                let hi = quantile(&sorted, 1.0 - 0.5 * p_low)?;
                geometric_thresholds(lo, hi, SMALL_A_POINTS)?
            }
        };
        let curve = TailCurve::from_sample(&sample, thresholds, config.fit_window)?;
        // compare every a at the same rarity rather than the same threshold
        let curve = match curve.survival_band(p_high, p_low) {
            Some(w) if curve.window_slope(w).is_ok() => curve.with_window(w)?,
            _ => TailCurve { slope_fit: None, ..curve },
        };
        let s = Summary::of(&sample)?;
        let exact = expected_alpha_eps(1.0, a, spec.eps)?;
        stdout.push_str(&slope_line(&format!("alpha(1,{a})"), curve.slope_fit.as_ref()));
        per_a.push(json!({
            "a": a,
            "summary": summary_json(&s),
            "exact_mean": exact,
            "z_vs_exact_mean": z(&s, exact),
            "slope_fit": curve.slope_fit.as_ref().map(slope_json),
        }));
        tables.push(curve_table(&format!("tails_small_a_{a}"), &curve));
        fits.push(curve.slope_fit);
    }
    let ratios: Vec<Value> = (1..a_values.len())
        .map(|k| {
            let ratio = match (&fits[k - 1], &fits[k]) {
                (Some(lo), Some(hi)) => Some(lo.slope / hi.slope),
                _ => None,
            };
            json!({
                "a_pair": [a_values[k - 1], a_values[k]],
                "slope_ratio": ratio,
                "sqrt_law": (a_values[k] / a_values[k - 1]).sqrt(),
            })
        })
        .collect();
    Ok(Report {
        tables,
        results: json!({
            "survival_band": [p_high, p_low],
            "per_a": per_a,
            "ratios": ratios,
        }),
        stdout,
        engineering_corridors: true,
    })
}
