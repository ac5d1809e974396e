//! Run configuration: per-command defaults, JSON config files, flag
//! overrides and the canonical form that is hashed into the fingerprint.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use silt_core::estimators::MIN_EPS_PER_DT;

use crate::error::{LabError, LabResult};

/// Environment variable that sets the worker-pool size when `--threads` is
/// absent.
pub const THREADS_ENV: &str = "SILT_THREADS";

/// Keys that never influence an emitted number and are left out of the
/// fingerprint.
const UNHASHED_KEYS: [&str; 2] = ["threads", "out"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Gn,
    Expect,
    Beta,
    Alpha,
    DecompCheck,
    IdentityCheck,
    Tails,
    Lil,
    OccSup,
    Cn,
}

impl Command {
    pub fn id(self) -> &'static str {
        match self {
            Command::Gn => "gn",
            Command::Expect => "expect",
            Command::Beta => "beta",
            Command::Alpha => "alpha",
            Command::DecompCheck => "decomp-check",
            Command::IdentityCheck => "identity-check",
            Command::Tails => "tails",
            Command::Lil => "lil",
            Command::OccSup => "occ-sup",
            Command::Cn => "cn",
        }
    }

    /// Commands that never simulate a path ignore `dt`.
    fn simulates(self) -> bool {
        !matches!(self, Command::Gn | Command::Expect)
    }

    fn kinds(self) -> &'static [&'static str] {
        match self {
            Command::Expect => &["alpha", "centering", "cn"],
            Command::Tails => &["alpha", "beta-upper", "beta-lower", "beta", "small-a"],
            _ => &[],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Every knob of a run. Fields a command does not read keep their defaults
/// and still enter the fingerprint, so the hash is a function of the whole
/// document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Sub-selection for `expect` and `tails`.
    pub kind: Option<String>,
    pub seed: u64,
    pub dt: f64,
    pub eps: f64,
    pub replicas: u64,
    /// Path horizon `T` for `beta`, `decomp-check`, `identity-check` and the
    /// centering oracle.
    pub horizon: f64,
    /// Time spans of the two motions in `α̂(s, t)`.
    pub s: f64,
    pub t: f64,
    /// Distance between the starting points in the `expect alpha` oracle.
    pub separation: f64,
    /// Largest block count for `cn` and `expect cn`.
    pub n: usize,
    /// Brownian scaling factor for the `beta` scaling audit.
    pub scale: Option<f64>,
    /// Mollifier scales evaluated on common paths by `alpha`.
    pub eps_sweep: Option<Vec<f64>>,
    pub min_pieces: usize,
    pub max_pieces: usize,
    /// Occupation-grid cell size; `√eps/4` when absent.
    pub cell: Option<f64>,
    /// Upper-tail and small-a thresholds; defaults depend on the kind.
    pub thresholds: Option<Vec<f64>>,
    /// Lower-tail levels `ℓ` for `P(−β̂₁ ≥ ℓ)`.
    pub levels: Option<Vec<f64>>,
    pub fit_window: (f64, f64),
    /// Successive level windows for the lower-tail slope comparison.
    pub level_windows: Vec<(f64, f64)>,
    pub a_values: Vec<f64>,
    /// `(p_high, p_low)` survival band that sets the small-a fit windows.
    pub survival_band: (f64, f64),
    pub q: f64,
    pub checkpoints: usize,
    /// Recompute `β̂` from scratch at every LIL checkpoint.
    pub audit: bool,
    pub gn_tol: f64,
    pub allow_coarse_eps: bool,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Defaults for `command`.
    pub fn defaults(command: Command) -> Self {
        let mut c = Self {
            command,
            kind: None,
            seed: 1,
            dt: 1.0 / 256.0,
            eps: 1.0 / 32.0,
            replicas: 1000,
            horizon: 1.0,
            s: 1.0,
            t: 1.0,
            separation: 0.0,
            n: 4,
            scale: None,
            eps_sweep: None,
            min_pieces: 2,
            max_pieces: 8,
            cell: None,
            thresholds: None,
            levels: None,
            fit_window: (1.0, 2.0),
            level_windows: vec![(0.0, 0.1), (0.1, 0.2), (0.2, 0.3)],
            a_values: vec![1.0 / 16.0, 0.25],
            survival_band: (0.1, 1e-3),
            q: 10f64.sqrt(),
            checkpoints: 8,
            audit: true,
            gn_tol: 1e-12,
            allow_coarse_eps: false,
            out: PathBuf::from("silt-out").join(command.id()),
            threads: None,
        };
        match command {
            Command::Gn => {}
            Command::Expect => {
                c.kind = Some("alpha".into());
                c.eps = 0.01;
            }
            Command::Beta => {
                c.dt = 0.004;
                c.eps = 0.05;
            }
            Command::Alpha => {
                c.dt = 0.00125;
                c.eps = 0.01;
            }
            Command::DecompCheck => {
                c.eps = 1.0 / 16.0;
                c.replicas = 100;
            }
            Command::IdentityCheck => {
                c.eps = 0.01;
                c.dt = 0.00125;
                c.replicas = 20;
            }
            Command::Tails => {
                c.kind = Some("beta-upper".into());
                c.dt = 1.0 / 512.0;
                c.eps = 1.0 / 128.0;
                c.replicas = 10_000;
            }
            Command::Lil => {
                c.dt = 0.5;
                c.eps = 4.0;
                c.replicas = 100;
            }
            Command::OccSup => {
                c.dt = 1.0 / 1024.0;
                c.eps = 1.0 / 256.0;
            }
            Command::Cn => {
                c.dt = 0.00125;
                c.eps = 0.005;
            }
        }
        c
    }

    /// Defaults, overlaid by a partial config document, overlaid by
    /// `overrides`. Later layers replace whole keys. Validates the result.
    pub fn resolve(command: Command, file: Option<&Value>, overrides: &Map<String, Value>) -> LabResult<Self> {
        let mut doc = match serde_json::to_value(Self::defaults(command))? {
            Value::Object(m) => m,
            _ => unreachable!("config serializes to an object"),
        };
        if let Some(file) = file {
            let obj = file
                .as_object()
                .ok_or_else(|| LabError::config("config file must hold a JSON object"))?;
            if let Some(c) = obj.get("command") {
                if c != &Value::String(command.id().into()) {
                    return Err(LabError::config(format!(
                        "config file is for command {c}, not {command}"
                    )));
                }
            }
            overlay(&mut doc, obj);
        }
        overlay(&mut doc, overrides);
        let config: Self = serde_json::from_value(Value::Object(doc))
            .map_err(|e| LabError::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load_file(path: &Path) -> LabResult<Value> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| LabError::config(format!("{}: {e}", path.display())))
    }

    /// JSON with sorted keys and shortest round-trip numbers.
    pub fn to_canonical_json(&self) -> LabResult<String> {
        // Value maps are ordered by key
        Ok(serde_json::to_string(&serde_json::to_value(self)?)?)
    }

    pub fn from_json(text: &str) -> LabResult<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| LabError::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// SHA-256 of the canonical JSON without the keys that cannot change
    /// results.
    pub fn fingerprint(&self) -> LabResult<String> {
        let mut v = serde_json::to_value(self)?;
        if let Value::Object(m) = &mut v {
            for k in UNHASHED_KEYS {
                m.remove(k);
            }
        }
        let digest = Sha256::digest(serde_json::to_string(&v)?.as_bytes());
        Ok(hex::encode(digest))
    }

    pub fn validate(&self) -> LabResult<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(LabError::config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        positive("eps", self.eps)?;
        positive("horizon", self.horizon)?;
        positive("s", self.s)?;
        positive("t", self.t)?;
        positive("gn_tol", self.gn_tol)?;
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return Err(LabError::config("separation must be finite and nonnegative"));
        }
        if self.replicas == 0 {
            return Err(LabError::config("replicas must be at least 1"));
        }
        if self.n == 0 {
            return Err(LabError::config("n must be at least 1"));
        }
        if self.min_pieces == 0 || self.min_pieces > self.max_pieces {
            return Err(LabError::config("need 1 <= min_pieces <= max_pieces"));
        }
        if let Some(c) = self.scale {
            positive("scale", c)?;
        }
        if let Some(c) = self.cell {
            positive("cell", c)?;
        }
        if !(self.q.is_finite() && self.q > 1.0) {
            return Err(LabError::config(format!("q must exceed 1, got {}", self.q)));
        }
        if self.checkpoints == 0 {
            return Err(LabError::config("checkpoints must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(LabError::config("threads must be at least 1"));
        }
        for (name, ts) in [("thresholds", &self.thresholds), ("levels", &self.levels)] {
            if let Some(ts) = ts {
                if ts.is_empty() || ts.iter().any(|t| !t.is_finite()) || ts.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(LabError::config(format!("{name} must be finite and strictly ascending")));
                }
            }
        }
        if self.level_windows.is_empty() {
            return Err(LabError::config("level_windows must not be empty"));
        }
        for (name, w) in std::iter::once(("fit_window", &self.fit_window))
            .chain(self.level_windows.iter().map(|w| ("level_windows", w)))
        {
            if !(w.0.is_finite() && w.1.is_finite() && w.0 < w.1) {
                return Err(LabError::config(format!("{name} entries need lo < hi, got {w:?}")));
            }
        }
        if self.a_values.is_empty() || self.a_values.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return Err(LabError::config("a_values must be nonempty and inside (0, 1)"));
        }
        let (p_high, p_low) = self.survival_band;
        if !(p_low > 0.0 && p_low < p_high && p_high <= 1.0) {
            return Err(LabError::config("survival_band needs 0 < p_low < p_high <= 1"));
        }
        let mut scales = vec![self.eps];
        if let Some(sweep) = &self.eps_sweep {
            if sweep.is_empty() {
                return Err(LabError::config("eps_sweep must not be empty"));
            }
            for &e in sweep {
                positive("eps_sweep entry", e)?;
            }
            scales.extend_from_slice(sweep);
        }
        if self.command.simulates() && !self.allow_coarse_eps {
            for e in scales {
                if e / self.dt < MIN_EPS_PER_DT {
                    return Err(LabError::config(format!(
                        "eps/dt = {} is below {MIN_EPS_PER_DT}; pass --allow-coarse-eps to run anyway",
                        e / self.dt
                    )));
                }
            }
        }
        let kinds = self.command.kinds();
        match (&self.kind, kinds.is_empty()) {
            (None, true) => {}
            (Some(k), false) if kinds.contains(&k.as_str()) => {}
            (Some(k), false) => {
                return Err(LabError::config(format!(
                    "unknown kind {k:?} for {}; expected one of {kinds:?}",
                    self.command
                )))
            }
            (None, false) => return Err(LabError::config(format!("{} needs a kind", self.command))),
            (Some(k), true) => {
                return Err(LabError::config(format!("{} takes no kind, got {k:?}", self.command)))
            }
        }
        Ok(())
    }

    /// `kind` after validation; empty for commands without kinds.
    pub fn kind(&self) -> &str {
        self.kind.as_deref().unwrap_or("")
    }
}

fn overlay(doc: &mut Map<String, Value>, layer: &Map<String, Value>) {
    for (k, v) in layer {
        doc.insert(k.clone(), v.clone());
    }
}

/// Parses the worker-pool size from the environment variable's value.
pub fn parse_env_threads(raw: &str) -> LabResult<usize> {
    match raw.trim().parse::<usize>() {
        Ok(t) if t > 0 => Ok(t),
        _ => Err(LabError::config(format!("{THREADS_ENV}={raw:?} is not a positive integer"))),
    }
}

/// Worker-pool size: the configured value, else the available parallelism.
pub fn effective_threads(config: &RunConfig) -> usize {
    config
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
