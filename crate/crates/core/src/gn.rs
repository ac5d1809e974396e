//! Sharp constant of the planar Gagliardo–Nirenberg inequality
//! `‖f‖₄ ≤ A·‖∇f‖₂^{1/2}·‖f‖₂^{1/2}` from the radial ground state.
//!
//! The extremal is (up to scaling) the positive decaying solution `Q` of
//! `u'' + u'/r − u + u³ = 0`, `u'(0) = 0`. With `‖Q‖₂² = 2π∫Q²r dr`,
//! `A⁴ = 2/‖Q‖₂²`, so the critical exponent is `γ_β = A⁻⁴ = ‖Q‖₂²/2` and
//! the variational constant is `M = A⁴/2`.
//!
//! `Q(0)` is found by shooting: a trial `u(0)` that makes `u` cross zero is
//! too large, one that makes `u'` turn positive is too small. Bisection on
//! this classification brackets `Q(0)`. Because the linearization has a
//! growing `e^r` mode, the integrated profile is only trusted until it has
//! decayed to `match_ratio · u(0)`; beyond that the decaying mode
//! `c·e^{−r}/√r` is attached with `c` fixed by continuity.

use alloc::vec::Vec;

use crate::error::{ensure_positive, Error, Result};
use crate::math::{exp, sqrt, PI, TAU};
use crate::ode::{Control, Dopri};

/// Published numerical value of `γ_β ≈ π × 1.86225…`.
pub const PUBLISHED_GAMMA_BETA: f64 = 5.85043;

/// Published `π × 1.86225` factor behind [`PUBLISHED_GAMMA_BETA`].
pub const PUBLISHED_WEINSTEIN_FACTOR: f64 = 1.86225;

/// A radial function sampled on the uniform grid `r_i = i·step`, with its
/// radial derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    step: f64,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl RadialProfile {
    /// Samples `f` and its derivative `df` on `[0, r_max]`.
    pub fn from_fn<F, D>(step: f64, r_max: f64, f: F, df: D) -> Result<Self>
    where
        F: Fn(f64) -> f64,
        D: Fn(f64) -> f64,
    {
        ensure_positive("step", step)?;
        ensure_positive("r_max", r_max)?;
        let n = crate::math::round(r_max / step) as usize;
        let values = (0..=n).map(|i| f(i as f64 * step)).collect();
        let derivs = (0..=n).map(|i| df(i as f64 * step)).collect();
        Self::new(step, values, derivs)
    }

    /// Samples only; derivatives by fourth-order central differences, using
    /// evenness at `r = 0`.
    pub fn from_samples(step: f64, values: Vec<f64>) -> Result<Self> {
        ensure_positive("step", step)?;
        let n = values.len();
        if n < 5 {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: "need at least five samples".into(),
            });
        }
        let at = |i: isize| values[i.unsigned_abs()];
        let mut derivs = alloc::vec![0.0; n];
        for (i, d) in derivs.iter_mut().enumerate().take(n - 2).skip(1) {
            let i = i as isize;
            *d = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * step);
        }
        derivs[n - 2] = (values[n - 1] - values[n - 3]) / (2.0 * step);
        derivs[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * step);
        Self::new(step, values, derivs)
    }

    fn new(step: f64, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values.len() != derivs.len() {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: "profile needs matching value and derivative samples".into(),
            });
        }
        Ok(Self {
            step,
            values,
            derivs,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.len() - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    /// `amplitude · f(lambda · r)`: the grid is stretched instead of
    /// interpolating.
    pub fn rescaled(&self, amplitude: f64, lambda: f64) -> Result<Self> {
        ensure_positive("lambda", lambda)?;
        Ok(Self {
            step: self.step / lambda,
            values: self.values.iter().map(|v| amplitude * v).collect(),
            derivs: self.derivs.iter().map(|d| amplitude * lambda * d).collect(),
        })
    }

    fn radial_integral(&self, g: impl Fn(f64) -> f64, of: &[f64]) -> f64 {
        TAU * simpson(self.step, |i| g(of[i]) * self.r(i), of.len() - 1)
    }

    /// `∫_{R²} f² dx`.
    pub fn l2_sq(&self) -> f64 {
        self.radial_integral(|v| v * v, &self.values)
    }

    /// `∫_{R²} |∇f|² dx`.
    pub fn grad_sq(&self) -> f64 {
        self.radial_integral(|d| d * d, &self.derivs)
    }

    /// `∫_{R²} f⁴ dx`.
    pub fn l4_pow4(&self) -> f64 {
        self.radial_integral(|v| v * v * v * v, &self.values)
    }

    fn check_captured(&self) -> Result<()> {
        let peak = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let all_finite = self
            .values
            .iter()
            .chain(&self.derivs)
            .all(|v| v.is_finite());
        let last = self.values[self.len() - 1].abs();
        if !all_finite || peak == 0.0 || last > 1e-6 * peak {
            return Err(Error::NotSquareIntegrable);
        }
        Ok(())
    }
}

/// Composite Simpson over `n` intervals of `g(0), …, g(n)`; an odd interval
/// count closes with the 3/8 rule.
fn simpson(h: f64, g: impl Fn(usize) -> f64, n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 0.5 * h * (g(0) + g(1)),
        2 => h / 3.0 * (g(0) + 4.0 * g(1) + g(2)),
        3 => 3.0 * h / 8.0 * (g(0) + 3.0 * g(1) + 3.0 * g(2) + g(3)),
        _ => {
            let even = if n.is_multiple_of(2) { n } else { n - 3 };
            let mut s = g(0) + g(even);
            for i in 1..even {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i);
            }
            let mut total = h / 3.0 * s;
            if even < n {
                let k = even;
                total += 3.0 * h / 8.0 * (g(k) + 3.0 * g(k + 1) + 3.0 * g(k + 2) + g(k + 3));
            }
            total
        }
    }
}

/// The solved ground state and its norms.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub profile: RadialProfile,
    /// Shooting value `u(0)`.
    pub u0: f64,
    /// `2π∫u²r dr`, including the analytic tail past `r_max`.
    pub l2_sq: f64,
    /// `2π∫(u')²r dr`, including the analytic tail past `r_max`.
    pub grad_sq: f64,
    /// `2π∫u⁴r dr`.
    pub l4_pow4: f64,
    /// Radius where the integrated profile hands over to `c·e^{−r}/√r`.
    pub r_match: f64,
    pub tail_coeff: f64,
    /// Final width of the `u(0)` bracket.
    pub bracket_width: f64,
}

impl GroundState {
    pub fn r_grid(&self) -> Vec<f64> {
        (0..self.profile.len()).map(|i| self.profile.r(i)).collect()
    }

    /// `Q/‖Q‖₂`.
    pub fn unit_profile(&self) -> RadialProfile {
        let s = 1.0 / sqrt(self.l2_sq);
        RadialProfile {
            step: self.profile.step,
            values: self.profile.values.iter().map(|v| v * s).collect(),
            derivs: self.profile.derivs.iter().map(|d| d * s).collect(),
        }
    }

    /// The `L²`-preserving dilation `λ·g(λx)` of `g = Q/‖Q‖₂` that maximizes
    /// `‖f‖₄² − ½‖∇f‖₂²`: since the two terms scale as `λ` and `λ²`, the
    /// optimum is `λ* = ‖g‖₄² / ‖∇g‖₂²`.
    pub fn optimal_dilation(&self) -> f64 {
        let a = sqrt(self.l4_pow4) / self.l2_sq;
        let b = self.grad_sq / self.l2_sq;
        a / b
    }

    /// `λ·g(λx)` for `g = Q/‖Q‖₂`.
    pub fn dilated_unit_profile(&self, lambda: f64) -> Result<RadialProfile> {
        self.unit_profile().rescaled(lambda, lambda)
    }
}

/// Shooting/bisection configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateSolver {
    /// Bisection stops when the `u(0)` bracket is narrower than this.
    pub tol: f64,
    pub r_max: f64,
    /// Radial grid spacing of the returned profile; also the radius where
    /// the power series start hands over to the integrator.
    pub step: f64,
    /// Initial bracket for `u(0)`.
    pub bracket: (f64, f64),
    /// Integrated values are used until `u < match_ratio · u(0)`.
    pub match_ratio: f64,
}

impl Default for GroundStateSolver {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            r_max: 20.0,
            step: 0.005,
            bracket: (1.0, 4.0),
            match_ratio: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// `u` crossed zero: `u(0)` too large.
    Over,
    /// `u'` turned positive (or nothing happened): `u(0)` too small.
    Under,
}

/// Trials stop here; `e^{−60}` is far below double precision of `u(0)`.
const SHOOT_CAP: f64 = 60.0;

const INTEGRATOR: Dopri = Dopri {
    rtol: 1e-12,
    atol: 1e-15,
    h_min: 1e-13,
};

fn rhs(r: f64, y: [f64; 2]) -> [f64; 2] {
    let (u, v) = (y[0], y[1]);
    [v, -v / r + u - u * u * u]
}

/// Fourth-order series `u0 + a r² + b r⁴` around the regular singular
/// point, with `4a = u0 − u0³` and `16b = a(1 − 3u0²)`.
fn series_start(u0: f64, r: f64) -> [f64; 2] {
    let a = (u0 - u0 * u0 * u0) / 4.0;
    let b = a * (1.0 - 3.0 * u0 * u0) / 16.0;
    let r2 = r * r;
    [u0 + a * r2 + b * r2 * r2, 2.0 * a * r + 4.0 * b * r2 * r]
}

impl GroundStateSolver {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn shoot(&self, u0: f64) -> Result<Shot> {
        let start = series_start(u0, self.step);
        let mut shot = Shot::Under;
        INTEGRATOR.integrate(&rhs, self.step, start, SHOOT_CAP, self.step, |_, y| {
            if y[0] < 0.0 {
                shot = Shot::Over;
                Control::Stop
            } else if y[1] > 0.0 {
                shot = Shot::Under;
                Control::Stop
            } else {
                Control::Continue
            }
        })?;
        Ok(shot)
    }

    /// Bisects `u(0)` and returns the final bracket.
    pub fn bisect(&self) -> Result<(f64, f64)> {
        ensure_positive("tol", self.tol)?;
        ensure_positive("r_max", self.r_max)?;
        ensure_positive("step", self.step)?;
        if self.step > 0.05 || self.step * 8.0 > self.r_max {
            return Err(Error::InvalidParameter {
                name: "step",
                reason: "radial step must be at most 0.05 and well below r_max".into(),
            });
        }
        let (mut lo, mut hi) = self.bracket;
        let ordered = lo.partial_cmp(&hi) == Some(core::cmp::Ordering::Less);
        if !ordered || self.shoot(lo)? != Shot::Under || self.shoot(hi)? != Shot::Over {
            return Err(Error::BracketNotFound {
                lo: self.bracket.0,
                hi: self.bracket.1,
            });
        }
        while hi - lo > self.tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match self.shoot(mid)? {
                Shot::Over => hi = mid,
                Shot::Under => lo = mid,
            }
        }
        Ok((lo, hi))
    }

    pub fn solve(&self) -> Result<GroundState> {
        let (lo, hi) = self.bisect()?;
        let u0 = 0.5 * (lo + hi);
        let n = crate::math::round(self.r_max / self.step) as usize;
        let h = self.step;
        let mut values = alloc::vec![0.0; n + 1];
        let mut derivs = alloc::vec![0.0; n + 1];
        values[0] = u0;
        let s = series_start(u0, h);
        values[1] = s[0];
        derivs[1] = s[1];
        let mut y = s;
        let mut h_ode = h;
        let mut matched = n;
        for i in 1..n {
            let r0 = i as f64 * h;
            let reached =
                INTEGRATOR.integrate(&rhs, r0, y, r0 + h, h_ode, |_, _| Control::Continue)?;
            y = reached.y;
            h_ode = reached.h.min(h);
            if y[0] <= 0.0 || y[1] >= 0.0 {
                // trajectory already left the decaying branch
                matched = i;
                break;
            }
            values[i + 1] = y[0];
            derivs[i + 1] = y[1];
            if y[0] < self.match_ratio * u0 {
                matched = i + 1;
                break;
            }
        }
        let r_match = matched as f64 * h;
        let tail_coeff = values[matched] * sqrt(r_match) * exp(r_match);
        for i in matched + 1..=n {
            let r = i as f64 * h;
            let u = tail_coeff * exp(-r) / sqrt(r);
            values[i] = u;
            derivs[i] = -u * (1.0 + 0.5 / r);
        }
        let profile = RadialProfile {
            step: h,
            values,
            derivs,
        };
        let r_end = profile.r_max();
        let beyond = if matched < n {
            PI * tail_coeff * tail_coeff * exp(-2.0 * r_end)
        } else {
            0.0
        };
        Ok(GroundState {
            l2_sq: profile.l2_sq() + beyond,
            grad_sq: profile.grad_sq() + beyond * (1.0 + 1.0 / r_end),
            l4_pow4: profile.l4_pow4(),
            u0,
            r_match,
            tail_coeff,
            bracket_width: hi - lo,
            profile,
        })
    }
}

/// Shooting solve with default grid settings and the given bisection
/// tolerance.
pub fn solve_ground_state(tol: f64) -> Result<GroundState> {
    GroundStateSolver::with_tol(tol).solve()
}

/// Best constant `A` and the quantities derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnConstants {
    pub a: f64,
    /// `A⁻⁴`.
    pub gamma_beta: f64,
    /// `A⁴/2`.
    pub m: f64,
}

impl GnConstants {
    pub fn from_gamma(gamma_beta: f64) -> Result<Self> {
        ensure_positive("gamma_beta", gamma_beta)?;
        Ok(Self {
            a: crate::math::powf(gamma_beta, -0.25),
            gamma_beta,
            m: 0.5 / gamma_beta,
        })
    }
}

/// `γ_β = ‖Q‖₂²/2`, `A = γ_β^{−1/4}`, `M = A⁴/2`.
pub fn gn_constants(gs: &GroundState) -> Result<GnConstants> {
    GnConstants::from_gamma(gs.l2_sq / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    /// `(∫f⁴)^{1/2} − ½∫|∇f|²` of the `L²`-normalized input.
    pub value: f64,
    /// `∫f²` of the input before normalization.
    pub input_l2_sq: f64,
}

/// The variational functional `(∫|f|⁴)^{1/2} − ½∫|∇f|²` over unit-`L²`
/// radial functions. Inputs are renormalized; the input norm is reported.
pub fn evaluate_objective(f: &RadialProfile) -> Result<ObjectiveValue> {
    f.check_captured()?;
    let l2 = f.l2_sq();
    let value = sqrt(f.l4_pow4()) / l2 - 0.5 * f.grad_sq() / l2;
    Ok(ObjectiveValue {
        value,
        input_l2_sq: l2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnCheck {
    /// `‖f‖₄`.
    pub lhs: f64,
    /// `A·‖∇f‖₂^{1/2}·‖f‖₂^{1/2}`.
    pub rhs: f64,
    pub ok: bool,
}

impl GnCheck {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

pub fn check_gn_inequality(f: &RadialProfile, constants: &GnConstants) -> Result<GnCheck> {
    f.check_captured()?;
    let lhs = sqrt(sqrt(f.l4_pow4()));
    let rhs = constants.a * sqrt(sqrt(f.grad_sq())) * sqrt(sqrt(f.l2_sq()));
    Ok(GnCheck {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + 1e-6),
    })
}

/// Three independent routes to `γ_β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyTriangle {
    /// `‖Q‖₂²/2`.
    pub from_l2: f64,
    pub published: f64,
    /// `1/(2·M̂)` with `M̂` the objective at the optimal dilation of `Q`.
    pub from_objective: f64,
}

impl ConsistencyTriangle {
    pub fn spread(&self) -> f64 {
        let v = [self.from_l2, self.published, self.from_objective];
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

pub fn consistency_triangle(gs: &GroundState) -> Result<ConsistencyTriangle> {
    let trial = gs.dilated_unit_profile(gs.optimal_dilation())?;
    let m_hat = evaluate_objective(&trial)?.value;
    Ok(ConsistencyTriangle {
        from_l2: gs.l2_sq / 2.0,
        published: PUBLISHED_GAMMA_BETA,
        from_objective: 0.5 / m_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(sigma: f64) -> RadialProfile {
        let c = 1.0 / (sqrt(PI) * sigma);
        let s2 = sigma * sigma;
        RadialProfile::from_fn(
            sigma / 400.0,
            12.0 * sigma,
            move |r| c * exp(-r * r / (2.0 * s2)),
            move |r| -r / s2 * c * exp(-r * r / (2.0 * s2)),
        )
        .unwrap()
    }

    #[test]
    fn gaussian_norms_match_closed_forms() {
        for sigma in [0.3, 1.0, 2.5] {
            let g = gaussian(sigma);
            assert!((g.l2_sq() - 1.0).abs() < 1e-10);
            assert!((g.grad_sq() - 1.0 / (sigma * sigma)).abs() < 1e-9);
            assert!((g.l4_pow4() - 1.0 / (TAU * sigma * sigma)).abs() < 1e-9);
        }
    }

    #[test]
    fn objective_on_gaussians_peaks_at_one_over_four_pi() {
        // (∫f⁴)^{1/2} − ½∫|∇f|² = u/√(2π) − u²/2 with u = 1/σ
        let best = 1.0 / (4.0 * PI);
        let sigma_star = sqrt(TAU);
        let v = evaluate_objective(&gaussian(sigma_star)).unwrap().value;
        assert!((v - best).abs() < 1e-9);
        for sigma in [1.0, 2.0, 3.0, 4.0] {
            let v = evaluate_objective(&gaussian(sigma)).unwrap().value;
            assert!(v <= best + 1e-12);
        }
    }

    #[test]
    fn finite_difference_derivatives() {
        let sigma = 1.3;
        let exact = gaussian(sigma);
        let approx = RadialProfile::from_samples(exact.step(), exact.values().to_vec()).unwrap();
        assert!((approx.grad_sq() - exact.grad_sq()).abs() < 1e-8);
    }

    #[test]
    fn uncaptured_profile_is_rejected() {
        let f = RadialProfile::from_fn(0.01, 20.0, |r| 1.0 / (1.0 + r * r), |r| {
            -2.0 * r / ((1.0 + r * r) * (1.0 + r * r))
        })
        .unwrap();
        assert_eq!(evaluate_objective(&f), Err(Error::NotSquareIntegrable));
    }

    #[test]
    fn simpson_rules_are_exact_on_cubics() {
        for n in [2usize, 3, 4, 5, 9, 10] {
            let h = 0.1;
            let s = simpson(h, |i| (i as f64 * h).powi(3), n);
            let b = n as f64 * h;
            assert!((s - b.powi(4) / 4.0).abs() < 1e-14, "n {n}");
        }
    }

    #[test]
    fn rejects_bad_bracket() {
        let solver = GroundStateSolver {
            bracket: (2.5, 4.0),
            ..GroundStateSolver::default()
        };
        assert!(matches!(solver.solve(), Err(Error::BracketNotFound { .. })));
        let solver = GroundStateSolver {
            bracket: (1.0, 2.0),
            ..GroundStateSolver::default()
        };
        assert!(matches!(solver.solve(), Err(Error::BracketNotFound { .. })));
    }

    #[test]
    fn constants_relations() {
        let c = GnConstants::from_gamma(5.85).unwrap();
        let a4 = c.a * c.a * c.a * c.a;
        assert!((c.gamma_beta * a4 - 1.0).abs() < 4.0 * f64::EPSILON);
        assert!((c.m * c.gamma_beta - 0.5).abs() < 2.0 * f64::EPSILON);
    }

    #[test]
    fn ground_state_reproduces_constants() {
        let gs = solve_ground_state(1e-13).unwrap();
        assert!((gs.u0 - 2.206_2).abs() < 1e-4);
        // Pohozaev: ‖∇Q‖² = ‖Q‖² and ‖Q‖₄⁴ = 2‖Q‖²
        assert!((gs.grad_sq / gs.l2_sq - 1.0).abs() < 1e-8);
        assert!((gs.l4_pow4 / gs.l2_sq - 2.0).abs() < 1e-8);
        let c = gn_constants(&gs).unwrap();
        assert!((c.gamma_beta - PUBLISHED_GAMMA_BETA).abs() < 1e-3);
        let tri = consistency_triangle(&gs).unwrap();
        assert!(tri.spread() < 2e-3, "{tri:?}");
        assert!((tri.from_l2 - tri.from_objective).abs() < 1e-8);
    }

    #[test]
    fn optimal_dilation_is_a_maximum() {
        let gs = solve_ground_state(1e-12).unwrap();
        let best = gs.optimal_dilation();
        let at = |l: f64| {
            evaluate_objective(&gs.dilated_unit_profile(l).unwrap())
                .unwrap()
                .value
        };
        let peak = at(best);
        for f in [0.8, 0.95, 1.05, 1.25] {
            assert!(at(best * f) < peak);
        }
        // and it beats every Gaussian, whose best value is 1/(4π)
        assert!(peak > 1.0 / (4.0 * PI));
    }

    #[test]
    fn gn_inequality_holds_and_is_tight() {
        let gs = solve_ground_state(1e-12).unwrap();
        let c = gn_constants(&gs).unwrap();
        let q = check_gn_inequality(&gs.profile, &c).unwrap();
        assert!(q.ok);
        assert!((q.ratio() - 1.0).abs() < 1e-8);
        for sigma in [0.5, 1.0, 3.0] {
            let g = check_gn_inequality(&gaussian(sigma), &c).unwrap();
            assert!(g.ok);
            // Gaussian ratio ‖f‖₄/(‖∇f‖½‖f‖½) = (2π)^{−1/4}, scale free
            let expect = crate::math::powf(TAU, -0.25) / c.a;
            assert!((g.ratio() - expect).abs() < 1e-8);
        }
    }

    #[test]
    fn grid_refinement_is_stable() {
        let fine = solve_ground_state(1e-12).unwrap();
        let coarse = GroundStateSolver {
            step: 0.02,
            tol: 1e-12,
            ..GroundStateSolver::default()
        }
        .solve()
        .unwrap();
        assert!((fine.l2_sq - coarse.l2_sq).abs() < 1e-6);
    }
}
