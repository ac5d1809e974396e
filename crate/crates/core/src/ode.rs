//! Dormand–Prince 5(4) with error-per-step control for two-component
//! systems.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339_200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub(crate) type State = [f64; 2];

#[derive(Debug, Clone, Copy)]
pub(crate) struct Dopri {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
}

pub(crate) enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Reached {
    pub y: State,
    /// Suggested size for the next step.
    pub h: f64,
}

#[inline]
fn axpy(y: State, terms: &[(f64, State)], h: f64) -> State {
    let mut out = y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

impl Dopri {
    /// Integrates from `(r0, y0)` to `r_end`, calling `on_step` after each
    /// accepted step. Stops early when the callback says so.
    pub(crate) fn integrate<F, C>(
        &self,
        f: &F,
        r0: f64,
        y0: State,
        r_end: f64,
        h0: f64,
        mut on_step: C,
    ) -> Result<Reached>
    where
        F: Fn(f64, State) -> State,
        C: FnMut(f64, State) -> Control,
    {
        let mut r = r0;
        let mut y = y0;
        let mut h = h0.min(r_end - r0);
        let mut k1 = f(r, y);
        while r < r_end {
            let last = r + h >= r_end;
            if last {
                h = r_end - r;
            }
            let k2 = f(r + C2 * h, axpy(y, &[(A21, k1)], h));
            let k3 = f(r + C3 * h, axpy(y, &[(A31, k1), (A32, k2)], h));
            let k4 = f(r + C4 * h, axpy(y, &[(A41, k1), (A42, k2), (A43, k3)], h));
            let k5 = f(
                r + C5 * h,
                axpy(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h),
            );
            let k6 = f(
                r + h,
                axpy(y, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)], h),
            );
            let y_new = axpy(y, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)], h);
            let k7 = f(r + h, y_new);
            let mut err: f64 = 0.0;
            for i in 0..2 {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / scale).abs());
            }
            if !err.is_finite() {
                err = 1e10;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                r = if last { r_end } else { r + h };
                y = y_new;
                k1 = k7;
                let h_next = h * factor;
                if let Control::Stop = on_step(r, y) {
                    return Ok(Reached { y, h: h_next });
                }
                if !last {
                    h = h_next;
                } else {
                    return Ok(Reached { y, h: h_next });
                }
            } else {
                h *= factor;
                if h < self.h_min {
                    return Err(Error::StepUnderflow { r });
                }
            }
        }
        Ok(Reached { y, h })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, sin};

    #[test]
    fn harmonic_oscillator() {
        let solver = Dopri {
            rtol: 1e-12,
            atol: 1e-14,
            h_min: 1e-14,
        };
        let f = |_r: f64, y: State| [y[1], -y[0]];
        let out = solver
            .integrate(&f, 0.0, [1.0, 0.0], 10.0, 0.01, |_, _| Control::Continue)
            .unwrap();
        assert!((out.y[0] - cos(10.0)).abs() < 1e-10);
        assert!((out.y[1] + sin(10.0)).abs() < 1e-10);
    }

    #[test]
    fn early_stop() {
        let solver = Dopri {
            rtol: 1e-10,
            atol: 1e-12,
            h_min: 1e-14,
        };
        let f = |_r: f64, y: State| [y[1], -y[0]];
        let mut stopped_at = 0.0;
        solver
            .integrate(&f, 0.0, [1.0, 0.0], 10.0, 0.01, |r, y| {
                stopped_at = r;
                if y[0] < 0.0 {
                    Control::Stop
                } else {
                    Control::Continue
                }
            })
            .unwrap();
        assert!(stopped_at > core::f64::consts::FRAC_PI_2 && stopped_at < 2.0);
    }
}
