//! Dormand–Prince 5(4) embedded pair with a PI step-size controller.
//!
//! Works on fixed-size `[f64; N]` states of an autonomous system. Only the
//! components flagged in `controlled` enter the error norm, so passive
//! quadratures (coordinate time, azimuth) never throttle the step.

use crate::math;

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Result of one trial step.
pub(crate) struct Trial<const N: usize> {
    pub y: [f64; N],
    pub err: [f64; N],
    /// Derivative at the new point (first stage of the next step).
    pub k_end: [f64; N],
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// One Dormand–Prince step of size `h` from `y` with `k1 = f(y)`.
pub(crate) fn trial_step<const N: usize, F>(f: &F, y: &[f64; N], k1: &[f64; N], h: f64) -> Trial<N>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k2 = f(&axpy(y, h, &[(A21, k1)]));
    let k3 = f(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&axpy(
        y,
        h,
        &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)],
    ));
    let k6 = f(&axpy(
        y,
        h,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let y_new = axpy(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = f(&y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Trial {
        y: y_new,
        err,
        k_end: k7,
    }
}

/// Tolerances and controller state.
pub(crate) struct Controller<const N: usize> {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub controlled: [bool; N],
    pub max_step: f64,
    fac_old: f64,
}

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

impl<const N: usize> Controller<N> {
    pub fn new(rel_tol: f64, abs_tol: f64, controlled: [bool; N], max_step: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            controlled,
            max_step,
            fac_old: 1e-4,
        }
    }

    /// Scaled RMS error of a trial step.
    pub fn error_norm(&self, y_old: &[f64; N], trial: &Trial<N>) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..N {
            if !self.controlled[i] {
                continue;
            }
            let scale =
                self.abs_tol + self.rel_tol * math::abs(y_old[i]).max(math::abs(trial.y[i]));
            let ratio = trial.err[i] / scale;
            sum += ratio * ratio;
            count += 1;
        }
        math::sqrt(sum / count.max(1) as f64)
    }

    /// Next step size after a trial with scaled error `err`; the bool is true
    /// when the trial is accepted.
    pub fn propose(&mut self, h: f64, err: f64) -> (bool, f64) {
        let expo = 0.2 - BETA * 0.75;
        if !err.is_finite() {
            return (false, h * FAC_MIN);
        }
        let fac11 = math::powf(err.max(1e-300), expo);
        if err <= 1.0 {
            let fac = fac11 / math::powf(self.fac_old, BETA);
            let fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            self.fac_old = err.max(1e-4);
            (true, (h / fac).min(self.max_step))
        } else {
            let fac = (fac11 / SAFETY).min(1.0 / FAC_MIN);
            (false, h / fac)
        }
    }

    /// Starting step from the usual two-derivative estimate.
    pub fn initial_step<F>(&self, f: &F, y: &[f64; N], k1: &[f64; N]) -> f64
    where
        F: Fn(&[f64; N]) -> [f64; N],
    {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            if !self.controlled[i] {
                continue;
            }
            let sc = self.abs_tol + self.rel_tol * math::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (k1[i] / sc) * (k1[i] / sc);
        }
        let h0 = if d0 < 1e-10 || d1 < 1e-10 {
            1e-6
        } else {
            0.01 * math::sqrt(d0 / d1)
        }
        .min(self.max_step);
        let y1 = axpy(y, h0, &[(1.0, k1)]);
        let k2 = f(&y1);
        let mut d2 = 0.0;
        for i in 0..N {
            if !self.controlled[i] {
                continue;
            }
            let sc = self.abs_tol + self.rel_tol * math::abs(y[i]);
            let v = (k2[i] - k1[i]) / sc;
            d2 += v * v;
        }
        let d2 = math::sqrt(d2) / h0;
        let h1 = if math::sqrt(d1).max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            math::powf(0.01 / math::sqrt(d1).max(d2), 0.2)
        };
        (100.0 * h0).min(h1).min(self.max_step)
    }
}
