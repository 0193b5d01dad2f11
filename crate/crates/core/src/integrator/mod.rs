//! Proper-time propagation of equatorial radial geodesics.
//!
//! The radial motion is integrated in its second-order form
//! `r̈ = −dV/dr` so `ṙ` passes smoothly through zero at turning points.
//! Coordinate time and azimuth are carried along as quadratures of
//! `ṫ(r)` and `φ̇(r)` and do not take part in step-size control.

mod dopri;

use alloc::{format, string::String, vec::Vec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, ConstantsOfMotion, GeodesicState, SpacetimeParams, HORIZON_GUARD};
use crate::math;
use crate::quadrature;

use dopri::{trial_step, Controller, Trial};

/// Largest negative `ṙ²` at the start point that is treated as rounding.
const SHELL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Infall,
    Outfall,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Infall => -1.0,
            Direction::Outfall => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest proper-time step.
    pub max_step: f64,
    /// Integration stops once `r` falls to this radius.
    pub terminal_radius: f64,
    pub direction: Direction,
    /// Proper-time budget; `None` means run until another event fires.
    pub max_tau: Option<f64>,
    /// Stop at the first turning point reached after the start.
    pub stop_at_turning_point: bool,
    pub max_steps: usize,
    /// Project each accepted step back onto the on-shell surface.
    pub project: bool,
}

impl IntegrationConfig {
    /// Defaults scaled to the mass: `terminal_radius = 1e−6·m`.
    pub fn for_mass(mass: f64) -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14 * mass,
            max_step: 0.5 * mass,
            terminal_radius: 1e-6 * mass,
            direction: Direction::Infall,
            max_tau: None,
            stop_at_turning_point: true,
            max_steps: 2_000_000,
            project: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be positive (rel_tol = {}, abs_tol = {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if !positive(self.max_step) {
            return Err(Error::InvalidParameter(format!(
                "max_step must be positive, got {}",
                self.max_step
            )));
        }
        if !(self.terminal_radius >= 0.0 && self.terminal_radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "terminal_radius must be non-negative, got {}",
                self.terminal_radius
            )));
        }
        if let Some(t) = self.max_tau {
            if !(t >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "max_tau must be non-negative, got {t}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TurningPoint,
    TerminalRadius,
    MaxTau,
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub state: GeodesicState,
    /// Horizon-regular on-shell residual `½ṙ² + V(r)`.
    pub residual: f64,
    /// 2𝓛 at this sample.
    pub normalization: f64,
}

/// A located `ṙ = 0` crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningEvent {
    pub tau: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: SpacetimeParams,
    pub constants: ConstantsOfMotion,
    pub samples: Vec<Sample>,
    /// `max |2𝓛 − 1|` over the samples.
    pub max_normalization_drift: f64,
    pub termination: Termination,
    pub turning_events: Vec<TurningEvent>,
    /// Proper time at which a horizon was crossed with non-zero constants;
    /// coordinate time (and, with spin, azimuth) is undefined afterwards.
    pub horizon_crossing_tau: Option<f64>,
}

impl Trajectory {
    pub fn tau_span(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.state.tau - a.state.tau,
            _ => 0.0,
        }
    }

    pub fn final_state(&self) -> &GeodesicState {
        &self
            .samples
            .last()
            .expect("trajectory has at least one sample")
            .state
    }

    /// Largest deviation of 𝓔 and L recomputed from the samples.
    ///
    /// Samples inside the horizon guard band, where the momenta are
    /// undefined, are skipped.
    pub fn constants_drift(&self) -> f64 {
        self.samples
            .iter()
            .filter_map(|s| geometry::constants_from_state(&s.state, &self.params).ok())
            .map(|c| {
                math::abs(c.energy - self.constants.energy).max(math::abs(
                    c.angular_momentum - self.constants.angular_momentum,
                ))
            })
            .fold(0.0, f64::max)
    }

    pub fn min_radius(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.state.r)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.state.r)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Infall (or outfall) on the `𝓔 = L = 0` shell `½ṙ² + a²/(2r²) − m/r = −½`.
///
/// `r0` must lie in the region where that shell admits `ṙ² ≥ 0`: `0 < r0 ≤ 2m`
/// for Schwarzschild, between the roots of `Δ` with spin.
pub fn integrate_zero_constants(
    params: &SpacetimeParams,
    r0: f64,
    config: &IntegrationConfig,
) -> Result<Trajectory> {
    let (inner, outer) = params.horizons();
    let slack = 1e-12 * params.mass();
    if !(r0 > 0.0 && r0 >= inner - slack && r0 <= outer + slack) {
        return Err(Error::Precondition(format!(
            "r0 = {r0} outside the admissible region [{inner}, {outer}] of the zero-constants shell"
        )));
    }
    let consts = ConstantsOfMotion::zero();
    let rdot0 = initial_rdot(params, &consts, r0, config.direction.sign())?;
    propagate(params, consts, r0, rdot0, config)
}

/// Radial motion for general constants. `ṙ₀` is solved from the shell and
/// given the sign of `rdot_sign`.
pub fn integrate_general(
    params: &SpacetimeParams,
    consts: &ConstantsOfMotion,
    r0: f64,
    rdot_sign: f64,
    config: &IntegrationConfig,
) -> Result<Trajectory> {
    if rdot_sign != 1.0 && rdot_sign != -1.0 {
        return Err(Error::Precondition(format!(
            "rdot_sign must be ±1, got {rdot_sign}"
        )));
    }
    if consts.normalization != 1.0 {
        return Err(Error::Precondition(format!(
            "time-like geodesics need 2L = 1, got {}",
            consts.normalization
        )));
    }
    if !consts.is_zero() {
        let m = params.mass();
        if math::abs(geometry::kerr_delta(r0, params)) < HORIZON_GUARD * m * m {
            return Err(Error::Domain(format!(
                "coordinate-time equation requested on a horizon at r0 = {r0}"
            )));
        }
    }
    let rdot0 = initial_rdot(params, consts, r0, rdot_sign)?;
    propagate(params, *consts, r0, rdot0, config)
}

fn initial_rdot(
    params: &SpacetimeParams,
    consts: &ConstantsOfMotion,
    r0: f64,
    sign: f64,
) -> Result<f64> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::Precondition(format!(
            "r0 must be positive, got {r0}"
        )));
    }
    let rdot2 = geometry::shell_rdot_squared(r0, consts, params);
    if rdot2 < -SHELL_TOLERANCE {
        return Err(Error::OffShell {
            residual: -0.5 * rdot2,
            tolerance: SHELL_TOLERANCE,
        });
    }
    let rdot0 = math::copysign(math::sqrt(rdot2.max(0.0)), sign);
    let residual = geometry::radial_residual_kerr(r0, rdot0, consts, params)?;
    if math::abs(residual) > SHELL_TOLERANCE {
        return Err(Error::OffShell {
            residual,
            tolerance: SHELL_TOLERANCE,
        });
    }
    Ok(rdot0)
}

/// State vector `[r, ṙ, t, φ]`.
type Phase = [f64; 4];

struct Propagator<'a> {
    params: &'a SpacetimeParams,
    consts: ConstantsOfMotion,
}

impl Propagator<'_> {
    fn rates(&self, r: f64) -> (f64, f64) {
        geometry::coordinate_rates(r, &self.consts, self.params).unwrap_or((f64::NAN, f64::NAN))
    }

    fn rhs(&self, y: &Phase) -> Phase {
        let r = y[0];
        let (tdot, phidot) = self.rates(r);
        // passive quadratures stay finite inside the guard band
        let finite = |v: f64| if v.is_finite() { v } else { 0.0 };
        [
            y[1],
            geometry::radial_acceleration(r, &self.consts, self.params),
            finite(tdot),
            finite(phidot),
        ]
    }

    fn sample(&self, tau: f64, y: &Phase, coords_defined: bool) -> Sample {
        let (r, rdot) = (y[0], y[1]);
        let (tdot, phidot) = self.rates(r);
        let mut state = GeodesicState::equatorial(r, rdot).with_rates(tdot, phidot);
        state.tau = tau;
        state.t = if coords_defined { y[2] } else { f64::NAN };
        state.phi = if coords_defined || self.params.is_schwarzschild() {
            y[3]
        } else {
            f64::NAN
        };
        Sample {
            state,
            residual: 0.5 * rdot * rdot + geometry::radial_potential(r, &self.consts, self.params),
            normalization: geometry::shell_normalization(r, rdot, &self.consts, self.params),
        }
    }

    /// Pulls `(r, ṙ)` back onto `½ṙ² + V(r) = 0`. Away from turning points
    /// only `ṙ` is rescaled; near them, where that is ill-conditioned, a
    /// Newton step along the gradient moves `r` as well. Returns whether the
    /// state changed.
    fn project(&self, y: &mut Phase) -> bool {
        let residual = |y: &Phase| {
            0.5 * y[1] * y[1] + geometry::radial_potential(y[0], &self.consts, self.params)
        };
        let before = *y;
        let mut res = residual(y);
        if res == 0.0 {
            return false;
        }
        let target = y[1] * y[1] - 2.0 * res;
        if target > 0.0 && y[1] * y[1] > 4.0 * math::abs(res) {
            y[1] = math::copysign(math::sqrt(target), y[1]);
        } else {
            for _ in 0..4 {
                let slope = geometry::radial_potential_derivative(y[0], &self.consts, self.params);
                let norm = slope * slope + y[1] * y[1];
                if norm == 0.0 || res == 0.0 {
                    break;
                }
                let lambda = res / norm;
                y[0] -= lambda * slope;
                y[1] -= lambda * y[1];
                res = residual(y);
            }
        }
        *y != before
    }

    fn delta_sign(&self, r: f64) -> bool {
        geometry::kerr_delta(r, self.params) < 0.0
    }
}

#[derive(Clone, Copy)]
enum Event {
    Terminal,
    Turning,
}

fn propagate(
    params: &SpacetimeParams,
    consts: ConstantsOfMotion,
    r0: f64,
    rdot0: f64,
    config: &IntegrationConfig,
) -> Result<Trajectory> {
    config.validate()?;
    let prop = Propagator { params, consts };
    let f = |y: &Phase| prop.rhs(y);

    let mut ctl = Controller::new(
        config.rel_tol,
        config.abs_tol,
        [true, true, false, false],
        config.max_step,
    );

    let mut tau = 0.0;
    let mut y: Phase = [r0, rdot0, 0.0, 0.0];
    let mut k = f(&y);
    let mut coords_defined = true;
    let start_inside = prop.delta_sign(r0);
    let mut horizon_crossing_tau = None;

    let mut samples = Vec::new();
    samples.push(prop.sample(tau, &y, coords_defined));
    let mut turning_events = Vec::new();

    let max_tau = config.max_tau.unwrap_or(f64::INFINITY);
    if max_tau == 0.0 {
        return Ok(finish(
            params,
            consts,
            samples,
            Termination::MaxTau,
            turning_events,
            None,
        ));
    }
    if r0 <= config.terminal_radius {
        return Ok(finish(
            params,
            consts,
            samples,
            Termination::TerminalRadius,
            turning_events,
            None,
        ));
    }

    let mut h = ctl.initial_step(&f, &y, &k);
    let mut steps = 0usize;
    let termination = loop {
        steps += 1;
        if steps > config.max_steps {
            return Err(Error::StepFailure {
                tau,
                reason: format!("exceeded {} steps", config.max_steps),
            });
        }
        let remaining = max_tau - tau;
        let clipped = h >= remaining;
        let h_try = if clipped { remaining } else { h };
        if !(h_try > 4.0 * f64::EPSILON * math::abs(tau).max(params.mass() * 1e-12)) {
            return Err(Error::StepFailure {
                tau,
                reason: format!("step size underflow (h = {h_try:e}) at r = {}", y[0]),
            });
        }

        let trial = trial_step(&f, &y, &k, h_try);
        let err = ctl.error_norm(&y, &trial);
        let (accepted, next) = ctl.propose(h_try, err);
        if !accepted {
            h = next;
            continue;
        }

        // earliest event inside the accepted step
        let mut event: Option<(Event, f64, Trial<4>)> = None;
        if trial.y[0] <= config.terminal_radius {
            let (h_star, t) = locate(&f, &y, &k, h_try, 0, config.terminal_radius);
            event = Some((Event::Terminal, h_star, t));
        }
        let crosses = (y[1] < 0.0 && trial.y[1] > 0.0)
            || (y[1] > 0.0 && trial.y[1] < 0.0)
            || (y[1] != 0.0 && trial.y[1] == 0.0);
        if crosses {
            let (h_star, t) = locate(&f, &y, &k, h_try, 1, 0.0);
            if event.as_ref().is_none_or(|(_, h_prev, _)| h_star < *h_prev) {
                event = Some((Event::Turning, h_star, t));
            }
        }

        let (step, y_new, k_new) = match &event {
            Some((_, h_star, t)) => (*h_star, t.y, t.k_end),
            None => (h_try, trial.y, trial.k_end),
        };
        tau += step;
        y = y_new;
        k = k_new;
        if let Some((Event::Turning, _, _)) = event {
            // the located root has |ṙ| at rounding level; pin it so the
            // next step does not re-detect the same crossing
            y[1] = 0.0;
        }
        if config.project && prop.project(&mut y) {
            k = f(&y);
        } else if let Some((Event::Turning, _, _)) = event {
            k = f(&y);
        }

        if coords_defined && !consts.is_zero() && prop.delta_sign(y[0]) != start_inside {
            coords_defined = false;
            horizon_crossing_tau = Some(tau);
        }
        samples.push(prop.sample(tau, &y, coords_defined));

        match event {
            Some((Event::Terminal, _, _)) => break Termination::TerminalRadius,
            Some((Event::Turning, _, _)) => {
                turning_events.push(TurningEvent { tau, r: y[0] });
                if config.stop_at_turning_point {
                    break Termination::TurningPoint;
                }
                h = next.min(h_try);
            }
            None => {
                if clipped {
                    break Termination::MaxTau;
                }
                h = next;
            }
        }
    };

    Ok(finish(
        params,
        consts,
        samples,
        termination,
        turning_events,
        horizon_crossing_tau,
    ))
}

fn finish(
    params: &SpacetimeParams,
    consts: ConstantsOfMotion,
    samples: Vec<Sample>,
    termination: Termination,
    turning_events: Vec<TurningEvent>,
    horizon_crossing_tau: Option<f64>,
) -> Trajectory {
    let max_normalization_drift = samples
        .iter()
        .map(|s| math::abs(s.normalization - 1.0))
        .fold(0.0, f64::max);
    Trajectory {
        params: *params,
        constants: consts,
        samples,
        max_normalization_drift,
        termination,
        turning_events,
        horizon_crossing_tau,
    }
}

/// Finds the sub-step `h* ∈ (0, h]` at which component `index` of the RK
/// solution equals `target`, by Illinois regula falsi on the step length.
fn locate<F>(f: &F, y: &Phase, k: &Phase, h: f64, index: usize, target: f64) -> (f64, Trial<4>)
where
    F: Fn(&Phase) -> Phase,
{
    let g = |h: f64| -> (f64, Trial<4>) {
        let t = trial_step(f, y, k, h);
        (t.y[index] - target, t)
    };
    let mut lo = 0.0;
    let mut g_lo = y[index] - target;
    let (mut g_hi, mut best) = g(h);
    let mut hi = h;
    if g_hi == 0.0 {
        return (hi, best);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
        let mut mid = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let (g_mid, t) = g(mid);
        if g_mid == 0.0 {
            return (mid, t);
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            g_hi = g_mid;
            best = t;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
    }
    (hi, best)
}

/// Proper time to fall from `r0` to the centre along the `𝓔 = L = 0`
/// Schwarzschild shell, `∫₀^{r0} dr / √(2m/r − 1)`.
///
/// The substitution `r = r0·sin²θ` removes the endpoint singularity at
/// `r0 = 2m`; the result is then an ordinary adaptive Gauss–Kronrod integral.
pub fn proper_time_to_center(params: &SpacetimeParams, r0: f64) -> Result<f64> {
    if !params.is_schwarzschild() {
        return Err(Error::Precondition(format!(
            "proper_time_to_center needs a = 0, got {}",
            params.spin()
        )));
    }
    let m = params.mass();
    if !(r0 > 0.0 && r0 <= 2.0 * m) {
        return Err(Error::Precondition(format!(
            "r0 = {r0} outside (0, 2m] with m = {m}"
        )));
    }
    let gap = 2.0 * m - r0;
    let scale = 2.0 * r0 * math::sqrt(r0);
    let integrand = |theta: f64| {
        let (s, c) = (math::sin(theta), math::cos(theta));
        scale * s * s * c / math::sqrt(gap + r0 * c * c)
    };
    let out = quadrature::gauss_kronrod(integrand, 0.0, core::f64::consts::FRAC_PI_2, 1e-14, 1e-14)
        .map_err(|e| Error::Precondition(String::from(e)))?;
    Ok(out)
}
