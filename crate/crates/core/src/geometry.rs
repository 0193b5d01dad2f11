//! Metric quantities for time-like geodesics in Schwarzschild and equatorial
//! Kerr spacetimes: Lagrangians, canonical momenta, constants of motion and
//! the radial on-shell residuals.
//!
//! Geometric units (c = G = 1) throughout. Every on-shell relation is exposed
//! as a signed residual `lhs - rhs` so root finders and the integrator monitor
//! share one contract.
//!
//! Two algebraic forms of the radial equation coexist:
//!
//! * the Schwarzschild form `½[𝓔²/f − ṙ²/f − L²/r²] − ½` with `f = 1 − 2m/r`,
//!   singular at the horizon, and
//! * the horizon-regular Kerr form `½ṙ² + V(r)` whose `a = 0` limit equals
//!   `−f` times the Schwarzschild residual.

use alloc::{format, vec::Vec};
use core::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Half-width of the refused band around a horizon, in units of `m` for the
/// Schwarzschild `|r − 2m|` test and `m²` for the Kerr `|Δ|` test.
pub const HORIZON_GUARD: f64 = 1e-10;

/// Tolerance on `θ − π/2` accepted as "in the invariant plane".
const PLANE_TOLERANCE: f64 = 1e-12;

/// Mass and spin-per-unit-mass of the background spacetime.
///
/// Construction rejects `m ≤ 0` and `|a| > m`; `a = 0` selects Schwarzschild.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct SpacetimeParams {
    mass: f64,
    spin: f64,
}

#[derive(Deserialize)]
struct RawParams {
    mass: f64,
    #[serde(default)]
    spin: f64,
}

impl TryFrom<RawParams> for SpacetimeParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        SpacetimeParams::new(raw.mass, raw.spin)
    }
}

impl SpacetimeParams {
    pub fn new(mass: f64, spin: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mass must be positive and finite, got {mass}"
            )));
        }
        if !spin.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "spin must be finite, got {spin}"
            )));
        }
        if math::abs(spin) > mass {
            return Err(Error::InvalidParameter(format!(
                "spin exceeds mass: |a| = {} > m = {mass}",
                math::abs(spin)
            )));
        }
        Ok(Self { mass, spin })
    }

    pub fn schwarzschild(mass: f64) -> Result<Self> {
        Self::new(mass, 0.0)
    }

    #[inline]
    pub fn mass(&self) -> f64 {
        self.mass
    }

    #[inline]
    pub fn spin(&self) -> f64 {
        self.spin
    }

    #[inline]
    pub fn is_schwarzschild(&self) -> bool {
        self.spin == 0.0
    }

    /// Roots `(r₋, r₊)` of `Δ = r² − 2mr + a²`, i.e. `m ∓ √(m² − a²)`.
    ///
    /// The inner root is formed as `a²/r₊` to avoid cancellation at small spin.
    pub fn horizons(&self) -> (f64, f64) {
        let m = self.mass;
        let a = self.spin;
        let outer = m + math::sqrt((m * m - a * a).max(0.0));
        (a * a / outer, outer)
    }
}

/// Coordinates and proper-time derivatives of one test particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub tau: f64,
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub tdot: f64,
    pub rdot: f64,
    pub thetadot: f64,
    pub phidot: f64,
}

impl GeodesicState {
    /// A state in the `θ = π/2` plane with only `r` and `ṙ` set.
    pub fn equatorial(r: f64, rdot: f64) -> Self {
        Self {
            tau: 0.0,
            t: 0.0,
            r,
            theta: FRAC_PI_2,
            phi: 0.0,
            tdot: 0.0,
            rdot,
            thetadot: 0.0,
            phidot: 0.0,
        }
    }

    pub fn with_rates(mut self, tdot: f64, phidot: f64) -> Self {
        self.tdot = tdot;
        self.phidot = phidot;
        self
    }

    pub fn in_invariant_plane(&self) -> bool {
        math::abs(self.theta - FRAC_PI_2) <= PLANE_TOLERANCE && self.thetadot == 0.0
    }
}

/// The conserved energy 𝓔, angular momentum L and the value of 2𝓛.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsOfMotion {
    pub energy: f64,
    pub angular_momentum: f64,
    pub normalization: f64,
}

impl ConstantsOfMotion {
    /// Time-like constants: `2𝓛 = +1`.
    pub fn timelike(energy: f64, angular_momentum: f64) -> Self {
        Self {
            energy,
            angular_momentum,
            normalization: 1.0,
        }
    }

    /// The `𝓔 = L = 0` family.
    pub fn zero() -> Self {
        Self::timelike(0.0, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.energy == 0.0 && self.angular_momentum == 0.0
    }
}

/// Momenta conjugate to `(t, r, θ, φ)`; the spatial ones carry a minus sign
/// relative to `∂𝓛/∂q̇`, so all four are positive for a forward-moving particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalMomenta {
    pub p_t: f64,
    pub p_r: f64,
    pub p_theta: f64,
    pub p_phi: f64,
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "radius must be positive and finite, got {r}"
        )))
    }
}

fn require_schwarzschild(params: &SpacetimeParams) -> Result<()> {
    if params.is_schwarzschild() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "Schwarzschild form requested with spin a = {}",
            params.spin()
        )))
    }
}

fn require_plane(state: &GeodesicState) -> Result<()> {
    if state.in_invariant_plane() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "state is not in the invariant plane (theta = {}, thetadot = {})",
            state.theta, state.thetadot
        )))
    }
}

/// `1 − 2m/r`, refused inside the horizon guard band.
fn lapse(r: f64, params: &SpacetimeParams) -> Result<f64> {
    check_radius(r)?;
    let m = params.mass();
    if math::abs(r - 2.0 * m) < HORIZON_GUARD * m {
        return Err(Error::Domain(format!(
            "r = {r} is at the coordinate singularity r = 2m"
        )));
    }
    Ok(1.0 - 2.0 * m / r)
}

/// `Δ`, refused inside the horizon guard band.
fn guarded_delta(r: f64, params: &SpacetimeParams) -> Result<f64> {
    check_radius(r)?;
    let delta = kerr_delta(r, params);
    let m = params.mass();
    if math::abs(delta) < HORIZON_GUARD * m * m {
        return Err(Error::Domain(format!(
            "Δ(r = {r}) = {delta:e} vanishes on a horizon"
        )));
    }
    Ok(delta)
}

/// Schwarzschild Lagrangian
/// `𝓛 = ½[(1−2m/r)ṫ² − ṙ²/(1−2m/r) − r²θ̇² − r²sin²θ φ̇²]`.
pub fn schwarzschild_lagrangian(state: &GeodesicState, params: &SpacetimeParams) -> Result<f64> {
    require_schwarzschild(params)?;
    let f = lapse(state.r, params)?;
    let r2 = state.r * state.r;
    let sin_theta = math::sin(state.theta);
    Ok(0.5
        * (f * state.tdot * state.tdot
            - state.rdot * state.rdot / f
            - r2 * state.thetadot * state.thetadot
            - r2 * sin_theta * sin_theta * state.phidot * state.phidot))
}

pub fn canonical_momenta(
    state: &GeodesicState,
    params: &SpacetimeParams,
) -> Result<CanonicalMomenta> {
    require_schwarzschild(params)?;
    let f = lapse(state.r, params)?;
    let r2 = state.r * state.r;
    let sin_theta = math::sin(state.theta);
    Ok(CanonicalMomenta {
        p_t: f * state.tdot,
        p_r: state.rdot / f,
        p_theta: r2 * state.thetadot,
        p_phi: r2 * sin_theta * sin_theta * state.phidot,
    })
}

/// 𝓔, L and 2𝓛 read off an equatorial state.
///
/// With `a = 0` these are `(1−2m/r)ṫ` and `r²φ̇`; with spin the equatorial
/// Kerr momenta `𝓔 = (1−2m/r)ṫ + (2am/r)φ̇` and
/// `L = (r² + a² + 2a²m/r)φ̇ − (2am/r)ṫ` are used.
pub fn constants_from_state(
    state: &GeodesicState,
    params: &SpacetimeParams,
) -> Result<ConstantsOfMotion> {
    require_plane(state)?;
    if params.is_schwarzschild() {
        let momenta = canonical_momenta(state, params)?;
        let lagrangian = schwarzschild_lagrangian(state, params)?;
        return Ok(ConstantsOfMotion {
            energy: momenta.p_t,
            angular_momentum: momenta.p_phi,
            normalization: 2.0 * lagrangian,
        });
    }
    let lagrangian = kerr_lagrangian_equatorial(state, params)?;
    let m = params.mass();
    let a = params.spin();
    let r = state.r;
    let frame_drag = 2.0 * a * m / r;
    let g_phiphi = r * r + a * a + 2.0 * a * a * m / r;
    Ok(ConstantsOfMotion {
        energy: (1.0 - 2.0 * m / r) * state.tdot + frame_drag * state.phidot,
        angular_momentum: g_phiphi * state.phidot - frame_drag * state.tdot,
        normalization: 2.0 * lagrangian,
    })
}

/// `½[𝓔²/f − ṙ²/f − L²/r²] − ½`, zero on the time-like shell.
pub fn radial_residual_schwarzschild(
    r: f64,
    rdot: f64,
    consts: &ConstantsOfMotion,
    params: &SpacetimeParams,
) -> Result<f64> {
    require_schwarzschild(params)?;
    let f = lapse(r, params)?;
    let e = consts.energy;
    let l = consts.angular_momentum;
    Ok(0.5 * (e * e / f - rdot * rdot / f - l * l / (r * r)) - 0.5)
}

/// `½ṙ² + a²/(2r²) − m/r + ½`; regular at every horizon.
pub fn zero_constants_residual(r: f64, rdot: f64, params: &SpacetimeParams) -> Result<f64> {
    check_radius(r)?;
    let m = params.mass();
    let a = params.spin();
    Ok(0.5 * rdot * rdot + a * a / (2.0 * r * r) - m / r + 0.5)
}

/// Equatorial Kerr Lagrangian
/// `½[(1−2m/r)ṫ² + (4am/r)ṫφ̇ − (r²/Δ)ṙ² − ((r²+a²) + 2a²m/r)φ̇²]`.
pub fn kerr_lagrangian_equatorial(state: &GeodesicState, params: &SpacetimeParams) -> Result<f64> {
    require_plane(state)?;
    let delta = guarded_delta(state.r, params)?;
    let m = params.mass();
    let a = params.spin();
    let r = state.r;
    let g_phiphi = (r * r + a * a) + 2.0 * a * a * m / r;
    Ok(0.5
        * ((1.0 - 2.0 * m / r) * state.tdot * state.tdot
            + 4.0 * a * m / r * state.tdot * state.phidot
            - r * r / delta * state.rdot * state.rdot
            - g_phiphi * state.phidot * state.phidot))
}

/// `Δ = r² − 2mr + a²`.
#[inline]
pub fn kerr_delta(r: f64, params: &SpacetimeParams) -> f64 {
    let m = params.mass();
    let a = params.spin();
    r * (r - 2.0 * m) + a * a
}

/// Effective potential `V(r)` of the horizon-regular radial equation
/// `½ṙ² + V(r) = 0`:
/// `V = −m/r + ½(1−𝓔²)(1+a²/r²) + L²/(2r²) − (m/r³)(L−a𝓔)²`.
pub fn radial_potential(r: f64, consts: &ConstantsOfMotion, params: &SpacetimeParams) -> f64 {
    kerr_delta(r, params) / (2.0 * r * r) + constants_potential(r, consts, params)
}

/// The part of `V` that depends on 𝓔 and L,
/// `V − Δ/(2r²) = −½𝓔²(1 + a²/r²) + L²/(2r²) − (m/r³)(L − a𝓔)²`.
fn constants_potential(r: f64, consts: &ConstantsOfMotion, params: &SpacetimeParams) -> f64 {
    let m = params.mass();
    let a = params.spin();
    let e = consts.energy;
    let l = consts.angular_momentum;
    let r2 = r * r;
    let coupling = l - a * e;
    -0.5 * e * e * (1.0 + a * a / r2) + l * l / (2.0 * r2) - m / (r2 * r) * coupling * coupling
}

/// `dV/dr`.
pub fn radial_potential_derivative(
    r: f64,
    consts: &ConstantsOfMotion,
    params: &SpacetimeParams,
) -> f64 {
    let m = params.mass();
    let a = params.spin();
    let e = consts.energy;
    let l = consts.angular_momentum;
    let r2 = r * r;
    let r3 = r2 * r;
    let coupling = l - a * e;
    m / r2 - (1.0 - e * e) * a * a / r3 - l * l / r3 + 3.0 * m * coupling * coupling / (r2 * r2)
}

/// `r̈ = −dV/dr`; for `𝓔 = L = 0` this is `−m/r² + a²/r³`.
#[inline]
pub fn radial_acceleration(r: f64, consts: &ConstantsOfMotion, params: &SpacetimeParams) -> f64 {
    -radial_potential_derivative(r, consts, params)
}

/// `ṙ²` demanded by the shell at radius `r`; negative where the region is forbidden.
///
/// For the zero-constants family this is evaluated as `(r(2m − r) − a²)/r²`,
/// whose sign is exact in floating point when `a = 0`.
pub fn shell_rdot_squared(r: f64, consts: &ConstantsOfMotion, params: &SpacetimeParams) -> f64 {
    if consts.is_zero() {
        let m = params.mass();
        let a = params.spin();
        (r * (2.0 * m - r) - a * a) / (r * r)
    } else {
        -2.0 * radial_potential(r, consts, params)
    }
}

/// `½ṙ² − m/r + ½(1−𝓔²)(1+a²/r²) + L²/(2r²) − (m/r³)(L−a𝓔)²`, zero on-shell.
pub fn radial_residual_kerr(
    r: f64,
    rdot: f64,
    consts: &ConstantsOfMotion,
    params: &SpacetimeParams,
) -> Result<f64> {
    check_radius(r)?;
    Ok(0.5 * rdot * rdot + radial_potential(r, consts, params))
}

/// `(ṫ, φ̇)` implied by the constants of motion at radius `r`.
///
/// Schwarzschild: `ṫ = 𝓔/(1−2m/r)`, `φ̇ = L/r²`. With spin the equatorial
/// momentum relations are inverted; the determinant of that 2×2 block is `Δ`.
/// Zero constants give `(0, 0)` everywhere, including on a horizon.
pub fn coordinate_rates(
    r: f64,
    consts: &ConstantsOfMotion,
    params: &SpacetimeParams,
) -> Result<(f64, f64)> {
    check_radius(r)?;
    if consts.is_zero() {
        return Ok((0.0, 0.0));
    }
    let e = consts.energy;
    let l = consts.angular_momentum;
    if params.is_schwarzschild() {
        let f = lapse(r, params)?;
        return Ok((e / f, l / (r * r)));
    }
    let delta = guarded_delta(r, params)?;
    let m = params.mass();
    let a = params.spin();
    let frame_drag = 2.0 * a * m / r;
    let g_phiphi = r * r + a * a + 2.0 * a * a * m / r;
    let tdot = (g_phiphi * e - frame_drag * l) / delta;
    let phidot = ((1.0 - 2.0 * m / r) * l + frame_drag * e) / delta;
    Ok((tdot, phidot))
}

/// The value of 2𝓛 for the equatorial state at `(r, ṙ)` whose `ṫ, φ̇` follow
/// from `consts`.
///
/// Writing `V = Δ/(2r²) + W` with `W` the constants-dependent part, the metric
/// Lagrangian reduces to `2𝓛 = −r²(ṙ² + 2W)/Δ`. For `𝓔 = L = 0` this is
/// `−r²ṙ²/Δ`, a ratio of two small quantities that are each computed to full
/// relative precision near the roots of `Δ`. Inside the horizon guard band
/// `1 − (ṙ² + 2V)` is returned instead.
pub fn shell_normalization(
    r: f64,
    rdot: f64,
    consts: &ConstantsOfMotion,
    params: &SpacetimeParams,
) -> f64 {
    let delta = kerr_delta(r, params);
    let w = constants_potential(r, consts, params);
    let m = params.mass();
    if math::abs(delta) < HORIZON_GUARD * m * m {
        1.0 - (rdot * rdot + 2.0 * (delta / (2.0 * r * r) + w))
    } else {
        -r * r * (rdot * rdot + 2.0 * w) / delta
    }
}

/// Number of log-spaced grid nodes used to bracket turning points.
const TURNING_GRID: usize = 4000;
/// Relative bracket width at which bisection stops.
const TURNING_REL_TOL: f64 = 1e-12;

/// Sorted positive radii where `ṙ = 0` on the shell, searched over
/// `[1e−6·m, 1e3·m]`.
///
/// Simple roots are bracketed by sign changes of `V`; double roots (where `V`
/// only touches zero, e.g. the extremal-Kerr horizon) are found as sign
/// changes of `V'` at which `V` vanishes to rounding. For `𝓔 = L = 0` the
/// result is the set of roots of `Δ`.
pub fn turning_points(consts: &ConstantsOfMotion, params: &SpacetimeParams) -> Vec<f64> {
    let m = params.mass();
    let lo = 1e-6 * m;
    let hi = 1e3 * m;
    let ratio = math::ln(hi / lo) / (TURNING_GRID - 1) as f64;
    let node = |i: usize| lo * math::exp(ratio * i as f64);

    let potential = |r: f64| radial_potential(r, consts, params);
    let slope = |r: f64| radial_potential_derivative(r, consts, params);

    let radii: Vec<f64> = (0..TURNING_GRID).map(node).collect();
    let values: Vec<f64> = radii.iter().map(|&r| potential(r)).collect();
    let slopes: Vec<f64> = radii.iter().map(|&r| slope(r)).collect();
    // values within rounding of zero get sign 0
    let signs: Vec<i8> = radii
        .iter()
        .zip(&values)
        .map(|(&r, &v)| {
            if math::abs(v) <= touch_tolerance(r, consts, params) {
                0
            } else if v < 0.0 {
                -1
            } else {
                1
            }
        })
        .collect();

    let mut roots: Vec<f64> = Vec::new();
    let last = TURNING_GRID - 1;
    for i in 0..TURNING_GRID {
        if signs[i] == 0 {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(last));
            let root = if signs[a] * signs[b] < 0 {
                bisect(&potential, radii[a], radii[b])
            } else if slopes[a] * slopes[b] < 0.0 {
                bisect(&slope, radii[a], radii[b])
            } else {
                radii[i]
            };
            roots.push(root);
            continue;
        }
        if i == 0 || signs[i - 1] == 0 {
            continue;
        }
        if signs[i - 1] != signs[i] {
            roots.push(bisect(&potential, radii[i - 1], radii[i]));
        } else if slopes[i - 1] * slopes[i] < 0.0 {
            let extremum = bisect(&slope, radii[i - 1], radii[i]);
            if math::abs(potential(extremum)) <= touch_tolerance(extremum, consts, params) {
                roots.push(extremum);
            }
        }
    }

    roots.sort_by(|x, y| x.total_cmp(y));
    roots.dedup_by(|later, kept| math::abs(*later - *kept) <= 1e-9 * *kept);
    roots
}

/// Rounding-level bound on `|V(r)|` given the magnitudes of its terms.
fn touch_tolerance(r: f64, consts: &ConstantsOfMotion, params: &SpacetimeParams) -> f64 {
    let m = params.mass();
    let a = params.spin();
    let e = consts.energy;
    let l = consts.angular_momentum;
    let r2 = r * r;
    let coupling = l - a * e;
    let scale = m / r
        + 0.5 * math::abs(1.0 - e * e) * (1.0 + a * a / r2)
        + l * l / (2.0 * r2)
        + m / (r2 * r) * coupling * coupling;
    64.0 * f64::EPSILON * scale
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= TURNING_REL_TOL * mid || mid == lo || mid == hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
