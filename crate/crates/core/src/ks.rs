//! The Kustaanheimo–Stiefel map between four-dimensional coordinates `s`
//! and three-dimensional Euclidean coordinates `x`.
//!
//! Positions map as `X = A(s)·S` and velocities as `Ẋ = A(s)·Ṡ / (2s²)`,
//! with `X = (x₁, x₂, x₃, 0)`. The two laws are independent maps; neither
//! is the time derivative of the other. Because `Ã·A = s²·1`, `r = s²`
//! and, on the bilinear-constraint subspace, `v² = ṡ²/(4s²)`. Those two
//! identities carry the Kepler energy shell `½v² − m/r = −½` onto the
//! oscillator shell `⅛ṡ² + ½s² = m`.

use alloc::format;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

pub type Vec3 = [f64; 3];
pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

/// A position/velocity pair on the three-dimensional Kepler side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3State {
    pub x: Vec3,
    pub v: Vec3,
}

/// A phase point on the oscillator side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsState {
    pub s: Vec4,
    pub sdot: Vec4,
}

impl KsState {
    pub fn s_squared(&self) -> f64 {
        norm_sq4(&self.s)
    }

    pub fn sdot_squared(&self) -> f64 {
        norm_sq4(&self.sdot)
    }
}

#[inline]
pub(crate) fn norm_sq4(v: &Vec4) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]
}

#[inline]
fn norm_sq3(v: &Vec3) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

fn mat_vec(a: &Mat4, v: &Vec4) -> Vec4 {
    let mut out = [0.0; 4];
    for (row, o) in a.iter().zip(out.iter_mut()) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
    }
    out
}

fn mat_t_vec(a: &Mat4, v: &Vec4) -> Vec4 {
    let mut out = [0.0; 4];
    for (j, o) in out.iter_mut().enumerate() {
        *o = a[0][j] * v[0] + a[1][j] * v[1] + a[2][j] * v[2] + a[3][j] * v[3];
    }
    out
}

/// The KS matrix
///
/// ```text
/// | s3  -s4   s1  -s2 |
/// | s4   s3   s2   s1 |
/// | s1   s2  -s3  -s4 |
/// | s2  -s1  -s4   s3 |
/// ```
pub fn ks_matrix(s: &Vec4) -> Mat4 {
    let [s1, s2, s3, s4] = *s;
    [
        [s3, -s4, s1, -s2],
        [s4, s3, s2, s1],
        [s1, s2, -s3, -s4],
        [s2, -s1, -s4, s3],
    ]
}

/// `x = (A(s)·s)₁..₃`, i.e. `(2(s₁s₃ − s₂s₄), 2(s₁s₄ + s₂s₃), s₁² + s₂² − s₃² − s₄²)`.
pub fn ks_forward_position(s: &Vec4) -> Vec3 {
    forward_position_with(ks_matrix, s)
}

pub(crate) fn forward_position_with(matrix: fn(&Vec4) -> Mat4, s: &Vec4) -> Vec3 {
    let full = mat_vec(&matrix(s), s);
    assert!(
        math::abs(full[3]) <= 1e-12 * norm_sq4(s).max(f64::MIN_POSITIVE),
        "fourth component of A(s)s must vanish, got {}",
        full[3]
    );
    [full[0], full[1], full[2]]
}

/// Image of `ṡ` under the velocity law together with the fourth component
/// of `A(s)·ṡ`, the bilinear form `s₂ṡ₁ − s₁ṡ₂ − s₄ṡ₃ + s₃ṡ₄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityImage {
    pub xdot: Vec3,
    pub bilinear: f64,
}

/// `ẋ = (A(s)·ṡ)₁..₃ / (2s²)`.
///
/// The bilinear form is returned rather than asserted: it vanishes for every
/// `ṡ` produced by [`ks_inverse_velocity`], and when it does not,
/// `|ẋ|² + bilinear²/(4s⁴) = ṡ²/(4s²)`.
pub fn ks_forward_velocity(s: &Vec4, sdot: &Vec4) -> Result<VelocityImage> {
    forward_velocity_with(ks_matrix, s, sdot)
}

pub(crate) fn forward_velocity_with(
    matrix: fn(&Vec4) -> Mat4,
    s: &Vec4,
    sdot: &Vec4,
) -> Result<VelocityImage> {
    let s2 = norm_sq4(s);
    if s2 == 0.0 {
        return Err(Error::Domain("velocity law undefined at s = 0".into()));
    }
    let full = mat_vec(&matrix(s), sdot);
    let scale = 1.0 / (2.0 * s2);
    Ok(VelocityImage {
        xdot: [full[0] * scale, full[1] * scale, full[2] * scale],
        bilinear: full[3],
    })
}

/// The bilinear form `s₂ṡ₁ − s₁ṡ₂ − s₄ṡ₃ + s₃ṡ₄`.
pub fn bilinear_form(s: &Vec4, sdot: &Vec4) -> f64 {
    s[1] * sdot[0] - s[0] * sdot[1] - s[3] * sdot[2] + s[2] * sdot[3]
}

/// Removes the bilinear-form component from `sdot`.
pub fn project_onto_constraint(s: &Vec4, sdot: &Vec4) -> Vec4 {
    let s2 = norm_sq4(s);
    if s2 == 0.0 {
        return *sdot;
    }
    let b = [s[1], -s[0], -s[3], s[2]];
    let c = bilinear_form(s, sdot) / s2;
    [
        sdot[0] - c * b[0],
        sdot[1] - c * b[1],
        sdot[2] - c * b[2],
        sdot[3] - c * b[3],
    ]
}

/// A preimage `s` of `x` with `s² = |x|`; `phase` selects the point on the
/// circle of preimages.
///
/// Writing `z₁ = s₁ + i s₂`, `z₂ = s₃ + i s₄`, the forward map reads
/// `x₁ + i x₂ = 2 z₁ z₂`, `x₃ = |z₁|² − |z₂|²`. For `x₃ ≥ 0` the modulus of
/// `z₁` is fixed and `z₂` solved for; otherwise the roles swap, so the
/// division is always by `r + |x₃| ≥ r`.
pub fn ks_inverse_position(x: &Vec3, phase: f64) -> Result<Vec4> {
    let r = math::sqrt(norm_sq3(x));
    if r == 0.0 {
        return Err(Error::Domain("KS inverse undefined at x = 0".into()));
    }
    let (c, sn) = (math::cos(phase), math::sin(phase));
    let [x1, x2, x3] = *x;
    if x3 >= 0.0 {
        let rho = math::sqrt(0.5 * (r + x3));
        let (s1, s2) = (rho * c, rho * sn);
        let d = r + x3;
        Ok([s1, s2, (x1 * s1 + x2 * s2) / d, (x2 * s1 - x1 * s2) / d])
    } else {
        let rho = math::sqrt(0.5 * (r - x3));
        let (s3, s4) = (rho * c, rho * sn);
        let d = r - x3;
        Ok([(x1 * s3 + x2 * s4) / d, (x2 * s3 - x1 * s4) / d, s3, s4])
    }
}

/// `ṡ = 2·Ã(s)·Ẋ` with `Ẋ = (ẋ₁, ẋ₂, ẋ₃, 0)`, the exact inverse of the
/// velocity law since `A⁻¹ = Ã/s²`.
pub fn ks_inverse_velocity(s: &Vec4, xdot: &Vec3) -> Result<Vec4> {
    if norm_sq4(s) == 0.0 {
        return Err(Error::Domain("velocity law undefined at s = 0".into()));
    }
    let big_x = [xdot[0], xdot[1], xdot[2], 0.0];
    let out = mat_t_vec(&ks_matrix(s), &big_x);
    Ok([2.0 * out[0], 2.0 * out[1], 2.0 * out[2], 2.0 * out[3]])
}

/// `½v² − m/r + ½`, zero on the Kepler shell of the zero-constants geodesic.
pub fn kepler_shell_residual(state: &Vec3State, mass: f64) -> f64 {
    let r = math::sqrt(norm_sq3(&state.x));
    0.5 * norm_sq3(&state.v) - mass / r + 0.5
}

/// Absolute tolerance on the Kepler shell, scaled by `max(1, m/r)`.
pub const SHELL_TOLERANCE: f64 = 1e-10;

/// Lifts an on-shell Kepler state to the oscillator side.
pub fn kepler_to_oscillator(state: &Vec3State, mass: f64, phase: f64) -> Result<KsState> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mass must be positive, got {mass}"
        )));
    }
    let r = math::sqrt(norm_sq3(&state.x));
    if r == 0.0 {
        return Err(Error::Domain("Kepler state at the origin".into()));
    }
    let residual = kepler_shell_residual(state, mass);
    let tolerance = SHELL_TOLERANCE * (mass / r).max(1.0);
    if !(math::abs(residual) <= tolerance) {
        return Err(Error::OffShell {
            residual,
            tolerance,
        });
    }
    let s = ks_inverse_position(&state.x, phase)?;
    let sdot = ks_inverse_velocity(&s, &state.v)?;
    Ok(KsState { s, sdot })
}

/// Euclidean embedding `x = r(sinθ cosφ, sinθ sinφ, cosθ)` with a purely
/// radial velocity `v = ṙ·x̂`.
pub fn spherical_embedding(r: f64, theta_in: f64, phi_in: f64, rdot: f64) -> Vec3State {
    let (st, ct) = (math::sin(theta_in), math::cos(theta_in));
    let (sp, cp) = (math::sin(phi_in), math::cos(phi_in));
    let unit = [st * cp, st * sp, ct];
    Vec3State {
        x: [r * unit[0], r * unit[1], r * unit[2]],
        v: [rdot * unit[0], rdot * unit[1], rdot * unit[2]],
    }
}

/// Residuals of the pointwise KS identities at one `(s, ṡ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `‖s⁻²·Ã·A − 1‖_∞` (maximum absolute row sum).
    pub orthogonality: f64,
    /// `| |x| − s² | / s²`.
    pub position_norm: f64,
    /// `| |ẋ|² − ṡ²/(4s²) | / (ṡ²/(4s²))`, for `ṡ` on the constraint subspace.
    pub velocity_norm: f64,
}

/// Evaluates the identities with the supplied matrix constructor, so a
/// corrupted matrix can be checked against the same contract.
pub fn identity_residuals_with(
    matrix: fn(&Vec4) -> Mat4,
    s: &Vec4,
    sdot: &Vec4,
) -> Result<IdentityResiduals> {
    let s2 = norm_sq4(s);
    if s2 == 0.0 {
        return Err(Error::Domain("identities need s ≠ 0".into()));
    }
    let a = matrix(s);
    let mut orthogonality: f64 = 0.0;
    for i in 0..4 {
        let mut row = 0.0;
        for j in 0..4 {
            let dot = a[0][i] * a[0][j] + a[1][i] * a[1][j] + a[2][i] * a[2][j] + a[3][i] * a[3][j];
            let target = if i == j { 1.0 } else { 0.0 };
            row += math::abs(dot / s2 - target);
        }
        orthogonality = orthogonality.max(row);
    }

    let full = mat_vec(&a, s);
    let x = [full[0], full[1], full[2]];
    let position_norm = math::abs(math::sqrt(norm_sq3(&x)) - s2) / s2;

    let image = forward_velocity_with(matrix, s, sdot)?;
    let expected = norm_sq4(sdot) / (4.0 * s2);
    let velocity_norm = if expected > 0.0 {
        math::abs(norm_sq3(&image.xdot) - expected) / expected
    } else {
        math::abs(norm_sq3(&image.xdot))
    };

    Ok(IdentityResiduals {
        orthogonality,
        position_norm,
        velocity_norm,
    })
}

pub fn identity_residuals(s: &Vec4, sdot: &Vec4) -> Result<IdentityResiduals> {
    identity_residuals_with(ks_matrix, s, sdot)
}
