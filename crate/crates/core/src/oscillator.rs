//! The four-dimensional isotropic oscillator reached through the KS map:
//! classical energy, a finite-difference spectrum and uncertainty products.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ks::{norm_sq4, KsState};
use crate::math;
use crate::tridiag;

/// Oscillator constants `m_ho = ¼`, `ω = 2` in four dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    m_ho: f64,
    omega: f64,
    dims: usize,
}

impl OscillatorParams {
    pub const KS: Self = Self {
        m_ho: 0.25,
        omega: 2.0,
        dims: 4,
    };

    pub fn m_ho(&self) -> f64 {
        self.m_ho
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Coefficient `1/(2m_ho)` of the kinetic term.
    fn kinetic(&self) -> f64 {
        0.5 / self.m_ho
    }

    /// Coefficient `½m_hoω²` of the potential term.
    fn stiffness(&self) -> f64 {
        0.5 * self.m_ho * self.omega * self.omega
    }
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self::KS
    }
}

/// Symmetric 1D grid `s_i = −L + i·h`, `h = 2L/(N−1)`, with Dirichlet
/// nodes at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridSpec {
    half_width: f64,
    points: usize,
}

#[derive(Deserialize)]
struct RawGrid {
    half_width: f64,
    points: usize,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        GridSpec::new(raw.half_width, raw.points)
    }
}

impl GridSpec {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid half-width must be positive, got {half_width}"
            )));
        }
        if points < 3 || points.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "grid point count must be odd and at least 3, got {points}"
            )));
        }
        Ok(Self { half_width, points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    /// Coordinates of the `N − 2` interior nodes.
    pub fn interior_nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (1..self.points - 1)
            .map(|i| -self.half_width + i as f64 * h)
            .collect()
    }
}

/// Squared amplitude allowed on the nodes next to the walls.
pub const BOUNDARY_DECAY: f64 = 1e-8;

/// `½·m_ho·ṡ² + ½·m_ho·ω²·s²`.
pub fn classical_energy(ks: &KsState, params: &OscillatorParams) -> f64 {
    0.5 * params.m_ho * norm_sq4(&ks.sdot) + params.stiffness() * norm_sq4(&ks.s)
}

/// A finite-difference eigenpair; `vector` holds the interior nodes and has
/// unit discrete norm `Σψᵢ² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenstate {
    pub energy: f64,
    pub vector: Vec<f64>,
}

fn hamiltonian(grid: &GridSpec, params: &OscillatorParams) -> (Vec<f64>, Vec<f64>) {
    let h = grid.spacing();
    let a = params.kinetic() / (h * h);
    let k = params.stiffness();
    let diag = grid
        .interior_nodes()
        .iter()
        .map(|s| 2.0 * a + k * s * s)
        .collect();
    let off = alloc::vec![-a; grid.points - 3];
    (diag, off)
}

fn check_count(grid: &GridSpec, count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::Precondition(
            "at least one eigenvalue must be requested".into(),
        ));
    }
    if count > grid.points / 4 {
        return Err(Error::GridTooSmall(format!(
            "{count} levels requested but a {}-point grid resolves at most {}",
            grid.points,
            grid.points / 4
        )));
    }
    Ok(())
}

/// Lowest `count` eigenpairs of `−(1/(2m_ho))d²/ds² + ½m_hoω²s²` on the
/// three-point stencil, after checking every returned state has decayed at
/// the walls.
pub fn fd_eigenstates_1d(
    grid: &GridSpec,
    params: &OscillatorParams,
    count: usize,
) -> Result<Vec<Eigenstate>> {
    check_count(grid, count)?;
    let (diag, off) = hamiltonian(grid, params);
    let energies = tridiag::lowest_eigenvalues(&diag, &off, count);
    let mut states = Vec::with_capacity(count);
    for (k, energy) in energies.into_iter().enumerate() {
        let vector = tridiag::eigenvector(&diag, &off, energy);
        let last = vector[vector.len() - 1];
        let edge = (vector[0] * vector[0]).max(last * last);
        if !(edge <= BOUNDARY_DECAY) {
            return Err(Error::GridTooSmall(format!(
                "state {k} has |ψ|² = {edge:e} at the wall (limit {BOUNDARY_DECAY:e}); \
                 half-width {} is too small",
                grid.half_width
            )));
        }
        states.push(Eigenstate { energy, vector });
    }
    Ok(states)
}

/// Eigenvalues of [`fd_eigenstates_1d`], ascending.
pub fn fd_eigenvalues_1d(
    grid: &GridSpec,
    params: &OscillatorParams,
    count: usize,
) -> Result<Vec<f64>> {
    Ok(fd_eigenstates_1d(grid, params, count)?
        .into_iter()
        .map(|s| s.energy)
        .collect())
}

/// Number of ways to write `n` as an ordered sum of `dims` non-negative
/// integers, `C(n + dims − 1, dims − 1)`.
pub fn degeneracy(n: usize, dims: usize) -> u64 {
    if dims == 0 {
        return u64::from(n == 0);
    }
    let k = (dims - 1) as u64;
    let mut acc: u64 = 1;
    for i in 1..=k {
        acc = acc * (n as u64 + i) / i;
    }
    acc
}

/// Calls `visit` with every multi-index of length `dims` summing to `n`.
pub fn for_each_composition(n: usize, dims: usize, visit: &mut impl FnMut(&[usize])) {
    fn recurse(
        remaining: usize,
        slot: usize,
        current: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if slot + 1 == current.len() {
            current[slot] = remaining;
            visit(current);
            return;
        }
        for k in 0..=remaining {
            current[slot] = k;
            recurse(remaining - k, slot + 1, current, visit);
        }
    }
    if dims == 0 {
        if n == 0 {
            visit(&[]);
        }
        return;
    }
    let mut current = alloc::vec![0; dims];
    recurse(n, 0, &mut current, visit);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLevel {
    pub n: usize,
    /// `ω(n + dims/2)`.
    pub analytic_energy: f64,
    /// Mean of the composed finite-difference totals over the level's
    /// multi-indices.
    pub numeric_energy: f64,
    pub degeneracy: u64,
    /// Largest `|composed − analytic|` over the level's multi-indices.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub levels: Vec<SpectrumLevel>,
    /// Numeric ground energy minus the `(n + 1)` value claimed at `n = 0`.
    pub claim_comparison: f64,
    pub grid: GridSpec,
    pub params: OscillatorParams,
    /// The 1D levels the totals are composed from.
    pub levels_1d: Vec<f64>,
}

/// Composes 1D levels into the four-dimensional spectrum for `n ≤ n_max`.
pub fn spectrum_4d(
    grid: &GridSpec,
    params: &OscillatorParams,
    n_max: usize,
) -> Result<SpectrumResult> {
    let levels_1d = fd_eigenvalues_1d(grid, params, n_max + 1)?;
    let dims = params.dims;
    let mut levels = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let analytic = params.omega * (n as f64 + 0.5 * dims as f64);
        let mut sum = 0.0;
        let mut members = 0u64;
        let mut residual: f64 = 0.0;
        for_each_composition(n, dims, &mut |ks| {
            let total: f64 = ks.iter().map(|&k| levels_1d[k]).sum();
            sum += total;
            members += 1;
            residual = residual.max(math::abs(total - analytic));
        });
        levels.push(SpectrumLevel {
            n,
            analytic_energy: analytic,
            numeric_energy: sum / members as f64,
            degeneracy: members,
            residual,
        });
    }
    let claim_comparison = levels[0].numeric_energy - 1.0;
    Ok(SpectrumResult {
        levels,
        claim_comparison,
        grid: *grid,
        params: *params,
        levels_1d,
    })
}

/// `Δs·Δp` of the `k`-th finite-difference eigenstate, with `ħ = 1`.
///
/// `⟨p⟩` vanishes for a real state. `⟨p²⟩` is the discrete Dirichlet form
/// `Σ(ψᵢ₊₁ − ψᵢ)²/h²` over all `N − 1` links, the wall nodes held at zero.
pub fn uncertainty_product_1d(grid: &GridSpec, params: &OscillatorParams, k: usize) -> Result<f64> {
    let count = k + 1;
    let states = fd_eigenstates_1d(grid, params, count)?;
    let psi = &states[k].vector;
    let nodes = grid.interior_nodes();
    let h = grid.spacing();

    let mut mean = 0.0;
    let mut second = 0.0;
    for (s, p) in nodes.iter().zip(psi) {
        let w = p * p;
        mean += s * w;
        second += s * s * w;
    }
    let var_s = second - mean * mean;

    let mut p2 = psi[0] * psi[0] + psi[psi.len() - 1] * psi[psi.len() - 1];
    for pair in psi.windows(2) {
        let d = pair[1] - pair[0];
        p2 += d * d;
    }
    p2 /= h * h;

    Ok(math::sqrt(var_s * p2))
}

/// CODATA 2018 reduced Planck constant in J·s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// Speed of light in m/s.
pub const C_SI: f64 = 299_792_458.0;

/// Unit system for [`mass_time_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    /// `ħ = c = 1`.
    #[default]
    Geometric,
    /// Mass in kilograms, time in seconds.
    Si,
    Custom {
        hbar: f64,
        c: f64,
    },
}

impl Units {
    pub fn constants(&self) -> (f64, f64) {
        match *self {
            Units::Geometric => (1.0, 1.0),
            Units::Si => (HBAR_SI, C_SI),
            Units::Custom { hbar, c } => (hbar, c),
        }
    }
}

/// Smallest proper-time spread `ħ/(2c²Δm)` allowed for a rest-mass spread `Δm`.
pub fn mass_time_bound(delta_m: f64, units: Units) -> Result<f64> {
    if !(delta_m > 0.0) {
        return Err(Error::Domain(format!(
            "mass spread must be positive, got {delta_m}"
        )));
    }
    let (hbar, c) = units.constants();
    if !(hbar > 0.0 && c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "unit constants must be positive, got hbar = {hbar}, c = {c}"
        )));
    }
    Ok(hbar / (2.0 * c * c * delta_m))
}
