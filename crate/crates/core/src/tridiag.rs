//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for the
//! lowest eigenvalues and inverse iteration for their vectors.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Number of eigenvalues strictly below `x`.
pub(crate) fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 {
            0.0
        } else {
            off[i - 1] * off[i - 1] / q
        };
        q = diag[i] - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (math::abs(diag[i]) + math::abs(x)).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let left = if i == 0 { 0.0 } else { math::abs(off[i - 1]) };
        let right = if i + 1 == diag.len() {
            0.0
        } else {
            math::abs(off[i])
        };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// The `count` smallest eigenvalues in ascending order, each bisected until
/// the bracket stops shrinking in floating point.
pub(crate) fn lowest_eigenvalues(diag: &[f64], off: &[f64], count: usize) -> Vec<f64> {
    let (glo, ghi) = gershgorin(diag, off);
    let pad = f64::EPSILON * (math::abs(glo) + math::abs(ghi)) + f64::MIN_POSITIVE;
    let mut values = Vec::with_capacity(count);
    let mut floor = glo - pad;
    for k in 0..count {
        let mut lo = floor;
        let mut hi = ghi + pad;
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(diag, off, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let value = 0.5 * (lo + hi);
        values.push(value);
        floor = lo;
    }
    values
}

/// Tridiagonal LU with partial pivoting of `T − σ·1`.
struct Factor {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl Factor {
    fn new(diag: &[f64], off: &[f64], shift: f64) -> Self {
        let n = diag.len();
        let mut dl = off.to_vec();
        let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if math::abs(d[i]) >= math::abs(dl[i]) {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        let scale = diag
            .iter()
            .map(|v| math::abs(v - shift))
            .chain(off.iter().map(|v| math::abs(*v)))
            .fold(0.0, f64::max);
        let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        for p in d.iter_mut() {
            if math::abs(*p) < tiny {
                *p = if *p < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            if i + 1 < n {
                acc -= self.du[i] * b[i + 1];
            }
            if i + 2 < n {
                acc -= self.du2[i] * b[i + 2];
            }
            b[i] = acc / self.d[i];
        }
    }
}

fn normalize(v: &mut [f64]) {
    let norm = math::sqrt(v.iter().map(|x| x * x).sum());
    for x in v.iter_mut() {
        *x /= norm;
    }
}

/// Unit eigenvector for the eigenvalue `lambda`, signed so that its
/// largest-magnitude component is positive.
pub(crate) fn eigenvector(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let factor = Factor::new(diag, off, lambda);
    // a start vector with no symmetry, so it overlaps odd and even states
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * math::sin(0.7548776662466927 * (i as f64 + 1.0)))
        .collect();
    normalize(&mut v);
    for _ in 0..3 {
        factor.solve(&mut v);
        normalize(&mut v);
    }
    let peak = v.iter().copied().fold(0.0f64, |acc, x| {
        if math::abs(x) > math::abs(acc) {
            x
        } else {
            acc
        }
    });
    if peak < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
    v
}
