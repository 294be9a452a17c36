//! Ground-state solve: lowest root of `H c = E S c` and its minimization
//! over the nonlinear exponent `mu`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{enumerate_terms, matrix_pair, HylleraasExpansion};
use crate::error::{Error, Result};
use crate::linalg::gen_sym_eig_canonical;

/// Highest expansion order accepted without an explicit override. Overlap
/// conditioning in binary64 degrades beyond it.
pub const DEFAULT_OMEGA_CAP: u32 = 12;

/// Smallest accepted separation between the two lowest roots.
pub const MIN_SPECTRAL_GAP: f64 = 1e-8;

/// Overlap eigenvalues below this fraction of the largest are treated as
/// linear dependence and projected out. The unit-diagonal Hylleraas overlap
/// first reaches this level at omega = 10.
pub const OVERLAP_CUTOFF: f64 = 1e-14;

/// Default tolerance on the optimal `mu`.
pub const DEFAULT_MU_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundState {
    pub z: f64,
    pub omega: u32,
    pub mu: f64,
    /// Hartree.
    pub energy: f64,
    /// Dimension of the variational space after projecting out near-linear
    /// dependence; equals the term count when nothing was dropped.
    pub rank: usize,
    pub expansion: HylleraasExpansion,
}

fn check_inputs(z: f64, mu: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidArgument(format!("nuclear charge must be positive, got {z}")));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
    }
    Ok(())
}

/// Lowest generalized eigenvalue of the pair at fixed `mu`, without
/// building the expansion.
pub fn energy_at_mu(z: f64, omega: u32, mu: f64) -> Result<f64> {
    check_inputs(z, mu)?;
    Ok(lowest_root(z, omega, mu)?.energy)
}

struct LowestRoot {
    energy: f64,
    rank: usize,
    coeffs: Vec<f64>,
}

fn lowest_root(z: f64, omega: u32, mu: f64) -> Result<LowestRoot> {
    let terms = enumerate_terms(omega);
    let pair = matrix_pair(&terms, mu, z)?;
    let (scaled, scale) = pair.unit_diagonal()?;
    let eig = gen_sym_eig_canonical(&scaled, OVERLAP_CUTOFF)?;
    if eig.values.len() > 1 {
        let gap = eig.values[1] - eig.values[0];
        if !(gap > MIN_SPECTRAL_GAP) {
            return Err(Error::SpectralGap { gap });
        }
    }
    let mut coeffs: Vec<f64> = eig.vector(0).iter().zip(&scale).map(|(y, d)| y * d).collect();
    if let Some(first) = coeffs.iter().copied().find(|c| *c != 0.0) {
        if first < 0.0 {
            coeffs.iter_mut().for_each(|c| *c = -*c);
        }
    }
    Ok(LowestRoot {
        energy: eig.values[0],
        rank: eig.values.len(),
        coeffs,
    })
}

/// Solves the generalized eigenproblem at fixed `mu` and returns the lowest
/// root with its normalized expansion. The sign is fixed so that the first
/// nonzero coefficient is positive.
pub fn solve_at_mu(z: f64, omega: u32, mu: f64) -> Result<GroundState> {
    check_inputs(z, mu)?;
    let root = lowest_root(z, omega, mu)?;
    let expansion = HylleraasExpansion::new(z, omega, mu, root.coeffs)?;
    Ok(GroundState {
        z,
        omega,
        mu,
        energy: root.energy,
        rank: root.rank,
        expansion,
    })
}

/// Energies at several exponents, evaluated independently.
pub fn energy_scan(z: f64, omega: u32, mus: &[f64]) -> Result<Vec<f64>> {
    mus.par_iter().map(|&mu| energy_at_mu(z, omega, mu)).collect()
}

/// `(0.5 Z_eff, 2 Z_eff)` with `Z_eff = Z - 5/16`, the single-term optimum.
pub fn default_bracket(z: f64) -> (f64, f64) {
    let z_eff = z - 5.0 / 16.0;
    (0.5 * z_eff, 2.0 * z_eff)
}

/// Minimizes the lowest root over `mu` in `[lo, hi]` to `|d mu| <= tol`.
pub fn optimize_mu(z: f64, omega: u32, bracket: (f64, f64), tol: f64) -> Result<GroundState> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "mu bracket must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    check_inputs(z, lo)?;
    let (mu, energy) = brent_minimize(|mu| energy_at_mu(z, omega, mu), lo, hi, tol)?;
    let energy_lo = energy_at_mu(z, omega, lo)?;
    let energy_hi = energy_at_mu(z, omega, hi)?;
    let near_edge = (mu - lo) <= 2.0 * tol || (hi - mu) <= 2.0 * tol;
    if near_edge || energy >= energy_lo || energy >= energy_hi {
        return Err(Error::Bracket {
            lo,
            hi,
            energy_lo,
            energy_hi,
            energy_best: energy,
        });
    }
    solve_at_mu(z, omega, mu)
}

/// Brent's derivative-free minimizer (golden section with parabolic steps)
/// on `[a, b]`. Returns `(x_min, f(x_min))`.
pub fn brent_minimize<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    const MAX_ITER: usize = 200;
    let eps = f64::EPSILON.sqrt();

    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);

    for _ in 0..MAX_ITER {
        let xm = 0.5 * (a + b);
        let tol1 = eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            return Ok((x, fx));
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(Error::NumericalFailure(
        "scalar minimization did not converge".into(),
    ))
}
