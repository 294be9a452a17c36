//! Partial-wave radial kernels of a normalized two-electron S state.
//!
//! The kernel of partial wave `l` is
//!
//! ```text
//! f_l(r1, r2) = r1 r2 (2l+1)/2 int_0^pi psi(r1, r2, cos th) P_l(cos th) sin th dth
//! ```
//!
//! and its eigenfunctions are the radial natural orbitals. Two independent
//! evaluators are provided. The analytic one expands `P_l` in monomials and
//! integrates each Hylleraas term in closed form; it loses accuracy to
//! cancellation at large `l` and is meant for validation. The quadrature one
//! changes variable from `cos th` to `u = r12`, in which the integrand is an
//! exact polynomial, and applies Gauss–Legendre; it is used for production
//! kernel matrices.

use serde::{Deserialize, Serialize};

use crate::basis::HylleraasExpansion;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Node count used when none is requested.
pub const DEFAULT_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelBackend {
    Analytic,
    Quadrature { nodes: usize },
}

impl Default for KernelBackend {
    fn default() -> Self {
        KernelBackend::Quadrature {
            nodes: DEFAULT_NODES,
        }
    }
}

/// `f_l` bound to one expansion and one evaluation route.
#[derive(Debug, Clone, Copy)]
pub struct RadialKernel<'a> {
    pub l: usize,
    pub expansion: &'a HylleraasExpansion,
    pub backend: KernelBackend,
}

impl<'a> RadialKernel<'a> {
    pub fn new(l: usize, expansion: &'a HylleraasExpansion, backend: KernelBackend) -> Self {
        Self {
            l,
            expansion,
            backend,
        }
    }

    pub fn value(&self, r1: f64, r2: f64) -> Result<f64> {
        match self.backend {
            KernelBackend::Analytic => kernel_value_analytic(self.l, self.expansion, r1, r2),
            KernelBackend::Quadrature { nodes } => {
                kernel_value_quadrature(self.l, self.expansion, r1, r2, nodes)
            }
        }
    }
}

/// Generalized binomial coefficient `x (x-1) ... (x-k+1) / k!` for real `x`.
pub fn generalized_binomial(x: f64, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (x - i as f64) / (i as f64 + 1.0);
    }
    acc
}

/// `I(k, p) = int_0^pi sin th cos^k th (r1^2 + r2^2 - 2 r1 r2 cos th)^(p/2) dth`
///
/// Even `p` gives a polynomial in `cos th` whose binomial expansion has terms
/// of one sign. Odd `p` uses a geometric series in `2 r1 r2 / (r1^2 + r2^2)`
/// when that ratio is at most 1/2 and otherwise integrates the polynomial in
/// `u = r12` that the substitution `cos th = (r1^2 + r2^2 - u^2) / (2 r1 r2)`
/// produces.
pub fn legendre_theta_integral(k: u32, p: u32, r1: f64, r2: f64) -> Result<f64> {
    if !(r1 >= 0.0 && r2 >= 0.0) || !r1.is_finite() || !r2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "radii must be finite and non-negative, got ({r1}, {r2})"
        )));
    }
    if r1 == 0.0 && r2 == 0.0 {
        return Err(Error::InvalidArgument(
            "I(k, p) is undefined at r1 = r2 = 0".into(),
        ));
    }
    let a2 = r1 * r1 + r2 * r2;
    let b = 2.0 * r1 * r2;
    let moment = |j: u32| -> f64 {
        // int_{-1}^{1} x^(k+j) dx
        if (k + j) % 2 == 0 {
            2.0 / f64::from(k + j + 1)
        } else {
            0.0
        }
    };
    if p % 2 == 0 {
        let q = p / 2;
        let mut sum = 0.0;
        let mut binom = 1.0;
        for j in 0..=q {
            sum += binom * a2.powi((q - j) as i32) * (-b).powi(j as i32) * moment(j);
            binom *= f64::from(q - j) / f64::from(j + 1);
        }
        return Ok(sum);
    }
    let ratio = b / a2;
    if ratio <= 0.5 {
        let half_p = f64::from(p) / 2.0;
        let mut sum = 0.0;
        let mut coef = 1.0; // binom(p/2, j) (-ratio)^j
        for j in 0..400u32 {
            let term = coef * moment(j);
            sum += term;
            if f64::from(j) > half_p && term.abs() <= 1e-17 * sum.abs() && coef.abs() <= 1e-17 {
                break;
            }
            coef *= (half_p - f64::from(j)) / f64::from(j + 1) * (-ratio);
        }
        return Ok(a2.powf(half_p) * sum);
    }
    let lo = (r1 - r2).abs();
    let hi = r1 + r2;
    let mut sum = 0.0;
    let mut binom = 1.0;
    for j in 0..=k {
        let e = 2 * j + p + 2;
        let prim = (hi.powi(e as i32) - lo.powi(e as i32)) / f64::from(e);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * a2.powi((k - j) as i32) * prim;
        binom *= f64::from(k - j) / f64::from(j + 1);
    }
    Ok(2.0 * sum / b.powi(k as i32 + 1))
}

/// Closed-form `f_l` through the monomial expansion of `P_l`.
pub fn kernel_value_analytic(l: usize, exp: &HylleraasExpansion, r1: f64, r2: f64) -> Result<f64> {
    if !(r1 >= 0.0 && r2 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radii must be non-negative, got ({r1}, {r2})"
        )));
    }
    if r1 == 0.0 || r2 == 0.0 {
        return Ok(0.0);
    }
    let omega = exp.omega() as usize;
    // I(k, p) for k <= l, p <= omega
    let mut theta = vec![0.0; (l + 1) * (omega + 1)];
    for k in 0..=l {
        for p in 0..=omega {
            theta[k * (omega + 1) + p] = legendre_theta_integral(k as u32, p as u32, r1, r2)?;
        }
    }
    let legendre_coef: Vec<f64> = (0..=l)
        .map(|k| generalized_binomial(l as f64, k) * generalized_binomial((l + k) as f64 / 2.0 - 0.5, l))
        .collect();
    let s = r1 + r2;
    let t = r2 - r1;
    let mut sum = 0.0;
    for (term, c) in exp.normalized_coeffs() {
        let radial = c * s.powi(term.n as i32) * t.powi(term.m as i32);
        let angular: f64 = (0..=l)
            .map(|k| legendre_coef[k] * theta[k * (omega + 1) + term.p as usize])
            .sum();
        sum += radial * angular;
    }
    let prefactor = 2f64.powi(l as i32 - 1) * (2 * l + 1) as f64 * r1 * r2 * (-exp.mu() * s).exp();
    Ok(prefactor * sum)
}

/// Smallest node count that integrates partial wave `l` exactly.
pub fn min_nodes(l: usize, omega: u32) -> usize {
    l + omega as usize / 2 + 2
}

/// `f_l` by Gauss–Legendre quadrature over `u = r12`.
pub fn kernel_value_quadrature(
    l: usize,
    exp: &HylleraasExpansion,
    r1: f64,
    r2: f64,
    nodes: usize,
) -> Result<f64> {
    let projector = PartialWaveProjector::new(exp, l, nodes)?;
    let mut out = vec![0.0; l + 1];
    projector.project(r1, r2, &mut out)?;
    Ok(out[l])
}

/// Evaluates `f_0 ..= f_lmax` together at a point, sharing the wavefunction
/// samples between partial waves.
#[derive(Debug, Clone)]
pub struct PartialWaveProjector<'a> {
    exp: &'a HylleraasExpansion,
    l_max: usize,
    rule: GaussLegendre,
    /// `[p][j][n]` coefficients of `u^p t^(2j) s^n`, normalization folded in.
    blocks: Vec<Vec<Vec<f64>>>,
}

impl<'a> PartialWaveProjector<'a> {
    pub fn new(exp: &'a HylleraasExpansion, l_max: usize, nodes: usize) -> Result<Self> {
        let need = min_nodes(l_max, exp.omega());
        if nodes < need {
            return Err(Error::InvalidArgument(format!(
                "{nodes} quadrature nodes cannot resolve l = {l_max} at omega = {}; need at least {need}",
                exp.omega()
            )));
        }
        Ok(Self {
            exp,
            l_max,
            rule: GaussLegendre::new(nodes)?,
            blocks: exp.grouped_coeffs(),
        })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn expansion(&self) -> &HylleraasExpansion {
        self.exp
    }

    fn omega(&self) -> usize {
        self.exp.omega() as usize
    }

    /// Length of the buffer filled by [`Self::s_factors`].
    pub(crate) fn s_factor_len(&self) -> usize {
        let w = self.omega();
        (w + 1) * (w / 2 + 1)
    }

    /// `exp(-mu s) Q_jp(s)` for every `(p, j)`, laid out `p`-major.
    pub(crate) fn s_factors(&self, s: f64, out: &mut [f64]) {
        let w = self.omega();
        let decay = (-self.exp.mu() * s).exp();
        let mut idx = 0;
        for per_p in &self.blocks {
            for poly in per_p.iter().take(w / 2 + 1) {
                let mut acc = 0.0;
                for &c in poly.iter().rev() {
                    acc = acc * s + c;
                }
                out[idx] = decay * acc;
                idx += 1;
            }
        }
    }

    /// Fills `out[l] = f_l(r1, r2)` for `l <= l_max` given precomputed
    /// [`Self::s_factors`] at `s = r1 + r2`.
    pub(crate) fn project_with(&self, s_factors: &[f64], r1: f64, r2: f64, out: &mut [f64], scratch: &mut Scratch) {
        let l_count = self.l_max + 1;
        let out = &mut out[..l_count];
        out.iter_mut().for_each(|v| *v = 0.0);
        if r1 == 0.0 || r2 == 0.0 {
            return;
        }
        let w = self.omega();
        let jn = w / 2 + 1;
        let t2 = (r1 - r2) * (r1 - r2);
        // q_p(s, t) = sum_j t^(2j) Q_jp(s)
        let q = &mut scratch.q;
        for p in 0..=w {
            let row = &s_factors[p * jn..(p + 1) * jn];
            let mut acc = 0.0;
            for &c in row.iter().rev() {
                acc = acc * t2 + c;
            }
            q[p] = acc;
        }
        let lo = (r1 - r2).abs();
        let hi = r1 + r2;
        let b = 2.0 * r1 * r2;
        let half = 0.5 * (hi - lo);
        let pl = &mut scratch.legendre;
        for (xi, wi) in self.rule.nodes().iter().zip(self.rule.weights()) {
            let above = half * (1.0 + xi); // u - lo
            let u = lo + above;
            let x = 1.0 - above * (u + lo) / b;
            let mut psi = 0.0;
            for &qp in q[..=w].iter().rev() {
                psi = psi * u + qp;
            }
            let weight = wi * half * u * psi;
            pl[0] = 1.0;
            out[0] += weight;
            if l_count > 1 {
                pl[1] = x;
                out[1] += weight * x;
                for l in 1..l_count - 1 {
                    let lf = l as f64;
                    pl[l + 1] = ((2.0 * lf + 1.0) * x * pl[l] - lf * pl[l - 1]) / (lf + 1.0);
                    out[l + 1] += weight * pl[l + 1];
                }
            }
        }
        for (l, v) in out.iter_mut().enumerate() {
            *v *= (2 * l + 1) as f64 / 2.0;
        }
    }

    pub(crate) fn scratch(&self) -> Scratch {
        Scratch {
            q: vec![0.0; self.omega() + 1],
            legendre: vec![0.0; self.l_max + 2],
        }
    }

    /// Fills `out[l] = f_l(r1, r2)` for every `l <= l_max`.
    pub fn project(&self, r1: f64, r2: f64, out: &mut [f64]) -> Result<()> {
        if !(r1 >= 0.0 && r2 >= 0.0) || !r1.is_finite() || !r2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "radii must be finite and non-negative, got ({r1}, {r2})"
            )));
        }
        if out.len() <= self.l_max {
            return Err(Error::InvalidArgument(format!(
                "output buffer holds {} partial waves, need {}",
                out.len(),
                self.l_max + 1
            )));
        }
        let mut sf = vec![0.0; self.s_factor_len()];
        self.s_factors(r1 + r2, &mut sf);
        let mut scratch = self.scratch();
        self.project_with(&sf, r1, r2, out, &mut scratch);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Scratch {
    q: Vec<f64>,
    legendre: Vec<f64>,
}
