//! Hylleraas basis functions `s^n t^m u^p exp(-mu s)` and their matrix
//! elements.
//!
//! With `s = r1 + r2`, `t = r1 - r2` and `u = r12`, the six-dimensional volume
//! element of an S state becomes `pi^2 u (s^2 - t^2) ds dt du` on the wedge
//! `0 <= |t| <= u <= s`. Every basis product is even in `t`, so the `t` range
//! is folded onto `[0, u]` and doubled. All integrands are then polynomials
//! times `exp(-2 mu s)`, and each monomial reduces to [`base_integral`].

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{MatrixPair, SymmetricMatrix};

/// One Hylleraas term: the exponent triple of `s^n t^m u^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisTerm {
    pub n: u32,
    pub m: u32,
    pub p: u32,
}

impl BasisTerm {
    /// Fails unless `m` is even (odd powers of `t` break exchange symmetry).
    pub fn new(n: u32, m: u32, p: u32) -> Result<Self> {
        if m % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "power of t must be even, got m = {m}"
            )));
        }
        Ok(Self { n, m, p })
    }

    pub fn order(&self) -> u32 {
        self.n + self.m + self.p
    }
}

impl fmt::Display for BasisTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.m, self.p)
    }
}

/// All terms with `n + m + p <= omega` and `m` even, in lexicographic
/// `(n, m, p)` order.
pub fn enumerate_terms(omega: u32) -> Vec<BasisTerm> {
    let mut terms = Vec::with_capacity(term_count(omega));
    for n in 0..=omega {
        for m in (0..=omega - n).step_by(2) {
            for p in 0..=omega - n - m {
                terms.push(BasisTerm { n, m, p });
            }
        }
    }
    terms
}

/// Size of the expansion of order `omega`.
pub fn term_count(omega: u32) -> usize {
    (0..=omega)
        .step_by(2)
        .map(|m| {
            let k = (omega - m) as usize;
            (k + 1) * (k + 2) / 2
        })
        .sum()
}

const FACTORIAL_TABLE_LEN: usize = 171;

static FACTORIALS: [f64; FACTORIAL_TABLE_LEN] = {
    let mut table = [1.0; FACTORIAL_TABLE_LEN];
    let mut k = 1;
    while k < FACTORIAL_TABLE_LEN {
        table[k] = table[k - 1] * k as f64;
        k += 1;
    }
    table
};

/// `I(a, b, c; alpha) = int_0^inf exp(-alpha s) s^a ds int_0^s u^b du int_0^u t^c dt`
///
/// which evaluates to `(a+b+c+2)! / ((c+1)(b+c+2) alpha^(a+b+c+3))`.
pub fn base_integral(a: u32, b: u32, c: u32, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "exponent must be positive and finite, got {alpha}"
        )));
    }
    let total = (a + b + c + 2) as usize;
    let denom = f64::from(c + 1) * f64::from(b + c + 2);
    let value = if total < FACTORIAL_TABLE_LEN {
        FACTORIALS[total] / denom / alpha.powi(total as i32 + 1)
    } else {
        let ln_fact: f64 = (2..=total).map(|k| (k as f64).ln()).sum();
        (ln_fact - denom.ln() - (total as f64 + 1.0) * alpha.ln()).exp()
    };
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Range(format!(
            "I({a},{b},{c};{alpha}) is outside the binary64 range"
        )))
    }
}

/// Signed monomial `coef * s^s t^t u^u` (the common `exp(-mu s)` is implicit).
#[derive(Debug, Clone, Copy)]
struct Monomial {
    coef: f64,
    s: i32,
    t: i32,
    u: i32,
}

impl Monomial {
    fn new(coef: f64, s: i32, t: i32, u: i32) -> Self {
        Self { coef, s, t, u }
    }

    fn times(self, other: Monomial) -> Monomial {
        Monomial {
            coef: self.coef * other.coef,
            s: self.s + other.s,
            t: self.t + other.t,
            u: self.u + other.u,
        }
    }
}

type Poly = Vec<Monomial>;

fn function_poly(term: &BasisTerm) -> Poly {
    vec![Monomial::new(1.0, term.n as i32, term.m as i32, term.p as i32)]
}

/// Partial derivatives of `s^n t^m u^p exp(-mu s)`, divided by the exponential.
fn derivative_polys(term: &BasisTerm, mu: f64) -> [Poly; 3] {
    let (n, m, p) = (term.n as i32, term.m as i32, term.p as i32);
    let mut ds = vec![Monomial::new(-mu, n, m, p)];
    if n > 0 {
        ds.push(Monomial::new(n as f64, n - 1, m, p));
    }
    let dt = if m > 0 {
        vec![Monomial::new(m as f64, n, m - 1, p)]
    } else {
        Vec::new()
    };
    let du = if p > 0 {
        vec![Monomial::new(p as f64, n, m, p - 1)]
    } else {
        Vec::new()
    };
    [ds, dt, du]
}

/// Integrates `weight * left * right * exp(-2 mu s)` against the volume element.
struct WedgeIntegrator {
    alpha: f64,
}

impl WedgeIntegrator {
    fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "mu must be positive and finite, got {mu}"
            )));
        }
        Ok(Self { alpha: 2.0 * mu })
    }

    fn monomial(&self, m: Monomial) -> Result<f64> {
        debug_assert!(m.s >= 0 && m.t >= 0 && m.u >= 0, "negative power in {m:?}");
        debug_assert!(m.t % 2 == 0, "odd power of t in {m:?}");
        Ok(m.coef * base_integral(m.s as u32, m.u as u32, m.t as u32, self.alpha)?)
    }

    /// `2 pi^2 int_{t>=0} weight * left * right`
    fn triple(&self, weight: &[Monomial], left: &[Monomial], right: &[Monomial]) -> Result<f64> {
        let mut sum = 0.0;
        for &w in weight {
            for &a in left {
                for &b in right {
                    sum += self.monomial(w.times(a).times(b))?;
                }
            }
        }
        Ok(2.0 * PI * PI * sum)
    }
}

fn volume_weight() -> [Monomial; 2] {
    // u (s^2 - t^2)
    [Monomial::new(1.0, 2, 0, 1), Monomial::new(-1.0, 0, 2, 1)]
}

/// `<t_i | t_j>` for the raw (unnormalized) basis functions at exponent `mu`.
pub fn overlap_element(ti: &BasisTerm, tj: &BasisTerm, mu: f64) -> Result<f64> {
    let integ = WedgeIntegrator::new(mu)?;
    integ.triple(&volume_weight(), &function_poly(ti), &function_poly(tj))
}

/// Kinetic energy matrix element `<t_i | -(lap_1 + lap_2)/2 | t_j>` in the
/// symmetric first-derivative form.
pub fn kinetic_element(ti: &BasisTerm, tj: &BasisTerm, mu: f64) -> Result<f64> {
    let integ = WedgeIntegrator::new(mu)?;
    let [si, ti_, ui] = derivative_polys(ti, mu);
    let [sj, tj_, uj] = derivative_polys(tj, mu);
    let w_diag = volume_weight();
    // s (u^2 - t^2)
    let w_su = [Monomial::new(1.0, 1, 0, 2), Monomial::new(-1.0, 1, 2, 0)];
    // t (s^2 - u^2)
    let w_tu = [Monomial::new(1.0, 2, 1, 0), Monomial::new(-1.0, 0, 1, 2)];
    let mut sum = integ.triple(&w_diag, &si, &sj)?;
    sum += integ.triple(&w_diag, &ti_, &tj_)?;
    sum += integ.triple(&w_diag, &ui, &uj)?;
    sum += integ.triple(&w_su, &si, &uj)?;
    sum += integ.triple(&w_su, &ui, &sj)?;
    sum += integ.triple(&w_tu, &ti_, &uj)?;
    sum += integ.triple(&w_tu, &ui, &tj_)?;
    Ok(sum)
}

/// Potential energy element: nuclear attraction `-Z (1/r1 + 1/r2)` plus the
/// electron repulsion `1/r12`.
pub fn potential_element(ti: &BasisTerm, tj: &BasisTerm, mu: f64, z: f64) -> Result<f64> {
    let integ = WedgeIntegrator::new(mu)?;
    // volume weight times the potential: -4 Z s u + s^2 - t^2
    let weight = [
        Monomial::new(-4.0 * z, 1, 0, 1),
        Monomial::new(1.0, 2, 0, 0),
        Monomial::new(-1.0, 0, 2, 0),
    ];
    integ.triple(&weight, &function_poly(ti), &function_poly(tj))
}

pub fn hamiltonian_element(ti: &BasisTerm, tj: &BasisTerm, mu: f64, z: f64) -> Result<f64> {
    Ok(kinetic_element(ti, tj, mu)? + potential_element(ti, tj, mu, z)?)
}

pub fn overlap_matrix(terms: &[BasisTerm], mu: f64) -> Result<SymmetricMatrix> {
    let mut s = SymmetricMatrix::zeros(terms.len());
    for (i, ti) in terms.iter().enumerate() {
        for (j, tj) in terms[..=i].iter().enumerate() {
            s.set(i, j, overlap_element(ti, tj, mu)?);
        }
    }
    Ok(s)
}

/// Assembles `(H, S)` over `terms`. Only the lower triangle is computed.
pub fn matrix_pair(terms: &[BasisTerm], mu: f64, z: f64) -> Result<MatrixPair> {
    let n = terms.len();
    let mut h = SymmetricMatrix::zeros(n);
    let mut s = SymmetricMatrix::zeros(n);
    for (i, ti) in terms.iter().enumerate() {
        for (j, tj) in terms[..=i].iter().enumerate() {
            s.set(i, j, overlap_element(ti, tj, mu)?);
            h.set(i, j, hamiltonian_element(ti, tj, mu, z)?);
        }
    }
    MatrixPair::new(h, s)
}

/// A Hylleraas wavefunction `C * sum c_nmp s^n t^m u^p exp(-mu s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HylleraasExpansion {
    z: f64,
    omega: u32,
    mu: f64,
    terms: Vec<BasisTerm>,
    coeffs: Vec<f64>,
    norm: f64,
}

impl HylleraasExpansion {
    /// Builds the expansion over all terms of order `omega` and computes the
    /// normalization constant.
    pub fn new(z: f64, omega: u32, mu: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !z.is_finite() {
            return Err(Error::InvalidArgument(format!("nuclear charge {z} is not finite")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
        }
        let terms = enumerate_terms(omega);
        if coeffs.len() != terms.len() {
            return Err(Error::InvalidArgument(format!(
                "omega = {omega} has {} terms but {} coefficients were given",
                terms.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        let mut exp = Self {
            z,
            omega,
            mu,
            terms,
            coeffs,
            norm: 1.0,
        };
        exp.norm = norm_constant(&exp)?;
        Ok(exp)
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn omega(&self) -> u32 {
        self.omega
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn terms(&self) -> &[BasisTerm] {
        &self.terms
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Coefficients with the normalization constant folded in.
    pub fn normalized_coeffs(&self) -> impl Iterator<Item = (BasisTerm, f64)> + '_ {
        self.terms
            .iter()
            .zip(&self.coeffs)
            .map(move |(&t, &c)| (t, self.norm * c))
    }

    /// Evaluates the normalized wavefunction in Hylleraas coordinates.
    pub fn value_stu(&self, s: f64, t: f64, u: f64) -> f64 {
        let sum: f64 = self
            .terms
            .iter()
            .zip(&self.coeffs)
            .map(|(term, c)| c * s.powi(term.n as i32) * t.powi(term.m as i32) * u.powi(term.p as i32))
            .sum();
        self.norm * sum * (-self.mu * s).exp()
    }

    /// Regroups the expansion as `sum_p u^p sum_j t^(2j) Q_jp(s)`, returning
    /// `Q_jp` coefficient lists in powers of `s`, indexed `[p][j][n]`. The
    /// normalization constant is folded in.
    pub(crate) fn grouped_coeffs(&self) -> Vec<Vec<Vec<f64>>> {
        let w = self.omega as usize;
        let mut blocks = vec![vec![vec![0.0; w + 1]; w / 2 + 1]; w + 1];
        for (term, c) in self.normalized_coeffs() {
            blocks[term.p as usize][(term.m / 2) as usize][term.n as usize] += c;
        }
        blocks
    }
}

/// Evaluates `psi(r1, r2, cos theta)` with `theta` the angle between the
/// electron position vectors.
pub fn wavefunction_value(exp: &HylleraasExpansion, r1: f64, r2: f64, cos_theta: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&cos_theta) {
        return Err(Error::InvalidArgument(format!(
            "cos(theta) = {cos_theta} lies outside [-1, 1]"
        )));
    }
    if !(r1 >= 0.0 && r2 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radii must be non-negative, got ({r1}, {r2})"
        )));
    }
    let u = (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * cos_theta).max(0.0).sqrt();
    Ok(exp.value_stu(r1 + r2, r1 - r2, u))
}

/// `C = (c^T S c)^(-1/2)` with `S` the overlap matrix at the expansion's `mu`.
pub fn norm_constant(exp: &HylleraasExpansion) -> Result<f64> {
    if exp.coeffs.iter().all(|&c| c == 0.0) {
        return Err(Error::InvalidArgument(
            "cannot normalize the zero wavefunction".into(),
        ));
    }
    let s = overlap_matrix(&exp.terms, exp.mu)?;
    let q = s.bilinear(&exp.coeffs, &exp.coeffs);
    if !(q > 0.0) {
        return Err(Error::NumericalFailure(format!(
            "wavefunction norm squared is {q}; the overlap matrix is too ill-conditioned"
        )));
    }
    Ok(q.powf(-0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: u32, m: u32, p: u32) -> BasisTerm {
        BasisTerm::new(n, m, p).unwrap()
    }

    #[test]
    fn term_counts() {
        assert_eq!(enumerate_terms(6).len(), 50);
        assert_eq!(enumerate_terms(10).len(), 161);
        assert_eq!(enumerate_terms(14).len(), 372);
        assert_eq!(enumerate_terms(0), vec![t(0, 0, 0)]);
        for w in 0..20 {
            assert_eq!(enumerate_terms(w).len(), term_count(w));
        }
    }

    #[test]
    fn enumeration_is_sorted_and_valid() {
        let terms = enumerate_terms(9);
        assert!(terms.windows(2).all(|w| w[0] < w[1]));
        assert!(terms.iter().all(|t| t.m % 2 == 0 && t.order() <= 9));
    }

    #[test]
    fn odd_t_power_rejected() {
        assert!(matches!(BasisTerm::new(0, 1, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn base_integral_small_cases() {
        assert!((base_integral(0, 0, 0, 2.0).unwrap() - 0.125).abs() < 1e-16);
        assert!((base_integral(1, 0, 0, 2.0).unwrap() - 0.1875).abs() < 1e-16);
        assert_eq!(base_integral(0, 0, 0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn base_integral_errors() {
        assert!(matches!(base_integral(0, 0, 0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(base_integral(0, 0, 0, -1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(base_integral(200, 200, 0, 0.01), Err(Error::Range(_))));
    }

    #[test]
    fn base_integral_log_space_branch_matches_table() {
        // total = 170 sits in the table; compare with the log-space route
        let (a, b, c, alpha) = (100u32, 40u32, 28u32, 30.0);
        let direct = base_integral(a, b, c, alpha).unwrap();
        let total = (a + b + c + 2) as usize;
        let ln_fact: f64 = (2..=total).map(|k| (k as f64).ln()).sum();
        let denom = f64::from(c + 1) * f64::from(b + c + 2);
        let logged = (ln_fact - denom.ln() - (total as f64 + 1.0) * alpha.ln()).exp();
        assert!((direct / logged - 1.0).abs() < 1e-11);
        // and just past the table
        assert!(base_integral(101, 40, 28, 30.0).unwrap().is_finite());
    }

    #[test]
    fn single_term_overlap_closed_form() {
        // |exp(-mu (r1 + r2))|^2 integrates to (pi / mu^3)^2
        for mu in [0.5, 1.0, 1.6875, 3.0] {
            let s = overlap_element(&t(0, 0, 0), &t(0, 0, 0), mu).unwrap();
            let want = (PI / mu.powi(3)).powi(2);
            assert!((s / want - 1.0).abs() < 1e-14);
            let via_i = 2.0
                * PI
                * PI
                * (base_integral(2, 1, 0, 2.0 * mu).unwrap() - base_integral(0, 1, 2, 2.0 * mu).unwrap());
            assert!((s / via_i - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn single_term_rayleigh_quotient() {
        for z in [1.0, 2.0, 3.5] {
            for k in 0..=25 {
                let mu = 0.5 + 0.1 * k as f64;
                let s = overlap_element(&t(0, 0, 0), &t(0, 0, 0), mu).unwrap();
                let h = hamiltonian_element(&t(0, 0, 0), &t(0, 0, 0), mu, z).unwrap();
                let want = mu * mu - 2.0 * z * mu + 0.625 * mu;
                assert!((h / s - want).abs() < 1e-10, "z={z} mu={mu}");
            }
        }
    }

    #[test]
    fn matrices_are_symmetric_elementwise() {
        let terms = enumerate_terms(4);
        for (i, a) in terms.iter().enumerate() {
            for b in &terms[..i] {
                let (sab, sba) = (overlap_element(a, b, 1.3).unwrap(), overlap_element(b, a, 1.3).unwrap());
                assert!((sab - sba).abs() <= 1e-14 * sab.abs().max(1.0));
                let hab = hamiltonian_element(a, b, 1.3, 2.0).unwrap();
                let hba = hamiltonian_element(b, a, 1.3, 2.0).unwrap();
                assert!((hab - hba).abs() < 1e-12 * hab.abs().max(1.0), "{a} {b}: {hab} {hba}");
            }
        }
    }

    #[test]
    fn repulsion_only_potential_is_positive() {
        let terms = enumerate_terms(3);
        for a in &terms {
            assert!(potential_element(a, a, 1.1, 0.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn norm_constant_scaling_and_definition() {
        let single = HylleraasExpansion::new(2.0, 0, 1.0, vec![1.0]).unwrap();
        let c2 = 1.0
            / (2.0 * PI * PI * (base_integral(2, 1, 0, 2.0).unwrap() - base_integral(0, 1, 2, 2.0).unwrap()));
        assert!((single.norm().powi(2) / c2 - 1.0).abs() < 1e-14);
        let tripled = HylleraasExpansion::new(2.0, 0, 1.0, vec![3.0]).unwrap();
        assert!((tripled.norm() * 3.0 / single.norm() - 1.0).abs() < 1e-14);
        assert!(matches!(
            HylleraasExpansion::new(2.0, 0, 1.0, vec![0.0]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn wavefunction_argument_checks_and_product_form() {
        let exp = HylleraasExpansion::new(2.0, 0, 1.5, vec![1.0]).unwrap();
        assert!(wavefunction_value(&exp, 1.0, 1.0, 1.5).is_err());
        let a = wavefunction_value(&exp, 0.7, 1.2, -0.3).unwrap();
        let b = wavefunction_value(&exp, 0.7, 1.2, 0.9).unwrap();
        let want = exp.norm() * (-1.5f64 * 1.9).exp();
        assert!((a - want).abs() < 1e-15 && (b - want).abs() < 1e-15);
    }

    #[test]
    fn expansion_rejects_bad_shapes() {
        assert!(HylleraasExpansion::new(2.0, 1, 1.0, vec![1.0]).is_err());
        assert!(HylleraasExpansion::new(2.0, 0, -1.0, vec![1.0]).is_err());
        assert!(HylleraasExpansion::new(2.0, 0, 1.0, vec![f64::NAN]).is_err());
    }
}
