//! Occupation numbers of the one-electron reduced density matrix and the
//! entropies built from them.
//!
//! Each partial-wave kernel is sampled on the uniform grid `r_i = i dr`,
//! `i = 0..=n_m`, with `dr = R / n_m`. The matrix `M_ij = dr f_l(r_i, r_j)`
//! approximates the integral operator, and its eigenvalues `k` give the
//! occupations `lambda = (4 pi k / (2l + 1))^2`, each `(2l+1)`-fold
//! degenerate.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::HylleraasExpansion;
use crate::error::{Error, LadderRecord, Result};
use crate::kernel::{min_nodes, PartialWaveProjector, DEFAULT_NODES};
use crate::linalg::{sym_eig, sym_eigvals, SymmetricMatrix};

/// Occupations below this are treated as discretization noise.
pub const LAMBDA_CUTOFF: f64 = 1e-16;

/// Occupations may exceed one by this much before the wavefunction is
/// declared unnormalized.
pub const LAMBDA_SLACK: f64 = 1e-9;

/// Default convergence tolerance on the von Neumann entropy (bits).
pub const DEFAULT_TOL_S: f64 = 1e-7;

/// Default convergence tolerance on the linear entropy.
pub const DEFAULT_TOL_L: f64 = 1e-7;

/// Highest partial wave summed by default.
pub const DEFAULT_L_MAX: usize = 20;

/// Partial waves assembled per pass over the grid.
const L_CHUNK: usize = 6;

/// Uniform radial grid `r_i = i R / n_m`, `i = 0..=n_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    radius: f64,
    intervals: usize,
}

impl GridSpec {
    pub fn new(radius: f64, intervals: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("box edge must be positive, got {radius}")));
        }
        if intervals == 0 {
            return Err(Error::InvalidArgument("grid needs at least one interval".into()));
        }
        Ok(Self { radius, intervals })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn dr(&self) -> f64 {
        self.radius / self.intervals as f64
    }

    /// Number of grid points, `n_m + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        i as f64 * self.dr()
    }
}

/// One natural-orbital occupation: radial index `n` within partial wave `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Occupation {
    pub n: usize,
    pub l: usize,
    pub lambda: f64,
    /// Signed eigenvalue of the discretized kernel.
    pub k: f64,
}

/// Radial natural orbital `v_nl` sampled on the grid, with `dr sum v^2 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialOrbital {
    pub n: usize,
    pub l: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OccupationSpectrum {
    /// Sorted by `l`, then by descending `lambda`.
    pub entries: Vec<Occupation>,
    pub orbitals: Option<Vec<RadialOrbital>>,
}

impl OccupationSpectrum {
    /// `sum (2l+1) lambda`, one for a complete normalized spectrum.
    pub fn total_weight(&self) -> f64 {
        self.entries
            .iter()
            .map(|o| (2 * o.l + 1) as f64 * o.lambda)
            .sum()
    }

    pub fn deficit(&self) -> f64 {
        1.0 - self.total_weight()
    }

    pub fn l_max(&self) -> Option<usize> {
        self.entries.iter().map(|o| o.l).max()
    }

    /// Entries with `l <= l_max`.
    pub fn truncated(&self, l_max: usize) -> OccupationSpectrum {
        OccupationSpectrum {
            entries: self.entries.iter().copied().filter(|o| o.l <= l_max).collect(),
            orbitals: self
                .orbitals
                .as_ref()
                .map(|v| v.iter().filter(|o| o.l <= l_max).cloned().collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyResult {
    /// Von Neumann entropy in bits.
    pub von_neumann: f64,
    pub linear: f64,
    pub spectrum: OccupationSpectrum,
    pub ladder: Vec<LadderRecord>,
}

impl EntropyResult {
    pub fn von_neumann_nats(&self) -> f64 {
        self.von_neumann * std::f64::consts::LN_2
    }
}

/// `M_ij = dr f_l(r_i, r_j)` with the default quadrature.
pub fn build_kernel_matrix(l: usize, grid: &GridSpec, exp: &HylleraasExpansion) -> Result<SymmetricMatrix> {
    let nodes = DEFAULT_NODES.max(min_nodes(l, exp.omega()));
    Ok(build_kernel_matrices(l, l, grid, exp, nodes)?.remove(0))
}

/// Kernel matrices for `l_lo..=l_hi` from one pass over the grid.
pub fn build_kernel_matrices(
    l_lo: usize,
    l_hi: usize,
    grid: &GridSpec,
    exp: &HylleraasExpansion,
    nodes: usize,
) -> Result<Vec<SymmetricMatrix>> {
    if l_lo > l_hi {
        return Err(Error::InvalidArgument(format!("empty partial-wave range {l_lo}..={l_hi}")));
    }
    let projector = PartialWaveProjector::new(exp, l_hi, nodes)?;
    let n = grid.len();
    let dr = grid.dr();
    let width = projector.s_factor_len();
    // exp(-mu s) Q(s) on s = (i + j) dr
    let s_table: Vec<f64> = (0..2 * n - 1)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut buf = vec![0.0; width];
            projector.s_factors(k as f64 * dr, &mut buf);
            buf
        })
        .collect();
    let span = l_hi - l_lo + 1;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut scratch = projector.scratch();
            let mut out = vec![0.0; l_hi + 1];
            let mut row = vec![0.0; (i + 1) * span];
            let ri = grid.point(i);
            for j in 0..=i {
                let sf = &s_table[(i + j) * width..(i + j + 1) * width];
                projector.project_with(sf, ri, grid.point(j), &mut out, &mut scratch);
                for (dst, v) in row[j * span..(j + 1) * span].iter_mut().zip(&out[l_lo..]) {
                    *dst = dr * v;
                }
            }
            row
        })
        .collect();
    let mut mats = vec![SymmetricMatrix::zeros(n); span];
    for (i, row) in rows.iter().enumerate() {
        for j in 0..=i {
            for (c, mat) in mats.iter_mut().enumerate() {
                mat.set(i, j, row[j * span + c]);
            }
        }
    }
    Ok(mats)
}

fn occupation_of(k: f64, l: usize) -> f64 {
    (4.0 * PI * k / (2 * l + 1) as f64).powi(2)
}

/// Diagonalizes a kernel matrix and converts its eigenvalues to occupations,
/// sorted by descending `lambda`, dropping those below [`LAMBDA_CUTOFF`].
pub fn occupations_from_kernel(m: &SymmetricMatrix, l: usize) -> Result<Vec<Occupation>> {
    let ks = sym_eigvals(m)?;
    Ok(occupations_from_values(&ks, l))
}

fn occupations_from_values(ks: &[f64], l: usize) -> Vec<Occupation> {
    let mut pairs: Vec<(f64, f64)> = ks
        .iter()
        .map(|&k| (k, occupation_of(k, l)))
        .filter(|&(_, lambda)| lambda >= LAMBDA_CUTOFF)
        .collect();
    pairs.sort_by(|a, b| b.1.total_cmp(&a.1));
    pairs
        .into_iter()
        .enumerate()
        .map(|(n, (k, lambda))| Occupation { n, l, lambda, k })
        .collect()
}

/// Radial natural orbitals of partial wave `l`, the `count` most occupied.
pub fn natural_orbitals(
    l: usize,
    grid: &GridSpec,
    exp: &HylleraasExpansion,
    count: usize,
) -> Result<(Vec<Occupation>, Vec<RadialOrbital>)> {
    let m = build_kernel_matrix(l, grid, exp)?;
    let eig = sym_eig(&m)?;
    let mut order: Vec<usize> = (0..eig.values.len()).collect();
    order.sort_by(|&a, &b| eig.values[b].abs().total_cmp(&eig.values[a].abs()));
    let norm = grid.dr().sqrt().recip();
    let mut occ = Vec::new();
    let mut orbitals = Vec::new();
    for (n, &idx) in order.iter().take(count).enumerate() {
        let k = eig.values[idx];
        occ.push(Occupation {
            n,
            l,
            lambda: occupation_of(k, l),
            k,
        });
        let v = eig.vector(idx);
        // first significant sample positive
        let sign = v
            .iter()
            .find(|x| x.abs() > 1e-8)
            .map_or(1.0, |x| x.signum());
        orbitals.push(RadialOrbital {
            n,
            l,
            values: v.iter().map(|x| sign * norm * x).collect(),
        });
    }
    Ok((occ, orbitals))
}

/// Occupations of one wavefunction on one grid, computed per partial wave on
/// demand and kept for reuse as `l_max` grows.
#[derive(Debug)]
pub struct PartialWaveSpectra<'a> {
    exp: &'a HylleraasExpansion,
    grid: GridSpec,
    nodes: Option<usize>,
    per_l: Vec<Vec<Occupation>>,
}

impl<'a> PartialWaveSpectra<'a> {
    pub fn new(exp: &'a HylleraasExpansion, grid: GridSpec) -> Self {
        Self {
            exp,
            grid,
            nodes: None,
            per_l: Vec::new(),
        }
    }

    /// Overrides the quadrature node count (raised to the exactness minimum
    /// where needed).
    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = Some(nodes);
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn ensure(&mut self, l_max: usize) -> Result<()> {
        while self.per_l.len() <= l_max {
            let lo = self.per_l.len();
            let hi = (lo + L_CHUNK - 1).min(l_max);
            let nodes = self
                .nodes
                .unwrap_or(DEFAULT_NODES)
                .max(min_nodes(hi, self.exp.omega()));
            let mats = build_kernel_matrices(lo, hi, &self.grid, self.exp, nodes)?;
            let solved: Vec<Vec<Occupation>> = mats
                .par_iter()
                .enumerate()
                .map(|(c, m)| occupations_from_kernel(m, lo + c))
                .collect::<Result<_>>()?;
            self.per_l.extend(solved);
        }
        Ok(())
    }

    /// Occupations of partial waves `0..=l_max`.
    pub fn spectrum(&mut self, l_max: usize) -> Result<OccupationSpectrum> {
        self.ensure(l_max)?;
        Ok(OccupationSpectrum {
            entries: self.per_l[..=l_max].iter().flatten().copied().collect(),
            orbitals: None,
        })
    }

    pub fn partial_wave(&mut self, l: usize) -> Result<&[Occupation]> {
        self.ensure(l)?;
        Ok(&self.per_l[l])
    }
}

/// Von Neumann entropy (bits) and linear entropy of a spectrum. The sums
/// run in entry order, which is fixed by `(l, n)`.
pub fn entropies(spec: &OccupationSpectrum) -> Result<EntropyResult> {
    if spec.entries.is_empty() {
        return Err(Error::InvalidArgument("spectrum has no occupations".into()));
    }
    let mut s = 0.0;
    let mut purity = 0.0;
    for o in &spec.entries {
        if o.lambda > 1.0 + LAMBDA_SLACK {
            return Err(Error::Consistency { lambda: o.lambda });
        }
        let g = (2 * o.l + 1) as f64;
        if o.lambda > 0.0 {
            s -= g * o.lambda * o.lambda.log2();
        }
        purity += g * o.lambda * o.lambda;
    }
    Ok(EntropyResult {
        von_neumann: s,
        linear: 1.0 - purity,
        spectrum: spec.clone(),
        ladder: Vec::new(),
    })
}

/// Entropies of `exp` at a single `(R, n_m, l_m)`.
pub fn entropies_at(exp: &HylleraasExpansion, rung: Rung) -> Result<EntropyResult> {
    let mut spectra = PartialWaveSpectra::new(exp, rung.grid()?);
    let mut result = entropies(&spectra.spectrum(rung.l_max)?)?;
    result.ladder.push(rung.record(&result));
    Ok(result)
}

/// One step of a convergence ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub radius: f64,
    pub intervals: usize,
    pub l_max: usize,
}

impl Rung {
    pub fn new(radius: f64, intervals: usize, l_max: usize) -> Self {
        Self {
            radius,
            intervals,
            l_max,
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.radius, self.intervals)
    }

    fn record(&self, result: &EntropyResult) -> LadderRecord {
        LadderRecord {
            radius: self.radius,
            intervals: self.intervals,
            l_max: self.l_max,
            von_neumann: result.von_neumann,
            linear: result.linear,
            deficit: result.spectrum.deficit(),
        }
    }
}

/// Helium ladder; ions with `Z >= 2` scale the box by `2 / Z` at fixed
/// `n_m`, which keeps the grid spacing fixed relative to the orbital size.
const HELIUM_LADDER: [(f64, usize); 4] = [(7.0, 300), (9.0, 600), (10.0, 1200), (12.0, 1440)];

/// The loosely bound outer electron of H- needs a much larger box.
const HYDRIDE_LADDER: [(f64, usize); 4] = [(20.0, 600), (30.0, 900), (40.0, 1200), (50.0, 1500)];

/// Default ladder summing partial waves up to `l_max` at every rung. Between
/// `Z = 1` and `Z = 2` the rungs are interpolated linearly.
pub fn default_schedule(z: f64, l_max: usize) -> Vec<Rung> {
    if z >= 2.0 {
        return HELIUM_LADDER
            .iter()
            .map(|&(r, n)| Rung::new(r * 2.0 / z, n, l_max))
            .collect();
    }
    let w = (2.0 - z).clamp(0.0, 1.0);
    HELIUM_LADDER
        .iter()
        .zip(&HYDRIDE_LADDER)
        .map(|(&(r_he, n_he), &(r_h, n_h))| {
            let r = (1.0 - w) * r_he + w * r_h;
            let n = ((1.0 - w) * n_he as f64 + w * n_h as f64).round() as usize;
            Rung::new(r, n, l_max)
        })
        .collect()
}

/// Walks `schedule` until two successive rungs agree to within `tol_s` in the
/// von Neumann entropy and `tol_l` in the linear entropy.
pub fn converge(exp: &HylleraasExpansion, tol_s: f64, tol_l: f64, schedule: &[Rung]) -> Result<EntropyResult> {
    if !(tol_s > 0.0 && tol_l > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty schedule".into()));
    }
    for w in schedule.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.radius < a.radius || b.intervals < a.intervals || b.l_max < a.l_max {
            return Err(Error::InvalidArgument(format!(
                "schedule must be nondecreasing in R, n_m and l_m: {a:?} then {b:?}"
            )));
        }
    }
    let mut ladder: Vec<LadderRecord> = Vec::new();
    let mut cache: Option<PartialWaveSpectra> = None;
    for rung in schedule {
        let grid = rung.grid()?;
        let reuse = matches!(&cache, Some(c) if *c.grid() == grid);
        if !reuse {
            cache = Some(PartialWaveSpectra::new(exp, grid));
        }
        let spectra = cache.as_mut().expect("cache populated above");
        let mut result = entropies(&spectra.spectrum(rung.l_max)?)?;
        let record = rung.record(&result);
        let converged = ladder.last().is_some_and(|prev| {
            (record.von_neumann - prev.von_neumann).abs() < tol_s
                && (record.linear - prev.linear).abs() < tol_l
        });
        ladder.push(record);
        if converged {
            result.ladder = ladder;
            return Ok(result);
        }
    }
    let keep = ladder.len().saturating_sub(2);
    Err(Error::ConvergenceFailure {
        last: ladder.split_off(keep),
    })
}
