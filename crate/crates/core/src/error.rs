use std::fmt;

/// One rung of an entropy convergence ladder together with what it produced.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LadderRecord {
    pub radius: f64,
    pub intervals: usize,
    pub l_max: usize,
    pub von_neumann: f64,
    pub linear: f64,
    /// `1 - sum (2l+1) lambda` over the retained occupations.
    pub deficit: f64,
}

impl fmt::Display for LadderRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "R={} n_m={} l_m={}: S={:.9} L={:.9} deficit={:.3e}",
            self.radius, self.intervals, self.l_max, self.von_neumann, self.linear, self.deficit
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value out of representable range: {0}")]
    Range(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The overlap matrix lost positive definiteness at `pivot`.
    #[error("overlap matrix is not positive definite (Cholesky pivot {pivot} = {value:e}); reduce omega")]
    Conditioning { pivot: usize, value: f64 },

    #[error("no interior minimum in [{lo}, {hi}]: E(lo) = {energy_lo}, E(hi) = {energy_hi}, best interior E = {energy_best}")]
    Bracket {
        lo: f64,
        hi: f64,
        energy_lo: f64,
        energy_hi: f64,
        energy_best: f64,
    },

    #[error("ground state is not separated from the first excited root (gap {gap:e})")]
    SpectralGap { gap: f64 },

    #[error("occupation number {lambda} exceeds 1; the wavefunction is not normalized")]
    Consistency { lambda: f64 },

    #[error("entropy ladder exhausted without convergence; last rungs: {}", .last.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" | "))]
    ConvergenceFailure { last: Vec<LadderRecord> },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
