//! Hylleraas-type ground states of two-electron atoms and the entanglement
//! of their electrons.
//!
//! ```
//! use heliox::spectrum::{entropies_at, Rung};
//! use heliox::variational::{default_bracket, optimize_mu};
//!
//! let gs = optimize_mu(2.0, 4, default_bracket(2.0), 1e-6)?;
//! let r = entropies_at(&gs.expansion, Rung::new(8.0, 160, 2))?;
//! assert!(r.linear > 0.015 && r.linear < 0.017);
//! # Ok::<(), heliox::Error>(())
//! ```

pub mod basis;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod quadrature;
pub mod spectrum;
pub mod variational;

pub use error::{Error, LadderRecord, Result};

// the guide's code blocks run as doctests
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/hylleraas.md")]
    mod hylleraas {}
    #[doc = include_str!("../../../book/src/variational.md")]
    mod variational {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/convergence.md")]
    mod convergence {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
