//! Multitype Galton-Watson model of rejuvenating cell populations.
//!
//! Cells carry a biological age in {0, ..., n}. Each generation a cell takes
//! on new damage, may divide, and on division splits its damage load
//! binomially between itself and a newborn daughter — so a division can leave
//! the mother *younger* than she was. Age n is senescence: such cells never
//! divide again.
//!
//! The crate computes the exact single-cell transition kernel, the states and
//! interval where division rejuvenates on average, expected replicative
//! lifespans, and the population growth rate with its stable age structure —
//! and ships a seeded Monte Carlo simulator whose output is reproducible
//! bit-for-bit regardless of thread count, used to cross-validate all of the
//! analytical results.
//!
//! ```
//! use gwcell::model::MAlphaParams;
//!
//! let params = MAlphaParams::new(100, 15, 0.5, 2.0).unwrap().params();
//! let spectrum = gwcell::branching::spectral(&params).unwrap();
//! assert!(spectrum.r > 1.0, "this population grows");
//! ```

pub mod branching;
pub mod error;
pub mod lifespan;
pub mod model;
pub mod numerics;
pub mod rng;
pub mod simulator;
pub mod stats;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
