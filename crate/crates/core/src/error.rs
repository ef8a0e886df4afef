use thiserror::Error;

/// Errors shared across the model, solvers and simulator.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("singular linear system")]
    SingularSystem,

    #[error("non-absorbing chain: {0}")]
    NonAbsorbingChain(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: u64, residual: f64 },

    #[error("invalid bracket: endpoints do not straddle a root")]
    InvalidBracket,

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("population cap {cap} exceeded at generation {t} ({population} cells)")]
    PopulationCap { t: u32, population: u64, cap: u64 },

    #[error("lineage {lineage} exceeded the step cap of {cap}")]
    LineageStepCap { lineage: u64, cap: u64 },

    #[error("population extinct at generation {t}")]
    Extinct { t: u32 },

    #[error("parse error: {0}")]
    Parse(String),
}
