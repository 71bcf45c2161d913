use thiserror::Error;

pub type Result<T> = std::result::Result<T, KerrError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KerrError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid shape mismatch: {0}")]
    Shape(String),

    #[error("could not bracket a potential minimum: {0}")]
    Bracket(String),

    #[error("no Kerr-free flux: c4 keeps sign {sign} on (0, 0.5) for N={junctions}, alpha={alpha}")]
    NoKerrFreePoint {
        junctions: u32,
        alpha: f64,
        sign: f64,
    },

    #[error("no ENZ point: Re eps has no sign change on (0, 10 omega_p] (eps_inf={eps_inf})")]
    NoEnzPoint { eps_inf: f64 },

    #[error("|eps(omega)| = {abs_eps:e} is below the singularity guard; offset omega or use gamma > 0")]
    Singular { abs_eps: f64 },

    #[error("strong mixing: bare state {label:?} has best overlap {fidelity:.4} <= 0.5")]
    StrongMixing { label: Vec<usize>, fidelity: f64 },

    #[error("spectrum has no state labeled {0:?}")]
    MissingLabel(Vec<usize>),

    #[error("Hilbert-space dimension {requested} exceeds the limit {limit}")]
    DimensionOverflow { requested: usize, limit: usize },

    #[error("eigensolver did not converge after {0} iterations")]
    NoConvergence(usize),
}

impl KerrError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        KerrError::Domain(msg.into())
    }
}
