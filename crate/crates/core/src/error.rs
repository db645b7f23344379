use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate tetrahedron: the four vertices are coplanar, no unique circumsphere")]
    DegenerateTetrahedron,

    #[error("degenerate lattice: |det| = {det:e} is below the threshold {threshold:e}")]
    DegenerateLattice { det: f64, threshold: f64 },

    #[error("placement failed validation: {0}")]
    InvalidPlacement(String),

    #[error("period-mark detection found {found} marks, expected 6 (two per generator)")]
    PeriodMarks { found: usize },

    #[error("infeasible D3 parameters: {0}")]
    Infeasible(String),

    #[error("tetrahedron reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("flex analysis: kernel dimension {kernel} is smaller than the 6 trivial motions (tolerance {tol:e} misconfigured?)")]
    TrivialMotionsUnresolved { kernel: usize, tol: f64 },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { location: location.into(), message: message.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
