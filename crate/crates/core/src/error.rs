//! Error types, one enum per module plus a wrapper that remembers where it came from.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("invalid potential: {0}")]
    Invalid(String),
    #[error("degenerate critical point at {point:?} (|eigenvalue| = {eigenvalue:.3e})")]
    DegenerateCriticalPoint { point: Vec<f64>, eigenvalue: f64 },
    #[error("no local minima found in the search box")]
    NoMinima,
    #[error("radial coercivity margin never becomes positive up to r = {0}")]
    NotCoercive(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontError {
    #[error("speed {s} is not subsonic for alpha = {alpha} (|s| must be < {limit})")]
    SupersonicSpeed { s: f64, alpha: f64, limit: f64 },
    #[error("shooting bracket [{lo}, {hi}] does not straddle a sign change")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("profile integration blew up at xi = {xi} (c = {c})")]
    IntegrationBlowup { xi: f64, c: f64 },
    #[error("Newton iteration stalled: {0}")]
    NewtonStall(String),
    #[error("profile does not connect the requested endpoints: {0}")]
    WrongEndpoint(String),
    #[error("profile never reaches distance d_Esc from m_plus")]
    NoCrossing,
    #[error("tail too short for a rate fit: {0}")]
    TailTooShort(String),
    #[error("invalid front request: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("interface at x = {x} lies within {margin} of the domain boundary")]
    DomainTooSmall { x: f64, margin: f64 },
    #[error("non-finite value at x = {x}, t = {t}")]
    NonFinite { x: f64, t: f64 },
    #[error("boundary breach at t = {t}: |u - m_end| = {deviation:.3e} on the {side} boundary layer")]
    BoundaryBreach { t: f64, side: &'static str, deviation: f64 },
    #[error("time step violates the stability bound: {0}")]
    Cfl(String),
    #[error("invalid simulation setup: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagError {
    #[error("constant constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("hull condition fails already at x_l = x_hom - 1 (t = {t})")]
    HullViolationAtHom { t: f64 },
    #[error("frame parameters out of range: {0}")]
    FrameOutOfRange(String),
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error("time window incomplete: {0}")]
    WindowIncomplete(String),
    #[error("series too short: {0}")]
    SeriesTooShort(String),
    #[error("hypothesis failure: {0}")]
    HypothesisFailure(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TerraceError {
    #[error("plateau value {0:?} matches no known minimum")]
    UnknownPlateau(Vec<f64>),
    #[error("no library front connects {lower:?} -> {upper:?} at speed {c:.5}")]
    NoLibraryFront { lower: Vec<f64>, upper: Vec<f64>, c: f64 },
    #[error("a front track enters the center region at t = {0}")]
    CenterContaminated(f64),
    #[error("invalid terrace: {0}")]
    Invalid(String),
}

/// Any error raised by the library, tagged with the module it came from.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("potential: {0}")]
    Potential(#[from] PotentialError),
    #[error("frontsolver: {0}")]
    Front(#[from] FrontError),
    #[error("pdesim: {0}")]
    Sim(#[from] SimError),
    #[error("diagnostics: {0}")]
    Diag(#[from] DiagError),
    #[error("terrace: {0}")]
    Terrace(#[from] TerraceError),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn module(&self) -> &'static str {
        match self {
            Error::Potential(_) => "potential",
            Error::Front(_) => "frontsolver",
            Error::Sim(_) => "pdesim",
            Error::Diag(_) => "diagnostics",
            Error::Terrace(_) => "terrace",
            Error::Io(_) => "io",
        }
    }

    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::Potential(PotentialError::Invalid(_))
                | Error::Front(FrontError::Invalid(_))
                | Error::Front(FrontError::SupersonicSpeed { .. })
                | Error::Sim(SimError::Invalid(_))
                | Error::Sim(SimError::DomainTooSmall { .. })
                | Error::Sim(SimError::Cfl(_))
                | Error::Terrace(TerraceError::Invalid(_))
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
