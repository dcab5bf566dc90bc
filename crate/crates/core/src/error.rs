use thiserror::Error;

pub type Result<T, E = SpmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SpmError {
    #[error("invalid problem: {0}")]
    InvalidSpec(String),

    #[error("test function is not finite at particle {index}")]
    NonFiniteEvaluation { index: usize },

    #[error("rejection acceptance rate {rate:.3e} is below the floor {floor:.3e}")]
    AcceptanceTooLow { rate: f64, floor: f64 },

    #[error("rejection envelope violated: |u0|/q = {ratio:.6e} exceeds envelope {envelope:.6e}")]
    EnvelopeViolated { ratio: f64, envelope: f64 },

    #[error("fractional random walk exceeded {cap} jumps in one step (check the cut-off)")]
    JumpCapExceeded { cap: u64 },

    #[error("total variation Z = {z} is not positive; the reconstructed field has cancelled out")]
    DegenerateZ { z: f64 },

    #[error("nonlinearity {0} does not vanish where the solution vanishes; strategy A cannot use it")]
    AssumptionViolated(&'static str),

    #[error("particle {index} lies outside the partition box")]
    ParticleOutsideBox { index: usize },

    #[error("cannot split a block {cells_x}x{cells_y} cells wide any further")]
    PartitionTooCoarse { cells_x: usize, cells_y: usize },

    #[error("lattice coordinate {value} does not fit in 32 bits")]
    CoordinateOverflow { value: f64 },

    #[error("quadrature error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    QuadratureFailed { estimate: f64, tolerance: f64 },

    #[error("reference has zero norm")]
    ZeroReferenceNorm,

    #[error("gridded functions live on different lattices")]
    LatticeMismatch,

    #[error("reference solution still above threshold at the box boundary after {retries} enlargements")]
    BoxTooSmall { retries: usize },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<SpmError>,
    },

    #[error("malformed map file at line {line}: {reason}")]
    MapFormat { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SpmError {
    pub(crate) fn at_step(self, step: usize) -> SpmError {
        match self {
            e @ SpmError::Step { .. } => e,
            e => SpmError::Step {
                step,
                source: Box::new(e),
            },
        }
    }

    /// Step index recorded by a solver abort, if any.
    pub fn step(&self) -> Option<usize> {
        match self {
            SpmError::Step { step, .. } => Some(*step),
            _ => None,
        }
    }
}
