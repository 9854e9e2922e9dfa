use thiserror::Error;

/// Failures raised anywhere in the toolkit.
///
/// The split between [`Error::Config`]/[`Error::InvalidInput`] and the
/// numerical variants drives the CLI exit code (1 vs 2).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no root of the characteristic equation in (0, 2) for alpha = {alpha}: {detail}")]
    NoEigenvalue { alpha: f64, detail: String },

    #[error("degenerate notch angle alpha = {alpha}: {detail}")]
    DegenerateAngle { alpha: f64, detail: String },

    #[error("bilinear map inversion did not converge in element {element} at ({x}, {y})")]
    InversionFailed { element: usize, x: f64, y: f64 },

    #[error("point ({x}, {y}) lies outside element {element}")]
    OutsideElement { element: usize, x: f64, y: f64 },

    #[error("singular stiffness matrix: {0}")]
    SingularSystem(String),

    #[error("singular least-squares system in patch of node {node}")]
    SingularPatch { node: usize },

    #[error("interaction integral domain is empty (no element in r_plateau < r < r_outer)")]
    EmptyRing,

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed mesh file, line {line}: {detail}")]
    MeshFormat { line: usize, detail: String },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Whether this failure traces back to bad user input rather than numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::InvalidInput(_) | Error::Config(_) | Error::MeshFormat { .. } => true,
            Error::Context { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
