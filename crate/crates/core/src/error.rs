use thiserror::Error;

/// Errors raised by the crane model, controllers, trajectory generators and
/// the scenario runner.
#[derive(Debug, Error)]
pub enum Error {
    /// A state left the region where the transformation and the model are regular.
    #[error("state outside the valid domain: {0}")]
    Domain(String),

    /// A map lost rank at the supplied point.
    #[error("singular point in {context}: {detail}")]
    Singular {
        context: &'static str,
        detail: String,
    },

    #[error("invalid crane parameters: {0}")]
    InvalidParams(String),

    #[error("invalid error dynamics: {0}")]
    InvalidDynamics(String),

    #[error("invalid reference: {0}")]
    InvalidReference(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    /// The optimizer stopped without a feasible stationary point.
    #[error("optimizer failed: {0}")]
    OptimizerFailed(Box<crate::trajectory::OptimizerFailure>),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
