use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("degenerate rib layout: {0}")]
    DegenerateRibLayout(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("probe exceeded elastic range at amplitude {amplitude} mm along {axis} (max stress {stress:.3} MPa)")]
    ProbeNotElastic {
        axis: &'static str,
        amplitude: f64,
        stress: f64,
    },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("rank-deficient regressor: {0}")]
    RankDeficient(String),

    #[error("material `{0}` is already calibrated")]
    AlreadyCalibrated(String),

    #[error("solver diverged at step {step} (residual {residual:.3e})")]
    Diverged { step: usize, residual: f64 },

    #[error("contact resolution did not converge at step {step} (residual {residual:.3e})")]
    ContactNonConvergent { step: usize, residual: f64 },

    #[error("unknown {kind} `{id}`")]
    UnknownEntity { kind: &'static str, id: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
