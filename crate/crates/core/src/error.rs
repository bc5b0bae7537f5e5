use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation would push an occupation number (or the total photon
    /// count) past the configured truncation caps. The caps are a hard
    /// boundary: silently dropping the overflowing term would corrupt
    /// normalization downstream, so the caller must raise the caps instead.
    #[error("fock-space cap exceeded at {scope}: occupation {occupancy} over cap {cap}")]
    TruncationOverflow {
        scope: String,
        occupancy: u32,
        cap: u32,
    },

    #[error("mode transform is not unitary (max deviation {deviation:.3e} from U\u{2020}U = 1)")]
    NonUnitaryTransform { deviation: f64 },

    #[error("mode transform output {mode} collides with an occupied bystander mode")]
    ModeCollision { mode: String },

    #[error("states live in different truncation caps")]
    CapsMismatch,

    #[error("cannot normalize a state with vanishing norm")]
    ZeroNorm,

    #[error("{param} = {value} outside the admissible range {allowed}")]
    Domain {
        param: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("quadrature failed to reach tolerance {requested:.1e} (best estimate error {achieved:.1e})")]
    QuadratureFailure { requested: f64, achieved: f64 },

    #[error("infeasible configuration: damping amplitude {kappa:.6} falls outside [-1, 1]")]
    InfeasibleConfiguration { kappa: f64 },

    #[error("detector model mismatch: expected {expected}, got {got}")]
    InvalidDetectorModel { expected: &'static str, got: String },

    /// Raised when post-selection accepts nothing, so no fidelity ratio exists.
    #[error("post-selection probability is zero; fidelities are undefined")]
    BlockedConfiguration,
}
