use crate::types::Vec3;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("transversality violated: |E.alpha| = {0:.3e} exceeds 1e-12")]
    Transversality(f64),

    #[error("incident direction is not a unit vector: |alpha| = {0:.17}")]
    NonUnitDirection(f64),

    #[error("wavenumber must be positive, got {0}")]
    NonPositiveWavenumber(f64),

    #[error("particle radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("kappa out of (0,3): {0}")]
    KappaOutOfRange(f64),

    #[error("Im(gamma) must be >= 0, got {0}")]
    NegativeImGamma(f64),

    #[error("density N(x) must be >= 0, found {value} at {at:?}")]
    NegativeDensity { value: f64, at: Vec3 },

    #[error("coincident points: |x - y| = {0:.3e} below singularity threshold")]
    CoincidentPoints(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integrand is not finite at node {node:?}")]
    NonFiniteIntegrand { node: Vec3 },

    #[error("degenerate potential: |K^2| = {0:.3e} below 1e-12")]
    DegeneratePotential(f64),

    #[error("singular profile: k^2 + p(r) vanishes near r = {0:.6e}")]
    SingularProfile(f64),

    #[error("body is not small: |a_m| = {0:.6} >= 1")]
    BodyNotSmall(f64),

    #[error("resonant denominator: |(1-a_m)(1-b_m) - B_m.A_m| = {0:.3e}")]
    ResonantDenominator(f64),

    #[error("overlapping particles {0} and {1}: center distance {2:.6e} < 2a")]
    OverlappingParticles(usize, usize, f64),

    #[error("linear system is singular or ill-conditioned (condition estimate {0:.3e})")]
    IllConditioned(f64),

    #[error("contraction norm {0:.6} >= 1: fixed-point iteration refused")]
    NotContractive(f64),

    #[error("iteration did not converge after {iters} steps (last residual {residual:.3e})")]
    NonConvergence { iters: usize, residual: f64 },

    #[error("packing infeasible: subcube at {at:?} requires {required} particles, placed {placed}")]
    PackingInfeasible { at: Vec3, required: usize, placed: usize },

    #[error("mesh degeneracy: {0}")]
    MeshDegeneracy(String),

    #[error("negative-refraction check requires real n; Im n = {0:.3e}")]
    ComplexRefractionIndex(f64),
}
