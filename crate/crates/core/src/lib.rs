//! Simulation primitives for simultaneously transmitting and reflecting
//! reconfigurable surfaces (STAR-RIS).
//!
//! The crate is organized around four building blocks:
//!
//! - [`surface`]: per-element transmission/reflection coefficients, the
//!   passive power cap, the equivalent-circuit mapping and aperture
//!   geometry;
//! - [`channel`]: Ricean small-scale fading, the cascaded far-field channel
//!   and the diffraction-integral near-field channel, plus coverage grids;
//! - [`beamform`]: cophasing of element phases toward a target direction
//!   and beam-peak extraction from coverage grids;
//! - [`analysis`]: outage probability by Monte Carlo, by closed-form
//!   high-SNR asymptotics and by a numerical-convolution oracle, plus
//!   diversity-order estimation.
//!
//! Shared plumbing (3-vectors, the transmit/reflect [`Side`] marker, phase
//! wrapping) lives in [`geometry`] and is re-exported from the crate root.

pub mod analysis;
pub mod beamform;
pub mod channel;
pub mod geometry;
pub mod special;
pub mod surface;

pub use analysis::{
    AnalysisError, LinkBudget, McEstimate, OracleCdf, OutageCurve, OutagePoint, OutageScenario,
    PointKind, ScenarioSurface,
};
pub use beamform::{BeamPeak, BeamformError, SteeringSpec};
pub use channel::{
    ChannelError, CoverageGrid, IncidentField, LinkGeometry, PathLossModel, PlaneSpec,
    RiceanParams,
};
pub use geometry::{Side, Vec3};
pub use surface::{
    Aperture, ElementCoefficients, SurfaceConfig, SurfaceError, SurfaceImpedance, SurfaceKind,
    FREE_SPACE_IMPEDANCE,
};
