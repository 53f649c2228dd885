//! Glued potentials over a partitioned band.

pub mod band_map;
pub mod cutoff;
pub mod glue;
pub mod matching;
pub mod smoothing;

pub use band_map::BandCoordinate;
pub use cutoff::CutoffProfile;
pub use glue::{
    assemble, default_epsilon, verify_conditions, AssembledPotential, BandPotential, ConditionCertificate,
    FnPotential, PartitionedBandSpec, SegmentSpec,
};
pub use matching::{capped_models, match_segments, CapFamily, CappedConstruction, SegmentMatch};
pub use smoothing::{smooth_potential, SmoothingCertificate, SmoothedPotential, SmoothingSide};
