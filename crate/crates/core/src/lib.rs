//! Topological gait analysis toolkit.
//!
//! The pipeline goes: univariate foot-clearance series -> time-delay embedding
//! into point clouds -> Vietoris-Rips persistent homology (H0, H1) ->
//! fixed-grid descriptor vectors (Betti curves, persistence landscapes,
//! power-weighted silhouettes) -> seeded random-forest classification under
//! subject-wise leave-one-out cross-validation.

pub mod classify;
pub mod descriptors;
pub mod homology;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod synthgait;
