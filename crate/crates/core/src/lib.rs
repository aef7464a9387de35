//! Membership inference and group status ranking on directed follower graphs.
//!
//! Known group memberships are propagated over reciprocal ties, optionally
//! weighted by a learned tie strength. Node status scores are then averaged
//! per group, weighted by inferred membership strength.

pub mod analysis;
pub mod centrality;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod graph;
pub mod group_status;
pub mod inference;
pub mod labels;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{NodeId, SocialGraph};
pub use labels::{GroupCatalog, Labels};
