//! Sampling-based multi-robot mission planning for co-safe temporal logic
//! tasks over uncertain, dynamic semantic maps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod dynamics;
pub mod error;
pub mod executor;
pub mod linalg;
pub mod ltl;
#[cfg(feature = "oracles")]
pub mod oracles;
pub mod planner;
pub mod predicates;
pub mod scenario;
pub mod semantic_map;
pub mod sensing;
pub mod workspace;
