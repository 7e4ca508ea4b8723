//! System-level simulator for a two-tier cellular V2X downlink.
//!
//! Vehicles are grouped with a mobility-aware DBSCAN variant, each group is
//! served by a drone base station hovering over its centroid, users are paired
//! for power-domain NOMA, channels are matched to groups with the Hungarian
//! method and the resulting total spectral efficiency is evaluated. Vehicles
//! left outside every cluster are served by the macro base station.
//!
//! The pipeline for one snapshot is:
//!
//! 1. [`mobility::spawn_vehicles`]
//! 2. [`clustering::form_clusters`] and [`clustering::place_dbs`]
//! 3. [`allocation::build_plan`]
//!
//! [`experiments`] wires these together for multi-seed parameter sweeps.

pub mod allocation;
pub mod assignment;
pub mod clustering;
mod error;
pub mod experiments;
pub mod geometry;
pub mod mobility;
pub mod output;
pub mod radio;
pub mod scenario;

pub use allocation::{AllocationPlan, GainTable, NomaGroup, StationId};
pub use clustering::{Cluster, ClusterRules, Clustering, DbsStation};
pub use error::{Error, Result};
pub use experiments::{Method, ScenarioOutcome, SweepParam, SweepResult, SweepRow, SweepSpec};
pub use geometry::{Point2, Point3};
pub use mobility::Vehicle;
pub use scenario::{ScenarioConfig, ScenarioState};
