//! Global radio-resource allocation in a heterogeneous mobile/wireless
//! network system.
//!
//! A circular service area is covered by one mobile network and contains
//! disjoint circular sub-zones, each also covered by a wireless network.
//! Users move according to a 2D fluid-flow model, request services, and draw
//! resource units from (zone, network) pools. A finite-horizon Bellman
//! solver decides how fast pools are drained; classical schedulers serve as
//! baselines.
//!
//! Modules, bottom-up:
//!
//! - [`geometry`]: zones, areas, perimeters and presence probabilities
//! - [`mobility`]: fluid-flow exit rates and handover rates
//! - [`traffic`]: users, services and OFDM modulation profiles
//! - [`allocator`]: grants, occupancy, network choice, capacity, state updates
//! - [`bellman`]: dynamic-programming solver, exhaustive oracle, forward loop
//! - [`baselines`]: round robin, random access, FQ, max-min, WFQ, MaxSNR, PF
//! - [`simengine`]: the discrete-step simulation driver
//! - [`scenario`] and [`report`]: file formats used by the `hetalloc` CLI

pub mod allocator;
pub mod baselines;
pub mod bellman;
pub mod geometry;
pub mod mobility;
pub mod report;
pub mod scenario;
pub mod simengine;
pub mod traffic;

use thiserror::Error;

pub use allocator::{AllocationRecord, ResourceState};
pub use bellman::{brute_force_oracle, solve_dp, DpInstance, PolicyTrace};
pub use geometry::{ServiceArea, Zone, ZoneId};
pub use report::{ReportFormat, ReportRow};
pub use scenario::{load_scenario, AllocatorKind, Scenario};
pub use simengine::{run, summarize, SimulationRun, StepReport, Summary};
pub use traffic::{ModulationProfile, NetworkId, ServiceId, UserId};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Scenario(#[from] scenario::ScenarioError),
    #[error(transparent)]
    Simulation(#[from] simengine::SimError),
    #[error(transparent)]
    Report(#[from] report::ReportError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable category.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Scenario(scenario::ScenarioError::Io { .. }) | Error::Io(_) => "io",
            Error::Scenario(scenario::ScenarioError::Parse { .. }) => "parse",
            Error::Scenario(scenario::ScenarioError::Invalid(_)) => "validation",
            Error::Simulation(_) => "simulation",
            Error::Report(_) => "report",
            Error::Usage(_) => "usage",
        }
    }
}
