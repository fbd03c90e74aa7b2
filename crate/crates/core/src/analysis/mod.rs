//! Statistics, way-point filtering and horizon-bounded property checks over
//! execution sequences.

mod properties;
mod stats;
mod waypoint;

use thiserror::Error;

use crate::engine::{EngineError, ExecutionSequence, SequenceView};
use crate::model::{Marking, UnknownNode};

pub use properties::{
    bounded, deadlocks, liveness_basic, observed_max, p_invariants, place_sets, reachable,
    source_name, t_invariants, with_sources, Deadlock, Liveness, PInvariants, Reachability,
    TInvariant, Violation, MAX_SUBSETS,
};
pub use stats::{
    decimal_string, fraction_string, place_stats, place_stats_layered, rate, PlaceSeries,
    RateResult, StatsAccumulator, StatsRow, StepStats,
};
pub use waypoint::{filter_waypoints, Comparator, Condition, Waypoint, WaypointFilter, When};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("no sequences to analyse")]
    EmptyInput,
    #[error("sequences have different horizons")]
    MixedHorizons,
    #[error("rates need a horizon of at least 1")]
    ZeroHorizon,
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("invalid predicate `{0}`")]
    InvalidPredicate(String),
    #[error("name `{0}` is reserved for generated source transitions")]
    ReservedName(String),
    #[error("{candidates} place subsets of size <= {max_subset_size} over {places} places exceed the search limit")]
    SubsetLimitExceeded {
        places: usize,
        max_subset_size: usize,
        candidates: u64,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl From<UnknownNode> for AnalysisError {
    fn from(e: UnknownNode) -> Self {
        AnalysisError::UnknownName(e.0)
    }
}

/// Anything exposing the markings of an execution at steps `0..=horizon`.
pub trait Trajectory {
    fn horizon(&self) -> usize;
    fn marking_at(&self, step: usize) -> &Marking;
}

impl Trajectory for ExecutionSequence {
    fn horizon(&self) -> usize {
        ExecutionSequence::horizon(self)
    }

    fn marking_at(&self, step: usize) -> &Marking {
        self.marking(step)
    }
}

impl Trajectory for SequenceView<'_> {
    fn horizon(&self) -> usize {
        SequenceView::horizon(self)
    }

    fn marking_at(&self, step: usize) -> &Marking {
        self.marking(step)
    }
}
