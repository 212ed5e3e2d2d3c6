use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::error::Error;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Projected,
    Subspace,
    Multiplier,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Projected, Algorithm::Subspace, Algorithm::Multiplier];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Projected => "projected",
            Algorithm::Subspace => "subspace",
            Algorithm::Multiplier => "multiplier",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Algorithm::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| Error::Unsupported(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T> {
    pub k: usize,
    pub h: Vec<T>,
    pub lambda: Option<Vec<T>>,
    /// Step used to leave `hᵏ` (the step of the last iteration for the final
    /// record).
    pub gamma: T,
    /// Samples drawn at `hᵏ`; 0 in exact-oracle mode.
    pub samples: usize,
    pub map_error: Option<T>,
    pub wall_clock: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TerminalStatus {
    Completed,
    Diverged { k: usize },
    Error(String),
}

impl TerminalStatus {
    pub fn label(&self) -> &'static str {
        match self {
            TerminalStatus::Completed => "completed",
            TerminalStatus::Diverged { .. } => "diverged",
            TerminalStatus::Error(_) => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<T> {
    pub algorithm: Algorithm,
    pub records: Vec<TraceRecord<T>>,
    pub status: TerminalStatus,
    /// Iterations actually executed.
    pub iterations: usize,
    pub clamp_events: usize,
    pub projection_calls: usize,
}

impl<T: Real> RunTrace<T> {
    pub fn last(&self) -> Option<&TraceRecord<T>> {
        self.records.last()
    }

    pub fn final_iterate(&self) -> Option<&[T]> {
        self.records.last().map(|r| r.h.as_slice())
    }

    pub fn final_error(&self) -> Option<T> {
        self.records.last().and_then(|r| r.map_error)
    }

    /// `(k, error)` for every record carrying an error.
    pub fn errors(&self) -> Vec<(usize, T)> {
        self.records.iter().filter_map(|r| r.map_error.map(|e| (r.k, e))).collect()
    }
}
