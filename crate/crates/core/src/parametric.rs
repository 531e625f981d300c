//! Monotone parametric segmentation problems and their per-lambda solves.
//!
//! A [`SeedProblem`] instantiates to one grid graph per lambda:
//!
//! * `src_cap[v] = unary_base[v] + lambda * unary_slope[v]` (`CAP_MAX` for foreground seeds)
//! * `snk_cap[v] = sink_base[v]` (`CAP_MAX` for background seeds)
//! * `nbr_cap = pairwise`
//!
//! With non-negative slopes only the source capacities grow with lambda, so
//! canonical cuts are nested along any increasing schedule.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{cut_cost, AdmissionError, Cap, CutResult, Dir, GridGraph, CAP_MAX};
use crate::maxflow::{maxflow_pushrelabel, SolveError};

/// Log-spaced default schedule, 20 values from 8 to 512 (fixed point).
pub const DEFAULT_LAMBDAS_20: [i64; 20] = [
    8, 10, 12, 15, 19, 24, 30, 37, 46, 57, 71, 89, 111, 138, 171, 213, 266, 330, 411, 512,
];

/// Halved schedule over the same range.
pub const DEFAULT_LAMBDAS_10: [i64; 10] = [8, 13, 20, 32, 51, 81, 128, 203, 323, 512];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("lambda schedule is empty")]
    Empty,
    #[error("lambda {value} at position {index} is negative")]
    Negative { index: usize, value: i64 },
    #[error("lambda schedule is not strictly increasing at position {index}")]
    NotIncreasing { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct LambdaSchedule(Vec<i64>);

impl LambdaSchedule {
    pub fn new(values: Vec<i64>) -> Result<Self, ScheduleError> {
        if values.is_empty() {
            return Err(ScheduleError::Empty);
        }
        for (index, &value) in values.iter().enumerate() {
            if value < 0 {
                return Err(ScheduleError::Negative { index, value });
            }
            if index > 0 && values[index - 1] >= value {
                return Err(ScheduleError::NotIncreasing { index });
            }
        }
        Ok(LambdaSchedule(values))
    }

    pub fn default_20() -> Self {
        LambdaSchedule(DEFAULT_LAMBDAS_20.to_vec())
    }

    pub fn default_10() -> Self {
        LambdaSchedule(DEFAULT_LAMBDAS_10.to_vec())
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the representative mid-schedule value, `ceil(n/2) - 1`.
    pub fn mid_index(&self) -> usize {
        self.0.len().div_ceil(2) - 1
    }
}

impl Default for LambdaSchedule {
    fn default() -> Self {
        Self::default_20()
    }
}

impl TryFrom<Vec<i64>> for LambdaSchedule {
    type Error = ScheduleError;

    fn try_from(values: Vec<i64>) -> Result<Self, Self::Error> {
        LambdaSchedule::new(values)
    }
}

impl From<LambdaSchedule> for Vec<i64> {
    fn from(s: LambdaSchedule) -> Self {
        s.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("grid must have at least one pixel")]
    EmptyGrid,
    #[error("{field} has {actual} entries, expected {expected}")]
    SizeMismatch {
        field: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("negative lambda multiplier {value} at pixel {pixel}")]
    NegativeSlope { pixel: usize, value: i64 },
    #[error("seed pixel {pixel} lies outside the grid")]
    SeedOutOfRange { pixel: usize },
    #[error("pixel {pixel} is both a foreground and a background seed")]
    SeedOverlap { pixel: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("lambda {0} is negative")]
    NegativeLambda(i64),
    #[error("capacity at pixel {pixel} ({field}) is out of range for lambda {lambda}")]
    Overflow {
        pixel: usize,
        field: &'static str,
        lambda: i64,
    },
    #[error(transparent)]
    Admission(#[from] AdmissionError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParametricError {
    #[error("lambda index {index}: {source}")]
    Instantiate {
        index: usize,
        source: InstantiateError,
    },
    #[error("lambda index {index}: {source}")]
    Solve { index: usize, source: SolveError },
}

/// A figure-ground problem parameterised by the foreground bias lambda.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedProblem {
    pub width: usize,
    pub height: usize,
    pub unary_base: Vec<i64>,
    pub unary_slope: Vec<i64>,
    pub sink_base: Vec<i64>,
    /// Indexed by pixel, then by [`Dir::index`].
    pub pairwise: Vec<[i64; 4]>,
    pub fg_seeds: BTreeSet<usize>,
    pub bg_seeds: BTreeSet<usize>,
}

impl SeedProblem {
    /// A problem with every term zero and no seeds.
    pub fn zeros(width: usize, height: usize) -> Self {
        let n = width * height;
        SeedProblem {
            width,
            height,
            unary_base: vec![0; n],
            unary_slope: vec![0; n],
            sink_base: vec![0; n],
            pairwise: vec![[0; 4]; n],
            fg_seeds: BTreeSet::new(),
            bg_seeds: BTreeSet::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Both seed sets present, as a figure-ground problem requires.
    pub fn is_well_posed(&self) -> bool {
        !self.fg_seeds.is_empty() && !self.bg_seeds.is_empty()
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.width == 0 || self.height == 0 {
            return Err(ProblemError::EmptyGrid);
        }
        let n = self.len();
        for (field, actual) in [
            ("unary_base", self.unary_base.len()),
            ("unary_slope", self.unary_slope.len()),
            ("sink_base", self.sink_base.len()),
            ("pairwise", self.pairwise.len()),
        ] {
            if actual != n {
                return Err(ProblemError::SizeMismatch {
                    field,
                    expected: n,
                    actual,
                });
            }
        }
        if let Some((pixel, &value)) = self.unary_slope.iter().enumerate().find(|(_, &s)| s < 0) {
            return Err(ProblemError::NegativeSlope { pixel, value });
        }
        if let Some(&pixel) = self.fg_seeds.iter().chain(&self.bg_seeds).find(|&&p| p >= n) {
            return Err(ProblemError::SeedOutOfRange { pixel });
        }
        if let Some(&pixel) = self.fg_seeds.intersection(&self.bg_seeds).next() {
            return Err(ProblemError::SeedOverlap { pixel });
        }
        Ok(())
    }

    /// Builds and admits the graph for one lambda value.
    pub fn instantiate(&self, lambda: i64) -> Result<GridGraph, InstantiateError> {
        self.validate()?;
        if lambda < 0 {
            return Err(InstantiateError::NegativeLambda(lambda));
        }
        let finite = |pixel: usize, field: &'static str, value: Option<i64>| -> Result<Cap, InstantiateError> {
            match value {
                Some(v) if (0..CAP_MAX as i64).contains(&v) => Ok(v as Cap),
                _ => Err(InstantiateError::Overflow {
                    pixel,
                    field,
                    lambda,
                }),
            }
        };

        let mut g = GridGraph::zeros(self.width, self.height);
        for v in 0..self.len() {
            let src = self.unary_slope[v]
                .checked_mul(lambda)
                .and_then(|b| b.checked_add(self.unary_base[v]));
            g.src_cap[v] = if self.fg_seeds.contains(&v) {
                CAP_MAX
            } else {
                finite(v, "unary", src)?
            };
            g.snk_cap[v] = if self.bg_seeds.contains(&v) {
                CAP_MAX
            } else {
                finite(v, "sink_base", Some(self.sink_base[v]))?
            };
            for dir in Dir::ALL {
                g.nbr_cap[v][dir.index()] = finite(v, "pairwise", Some(self.pairwise[v][dir.index()]))?;
            }
        }
        Ok(g.admit()?)
    }

    /// Cut cost of `labels` on the lambda instantiation.
    pub fn energy(&self, lambda: i64, labels: &[bool]) -> Result<u64, EnergyError> {
        let g = self.instantiate(lambda)?;
        Ok(cut_cost(&g, labels)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnergyError {
    #[error(transparent)]
    Instantiate(#[from] InstantiateError),
    #[error(transparent)]
    Mask(#[from] crate::graph::MaskSizeMismatch),
}

/// Cuts aligned with the schedule they were solved for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParametricResult {
    pub lambdas: Vec<i64>,
    pub cuts: Vec<CutResult>,
}

impl ParametricResult {
    pub fn flows(&self) -> Vec<u64> {
        self.cuts.iter().map(|c| c.flow).collect()
    }
}

/// One push-relabel solve per lambda, in schedule order.
pub fn solve_schedule_sequential(
    p: &SeedProblem,
    schedule: &LambdaSchedule,
) -> Result<ParametricResult, ParametricError> {
    let mut cuts = Vec::with_capacity(schedule.len());
    for (index, &lambda) in schedule.values().iter().enumerate() {
        let g = p
            .instantiate(lambda)
            .map_err(|source| ParametricError::Instantiate { index, source })?;
        let cut = maxflow_pushrelabel(&g).map_err(|source| ParametricError::Solve { index, source })?;
        cuts.push(cut);
    }
    Ok(ParametricResult {
        lambdas: schedule.values().to_vec(),
        cuts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NestedCheck {
    pub nested: bool,
    /// Smallest `j` whose foreground does not contain foreground `j - 1`.
    pub first_violation: Option<usize>,
}

/// Checks that foreground sets only grow along the result.
pub fn check_nested(r: &ParametricResult) -> NestedCheck {
    let first_violation = r.cuts.windows(2).position(|pair| {
        pair[0]
            .labels
            .iter()
            .zip(&pair[1].labels)
            .any(|(&before, &after)| before && !after)
    });
    NestedCheck {
        nested: first_violation.is_none(),
        first_violation: first_violation.map(|i| i + 1),
    }
}
