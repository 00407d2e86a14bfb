//! Trajectory index space: a finite state set `{0, …, cardinality-1}` observed
//! at `interior_count + 2` time points, laid out as a dense row-major tensor
//! with the earliest time most significant.

use crate::error::{Error, Result};

/// Default cap on the number of tensor cells a space may address.
pub const DEFAULT_CELL_BUDGET: usize = 10_000_000;

/// Shape descriptor for distributions over trajectories.
///
/// The time grid has `interior_count + 2` points: the two endpoints plus the
/// interior points between them. Only the indices matter; no real-valued
/// times are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpaceSpec {
    cardinality: usize,
    interior_count: usize,
    num_cells: usize,
}

impl StateSpaceSpec {
    pub fn new(cardinality: usize, interior_count: usize) -> Result<Self> {
        Self::with_budget(cardinality, interior_count, DEFAULT_CELL_BUDGET)
    }

    pub fn with_budget(cardinality: usize, interior_count: usize, budget: usize) -> Result<Self> {
        if cardinality < 2 {
            return Err(Error::Validation(format!(
                "state cardinality must be at least 2, got {cardinality}"
            )));
        }
        if interior_count < 1 {
            return Err(Error::Validation(format!(
                "interior time-point count must be at least 1, got {interior_count}"
            )));
        }
        let time_points = interior_count + 2;
        let mut num_cells = 1usize;
        for _ in 0..time_points {
            num_cells = num_cells
                .checked_mul(cardinality)
                .filter(|&c| c <= budget)
                .ok_or_else(|| {
                    Error::BudgetExceeded(format!(
                        "{cardinality}^{time_points} cells exceed the budget of {budget}"
                    ))
                })?;
        }
        Ok(Self {
            cardinality,
            interior_count,
            num_cells,
        })
    }

    #[inline]
    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    #[inline]
    pub fn interior_count(&self) -> usize {
        self.interior_count
    }

    /// Total number of time points (endpoints included).
    #[inline]
    pub fn time_points(&self) -> usize {
        self.interior_count + 2
    }

    /// Index of the final time point.
    #[inline]
    pub fn last_time(&self) -> usize {
        self.interior_count + 1
    }

    /// Number of cells in the full trajectory tensor.
    #[inline]
    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    /// Row-major strides, one per time point; time 0 is most significant.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.time_points()];
        for t in (0..self.time_points() - 1).rev() {
            strides[t] = strides[t + 1] * self.cardinality;
        }
        strides
    }

    /// State at time `t` for the trajectory with the given linear index.
    #[inline]
    pub fn coord(&self, index: usize, t: usize) -> usize {
        let exp = self.time_points() - 1 - t;
        (index / self.cardinality.pow(exp as u32)) % self.cardinality
    }

    /// Linear index of a trajectory. States are `0..cardinality`; the bijection
    /// is row-major with the state at time 0 most significant.
    pub fn flat_index(&self, trajectory: &[usize]) -> Result<usize> {
        if trajectory.len() != self.time_points() {
            return Err(Error::Domain(format!(
                "trajectory has {} coordinates, expected {}",
                trajectory.len(),
                self.time_points()
            )));
        }
        let mut index = 0usize;
        for (t, &state) in trajectory.iter().enumerate() {
            if state >= self.cardinality {
                return Err(Error::Domain(format!(
                    "coordinate {state} at time {t} is out of range for cardinality {}",
                    self.cardinality
                )));
            }
            index = index * self.cardinality + state;
        }
        Ok(index)
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn unflat_index(&self, mut index: usize) -> Vec<usize> {
        debug_assert!(index < self.num_cells);
        let mut trajectory = vec![0usize; self.time_points()];
        for t in (0..self.time_points()).rev() {
            trajectory[t] = index % self.cardinality;
            index /= self.cardinality;
        }
        trajectory
    }

    /// Human-readable cell label for error messages, e.g. `(0,2,1)`.
    pub fn cell_label(&self, index: usize) -> String {
        let coords = self.unflat_index(index);
        let parts: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
        format!("({})", parts.join(","))
    }
}
