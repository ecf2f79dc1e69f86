//! Time-ordered samples of a solution.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{invariant_residual, ModelParams, PopulationState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl Sample {
    pub fn state(&self) -> PopulationState {
        PopulationState { x: self.x, y: self.y }
    }
}

/// Samples with strictly increasing times and finite values, optionally
/// carrying one first-integral residual per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<Sample>,
    residuals: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("trajectory has no samples".into()));
        }
        for (k, s) in samples.iter().enumerate() {
            if !(s.t.is_finite() && s.x.is_finite() && s.y.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "sample {k}: (t, x, y) = ({}, {}, {})",
                    s.t, s.x, s.y
                )));
            }
        }
        if let Some(k) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidArgument(format!(
                "sample times must be strictly increasing (index {})",
                k + 1
            )));
        }
        Ok(Self {
            samples,
            residuals: None,
        })
    }

    /// Attaches `C(sample) - C(first sample)` to every sample.
    pub fn with_residuals(mut self, p: &ModelParams) -> Result<Self> {
        let s0 = self.samples[0].state();
        let residuals = self
            .samples
            .iter()
            .map(|s| invariant_residual(p, &s.state(), &s0))
            .collect::<Result<Vec<_>>>()?;
        self.residuals = Some(residuals);
        Ok(self)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn residuals(&self) -> Option<&[f64]> {
        self.residuals.as_deref()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        &self.samples[self.samples.len() - 1]
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.x, s.y)).collect()
    }

    /// Samples with `t` in the closed window `[t0, t1]`.
    pub fn window(&self, t0: f64, t1: f64) -> &[Sample] {
        let start = self.samples.partition_point(|s| s.t < t0);
        let end = self.samples.partition_point(|s| s.t <= t1);
        &self.samples[start..end.max(start)]
    }
}

/// `n` evenly spaced points from `t0` to `t1`, both endpoints exact.
pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t0],
        _ => {
            let step = (t1 - t0) / (n - 1) as f64;
            let mut grid: Vec<f64> = (0..n).map(|k| t0 + k as f64 * step).collect();
            grid[n - 1] = t1;
            grid
        }
    }
}

/// Checks that a sampling grid is non-empty, finite, starts at or after zero,
/// and is strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    let Some(&first) = grid.first() else {
        return Err(Error::InvalidArgument("time grid is empty".into()));
    };
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("time grid contains a non-finite value".into()));
    }
    if first < 0.0 {
        return Err(Error::InvalidArgument(format!("time grid starts before 0 ({first})")));
    }
    if let Some(k) = grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!(
            "time grid is not strictly increasing at index {}",
            k + 1
        )));
    }
    Ok(())
}
