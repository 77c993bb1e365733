//! Uniform time grids shared by propagators, responses and transforms.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("time grid step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("time grid needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("time {t} ps outside grid range [{start}, {end}] ps")]
    OutOfRange { t: f64, start: f64, end: f64 },
}

/// Uniformly spaced time axis: `t_i = start + i·step`, `i = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    start_ps: f64,
    step_ps: f64,
    count: usize,
}

impl TimeGrid {
    pub fn new(start_ps: f64, step_ps: f64, count: usize) -> Result<Self, GridError> {
        if !(step_ps > 0.0) {
            return Err(GridError::NonPositiveStep(step_ps));
        }
        if count < 2 {
            return Err(GridError::TooFewPoints(count));
        }
        Ok(Self { start_ps, step_ps, count })
    }

    /// Grid starting at zero, the usual case for pulse delays.
    pub fn from_zero(step_ps: f64, count: usize) -> Result<Self, GridError> {
        Self::new(0.0, step_ps, count)
    }

    pub fn start(&self) -> f64 {
        self.start_ps
    }

    pub fn step(&self) -> f64 {
        self.step_ps
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn end(&self) -> f64 {
        self.at(self.count - 1)
    }

    /// `i`-th grid time; callers must keep `i < count`.
    pub fn at(&self, i: usize) -> f64 {
        self.start_ps + i as f64 * self.step_ps
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.at(i)).collect()
    }

    /// Angular frequency resolution Δω = 2π/(step·count) of the conjugate axis.
    pub fn angular_frequency_step(&self) -> f64 {
        std::f64::consts::TAU / (self.step_ps * self.count as f64)
    }

    /// Nearest grid index for a time inside the grid range.
    pub fn index_of(&self, t: f64) -> Result<usize, GridError> {
        let idx = (t - self.start_ps) / self.step_ps;
        let rounded = idx.round();
        if rounded < -0.5 || rounded > (self.count - 1) as f64 + 0.5 {
            return Err(GridError::OutOfRange { t, start: self.start_ps, end: self.end() });
        }
        Ok(rounded.clamp(0.0, (self.count - 1) as f64) as usize)
    }

    /// Same axis refined by an integer factor (used for internal quadrature).
    pub fn refined(&self, factor: usize) -> TimeGrid {
        let factor = factor.max(1);
        TimeGrid {
            start_ps: self.start_ps,
            step_ps: self.step_ps / factor as f64,
            count: (self.count - 1) * factor + 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(TimeGrid::new(0.0, 0.0, 10), Err(GridError::NonPositiveStep(0.0)));
        assert_eq!(TimeGrid::new(0.0, -0.1, 10), Err(GridError::NonPositiveStep(-0.1)));
        assert_eq!(TimeGrid::new(0.0, 0.1, 1), Err(GridError::TooFewPoints(1)));
    }

    #[test]
    fn frequency_resolution_matches_span() {
        let g = TimeGrid::from_zero(0.02, 512).unwrap();
        assert_relative_eq!(
            g.angular_frequency_step(),
            std::f64::consts::TAU / (0.02 * 512.0),
            max_relative = 1e-15
        );
    }

    #[test]
    fn refined_grid_shares_endpoints() {
        let g = TimeGrid::from_zero(0.5, 9).unwrap();
        let r = g.refined(8);
        assert_eq!(r.count(), 65);
        assert_relative_eq!(r.end(), g.end(), max_relative = 1e-15);
        assert_relative_eq!(r.at(8), g.at(1), max_relative = 1e-15);
    }

    #[test]
    fn index_lookup() {
        let g = TimeGrid::from_zero(0.25, 8).unwrap();
        assert_eq!(g.index_of(0.74).unwrap(), 3);
        assert!(g.index_of(2.5).is_err());
    }
}
