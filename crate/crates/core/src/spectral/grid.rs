use crate::error::{Error, Result};

/// Uniform grid of angular-frequency offsets from a carrier (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    start: f64,
    step: f64,
    count: usize,
}

pub const MIN_GRID_POINTS: usize = 8;

impl FrequencyGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid(format!("grid step must be positive, got {step}")));
        }
        if !start.is_finite() {
            return Err(Error::invalid("grid start must be finite"));
        }
        if count < MIN_GRID_POINTS {
            return Err(Error::invalid(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {count}"
            )));
        }
        Ok(Self { start, step, count })
    }

    /// Grid symmetric about zero: start = −step·(count−1)/2.
    pub fn centered(step: f64, count: usize) -> Result<Self> {
        Self::new(-step * (count as f64 - 1.0) / 2.0, step, count)
    }

    /// Symmetric grid covering [−half_span, half_span] with `count` points.
    pub fn spanning(half_span: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::invalid("grid needs at least two points"));
        }
        Self::centered(2.0 * half_span / (count as f64 - 1.0), count)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn end(&self) -> f64 {
        self.omega(self.count - 1)
    }

    #[inline]
    pub fn omega(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn omegas(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.omega(i))
    }

    /// Largest |ω| on the grid.
    pub fn max_abs(&self) -> f64 {
        self.start.abs().max(self.end().abs())
    }

    /// Index of the grid point nearest to `omega` (clamped to the grid).
    pub fn nearest(&self, omega: f64) -> usize {
        let x = ((omega - self.start) / self.step).round();
        x.clamp(0.0, (self.count - 1) as f64) as usize
    }
}
