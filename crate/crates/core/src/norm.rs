//! Running min/max tracking for the normalized cost terms used by both
//! annealing stages.

/// Running extremes of one cost term.
///
/// Both stages normalize raw objective values against the extremes observed
/// so far in the run: `(v - min) / (max - min)`. While the tracker is empty,
/// or while only a single distinct value has been seen, the normalized term
/// is defined as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinMax {
    min: f64,
    max: f64,
    seen: bool,
}

impl MinMax {
    pub fn new() -> Self {
        MinMax { min: f64::INFINITY, max: f64::NEG_INFINITY, seen: false }
    }

    pub fn update(&mut self, value: f64) {
        self.min = self.min.min(value);
        self.max = self.max.max(value);
        self.seen = true;
    }

    pub fn min(&self) -> Option<f64> {
        self.seen.then_some(self.min)
    }

    pub fn max(&self) -> Option<f64> {
        self.seen.then_some(self.max)
    }

    /// `(value - min) / (max - min)`, or 0.0 when the range is empty.
    pub fn normalized(&self, value: f64) -> f64 {
        if !self.seen || self.max <= self.min {
            return 0.0;
        }
        (value - self.min) / (self.max - self.min)
    }
}

impl Default for MinMax {
    fn default() -> Self {
        Self::new()
    }
}
