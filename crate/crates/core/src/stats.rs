//! Small statistics helpers: running means and the delete-one jackknife.

use alloc::vec::Vec;

use crate::math;

/// A value with its standard error. `stderr == 0` marks an exact value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measured {
    pub value: f64,
    pub stderr: f64,
}

impl Measured {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }

    pub fn new(value: f64, stderr: f64) -> Self {
        Self { value, stderr }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.stderr / math::abs(self.value)
        }
    }

    /// `(self - other) / sqrt(se1² + se2²)`, treating the two as independent.
    pub fn z_score(&self, other: &Measured) -> f64 {
        let se = math::sqrt(self.stderr * self.stderr + other.stderr * other.stderr);
        let d = self.value - other.value;
        if se == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / se
        }
    }
}

/// Welford accumulator; mergeable with the parallel update of Chan et al.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let nf = n as f64;
        self.mean += delta * other.count as f64 / nf;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / nf;
        self.count = n;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn measured(&self) -> Measured {
        let se = if self.count < 2 {
            0.0
        } else {
            math::sqrt(self.variance() / self.count as f64)
        };
        Measured::new(self.mean, se)
    }
}

/// Delete-one jackknife standard error from the full-sample estimate's
/// leave-one-group-out replicates.
pub fn jackknife_stderr(replicates: &[f64]) -> f64 {
    let g = replicates.len();
    if g < 2 {
        return 0.0;
    }
    let mean = replicates.iter().sum::<f64>() / g as f64;
    let ss: f64 = replicates.iter().map(|r| (r - mean) * (r - mean)).sum();
    math::sqrt((g - 1) as f64 / g as f64 * ss)
}

/// Runs `estimate` on the full data and on every leave-one-out subset.
///
/// `full` is the merged data, `groups` the independent parts it was merged
/// from and `without` removes one part from the merged data.
pub fn jackknife<T, F, R>(full: &T, groups: &[T], without: R, estimate: F) -> Measured
where
    F: Fn(&T) -> f64,
    R: Fn(&T, &T) -> T,
{
    let value = estimate(full);
    if groups.len() < 2 {
        return Measured::exact(value);
    }
    let reps: Vec<f64> = groups.iter().map(|g| estimate(&without(full, g))).collect();
    Measured::new(value, jackknife_stderr(&reps))
}
