//! Signed histograms of ray and chord lengths.
//!
//! Rays: the k-th crossing distance (1-based) adds `+1` to its bin for odd
//! k and `-1` for even k. Chords: every ordered pair `j < k` of the 2n
//! crossings of a line adds `(-1)^(k-j+1)` at length `x_k - x_j`. Per line
//! the chord rule nets `+n`, and the signed length sum equals the total
//! in-body length.
//!
//! Counts are `i64`, so count-level identities hold exactly. Per-bin
//! uncertainty comes from the sum of squared per-line net contributions.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Uniform bins covering `[0, l_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binning {
    n_bins: usize,
    l_max: f64,
}

impl Binning {
    pub fn new(n_bins: usize, l_max: f64) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::InvalidConfig(alloc::format!(
                "need at least 2 bins, got {n_bins}"
            )));
        }
        if !(l_max > 0.0) || !l_max.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "l_max must be positive, got {l_max}"
            )));
        }
        Ok(Self { n_bins, l_max })
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    pub fn width(&self) -> f64 {
        self.l_max / self.n_bins as f64
    }

    pub fn lo(&self, bin: usize) -> f64 {
        bin as f64 * self.width()
    }

    pub fn hi(&self, bin: usize) -> f64 {
        (bin + 1) as f64 * self.width()
    }

    pub fn midpoint(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) * self.width()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.n_bins).map(|b| self.midpoint(b)).collect()
    }

    /// Bin average of `l²`, `(lo² + lo·hi + hi²) / 3`.
    pub fn mean_square(&self, bin: usize) -> f64 {
        let (a, b) = (self.lo(bin), self.hi(bin));
        (a * a + a * b + b * b) / 3.0
    }

    /// Truncating bin index; `l == l_max` lands in the last bin.
    pub fn bin_of(&self, l: f64) -> Result<usize> {
        if !(l >= 0.0) || l > self.l_max {
            return Err(Error::Overflow {
                length: l,
                l_max: self.l_max,
            });
        }
        let idx = math::floor(l / self.width()) as usize;
        Ok(idx.min(self.n_bins - 1))
    }
}

/// Raw signed counts plus the line and chord counters.
#[derive(Debug, Clone)]
pub struct SignedHistogram {
    binning: Binning,
    counts: Vec<i64>,
    sumsq: Vec<i64>,
    n_lines: u64,
    n_chords: i64,
    scratch: Vec<(usize, i64)>,
}

impl PartialEq for SignedHistogram {
    fn eq(&self, o: &Self) -> bool {
        self.binning == o.binning
            && self.counts == o.counts
            && self.sumsq == o.sumsq
            && self.n_lines == o.n_lines
            && self.n_chords == o.n_chords
    }
}

impl SignedHistogram {
    pub fn new(binning: Binning) -> Self {
        Self {
            binning,
            counts: vec![0; binning.n_bins()],
            sumsq: vec![0; binning.n_bins()],
            n_lines: 0,
            n_chords: 0,
            scratch: Vec::new(),
        }
    }

    pub fn binning(&self) -> &Binning {
        &self.binning
    }

    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    /// Per-bin sums of squared per-line net contributions.
    pub fn sum_squares(&self) -> &[i64] {
        &self.sumsq
    }

    /// Lines (or rays) that contributed at least one count.
    pub fn n_lines(&self) -> u64 {
        self.n_lines
    }

    /// Net sum of all recorded contributions; equals `Σ counts`.
    pub fn n_chords(&self) -> i64 {
        self.n_chords
    }

    pub fn total_count(&self) -> i64 {
        self.counts.iter().sum()
    }

    /// Records one ray from an interior source: `+1` at odd, `-1` at even
    /// crossing index (1-based). Nothing is recorded on error.
    pub fn record_ray(&mut self, crossings: &[f64]) -> Result<()> {
        if crossings.len().is_multiple_of(2) {
            return Err(Error::InvalidCrossings(alloc::format!(
                "ray needs an odd number of crossings, got {}",
                crossings.len()
            )));
        }
        if crossings.iter().any(|&l| !(l > 0.0)) || crossings.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidCrossings(alloc::string::String::from(
                "ray crossings must be positive and ascending",
            )));
        }
        self.scratch.clear();
        for (i, &l) in crossings.iter().enumerate() {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            let bin = self.binning.bin_of(l)?;
            self.scratch.push((bin, sign));
        }
        self.commit_line();
        Ok(())
    }

    /// Records every ordered crossing pair of one line with sign
    /// `(-1)^(k-j+1)`. Pairs no longer than `zero_tol` are skipped. Returns
    /// the net count added. Nothing is recorded on error.
    pub fn record_line_chords(&mut self, crossings: &[f64], zero_tol: f64) -> Result<i64> {
        check_line_crossings(crossings)?;
        self.scratch.clear();
        for_each_signed_pair(crossings, zero_tol, |_, _, l, sign| {
            let bin = self.binning.bin_of(l)?;
            self.scratch.push((bin, sign));
            Ok(())
        })?;
        Ok(self.commit_line())
    }

    /// Records a single non-negative length with weight `+1`.
    pub fn record_length(&mut self, l: f64) -> Result<()> {
        let bin = self.binning.bin_of(l)?;
        self.counts[bin] += 1;
        self.sumsq[bin] += 1;
        self.n_lines += 1;
        self.n_chords += 1;
        Ok(())
    }

    pub(crate) fn add_line_contributions(&mut self, contributions: &[(usize, i64)]) -> i64 {
        self.scratch.clear();
        self.scratch.extend_from_slice(contributions);
        self.commit_line()
    }

    fn commit_line(&mut self) -> i64 {
        if self.scratch.is_empty() {
            return 0;
        }
        self.scratch.sort_unstable_by_key(|&(b, _)| b);
        let mut net = 0;
        let mut i = 0;
        while i < self.scratch.len() {
            let bin = self.scratch[i].0;
            let mut c = 0;
            while i < self.scratch.len() && self.scratch[i].0 == bin {
                c += self.scratch[i].1;
                i += 1;
            }
            self.counts[bin] += c;
            self.sumsq[bin] += c * c;
            net += c;
        }
        self.n_lines += 1;
        self.n_chords += net;
        net
    }

    /// Elementwise integer addition.
    pub fn merge(&mut self, other: &SignedHistogram) -> Result<()> {
        if self.binning != other.binning {
            return Err(Error::BinningMismatch);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.sumsq.iter_mut().zip(&other.sumsq) {
            *a += b;
        }
        self.n_lines += other.n_lines;
        self.n_chords += other.n_chords;
        Ok(())
    }

    /// `self - other`, for leave-one-out replicates.
    pub fn without(&self, other: &SignedHistogram) -> SignedHistogram {
        let mut out = self.clone();
        for (a, b) in out.counts.iter_mut().zip(&other.counts) {
            *a -= b;
        }
        for (a, b) in out.sumsq.iter_mut().zip(&other.sumsq) {
            *a -= b;
        }
        out.n_lines -= other.n_lines;
        out.n_chords -= other.n_chords;
        out
    }

    pub fn merged<'a, I>(parts: I) -> Result<SignedHistogram>
    where
        I: IntoIterator<Item = &'a SignedHistogram>,
    {
        let mut it = parts.into_iter();
        let mut acc = it.next().ok_or(Error::NoData)?.clone();
        for h in it {
            acc.merge(h)?;
        }
        Ok(acc)
    }

    /// Density `counts / (norm · Δl)` with per-bin standard errors.
    pub fn normalized(&self, norm: f64, n_lines: u64) -> QuasiDensity {
        let w = self.binning.width();
        let scale = 1.0 / (norm * w);
        let n = n_lines.max(1) as f64;
        let values: Vec<f64> = self.counts.iter().map(|&c| c as f64 * scale).collect();
        let stderr = self
            .counts
            .iter()
            .zip(&self.sumsq)
            .map(|(&c, &s)| {
                let c = c as f64;
                math::sqrt((s as f64 - c * c / n).max(0.0)) * scale
            })
            .collect();
        let weighted: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(b, &c)| c as f64 * self.binning.midpoint(b))
            .sum();
        QuasiDensity {
            binning: self.binning,
            values,
            stderr,
            m_hat: self.n_chords as f64 / n_lines.max(1) as f64,
            mean_length: weighted / norm,
        }
    }

    /// Chord-mode normalization by the chord counter.
    pub fn normalize_chord(&self) -> Result<QuasiDensity> {
        if self.n_chords <= 0 {
            return Err(Error::NoData);
        }
        Ok(self.normalized(self.n_chords as f64, self.n_lines))
    }

    /// Ray-mode normalization by the ray counter.
    pub fn normalize_ray(&self) -> Result<QuasiDensity> {
        if self.n_lines == 0 {
            return Err(Error::NoData);
        }
        Ok(self.normalized(self.n_lines as f64, self.n_lines))
    }
}

/// Rejects odd-length or unsorted crossing lists.
pub(crate) fn check_line_crossings(x: &[f64]) -> Result<()> {
    if !x.len().is_multiple_of(2) {
        return Err(Error::InvalidCrossings(alloc::format!(
            "line needs an even number of crossings, got {}",
            x.len()
        )));
    }
    if x.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidCrossings(alloc::string::String::from(
            "line crossings must be ascending",
        )));
    }
    Ok(())
}

/// Visits every ordered pair `j < k` with length above `zero_tol` as
/// `(j, k, x_k - x_j, (-1)^(k-j+1))`.
pub fn for_each_signed_pair<F>(x: &[f64], zero_tol: f64, mut f: F) -> Result<()>
where
    F: FnMut(usize, usize, f64, i64) -> Result<()>,
{
    for k in 1..x.len() {
        for j in 0..k {
            let l = x[k] - x[j];
            if l <= zero_tol {
                continue;
            }
            let sign = if (k - j) % 2 == 1 { 1 } else { -1 };
            f(j, k, l, sign)?;
        }
    }
    Ok(())
}

/// A normalized, possibly signed, length density.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDensity {
    pub binning: Binning,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Net counts per contributing line (`N_chords / N_lines`).
    pub m_hat: f64,
    /// First moment of the density.
    pub mean_length: f64,
}

impl QuasiDensity {
    /// `Σ values · Δl`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.binning.width()
    }

    /// `Σ values · f(midpoint) · Δl`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let w = self.binning.width();
        self.values
            .iter()
            .enumerate()
            .map(|(b, &v)| v * f(self.binning.midpoint(b)))
            .sum::<f64>()
            * w
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Mean chord length of a chord-mode density.
pub fn mean_chord(qd: &QuasiDensity) -> f64 {
    qd.integrate(|l| l) / qd.integral()
}

/// Per-bin derivative with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Central differences on bin midpoints; one-sided in the end bins.
pub fn finite_difference_derivative(qd: &QuasiDensity) -> Derivative {
    let n = qd.values.len();
    let w = qd.binning.width();
    let v = &qd.values;
    let s = &qd.stderr;
    let mut values = Vec::with_capacity(n);
    let mut stderr = Vec::with_capacity(n);
    for b in 0..n {
        let (lo, hi, span) = if b == 0 {
            (0, 1, w)
        } else if b == n - 1 {
            (n - 2, n - 1, w)
        } else {
            (b - 1, b + 1, 2.0 * w)
        };
        values.push((v[hi] - v[lo]) / span);
        stderr.push(math::sqrt(s[hi] * s[hi] + s[lo] * s[lo]) / span);
    }
    Derivative { values, stderr }
}
