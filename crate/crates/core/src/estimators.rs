//! Point-kernel integral estimators.
//!
//! All estimators target
//! `D = ∫_B ∫_B φ(|r1 - r2|) / (4π |r1 - r2|²) dr1 dr2`
//! for a body `B` (or between two bodies), from different sampled
//! distributions:
//!
//! * chord: `D = V/⟨l⟩ · ∫ q(l) I2(l) dl`
//! * ray: `D = V · ∫ q(l) I1(l) dl`
//! * distance: `D = V1 V2 · ∫ p(l) φ(l) / (4π l²) dl`
//! * radial and pairwise oracles straight from the volume integral.
//!
//! Standard errors come from a delete-one-chunk jackknife, with the volume
//! error added in quadrature.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Body;
use crate::kernels::{Kernel, KernelTable};
use crate::math;
use crate::quasidist::SignedHistogram;
use crate::runner::{self, Batched, ChunkExecutor};
use crate::sampling;
use crate::stats::Measured;

/// Histogram of point-pair distances; each pair contributes `+1`.
pub type DistanceHistogram = SignedHistogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Chord,
    Ray,
    DistanceDistribution,
    OracleRadial,
    OraclePairwise,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Chord,
        Method::Ray,
        Method::DistanceDistribution,
        Method::OracleRadial,
        Method::OraclePairwise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Chord => "chord",
            Method::Ray => "ray",
            Method::DistanceDistribution => "dd",
            Method::OracleRadial => "oracle_radial",
            Method::OraclePairwise => "oracle_pairwise",
        }
    }

    pub fn from_name(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalizer {
    /// `V/⟨l⟩`.
    VolumeOverMeanChord,
    /// `S/4`, valid for convex bodies or with the net chord count.
    SurfaceOverFour,
    None,
}

impl Normalizer {
    pub fn name(self) -> &'static str {
        match self {
            Normalizer::VolumeOverMeanChord => "V-over-meanl",
            Normalizer::SurfaceOverFour => "S-over-4",
            Normalizer::None => "none",
        }
    }
}

/// A second chord estimate from the other normalizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alternative {
    pub normalizer: Normalizer,
    pub value: Measured,
    /// Primary minus alternative, with a jackknife error that accounts for
    /// the shared samples.
    pub discrepancy: Measured,
}

impl Alternative {
    pub fn z_score(&self) -> f64 {
        self.discrepancy.z_score(&Measured::exact(0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub method: Method,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub normalizer: Normalizer,
    pub seed: u64,
    /// Filled in by callers that own a clock.
    pub runtime_secs: Option<f64>,
    pub alternative: Option<Alternative>,
    pub note: Option<String>,
}

impl EstimateReport {
    fn new(method: Method, m: Measured, n_samples: u64, normalizer: Normalizer, seed: u64) -> Self {
        Self {
            method,
            value: m.value,
            stderr: m.stderr,
            n_samples,
            normalizer,
            seed,
            runtime_secs: None,
            alternative: None,
            note: None,
        }
    }

    pub fn measured(&self) -> Measured {
        Measured::new(self.value, self.stderr)
    }

    pub fn z_score(&self, other: &EstimateReport) -> f64 {
        self.measured().z_score(&other.measured())
    }
}

fn with_scale_error(m: Measured, scale: Measured) -> Measured {
    let extra = m.value * scale.relative_error();
    Measured::new(m.value, math::sqrt(m.stderr * m.stderr + extra * extra))
}

fn sq(x: f64) -> f64 {
    x * x
}

fn kernel_on_midpoints(h: &SignedHistogram, kernel: &Kernel) -> Result<KernelTable> {
    kernel.tabulate(&h.binning().midpoints())
}

fn weighted(counts: &[i64], w: &[f64]) -> f64 {
    counts.iter().zip(w).map(|(&c, &w)| c as f64 * w).sum()
}

/// Chord estimator from a chord-mode run. `surface` enables the `S/4`
/// alternative.
pub fn chord_estimate(
    run: &Batched<SignedHistogram>,
    kernel: &Kernel,
    volume: Measured,
    surface: Option<f64>,
) -> Result<EstimateReport> {
    let table = kernel_on_midpoints(&run.merged, kernel)?;
    let mids = run.merged.binning().midpoints();
    let by_volume = |h: &SignedHistogram| -> Result<f64> {
        let sum_l = weighted(h.counts(), &mids);
        if !(sum_l > 0.0) {
            return Err(Error::NonPositiveMeanChord(sum_l));
        }
        Ok(volume.value * weighted(h.counts(), &table.i2) / sum_l)
    };
    let by_surface = |h: &SignedHistogram, s: f64| -> Result<f64> {
        if h.n_chords() <= 0 {
            return Err(Error::NoData);
        }
        Ok(s / 4.0 * weighted(h.counts(), &table.i2) / h.n_chords() as f64)
    };
    let primary = with_scale_error(run.jackknife(by_volume)?, volume);
    let mut report = EstimateReport::new(
        Method::Chord,
        primary,
        run.n_sampled,
        Normalizer::VolumeOverMeanChord,
        run.seed,
    );
    if let Some(s) = surface {
        let alt = run.jackknife(|h| by_surface(h, s))?;
        let diff = run.jackknife(|h| Ok(by_volume(h)? - by_surface(h, s)?))?;
        let v_part = primary.value * volume.relative_error();
        report.alternative = Some(Alternative {
            normalizer: Normalizer::SurfaceOverFour,
            value: alt,
            discrepancy: Measured::new(
                diff.value,
                math::sqrt(diff.stderr * diff.stderr + v_part * v_part),
            ),
        });
    }
    Ok(report)
}

/// Zero chord estimate for a run in which no line met the body.
pub fn chord_estimate_empty(run: &Batched<SignedHistogram>) -> EstimateReport {
    EstimateReport::new(
        Method::Chord,
        Measured::exact(0.0),
        run.n_sampled,
        Normalizer::VolumeOverMeanChord,
        run.seed,
    )
}

/// Ray estimator from a ray-mode run.
pub fn ray_estimate(
    run: &Batched<SignedHistogram>,
    kernel: &Kernel,
    volume: Measured,
) -> Result<EstimateReport> {
    let table = kernel_on_midpoints(&run.merged, kernel)?;
    let m = run.jackknife(|h| {
        if h.n_lines() == 0 {
            return Err(Error::NoData);
        }
        Ok(volume.value * weighted(h.counts(), &table.i1) / h.n_lines() as f64)
    })?;
    Ok(EstimateReport::new(
        Method::Ray,
        with_scale_error(m, volume),
        run.n_sampled,
        Normalizer::None,
        run.seed,
    ))
}

/// Per-bin weights `φ(l)/(4π l̄²)`, with `l̄²` the bin mean of `l²`.
fn distance_weights(h: &DistanceHistogram, kernel: &Kernel) -> Vec<f64> {
    let b = h.binning();
    (0..b.n_bins())
        .map(|i| kernel.phi(b.midpoint(i)) / (4.0 * PI * b.mean_square(i)))
        .collect()
}

/// Distance-distribution estimator. `volume_product` is `V_src · V_tgt`.
pub fn dd_estimate(
    run: &Batched<DistanceHistogram>,
    kernel: &Kernel,
    volume_product: Measured,
) -> Result<EstimateReport> {
    let w = distance_weights(&run.merged, kernel);
    if w.iter().any(|v| v.is_nan()) {
        return Err(Error::Kernel(String::from("phi evaluated to NaN")));
    }
    let m = run.jackknife(|h| {
        if h.n_lines() == 0 {
            return Err(Error::NoData);
        }
        Ok(volume_product.value * weighted(h.counts(), &w) / h.n_lines() as f64)
    })?;
    Ok(EstimateReport::new(
        Method::DistanceDistribution,
        with_scale_error(m, volume_product),
        run.n_sampled,
        Normalizer::None,
        run.seed,
    ))
}

/// Overlap function `G(l) = V1 V2 p(l) / (4π l̄²)` per bin from a distance
/// histogram; for a single body `G(0) = V`.
pub fn overlap_function(h: &DistanceHistogram, volume_product: f64) -> Result<Vec<f64>> {
    if h.n_lines() == 0 {
        return Err(Error::NoData);
    }
    let b = h.binning();
    let n = h.n_lines() as f64;
    Ok((0..b.n_bins())
        .map(|i| {
            volume_product * h.counts()[i] as f64 / (n * b.width()) / (4.0 * PI * b.mean_square(i))
        })
        .collect())
}

/// Radial oracle: mean of `V_src · l_max · φ(R) · [r1 + Rω ∈ tgt]` with
/// `r1` uniform in `src`, `ω` isotropic and `R` uniform on `(0, l_max)`.
#[allow(clippy::too_many_arguments)]
pub fn oracle_radial<E: ChunkExecutor>(
    src: &Body,
    tgt: &Body,
    kernel: &Kernel,
    l_max: f64,
    n: u64,
    seed: u64,
    n_chunks: usize,
    exec: &E,
    volume_src: Measured,
) -> Result<EstimateReport> {
    if !(l_max > 0.0) {
        return Err(Error::InvalidConfig(String::from("l_max must be positive")));
    }
    let acc = runner::sample_mean("oracle-radial", n, seed, n_chunks, exec, |rng| {
        use rand::Rng;
        let r1 = sampling::sample_point_in_body(src, rng)?;
        let dir = sampling::sample_isotropic_direction(rng);
        let r: f64 = l_max * (1.0 - rng.random::<f64>());
        if tgt.contains(r1 + dir.vec() * r) {
            Ok(l_max * kernel.phi(r))
        } else {
            Ok(0.0)
        }
    })?;
    let m = acc.measured();
    let scaled = Measured::new(volume_src.value * m.value, volume_src.value * m.stderr);
    Ok(EstimateReport::new(
        Method::OracleRadial,
        with_scale_error(scaled, volume_src),
        n,
        Normalizer::None,
        seed,
    ))
}

/// Pairwise oracle for disjoint bodies: mean of `V1 V2 φ(R)/(4πR²)`.
/// Overlapping or coincident bodies are refused; the integrand is then
/// singular with infinite variance.
#[allow(clippy::too_many_arguments)]
pub fn oracle_pairwise<E: ChunkExecutor>(
    src: &Body,
    tgt: &Body,
    kernel: &Kernel,
    n: u64,
    seed: u64,
    n_chunks: usize,
    exec: &E,
    volume_src: Measured,
    volume_tgt: Measured,
) -> Result<EstimateReport> {
    if crate::multibody::bodies_overlap(src, tgt) {
        return Err(Error::Unsupported(String::from(
            "pairwise oracle needs disjoint bodies; use the radial oracle",
        )));
    }
    let acc = runner::sample_mean("oracle-pairwise", n, seed, n_chunks, exec, |rng| {
        let a = sampling::sample_point_in_body(src, rng)?;
        let b = sampling::sample_point_in_body(tgt, rng)?;
        let r = a.distance(b);
        Ok(kernel.phi(r) / (4.0 * PI * r * r))
    })?;
    let vv = volume_product(volume_src, volume_tgt);
    let m = acc.measured();
    let scaled = Measured::new(vv.value * m.value, vv.value * m.stderr);
    Ok(EstimateReport::new(
        Method::OraclePairwise,
        with_scale_error(scaled, vv),
        n,
        Normalizer::None,
        seed,
    ))
}

/// Product of two independent measured volumes.
pub fn volume_product(a: Measured, b: Measured) -> Measured {
    let v = a.value * b.value;
    Measured::new(
        v,
        math::abs(v) * math::sqrt(sq(a.relative_error()) + sq(b.relative_error())),
    )
}
