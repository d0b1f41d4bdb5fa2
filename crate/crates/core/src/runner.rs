//! Chunked sampling loops.
//!
//! Every run is split into a fixed number of chunks, independent of the
//! worker count. Chunk `c` of task `name` draws from
//! `RngStream::derived(seed, name, c)` and fills its own accumulator;
//! chunks are merged in index order. Results are therefore identical for
//! any executor, and the chunks double as jackknife groups.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Body, BoundingSphere};
use crate::quasidist::{Binning, SignedHistogram};
use crate::sampling::{self, RngStream};
use crate::stats::{MeanAccumulator, Measured};

pub const DEFAULT_CHUNKS: usize = 64;
pub const DEFAULT_BINS: usize = 512;
/// `l_max` is the scene diameter times this factor.
pub const L_MAX_MARGIN: f64 = 1.0001;

/// Runs `f(chunk)` for every chunk and returns the results in chunk order.
pub trait ChunkExecutor: Sync {
    fn map_chunks<T, F>(&self, n_chunks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs chunks one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ChunkExecutor for Sequential {
    fn map_chunks<T, F>(&self, n_chunks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n_chunks).map(f).collect()
    }
}

/// Accumulators that merge by addition and un-merge by subtraction.
pub trait Mergeable: Clone {
    fn merge_from(&mut self, other: &Self) -> Result<()>;
    fn without(&self, other: &Self) -> Self;
}

impl Mergeable for SignedHistogram {
    fn merge_from(&mut self, other: &Self) -> Result<()> {
        self.merge(other)
    }

    fn without(&self, other: &Self) -> Self {
        SignedHistogram::without(self, other)
    }
}

/// Per-chunk accumulators and their merge.
#[derive(Debug, Clone, PartialEq)]
pub struct Batched<T> {
    pub parts: Vec<T>,
    pub merged: T,
    /// Samples drawn, including misses.
    pub n_sampled: u64,
    pub seed: u64,
}

impl<T: Mergeable> Batched<T> {
    pub fn from_parts(parts: Vec<T>, n_sampled: u64, seed: u64) -> Result<Self> {
        let mut it = parts.iter();
        let mut merged = it.next().ok_or(Error::NoData)?.clone();
        for p in it {
            merged.merge_from(p)?;
        }
        Ok(Self {
            parts,
            merged,
            n_sampled,
            seed,
        })
    }

    /// Estimate on the merged data with a delete-one-chunk jackknife error.
    pub fn jackknife(&self, estimate: impl Fn(&T) -> Result<f64>) -> Result<Measured> {
        let value = estimate(&self.merged)?;
        if self.parts.len() < 2 {
            return Ok(Measured::exact(value));
        }
        let mut reps = Vec::with_capacity(self.parts.len());
        for p in &self.parts {
            reps.push(estimate(&self.merged.without(p))?);
        }
        Ok(Measured::new(value, crate::stats::jackknife_stderr(&reps)))
    }
}

/// Sizes of `n_chunks` near-equal chunks summing to `n`.
pub fn chunk_sizes(n: u64, n_chunks: usize) -> Vec<u64> {
    let k = (n_chunks as u64).clamp(1, n.max(1));
    let (q, r) = (n / k, n % k);
    (0..k).map(|i| q + u64::from(i < r)).collect()
}

/// Shared knobs for sampling runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub n_chunks: usize,
    pub n_bins: usize,
    /// Overrides `diameter × L_MAX_MARGIN`; must not be smaller than the diameter.
    pub l_max: Option<f64>,
    /// Probes for Monte Carlo volumes of composite solids.
    pub volume_points: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            n_chunks: DEFAULT_CHUNKS,
            n_bins: DEFAULT_BINS,
            l_max: None,
            volume_points: 1_000_000,
        }
    }
}

impl RunOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// Binning for a scene of the given bounding sphere.
    pub fn binning(&self, bound: &BoundingSphere) -> Result<Binning> {
        let diameter = bound.diameter();
        let l_max = match self.l_max {
            Some(l) if l < diameter => {
                return Err(Error::InvalidConfig(alloc::format!(
                    "l_max {l} is smaller than the scene diameter {diameter}"
                )))
            }
            Some(l) => l,
            None => diameter * L_MAX_MARGIN,
        };
        Binning::new(self.n_bins, l_max)
    }
}

fn collect_parts<T>(parts: Vec<Result<(T, u64)>>) -> Result<(Vec<T>, u64)> {
    let mut out = Vec::with_capacity(parts.len());
    let mut sampled = 0;
    for p in parts {
        let (h, s) = p?;
        out.push(h);
        sampled += s;
    }
    Ok((out, sampled))
}

/// Chord-mode histogram of `body` from `n_lines` kinematic lines through
/// `bound`.
pub fn sample_chords<E: ChunkExecutor>(
    body: &Body,
    bound: &BoundingSphere,
    binning: Binning,
    n_lines: u64,
    seed: u64,
    n_chunks: usize,
    exec: &E,
) -> Result<Batched<SignedHistogram>> {
    let sizes = chunk_sizes(n_lines, n_chunks);
    let parts = exec.map_chunks(sizes.len(), |c| {
        let mut rng = RngStream::derived(seed, "chords", c as u64);
        let mut h = SignedHistogram::new(binning);
        for _ in 0..sizes[c] {
            let line = sampling::sample_kinematic_line(bound, &mut rng);
            let x = body.intersect_line(&line);
            if !x.is_empty() {
                h.record_line_chords(x.params(), body.tolerance())?;
            }
        }
        Ok((h, sizes[c]))
    });
    let (parts, sampled) = collect_parts(parts)?;
    Batched::from_parts(parts, sampled, seed)
}

/// Ray-mode histogram of `body` from `n_rays` rays with uniform interior
/// sources and isotropic directions. Sources landing on the boundary are
/// redrawn.
pub fn sample_rays<E: ChunkExecutor>(
    body: &Body,
    binning: Binning,
    n_rays: u64,
    seed: u64,
    n_chunks: usize,
    exec: &E,
) -> Result<Batched<SignedHistogram>> {
    let sizes = chunk_sizes(n_rays, n_chunks);
    let parts = exec.map_chunks(sizes.len(), |c| {
        let mut rng = RngStream::derived(seed, "rays", c as u64);
        let mut h = SignedHistogram::new(binning);
        let mut done = 0;
        while done < sizes[c] {
            let origin = sampling::sample_point_in_body(body, &mut rng)?;
            let dir = sampling::sample_isotropic_direction(&mut rng);
            match body.intersect_ray(origin, dir) {
                Ok(x) => h.record_ray(&x)?,
                Err(Error::OriginOnBoundary(_)) | Err(Error::OriginOutside) => continue,
                Err(e) => return Err(e),
            }
            done += 1;
        }
        Ok((h, sizes[c]))
    });
    let (parts, sampled) = collect_parts(parts)?;
    Batched::from_parts(parts, sampled, seed)
}

/// Histogram of `|r1 - r2|` for independent uniform `r1 ∈ src`, `r2 ∈ tgt`.
pub fn sample_distances<E: ChunkExecutor>(
    src: &Body,
    tgt: &Body,
    binning: Binning,
    n_pairs: u64,
    seed: u64,
    n_chunks: usize,
    exec: &E,
) -> Result<Batched<SignedHistogram>> {
    let sizes = chunk_sizes(n_pairs, n_chunks);
    let parts = exec.map_chunks(sizes.len(), |c| {
        let mut rng = RngStream::derived(seed, "distances", c as u64);
        let mut h = SignedHistogram::new(binning);
        for _ in 0..sizes[c] {
            let a = sampling::sample_point_in_body(src, &mut rng)?;
            let b = sampling::sample_point_in_body(tgt, &mut rng)?;
            h.record_length(a.distance(b))?;
        }
        Ok((h, sizes[c]))
    });
    let (parts, sampled) = collect_parts(parts)?;
    Batched::from_parts(parts, sampled, seed)
}

/// Mean of `f(rng)` over `n` draws, chunked like the histogram runs.
pub fn sample_mean<E, F>(
    task: &str,
    n: u64,
    seed: u64,
    n_chunks: usize,
    exec: &E,
    f: F,
) -> Result<MeanAccumulator>
where
    E: ChunkExecutor,
    F: Fn(&mut RngStream) -> Result<f64> + Sync + Send,
{
    let sizes = chunk_sizes(n, n_chunks);
    let parts = exec.map_chunks(sizes.len(), |c| {
        let mut rng = RngStream::derived(seed, task, c as u64);
        let mut acc = MeanAccumulator::new();
        for _ in 0..sizes[c] {
            acc.push(f(&mut rng)?);
        }
        Ok(acc)
    });
    let mut total = MeanAccumulator::new();
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

/// Line measure `w_B` from `n_lines` kinematic lines through `bound`.
pub fn line_measure<E: ChunkExecutor>(
    body: &Body,
    bound: &BoundingSphere,
    n_lines: u64,
    seed: u64,
    n_chunks: usize,
    exec: &E,
) -> Measured {
    let sizes = chunk_sizes(n_lines, n_chunks);
    let hits: u64 = exec
        .map_chunks(sizes.len(), |c| {
            let mut rng = RngStream::derived(seed, "line-measure", c as u64);
            sampling::count_line_hits(body, bound, sizes[c], &mut rng)
        })
        .into_iter()
        .sum();
    sampling::line_measure_from_hits(hits, n_lines, bound.radius)
}

/// Volume of `body`: closed form, or chunked containment Monte Carlo.
pub fn volume<E: ChunkExecutor>(
    body: &Body,
    n_points: u64,
    seed: u64,
    n_chunks: usize,
    exec: &E,
) -> Measured {
    if let Some(v) = body.analytic_volume() {
        return Measured::exact(v);
    }
    let bbox = body.bounding_box();
    let sizes = chunk_sizes(n_points, n_chunks);
    let inside: u64 = exec
        .map_chunks(sizes.len(), |c| {
            let mut rng = RngStream::derived(seed, "volume", c as u64);
            (0..sizes[c])
                .filter(|_| body.contains(sampling::sample_point_in_box(&bbox, &mut rng)))
                .count() as u64
        })
        .into_iter()
        .sum();
    sampling::volume_from_hits(inside, n_points, bbox.volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Solid, Vec3};

    #[test]
    fn chunk_sizes_partition() {
        assert_eq!(chunk_sizes(10, 4), alloc::vec![3, 3, 2, 2]);
        assert_eq!(chunk_sizes(3, 64), alloc::vec![1, 1, 1]);
        assert_eq!(chunk_sizes(0, 8), alloc::vec![0]);
        assert_eq!(chunk_sizes(1000, 64).iter().sum::<u64>(), 1000);
    }

    #[test]
    fn l_max_override_must_cover_scene() {
        let bound = BoundingSphere {
            center: Vec3::ZERO,
            radius: 1.0,
        };
        let mut o = RunOptions::default();
        assert!((o.binning(&bound).unwrap().l_max() - 2.0002).abs() < 1e-12);
        o.l_max = Some(1.5);
        assert!(o.binning(&bound).is_err());
        o.l_max = Some(3.0);
        assert_eq!(o.binning(&bound).unwrap().l_max(), 3.0);
    }

    #[test]
    fn chord_run_is_reproducible() {
        let body = Body::new("s", Solid::sphere(Vec3::ZERO, 1.0).unwrap()).unwrap();
        let bound = body.bounding_sphere().inflated(1e-6);
        let binning = Binning::new(32, 2.01).unwrap();
        let a = sample_chords(&body, &bound, binning, 5000, 11, 8, &Sequential).unwrap();
        let b = sample_chords(&body, &bound, binning, 5000, 11, 8, &Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_sampled, 5000);
        assert_eq!(a.merged.total_count(), a.merged.n_chords());
    }
}
