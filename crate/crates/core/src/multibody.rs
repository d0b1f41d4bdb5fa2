//! Zone-resolved histograms and pairwise kernel integrals.
//!
//! A [`ZoneSet`] is a list of labeled, pairwise-disjoint bodies. Lines and
//! rays are intersected with every zone, the labeled crossings merged, and
//! each signed contribution filed under the zones of its two endpoints.
//! Summing all cells of a [`HistogramMatrix`] reproduces the histogram of
//! the union count for count.
//!
//! For two bodies the cross integral also follows from single-body
//! integrals: `A12 = (D_∪ + D_∩ - D1 - D2) / 2`, with `D_∩ = 0` when the
//! bodies are disjoint.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimators::{self, EstimateReport, Method, Normalizer};
use crate::geometry::{Body, BoundingSphere, Direction3, Line, Point3, Solid, TANGENCY_TOLERANCE};
use crate::kernels::Kernel;
use crate::math;
use crate::quasidist::{check_line_crossings, Binning, SignedHistogram};
use crate::runner::{self, chunk_sizes, Batched, ChunkExecutor, Mergeable, RunOptions};
use crate::sampling::{self, RngStream};
use crate::stats::Measured;

/// Lines used to probe two bodies for a shared volume.
pub const OVERLAP_PROBE_LINES: u64 = 20_000;
const OVERLAP_PROBE_SEED: u64 = 0x6f76_6572_6c61_7021;

/// Whether `a` and `b` share a positive volume, judged from bounding
/// volumes and then a fixed set of probe lines through the common
/// bounding box. Touching faces do not count.
pub fn bodies_overlap(a: &Body, b: &Body) -> bool {
    let (sa, sb) = (a.bounding_sphere(), b.bounding_sphere());
    if sa.center.distance(sb.center) > sa.radius + sb.radius {
        return false;
    }
    let (ba, bb) = (a.bounding_box(), b.bounding_box());
    let lo = ba.lo.max(bb.lo);
    let hi = ba.hi.min(bb.hi);
    if lo.x >= hi.x || lo.y >= hi.y || lo.z >= hi.z {
        return false;
    }
    let center = (lo + hi) * 0.5;
    let bound = BoundingSphere {
        center,
        radius: 0.5 * lo.distance(hi),
    };
    let eps = a.tolerance().max(b.tolerance());
    let mut rng = RngStream::derived(OVERLAP_PROBE_SEED, "overlap-probe", 0);
    (0..OVERLAP_PROBE_LINES).any(|_| {
        let line = sampling::sample_kinematic_line(&bound, &mut rng);
        let (xa, xb) = (a.spans(&line), b.spans(&line));
        xa.iter().any(|p| {
            xb.iter()
                .any(|q| p.exit.min(q.exit) - p.enter.max(q.enter) > eps)
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CrossingKind {
    Exit,
    Entry,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledCrossing {
    pub t: f64,
    pub zone: usize,
    pub kind: CrossingKind,
}

/// Sorts by parameter, then snaps crossings closer than `eps` to a common
/// value and orders each such cluster exits first, so touching zones stay
/// correctly paired.
fn sort_crossings(x: &mut [LabeledCrossing], eps: f64) {
    x.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut i = 0;
    while i < x.len() {
        let mut j = i + 1;
        while j < x.len() && x[j].t - x[j - 1].t <= eps {
            j += 1;
        }
        if j - i > 1 {
            let t = x[i].t;
            for c in &mut x[i..j] {
                c.t = t;
            }
            x[i..j].sort_by_key(|c| (c.kind, c.zone));
        }
        i = j;
    }
}

/// Labeled, pairwise-disjoint zones.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneSet {
    zones: Vec<Body>,
    bound: BoundingSphere,
    eps: f64,
    overlapping: Vec<(usize, usize)>,
}

impl ZoneSet {
    /// Labels must be unique. Overlapping pairs are recorded, not rejected;
    /// zone-resolved sampling refuses them.
    pub fn new(zones: Vec<Body>) -> Result<ZoneSet> {
        let bound = sampling::scene_bounding_sphere(&zones)
            .ok_or_else(|| Error::InvalidGeometry(String::from("scene has no bodies")))?;
        for (i, z) in zones.iter().enumerate() {
            if zones[..i].iter().any(|o| o.label() == z.label()) {
                return Err(Error::InvalidGeometry(alloc::format!(
                    "duplicate zone label {:?}",
                    z.label()
                )));
            }
        }
        let mut overlapping = Vec::new();
        for i in 0..zones.len() {
            for j in i + 1..zones.len() {
                if bodies_overlap(&zones[i], &zones[j]) {
                    overlapping.push((i, j));
                }
            }
        }
        Ok(ZoneSet {
            eps: TANGENCY_TOLERANCE * bound.radius,
            zones,
            bound,
            overlapping,
        })
    }

    pub fn zones(&self) -> &[Body] {
        &self.zones
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.zones.iter().position(|z| z.label() == label)
    }

    /// Scene bounding sphere, slightly inflated.
    pub fn bounding_sphere(&self) -> BoundingSphere {
        self.bound
    }

    pub fn tolerance(&self) -> f64 {
        self.eps
    }

    pub fn overlapping_pairs(&self) -> &[(usize, usize)] {
        &self.overlapping
    }

    pub fn is_disjoint(&self) -> bool {
        self.overlapping.is_empty()
    }

    /// CSG union of all zones.
    pub fn union_body(&self) -> Result<Body> {
        if self.zones.len() == 1 {
            return Ok(self.zones[0].clone());
        }
        let solid = self
            .zones
            .iter()
            .map(|z| z.solid().clone())
            .reduce(Solid::union)
            .ok_or(Error::NoData)?;
        Body::new("union", solid)
    }

    fn require_disjoint(&self) -> Result<()> {
        match self.overlapping.first() {
            None => Ok(()),
            Some(&(i, j)) => Err(Error::Unsupported(alloc::format!(
                "zones {:?} and {:?} overlap",
                self.zones[i].label(),
                self.zones[j].label()
            ))),
        }
    }

    /// Sorted labeled crossings of `line` with every zone.
    pub fn labeled_crossings(&self, line: &Line, out: &mut Vec<LabeledCrossing>) {
        out.clear();
        for (zone, z) in self.zones.iter().enumerate() {
            for s in z.spans(line) {
                out.push(LabeledCrossing {
                    t: s.enter,
                    zone,
                    kind: CrossingKind::Entry,
                });
                out.push(LabeledCrossing {
                    t: s.exit,
                    zone,
                    kind: CrossingKind::Exit,
                });
            }
        }
        sort_crossings(out, self.eps);
    }

    /// Labeled crossing distances of a ray from `origin`, which must lie
    /// strictly inside exactly one zone. Returns that zone.
    pub fn labeled_ray(
        &self,
        origin: Point3,
        dir: Direction3,
        out: &mut Vec<LabeledCrossing>,
    ) -> Result<usize> {
        out.clear();
        let line = Line::new(origin, dir);
        let mut source = None;
        for (zone, z) in self.zones.iter().enumerate() {
            for s in z.spans(&line) {
                for t in [s.enter, s.exit] {
                    if math::abs(t) <= self.eps {
                        return Err(Error::OriginOnBoundary(t));
                    }
                }
                if s.exit < 0.0 {
                    continue;
                }
                if s.enter < 0.0 {
                    if source.replace(zone).is_some() {
                        return Err(Error::Unsupported(String::from(
                            "ray origin lies in more than one zone",
                        )));
                    }
                } else {
                    out.push(LabeledCrossing {
                        t: s.enter,
                        zone,
                        kind: CrossingKind::Entry,
                    });
                }
                out.push(LabeledCrossing {
                    t: s.exit,
                    zone,
                    kind: CrossingKind::Exit,
                });
            }
        }
        let source = source.ok_or(Error::OriginOutside)?;
        sort_crossings(out, self.eps);
        Ok(source)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixMode {
    /// Symmetric; cell `(s, t)` with `s <= t` holds both orders.
    Chord,
    /// Directed; cell `(s, t)` holds rays from zone `s` crossing zone `t`.
    Ray,
}

/// One signed histogram per zone pair, with shared line counters.
#[derive(Debug, Clone)]
pub struct HistogramMatrix {
    mode: MatrixMode,
    n_zones: usize,
    binning: Binning,
    cells: Vec<SignedHistogram>,
    n_lines: u64,
    n_chords: i64,
    scratch: Vec<(usize, usize, i64)>,
    group: Vec<(usize, i64)>,
}

impl PartialEq for HistogramMatrix {
    fn eq(&self, o: &Self) -> bool {
        self.mode == o.mode
            && self.n_zones == o.n_zones
            && self.binning == o.binning
            && self.cells == o.cells
            && self.n_lines == o.n_lines
            && self.n_chords == o.n_chords
    }
}

impl HistogramMatrix {
    pub fn new(mode: MatrixMode, n_zones: usize, binning: Binning) -> HistogramMatrix {
        let n_cells = match mode {
            MatrixMode::Chord => n_zones * (n_zones + 1) / 2,
            MatrixMode::Ray => n_zones * n_zones,
        };
        HistogramMatrix {
            mode,
            n_zones,
            binning,
            cells: alloc::vec![SignedHistogram::new(binning); n_cells],
            n_lines: 0,
            n_chords: 0,
            scratch: Vec::new(),
            group: Vec::new(),
        }
    }

    pub fn mode(&self) -> MatrixMode {
        self.mode
    }

    pub fn n_zones(&self) -> usize {
        self.n_zones
    }

    pub fn binning(&self) -> &Binning {
        &self.binning
    }

    /// Lines (or rays) that contributed to any cell.
    pub fn n_lines(&self) -> u64 {
        self.n_lines
    }

    pub fn n_chords(&self) -> i64 {
        self.n_chords
    }

    fn index(&self, s: usize, t: usize) -> usize {
        match self.mode {
            MatrixMode::Chord => {
                let (a, b) = if s <= t { (s, t) } else { (t, s) };
                a * self.n_zones - a * (a.saturating_sub(1)) / 2 + (b - a)
            }
            MatrixMode::Ray => s * self.n_zones + t,
        }
    }

    pub fn cell(&self, s: usize, t: usize) -> &SignedHistogram {
        &self.cells[self.index(s, t)]
    }

    /// Stored `(s, t)` pairs: `s <= t` in chord mode, all pairs in ray mode.
    pub fn cell_pairs(&self) -> Vec<(usize, usize)> {
        let m = self.n_zones;
        (0..m)
            .flat_map(|s| (0..m).map(move |t| (s, t)))
            .filter(|&(s, t)| self.mode == MatrixMode::Ray || s <= t)
            .collect()
    }

    /// Elementwise sum of all cells.
    pub fn summed_counts(&self) -> Vec<i64> {
        let mut out = alloc::vec![0; self.binning.n_bins()];
        for c in &self.cells {
            for (o, v) in out.iter_mut().zip(c.counts()) {
                *o += v;
            }
        }
        out
    }

    /// Records all signed pairs of one line. Pairs no longer than
    /// `zero_tol` are skipped. Nothing is recorded on error.
    pub fn record_line(&mut self, crossings: &[LabeledCrossing], zero_tol: f64) -> Result<i64> {
        if self.mode != MatrixMode::Chord {
            return Err(Error::InvalidConfig(String::from("matrix is in ray mode")));
        }
        let mut scratch = core::mem::take(&mut self.scratch);
        scratch.clear();
        let result = (|| {
            check_params(crossings)?;
            for k in 1..crossings.len() {
                for j in 0..k {
                    let l = crossings[k].t - crossings[j].t;
                    if l <= zero_tol {
                        continue;
                    }
                    let sign = if (k - j) % 2 == 1 { 1 } else { -1 };
                    let cell = self.index(crossings[j].zone, crossings[k].zone);
                    scratch.push((cell, self.binning.bin_of(l)?, sign));
                }
            }
            Ok(())
        })();
        let net = match result {
            Ok(()) => self.commit(&mut scratch),
            Err(e) => {
                self.scratch = scratch;
                return Err(e);
            }
        };
        self.scratch = scratch;
        Ok(net)
    }

    /// Records one ray from zone `source`: the k-th crossing (1-based)
    /// adds `(-1)^(k+1)` to cell `(source, zone of crossing k)`.
    pub fn record_ray(&mut self, source: usize, crossings: &[LabeledCrossing]) -> Result<()> {
        if self.mode != MatrixMode::Ray {
            return Err(Error::InvalidConfig(String::from("matrix is in chord mode")));
        }
        if crossings.len().is_multiple_of(2) {
            return Err(Error::InvalidCrossings(alloc::format!(
                "ray needs an odd number of crossings, got {}",
                crossings.len()
            )));
        }
        check_ray_params(crossings)?;
        if source >= self.n_zones || crossings.iter().any(|c| c.zone >= self.n_zones) {
            return Err(Error::UnlabeledCrossing);
        }
        let mut scratch = core::mem::take(&mut self.scratch);
        scratch.clear();
        for (i, c) in crossings.iter().enumerate() {
            let bin = match self.binning.bin_of(c.t) {
                Ok(b) => b,
                Err(e) => {
                    self.scratch = scratch;
                    return Err(e);
                }
            };
            let sign = if i % 2 == 0 { 1 } else { -1 };
            scratch.push((self.index(source, c.zone), bin, sign));
        }
        self.commit(&mut scratch);
        self.scratch = scratch;
        Ok(())
    }

    fn commit(&mut self, scratch: &mut [(usize, usize, i64)]) -> i64 {
        if scratch.is_empty() {
            return 0;
        }
        scratch.sort_unstable_by_key(|&(c, b, _)| (c, b));
        let mut net = 0;
        let mut i = 0;
        while i < scratch.len() {
            let cell = scratch[i].0;
            self.group.clear();
            while i < scratch.len() && scratch[i].0 == cell {
                self.group.push((scratch[i].1, scratch[i].2));
                i += 1;
            }
            net += self.cells[cell].add_line_contributions(&self.group);
        }
        self.n_lines += 1;
        self.n_chords += net;
        net
    }
}

fn check_params(x: &[LabeledCrossing]) -> Result<()> {
    let params: Vec<f64> = x.iter().map(|c| c.t).collect();
    check_line_crossings(&params)
}

fn check_ray_params(x: &[LabeledCrossing]) -> Result<()> {
    if x.iter().any(|c| !(c.t > 0.0)) || x.windows(2).any(|w| w[0].t > w[1].t) {
        return Err(Error::InvalidCrossings(String::from(
            "ray crossings must be positive and ascending",
        )));
    }
    Ok(())
}

impl Mergeable for HistogramMatrix {
    fn merge_from(&mut self, other: &Self) -> Result<()> {
        if self.mode != other.mode || self.n_zones != other.n_zones || self.binning != other.binning
        {
            return Err(Error::BinningMismatch);
        }
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.merge(b)?;
        }
        self.n_lines += other.n_lines;
        self.n_chords += other.n_chords;
        Ok(())
    }

    fn without(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.cells.iter_mut().zip(&other.cells) {
            *a = a.without(b);
        }
        out.n_lines -= other.n_lines;
        out.n_chords -= other.n_chords;
        out
    }
}

/// Union histogram and zone matrix recorded from the same samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonedRun {
    pub union: Batched<SignedHistogram>,
    pub matrix: Batched<HistogramMatrix>,
}

fn zoned_parts(
    parts: Vec<Result<(SignedHistogram, HistogramMatrix, u64)>>,
    seed: u64,
) -> Result<ZonedRun> {
    let mut hs = Vec::with_capacity(parts.len());
    let mut ms = Vec::with_capacity(parts.len());
    let mut sampled = 0;
    for p in parts {
        let (h, m, n) = p?;
        hs.push(h);
        ms.push(m);
        sampled += n;
    }
    Ok(ZonedRun {
        union: Batched::from_parts(hs, sampled, seed)?,
        matrix: Batched::from_parts(ms, sampled, seed)?,
    })
}

/// Chord-mode union histogram and zone matrix from `n_lines` kinematic
/// lines through the scene bounding sphere.
pub fn sample_zoned_chords<E: ChunkExecutor>(
    zones: &ZoneSet,
    binning: Binning,
    n_lines: u64,
    seed: u64,
    n_chunks: usize,
    exec: &E,
) -> Result<ZonedRun> {
    zones.require_disjoint()?;
    let bound = zones.bounding_sphere();
    let sizes = chunk_sizes(n_lines, n_chunks);
    let parts = exec.map_chunks(sizes.len(), |c| {
        let mut rng = RngStream::derived(seed, "chords", c as u64);
        let mut h = SignedHistogram::new(binning);
        let mut m = HistogramMatrix::new(MatrixMode::Chord, zones.len(), binning);
        let mut x = Vec::new();
        let mut params = Vec::new();
        for _ in 0..sizes[c] {
            let line = sampling::sample_kinematic_line(&bound, &mut rng);
            zones.labeled_crossings(&line, &mut x);
            if x.is_empty() {
                continue;
            }
            params.clear();
            params.extend(x.iter().map(|c| c.t));
            h.record_line_chords(&params, zones.tolerance())?;
            m.record_line(&x, zones.tolerance())?;
        }
        Ok((h, m, sizes[c]))
    });
    zoned_parts(parts, seed)
}

/// Ray-mode union histogram and zone matrix from `n_rays` rays with
/// sources uniform over the union of zones.
pub fn sample_zoned_rays<E: ChunkExecutor>(
    zones: &ZoneSet,
    binning: Binning,
    n_rays: u64,
    seed: u64,
    n_chunks: usize,
    exec: &E,
) -> Result<ZonedRun> {
    zones.require_disjoint()?;
    let bbox = zones
        .zones()
        .iter()
        .map(Body::bounding_box)
        .reduce(|a, b| crate::geometry::Aabb {
            lo: a.lo.min(b.lo),
            hi: a.hi.max(b.hi),
        })
        .ok_or(Error::NoData)?;
    let inside = |p: Point3| zones.zones().iter().any(|z| z.contains(p));
    let sizes = chunk_sizes(n_rays, n_chunks);
    let parts = exec.map_chunks(sizes.len(), |c| {
        let mut rng = RngStream::derived(seed, "rays", c as u64);
        let mut h = SignedHistogram::new(binning);
        let mut m = HistogramMatrix::new(MatrixMode::Ray, zones.len(), binning);
        let mut x = Vec::new();
        let mut params = Vec::new();
        let mut done = 0;
        while done < sizes[c] {
            let origin = sampling::sample_point_where(&bbox, inside, &mut rng)?;
            let dir = sampling::sample_isotropic_direction(&mut rng);
            let source = match zones.labeled_ray(origin, dir, &mut x) {
                Ok(s) => s,
                Err(Error::OriginOnBoundary(_)) | Err(Error::OriginOutside) => continue,
                Err(e) => return Err(e),
            };
            params.clear();
            params.extend(x.iter().map(|c| c.t));
            h.record_ray(&params)?;
            m.record_ray(source, &x)?;
            done += 1;
        }
        Ok((h, m, sizes[c]))
    });
    zoned_parts(parts, seed)
}

fn weighted(counts: &[i64], w: &[f64]) -> f64 {
    counts.iter().zip(w).map(|(&c, &w)| c as f64 * w).sum()
}

fn scaled(m: Measured, volume: Measured) -> Measured {
    let extra = m.value * volume.relative_error();
    Measured::new(m.value, math::sqrt(m.stderr * m.stderr + extra * extra))
}

fn check_zone(run: &Batched<HistogramMatrix>, s: usize, t: usize) -> Result<()> {
    let n = run.merged.n_zones();
    if s >= n || t >= n {
        return Err(Error::InvalidConfig(alloc::format!(
            "zone pair ({s}, {t}) out of range for {n} zones"
        )));
    }
    Ok(())
}

/// `A_st` from a chord-mode matrix, normalized with the union's
/// `V/⟨l⟩`. Off-diagonal cells hold both orders and are halved.
pub fn pair_integral_chord(
    run: &Batched<HistogramMatrix>,
    kernel: &Kernel,
    s: usize,
    t: usize,
    union_volume: Measured,
) -> Result<EstimateReport> {
    check_zone(run, s, t)?;
    if run.merged.mode() != MatrixMode::Chord {
        return Err(Error::InvalidConfig(String::from("expected a chord-mode matrix")));
    }
    let mids = run.merged.binning().midpoints();
    let table = kernel.tabulate(&mids)?;
    let half = if s == t { 1.0 } else { 0.5 };
    let m = run.jackknife(|mx| {
        let sum_l = weighted(&mx.summed_counts(), &mids);
        if !(sum_l > 0.0) {
            return Err(Error::NonPositiveMeanChord(sum_l));
        }
        Ok(half * union_volume.value * weighted(mx.cell(s, t).counts(), &table.i2) / sum_l)
    })?;
    Ok(report(Method::Chord, scaled(m, union_volume), run, Normalizer::VolumeOverMeanChord))
}

/// `A_st` from a ray-mode matrix: rays from zone `s` scored in zone `t`.
pub fn pair_integral_ray(
    run: &Batched<HistogramMatrix>,
    kernel: &Kernel,
    s: usize,
    t: usize,
    union_volume: Measured,
) -> Result<EstimateReport> {
    pair_integral_ray_with(run, kernel, union_volume, |mx, i1| {
        check_zone(run, s, t)?;
        Ok(weighted(mx.cell(s, t).counts(), i1))
    })
}

/// `(A_st + A_ts) / 2` from a ray-mode matrix.
pub fn pair_integral_ray_symmetrized(
    run: &Batched<HistogramMatrix>,
    kernel: &Kernel,
    s: usize,
    t: usize,
    union_volume: Measured,
) -> Result<EstimateReport> {
    pair_integral_ray_with(run, kernel, union_volume, |mx, i1| {
        check_zone(run, s, t)?;
        Ok(0.5 * (weighted(mx.cell(s, t).counts(), i1) + weighted(mx.cell(t, s).counts(), i1)))
    })
}

fn pair_integral_ray_with<F>(
    run: &Batched<HistogramMatrix>,
    kernel: &Kernel,
    union_volume: Measured,
    score: F,
) -> Result<EstimateReport>
where
    F: Fn(&HistogramMatrix, &[f64]) -> Result<f64>,
{
    if run.merged.mode() != MatrixMode::Ray {
        return Err(Error::InvalidConfig(String::from("expected a ray-mode matrix")));
    }
    let table = kernel.tabulate(&run.merged.binning().midpoints())?;
    let m = run.jackknife(|mx| {
        if mx.n_lines() == 0 {
            return Err(Error::NoData);
        }
        Ok(union_volume.value * score(mx, &table.i1)? / mx.n_lines() as f64)
    })?;
    Ok(report(Method::Ray, scaled(m, union_volume), run, Normalizer::None))
}

fn report(
    method: Method,
    m: Measured,
    run: &Batched<HistogramMatrix>,
    normalizer: Normalizer,
) -> EstimateReport {
    EstimateReport {
        method,
        value: m.value,
        stderr: m.stderr,
        n_samples: run.n_sampled,
        normalizer,
        seed: run.seed,
        runtime_secs: None,
        alternative: None,
        note: None,
    }
}

/// Chord estimate of the self-integral of one body with its own bounding
/// sphere and binning.
pub fn body_chord_estimate<E: ChunkExecutor>(
    body: &Body,
    kernel: &Kernel,
    n_lines: u64,
    opts: &RunOptions,
    exec: &E,
) -> Result<EstimateReport> {
    let bound = sampling::scene_bounding_sphere(core::iter::once(body)).ok_or(Error::NoData)?;
    let binning = opts.binning(&bound)?;
    let run = runner::sample_chords(body, &bound, binning, n_lines, opts.seed, opts.n_chunks, exec)?;
    if run.merged.n_lines() == 0 {
        // No line met the body: it has no volume to integrate over.
        let mut r = estimators::chord_estimate_empty(&run);
        r.note = Some(String::from("no line crossed the body"));
        return Ok(r);
    }
    let volume = runner::volume(body, opts.volume_points, opts.seed, opts.n_chunks, exec);
    estimators::chord_estimate(&run, kernel, volume, body.analytic_surface_area())
}

fn sub_seed(seed: u64, task: &str) -> u64 {
    sampling::stream_id(task, seed)
}

/// Result of checking `A12 = (D_∪ - D1 - D2) / 2` against the
/// zone-matrix cross integral.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtractionCheck {
    pub d_union: EstimateReport,
    pub d_first: EstimateReport,
    pub d_second: EstimateReport,
    /// `(D_∪ - D1 - D2) / 2` from independent runs.
    pub identity: Measured,
    /// `A12` from the zone matrix of a separate run.
    pub direct: EstimateReport,
}

impl SubtractionCheck {
    pub fn z_score(&self) -> f64 {
        self.identity.z_score(&self.direct.measured())
    }
}

/// Cross integral of two disjoint bodies by subtraction and directly.
pub fn subtraction_identity_check<E: ChunkExecutor>(
    first: &Body,
    second: &Body,
    kernel: &Kernel,
    n_lines: u64,
    opts: &RunOptions,
    exec: &E,
) -> Result<SubtractionCheck> {
    let zones = ZoneSet::new(alloc::vec![first.clone(), second.clone()])?;
    zones.require_disjoint()?;
    let union = zones.union_body()?;
    let with_seed = |task: &str| RunOptions {
        seed: sub_seed(opts.seed, task),
        ..*opts
    };
    let d_union = body_chord_estimate(&union, kernel, n_lines, &with_seed("union"), exec)?;
    let d_first = body_chord_estimate(first, kernel, n_lines, &with_seed("first"), exec)?;
    let d_second = body_chord_estimate(second, kernel, n_lines, &with_seed("second"), exec)?;
    let identity = half_combination(&[&d_union], &[&d_first, &d_second]);

    let bound = zones.bounding_sphere();
    let binning = opts.binning(&bound)?;
    let seed = sub_seed(opts.seed, "matrix");
    let run = sample_zoned_chords(&zones, binning, n_lines, seed, opts.n_chunks, exec)?;
    let v1 = runner::volume(first, opts.volume_points, seed, opts.n_chunks, exec);
    let v2 = runner::volume(second, opts.volume_points, seed ^ 1, opts.n_chunks, exec);
    let v = Measured::new(v1.value + v2.value, math::sqrt(v1.stderr * v1.stderr + v2.stderr * v2.stderr));
    let direct = pair_integral_chord(&run.matrix, kernel, 0, 1, v)?;
    Ok(SubtractionCheck {
        d_union,
        d_first,
        d_second,
        identity,
        direct,
    })
}

/// `(Σ plus - Σ minus) / 2` of independent estimates.
fn half_combination(plus: &[&EstimateReport], minus: &[&EstimateReport]) -> Measured {
    let value: f64 = plus.iter().map(|r| r.value).sum::<f64>() - minus.iter().map(|r| r.value).sum::<f64>();
    let var: f64 = plus.iter().chain(minus).map(|r| r.stderr * r.stderr).sum();
    Measured::new(0.5 * value, 0.5 * math::sqrt(var))
}

/// Bodies whose self-integrals combine into the cross integral of two
/// bodies:
/// `2 A12 = D(B1 ∪ B2) + D(B1 ∩ B2) - D(B1 \ B2) - D(B2 \ B1)`.
/// For disjoint bodies the intersection drops out and the differences are
/// the bodies themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapPlan {
    pub union: Body,
    /// `None` when the bodies share no volume.
    pub intersection: Option<Body>,
    pub first_only: Body,
    pub second_only: Body,
}

impl OverlapPlan {
    /// Self-integral tasks in the order expected by [`OverlapPlan::combine`]:
    /// union, intersection (if any), first only, second only.
    pub fn tasks(&self) -> Vec<&Body> {
        let mut out = alloc::vec![&self.union];
        out.extend(self.intersection.as_ref());
        out.push(&self.first_only);
        out.push(&self.second_only);
        out
    }

    /// `A12` from estimates ordered as [`OverlapPlan::tasks`].
    pub fn combine(&self, estimates: &[EstimateReport]) -> Result<Measured> {
        let n = self.tasks().len();
        if estimates.len() != n {
            return Err(Error::InvalidConfig(alloc::format!(
                "expected {n} estimates, got {}",
                estimates.len()
            )));
        }
        let (plus, minus) = estimates.split_at(n - 2);
        let plus: Vec<&EstimateReport> = plus.iter().collect();
        let minus: Vec<&EstimateReport> = minus.iter().collect();
        Ok(half_combination(&plus, &minus))
    }
}

/// Plans the cross integral of two possibly overlapping bodies.
pub fn decompose_overlap(first: &Body, second: &Body) -> Result<OverlapPlan> {
    let (a, b) = (first.solid().clone(), second.solid().clone());
    let union = Body::new(
        alloc::format!("{}|{}", first.label(), second.label()),
        a.clone().union(b.clone()),
    )?;
    if !bodies_overlap(first, second) {
        return Ok(OverlapPlan {
            union,
            intersection: None,
            first_only: first.clone(),
            second_only: second.clone(),
        });
    }
    Ok(OverlapPlan {
        union,
        intersection: Some(Body::new(
            alloc::format!("{}&{}", first.label(), second.label()),
            a.clone().intersection(b.clone()),
        )?),
        first_only: Body::new(
            alloc::format!("{}-{}", first.label(), second.label()),
            a.clone().difference(b.clone()),
        )?,
        second_only: Body::new(
            alloc::format!("{}-{}", second.label(), first.label()),
            b.difference(a),
        )?,
    })
}

/// Runs every task of [`decompose_overlap`] with the chord estimator and
/// combines them.
pub fn pair_integral_by_decomposition<E: ChunkExecutor>(
    first: &Body,
    second: &Body,
    kernel: &Kernel,
    n_lines: u64,
    opts: &RunOptions,
    exec: &E,
) -> Result<(OverlapPlan, Vec<EstimateReport>, Measured)> {
    let plan = decompose_overlap(first, second)?;
    let mut estimates = Vec::new();
    for (i, body) in plan.tasks().into_iter().enumerate() {
        let o = RunOptions {
            seed: sub_seed(opts.seed, "decomposition").wrapping_add(i as u64),
            ..*opts
        };
        estimates.push(body_chord_estimate(body, kernel, n_lines, &o, exec)?);
    }
    let value = plan.combine(&estimates)?;
    Ok((plan, estimates, value))
}
