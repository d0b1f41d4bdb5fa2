//! Measure-correct random generators over seeded, reproducible streams.
//!
//! Lines are drawn with the disk construction: an isotropic direction, then
//! an anchor uniform on the disk of radius `R` through the bounding-sphere
//! center perpendicular to it. Restricted to lines meeting the bounding
//! sphere this is the motion-invariant line measure, whose total mass is
//! `π · 4πR² = 4π²R²` (oriented lines, directions over the full sphere).

use core::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Body, BoundingSphere, Direction3, Line, Point3, Vec3};
use crate::math;
use crate::stats::Measured;

/// Relative margin added to scene bounding spheres.
pub const BOUNDING_MARGIN: f64 = 1e-6;

/// Consecutive rejections after which point sampling gives up.
pub const MAX_REJECTIONS: u64 = 10_000_000;

/// ChaCha8 keyed by `seed` with an explicit stream id. Identical
/// `(seed, stream)` pairs replay the same sequence.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, seed, stream }
    }

    /// Stream for chunk `index` of the named sampling task.
    pub fn derived(seed: u64, task: &str, index: u64) -> Self {
        Self::new(seed, stream_id(task, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Stable stream id from a task name and chunk index (FNV-1a, then a
/// SplitMix64 finalizer).
pub fn stream_id(task: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in task.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(h ^ splitmix64(index))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn sample_isotropic_direction<R: Rng + ?Sized>(rng: &mut R) -> Direction3 {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.random::<f64>();
    let r = math::sqrt((1.0 - z * z).max(0.0));
    Direction3::new_unchecked(Vec3::new(r * math::cos(phi), r * math::sin(phi), z))
}

pub fn sample_point_in_box<R: Rng + ?Sized>(b: &Aabb, rng: &mut R) -> Point3 {
    let e = b.hi - b.lo;
    b.lo + Vec3::new(
        e.x * rng.random::<f64>(),
        e.y * rng.random::<f64>(),
        e.z * rng.random::<f64>(),
    )
}

/// Uniform point inside `body` by rejection from its bounding box.
pub fn sample_point_in_body<R: Rng + ?Sized>(body: &Body, rng: &mut R) -> Result<Point3> {
    sample_point_where(&body.bounding_box(), |p| body.contains(p), rng)
}

pub(crate) fn sample_point_where<R, F>(bbox: &Aabb, accept: F, rng: &mut R) -> Result<Point3>
where
    R: Rng + ?Sized,
    F: Fn(Point3) -> bool,
{
    for _ in 0..MAX_REJECTIONS {
        let p = sample_point_in_box(bbox, rng);
        if accept(p) {
            return Ok(p);
        }
    }
    Err(Error::Degenerate {
        attempts: MAX_REJECTIONS,
    })
}

/// Isotropic uniform line meeting the bounding sphere.
pub fn sample_kinematic_line<R: Rng + ?Sized>(bound: &BoundingSphere, rng: &mut R) -> Line {
    let dir = sample_isotropic_direction(rng);
    let (e1, e2) = dir.orthonormal_basis();
    let r = bound.radius * math::sqrt(rng.random::<f64>());
    let a = 2.0 * PI * rng.random::<f64>();
    let anchor = bound.center + e1 * (r * math::cos(a)) + e2 * (r * math::sin(a));
    Line::new(anchor, dir)
}

/// Total line measure of the lines meeting a sphere of radius `radius`.
pub fn kinematic_measure_total(radius: f64) -> f64 {
    4.0 * PI * PI * radius * radius
}

/// Smallest sphere enclosing every body's bounding sphere (pairwise fold),
/// inflated by [`BOUNDING_MARGIN`].
pub fn scene_bounding_sphere<'a, I>(bodies: I) -> Option<BoundingSphere>
where
    I: IntoIterator<Item = &'a Body>,
{
    bodies
        .into_iter()
        .map(Body::bounding_sphere)
        .reduce(BoundingSphere::enclosing)
        .map(|b| b.inflated(BOUNDING_MARGIN))
}

/// Measure `w_B` of lines meeting `body`, estimated from the fraction of
/// kinematic lines through `bound` that hit it.
pub fn estimate_line_measure<R: Rng + ?Sized>(
    body: &Body,
    bound: &BoundingSphere,
    n_lines: u64,
    rng: &mut R,
) -> Measured {
    line_measure_from_hits(count_line_hits(body, bound, n_lines, rng), n_lines, bound.radius)
}

/// Kinematic lines through `bound` that cross `body` over a positive length.
pub fn count_line_hits<R: Rng + ?Sized>(
    body: &Body,
    bound: &BoundingSphere,
    n_lines: u64,
    rng: &mut R,
) -> u64 {
    (0..n_lines)
        .filter(|_| {
            let line = sample_kinematic_line(bound, rng);
            body.spans(&line).iter().any(|s| !s.is_point())
        })
        .count() as u64
}

pub fn line_measure_from_hits(hits: u64, n_lines: u64, radius: f64) -> Measured {
    if n_lines == 0 {
        return Measured::default();
    }
    let p = hits as f64 / n_lines as f64;
    let total = kinematic_measure_total(radius);
    Measured::new(p * total, total * math::sqrt(p * (1.0 - p) / n_lines as f64))
}

/// Volume of `body`: closed form when available, otherwise containment
/// Monte Carlo over the bounding box with `n_points` probes.
pub fn volume<R: Rng + ?Sized>(body: &Body, n_points: u64, rng: &mut R) -> Measured {
    if let Some(v) = body.analytic_volume() {
        return Measured::exact(v);
    }
    let bbox = body.bounding_box();
    let mut inside = 0u64;
    for _ in 0..n_points {
        if body.contains(sample_point_in_box(&bbox, rng)) {
            inside += 1;
        }
    }
    volume_from_hits(inside, n_points, bbox.volume())
}

pub fn volume_from_hits(inside: u64, n_points: u64, box_volume: f64) -> Measured {
    if n_points == 0 {
        return Measured::default();
    }
    let p = inside as f64 / n_points as f64;
    Measured::new(
        p * box_volume,
        box_volume * math::sqrt(p * (1.0 - p) / n_points as f64),
    )
}
