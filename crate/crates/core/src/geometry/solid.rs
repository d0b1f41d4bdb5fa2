use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::interval::{self, Span};
use super::vector::{Direction3, Line, Mat3, Point3, Vec3};
use super::{CrossingList, TANGENCY_TOLERANCE};
use crate::error::{Error, Result};
use crate::math;

/// CSG tree of primitive solids.
#[derive(Debug, Clone, PartialEq)]
pub enum Solid {
    Sphere {
        center: Point3,
        radius: f64,
    },
    /// Axis-aligned box.
    Cuboid {
        lo: Point3,
        hi: Point3,
    },
    /// Finite cylinder between two axis end points, capped.
    Cylinder {
        base: Point3,
        top: Point3,
        radius: f64,
    },
    Union(Box<Solid>, Box<Solid>),
    Intersection(Box<Solid>, Box<Solid>),
    Difference(Box<Solid>, Box<Solid>),
    /// `world = rotation * local + translation`.
    Transformed {
        solid: Box<Solid>,
        rotation: Mat3,
        translation: Vec3,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingSphere {
    pub center: Point3,
    pub radius: f64,
}

impl BoundingSphere {
    /// Smallest sphere containing both spheres.
    pub fn enclosing(a: BoundingSphere, b: BoundingSphere) -> BoundingSphere {
        let d = a.center.distance(b.center);
        if d + b.radius <= a.radius {
            return a;
        }
        if d + a.radius <= b.radius {
            return b;
        }
        let radius = 0.5 * (d + a.radius + b.radius);
        let center = a.center + (b.center - a.center) * ((radius - a.radius) / d);
        BoundingSphere { center, radius }
    }

    pub fn inflated(self, rel: f64) -> BoundingSphere {
        BoundingSphere {
            center: self.center,
            radius: self.radius * (1.0 + rel),
        }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    fn disjoint(&self, o: &BoundingSphere) -> bool {
        self.center.distance(o.center) > self.radius + o.radius
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub lo: Point3,
    pub hi: Point3,
}

impl Aabb {
    pub fn volume(&self) -> f64 {
        let e = self.hi - self.lo;
        e.x.max(0.0) * e.y.max(0.0) * e.z.max(0.0)
    }

    fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            lo: self.lo.min(o.lo),
            hi: self.hi.max(o.hi),
        }
    }

    fn intersection(&self, o: &Aabb) -> Aabb {
        Aabb {
            lo: self.lo.max(o.lo),
            hi: self.hi.min(o.hi),
        }
    }

    fn disjoint(&self, o: &Aabb) -> bool {
        self.lo.x > o.hi.x
            || o.lo.x > self.hi.x
            || self.lo.y > o.hi.y
            || o.lo.y > self.hi.y
            || self.lo.z > o.hi.z
            || o.lo.z > self.hi.z
    }
}

impl Solid {
    pub fn sphere(center: Point3, radius: f64) -> Result<Solid> {
        let s = Solid::Sphere { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn cuboid(lo: Point3, hi: Point3) -> Result<Solid> {
        let s = Solid::Cuboid { lo, hi };
        s.validate()?;
        Ok(s)
    }

    pub fn cylinder(base: Point3, top: Point3, radius: f64) -> Result<Solid> {
        let s = Solid::Cylinder { base, top, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn union(self, other: Solid) -> Solid {
        Solid::Union(Box::new(self), Box::new(other))
    }

    pub fn intersection(self, other: Solid) -> Solid {
        Solid::Intersection(Box::new(self), Box::new(other))
    }

    pub fn difference(self, other: Solid) -> Solid {
        Solid::Difference(Box::new(self), Box::new(other))
    }

    pub fn translated(self, by: Vec3) -> Solid {
        self.transformed(Mat3::IDENTITY, by)
    }

    pub fn rotated(self, axis: Direction3, angle: f64) -> Solid {
        self.transformed(Mat3::rotation(axis, angle), Vec3::ZERO)
    }

    pub fn transformed(self, rotation: Mat3, translation: Vec3) -> Solid {
        Solid::Transformed {
            solid: Box::new(self),
            rotation,
            translation,
        }
    }

    /// Checks parameters of every node.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGeometry(msg));
        match self {
            Solid::Sphere { center, radius } => {
                if !center.is_finite() {
                    return bad(format!("sphere center {center:?} is not finite"));
                }
                if !(*radius > 0.0) || !radius.is_finite() {
                    return bad(format!("sphere radius must be positive, got {radius}"));
                }
            }
            Solid::Cuboid { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    return bad(format!("box corners {lo:?}, {hi:?} are not finite"));
                }
                if !(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z) {
                    return bad(format!("box needs lo < hi componentwise, got {lo:?}, {hi:?}"));
                }
            }
            Solid::Cylinder { base, top, radius } => {
                if !base.is_finite() || !top.is_finite() {
                    return bad(String::from("cylinder axis end points are not finite"));
                }
                if !(base.distance(*top) > 0.0) {
                    return bad(String::from("cylinder axis has zero length"));
                }
                if !(*radius > 0.0) || !radius.is_finite() {
                    return bad(format!("cylinder radius must be positive, got {radius}"));
                }
            }
            Solid::Union(a, b) | Solid::Intersection(a, b) | Solid::Difference(a, b) => {
                a.validate()?;
                b.validate()?;
                if let Solid::Intersection(a, b) = self {
                    if a.bounding_box().disjoint(&b.bounding_box()) {
                        return bad(String::from("intersection of disjoint solids is empty"));
                    }
                }
            }
            Solid::Transformed {
                solid,
                rotation,
                translation,
            } => {
                solid.validate()?;
                if !translation.is_finite() {
                    return bad(String::from("translation is not finite"));
                }
                if rotation.orthonormality_error() > 1e-9 || rotation.determinant() < 0.0 {
                    return bad(String::from("rotation matrix is not a proper rotation"));
                }
            }
        }
        Ok(())
    }

    /// In-body parameter spans along `anchor + t * dir`.
    pub fn spans(&self, anchor: Point3, dir: Vec3, eps: f64) -> Vec<Span> {
        match self {
            Solid::Sphere { center, radius } => sphere_spans(*center, *radius, anchor, dir, eps),
            Solid::Cuboid { lo, hi } => cuboid_spans(*lo, *hi, anchor, dir, eps),
            Solid::Cylinder { base, top, radius } => {
                cylinder_spans(*base, *top, *radius, anchor, dir, eps)
            }
            Solid::Union(a, b) => {
                interval::union(&a.spans(anchor, dir, eps), &b.spans(anchor, dir, eps), eps)
            }
            Solid::Intersection(a, b) => {
                let sa = a.spans(anchor, dir, eps);
                if sa.is_empty() {
                    return sa;
                }
                interval::intersection(&sa, &b.spans(anchor, dir, eps), eps)
            }
            Solid::Difference(a, b) => {
                let sa = a.spans(anchor, dir, eps);
                if sa.is_empty() {
                    return sa;
                }
                interval::difference(&sa, &b.spans(anchor, dir, eps), eps)
            }
            Solid::Transformed {
                solid,
                rotation,
                translation,
            } => {
                let inv = rotation.transpose();
                solid.spans(inv.mul_vec(anchor - *translation), inv.mul_vec(dir), eps)
            }
        }
    }

    pub fn contains(&self, p: Point3) -> bool {
        match self {
            Solid::Sphere { center, radius } => (p - *center).norm_squared() <= radius * radius,
            Solid::Cuboid { lo, hi } => {
                p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z
            }
            Solid::Cylinder { base, top, radius } => {
                let axis = *top - *base;
                let h2 = axis.norm_squared();
                let w = p - *base;
                let s = w.dot(axis);
                if s < 0.0 || s > h2 {
                    return false;
                }
                let radial2 = w.norm_squared() - s * s / h2;
                radial2 <= radius * radius
            }
            Solid::Union(a, b) => a.contains(p) || b.contains(p),
            Solid::Intersection(a, b) => a.contains(p) && b.contains(p),
            Solid::Difference(a, b) => a.contains(p) && !b.contains(p),
            Solid::Transformed {
                solid,
                rotation,
                translation,
            } => solid.contains(rotation.transpose().mul_vec(p - *translation)),
        }
    }

    pub fn bounding_sphere(&self) -> BoundingSphere {
        match self {
            Solid::Sphere { center, radius } => BoundingSphere {
                center: *center,
                radius: *radius,
            },
            Solid::Cuboid { lo, hi } => BoundingSphere {
                center: (*lo + *hi) * 0.5,
                radius: 0.5 * lo.distance(*hi),
            },
            Solid::Cylinder { base, top, radius } => {
                let half = 0.5 * base.distance(*top);
                BoundingSphere {
                    center: (*base + *top) * 0.5,
                    radius: math::sqrt(half * half + radius * radius),
                }
            }
            Solid::Union(a, b) => {
                BoundingSphere::enclosing(a.bounding_sphere(), b.bounding_sphere())
            }
            Solid::Intersection(a, b) => {
                let (sa, sb) = (a.bounding_sphere(), b.bounding_sphere());
                if sa.radius <= sb.radius {
                    sa
                } else {
                    sb
                }
            }
            Solid::Difference(a, _) => a.bounding_sphere(),
            Solid::Transformed {
                solid,
                rotation,
                translation,
            } => {
                let s = solid.bounding_sphere();
                BoundingSphere {
                    center: rotation.mul_vec(s.center) + *translation,
                    radius: s.radius,
                }
            }
        }
    }

    pub fn bounding_box(&self) -> Aabb {
        match self {
            Solid::Sphere { center, radius } => {
                let r = Vec3::new(*radius, *radius, *radius);
                Aabb {
                    lo: *center - r,
                    hi: *center + r,
                }
            }
            Solid::Cuboid { lo, hi } => Aabb { lo: *lo, hi: *hi },
            Solid::Cylinder { base, top, radius } => {
                let axis = *top - *base;
                let h2 = axis.norm_squared();
                let ext = |c: f64| radius * math::sqrt((1.0 - c * c / h2).max(0.0));
                let e = Vec3::new(ext(axis.x), ext(axis.y), ext(axis.z));
                Aabb {
                    lo: base.min(*top) - e,
                    hi: base.max(*top) + e,
                }
            }
            Solid::Union(a, b) => a.bounding_box().union(&b.bounding_box()),
            Solid::Intersection(a, b) => a.bounding_box().intersection(&b.bounding_box()),
            Solid::Difference(a, _) => a.bounding_box(),
            Solid::Transformed {
                solid,
                rotation,
                translation,
            } => {
                let b = solid.bounding_box();
                let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
                let mut hi = -lo;
                for i in 0..8 {
                    let corner = Vec3::new(
                        if i & 1 == 0 { b.lo.x } else { b.hi.x },
                        if i & 2 == 0 { b.lo.y } else { b.hi.y },
                        if i & 4 == 0 { b.lo.z } else { b.hi.z },
                    );
                    let w = rotation.mul_vec(corner) + *translation;
                    lo = lo.min(w);
                    hi = hi.max(w);
                }
                Aabb { lo, hi }
            }
        }
    }

    /// Closed-form volume, when one exists: primitives, and unions or
    /// differences whose operands are provably apart.
    pub fn analytic_volume(&self) -> Option<f64> {
        match self {
            Solid::Sphere { radius, .. } => Some(4.0 / 3.0 * PI * radius * radius * radius),
            Solid::Cuboid { lo, hi } => {
                let e = *hi - *lo;
                Some(e.x * e.y * e.z)
            }
            Solid::Cylinder { base, top, radius } => Some(PI * radius * radius * base.distance(*top)),
            Solid::Union(a, b) if a.is_apart_from(b) => Some(a.analytic_volume()? + b.analytic_volume()?),
            Solid::Difference(a, b) if a.is_apart_from(b) => a.analytic_volume(),
            Solid::Transformed { solid, .. } => solid.analytic_volume(),
            _ => None,
        }
    }

    /// Closed-form surface area under the same conditions as
    /// [`Solid::analytic_volume`]; `None` means unavailable.
    pub fn analytic_surface_area(&self) -> Option<f64> {
        match self {
            Solid::Sphere { radius, .. } => Some(4.0 * PI * radius * radius),
            Solid::Cuboid { lo, hi } => {
                let e = *hi - *lo;
                Some(2.0 * (e.x * e.y + e.y * e.z + e.z * e.x))
            }
            Solid::Cylinder { base, top, radius } => {
                Some(2.0 * PI * radius * base.distance(*top) + 2.0 * PI * radius * radius)
            }
            Solid::Union(a, b) if a.is_apart_from(b) => {
                Some(a.analytic_surface_area()? + b.analytic_surface_area()?)
            }
            Solid::Difference(a, b) if a.is_apart_from(b) => a.analytic_surface_area(),
            Solid::Transformed { solid, .. } => solid.analytic_surface_area(),
            _ => None,
        }
    }

    fn is_apart_from(&self, other: &Solid) -> bool {
        self.bounding_box().disjoint(&other.bounding_box())
            || self.bounding_sphere().disjoint(&other.bounding_sphere())
    }
}

fn sphere_spans(center: Point3, radius: f64, anchor: Point3, dir: Vec3, eps: f64) -> Vec<Span> {
    let oc = anchor - center;
    let b = oc.dot(dir);
    let c = oc.norm_squared() - radius * radius;
    let disc = b * b - c;
    // roots closer than eps count as one tangent contact
    if disc < -0.25 * eps * eps {
        return Vec::new();
    }
    if disc <= 0.25 * eps * eps {
        return alloc::vec![Span::point(-b)];
    }
    let s = math::sqrt(disc);
    alloc::vec![Span::new(-b - s, -b + s)]
}

fn cuboid_spans(lo: Point3, hi: Point3, anchor: Point3, dir: Vec3, eps: f64) -> Vec<Span> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for i in 0..3 {
        let (a, d, l, h) = (anchor.component(i), dir.component(i), lo.component(i), hi.component(i));
        if d == 0.0 {
            if a < l || a > h {
                return Vec::new();
            }
            continue;
        }
        let (mut ta, mut tb) = ((l - a) / d, (h - a) / d);
        if ta > tb {
            core::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
    }
    clip_to_span(t0, t1, eps)
}

fn cylinder_spans(
    base: Point3,
    top: Point3,
    radius: f64,
    anchor: Point3,
    dir: Vec3,
    eps: f64,
) -> Vec<Span> {
    let axis = top - base;
    let h = axis.norm();
    let u = axis * (1.0 / h);
    let w = anchor - base;
    let (wu, du) = (w.dot(u), dir.dot(u));
    let wp = w - u * wu;
    let dp = dir - u * du;

    // radial slab
    let a = dp.norm_squared();
    let (mut t0, mut t1);
    if a < 1e-24 {
        if wp.norm_squared() > radius * radius {
            return Vec::new();
        }
        t0 = f64::NEG_INFINITY;
        t1 = f64::INFINITY;
    } else {
        let b = wp.dot(dp) / a;
        let c = (wp.norm_squared() - radius * radius) / a;
        let disc = b * b - c;
        if disc < 0.0 {
            // tangent to the mantle when the roots nearly coincide
            if disc < -0.25 * eps * eps {
                return Vec::new();
            }
            t0 = -b;
            t1 = -b;
        } else {
            let s = math::sqrt(disc);
            t0 = -b - s;
            t1 = -b + s;
        }
    }

    // axial slab
    if du == 0.0 {
        if wu < 0.0 || wu > h {
            return Vec::new();
        }
    } else {
        let (mut ta, mut tb) = (-wu / du, (h - wu) / du);
        if ta > tb {
            core::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
    }
    clip_to_span(t0, t1, eps)
}

fn clip_to_span(t0: f64, t1: f64, eps: f64) -> Vec<Span> {
    if t1 < t0 - eps || !t0.is_finite() || !t1.is_finite() {
        return Vec::new();
    }
    if t1 - t0 <= eps {
        return alloc::vec![Span::point(0.5 * (t0 + t1))];
    }
    alloc::vec![Span::new(t0, t1)]
}

/// A labeled, validated solid with a cached bounding sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    label: String,
    solid: Solid,
    bound: BoundingSphere,
    eps: f64,
}

impl Body {
    pub fn new(label: impl Into<String>, solid: Solid) -> Result<Body> {
        solid.validate()?;
        let bound = solid.bounding_sphere();
        Ok(Body {
            label: label.into(),
            eps: TANGENCY_TOLERANCE * bound.radius,
            solid,
            bound,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn solid(&self) -> &Solid {
        &self.solid
    }

    pub fn bounding_sphere(&self) -> BoundingSphere {
        self.bound
    }

    pub fn bounding_box(&self) -> Aabb {
        self.solid.bounding_box()
    }

    /// Absolute tangency tolerance used for this body.
    pub fn tolerance(&self) -> f64 {
        self.eps
    }

    pub fn contains(&self, p: Point3) -> bool {
        self.solid.contains(p)
    }

    pub fn spans(&self, line: &Line) -> Vec<Span> {
        self.solid.spans(line.anchor, line.direction.vec(), self.eps)
    }

    pub fn intersect_line(&self, line: &Line) -> CrossingList {
        CrossingList::from_spans(&self.spans(line))
    }

    /// Crossing distances `l_1 < l_2 < ...` of a ray starting inside the
    /// body; the list has odd length.
    pub fn intersect_ray(&self, origin: Point3, dir: Direction3) -> Result<Vec<f64>> {
        let spans = self.solid.spans(origin, dir.vec(), self.eps);
        ray_distances(&spans, self.eps)
    }

    pub fn analytic_volume(&self) -> Option<f64> {
        self.solid.analytic_volume()
    }

    pub fn analytic_surface_area(&self) -> Option<f64> {
        self.solid.analytic_surface_area()
    }
}

/// Positive crossing distances from spans along a ray whose origin sits at
/// `t = 0` inside the union of the spans.
pub(crate) fn ray_distances(spans: &[Span], eps: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * spans.len());
    let mut inside = false;
    for s in spans {
        for t in [s.enter, s.exit] {
            if math::abs(t) <= eps {
                return Err(Error::OriginOnBoundary(t));
            }
        }
        if s.exit < 0.0 {
            continue;
        }
        if s.enter < 0.0 {
            inside = true;
            out.push(s.exit);
        } else {
            out.push(s.enter);
            out.push(s.exit);
        }
    }
    if !inside {
        return Err(Error::OriginOutside);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_sphere() -> Solid {
        Solid::sphere(Vec3::ZERO, 1.0).unwrap()
    }

    fn line(anchor: [f64; 3], dir: [f64; 3]) -> Line {
        Line::new(anchor.into(), Direction3::new(dir.into()).unwrap())
    }

    fn body(s: Solid) -> Body {
        Body::new("b", s).unwrap()
    }

    #[test]
    fn diameter_chord() {
        let b = body(unit_sphere());
        let c = b.intersect_line(&line([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]));
        assert_eq!(c.params(), &[-1.0, 1.0]);
    }

    #[test]
    fn miss_gives_empty_list() {
        let b = body(unit_sphere());
        assert!(b.intersect_line(&line([0.0, 2.0, 0.0], [1.0, 0.0, 0.0])).is_empty());
    }

    #[test]
    fn two_sphere_union_along_axis() {
        let s = unit_sphere().union(Solid::sphere(Vec3::new(4.0, 0.0, 0.0), 1.0).unwrap());
        let c = body(s).intersect_line(&line([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]));
        assert_eq!(c.params(), &[-1.0, 1.0, 3.0, 5.0]);
        assert_eq!(c.n_intervals(), 2);
    }

    #[test]
    fn tangent_is_duplicated() {
        let b = body(unit_sphere());
        let c = b.intersect_line(&line([-5.0, 1.0, 0.0], [1.0, 0.0, 0.0]));
        assert_eq!(c.params(), &[5.0, 5.0]);
    }

    #[test]
    fn near_tangent_merges_within_tolerance() {
        let b = body(unit_sphere());
        let c = b.intersect_line(&line([0.0, 1.0 - 1e-20, 0.0], [1.0, 0.0, 0.0]));
        assert_eq!(c.len(), 2);
        assert_eq!(c.params()[0], c.params()[1]);
    }

    #[test]
    fn ray_from_center() {
        let b = body(unit_sphere());
        let d = Direction3::new(Vec3::new(0.3, -0.2, 0.9)).unwrap();
        let r = b.intersect_ray(Vec3::ZERO, d).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ray_through_second_lobe_has_three_crossings() {
        let s = unit_sphere().union(Solid::sphere(Vec3::new(4.0, 0.0, 0.0), 1.0).unwrap());
        let b = body(s);
        let r = b
            .intersect_ray(Vec3::new(0.5, 0.0, 0.0), Direction3::new(Vec3::X).unwrap())
            .unwrap();
        assert_eq!(r, vec![0.5, 2.5, 4.5]);
    }

    #[test]
    fn ray_origin_errors() {
        let b = body(unit_sphere());
        let x = Direction3::new(Vec3::X).unwrap();
        assert_eq!(
            b.intersect_ray(Vec3::new(-1.0, 0.0, 0.0), x),
            Err(Error::OriginOnBoundary(0.0))
        );
        assert_eq!(b.intersect_ray(Vec3::new(3.0, 0.0, 0.0), x), Err(Error::OriginOutside));
    }

    #[test]
    fn cuboid_chord_and_measures() {
        let s = Solid::cuboid(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(s.analytic_volume(), Some(1.0));
        assert_eq!(s.analytic_surface_area(), Some(6.0));
        let c = body(s).intersect_line(&line([0.5, 0.5, -3.0], [0.0, 0.0, 1.0]));
        assert_eq!(c.params(), &[3.0, 4.0]);
    }

    #[test]
    fn sphere_measures() {
        let s = unit_sphere();
        assert!((s.analytic_volume().unwrap() - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((s.analytic_surface_area().unwrap() - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn disjoint_union_measures_add() {
        let s = unit_sphere().union(Solid::sphere(Vec3::new(4.0, 0.0, 0.0), 1.0).unwrap());
        assert!((s.analytic_volume().unwrap() - 8.0 * PI / 3.0).abs() < 1e-14);
        assert!((s.analytic_surface_area().unwrap() - 8.0 * PI).abs() < 1e-14);
        let o = unit_sphere().union(Solid::sphere(Vec3::new(1.0, 0.0, 0.0), 1.0).unwrap());
        assert_eq!(o.analytic_volume(), None);
        assert_eq!(o.analytic_surface_area(), None);
    }

    #[test]
    fn cylinder_along_and_across_axis() {
        let s = Solid::cylinder(Vec3::ZERO, Vec3::new(0.0, 0.0, 2.0), 0.5).unwrap();
        let b = body(s);
        let along = b.intersect_line(&line([0.1, 0.0, -1.0], [0.0, 0.0, 1.0]));
        assert_eq!(along.params(), &[1.0, 3.0]);
        let across = b.intersect_line(&line([-2.0, 0.0, 1.0], [1.0, 0.0, 0.0]));
        assert_eq!(across.params(), &[1.5, 2.5]);
        assert!(b.contains(Vec3::new(0.0, 0.4, 1.9)));
        assert!(!b.contains(Vec3::new(0.0, 0.4, 2.1)));
    }

    #[test]
    fn containment_examples() {
        let s = unit_sphere().union(Solid::sphere(Vec3::new(4.0, 0.0, 0.0), 1.0).unwrap());
        assert!(s.contains(Vec3::ZERO));
        assert!(!s.contains(Vec3::new(0.0, 2.0, 0.0)));
        assert!(!s.contains(Vec3::new(2.0, 0.0, 0.0)));
    }

    #[test]
    fn transformed_matches_direct() {
        let direct = Solid::cuboid(Vec3::new(1.0, 2.0, 3.0), Vec3::new(2.0, 3.0, 4.0)).unwrap();
        let moved = Solid::cuboid(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0))
            .unwrap()
            .translated(Vec3::new(1.0, 2.0, 3.0));
        let l = line([0.0, 2.5, 3.5], [1.0, 0.0, 0.0]);
        assert_eq!(body(direct).intersect_line(&l), body(moved).intersect_line(&l));
    }

    #[test]
    fn rotated_box_quarter_turn() {
        let axis = Direction3::new(Vec3::Z).unwrap();
        let s = Solid::cuboid(Vec3::new(0.0, -0.5, -0.5), Vec3::new(2.0, 0.5, 0.5))
            .unwrap()
            .rotated(axis, PI / 2.0);
        let c = body(s).intersect_line(&line([0.0, -1.0, 0.0], [0.0, 1.0, 0.0]));
        assert_eq!(c.len(), 2);
        assert!((c.params()[0] - 1.0).abs() < 1e-12);
        assert!((c.params()[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn malformed_solids_rejected() {
        assert!(Solid::sphere(Vec3::ZERO, -1.0).is_err());
        assert!(Solid::cuboid(Vec3::ZERO, Vec3::new(1.0, 0.0, 1.0)).is_err());
        assert!(Solid::cylinder(Vec3::ZERO, Vec3::ZERO, 1.0).is_err());
        let far = Solid::sphere(Vec3::new(10.0, 0.0, 0.0), 1.0).unwrap();
        assert!(unit_sphere().intersection(far).validate().is_err());
    }

    #[test]
    fn reversed_line_reflects_crossings() {
        let s = unit_sphere().union(Solid::sphere(Vec3::new(4.0, 0.0, 0.0), 1.0).unwrap());
        let b = body(s);
        let l = line([1.0, 0.3, 0.1], [1.0, 0.05, 0.0]);
        let fwd = b.intersect_line(&l);
        let back = b.intersect_line(&l.reversed());
        assert_eq!(fwd.len(), back.len());
        for (x, y) in fwd.reversed().params().iter().zip(back.params()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
