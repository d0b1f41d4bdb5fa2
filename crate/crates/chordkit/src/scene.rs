//! TOML scene documents.
//!
//! ```toml
//! [kernel]
//! type = "exponential"
//! sigma = 1.0
//!
//! [[body]]
//! label = "lobe_a"
//! shape = { type = "sphere", center = [0.0, 0.0, 0.0], radius = 1.0 }
//!
//! [[body]]
//! label = "notched"
//! [body.shape]
//! type = "difference"
//! of = [
//!     { type = "box", lo = [0.0, 0.0, 0.0], hi = [2.0, 1.0, 1.0] },
//!     { type = "box", lo = [0.7, 0.4, -0.1], hi = [1.3, 1.1, 1.1] },
//! ]
//! ```
//!
//! Shapes: `sphere`, `box`, `cylinder`, `union`, `intersection`,
//! `difference` (first minus the rest) and `transform` (a `shape` with an
//! optional `rotation` matrix or `axis` + `angle_deg`, then `translate`).
//! Kernels: `exponential`, `buildup`, `constant`, `zero` and `table` (inline
//! `x`/`phi` or a two-column CSV `path` relative to the scene file). The
//! kernel defaults to `exponential` with `sigma = 1`.

use std::fmt::Write as _;
use std::path::Path;

use chordkit_core::geometry::{Direction3, Mat3, Solid, Vec3};
use chordkit_core::multibody::ZoneSet;
use chordkit_core::{Body, Kernel};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("scene syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("body {index} ({label:?}): {message}")]
    Body {
        index: usize,
        label: String,
        message: String,
    },
    #[error("kernel: {0}")]
    Kernel(String),
    #[error("scene: {0}")]
    Scene(String),
    #[error("cannot write scene: {0}")]
    Emit(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kernel: Option<KernelSpec>,
    #[serde(default)]
    body: Vec<BodySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodySpec {
    label: String,
    shape: ShapeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ShapeSpec {
    Sphere {
        center: [f64; 3],
        radius: f64,
    },
    Box {
        lo: [f64; 3],
        hi: [f64; 3],
    },
    Cylinder {
        base: [f64; 3],
        top: [f64; 3],
        radius: f64,
    },
    Union {
        of: Vec<ShapeSpec>,
    },
    Intersection {
        of: Vec<ShapeSpec>,
    },
    Difference {
        of: Vec<ShapeSpec>,
    },
    Transform {
        shape: Box<ShapeSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rotation: Option<[[f64; 3]; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<[f64; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        angle_deg: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        translate: Option<[f64; 3]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum KernelSpec {
    Exponential {
        sigma: f64,
    },
    Buildup {
        sigma: f64,
        coefficients: Vec<f64>,
    },
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    Zero,
    Table {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phi: Option<Vec<f64>>,
    },
}

fn one() -> f64 {
    1.0
}

/// Validated zones with the kernel they are to be integrated against.
#[derive(Debug, Clone)]
pub struct Scene {
    pub zones: ZoneSet,
    pub kernel: Kernel,
}

impl Scene {
    /// SHA-256 of the canonical emitted document, in hex.
    pub fn hash(&self) -> Result<String, SceneError> {
        let text = emit_scene(&self.zones, &self.kernel)?;
        let digest = Sha256::digest(text.as_bytes());
        Ok(digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        }))
    }
}

/// Reads and parses a scene file; table kernel paths resolve against the
/// file's directory.
pub fn load_scene(path: &Path) -> Result<Scene, SceneError> {
    let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scene_in(&text, path.parent())
}

/// Parses a scene document. Table kernels given by `path` resolve against
/// the working directory.
pub fn parse_scene(text: &str) -> Result<Scene, SceneError> {
    parse_scene_in(text, None)
}

fn parse_scene_in(text: &str, base: Option<&Path>) -> Result<Scene, SceneError> {
    let doc: SceneDoc = toml::from_str(text)?;
    if doc.body.is_empty() {
        return Err(SceneError::Scene("no [[body]] entries".into()));
    }
    let mut bodies = Vec::with_capacity(doc.body.len());
    for (index, b) in doc.body.iter().enumerate() {
        let err = |message: String| SceneError::Body {
            index,
            label: b.label.clone(),
            message,
        };
        if b.label.trim().is_empty() {
            return Err(err("label is empty".into()));
        }
        if let Some(prev) = doc.body[..index].iter().position(|o| o.label == b.label) {
            return Err(err(format!("duplicate label, first used by body {prev}")));
        }
        let solid = build_shape(&b.shape, "shape").map_err(&err)?;
        bodies.push(Body::new(b.label.clone(), solid).map_err(|e| err(e.to_string()))?);
    }
    let kernel = match doc.kernel {
        None => Kernel::exponential(1.0).expect("positive sigma"),
        Some(k) => build_kernel(k, base)?,
    };
    let zones = ZoneSet::new(bodies).map_err(|e| SceneError::Scene(e.to_string()))?;
    Ok(Scene { zones, kernel })
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::from(a)
}

fn build_shape(s: &ShapeSpec, at: &str) -> Result<Solid, String> {
    let e = |x: chordkit_core::Error| format!("{at}: {x}");
    let fold = |of: &[ShapeSpec], kind: &str, op: fn(Solid, Solid) -> Solid| {
        if of.len() < 2 {
            return Err(format!("{at}: {kind} needs at least two shapes in `of`"));
        }
        let mut acc = build_shape(&of[0], &format!("{at}.of[0]"))?;
        for (i, o) in of.iter().enumerate().skip(1) {
            acc = op(acc, build_shape(o, &format!("{at}.of[{i}]"))?);
        }
        Ok(acc)
    };
    match s {
        ShapeSpec::Sphere { center, radius } => Solid::sphere(vec3(*center), *radius).map_err(e),
        ShapeSpec::Box { lo, hi } => Solid::cuboid(vec3(*lo), vec3(*hi)).map_err(e),
        ShapeSpec::Cylinder { base, top, radius } => {
            Solid::cylinder(vec3(*base), vec3(*top), *radius).map_err(e)
        }
        ShapeSpec::Union { of } => fold(of, "union", Solid::union),
        ShapeSpec::Intersection { of } => fold(of, "intersection", Solid::intersection),
        ShapeSpec::Difference { of } => fold(of, "difference", Solid::difference),
        ShapeSpec::Transform {
            shape,
            rotation,
            axis,
            angle_deg,
            translate,
        } => {
            let inner = build_shape(shape, &format!("{at}.shape"))?;
            let rotation = match (rotation, axis, angle_deg) {
                (Some(rows), None, None) => Mat3 { rows: *rows },
                (None, Some(axis), Some(deg)) => {
                    let axis = Direction3::new(vec3(*axis)).map_err(e)?;
                    Mat3::rotation(axis, deg.to_radians())
                }
                (None, None, None) => Mat3::IDENTITY,
                _ => {
                    return Err(format!(
                        "{at}: give either `rotation` or both `axis` and `angle_deg`"
                    ))
                }
            };
            let solid = inner.transformed(rotation, vec3(translate.unwrap_or([0.0; 3])));
            solid.validate().map_err(e)?;
            Ok(solid)
        }
    }
}

fn build_kernel(k: KernelSpec, base: Option<&Path>) -> Result<Kernel, SceneError> {
    let e = |x: chordkit_core::Error| SceneError::Kernel(x.to_string());
    match k {
        KernelSpec::Exponential { sigma } => Kernel::exponential(sigma).map_err(e),
        KernelSpec::Buildup {
            sigma,
            coefficients,
        } => Kernel::buildup(sigma, coefficients).map_err(e),
        KernelSpec::Constant { value } => Ok(Kernel::Constant { value }),
        KernelSpec::Zero => Ok(Kernel::zero()),
        KernelSpec::Table { path, x, phi } => {
            let (x, phi) = match (path, x, phi) {
                (Some(p), None, None) => {
                    let full = base.map_or_else(|| Path::new(&p).to_path_buf(), |b| b.join(&p));
                    read_table(&full)?
                }
                (None, Some(x), Some(phi)) => (x, phi),
                _ => {
                    return Err(SceneError::Kernel(
                        "table kernel needs either `path` or both `x` and `phi`".into(),
                    ))
                }
            };
            Kernel::table(x, phi).map_err(e)
        }
    }
}

/// Two-column CSV `x,phi` with a header row.
pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), SceneError> {
    let bad = |m: String| SceneError::Kernel(format!("{}: {m}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let (mut x, mut phi) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 2 {
            return Err(bad(format!("row {} has {} columns, expected 2", i + 1, rec.len())));
        }
        let num = |j: usize| {
            rec[j]
                .trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("row {}: {:?} is not a number", i + 1, &rec[j])))
        };
        x.push(num(0)?);
        phi.push(num(1)?);
    }
    Ok((x, phi))
}

fn shape_spec(s: &Solid) -> ShapeSpec {
    let pair = |a: &Solid, b: &Solid| vec![shape_spec(a), shape_spec(b)];
    match s {
        Solid::Sphere { center, radius } => ShapeSpec::Sphere {
            center: center.to_array(),
            radius: *radius,
        },
        Solid::Cuboid { lo, hi } => ShapeSpec::Box {
            lo: lo.to_array(),
            hi: hi.to_array(),
        },
        Solid::Cylinder { base, top, radius } => ShapeSpec::Cylinder {
            base: base.to_array(),
            top: top.to_array(),
            radius: *radius,
        },
        Solid::Union(a, b) => ShapeSpec::Union { of: pair(a, b) },
        Solid::Intersection(a, b) => ShapeSpec::Intersection { of: pair(a, b) },
        Solid::Difference(a, b) => ShapeSpec::Difference { of: pair(a, b) },
        Solid::Transformed {
            solid,
            rotation,
            translation,
        } => ShapeSpec::Transform {
            shape: Box::new(shape_spec(solid)),
            rotation: Some(rotation.rows),
            axis: None,
            angle_deg: None,
            translate: Some(translation.to_array()),
        },
    }
}

fn kernel_spec(k: &Kernel) -> Result<KernelSpec, SceneError> {
    Ok(match k {
        Kernel::Exponential { sigma } => KernelSpec::Exponential { sigma: *sigma },
        Kernel::Buildup {
            sigma,
            coefficients,
        } => KernelSpec::Buildup {
            sigma: *sigma,
            coefficients: coefficients.clone(),
        },
        Kernel::Constant { value } if *value == 0.0 => KernelSpec::Zero,
        Kernel::Constant { value } => KernelSpec::Constant { value: *value },
        Kernel::Table { x, phi } => KernelSpec::Table {
            path: None,
            x: Some(x.clone()),
            phi: Some(phi.clone()),
        },
        Kernel::Custom { name, .. } => {
            return Err(SceneError::Emit(format!(
                "custom kernel {name:?} has no document form"
            )))
        }
    })
}

/// Canonical document for a scene; [`parse_scene`] reads it back to an
/// identical zone set and kernel.
pub fn emit_scene(zones: &ZoneSet, kernel: &Kernel) -> Result<String, SceneError> {
    let doc = SceneDoc {
        kernel: Some(kernel_spec(kernel)?),
        body: zones
            .zones()
            .iter()
            .map(|b| BodySpec {
                label: b.label().to_string(),
                shape: shape_spec(b.solid()),
            })
            .collect(),
    };
    toml::to_string(&doc).map_err(|e| SceneError::Emit(e.to_string()))
}
