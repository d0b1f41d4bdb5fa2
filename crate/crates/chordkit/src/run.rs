//! The batch run behind the CLI.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use chordkit_core::estimators::{self, EstimateReport};
use chordkit_core::multibody::{self, HistogramMatrix, MatrixMode, ZonedRun};
use chordkit_core::quasidist::{self, Binning, SignedHistogram};
use chordkit_core::runner::{self, Batched, RunOptions, DEFAULT_BINS, DEFAULT_CHUNKS};
use chordkit_core::sampling;
use chordkit_core::stats::Measured;
use chordkit_core::Kernel;

use crate::exec::ThreadPool;
use crate::output::{
    self, CellEntry, Comparison, EstimateRecord, MatrixManifest, PairRecord, ReportsFile, RunInfo,
    SceneStats,
};
use crate::scene::{load_scene, Scene};

/// Cross-method |z| above which a run is flagged as discordant.
pub const DISCORDANCE_Z: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MethodChoice {
    Chord,
    Ray,
    Dd,
    Oracle,
}

impl MethodChoice {
    pub const ALL: [MethodChoice; 4] = [
        MethodChoice::Chord,
        MethodChoice::Ray,
        MethodChoice::Dd,
        MethodChoice::Oracle,
    ];

    pub fn parse_list(s: &str) -> Result<Vec<MethodChoice>> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let m = match item {
                "chord" => MethodChoice::Chord,
                "ray" => MethodChoice::Ray,
                "dd" => MethodChoice::Dd,
                "oracle" => MethodChoice::Oracle,
                "all" => {
                    out.extend(MethodChoice::ALL);
                    continue;
                }
                other => bail!("unknown method {other:?}; expected chord, ray, dd, oracle or all"),
            };
            out.push(m);
        }
        out.sort();
        out.dedup();
        if out.is_empty() {
            bail!("no methods selected");
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scene: PathBuf,
    pub methods: Vec<MethodChoice>,
    pub n_lines: u64,
    pub n_rays: u64,
    /// Point pairs for `dd` and samples for the oracle.
    pub n_pairs: u64,
    pub n_bins: usize,
    pub l_max: Option<f64>,
    pub seed: u64,
    /// 0 uses every available core.
    pub workers: usize,
    pub out: PathBuf,
    pub volume_points: u64,
}

impl RunConfig {
    pub fn new(scene: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            scene: scene.into(),
            methods: MethodChoice::ALL.to_vec(),
            n_lines: 1_000_000,
            n_rays: 1_000_000,
            n_pairs: 1_000_000,
            n_bins: DEFAULT_BINS,
            l_max: None,
            seed: 0,
            workers: 0,
            out: out.into(),
            volume_points: 1_000_000,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("lines", self.n_lines),
            ("rays", self.n_rays),
            ("pairs", self.n_pairs),
            ("volume points", self.volume_points),
        ] {
            if n == 0 {
                bail!("number of {name} must be at least 1");
            }
        }
        if self.n_bins < 2 {
            bail!("need at least 2 bins, got {}", self.n_bins);
        }
        Ok(())
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            n_chunks: DEFAULT_CHUNKS,
            n_bins: self.n_bins,
            l_max: self.l_max,
            volume_points: self.volume_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub estimates: Vec<EstimateReport>,
    pub comparisons: Vec<Comparison>,
    pub pairs: Vec<PairRecord>,
    pub stats: SceneStats,
    pub notes: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn max_abs_z(&self) -> f64 {
        self.comparisons.iter().map(|c| c.z.abs()).fold(0.0, f64::max)
    }

    /// Whether any two methods disagree by more than [`DISCORDANCE_Z`].
    pub fn is_discordant(&self) -> bool {
        self.max_abs_z() > DISCORDANCE_Z
    }
}

/// Loads the scene named in `cfg` and runs it.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let scene = load_scene(&cfg.scene)?;
    run_scene(&scene, cfg)
}

fn kernel_label(k: &Kernel) -> String {
    match k {
        Kernel::Exponential { sigma } => format!("exponential(sigma={sigma})"),
        Kernel::Buildup {
            sigma,
            coefficients,
        } => format!("buildup(sigma={sigma}, coefficients={coefficients:?})"),
        Kernel::Constant { value } => format!("constant({value})"),
        Kernel::Table { x, .. } => format!("table({} nodes)", x.len()),
        Kernel::Custom { name, .. } => format!("custom({name})"),
    }
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, rel: &str, text: &str) -> Result<()> {
        let p = self.dir.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        self.files.push(p);
        Ok(())
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, t.elapsed().as_secs_f64()))
}

/// Runs an already parsed scene.
pub fn run_scene(scene: &Scene, cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let pool = ThreadPool::new(cfg.workers)?;
    let opts = cfg.options();
    let zones = &scene.zones;
    let kernel = &scene.kernel;
    let union = zones.union_body()?;
    let bound = zones.bounding_sphere();
    let binning = opts.binning(&bound)?;
    let zoned = zones.len() > 1 && zones.is_disjoint();
    let mut notes = Vec::new();
    if zones.len() > 1 && !zones.is_disjoint() {
        let labels: Vec<String> = zones
            .overlapping_pairs()
            .iter()
            .map(|&(i, j)| format!("{}/{}", zones.zones()[i].label(), zones.zones()[j].label()))
            .collect();
        notes.push(format!(
            "zones overlap ({}); zone matrix skipped, estimates use the CSG union",
            labels.join(", ")
        ));
    }

    let volume = if zoned {
        zones
            .zones()
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let seed = cfg.seed ^ sampling::stream_id("zone-volume", i as u64);
                runner::volume(z, cfg.volume_points, seed, DEFAULT_CHUNKS, &pool)
            })
            .fold(Measured::exact(0.0), |a, b| {
                Measured::new(a.value + b.value, a.stderr.hypot(b.stderr))
            })
    } else {
        runner::volume(&union, cfg.volume_points, cfg.seed, DEFAULT_CHUNKS, &pool)
    };
    let surface = union.analytic_surface_area();
    let mut stats = SceneStats {
        volume: volume.value,
        volume_stderr: volume.stderr,
        surface,
        ..SceneStats::default()
    };

    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut w = Writer {
        dir: &cfg.out,
        files: Vec::new(),
    };
    let mut estimates = Vec::new();
    let mut pairs = Vec::new();
    let mut plots: Vec<(&str, SignedHistogram, quasidist::QuasiDensity)> = Vec::new();
    let labels: Vec<String> = zones.zones().iter().map(|z| z.label().to_string()).collect();

    for &m in &cfg.methods {
        match m {
            MethodChoice::Chord => {
                let ((union_run, matrix), secs) = timed(|| {
                    if zoned {
                        let ZonedRun { union, matrix } = multibody::sample_zoned_chords(
                            zones, binning, cfg.n_lines, cfg.seed, DEFAULT_CHUNKS, &pool,
                        )?;
                        Ok((union, Some(matrix)))
                    } else {
                        let r = runner::sample_chords(
                            &union, &bound, binning, cfg.n_lines, cfg.seed, DEFAULT_CHUNKS, &pool,
                        )?;
                        Ok((r, None))
                    }
                })?;
                let h = &union_run.merged;
                if h.n_chords() <= 0 {
                    notes.push("chord: no line crossed the scene".into());
                    continue;
                }
                let mut r = estimators::chord_estimate(&union_run, kernel, volume, surface)?;
                r.runtime_secs = Some(secs);
                let d = h.normalize_chord()?;
                stats.m_hat = Some(d.m_hat);
                stats.mean_chord = Some(quasidist::mean_chord(&d));
                let w_b = sampling::line_measure_from_hits(h.n_lines(), union_run.n_sampled, bound.radius);
                stats.line_measure = Some(w_b.value);
                stats.line_measure_stderr = Some(w_b.stderr);
                w.write("chord.hist.csv", &output::histogram_csv(h, &d, cfg.seed)?)?;
                if let Some(mx) = &matrix {
                    write_matrix(&mut w, "chord", mx, &labels, binning, cfg.seed)?;
                    for (s, t) in mx.merged.cell_pairs() {
                        let a = multibody::pair_integral_chord(mx, kernel, s, t, volume)?;
                        pairs.push(pair_record("chord", &labels, s, t, &a));
                    }
                }
                plots.push(("chord", h.clone(), d));
                estimates.push(r);
            }
            MethodChoice::Ray => {
                let ((union_run, matrix), secs) = timed(|| {
                    if zoned {
                        let ZonedRun { union, matrix } = multibody::sample_zoned_rays(
                            zones, binning, cfg.n_rays, cfg.seed, DEFAULT_CHUNKS, &pool,
                        )?;
                        Ok((union, Some(matrix)))
                    } else {
                        let r = runner::sample_rays(
                            &union, binning, cfg.n_rays, cfg.seed, DEFAULT_CHUNKS, &pool,
                        )?;
                        Ok((r, None))
                    }
                })?;
                let mut r = estimators::ray_estimate(&union_run, kernel, volume)?;
                r.runtime_secs = Some(secs);
                let h = &union_run.merged;
                let d = h.normalize_ray()?;
                w.write("ray.hist.csv", &output::histogram_csv(h, &d, cfg.seed)?)?;
                if let Some(mx) = &matrix {
                    write_matrix(&mut w, "ray", mx, &labels, binning, cfg.seed)?;
                    for (s, t) in mx.merged.cell_pairs() {
                        let a = multibody::pair_integral_ray(mx, kernel, s, t, volume)?;
                        pairs.push(pair_record("ray", &labels, s, t, &a));
                    }
                }
                plots.push(("ray", h.clone(), d));
                estimates.push(r);
            }
            MethodChoice::Dd => {
                let (run, secs) = timed(|| {
                    Ok(runner::sample_distances(
                        &union, &union, binning, cfg.n_pairs, cfg.seed, DEFAULT_CHUNKS, &pool,
                    )?)
                })?;
                let vv = estimators::volume_product(volume, volume);
                let mut r = estimators::dd_estimate(&run, kernel, vv)?;
                r.runtime_secs = Some(secs);
                let h = &run.merged;
                let d = h.normalize_ray()?;
                w.write("dd.hist.csv", &output::histogram_csv(h, &d, cfg.seed)?)?;
                plots.push(("dd", h.clone(), d));
                estimates.push(r);
            }
            MethodChoice::Oracle => {
                let (mut r, secs) = timed(|| {
                    Ok(estimators::oracle_radial(
                        &union,
                        &union,
                        kernel,
                        binning.l_max(),
                        cfg.n_pairs,
                        cfg.seed,
                        DEFAULT_CHUNKS,
                        &pool,
                        volume,
                    )?)
                })?;
                r.runtime_secs = Some(secs);
                estimates.push(r);
            }
        }
    }

    let records: Vec<EstimateRecord> = estimates.iter().map(EstimateRecord::from).collect();
    let mut comparisons = Vec::new();
    for i in 0..estimates.len() {
        for j in i + 1..estimates.len() {
            comparisons.push(Comparison {
                a: records[i].clone(),
                b: records[j].clone(),
                z: estimates[i].z_score(&estimates[j]),
            });
        }
    }
    w.write("comparison.csv", &output::comparison_csv(&comparisons)?)?;

    let plot_refs: Vec<(&str, &SignedHistogram, &quasidist::QuasiDensity)> =
        plots.iter().map(|(n, h, d)| (*n, h, d)).collect();
    w.files
        .extend(output::emit_plotdata(&cfg.out.join("plot"), &plot_refs)?);

    let reports = ReportsFile {
        run: RunInfo {
            scene: cfg.scene.display().to_string(),
            scene_hash: scene.hash()?,
            kernel: kernel_label(kernel),
            seed: cfg.seed,
            workers: pool.workers(),
            n_bins: binning.n_bins(),
            l_max: binning.l_max(),
            zones: labels.clone(),
        },
        stats: stats.clone(),
        estimate: records,
        pair: pairs.clone(),
        notes: notes.clone(),
    };
    w.write("reports.toml", &toml::to_string(&reports)?)?;

    Ok(RunSummary {
        estimates,
        comparisons,
        pairs,
        stats,
        notes,
        files: w.files,
    })
}

fn pair_record(method: &str, labels: &[String], s: usize, t: usize, r: &EstimateReport) -> PairRecord {
    PairRecord {
        method: method.into(),
        source: labels[s].clone(),
        target: labels[t].clone(),
        value: r.value,
        stderr: r.stderr,
    }
}

fn write_matrix(
    w: &mut Writer<'_>,
    mode: &str,
    run: &Batched<HistogramMatrix>,
    labels: &[String],
    binning: Binning,
    seed: u64,
) -> Result<()> {
    let mx = &run.merged;
    let norm = match mx.mode() {
        MatrixMode::Chord => mx.n_chords() as f64,
        MatrixMode::Ray => mx.n_lines() as f64,
    };
    let mut cells = Vec::new();
    for (s, t) in mx.cell_pairs() {
        let file = format!("matrix/{mode}_{s}_{t}.hist.csv");
        let h = mx.cell(s, t);
        let d = h.normalized(norm.max(1.0), mx.n_lines());
        w.write(&file, &output::histogram_csv(h, &d, seed)?)?;
        cells.push(CellEntry {
            source: labels[s].clone(),
            target: labels[t].clone(),
            file,
        });
    }
    let manifest = MatrixManifest {
        mode: mode.into(),
        zones: labels.to_vec(),
        normalization: norm,
        n_lines: mx.n_lines(),
        cell: cells,
    };
    debug_assert_eq!(binning, *mx.binning());
    w.write(&format!("matrix/{mode}_manifest.toml"), &toml::to_string(&manifest)?)
}
