//! Files written by a run: histogram CSVs, zone-matrix CSVs with a
//! manifest, `reports.toml`, `comparison.csv` and plot data.

use std::fs;
use std::io;
use std::path::Path;

use chordkit_core::estimators::EstimateReport;
use chordkit_core::quasidist::{QuasiDensity, SignedHistogram};
use serde::Serialize;

pub const HIST_COLUMNS: [&str; 5] = ["bin_lo", "bin_hi", "signed_count", "density", "stderr"];
pub const PLOT_COLUMNS: [&str; 3] = ["l", "density", "stderr"];

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(io::Error::other)
}

/// Histogram CSV: a `# n_lines=..,n_chords=..,m_hat=..,seed=..` line, then
/// one row per bin.
pub fn histogram_csv(hist: &SignedHistogram, density: &QuasiDensity, seed: u64) -> io::Result<String> {
    let b = hist.binning();
    let rows = (0..b.n_bins()).map(|i| {
        vec![
            b.lo(i).to_string(),
            b.hi(i).to_string(),
            hist.counts()[i].to_string(),
            density.values[i].to_string(),
            density.stderr[i].to_string(),
        ]
    });
    let body = csv_text(&HIST_COLUMNS, rows)?;
    Ok(format!(
        "# n_lines={},n_chords={},m_hat={},seed={}\n{body}",
        hist.n_lines(),
        hist.n_chords(),
        density.m_hat,
        seed
    ))
}

/// Plot-ready `l,density,stderr` rows at bin midpoints; header only when
/// the histogram recorded nothing.
pub fn plot_csv(hist: &SignedHistogram, density: &QuasiDensity) -> io::Result<String> {
    if hist.n_lines() == 0 {
        return csv_text(&PLOT_COLUMNS, std::iter::empty());
    }
    let b = hist.binning();
    let rows = (0..b.n_bins()).map(|i| {
        vec![
            b.midpoint(i).to_string(),
            density.values[i].to_string(),
            density.stderr[i].to_string(),
        ]
    });
    csv_text(&PLOT_COLUMNS, rows)
}

/// Writes `<dir>/<name>.csv` plot files for each named histogram.
pub fn emit_plotdata(
    dir: &Path,
    histograms: &[(&str, &SignedHistogram, &QuasiDensity)],
) -> io::Result<Vec<std::path::PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for (name, h, d) in histograms {
        let p = dir.join(format!("{name}.csv"));
        fs::write(&p, plot_csv(h, d)?)?;
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub method: String,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub normalizer: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_secs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alt_normalizer: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alt_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alt_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalizer_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl From<&EstimateReport> for EstimateRecord {
    fn from(r: &EstimateReport) -> Self {
        EstimateRecord {
            method: r.method.name().to_string(),
            value: r.value,
            stderr: r.stderr,
            n_samples: r.n_samples,
            normalizer: r.normalizer.name().to_string(),
            seed: r.seed,
            runtime_secs: r.runtime_secs,
            alt_normalizer: r.alternative.map(|a| a.normalizer.name().to_string()),
            alt_value: r.alternative.map(|a| a.value.value),
            alt_stderr: r.alternative.map(|a| a.value.stderr),
            normalizer_z: r.alternative.map(|a| a.z_score()),
            note: r.note.clone(),
        }
    }
}

/// Cross integral between two zones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRecord {
    pub method: String,
    pub source: String,
    pub target: String,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunInfo {
    pub scene: String,
    pub scene_hash: String,
    pub kernel: String,
    pub seed: u64,
    pub workers: usize,
    pub n_bins: usize,
    pub l_max: f64,
    pub zones: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SceneStats {
    pub volume: f64,
    pub volume_stderr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_chord: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line_measure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line_measure_stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportsFile {
    pub run: RunInfo,
    pub stats: SceneStats,
    pub estimate: Vec<EstimateRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pair: Vec<PairRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// One row of the cross-method comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub a: EstimateRecord,
    pub b: EstimateRecord,
    pub z: f64,
}

pub fn comparison_csv(rows: &[Comparison]) -> io::Result<String> {
    csv_text(
        &[
            "method_a", "value_a", "stderr_a", "method_b", "value_b", "stderr_b", "z",
        ],
        rows.iter().map(|c| {
            vec![
                c.a.method.clone(),
                c.a.value.to_string(),
                c.a.stderr.to_string(),
                c.b.method.clone(),
                c.b.value.to_string(),
                c.b.stderr.to_string(),
                c.z.to_string(),
            ]
        }),
    )
}

/// One matrix cell file in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellEntry {
    pub source: String,
    pub target: String,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixManifest {
    pub mode: String,
    pub zones: Vec<String>,
    /// Shared normalization count: net chords (chord mode) or rays.
    pub normalization: f64,
    pub n_lines: u64,
    pub cell: Vec<CellEntry>,
}
