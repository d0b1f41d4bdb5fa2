use std::path::PathBuf;
use std::process::ExitCode;

use chordkit::run::{MethodChoice, RunConfig, DISCORDANCE_Z};
use clap::Parser;

/// Monte Carlo point-kernel integrals over CSG scenes from signed chord,
/// ray and distance distributions.
#[derive(Debug, Parser)]
#[command(name = "chordkit", version)]
struct Args {
    /// Scene file (TOML).
    #[arg(long)]
    scene: PathBuf,
    /// Comma-separated subset of chord, ray, dd, oracle (or `all`).
    #[arg(long, default_value = "all")]
    methods: String,
    /// Lines for the chord method.
    #[arg(long, default_value_t = 1_000_000)]
    lines: u64,
    /// Rays for the ray method.
    #[arg(long, default_value_t = 1_000_000)]
    rays: u64,
    /// Point pairs for dd and samples for the oracle.
    #[arg(long, default_value_t = 1_000_000)]
    pairs: u64,
    /// Histogram bins.
    #[arg(long, default_value_t = chordkit_core::runner::DEFAULT_BINS)]
    bins: usize,
    /// Upper histogram edge; defaults to just above the scene diameter.
    #[arg(long)]
    lmax: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Probes for Monte Carlo volumes of composite bodies.
    #[arg(long, default_value_t = 1_000_000)]
    volume_points: u64,
    /// Output directory.
    #[arg(long, default_value = "chordkit-out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let methods = match MethodChoice::parse_list(&args.methods) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cfg = RunConfig {
        scene: args.scene,
        methods,
        n_lines: args.lines,
        n_rays: args.rays,
        n_pairs: args.pairs,
        n_bins: args.bins,
        l_max: args.lmax,
        seed: args.seed,
        workers: args.workers,
        out: args.out,
        volume_points: args.volume_points,
    };
    let summary = match chordkit::run(&cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    for r in &summary.estimates {
        println!(
            "{:<16} {:>14.8} ± {:<12.3e} ({} samples)",
            r.method.name(),
            r.value,
            r.stderr,
            r.n_samples
        );
    }
    for n in &summary.notes {
        println!("note: {n}");
    }
    println!("outputs in {}", cfg.out.display());
    if summary.is_discordant() {
        eprintln!(
            "methods disagree: max |z| = {:.2} > {DISCORDANCE_Z}",
            summary.max_abs_z()
        );
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
