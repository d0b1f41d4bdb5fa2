//! Scene files, parallel execution, report files and the `chordkit`
//! command-line tool on top of [`chordkit_core`].
//!
//! - [`scene`]: TOML scene documents to and from zones plus a kernel.
//! - [`exec`]: a rayon-backed chunk executor.
//! - [`output`]: histogram, matrix, report and plot-data files.
//! - [`run`]: the batch run behind the CLI.

pub mod exec;
pub mod output;
pub mod run;
pub mod scene;

pub use chordkit_core as core;
pub use exec::ThreadPool;

pub use scene::{emit_scene, parse_scene, Scene, SceneError};
pub use run::{run, run_scene, MethodChoice, RunConfig, RunSummary};
