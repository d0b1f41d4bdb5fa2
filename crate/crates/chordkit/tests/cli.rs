use std::fs;
use std::path::Path;
use std::process::Command;

const SPHERE: &str = "[kernel]\ntype = \"exponential\"\nsigma = 1.0\n\
[[body]]\nlabel = \"sphere\"\nshape = { type = \"sphere\", center = [0.0, 0.0, 0.0], radius = 1.0 }\n";

const TWO_LOBE: &str = "[[body]]\nlabel = \"left\"\nshape = { type = \"sphere\", center = [0.0, 0.0, 0.0], radius = 1.0 }\n\
[[body]]\nlabel = \"right\"\nshape = { type = \"sphere\", center = [4.0, 0.0, 0.0], radius = 1.0 }\n";

fn chordkit(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_chordkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_scene(dir: &Path, text: &str) -> String {
    let p = dir.join("scene.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn chord_and_oracle_on_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), SPHERE);
    let out = dir.path().join("out");
    let o = chordkit(&[
        "--scene", &scene, "--methods", "chord,oracle", "--lines", "200000", "--pairs", "200000",
        "--seed", "5", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let reports = fs::read_to_string(out.join("reports.toml")).unwrap();
    assert_eq!(reports.matches("[[estimate]]").count(), 2);
    assert!(reports.contains("scene_hash"));
    let cmp = fs::read_to_string(out.join("comparison.csv")).unwrap();
    let rows: Vec<&str> = cmp.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("chord,") && rows[1].contains("oracle_radial"));
    let z: f64 = rows[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!(z.abs() < 4.0);
}

#[test]
fn fixed_seed_gives_identical_csvs_for_any_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), TWO_LOBE);
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let o = chordkit(&[
            "--scene", &scene, "--methods", "chord,ray,dd", "--lines", "50000", "--rays", "50000",
            "--pairs", "50000", "--bins", "64", "--seed", "11", "--workers", workers,
            "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "3");
    let files = [
        "chord.hist.csv",
        "ray.hist.csv",
        "dd.hist.csv",
        "comparison.csv",
        "matrix/chord_0_1.hist.csv",
        "matrix/ray_1_0.hist.csv",
        "matrix/chord_manifest.toml",
        "plot/chord.csv",
    ];
    for f in files {
        let fa = fs::read(a.join(f)).unwrap();
        assert_eq!(fa, fs::read(b.join(f)).unwrap(), "{f} differs between runs");
        assert_eq!(fa, fs::read(c.join(f)).unwrap(), "{f} differs across worker counts");
    }
}

#[test]
fn nonconvex_scene_plots_negative_density() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), TWO_LOBE);
    let out = dir.path().join("out");
    let o = chordkit(&[
        "--scene", &scene, "--methods", "chord", "--lines", "200000", "--bins", "64",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let plot = fs::read_to_string(out.join("plot/chord.csv")).unwrap();
    let negative = plot
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() < 0.0)
        .count();
    assert!(negative > 0);
    let hist = fs::read_to_string(out.join("chord.hist.csv")).unwrap();
    assert!(hist.starts_with("# n_lines="));
    assert_eq!(hist.lines().nth(1).unwrap(), "bin_lo,bin_hi,signed_count,density,stderr");
}

#[test]
fn sphere_density_peaks_at_diameter() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), SPHERE);
    let out = dir.path().join("out");
    let o = chordkit(&[
        "--scene", &scene, "--methods", "chord", "--lines", "200000", "--bins", "32",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let plot = fs::read_to_string(out.join("plot/chord.csv")).unwrap();
    let d: Vec<f64> = plot
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let argmax = d.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert_eq!(argmax, d.len() - 1);
    assert!(d.iter().all(|&v| v >= 0.0));
}

#[test]
fn missing_scene_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let o = chordkit(&[
        "--scene", dir.path().join("nope.toml").to_str().unwrap(),
        "--out", dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.toml"));
}

#[test]
fn bad_arguments_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), SPHERE);
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    for extra in [
        &["--methods", "chord,magic"][..],
        &["--bins", "1"],
        &["--lines", "0"],
        &["--lmax", "1.0"],
    ] {
        let mut args = vec!["--scene", scene.as_str(), "--out", out];
        args.extend_from_slice(extra);
        let o = chordkit(&args);
        assert_eq!(o.status.code(), Some(2), "{extra:?}");
    }
}

#[test]
fn overlapping_zones_skip_matrix_with_note() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(
        dir.path(),
        "[[body]]\nlabel = \"a\"\nshape = { type = \"sphere\", center = [0.0, 0.0, 0.0], radius = 1.0 }\n\
         [[body]]\nlabel = \"b\"\nshape = { type = \"sphere\", center = [1.0, 0.0, 0.0], radius = 1.0 }\n",
    );
    let out = dir.path().join("out");
    let o = chordkit(&[
        "--scene", &scene, "--methods", "chord", "--lines", "20000", "--volume-points", "20000",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.join("matrix").exists());
    let reports = fs::read_to_string(out.join("reports.toml")).unwrap();
    assert!(reports.contains("zones overlap"));
}
