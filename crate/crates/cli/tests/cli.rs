use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pcfilter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcfilter"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = pcfilter(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn shape_noise_filter_metrics_round() {
    let dir = tempfile::tempdir().unwrap();
    let (clean, noisy, out, report) = (
        dir.path().join("cube.xyz"),
        dir.path().join("noisy.ply"),
        dir.path().join("out.ply"),
        dir.path().join("report.txt"),
    );
    ok(&["shape", "--kind", "cube", "--n", "10", "--output", p(&clean)]);
    assert_eq!(
        fs::read_to_string(&clean)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .count(),
        600
    );

    ok(&[
        "noise",
        "--input",
        p(&clean),
        "--output",
        p(&noisy),
        "--level",
        "0.005",
        "--seed",
        "9",
    ]);
    let text = fs::read_to_string(&noisy).unwrap();
    assert!(text.contains("comment rng=ChaCha8Rng(seed_from_u64)"));
    assert!(text.contains("comment seed=9"));

    ok(&[
        "filter",
        "--input",
        p(&noisy),
        "--output",
        p(&out),
        "--k",
        "20",
        "--mu",
        "0.2",
        "--iters",
        "3",
        "--h",
        "auto:2",
        "--normals",
        "pca",
        "--pca-k",
        "12",
        "--bilateral-sigma-s",
        "auto:1.5",
        "--bilateral-sigma-r",
        "0.4",
        "--bilateral-iters",
        "2",
        "--wj-variant",
        "per-neighbor",
        "--gt",
        p(&clean),
        "--report",
        p(&report),
        "--mse-variant",
        "printed",
    ]);
    let r = fs::read_to_string(&report).unwrap();
    for key in [
        "points=600",
        "k=20",
        "mu=0.2",
        "iterations=3",
        "h_mode=auto:2",
        "chamfer=",
        "input_mse=",
    ] {
        assert!(r.contains(key), "{key} missing from\n{r}");
    }
    let diag = fs::read_to_string(dir.path().join("out.ply.diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().count(), 4);

    let m = ok(&["metrics", "--input", p(&out), "--gt", p(&clean)]);
    assert!(m.starts_with("chamfer="));
}

#[test]
fn filter_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.xyz");
    ok(&[
        "shape",
        "--kind",
        "clustered-plane",
        "--seed",
        "4",
        "--output",
        p(&input),
    ]);
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "filter",
            "--input",
            p(&input),
            "--output",
            p(&out),
            "--normals",
            "file",
            "--iters",
            "2",
        ]);
        fs::read(out).unwrap()
    };
    assert_eq!(run("a.xyz"), run("b.xyz"));
}

#[test]
fn normals_subcommand_writes_unit_normals() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("s.xyz"), dir.path().join("n.xyz"));
    ok(&["shape", "--kind", "sphere", "--n", "8", "--output", p(&input)]);
    let noisy = dir.path().join("noisy.xyz");
    ok(&["noise", "--input", p(&input), "--output", p(&noisy), "--level", "0.002"]);
    let stdout = ok(&["normals", "--input", p(&noisy), "--output", p(&out), "--format", "xyz"]);
    assert!(stdout.contains("normal_components=1"));
    for line in fs::read_to_string(&out).unwrap().lines() {
        let v: Vec<f64> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
        assert_eq!(v.len(), 6);
        assert!(((v[3] * v[3] + v[4] * v[4] + v[5] * v[5]).sqrt() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn failures_exit_nonzero_with_stage_tag() {
    let dir = tempfile::tempdir().unwrap();
    let missing = pcfilter(&[
        "filter",
        "--input",
        "/no/such.xyz",
        "--output",
        p(&dir.path().join("o.xyz")),
    ]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("[load]"));

    let small = dir.path().join("small.xyz");
    fs::write(&small, "0 0 0\n1 0 0\n0 1 0\n1 1 0\n0.5 0.5 0.1\n").unwrap();
    let too_big_k = pcfilter(&[
        "filter",
        "--input",
        p(&small),
        "--output",
        p(&dir.path().join("o.xyz")),
        "--pca-k",
        "3",
    ]);
    assert!(!too_big_k.status.success());
    assert!(String::from_utf8_lossy(&too_big_k.stderr).contains("[filter] k exceeds cloud size"));

    let no_normals = pcfilter(&[
        "normals",
        "--input",
        p(&small),
        "--output",
        p(&dir.path().join("o.xyz")),
        "--normals",
        "file",
    ]);
    assert!(String::from_utf8_lossy(&no_normals.stderr).contains("[normals]"));

    let bad_shape = pcfilter(&["shape", "--kind", "torus", "--output", p(&dir.path().join("t.xyz"))]);
    assert!(!bad_shape.status.success());
    assert!(String::from_utf8_lossy(&bad_shape.stderr).contains("[generate]"));

    let bad_flag = pcfilter(&["filter", "--input", p(&small), "--output", "o.xyz", "--h", "auto:x"]);
    assert!(!bad_flag.status.success());
}
