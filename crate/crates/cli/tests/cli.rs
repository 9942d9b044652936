use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qe-station"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const SPECTRUM: &str = r#"
[run]
wavelengths = [410.0, 300.0, 700.0]
fixed_position = [150000.0, 150000.0]
splitter_table = "cal/splitter_table.csv"

[bench]
seed = 11
"#;

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn calibrated(dir: &Path) -> PathBuf {
    let cfg = write_config(dir, "run.toml", SPECTRUM);
    let out = run(&["calibrate-splitter", "--config", p(&cfg), "--out", p(&dir.join("cal"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    cfg
}

#[test]
fn spectrum_happy_path_and_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = calibrated(dir.path());
    let res = dir.path().join("res");
    let out = run(&["spectrum", "--config", p(&cfg), "--out", p(&res)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["spectrum.csv", "summary.toml", "manifest.toml", "raw_samples.csv", "transcript.log"] {
        assert!(res.join(f).exists(), "{f}");
    }
    let text = fs::read_to_string(res.join("spectrum.csv")).unwrap();
    let lines = data_lines(&text);
    assert_eq!(lines.len(), 4);
    let nms: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(nms, ["4.1e2", "3e2", "7e2"]);
    assert!(text.contains("manifest=manifest.toml"));

    let out = run(&["analyze", p(&res)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("deviation from recorded results: 0e0"));

    let out = run(&["compare", p(&res.join("spectrum.csv")), p(&res.join("spectrum.csv")), "--out", p(&res)]);
    assert!(out.status.success());
    assert_eq!(data_lines(&fs::read_to_string(res.join("compare.dat")).unwrap()).len(), 4);
}

#[test]
fn identical_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = calibrated(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert!(run(&["spectrum", "--config", p(&cfg), "--out", p(out)]).status.success());
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
    let c = dir.path().join("c");
    assert!(run(&["spectrum", "--config", p(&cfg), "--out", p(&c), "--seed", "12"]).status.success());
    assert_ne!(fs::read(a.join("spectrum.csv")).unwrap(), fs::read(c.join("spectrum.csv")).unwrap());
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["spectrum", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", "[run]\nwavelengths = [410.0]\nspeed = 3\n");
    let out = run(&["spectrum", "--config", p(&bad), "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[usage]"));
    let missing = dir.path().join("none.toml");
    assert_eq!(run(&["spectrum", "--config", p(&missing), "--out", p(dir.path())]).status.code(), Some(2));

    // no splitter table is an error, not a silent unit ratio
    let cfg = write_config(dir.path(), "nocal.toml", "[run]\nwavelengths = [410.0]\nfixed_position = [150000.0, 150000.0]\n");
    assert_eq!(run(&["spectrum", "--config", p(&cfg), "--out", p(dir.path())]).status.code(), Some(2));
}

#[test]
fn unreachable_instruments_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = calibrated(dir.path());
    let ep = "picoammeter=127.0.0.1:1,monochromator=127.0.0.1:1,powermeter=127.0.0.1:1,stage=127.0.0.1:1";
    let out = run(&["spectrum", "--config", p(&cfg), "--out", p(&dir.path().join("x")), "--endpoints", ep]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[io]"));
}

#[test]
fn unsafe_order_is_refused_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = calibrated(dir.path());
    let text = fs::read_to_string(&cfg).unwrap().replace(
        "[bench]",
        "filter_cutons = [320.0, 800.0, 850.0, 900.0]\n\n[bench]",
    );
    let risky = write_config(dir.path(), "risky.toml", &text);
    let out = run(&["spectrum", "--config", p(&risky), "--out", p(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("r/spectrum.csv").exists());
    // forcing a slot is an explicit override of the check
    let out = run(&["spectrum", "--config", p(&risky), "--out", p(&dir.path().join("f")), "--force-filter", "0"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn scan_renders_planted_cross() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scan.toml",
        r#"
[run]
wavelengths = [410.0]
splitter_table = "cal/splitter_table.csv"

[run.grid]
origin_x_um = 146500.0
origin_z_um = 146500.0
step_um = 500.0
nx = 15
nz = 15

[calibration]
method = "single"

[bench]
seed = 3

[bench.noise]
white = false
systematic = false

[[bench.cathode.structures]]
shape = "cross"
x_um = 0.0
z_um = 0.0
half_width_um = 750.0
multiplier = 0.5
"#,
    );
    assert!(run(&["calibrate-splitter", "--config", p(&cfg), "--out", p(&dir.path().join("cal"))]).status.success());
    let res = dir.path().join("scan");
    let out = run(&["scan2d", "--config", p(&cfg), "--out", p(&res)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(res.join("map_matrix.txt")).unwrap();
    let m: Vec<Vec<f64>> = data_lines(&text)
        .iter()
        .map(|l| l.split(' ').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(m.len(), 15);
    let mut all: Vec<f64> = m.iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    let median = all[all.len() / 2];
    for (iz, row) in m.iter().enumerate() {
        for (ix, &q) in row.iter().enumerate() {
            let on_cross = (6..=8).contains(&ix) || (6..=8).contains(&iz);
            assert_eq!(q < 0.75 * median, on_cross, "pixel ({ix}, {iz}) = {q}");
        }
    }
    let pgm = fs::read_to_string(res.join("map.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n"));
    assert_eq!(data_lines(&fs::read_to_string(res.join("map.csv")).unwrap()).len(), 226);
    assert!(run(&["analyze", p(&res)]).status.success());
}

#[test]
fn simulate_serves_a_live_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = calibrated(dir.path());
    let live = write_config(
        dir.path(),
        "live.toml",
        &fs::read_to_string(&cfg).unwrap().replace("seed = 11", "seed = 11\ntime_scale = 100.0"),
    );
    let any = "picoammeter=127.0.0.1:0,monochromator=127.0.0.1:0,powermeter=127.0.0.1:0,stage=127.0.0.1:0";
    let mut server = bin()
        .args(["simulate", "--config", p(&live), "--endpoints", any, "--duration", "30"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(server.stdout.take().unwrap()).lines();
    let endpoints: Vec<String> = (0..4)
        .map(|_| {
            let l = lines.next().unwrap().unwrap();
            let (kind, addr) = l.split_once(' ').unwrap();
            format!("{kind}={addr}")
        })
        .collect();
    let ep = endpoints.join(",");

    let res = dir.path().join("live");
    let out = run(&["spectrum", "--config", p(&live), "--out", p(&res), "--endpoints", &ep]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(res.join("spectrum.csv")).unwrap();
    assert_eq!(data_lines(&text).len(), 4);
    assert!(text.contains("-live"));

    // the same endpoints cannot be bound twice
    let out = run(&["simulate", "--config", p(&live), "--endpoints", &ep, "--duration", "0"]);
    assert_eq!(out.status.code(), Some(3));
    server.kill().unwrap();
    server.wait().unwrap();
}
