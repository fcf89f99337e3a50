use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_locmirror"));
    cmd.env_remove("LOCMIRROR_OUT_DIR");
    cmd
}

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn run_in(out: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(out)
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const WRAPPING: &str = r#"
[grid]
n = 256
dx = 0.5

[[packets]]
name = "edge"
type = "gaussian"
channel = "+1/V"
center = 50.0
width = 2.0
carrier = 1.0

[[schedule]]
action = "free"
duration = 30.0
"#;

#[test]
fn run_writes_ledger_states_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = bundled("reflect_pi_over_2.toml");
    let o = run_in(
        dir.path(),
        &["run", "--scenario", scenario.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in [
        "energy_ledger.csv",
        "state_initial.bin",
        "state_reflected.bin",
        "profiles_reflected.csv",
        "spectrum.csv",
        "discrepancy.csv",
    ] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let ledger = fs::read_to_string(dir.path().join("energy_ledger.csv")).unwrap();
    let last = ledger.lines().last().unwrap();
    let frac: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!((frac - 1.0).abs() < 1e-8, "{last}");
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = bundled("two_sided_incidence.toml");
    let o = bin()
        .env("LOCMIRROR_OUT_DIR", dir.path())
        .args(["run", "--scenario", scenario.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("state_outgoing.bin").exists());
}

#[test]
fn schema_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(
        &path,
        WRAPPING.replace("duration = 30.0", "duration = -1.0"),
    )
    .unwrap();
    let o = run_in(dir.path(), &["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn warnings_fail_only_in_strict_mode() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wrap.toml");
    fs::write(&path, WRAPPING).unwrap();
    let relaxed = run_in(dir.path(), &["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(relaxed.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&relaxed.stderr);
    let warning: serde_json::Value = serde_json::from_str(stderr.lines().next().unwrap()).unwrap();
    assert_eq!(warning["kind"], "wrap-around");
    let strict = run_in(
        dir.path(),
        &["--strict", "run", "--scenario", path.to_str().unwrap()],
    );
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn check_passes_on_bundled_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["reflect_pi_over_2.toml", "two_sided_incidence.toml"] {
        let o = run_in(
            dir.path(),
            &["check", "--scenario", bundled(name).to_str().unwrap()],
        );
        let text = stdout(&o);
        assert!(o.status.success(), "{name}\n{text}");
        assert!(text.contains("scattering-vs-dynamics"));
        assert!(!text.contains("FAIL"));
    }
}

#[test]
fn state_tools_compose() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let scenario = bundled("reflect_pi_over_2.toml");
    let sc = scenario.to_str().unwrap();
    assert!(run_in(d, &["run", "--scenario", sc]).status.success());

    // A separable kernel file matching the scenario's bump.
    let grid = locmirror::make_grid(1024, 0.5).unwrap();
    let kernel = locmirror::MirrorKernel::smooth_bump(
        &grid,
        4,
        std::f64::consts::FRAC_PI_2,
        &locmirror::natural_units(),
    )
    .unwrap();
    let mut w = fs::File::create(d.join("bump.csv")).unwrap();
    locmirror::io::write_separable_kernel_csv(&kernel, &grid, &mut w).unwrap();
    drop(w);

    let spectrum = run_in(
        d,
        &["spectrum", "--kernel", d.join("bump.csv").to_str().unwrap()],
    );
    assert!(
        spectrum.status.success(),
        "{}",
        String::from_utf8_lossy(&spectrum.stderr)
    );
    assert_eq!(stdout(&spectrum).lines().count(), 1025);

    let initial = d.join("state_initial.bin");
    let ok = |o: Output| assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    ok(run_in(
        d,
        &[
            "scatter",
            "--state",
            initial.to_str().unwrap(),
            "--kernel",
            "bump.csv",
            "--output",
            "scattered.bin",
        ],
    ));
    ok(run_in(
        d,
        &[
            "propagate",
            "--state",
            "scattered.bin",
            "--time",
            "120",
            "--output",
            "moved.ndjson",
        ],
    ));
    ok(run_in(
        d,
        &[
            "mirror-evolve",
            "--state",
            initial.to_str().unwrap(),
            "--kernel",
            "bump.csv",
            "--t-start",
            "0",
            "--t-end",
            "120",
            "--output",
            "evolved.bin",
        ],
    ));
    ok(run_in(
        d,
        &[
            "observables",
            "--state",
            "evolved.bin",
            "--output",
            "profiles.csv",
        ],
    ));

    let read = |name: &str| {
        let mut r = std::io::BufReader::new(fs::File::open(d.join(name)).unwrap());
        locmirror::io::read_state_binary(&mut r).unwrap()
    };
    let scattered = locmirror::to_momentum(&read("scattered.bin")).unwrap();
    let evolved = locmirror::to_momentum(&read("evolved.bin")).unwrap();
    let flat = locmirror::KernelSpec::flat();
    let gap = locmirror::to_position(&scattered, &flat)
        .unwrap()
        .max_abs_diff(&locmirror::to_position(&evolved, &flat).unwrap())
        .unwrap();
    assert!(gap < 1e-6, "{gap}");

    let moved = fs::read_to_string(d.join("moved.ndjson")).unwrap();
    assert!(moved.lines().count() > 1);
    let profiles = fs::read_to_string(d.join("profiles.csv")).unwrap();
    assert!(profiles.lines().count() > 1024);
}

#[test]
fn runs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sc = bundled("two_sided_incidence.toml");
    assert!(
        run_in(a.path(), &["run", "--scenario", sc.to_str().unwrap()])
            .status
            .success()
    );
    assert!(run_in(
        b.path(),
        &["--threads", "4", "run", "--scenario", sc.to_str().unwrap()]
    )
    .status
    .success());
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        assert_eq!(
            fs::read(a.path().join(&name)).unwrap(),
            fs::read(b.path().join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let o = bin().args(["propagate", "--time", "1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dense_kernel_equivalence_is_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let grid = locmirror::make_grid(512, 0.5).unwrap();
    let kernel = locmirror::MirrorKernel::dense_fn(&grid, 1e-12, |x, xp| {
        0.4 * (-(x * x + xp * xp) / 2.0).exp() * (1.0 + 0.3 * x)
    })
    .unwrap();
    let mut w = fs::File::create(d.join("dense.lmk")).unwrap();
    locmirror::io::write_dense_kernel(&kernel, &mut w).unwrap();
    drop(w);
    let scenario = r#"
[grid]
n = 512
dx = 0.5

[[packets]]
name = "probe"
type = "gaussian"
channel = "+1/H"
center = -40.0
width = 3.0
carrier = 1.0

[mirror]
type = "file"
path = "dense.lmk"

[[schedule]]
action = "scatter"
duration = 80.0
"#;
    fs::write(d.join("dense.toml"), scenario).unwrap();
    let o = run_in(d, &["check", "--scenario", "dense.toml"]);
    let text = stdout(&o);
    assert!(
        o.status.success(),
        "{text}\n{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let line = text
        .lines()
        .find(|l| l.starts_with("scattering-vs-dynamics"))
        .unwrap();
    assert!(
        line.contains("INFO") && line.contains("diagnostic"),
        "{line}"
    );
    assert!(!text.contains("rotation-oracle"));
}
