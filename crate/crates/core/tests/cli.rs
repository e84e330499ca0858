use std::fs;
use std::path::Path;

use rfcap::cli::run_command;

fn run(dir: &Path, args: &[&str]) -> Result<rfcap::cli::Outcome, rfcap::cli::CliError> {
    let out = dir.to_str().unwrap();
    let mut argv = vec!["rfcap", "--out", out];
    argv.extend_from_slice(args);
    run_command(argv)
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in\n{report}"))
}

fn synth(dir: &Path) -> String {
    run(
        dir,
        &[
            "synth",
            "--r",
            "1",
            "--l",
            "2e-9",
            "--c",
            "1e-12",
            "--sweep",
            "1e8:2e10:1000",
        ],
    )
    .unwrap();
    dir.join("synth.s2p").to_str().unwrap().to_string()
}

#[test]
fn synth_then_analyze_finds_resonance() {
    let dir = tempfile::tempdir().unwrap();
    let s2p = synth(dir.path());
    let out = run(dir.path(), &["analyze", &s2p]).unwrap();
    let f0: f64 = value(&out.summary, "resonance_crossing_hz")
        .parse()
        .unwrap();
    assert!((f0 - 3.5588e9).abs() < 2e7, "{f0}");
    let csv = fs::read_to_string(dir.path().join("impedance.csv")).unwrap();
    assert!(csv.starts_with("freq_hz,re_z_ohm,im_z_ohm,mag_z_ohm\n"));
    assert_eq!(csv.lines().count(), 1001);
    let metrics = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("freq_hz,esr_ohm,reactance_ohm,df,efficiency,q\n"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let s2p = synth(dir);
        run(dir, &["--svg", "analyze", &s2p]).unwrap();
        run(dir, &["match", &s2p, "--f-design", "3e9"]).unwrap();
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 9, "{names:?}");
    for name in names {
        let (fa, fb) = (a.path().join(&name), b.path().join(&name));
        let (ta, tb) = (
            fs::read_to_string(&fa).unwrap(),
            fs::read_to_string(&fb).unwrap(),
        );
        // Reports name their input path, which differs between the two directories.
        let strip = |t: &str, d: &Path| t.replace(d.to_str().unwrap(), "<dir>");
        assert_eq!(strip(&ta, a.path()), strip(&tb, b.path()), "{name:?}");
    }
}

#[test]
fn series_match_report() {
    let dir = tempfile::tempdir().unwrap();
    let s1p = dir.path().join("ant.s1p");
    // Z = 1 + j2 ohm at every point, given as S11 in RI form.
    let g =
        num_complex::Complex64::new(1.0 - 50.0, 2.0) / num_complex::Complex64::new(1.0 + 50.0, 2.0);
    let doc = format!(
        "# GHZ S RI R 50\n1 {r} {i}\n2 {r} {i}\n3 {r} {i}\n",
        r = g.re,
        i = g.im
    );
    fs::write(&s1p, doc).unwrap();
    let out = run(
        dir.path(),
        &[
            "--fixture",
            "reflection",
            "match",
            s1p.to_str().unwrap(),
            "--f-design",
            "2e9",
        ],
    )
    .unwrap();
    let r: f64 = value(&out.summary, "series_r_ohm").parse().unwrap();
    assert!((r - 49.0).abs() < 1e-6, "{r}");
    let before: f64 = value(&out.summary, "unmatched_vswr_at_design")
        .parse()
        .unwrap();
    let after: f64 = value(&out.summary, "matched_vswr_at_design")
        .parse()
        .unwrap();
    assert!((before - 50.09).abs() < 0.01, "{before}");
    assert!((after - 1.0408).abs() < 5e-4, "{after}");
    let power = fs::read_to_string(dir.path().join("power.csv")).unwrap();
    assert!(power.lines().count() == 4);

    let out = run(
        dir.path(),
        &[
            "--fixture",
            "reflection",
            "match",
            s1p.to_str().unwrap(),
            "--f-design",
            "2e9",
            "--topology",
            "l-section",
        ],
    )
    .unwrap();
    let after: f64 = value(&out.summary, "matched_vswr_at_design")
        .parse()
        .unwrap();
    assert!((after - 1.0).abs() < 1e-6, "{after}");
}

#[test]
fn pattern_from_layout() {
    let dir = tempfile::tempdir().unwrap();
    let layout = dir.path().join("pair.txt");
    fs::write(
        &layout,
        "frequency_hz 1e9\nunits wavelengths\nfeed 0 0 0\nfeed 0 0 1\nphi_cut_deg 0\n",
    )
    .unwrap();
    let out = run(
        dir.path(),
        &["--svg", "pattern", "--layout", layout.to_str().unwrap()],
    )
    .unwrap();
    assert_eq!(value(&out.summary, "main_lobes"), "4");
    let cut = fs::read_to_string(dir.path().join("cut.csv")).unwrap();
    assert!(cut.starts_with("theta_deg,u_db\n"));
    let pattern = fs::read_to_string(dir.path().join("pattern.csv")).unwrap();
    assert!(pattern.starts_with("theta_deg,phi_deg,u,u_db\n"));
    assert_eq!(pattern.lines().count(), 1 + 181 * 360);
    assert!(dir.path().join("cut.svg").exists());
}

#[test]
fn rssi_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let novel = dir.path().join("novel.log");
    let baseline = dir.path().join("baseline.csv");
    fs::write(
        &novel,
        "# novel antenna\n2024-01-05T10:00:00Z +CSQ: 10,0\n2024-01-05T10:00:05Z +CSQ: 12,0\n2024-01-05T10:00:10Z +CSQ: 99,99\n2024-01-05T10:00:15Z +CSQ: 11,0\n",
    )
    .unwrap();
    fs::write(
        &baseline,
        "timestamp,rssi,ber\n2024-01-05T10:00:00Z,14,0\n2024-01-05T10:00:05Z,16,0\n2024-01-05T10:00:10Z,15,0\n",
    )
    .unwrap();
    let out = run(
        dir.path(),
        &[
            "rssi",
            novel.to_str().unwrap(),
            baseline.to_str().unwrap(),
            "--reported",
            "20:-73,23:-67,11:-89,15:-83,10:-93,13:-89",
        ],
    )
    .unwrap();
    let diff: f64 = value(&out.summary, "percent_difference").parse().unwrap();
    assert!((diff - 26.6666667).abs() < 1e-6);
    assert_eq!(value(&out.summary, "novel_unknown_count"), "1");
    assert_eq!(value(&out.summary, "affine_mapping_possible"), "no");
    assert!(value(&out.summary, "reading_rssi_11").ends_with("INCONSISTENT"));
    let rssi = fs::read_to_string(dir.path().join("rssi_novel.csv")).unwrap();
    assert!(rssi.starts_with("timestamp,rssi,dbm\n"));
    assert!(rssi.contains(",99,\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(dir.path(), &["analyze", "/nonexistent/x.s2p"]).unwrap_err();
    assert_eq!(missing.code, 2);

    let bad = dir.path().join("bad.s1p");
    fs::write(&bad, "# GHZ S MA R 50\n1 0.5 0\n0.5 0.5 0\n").unwrap();
    let err = run(
        dir.path(),
        &["--fixture", "reflection", "analyze", bad.to_str().unwrap()],
    )
    .unwrap_err();
    assert_eq!(err.code, 2);
    assert!(err.message.contains("line 3"), "{}", err.message);

    assert_eq!(run(dir.path(), &["frobnicate"]).unwrap_err().code, 2);
    assert_eq!(
        run(
            dir.path(),
            &[
                "--z0",
                "-5",
                "synth",
                "--r",
                "1",
                "--l",
                "1e-9",
                "--c",
                "1e-12",
                "--sweep",
                "1e9:2e9:3"
            ]
        )
        .unwrap_err()
        .code,
        2
    );

    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "z0_ohm = 50\nwhatever = 1\n").unwrap();
    let err = run(
        dir.path(),
        &[
            "--config",
            cfg.to_str().unwrap(),
            "synth",
            "--r",
            "1",
            "--l",
            "1e-9",
            "--c",
            "1e-12",
            "--sweep",
            "1e9:2e9:3",
        ],
    )
    .unwrap_err();
    assert_eq!(err.code, 2);
    assert!(err.message.contains("line 2"), "{}", err.message);

    // Output directory that cannot be created.
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let err = run_command([
        "rfcap",
        "--out",
        blocker.join("sub").to_str().unwrap(),
        "synth",
        "--r",
        "1",
        "--l",
        "1e-9",
        "--c",
        "1e-12",
        "--sweep",
        "1e9:2e9:3",
    ])
    .unwrap_err();
    assert_eq!(err.code, 1);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "z0_ohm = 75\nfixture = reflection\n").unwrap();
    let args = [
        "synth",
        "--r",
        "1",
        "--l",
        "1e-9",
        "--c",
        "1e-12",
        "--sweep",
        "1e9:2e9:3",
    ];
    let mut with_cfg = vec!["--config", cfg.to_str().unwrap()];
    with_cfg.extend_from_slice(&args);
    run(dir.path(), &with_cfg).unwrap();
    let doc = fs::read_to_string(dir.path().join("synth.s1p")).unwrap();
    assert!(doc.contains("R 75\n"));

    let mut flagged = vec![
        "--config",
        cfg.to_str().unwrap(),
        "--z0",
        "50",
        "--fixture",
        "series-through",
    ];
    flagged.extend_from_slice(&args);
    run(dir.path(), &flagged).unwrap();
    let doc = fs::read_to_string(dir.path().join("synth.s2p")).unwrap();
    assert!(doc.contains("R 50\n"));
}

#[test]
fn binary_reports_and_exits() {
    let dir = tempfile::tempdir().unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_rfcap"))
        .args([
            "--out",
            dir.path().to_str().unwrap(),
            "analyze",
            "missing.s2p",
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("missing.s2p"));
    let ok = std::process::Command::new(env!("CARGO_BIN_EXE_rfcap"))
        .args([
            "--out",
            dir.path().to_str().unwrap(),
            "synth",
            "--r",
            "1",
            "--l",
            "2e-9",
            "--c",
            "1e-12",
            "--sweep",
            "1e9:5e9:5",
        ])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("resonant_frequency_hz"));
}
