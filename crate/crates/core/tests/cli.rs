use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pnc-sim"))
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--code", "--ebn0", "--iota-max", "--delta-theta", "--channel", "--crc", "--out"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn minimal_run_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let st = bin()
        .args(["--n", "96", "--ebn0", "2:3:1", "--frames", "4", "--outer", "2", "--inner", "3", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(dir.path().join("r.csv.manifest.json").exists());
}

#[test]
fn matched_filter_path_and_cyclic_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let st = bin()
        .args(["--code", "cyclic-eg", "--n", "63", "--channel", "matched", "--iota", "random", "--iota-max", "4"])
        .args(["--crc", "on", "--ebn0", "30", "--frames", "3", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let row = std::fs::read_to_string(&out).unwrap().lines().nth(1).unwrap().to_owned();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[2], "0");
    assert_eq!(cols[8], cols[9]);
}

#[test]
fn conflicting_flags_fail_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    for args in [
        vec!["--pulse", "rect", "--rolloff", "0.5", "--ebn0", "1"],
        vec!["--iota", "fixed:3", "--ebn0", "1"],
        vec!["--ebn0", "3:1:0.5"],
        vec!["--code", "bogus", "--ebn0", "1"],
        vec!["--no-such-flag", "--ebn0", "1"],
    ] {
        let st = bin().args(&args).arg("--out").arg(&out).output().unwrap();
        assert!(!st.status.success(), "{args:?}");
        assert!(!out.exists());
    }
}
