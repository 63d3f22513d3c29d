use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_h1cutoff"))
}

#[test]
fn missing_config_exits_2() {
    let out = bin()
        .args(["certify", "--config", "/definitely/not/here.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"eta": "half"}"#).unwrap();
    let out = bin().arg("certify").arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_exits_2() {
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("sawtooth"));
}

#[test]
fn sawtooth_writes_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sawtooth", "--eps-saw", "1/16,1/64,1/256", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sawtooth.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    let header: Vec<&str> = lines[0].split(',').collect();
    assert!(header.contains(&"ratio_g") && header.contains(&"ratio_f_eps"));
    for row in &lines[1..] {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), header.len());
        // ratio_g clears 1.9 / eps_saw
        assert!(cells[1] >= 1.9 / cells[0]);
    }
    assert!(dir.path().join("sawtooth.json").exists());
    assert!(dir.path().join("sawtooth.svg").exists());
}

#[test]
fn config_file_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    let out_dir = dir.path().join("reports");
    std::fs::write(
        &path,
        format!(
            r#"{{"seed": 5, "eps_saw": [0.0625], "out_dir": {}}}"#,
            serde_json::to_string(&out_dir).unwrap()
        ),
    )
    .unwrap();
    let out = bin().arg("sawtooth").arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("sawtooth.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 5);
    assert_eq!(report["suite_name"], "sawtooth");
}

#[test]
fn failing_bound_exits_1_with_digest() {
    // Gentle sawtooths stay inside the small ball, where F^ε(u) = u² and
    // the ratio grows with the slope: the boundedness check must trip.
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sawtooth", "--eps-saw", "10,1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(1), "{stderr}");
    assert!(stderr.contains("FAIL [sawtooth] sawtooth/f-eps-bounded (digest "), "{stderr}");
}
