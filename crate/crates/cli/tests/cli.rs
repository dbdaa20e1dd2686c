use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_topocausal"));
    c.env_remove("TOPOCAUSAL_DATA_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth_into(dir: &Path) -> PathBuf {
    let data = dir.join("data");
    let out = run(&["synth", "--out", s(&data)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    data
}

fn only_subdir(dir: &Path) -> PathBuf {
    let dirs: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.into_iter().next().unwrap()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn synth_report_spikes_in_burst_and_is_reproducible() {
    let dir = scratch("report");
    let data = synth_into(&dir);
    let cfg = data.join("config.json");
    let info: serde_json::Value =
        serde_json::from_slice(&fs::read(data.join("synth.json")).unwrap()).unwrap();
    let burst_start = info["burst_start"].as_str().unwrap().to_owned();

    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let o = run(&["report", "--config", s(&cfg), "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let run_a = only_subdir(&out_a);
    let run_b = only_subdir(&out_b);
    assert_eq!(run_a.file_name(), run_b.file_name());
    let files_a = read_dir_sorted(&run_a);
    assert_eq!(files_a, read_dir_sorted(&run_b));

    for (name, bytes) in &files_a {
        assert!(!bytes.contains(&b'\r'), "{name} contains CR");
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.contains("config_hash"), "{name} lacks config hash");
    }

    // the WD_2 peak must fall in the burst or within one window after it
    let summary = String::from_utf8(fs::read(run_a.join("summary.csv")).unwrap()).unwrap();
    let rows: Vec<Vec<&str>> = summary
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for r in rows.iter().filter(|r| r[1] == "2") {
        let (mean, max): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!(max / mean >= 2.0, "{r:?}");
        assert!(r[4] >= burst_start.as_str(), "{r:?} before {burst_start}");
        assert!(r[4] < "2019-08-01", "{r:?}");
    }

    for name in [
        "metadata.json",
        "stationarity.csv",
        "granger_p2.csv",
        "network_p2_crash.dot",
        "network_p2_crash.json",
        "cross_left_right_p1.csv",
        "plot_p2.svg",
    ] {
        assert!(run_a.join(name).exists(), "missing {name}");
    }
}

#[test]
fn changing_window_changes_run_directory() {
    let dir = scratch("hash");
    let data = synth_into(&dir);
    let cfg = data.join("config.json");
    let out = dir.join("out");
    for w in ["30", "20"] {
        let o = run(&["wdseries", "--config", s(&cfg), "--window", w, "--out", s(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let dirs: Vec<_> = fs::read_dir(&out).unwrap().collect();
    assert_eq!(dirs.len(), 2);
}

#[test]
fn data_dir_does_not_affect_hash() {
    let dir = scratch("datadir");
    let data = synth_into(&dir);
    let copy = dir.join("copy");
    fs::create_dir_all(&copy).unwrap();
    for e in fs::read_dir(&data).unwrap() {
        let p = e.unwrap().path();
        fs::copy(&p, copy.join(p.file_name().unwrap())).unwrap();
    }
    let cfg = data.join("config.json");
    let (out_a, out_b) = (dir.join("a"), dir.join("b"));
    let o = run(&["wdseries", "--config", s(&cfg), "--out", s(&out_a)]);
    assert!(o.status.success());
    let o = bin()
        .args(["wdseries", "--config", s(&cfg), "--out", s(&out_b)])
        .env("TOPOCAUSAL_DATA_DIR", &copy)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (a, b) = (only_subdir(&out_a), only_subdir(&out_b));
    assert_eq!(a.file_name(), b.file_name());
    assert_eq!(read_dir_sorted(&a), read_dir_sorted(&b));
}

#[test]
fn exit_codes() {
    let dir = scratch("codes");
    let data = synth_into(&dir);
    let cfg = data.join("config.json");
    let out = dir.join("out");

    // invalid setting
    let o = run(&["wdseries", "--config", s(&cfg), "--alpha", "1.5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));

    // unknown config key
    let bad = dir.join("bad.json");
    fs::write(&bad, r#"{"windw": 20}"#).unwrap();
    let o = run(&["wdseries", "--config", s(&bad), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));

    // missing price files
    let o = bin()
        .args(["wdseries", "--config", s(&cfg), "--out", s(&out)])
        .env("TOPOCAUSAL_DATA_DIR", dir.join("nowhere"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));

    // malformed price file
    let broken = dir.join("broken");
    fs::create_dir_all(&broken).unwrap();
    for e in fs::read_dir(&data).unwrap() {
        let p = e.unwrap().path();
        fs::copy(&p, broken.join(p.file_name().unwrap())).unwrap();
    }
    fs::write(broken.join("SYN03.csv"), "Date,Close\n2018-06-01,abc\n").unwrap();
    let o = bin()
        .args(["wdseries", "--config", s(&cfg), "--out", s(&out)])
        .env("TOPOCAUSAL_DATA_DIR", &broken)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));

    // date range leaves too few rows for a window
    let o = run(&[
        "wdseries", "--config", s(&cfg), "--window", "600", "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));

    // period too short for the tests
    let o = run(&[
        "causality",
        "--config",
        s(&cfg),
        "--period",
        "tiny:2019-01-02:2019-01-20",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));

    // unreachable download endpoint
    let mut c: serde_json::Value = serde_json::from_slice(&fs::read(&cfg).unwrap()).unwrap();
    c["endpoint"] = "http://127.0.0.1:9/{symbol}?p1={start_ts}&p2={end_ts}".into();
    c["data_dir"] = s(&dir.join("fetched")).into();
    let fetch_cfg = dir.join("fetch.json");
    fs::write(&fetch_cfg, serde_json::to_vec(&c).unwrap()).unwrap();
    let o = run(&["ingest", "--fetch", "--config", s(&fetch_cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(6), "{}", String::from_utf8_lossy(&o.stderr));
}
