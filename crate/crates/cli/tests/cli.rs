use std::path::Path;
use std::process::{Command, Output};

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voicescreen"))
        .current_dir(dir)
        .env_remove("VOICESCREEN_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = bin(dir, args);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

#[test]
fn extract_writes_one_feature_row() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth",
            "--out",
            "a.wav",
            "--jitter",
            "1",
            "--shimmer",
            "3",
            "--duration",
            "3",
        ],
    );
    assert!(d.join("a.truth.csv").exists());
    ok(
        d,
        &[
            "extract", "--input", "a.wav", "--label", "HC", "--age", "40", "--out", "f.csv",
        ],
    );
    let csv = std::fs::read_to_string(d.join("f.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "id,label,age,sex,J1,J3,J5,S1,S3,S5,S11,PVI");
    assert!(lines[1].starts_with("a,HC,40,,"));
}

#[test]
fn short_recording_fails_segmentation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--out", "s.wav", "--duration", "0.1"]);
    let o = bin(d, &["segment", "--method", "wm-pc", "--input", "s.wav"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("too few cycles"), "{err}");
    assert_eq!(err.trim().lines().count(), 1);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        bin(dir.path(), &["classify", "--features", "x.csv", "--bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(bin(dir.path(), &["segment"]).status.code(), Some(2));
    assert_eq!(
        bin(
            dir.path(),
            &["segment", "--method", "zigzag", "--input", "a.wav"]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(bin(dir.path(), &[]).status.code(), Some(2));
    assert_eq!(
        bin(dir.path(), &["search", "--help"]).status.code(),
        Some(0)
    );
}

#[test]
fn missing_input_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(dir.path(), &["f0", "--input", "nope.wav"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.wav"));
}

#[test]
fn classify_reports_mean_and_sd() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["cohort", "--out", "c.csv", "--seed", "3"]);
    let table = ok(
        d,
        &[
            "classify",
            "--features",
            "c.csv",
            "--model",
            "lda",
            "--folds",
            "7",
            "--repeats",
            "40",
            "--seed",
            "1",
            "--subset",
            "S1,S3,S11,PVI",
            "--json",
            "r.json",
        ],
    );
    assert!(
        table.contains("S1,S3,S11,PVI") && table.contains('±'),
        "{table}"
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(v["features"], serde_json::json!(["S1", "S3", "S11", "PVI"]));
    assert_eq!(v["n_samples"], 54);
    assert_eq!(v["report"]["confusions"].as_array().unwrap().len(), 40);
    let acc = v["report"]["acc"]["mean"].as_f64().unwrap();
    assert!((0.0..=100.0).contains(&acc));
    assert!(v["report"]["acc"]["sd"].as_f64().unwrap() >= 0.0);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |tag: &str| {
        ok(
            d,
            &["cohort", "--out", &format!("c{tag}.csv"), "--seed", "11"],
        );
        ok(
            d,
            &[
                "search",
                "--features",
                &format!("c{tag}.csv"),
                "--repeats",
                "3",
                "--json",
                &format!("s{tag}.json"),
            ],
        );
        (
            std::fs::read(d.join(format!("c{tag}.csv"))).unwrap(),
            std::fs::read(d.join(format!("s{tag}.json"))).unwrap(),
        )
    };
    assert_eq!(run("a"), run("b"));
    let v: serde_json::Value = serde_json::from_slice(&run("a").1).unwrap();
    assert_eq!(v["n_subsets"], 255);
}

#[test]
fn seed_defaults_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let with_env = |seed: &str, out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_voicescreen"))
            .current_dir(d)
            .env("VOICESCREEN_SEED", seed)
            .args(["cohort", "--out", out])
            .output()
            .unwrap();
        assert!(o.status.success());
        std::fs::read(d.join(out)).unwrap()
    };
    ok(d, &["cohort", "--out", "explicit.csv", "--seed", "5"]);
    assert_eq!(
        with_env("5", "env5.csv"),
        std::fs::read(d.join("explicit.csv")).unwrap()
    );
    assert_ne!(
        with_env("6", "env6.csv"),
        std::fs::read(d.join("explicit.csv")).unwrap()
    );
}

#[test]
fn pvi_stats_and_age_correction() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth",
            "--out",
            "v.wav",
            "--duration",
            "3",
            "--vibrato-rate",
            "11",
            "--vibrato-depth",
            "0.02",
        ],
    );
    let j: serde_json::Value =
        serde_json::from_str(&ok(d, &["pvi", "--input", "v.wav", "--spectrum", "sp.csv"])).unwrap();
    assert!(j["pvi"].as_f64().unwrap() > 0.0);
    assert_eq!(j["band_lo"], 9.0);
    assert!(std::fs::read_to_string(d.join("sp.csv"))
        .unwrap()
        .starts_with("freq_hz,amplitude\n"));

    ok(d, &["cohort", "--out", "c.csv"]);
    let s: serde_json::Value =
        serde_json::from_str(&ok(d, &["stats", "--features", "c.csv", "--kde", "k.csv"])).unwrap();
    assert_eq!(s.as_array().unwrap().len(), 8);
    assert_eq!(s[0]["hc"]["n"], 39);
    let kde = std::fs::read_to_string(d.join("k.csv")).unwrap();
    assert_eq!(kde.lines().count(), 1 + 8 * 200);

    ok(
        d,
        &["age-correct", "--features", "c.csv", "--out", "ac.csv"],
    );
    ok(
        d,
        &["age-correct", "--features", "ac.csv", "--out", "ac2.csv"],
    );
    let a = std::fs::read_to_string(d.join("ac.csv")).unwrap();
    assert_eq!(a.lines().count(), 55);
}

#[test]
fn manifest_drives_batch_extraction() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth",
            "--out",
            "one.wav",
            "--duration",
            "2",
            "--f0",
            "120",
        ],
    );
    ok(
        d,
        &[
            "synth",
            "--out",
            "two.wav",
            "--duration",
            "2",
            "--f0",
            "200",
            "--jitter",
            "1",
        ],
    );
    std::fs::write(
        d.join("m.csv"),
        "path,id,label,age,sex\none.wav,S01,HC,30,F\ntwo.wav,S02,ALS,60,M\n",
    )
    .unwrap();
    ok(d, &["extract", "--manifest", "m.csv", "--out", "f.csv"]);
    let csv = std::fs::read_to_string(d.join("f.csv")).unwrap();
    let ids: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(ids, ["S01", "S02"]);
    assert!(csv.contains("S02,ALS,60,M,"));
}
