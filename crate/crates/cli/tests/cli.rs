use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rtg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtg")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn play_writes_replay_csv_and_renders() {
    let dir = tempfile::tempdir().unwrap();
    let replay = dir.path().join("game.rtgr");
    let csv = dir.path().join("game.csv");
    let beliefs = dir.path().join("beliefs.csv");
    let out = rtg(&[
        "play",
        "--scenario",
        "rescue",
        "--seed",
        "5",
        "--red",
        "hunter:0.05",
        "--green",
        "harvester:0.05",
        "--blue",
        "rescuer:0.05",
        "--alpha-red",
        "0.5",
        "--replay",
        path(&replay),
        "--csv",
        path(&csv),
        "--beliefs-csv",
        path(&beliefs),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let steps: usize = text
        .split(" after ")
        .nth(1)
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();

    assert_eq!(&fs::read(&replay).unwrap()[..4], b"RTGR");
    let rows = fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("step,player,team,raw_bonus,r_int,r_total"));
    assert_eq!(rows.lines().count(), 1 + 6 * steps);
    assert_eq!(
        fs::read_to_string(&beliefs).unwrap().lines().count(),
        1 + 36 * (steps + 1)
    );

    let frames = dir.path().join("frames");
    let out = rtg(&["render", "--replay", path(&replay), "--out", path(&frames)]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_dir(&frames).unwrap().count(), steps + 1);
}

#[test]
fn play_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.rtgr"), dir.path().join("b.rtgr"));
    let x = rtg(&["play", "--scenario", "r2g2", "--seed", "9", "--replay", path(&a)]);
    let y = rtg(&["play", "--scenario", "r2g2", "--seed", "9", "--replay", path(&b)]);
    assert_eq!(stdout(&x), stdout(&y));
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn eval_reports_every_game() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let out = rtg(&[
        "eval",
        "--scenario",
        "rescue",
        "--games",
        "3",
        "--seed",
        "1",
        "--red",
        "hunter:0.05,wanderer:0.1",
        "--set",
        "timeout=60",
        "--json",
        path(&json),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("games 6\n"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(report["games"], 6);
    assert_eq!(report["per_game"].as_array().unwrap().len(), 6);
}

#[test]
fn config_print_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = rtg(&["config", "print", "--scenario", "wolf", "--set", "timeout=77"]);
    assert_eq!(code(&out), 0);
    let file = dir.path().join("wolf.json");
    fs::write(&file, stdout(&out)).unwrap();
    let again = rtg(&["config", "print", "--config", path(&file)]);
    assert_eq!(stdout(&again), stdout(&out));
    assert!(stdout(&out).contains("\"timeout\": 77"));
    assert_eq!(code(&rtg(&["config", "validate", "--config", path(&file)])), 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&rtg(&[])), 1);
    assert_eq!(code(&rtg(&["play", "--no-such-flag"])), 1);
    assert_eq!(code(&rtg(&["play", "--red", "sniper"])), 1);
    assert_eq!(code(&rtg(&["play", "--red", "rescuer:0.05"])), 1);
    assert_eq!(code(&rtg(&["bench", "--scenario", "rescue", "--steps", "9999"])), 1);
    assert_eq!(code(&rtg(&["config", "validate", "--scenario", "siege"])), 2);
    assert_eq!(code(&rtg(&["config", "validate", "--set", "map_width=2"])), 2);
    assert_eq!(code(&rtg(&["config", "validate", "--set", "enable_voting=true"])), 2);
    assert_eq!(code(&rtg(&["config", "validate", "--set", "no_such_key=1"])), 2);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"map_width\": ").unwrap();
    assert_eq!(code(&rtg(&["config", "validate", "--config", path(&bad)])), 2);
    assert_eq!(
        code(&rtg(&[
            "config",
            "validate",
            "--config",
            path(&dir.path().join("missing.json"))
        ])),
        3
    );

    let replay = dir.path().join("g.rtgr");
    assert_eq!(code(&rtg(&["play", "--seed", "2", "--replay", path(&replay)])), 0);
    let mut bytes = fs::read(&replay).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 1;
    fs::write(&replay, bytes).unwrap();
    let out = rtg(&[
        "render",
        "--replay",
        path(&replay),
        "--out",
        path(&dir.path().join("f")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("checksum"));
}

#[test]
fn bench_reports_throughput() {
    let out = rtg(&["bench", "--scenario", "rescue", "--steps", "10000"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("steps/s"));
}
