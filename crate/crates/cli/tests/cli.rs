use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use contact_sysid::reward::{write_trace, BallFrame, ContactFoot, StateFrame};
use contact_sysid::sysid::IdentificationResult;
use contact_sysid::{Trajectory, TrajectoryKind};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contact-sysid"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    run(dir, args).status.code().expect("exit code")
}

fn read_traj(path: PathBuf, kind: TrajectoryKind) -> Trajectory {
    Trajectory::read_csv(fs::File::open(path).unwrap(), kind).unwrap()
}

fn recordings(dir: &Path, preset: &str) {
    ok(dir, &["simulate", "--experiment", "drop", "--preset", preset, "--h0", "1.0", "--out", "drop.csv"]);
    ok(dir, &["simulate", "--experiment", "roll", "--preset", preset, "--v0", "2.0", "--out", "roll.csv"]);
}

fn csv_rows(path: PathBuf) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(rows: &[Vec<String>], header: &[String], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn simulate_writes_sampled_trajectories() {
    let tmp = TempDir::new().unwrap();
    recordings(tmp.path(), "hard-ground");
    let drop = read_traj(tmp.path().join("drop.csv"), TrajectoryKind::DropHeight);
    assert_eq!(drop.len(), 21);
    assert_eq!(drop.values[0], 1.0);
    assert_eq!(fs::read_to_string(tmp.path().join("drop.csv")).unwrap().lines().count(), 22);

    ok(tmp.path(), &["simulate", "--experiment", "roll", "--preset", "grass", "--v0", "0", "--out", "still.csv"]);
    let still = read_traj(tmp.path().join("still.csv"), TrajectoryKind::RollDisplacement);
    assert!(still.values.iter().all(|v| *v == 0.0));
}

#[test]
fn simulate_accepts_a_params_file() {
    let tmp = TempDir::new().unwrap();
    let json = r#"{"static_friction":0.5,"dynamic_friction":0.1,"restitution":0.0,"linear_damping":0.0,"angular_damping":0.0}"#;
    fs::write(tmp.path().join("p.json"), json).unwrap();
    ok(tmp.path(), &["simulate", "--experiment", "drop", "--params", "p.json", "--h0", "1", "--out", "d.csv"]);
    let d = read_traj(tmp.path().join("d.csv"), TrajectoryKind::DropHeight);
    assert!(d.values[5..].iter().all(|h| *h == 0.0));
    assert_eq!(code(tmp.path(), &["simulate", "--experiment", "drop", "--params", "p.json", "--v0", "1", "--out", "d.csv"]), 2);
    fs::write(tmp.path().join("bad.json"), "{").unwrap();
    assert_eq!(code(tmp.path(), &["simulate", "--experiment", "drop", "--params", "bad.json", "--h0", "1", "--out", "d.csv"]), 2);
}

#[test]
fn repeats_emit_replicas_and_their_mean() {
    let tmp = TempDir::new().unwrap();
    let args = [
        "simulate", "--experiment", "drop", "--preset", "grass", "--h0", "1", "--repeats", "5", "--noise", "0.005",
        "--seed", "4", "--out", "drop.csv",
    ];
    ok(tmp.path(), &args);
    let reps: Vec<Trajectory> = (1..=5)
        .map(|i| read_traj(tmp.path().join(format!("drop_rep{i}.csv")), TrajectoryKind::DropHeight))
        .collect();
    let mean = read_traj(tmp.path().join("drop_mean.csv"), TrajectoryKind::DropHeight);
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 6);
    assert_ne!(reps[0].values, reps[1].values);
    for i in 0..mean.len() {
        let m = reps.iter().map(|r| r.values[i]).sum::<f64>() / 5.0;
        assert!((m - mean.values[i]).abs() < 1e-12);
    }
    let without_seed = &args[..args.len() - 4];
    let mut args2 = without_seed.to_vec();
    args2.extend(["--out", "drop.csv"]);
    assert_eq!(code(tmp.path(), &args2), 2);
}

#[test]
fn identify_recovers_self_generated_recordings() {
    let tmp = TempDir::new().unwrap();
    recordings(tmp.path(), "hard-ground");
    let args = ["identify", "--drop", "drop.csv", "--roll", "roll.csv", "--v0", "2.0", "--seed", "0", "--out", "a.json"];
    ok(tmp.path(), &args);
    let text = fs::read_to_string(tmp.path().join("a.json")).unwrap();
    let res: IdentificationResult = serde_json::from_str(&text).unwrap();
    let p = res.best_params;
    assert!((p.restitution - 0.75).abs() <= 0.02);
    assert!((p.dynamic_friction - 0.07).abs() <= 0.02);
    assert!((p.linear_damping - 0.01).abs() <= 0.05);
    assert!((p.angular_damping - 4.28).abs() <= 0.3);
    assert_eq!(res.loss_history.len(), res.generations_used);

    let mut again = args;
    again[args.len() - 1] = "b.json";
    ok(tmp.path(), &again);
    assert_eq!(text, fs::read_to_string(tmp.path().join("b.json")).unwrap());
}

#[test]
fn identify_error_codes_and_stopping_rule() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    recordings(d, "grass");
    let text = fs::read_to_string(d.join("drop.csv")).unwrap();
    let truncated: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
    fs::write(d.join("short.csv"), truncated).unwrap();
    let base = |drop: &'static str| ["identify", "--drop", drop, "--roll", "roll.csv", "--v0", "2", "--seed", "1", "--out", "r.json"];
    assert_eq!(code(d, &base("short.csv")), 2);
    assert_eq!(code(d, &base("absent.csv")), 4);
    assert_eq!(code(d, &["identify", "--drop", "drop.csv", "--roll", "roll.csv", "--v0", "2", "--out", "r.json"]), 2);

    let mut big = base("drop.csv").to_vec();
    big.extend(["--tolerance", "1e6"]);
    ok(d, &big);
    let res: IdentificationResult = serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(res.generations_used, 2);

    fs::write(d.join("cfg.json"), r#"{"sysid": {"tolerance": 1e6}}"#).unwrap();
    let mut via_config = vec!["--config", "cfg.json"];
    via_config.extend(base("drop.csv"));
    ok(d, &via_config);
    let res: IdentificationResult = serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(res.generations_used, 2);

    fs::write(d.join("typo.json"), r#"{"sysidd": {}}"#).unwrap();
    let mut typo = vec!["--config", "typo.json"];
    typo.extend(base("drop.csv"));
    assert_eq!(code(d, &typo), 2);
}

#[test]
fn sample_outputs_are_reproducible_and_in_support() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["sample", "--which", "dr", "-n", "100000", "--seed", "5", "--out", "a.csv"]);
    ok(d, &["sample", "--which", "dr", "-n", "100000", "--seed", "5", "--out", "b.csv"]);
    assert_eq!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("b.csv")).unwrap());
    let (header, rows) = csv_rows(d.join("a.csv"));
    let supports = [
        ("robot_static_friction", 0.3, 1.6),
        ("robot_dynamic_friction", 0.3, 1.2),
        ("robot_restitution", 0.0, 0.5),
        ("push_robot", -0.5, 0.5),
    ];
    for (name, lo, hi) in supports {
        assert!(column(&rows, &header, name).iter().all(|v| (lo..=hi).contains(v)), "{name}");
    }
    assert_eq!(code(d, &["sample", "--which", "dr", "-n", "10", "--out", "c.csv"]), 2);
}

#[test]
fn goal_samples_center_on_the_target() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["sample", "--which", "goal", "-n", "1000000", "--seed", "2", "--out", "g.csv"]);
    let (header, rows) = csv_rows(tmp.path().join("g.csv"));
    let x = column(&rows, &header, "x");
    let y = column(&rows, &header, "y");
    assert_eq!(x.len(), 1_000_000);
    assert!(x.iter().all(|v| (4.75..=5.25).contains(v)) && y.iter().all(|v| (-0.5..=0.5).contains(v)));
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let my = y.iter().sum::<f64>() / y.len() as f64;
    assert!((mx - 5.0).abs() < 1e-3 && my.abs() < 1e-3, "mean ({mx}, {my})");
}

#[test]
fn other_samplers_run() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["sample", "--which", "curriculum", "-n", "120000", "--seed", "1", "--out", "c.csv"]);
    let (header, rows) = csv_rows(d.join("c.csv"));
    let phases = column(&rows, &header, "phase");
    let mut bins = [0usize; 10];
    for p in phases {
        bins[(p * 10.0) as usize] += 1;
    }
    assert!(bins.iter().all(|b| (*b as f64 / 12000.0 - 1.0).abs() < 0.05), "{bins:?}");

    ok(d, &["sample", "--which", "surface", "-n", "7", "--seed", "1", "--out", "s.csv"]);
    let (_, rows) = csv_rows(d.join("s.csv"));
    assert_eq!(rows.iter().filter(|r| r[1] == "hard-ground").count(), 4);

    ok(d, &["sample", "--which", "placement", "-n", "1000", "--seed", "1", "--out", "p.csv"]);
    let (header, rows) = csv_rows(d.join("p.csv"));
    let vx = column(&rows, &header, "vx");
    let vy = column(&rows, &header, "vy");
    assert!(vx.iter().zip(&vy).all(|(a, b)| (0.1 - 1e-12..=0.3 + 1e-12).contains(&a.hypot(*b))));

    ok(d, &["sample", "--which", "noise", "-n", "10", "--seed", "1", "--out", "n.csv"]);
    let (header, rows) = csv_rows(d.join("n.csv"));
    assert!(column(&rows, &header, "sigma").iter().all(|s| (s - 0.41).abs() < 1e-12));
}

fn trace(frames: &[StateFrame], path: PathBuf) {
    write_trace(frames, fs::File::create(path).unwrap()).unwrap();
}

#[test]
fn reward_eval_scores_traces() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let perfect: Vec<StateFrame> = (0..20).map(|i| StateFrame::perfect(i, i as f64 * 0.02, 5, 4)).collect();
    trace(&perfect, d.join("t1.csv"));
    ok(d, &["reward-eval", "--trace", "t1.csv", "--stage", "I", "--out", "r1.csv"]);
    let (header, rows) = csv_rows(d.join("r1.csv"));
    assert_eq!(rows.len(), 20);
    assert!(column(&rows, &header, "total").iter().all(|t| (t - 6.0).abs() < 1e-12));

    let kicked: Vec<StateFrame> = perfect
        .iter()
        .cloned()
        .map(|mut f| {
            let contact = if f.step == 5 { ContactFoot::Left } else { ContactFoot::None };
            f.ball = Some(BallFrame {
                distance_xy: 0.2,
                velocity: if f.step > 5 { [3.0, 0.0, 0.0] } else { [0.0; 3] },
                contact,
            });
            f
        })
        .collect();
    trace(&kicked, d.join("t2.csv"));
    ok(d, &["reward-eval", "--trace", "t2.csv", "--stage", "II", "--leg", "right", "--out", "r2.csv"]);
    let (header, rows) = csv_rows(d.join("r2.csv"));
    assert!(column(&rows, &header, "contact").iter().all(|c| *c == 0.0));
    ok(d, &["reward-eval", "--trace", "t2.csv", "--stage", "II", "--leg", "left", "--target", "1,0,0", "--out", "r3.csv"]);
    let (header, rows) = csv_rows(d.join("r3.csv"));
    let contact = column(&rows, &header, "contact");
    assert_eq!(contact.iter().filter(|c| **c == 50.0).count(), 1);
    assert_eq!(contact[5], 50.0);

    // Stage II needs ball data; an empty trace is rejected.
    assert_eq!(code(d, &["reward-eval", "--trace", "t1.csv", "--stage", "II", "--out", "r4.csv"]), 2);
    let header_only: String = fs::read_to_string(d.join("t1.csv")).unwrap().lines().next().unwrap().to_string();
    fs::write(d.join("empty.csv"), header_only + "\n").unwrap();
    assert_eq!(code(d, &["reward-eval", "--trace", "empty.csv", "--stage", "I", "--out", "r5.csv"]), 2);
}

#[test]
fn curriculum_replay_builds_histograms() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(d.join("cfg.json"), r#"{"curriculum": {"motions": 2, "bins": 2}}"#).unwrap();
    fs::write(d.join("fail.csv"), "motion,phase\n0,0.1\n0,0.2\n0,0.49\n1,0.9\n").unwrap();
    ok(d, &["--config", "cfg.json", "curriculum-replay", "--failures", "fail.csv", "--out", "h.csv", "--probabilities", "p.csv"]);
    assert_eq!(fs::read_to_string(d.join("h.csv")).unwrap(), "3,0\n0,1\n");
    let p: Vec<f64> = fs::read_to_string(d.join("p.csv"))
        .unwrap()
        .split([',', '\n'])
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().unwrap())
        .collect();
    let expected = [4.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0, 2.0 / 8.0];
    assert!(p.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12), "{p:?}");

    ok(d, &["curriculum-replay", "--histogram", "h.csv", "--failures", "fail.csv", "--decay", "0.5", "--out", "h2.csv"]);
    assert_eq!(fs::read_to_string(d.join("h2.csv")).unwrap(), "1.0625,0\n0,1.0625\n");

    fs::write(d.join("oob.csv"), "motion,phase\n5,0.1\n").unwrap();
    assert_eq!(code(d, &["--config", "cfg.json", "curriculum-replay", "--failures", "oob.csv", "--out", "h.csv"]), 2);
}
