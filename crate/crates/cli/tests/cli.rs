use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;
use zecap_core::capacity::CapacityVerdict;
use zecap_core::io::ChannelFile;
use zecap_core::linalg::{c, CMat};
use zecap_core::sampling::measure_prepare_real;
use zecap_core::{Channel, SuperactivationReport};

fn zecap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zecap")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &TempDir, name: &str, ch: &Channel) -> PathBuf {
    let path = dir.path().join(format!("{name}.json"));
    ChannelFile::from_channel(name, ch).write(&path).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_identity_and_rejects_bad_files() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id", &Channel::identity(2));
    let o = zecap(&["validate", s(&id), "--json"]);
    assert_eq!(code(&o), 0);
    assert!(stdout_json(&o)["channel"]["tp_residual"].as_f64().unwrap() <= 1e-10);

    let half = write(&dir, "half", &Channel::new(vec![CMat::identity(2, 2) * c(0.5, 0.0)]).unwrap());
    let o = zecap(&["validate", s(&half)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not trace preserving"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name":"b","d_in":2,"d_out":2,"kraus":[[[[1,0],[0,0]],[[0,0],[1]]]]}"#).unwrap();
    let o = zecap(&["validate", s(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("kraus[0][1][1]"));

    assert_eq!(code(&zecap(&["validate", "/nonexistent/file.json"])), 2);
}

#[test]
fn analyze_reports_verdicts() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id", &Channel::identity(2));
    let o = zecap(&["analyze", s(&id), "--json"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["verdict"]["status"], "Positive");
    assert!(r["verdict"]["witness"].is_array());
    assert_eq!(r["verdict"]["complement_dim"], 3);
    let text = String::from_utf8_lossy(&zecap(&["analyze", s(&id)]).stdout).to_string();
    assert!(text.contains("witness ψ"), "{text}");

    let dep = write(&dir, "dep", &Channel::completely_depolarizing(2));
    let o = zecap(&["analyze", s(&dep), "--json", "--restarts", "8", "--seed", "3", "--tol", "1e-11"]);
    let r = stdout_json(&o);
    assert_eq!(r["verdict"]["status"], "Zero");
    assert!((r["verdict"]["margin"].as_f64().unwrap() - 0.5).abs() <= 1e-9);
    // the effective options are echoed
    assert_eq!(r["options"]["support_tol"].as_f64(), Some(1e-11));
    assert_eq!(r["options"]["search"]["restarts"], 8);
    assert_eq!(r["options"]["overlap"]["seed"], 3);
}

#[test]
fn analyze_json_round_trips_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let ch = write(&dir, "r", &Channel::random(3, 2, 5).unwrap());
    let out = dir.path().join("report.json");
    let o = zecap(&["analyze", s(&ch), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let first = std::fs::read_to_string(&out).unwrap();
    let r: Value = serde_json::from_str(&first).unwrap();
    let v: CapacityVerdict = serde_json::from_value(r["verdict"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&v).unwrap(), r["verdict"]);
    zecap(&["analyze", s(&ch), "--out", s(&out)]);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), first);
}

#[test]
fn qubit_complements_obey_the_dimension_bound() {
    let dir = TempDir::new().unwrap();
    for seed in 0..6 {
        let ch = write(&dir, "q", &Channel::random(2, 1 + seed as usize % 3, seed).unwrap());
        let r = stdout_json(&zecap(&["analyze", s(&ch), "--json"]));
        let dim = r["verdict"]["complement_dim"].as_u64().unwrap();
        assert!(dim <= 3);
        if r["verdict"]["subspace_status"] == "NotFound" {
            assert!(dim <= 1);
        }
    }
}

#[test]
fn superactivate_examples() {
    let dir = TempDir::new().unwrap();
    let dep = write(&dir, "dep", &Channel::completely_depolarizing(2));
    let o = zecap(&["superactivate", s(&dep), s(&dep), "--no-fast-path", "--json"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["report"]["conclusion"], "NotSuperactivated");
    assert_eq!(r["theorem_violation"], false);
    let rep: SuperactivationReport = serde_json::from_value(r["report"].clone()).unwrap();
    assert_eq!(rep.joint_verdict.unwrap().complement_dim, 0);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let q = write(&dir, "q", &measure_prepare_real(&mut rng, 2, 3));
    let t = write(&dir, "t", &measure_prepare_real(&mut rng, 3, 6));
    let r = stdout_json(&zecap(&["superactivate", s(&q), s(&t), "--json"]));
    assert_eq!(r["report"]["conclusion"], "TheoremFastPath");
    assert!(r["report"]["fast_path_reason"].is_string());

    let id = write(&dir, "id", &Channel::identity(2));
    let r = stdout_json(&zecap(&["superactivate", s(&id), s(&dep), "--json"]));
    assert_eq!(r["report"]["conclusion"], "NotApplicable");

    assert_eq!(code(&zecap(&["superactivate", s(&dep)])), 2);
    let o = zecap(&["superactivate", s(&dep), s(&dep), "--ambient-cap", "3"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds cap"));
}

#[test]
fn campaign_runs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |out: &Path| {
        vec!["campaign", "--mode", "theorem", "--trials", "6", "--dims", "2,3", "--seed", "7", "--out"]
            .into_iter()
            .map(String::from)
            .chain([s(out).to_string()])
            .collect::<Vec<_>>()
    };
    let run = |out: &Path| {
        let v = args(out);
        zecap(&v.iter().map(String::as_str).collect::<Vec<_>>())
    };
    assert_eq!(code(&run(&a)), 0);
    assert_eq!(code(&run(&b)), 0);
    let ra = std::fs::read_to_string(&a).unwrap();
    let rb = std::fs::read_to_string(&b).unwrap();
    // both reports echo their own --out path
    assert_eq!(ra.replace("a.json", "X"), rb.replace("b.json", "X"));
    let r: Value = serde_json::from_str(&ra).unwrap();
    assert_eq!(r["counts"]["superactivated"], 0);
    assert_eq!(r["counts"]["fastpath"], 6);
    assert!(r.get("wall_time_s").is_none());
}

#[test]
fn campaign_config_file_and_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"mode": "lemma-fuzz", "trials": 20, "seed": 3}"#).unwrap();
    let o = zecap(&["campaign", "--config", s(&cfg), "--json"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["counts"]["zero"], 20);
    assert_eq!(r["counts"]["violation"], 0);

    std::fs::write(&cfg, r#"{"trials": 0}"#).unwrap();
    assert_eq!(code(&zecap(&["campaign", "--config", s(&cfg)])), 2);
    assert_eq!(code(&zecap(&["campaign", "--dims", "1,2"])), 2);
    assert_eq!(code(&zecap(&["campaign", "--mode", "nonsense"])), 2);
}

#[test]
fn random_channel_files() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("r.json");
    assert_eq!(code(&zecap(&["random-channel", "--d-in", "2", "--env-dim", "4", "--seed", "1", "--out", s(&p)])), 0);
    let f = ChannelFile::read(&p).unwrap();
    assert_eq!(f.kraus.len(), 4);
    assert_eq!(f.to_channel().unwrap(), Channel::random(2, 4, 1).unwrap());
    assert_eq!(code(&zecap(&["validate", s(&p)])), 0);

    assert_eq!(code(&zecap(&["random-channel", "--d-in", "3", "--env-dim", "1", "--out", s(&p)])), 0);
    let ch = ChannelFile::read(&p).unwrap().to_channel().unwrap();
    assert_eq!(ch.kraus().len(), 1);
    let k = &ch.kraus()[0];
    assert!((k.adjoint() * k - CMat::identity(3, 3)).norm() < 1e-12);

    assert_eq!(code(&zecap(&["random-channel", "--d-in", "0", "--out", s(&p)])), 2);
}
