use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_alphadyn");

const SMALL: &str = "\
[spectrum]
profile = constant 1.0
n = 40
c_star_min = 4.0
c_star_max = 5.0
c_star_steps = 6
ep_refine_n = 0

[check]
n = 40

[evolve]
c = 20
d = 6
n = 40
dt = 2e-4
t_end = 6
seed = 11
snapshot_times = 3, 6

[reversals]
t_min = 1
";

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("ALPHADYN_THREADS").output().expect("spawn alphadyn")
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    assert_eq!(run(&["evolve", "--no-such-flag"]).status.code(), Some(2));

    let bad = write_cfg(tmp.path(), "bad.cfg", "[evolve]\ndt = -1\n");
    let o = run(&["evolve", "--config", &bad, "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dt"));

    let garbled = write_cfg(tmp.path(), "garbled.cfg", "[evolve]\nc = 1\nthis is not a pair\n");
    let o = run(&["evolve", "--config", &garbled, "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":3"), "{}", String::from_utf8_lossy(&o.stderr));

    let empty = write_cfg(tmp.path(), "empty.cfg", "[spectrum]\nc_star_min = 2\nc_star_max = 1\n");
    assert_eq!(run(&["spectrum", "--config", &empty, "--out", s(&out)]).status.code(), Some(2));

    let blow = write_cfg(
        tmp.path(),
        "blow.cfg",
        "[evolve]\nc = 20\nquench = false\nn = 40\ndt = 5e-4\nt_end = 30\n",
    );
    assert_eq!(run(&["evolve", "--config", &blow, "--out", s(&out)]).status.code(), Some(3));

    assert_eq!(run(&["evolve", "--threads", "0", "--out", s(&out)]).status.code(), Some(2));

    let small = write_cfg(tmp.path(), "small.cfg", SMALL);
    assert_eq!(run(&["check", "--config", &small, "--out", s(&out)]).status.code(), Some(0));
}

#[test]
fn same_seed_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "small.cfg", SMALL);
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert!(run(&["reversals", "--config", &cfg, "--out", s(&a)]).status.success());
    let o = Command::new(BIN)
        .args(["reversals", "--config", &cfg, "--out", s(&b)])
        .env("ALPHADYN_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    for f in ["timeseries.csv", "events.csv", "stack.csv", "alpha_snapshot_000.csv", "reversals_summary.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(run(&["reversals", "--config", &cfg, "--out", s(&c), "--seed", "12"]).status.success());
    assert_ne!(fs::read(a.join("timeseries.csv")).unwrap(), fs::read(c.join("timeseries.csv")).unwrap());
}

#[test]
fn spectrum_outputs_and_thread_independence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "small.cfg", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["spectrum", "--config", &cfg, "--out", s(&a), "--threads", "1"]).status.success());
    assert!(run(&["spectrum", "--config", &cfg, "--out", s(&b), "--threads", "3"]).status.success());
    let spec = fs::read_to_string(a.join("spectrum.csv")).unwrap();
    assert_eq!(spec, fs::read_to_string(b.join("spectrum.csv")).unwrap());
    assert!(spec.starts_with("C_star,branch_id,re_lambda,im_lambda\n"));
    // 6 parameters, k = 6 branches
    assert_eq!(spec.lines().count(), 1 + 36);
    let eps = fs::read_to_string(a.join("eps.csv")).unwrap();
    assert!(eps.starts_with("C_star_ep,re_lambda_ep,branch_a,branch_b"));
    let summary = fs::read_to_string(a.join("spectrum_summary.txt")).unwrap();
    assert!(summary.contains("zero_growth_crossings = 1"));
}

#[test]
fn replot_reproduces_the_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "small.cfg", SMALL);
    let out = tmp.path().join("out");
    let first = run(&["reversals", "--config", &cfg, "--out", s(&out)]);
    assert!(first.status.success());
    let events = fs::read(out.join("events.csv")).unwrap();
    let replot = run(&["reversals", "--config", &cfg, "--out", s(&out), "--replot"]);
    assert!(replot.status.success());
    assert_eq!(fs::read(out.join("events.csv")).unwrap(), events);
    let tail = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .filter(|l| !l.starts_with("source"))
            .map(str::to_owned)
            .collect::<Vec<_>>()
    };
    assert_eq!(tail(&first), tail(&replot));

    let ev = run(&["evolve", "--config", &cfg, "--out", s(&out), "--replot"]);
    assert!(ev.status.success());
    assert!(String::from_utf8_lossy(&ev.stdout).contains("sign_changes"));

    let missing = tmp.path().join("nothing");
    assert_eq!(run(&["evolve", "--out", s(&missing), "--replot"]).status.code(), Some(2));
}

#[test]
fn checkpoint_resume_matches_a_straight_run() {
    let tmp = tempfile::tempdir().unwrap();
    let ck = tmp.path().join("state.ckpt");
    let base = "[evolve]\nc = 20\nd = 6\nn = 40\ndt = 2e-4\nseed = 5\n";
    let straight = write_cfg(tmp.path(), "s.cfg", &format!("{base}t_end = 2\n"));
    let first = write_cfg(tmp.path(), "f.cfg", &format!("{base}t_end = 1\ncheckpoint = {}\n", s(&ck)));
    let second = write_cfg(tmp.path(), "r.cfg", &format!("{base}t_end = 2\nresume = {}\n", s(&ck)));
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert!(run(&["evolve", "--config", &straight, "--out", s(&a)]).status.success());
    assert!(run(&["evolve", "--config", &first, "--out", s(&b)]).status.success());
    assert!(ck.exists());
    assert!(run(&["evolve", "--config", &second, "--out", s(&c)]).status.success());
    let last = |p: &Path| fs::read_to_string(p.join("timeseries.csv")).unwrap().lines().last().unwrap().to_owned();
    assert_eq!(last(&a), last(&c));

    let wrong = write_cfg(tmp.path(), "w.cfg", &format!("{base}c = 21\nt_end = 2\nresume = {}\n", s(&ck)));
    assert_eq!(run(&["evolve", "--config", &wrong, "--out", s(&c)]).status.code(), Some(2));
}

#[test]
fn json_output_and_no_temp_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "small.cfg", SMALL);
    let out = tmp.path().join("out");
    assert!(run(&["check", "--config", &cfg, "--out", s(&out), "--format", "json"]).status.success());
    let v: serde_json::Value = serde_json::from_slice(&fs::read(out.join("check.json")).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["criterion"], "anti_dynamo");
    let sv: serde_json::Value = serde_json::from_slice(&fs::read(out.join("check_summary.json")).unwrap()).unwrap();
    assert_eq!(sv["l"], 1);
    for e in fs::read_dir(&out).unwrap() {
        let name = e.unwrap().file_name().into_string().unwrap();
        assert!(!name.starts_with('.') && !name.contains("tmp"), "leftover {name}");
    }
}

#[test]
fn repro_runs_selected_entries() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&["repro", "--only", "constant", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = fs::read_to_string(out.join("constant_check/config.cfg")).unwrap();
    let parsed = alphadyn_cli::RunConfig::parse(&cfg, Path::new("config.cfg")).unwrap();
    assert_eq!(parsed.check.profile.to_string(), "constant 1.0");
    let summary = fs::read_to_string(out.join("repro_summary.txt")).unwrap();
    assert!(summary.contains("constant_sweep.zero_growth_0.c_star"));
    assert!(!summary.contains("kinematic_check"));
    let out2 = tmp.path().join("out2");
    assert!(run(&["repro", "--only", "kinematic_check", "--out", s(&out2)]).status.success());
    let summary = fs::read_to_string(out2.join("repro_summary.txt")).unwrap();
    assert!(summary.contains("kinematic_check.anti_dynamo.satisfied = false"));
    assert_eq!(run(&["repro", "--only", "zzz", "--out", s(&out)]).status.code(), Some(2));
    let list = run(&["repro", "--list"]);
    assert_eq!(String::from_utf8_lossy(&list.stdout).lines().count(), alphadyn_cli::repro_entries().len());
}
