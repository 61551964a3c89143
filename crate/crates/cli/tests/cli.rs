use std::collections::BTreeMap;
use std::process::{Command, Output};

use fq_junta_cli::config::{parse_config_text, RunConfig, Source};

fn fqj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fqj"))
        .args(args)
        .env_remove("FQJ_SEED")
        .output()
        .expect("run fqj")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_is_deterministic() {
    for kind in ["junta", "ldme", "lbp"] {
        let args = ["gen", "--kind", kind, "--q", "3", "--n", "6", "--k", "2", "--N", "20", "--d", "64", "--seed", "11"];
        let (a, b) = (fqj(&args), fqj(&args));
        assert!(a.status.success(), "{kind}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(stdout(&a), stdout(&b), "{kind}");
        let other = fqj(&["gen", "--kind", kind, "--q", "3", "--n", "6", "--k", "2", "--N", "20", "--d", "64", "--seed", "12"]);
        assert_ne!(stdout(&a), stdout(&other), "{kind}");
    }
}

#[test]
fn generated_instance_is_learned() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.junta");
    let p = path.to_str().unwrap();
    assert!(fqj(&["gen", "--q", "2", "--n", "8", "--k", "2", "--seed", "3", "--out", p]).status.success());
    let o = fqj(&["learn", "--instance", p, "--profile", "desk", "--seed", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("trial=0 ")).expect("trial line");
    let fields: BTreeMap<&str, &str> = line.split(' ').filter_map(|t| t.split_once('=')).collect();
    assert!(fields["R"].starts_with('[') && fields["R"].ends_with(']'), "{line}");
    assert!(fields["loops"].parse::<usize>().is_ok(), "{line}");
    assert!(fields["examples"].parse::<u64>().is_ok(), "{line}");
    assert_eq!(fields["verdict"], "exact", "{line}");
    assert_eq!(fields["R"], fields["truth"], "{line}");
}

#[test]
fn learn_reports_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# desk run\nq = 3\nn = 6\nk = 1\nprofile = desk\ntrials = 2\nseed = 9\n").unwrap();
    let c = cfg.to_str().unwrap();
    let a = fqj(&["learn", "--config", c, "--n", "7"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let out = stdout(&a);
    for want in ["command=learn", "config q=3", "config n=7", "config k=1", "config seed=9", "config seed_source=file"] {
        assert!(out.lines().any(|l| l == want), "missing {want:?} in\n{out}");
    }
    assert_eq!(out.lines().filter(|l| l.starts_with("trial=")).count(), 2);
    // The echoed config reproduces the run.
    let b = fqj(&["learn", "--config", c, "--n", "7"]);
    assert_eq!(out, stdout(&b));
}

#[test]
fn seed_comes_from_the_environment_last() {
    let o = Command::new(env!("CARGO_BIN_EXE_fqj"))
        .args(["lbp", "--N", "10", "--d", "128", "--rho", "0.8"])
        .env("FQJ_SEED", "77")
        .output()
        .unwrap();
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "config seed=77"), "{out}");
    assert!(out.lines().any(|l| l == "config seed_source=env"), "{out}");
    let o = Command::new(env!("CARGO_BIN_EXE_fqj"))
        .args(["lbp", "--N", "10", "--d", "128", "--rho", "0.8", "--seed", "4"])
        .env("FQJ_SEED", "77")
        .output()
        .unwrap();
    assert!(stdout(&o).lines().any(|l| l == "config seed_source=flag"));
}

#[test]
fn precedence_is_flag_file_env_default() {
    let file = parse_config_text("q = 5\nseed = 3\nn = 9\n").unwrap();
    let flags: BTreeMap<String, String> = [("q".to_string(), "7".to_string())].into();
    let cfg = RunConfig::resolve(&flags, &file, Some("12".into())).unwrap();
    assert_eq!((cfg.raw("q"), cfg.source("q")), ("7", Source::Flag));
    assert_eq!((cfg.raw("n"), cfg.source("n")), ("9", Source::File));
    assert_eq!((cfg.raw("seed"), cfg.source("seed")), ("3", Source::File));
    assert_eq!(cfg.source("k"), Source::Default);
    let cfg = RunConfig::resolve(&BTreeMap::new(), &BTreeMap::new(), Some("12".into())).unwrap();
    assert_eq!((cfg.raw("seed"), cfg.source("seed")), ("12", Source::Env));
}

#[test]
fn bad_config_files_are_rejected() {
    for text in ["q 3", "nope = 1", "q = 2\nq = 3", "q = ", "q = 2 3"] {
        assert!(parse_config_text(text).is_err(), "{text:?}");
    }
}

#[test]
fn verify_all_passes_and_errors_exit_two() {
    let o = fqj(&["verify", "--all", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().last().unwrap().ends_with("status=pass"));
    assert_eq!(fqj(&["verify", "--suite", "nonexistent"]).status.code(), Some(2));
    assert_eq!(fqj(&["learn", "--q", "6"]).status.code(), Some(2));
    assert_eq!(fqj(&["learn", "--bogus"]).status.code(), Some(2));
}

#[test]
fn unmet_success_threshold_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("three.junta");
    let p = path.to_str().unwrap();
    assert!(fqj(&["gen", "--q", "2", "--n", "5", "--k", "3", "--seed", "2", "--out", p]).status.success());
    // A 3-junta learned with k = 1 cannot come out exact.
    let o = fqj(&["learn", "--instance", p, "--k", "1", "--profile", "desk", "--min-success", "1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}
