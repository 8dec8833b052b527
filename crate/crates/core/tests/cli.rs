mod common;

use common::*;
use local_mellin::cli::{parse_series, run_with_env};
use local_mellin::objects::ObjectJson;
use local_mellin::{Coefficient, ConnectionObject, FieldConfig, Object, Point, PuiseuxSeries, Var};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

fn run(args: &[&str]) -> local_mellin::cli::CliOutput {
    let argv: Vec<String> = std::iter::once("lmellin").chain(args.iter().copied()).map(String::from).collect();
    run_with_env(&argv, None)
}

fn random_series(rng: &mut StdRng) -> PuiseuxSeries {
    let var = [Var::Z, Var::Zx, Var::Zeta, Var::Theta][rng.gen_range(0..4)];
    let ram = rng.gen_range(1..=3);
    let terms: Vec<(i64, Coefficient)> = (0..rng.gen_range(0..5))
        .map(|_| (rng.gen_range(-6..=6), small_rational(rng)))
        .collect();
    let trunc = rng.gen_bool(0.4).then(|| rng.gen_range(7..=9));
    PuiseuxSeries::new(var, ram, terms, trunc).normalize_ram()
}

#[test]
fn text_format_round_trips() {
    let mut rng = StdRng::seed_from_u64(31);
    let cfg = FieldConfig::exact();
    for _ in 0..80 {
        let s = random_series(&mut rng);
        let text = s.to_string();
        let back = parse_series(&text, &cfg, s.var()).unwrap_or_else(|e| panic!("{}: {}", text, e));
        assert_eq!(back, s, "text {}", text);
    }
}

#[test]
fn json_round_trips_exactly() {
    let mut rng = StdRng::seed_from_u64(32);
    let cfg = FieldConfig::exact();
    for _ in 0..60 {
        let s = random_series(&mut rng);
        let text = serde_json::to_string(&s.to_json()).unwrap();
        let back = PuiseuxSeries::from_json(&serde_json::from_str(&text).unwrap(), &cfg).unwrap();
        assert_eq!(back, s);
        assert_eq!(serde_json::to_string(&back.to_json()).unwrap(), text);
    }
    let o = Object::Connection(ConnectionObject::single(Point::Finite(c(2, 1)), series(Var::Zx, 2, &[(-1, 3, 2)])));
    let text = serde_json::to_string(&o.to_json()).unwrap();
    let j: ObjectJson = serde_json::from_str(&text).unwrap();
    assert_eq!(Object::from_json(&j, &cfg).unwrap(), o);
}

#[test]
fn transform_and_inverse() {
    let out = run(&["transform", "--from", "0", "--f", "-z^(-1)"]);
    assert_eq!((out.code, out.stdout.trim()), (0, "theta"));
    let out = run(&["transform", "--from", "1", "--f", "-z^(-1)"]);
    assert_eq!(out.stdout.trim(), "1 + theta^(1/2) + 1/4*theta");
    let out = run(&["transform", "--from", "inf", "--f", "-zeta^(-2)"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let out = run(&["inverse", "--to", "0", "--g", "theta - theta^2"]);
    assert_eq!((out.code, out.stdout.trim()), (0, "-z^(-1)"));
    let out = run(&["--format", "json", "transform", "--from", "0", "--f", "-z^(-1)"]);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["kind"], "diffop");
    assert_eq!(v["components"][0]["series"]["terms"][0][1], "1");
}

#[test]
fn canon_ord_global_oracle() {
    let out = run(&["canon", "--point", "0", "--f", "z^(-1) + 3/2"]);
    assert_eq!(out.stdout.trim(), "z^(-1) + 1/2");
    let out = run(&["ord", "--expr", "nabla", "--point", "0", "--f", "z^(-2)"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("-3"), "{}", out.stdout);
    let out = run(&["global", "--expr", "z*z*D"]);
    assert_eq!(out.stdout.trim(), "-n*P - P");
    let out = run(&["oracle", "--check", "commutation", "--f", "-z^(-1)"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("PASS"));
}

#[test]
fn equiv_reports_witness() {
    let dir = std::env::temp_dir().join(format!("lmellin-equiv-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, f: &PuiseuxSeries| {
        let o = Object::Connection(ConnectionObject::single(Point::Zero, f.clone()));
        let p = dir.join(name);
        std::fs::write(&p, serde_json::to_string(&o.to_json()).unwrap()).unwrap();
        p.to_string_lossy().into_owned()
    };
    let a = write("a.json", &z(1, &[(-1, 1, 1), (0, 1, 3)]));
    let b = write("b.json", &z(1, &[(-1, 1, 1), (0, 4, 3)]));
    let d = write("d.json", &z(1, &[(-1, 2, 1)]));
    assert!(run(&["equiv", &a, &b]).stdout.starts_with("true"));
    assert!(run(&["equiv", &a, &d]).stdout.starts_with("false"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["parse", "z^("]).code, 2);
    assert_eq!(run(&["parse", "z + theta"]).code, 2);
    assert_eq!(run(&["transform", "--from", "0", "--f", "2"]).code, 1);
    assert_eq!(run(&["transform", "--from", "1", "--f", "2"]).code, 1);
    assert_eq!(run(&["inverse", "--to", "0", "--g", "theta^(-1)"]).code, 1);
    assert_eq!(run(&["no-such-command"]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
    let out = run(&["--format", "json", "parse", "z^("]);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["error"]["exit_code"], 2);
}

#[test]
fn batch_mode_processes_each_line() {
    let path = std::env::temp_dir().join(format!("lmellin-batch-{}.jsonl", std::process::id()));
    let obj = |f: &PuiseuxSeries| {
        serde_json::to_string(&Object::Connection(ConnectionObject::single(Point::Zero, f.clone())).to_json()).unwrap()
    };
    let lines = [obj(&z(1, &[(-1, -1, 1)])), obj(&z(1, &[(-1, 1, 1)]))];
    std::fs::write(&path, lines.join("\n")).unwrap();
    let out = run(&["transform", "--from", "0", "--batch", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.code, 0, "{}", out.stderr);
    let results: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(results, vec!["theta", "-theta"]);
}

#[test]
fn field_selection_from_environment() {
    let argv: Vec<String> = ["lmellin", "transform", "--from", "0", "--f", "2*z^(-2)"].iter().map(|s| s.to_string()).collect();
    let exact = run_with_env(&argv, None);
    assert_eq!(exact.code, 1, "sqrt(-2) is not rational");
    let approx = run_with_env(&argv, Some("cc".into()));
    assert_eq!(approx.code, 0, "{}", approx.stderr);
    assert!(approx.stdout.contains("1.41421356237"), "{}", approx.stdout);
    let mut flag = argv.clone();
    flag.splice(1..1, ["--field".to_string(), "qq".to_string()]);
    assert_eq!(run_with_env(&flag, Some("cc".into())).code, 1, "--field wins over the environment");
    assert_eq!(run_with_env(&argv, Some("rr".into())).code, 1);
}
