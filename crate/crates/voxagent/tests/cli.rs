use std::path::{Path, PathBuf};

use serde_json::Value;
use voxagent::cli::run;
use voxagent_core::skills::SkillLibrary;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn voxagent(args: &[&str]) -> Out {
    let mut argv = vec!["voxagent"];
    argv.extend_from_slice(args);
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = run(argv, &mut o, &mut e);
    Out {
        code,
        stdout: String::from_utf8(o).unwrap(),
        stderr: String::from_utf8(e).unwrap(),
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scripts/configs")
}

#[test]
fn help_lists_every_subcommand() {
    let out = voxagent(&["--help"]);
    assert_eq!(out.code, 0);
    for cmd in [
        "unit-tests",
        "resources",
        "building",
        "render",
        "dsl-run",
        "verify",
        "inspect-skills",
        "replay",
    ] {
        assert!(out.stdout.contains(cmd), "{cmd} missing from help:\n{}", out.stdout);
    }
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["unit-tests", "--no-such-flag"][..],
        &["frobnicate"],
        &["resources", "--world-kind", "lava"],
        &["unit-tests", "--max-retries", "many"],
    ] {
        let out = voxagent(args);
        assert_eq!(out.code, 1, "{args:?}");
        assert!(
            out.stderr.to_lowercase().contains("usage") || out.stderr.contains("error"),
            "{args:?}: {}",
            out.stderr
        );
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn invalid_config_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"max_retries": 0}"#).unwrap();
    let out = voxagent(&["unit-tests", "--config", s(&cfg), "--print-config"]);
    assert_eq!(out.code, 1);

    std::fs::write(&cfg, "{ not json").unwrap();
    let out = voxagent(&["unit-tests", "--config", s(&cfg), "--print-config"]);
    assert_eq!(out.code, 1);

    let out = voxagent(&[
        "unit-tests",
        "--config",
        s(&dir.path().join("missing.json")),
        "--print-config",
    ]);
    assert_eq!(out.code, 1);
}

fn effective(args: &[&str]) -> Value {
    let out = voxagent(args);
    assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

#[test]
fn precedence_flag_over_config_over_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{
            "max_retries": 5,
            "skill_top_k": 2,
            "image_width": 64,
            "prompt_variant": "voyager",
            "world_kind": "flat",
            "seed": 7,
            "out_dir": "from_config",
            "backend": {"model": "config-model", "temperature": 0.5}
        }"#,
    )
    .unwrap();
    let cases: &[(&str, &str, &str, Value, Value, Value)] = &[
        ("/max_retries", "--max-retries", "9", 3.into(), 5.into(), 9.into()),
        ("/skill_top_k", "--skill-top-k", "1", 5.into(), 2.into(), 1.into()),
        ("/image_width", "--image-width", "48", 320.into(), 64.into(), 48.into()),
        (
            "/prompt_variant",
            "--prompt-variant",
            "voyager_gpt4o",
            "voyagervision".into(),
            "voyager".into(),
            "voyager_gpt4o".into(),
        ),
        (
            "/world_kind",
            "--world-kind",
            "regular",
            "regular".into(),
            "flat".into(),
            "regular".into(),
        ),
        ("/seed", "--seed", "11", Value::Null, 7.into(), 11.into()),
        (
            "/out_dir",
            "--out",
            "from_flag",
            "runs".into(),
            "from_config".into(),
            "from_flag".into(),
        ),
        (
            "/backend/model",
            "--model",
            "flag-model",
            "gpt-4o".into(),
            "config-model".into(),
            "flag-model".into(),
        ),
        (
            "/backend/temperature",
            "--temperature",
            "0.25",
            0.0.into(),
            0.5.into(),
            0.25.into(),
        ),
    ];
    for (ptr, flag, value, default, from_cfg, from_flag) in cases {
        let d = effective(&["resources", "--print-config"]);
        assert_eq!(d.pointer(ptr), Some(default), "default {ptr}");
        let c = effective(&["resources", "--config", s(&cfg), "--print-config"]);
        assert_eq!(c.pointer(ptr), Some(from_cfg), "config {ptr}");
        let f = effective(&["resources", "--config", s(&cfg), flag, value, "--print-config"]);
        assert_eq!(f.pointer(ptr), Some(from_flag), "flag {ptr}");
        // keys not named on the command line keep their config values
        if *ptr != "/max_retries" {
            assert_eq!(f.pointer("/max_retries"), Some(&Value::from(5)));
        }
    }
}

#[test]
fn global_flags_before_or_after_the_subcommand() {
    let before = effective(&["--seed", "4", "unit-tests", "--print-config"]);
    let after = effective(&["unit-tests", "--seed", "4", "--print-config"]);
    assert_eq!(before, after);
    assert_eq!(before.pointer("/seeds/flat"), Some(&serde_json::json!([4])));
    assert_eq!(before.pointer("/seeds/regular"), Some(&serde_json::json!([4])));
    // the later occurrence wins
    let both = effective(&["--seed", "4", "unit-tests", "--seed", "6", "--print-config"]);
    assert_eq!(both.pointer("/seeds/flat"), Some(&serde_json::json!([6])));
}

#[test]
fn shipped_configs_resolve() {
    for (name, cmd) in [
        ("unit_tests_reference.json", "unit-tests"),
        ("unit_tests_adversarial.json", "unit-tests"),
        ("resources.json", "resources"),
        ("building.json", "building"),
        ("live_gpt4o.json", "building"),
    ] {
        let path = configs().join(name);
        let v = effective(&[cmd, "--config", s(&path), "--print-config"]);
        assert!(v.get("backend").is_some(), "{name}");
    }
}

#[test]
fn render_is_deterministic_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.ppm");
    let b = dir.path().join("b.ppm");
    for p in [&a, &b] {
        let out = voxagent(&[
            "render",
            "--world-kind",
            "flat",
            "--seed",
            "2",
            "--width",
            "32",
            "--height",
            "24",
            "--out",
            s(p),
        ]);
        assert_eq!(out.code, 0, "{}", out.stderr);
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let header = b"P6\n32 24\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 32 * 24 * 3);

    let png = dir.path().join("c.png");
    let out = voxagent(&["render", "--world-kind", "flat", "--seed", "2", "--out", s(&png)]);
    assert_eq!(out.code, 0);
    assert_eq!(&std::fs::read(&png).unwrap()[..8], b"\x89PNG\r\n\x1a\n");

    let out = voxagent(&["render", "--width", "4", "--height", "4", "--out", s(&a)]);
    assert_eq!(out.code, 1);
}

#[test]
fn dsl_run_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.act");
    std::fs::write(&empty, "").unwrap();
    let before = dir.path().join("before.json");
    let out = voxagent(&[
        "dsl-run",
        s(&empty),
        "--world-kind",
        "flat",
        "--seed",
        "1",
        "--out",
        s(&before),
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("status: ok"));

    let prog = dir.path().join("pole.act");
    std::fs::write(
        &prog,
        voxagent::reference::program(
            voxagent_core::verify::Template::Pole,
            voxagent_core::world::WorldKind::Flat,
        ),
    )
    .unwrap();
    let after = dir.path().join("after.json");
    let out = voxagent(&[
        "dsl-run",
        s(&prog),
        "--snapshot",
        s(&before),
        "--give",
        "oak_planks=64",
        "--give",
        "dirt=64",
        "--out",
        s(&after),
    ]);
    assert_eq!(out.code, 0, "{}\n{}", out.stdout, out.stderr);
    assert!(
        out.stdout.contains("chat: building a 3 block wooden plank pole"),
        "{}",
        out.stdout
    );

    let verdict = |template: &str| {
        let out = voxagent(&[
            "verify",
            "--template",
            template,
            "--before",
            s(&before),
            "--after",
            s(&after),
        ]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        serde_json::from_str::<Value>(&out.stdout).unwrap()
    };
    assert_eq!(verdict("pole")["success"], Value::Bool(true));
    assert_eq!(verdict("wall")["success"], Value::Bool(false));
    // nothing was built between a snapshot and itself
    let out = voxagent(&[
        "verify",
        "--template",
        "pole",
        "--before",
        s(&after),
        "--after",
        s(&after),
    ]);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["success"], Value::Bool(false));

    let out = voxagent(&[
        "verify",
        "--template",
        "tower",
        "--before",
        s(&before),
        "--after",
        s(&after),
    ]);
    assert_eq!(out.code, 1);
}

#[test]
fn dsl_run_errors() {
    let dir = tempfile::tempdir().unwrap();
    let prog = dir.path().join("p.act");

    // runtime failure: nothing to place
    std::fs::write(&prog, "chat(\"start\");\nplace(\"oak_planks\", rel(1, 0, 0));\n").unwrap();
    let out = voxagent(&["dsl-run", s(&prog), "--world-kind", "flat"]);
    assert_eq!(out.code, 2, "{}", out.stdout);
    assert!(out.stdout.contains("chat: start"));
    let status = out.stdout.lines().find(|l| l.starts_with("status:")).unwrap();
    assert!(status.contains("line 2"), "{status}");

    // static failure: unknown variable
    std::fs::write(&prog, "chat(nowhere);").unwrap();
    let out = voxagent(&["dsl-run", s(&prog)]);
    assert_eq!(out.code, 1);

    // syntax failure
    std::fs::write(&prog, "repeat {").unwrap();
    let out = voxagent(&["dsl-run", s(&prog)]);
    assert_eq!(out.code, 1);

    // step budget
    std::fs::write(&prog, "repeat 256 as i { repeat 256 as j { chat(\"x\"); } }").unwrap();
    let out = voxagent(&["dsl-run", s(&prog), "--max-steps", "50"]);
    assert_eq!(out.code, 2);
    assert!(out.stdout.lines().any(|l| l == "steps: 50"), "{}", out.stdout);
    assert!(out.stdout.contains("step budget exhausted"));

    let out = voxagent(&["dsl-run", s(&prog), "--give", "oak_planks"]);
    assert_eq!(out.code, 1);
}

#[test]
fn inspect_skills_lists_library() {
    let mut lib = SkillLibrary::default();
    lib.add_skill("Build a pole", "fn build_pole() { chat(\"pole\"); }\nbuild_pole();", 3)
        .unwrap();
    lib.add_skill("Mine some logs", "fn mine_logs() { chat(\"logs\"); }\nmine_logs();", 4)
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("skills.json");
    std::fs::write(&path, lib.to_json()).unwrap();

    let out = voxagent(&["inspect-skills", s(&path)]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("build_pole (iteration 3)"), "{}", out.stdout);
    assert!(out.stdout.contains("mine_logs (iteration 4)"));
    assert!(out.stdout.trim_end().ends_with("2 skills"));
    assert!(!out.stdout.contains("| "));

    let out = voxagent(&["inspect-skills", s(&path), "--source"]);
    assert!(out.stdout.contains("    | fn build_pole()"), "{}", out.stdout);
}

#[test]
fn unit_test_run_writes_artifacts_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("unit_tests_adversarial.json");
    let out = voxagent(&["unit-tests", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("1(0)/1"), "{}", out.stdout);

    let run = dir.path().join("run_unit_tests");
    for f in [
        "config.json",
        "report.md",
        "report.json",
        "report.csv",
        "transcript.jsonl",
        "records.json",
    ] {
        assert!(run.join(f).is_file(), "{f} missing");
    }
    let csv = std::fs::read_to_string(run.join("report.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("task,world_kind,seed,reported,true"));
    assert_eq!(csv.lines().nth(1), Some("pole,flat,1,1,0"));
    for line in std::fs::read_to_string(run.join("transcript.jsonl")).unwrap().lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        for key in [
            "trial",
            "iteration",
            "round",
            "role",
            "prompt_hash",
            "response",
            "screenshot",
        ] {
            assert!(v.get(key).is_some(), "{key} missing in {line}");
        }
        if let Some(shot) = v["screenshot"].as_str() {
            assert!(run.join(shot).is_file(), "{shot}");
        }
    }

    let out = voxagent(&["replay", s(&run)]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.starts_with("ok "), "{}", out.stdout);

    // tamper with the recorded inventory; replay must notice
    let records = run.join("records.json");
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&records).unwrap()).unwrap();
    v[0]["iterations"][0]["inventory"] = Value::String("7 diamond".into());
    std::fs::write(&records, serde_json::to_string(&v).unwrap()).unwrap();
    let out = voxagent(&["replay", s(&records)]);
    assert_eq!(out.code, 2, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.contains("MISMATCH"));
    assert!(out.stdout.contains("inventory differs"));

    let out = voxagent(&["replay", s(&dir.path().join("nope"))]);
    assert_eq!(out.code, 1);
}
