use std::path::PathBuf;
use std::process::Command;
use wavehom::config::RunConfig;
use wavehom::harness::{load_config, run_command, CSV_HEADER};
use wavehom::Error;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wavehom-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn config_text_round_trips() {
    let mut cfg = RunConfig::default();
    cfg.apply_overrides(&["eps=0.25,0.125", "k_criminal=3", "psi1=2,3", "medium=constant(2)", "window=30,600"]).unwrap();
    let back = RunConfig::from_text(&cfg.to_text()).unwrap();
    assert_eq!(back.to_text(), cfg.to_text());
    assert_eq!(back.eps, vec![0.25, 0.125]);
    assert_eq!(back.k_criminal, 3);
    assert_eq!(back.window, (30.0, 600.0));
}

#[test]
fn bad_configuration_is_rejected() {
    let mut cfg = RunConfig::default();
    assert!(cfg.set("no_such_key", "1").is_err());
    assert!(cfg.set("alpha", "abc").is_err());
    assert!(matches!(load_config(None, &["longtime_eps=2".to_string()]), Err(Error::Invalid(_))));
    assert!(load_config(None, &["alpha".to_string()]).is_err());
}

#[test]
fn manifest_reloads_as_the_same_configuration() {
    let out = scratch("manifest");
    let cfg = load_config(None, &["medium=constant(1.5)".into(), "cell_n=16".into(), format!("out={}", out.display())]).unwrap();
    let (rep, dir) = run_command("cell", &cfg).unwrap();
    assert!(rep.passed(), "{}", rep.summary());
    let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert_eq!(RunConfig::from_text(&manifest).unwrap().to_text(), cfg.to_text());
    assert!(manifest.contains("# status: pass"));
    assert!(manifest.contains("# file errors.csv: sha256 "));
    let csv = std::fs::read_to_string(dir.join("errors.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert_eq!(CSV_HEADER, "eps,t,method,energy_error,l2_error");
    let _ = std::fs::remove_dir_all(out);
}

#[test]
fn structural_commands_pass_on_defaults() {
    let out = scratch("structural");
    let cfg = load_config(None, &[format!("out={}", out.display())]).unwrap();
    for name in ["cell", "correctors", "operators", "normal-form", "classical", "criminal"] {
        let (rep, _) = run_command(name, &cfg).unwrap();
        assert!(rep.passed(), "{name}:\n{}", rep.summary());
        assert!(!rep.checks.is_empty(), "{name}");
    }
    assert!(run_command("nonsense", &cfg).is_err());
    let _ = std::fs::remove_dir_all(out);
}

#[test]
fn constant_medium_orders_are_undefined() {
    let out = scratch("constant");
    let cfg = load_config(
        None,
        &["medium=constant(2)".into(), "cell_n=16".into(), "eps=0.25,0.125".into(), "times=2".into(), "cell_modes=8".into(), format!("out={}", out.display())],
    )
    .unwrap();
    let (rep, _) = run_command("compare", &cfg).unwrap();
    for m in ["classical", "criminal"] {
        assert!(rep.find_value(&format!("{m}_order_t2")).unwrap().starts_with("undefined"));
        assert!(rep.find_fit(&format!("{m}_order_t2")).is_none());
        assert!(rep.rows_for(m).iter().all(|r| r.energy_error <= 1e-9));
    }
    let _ = std::fs::remove_dir_all(out);
}

#[test]
fn binary_exit_codes_follow_the_checks() {
    let bin = env!("CARGO_BIN_EXE_wavehom");
    let out = scratch("cli");
    let ok = Command::new(bin).args(["cell", "--out"]).arg(&out).arg("cell_n=32").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let text = String::from_utf8_lossy(&ok.stdout);
    assert!(text.lines().any(|l| l.starts_with("PASS ")), "{text}");
    assert!(!text.contains("FAIL "));

    let conf = out.join("drift.conf");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(&conf, "# impossible drift bound\ndrift_max = 0\n").unwrap();
    let fail = Command::new(bin).args(["dns", "--config"]).arg(&conf).arg("--out").arg(&out).args(["eps=0.25", "times=2"]).output().unwrap();
    assert_eq!(fail.status.code(), Some(1), "{}", String::from_utf8_lossy(&fail.stdout));
    assert!(String::from_utf8_lossy(&fail.stdout).contains("FAIL "));

    let bad = Command::new(bin).args(["cell", "no_such_key=1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(out);
}
