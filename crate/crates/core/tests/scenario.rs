use std::path::PathBuf;

use nullinf::scenario::*;
use nullinf::Error;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const STATIC: &str = r#"
outputs = ["longrange"]

[grid]
sphere = [16, 32]

[scenario]
kind = "static-charge"
charge = [1.0, 0.0]
"#;

fn config_error(text: &str) -> bool {
    matches!(ScenarioConfig::from_toml(text), Err(Error::Config(_)))
}

#[test]
fn shipped_configs_load() {
    for name in ["static_charge", "particle_kink", "gaussian_pulse", "dirac_packet", "composite"] {
        let cfg = ScenarioConfig::load(&configs().join(format!("{name}.toml"))).unwrap();
        assert!(!cfg.blocks().unwrap().is_empty(), "{name}");
    }
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(config_error(&STATIC.replace("[16, 32]", "[4, 32]")));
    assert!(config_error(&STATIC.replace("[16, 32]", "[16, 300]")));
    assert!(config_error(&STATIC.replace("charge = [1.0, 0.0]", "charge = [1.0, 0.0]\nspin = 2")));
    assert!(config_error(&STATIC.replace("static-charge", "monopole")));
    let shift = ScenarioConfig::from_toml(&STATIC.replace("[\"longrange\"]", "[\"shift\"]")).unwrap();
    assert!(matches!(shift.blocks(), Err(Error::Config(_))));
    assert!(matches!(run_scenario(&shift), Err(Error::Config(_))));
    assert!(config_error(&format!("{STATIC}\n[frame]\nt = [0.0, 1.0, 0.0, 0.0]\n")));
    assert!(config_error(&format!("{STATIC}\n[tolerances]\nphi = -1.0\n")));
    assert!(config_error(
        "[scenario]\nkind = \"particle-kink\"\ncharge = [1.0, 0.0]\nrapidity = 1.0\naxis = [0.0, 0.0, 0.0]\n"
    ));
    assert!(config_error(
        "[scenario]\nkind = \"particle-kink\"\ncharge = [1.0, 0.0]\nrapidity = 1.0\n[scenario.probe]\nmass = 0.0\n"
    ));
    assert!(config_error("[scenario]\nkind = \"composite\"\nparts = []\n"));
    assert!(config_error("[scenario\nkind ="));
    assert_eq!(ScenarioConfig::from_toml("x = 1").unwrap_err().exit_code(), 2);
}

#[test]
fn hash_ignores_layout_and_normalization() {
    let a = ScenarioConfig::from_toml(STATIC).unwrap();
    let b = ScenarioConfig::from_toml(&format!("# comment\n{STATIC}\n[frame]\nt = [2.0, 0.0, 0.0, 0.0]\n")).unwrap();
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
    let c = ScenarioConfig::from_toml(&STATIC.replace("[1.0, 0.0]", "[1.5, 0.0]")).unwrap();
    assert_ne!(a.hash(), c.hash());
}

#[test]
fn requested_blocks_are_sorted_and_checked() {
    let text = STATIC.replace("[\"longrange\"]", "[\"longrange\", \"radiate\", \"longrange\"]");
    let cfg = ScenarioConfig::from_toml(&text).unwrap();
    assert_eq!(cfg.blocks().unwrap(), vec![Block::Radiate, Block::Longrange]);
    let all = ScenarioConfig::from_toml(&STATIC.replace("outputs = [\"longrange\"]", "")).unwrap();
    assert_eq!(all.blocks().unwrap(), all.applicable());
}

#[test]
fn static_charge_report() {
    let cfg = ScenarioConfig::from_toml(STATIC).unwrap();
    let report = run_scenario(&cfg).unwrap();
    assert!((report.get("q.mean").unwrap() - 1.0).abs() < 1e-8);
    assert!(report.violations.is_empty(), "{:?}", report.violations);
    assert_eq!(report.provenance.config_hash, cfg.hash());
    assert_eq!(report.provenance.sphere_grid, [16, 32]);
    assert_eq!(report.provenance.blocks, vec![Block::Longrange]);
    let table = report.render(ReportFormat::Table).unwrap();
    assert!(table.starts_with("name,value,error\n"));
    let json: serde_json::Value = serde_json::from_str(&report.render(ReportFormat::Structured).unwrap()).unwrap();
    assert!(json["values"]["q.mean"]["value"].is_number());
}

#[test]
fn tightened_tolerances_produce_violations() {
    let mut cfg = ScenarioConfig::from_toml(STATIC).unwrap();
    cfg.tolerances = cfg.tolerances.scaled(1e-30);
    let report = run_scenario(&cfg).unwrap();
    assert!(!report.violations.is_empty());
    let expected = Tolerances::default().scaled(1e-30).table();
    assert_eq!(report.provenance.tolerances, expected);
    for v in &report.violations {
        assert!(v.value > v.tolerance);
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let cfg = ScenarioConfig::from_toml(STATIC).unwrap();
    let texts: Vec<String> = [1, 3]
        .into_iter()
        .map(|n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            pool.install(|| run_scenario(&cfg).unwrap().render(ReportFormat::Table).unwrap())
        })
        .collect();
    assert_eq!(texts[0], texts[1]);
}
