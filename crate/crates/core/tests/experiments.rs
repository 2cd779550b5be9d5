use softbec::experiments::report::Outcome;
use softbec::experiments::{run_experiment, run_gap_law, ExperimentConfig, ExperimentReport};
use softbec::Error;

const GAP_LAW: &str = r#"
kind = "gap_law"
[run]
box_lengths = [50.0, 200.0]
trials = 300
seed = 11
[gap_law]
iid_trials = 500
iid_gaps = 100
"#;

const ENERGY_BOUNDS: &str = r#"
kind = "energy_bounds"
[model]
shape = "box"
strength = [50.0, 1000000.0]
[run]
box_lengths = [60.0, 80.0]
trials = 12
seed = 12
"#;

const FREE: &str = r#"
kind = "energy_bounds"
[model]
strength = 0.0
[run]
box_lengths = [40.0]
trials = 5
"#;

const CONDENSATION: &str = r#"
kind = "condensation"
[model]
shape = "luttinger_sy"
[thermo]
density_factor = 2.0
[run]
sizes = [20, 40]
trials = 15
seed = 13
"#;

const CONDENSATION_SOFT: &str = r#"
kind = "condensation"
[model]
shape = "triangle"
strength = "ln"
[thermo]
density = 0.3
beta = 2.0
[run]
sizes = [10, 20]
trials = 6
seed = 14
"#;

const LIFSHITZ: &str = r#"
kind = "lifshitz"
[model]
strength = 100.0
[run]
box_lengths = [100.0]
trials = 20
seed = 15
[lifshitz]
energy_points = 12
"#;

const LS_COMPARE: &str = r#"
kind = "ls_compare"
[model]
shape = "delta"
[run]
box_lengths = [30.0]
trials = 6
seed = 16
[ls_compare]
strengths = [10.0, 1000.0]
"#;

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).unwrap()
}

fn untimed(mut r: ExperimentReport) -> (Vec<u8>, String) {
    r.run = None;
    (r.table.to_csv().unwrap(), r.summary_json().unwrap())
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    for text in [
        GAP_LAW,
        ENERGY_BOUNDS,
        CONDENSATION,
        CONDENSATION_SOFT,
        LIFSHITZ,
        LS_COMPARE,
    ] {
        let c = cfg(text);
        let one = untimed(run_experiment(&c, Some(1)).unwrap());
        let three = untimed(run_experiment(&c, Some(3)).unwrap());
        assert!(one == three, "{} differs across worker counts", c.kind);
    }
}

#[test]
fn tallies_partition_trials() {
    let r = run_experiment(&cfg(ENERGY_BOUNDS), None).unwrap();
    for size in r.results["sizes"].as_array().unwrap() {
        for (_, check) in size["checks"].as_object().unwrap() {
            let t = &check["tally"];
            let total: u64 = ["held", "vacuous", "violated", "solver_failed"]
                .iter()
                .map(|k| t[k].as_u64().unwrap())
                .sum();
            assert_eq!(total, 12);
        }
    }
    assert_eq!(r.table.rows.len(), 24);
}

#[test]
fn free_control_holds() {
    let r = run_experiment(&cfg(FREE), None).unwrap();
    let checks = &r.results["sizes"][0]["checks"];
    assert_eq!(checks["free_control"]["tally"]["held"], 5);
    for name in ["ground_upper", "bracketing", "ls_domination"] {
        assert_eq!(checks[name]["tally"]["violated"], 0, "{name}");
    }
    let col = r
        .table
        .header
        .iter()
        .position(|h| h == "free_control")
        .unwrap();
    assert!(r
        .table
        .rows
        .iter()
        .all(|row| row[col] == Outcome::Held.as_str()));
}

#[test]
fn gap_law_frequencies_are_probabilities() {
    let r = run_experiment(&cfg(GAP_LAW), None).unwrap();
    for size in r.results["sizes"].as_array().unwrap() {
        for tail in size["tails"].as_array().unwrap() {
            let p = tail["frequency"]["p"].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
        assert_eq!(size["separation_nondecreasing_in_j"], true);
    }
    // zero threshold: gaps are almost surely distinct
    let mut zero = cfg(GAP_LAW);
    zero.run.thresholds = vec![0.0];
    let r = run_experiment(&zero, None).unwrap();
    assert_eq!(r.results["sizes"][1]["tails"][0]["frequency"]["p"], 1.0);
}

#[test]
fn kind_is_checked() {
    let err = run_gap_law(&cfg(LIFSHITZ)).unwrap_err();
    assert!(matches!(err, Error::KindMismatch { .. }));
}

#[test]
fn written_report_layout() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg(LS_COMPARE);
    let report = run_experiment(&c, Some(1)).unwrap();
    let out = report.write(dir.path()).unwrap();
    assert!(out
        .file_name()
        .unwrap()
        .to_str()
        .unwrap()
        .starts_with("ls_compare-"));
    let csv = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    assert!(csv.starts_with("seed,N,L,S,l1,l2,E1,E2,E3,E4,E5,mu,n1_frac,n2_frac,band_frac,"));
    assert_eq!(csv.lines().count(), 1 + 2 * 6);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["kind"], "ls_compare");
    assert!(summary["run"]["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    let echo = ExperimentConfig::from_path(&out.join("config.echo")).unwrap();
    assert_eq!(echo, c);
    // a second write lands in a fresh directory
    let again = report.write(dir.path()).unwrap();
    assert_ne!(again, out);
}

#[test]
fn condensation_residuals_and_subcritical_warning() {
    let r = run_experiment(&cfg(CONDENSATION), None).unwrap();
    assert!(r.results["max_abs_residual"].as_f64().unwrap() <= 1e-10);
    assert!(r.results["warnings"].as_array().unwrap().is_empty());
    let mut low = cfg(CONDENSATION);
    low.thermo.density_factor = Some(0.5);
    let r = run_experiment(&low, None).unwrap();
    assert_eq!(r.results["warnings"].as_array().unwrap().len(), 1);
    assert_eq!(r.results["rho0"], 0.0);
}
