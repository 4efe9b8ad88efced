use std::fs;
use std::path::Path;

use rotorcage::pipeline::{execute, report_schema, run_pipeline, OutputFormat, PipelineConfig, PipelineError, Report, RunStatus, Section};

fn small_config(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/co2/config.json")).unwrap();
    cfg.grid.nr = 12;
    cfg.grid.ntheta = 12;
    cfg.grid.nphi = 12;
    cfg.solver.n_eig = 8;
    cfg.output.directory = out.to_path_buf();
    cfg
}

fn validate(report: &str) {
    let schema: serde_json::Value = serde_json::from_str(report_schema()).unwrap();
    let instance: serde_json::Value = serde_json::from_str(report).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

#[test]
fn report_is_idempotent_and_schema_valid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let (a, ea) = execute(&cfg);
    let (b, eb) = execute(&cfg);
    assert!(ea.is_none() && eb.is_none());
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.status, RunStatus::Complete);
    validate(&a.to_json());

    // The report reads back into the same structure.
    // Derived quantities are recomputed from rounded inputs, so compare numerically.
    let back: Report = serde_json::from_str(&a.to_json()).unwrap();
    let x: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    let y: serde_json::Value = serde_json::from_str(&back.to_json()).unwrap();
    close(&x, &y, "$");
}

fn close(x: &serde_json::Value, y: &serde_json::Value, path: &str) {
    use serde_json::Value;
    match (x, y) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            assert!((a - b).abs() <= 1e-8 * a.abs().max(b.abs()), "{path}: {a} vs {b}");
        }
        (Value::Array(a), Value::Array(b)) => {
            assert_eq!(a.len(), b.len(), "{path}");
            for (i, (p, q)) in a.iter().zip(b).enumerate() {
                close(p, q, &format!("{path}[{i}]"));
            }
        }
        (Value::Object(a), Value::Object(b)) => {
            assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>(), "{path}");
            for (k, p) in a {
                close(p, &b[k], &format!("{path}.{k}"));
            }
        }
        _ => assert_eq!(x, y, "{path}"),
    }
}

#[test]
fn output_directory_does_not_change_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let a = execute(&small_config(&tmp.path().join("a"))).0.to_json();
    let b = execute(&small_config(&tmp.path().join("b"))).0.to_json();
    assert_eq!(a, b);
}

#[test]
fn failed_solve_keeps_a_valid_partial_report() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config(tmp.path());
    cfg.solver.max_iter = 1;
    cfg.solver.tol = 1e-14;
    cfg.output.formats = vec![OutputFormat::Json];
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(matches!(err, PipelineError::Partial { .. }), "{err}");
    assert_eq!(err.exit_code(), 5);
    let text = fs::read_to_string(tmp.path().join("report.json")).unwrap();
    validate(&text);
    let report: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(report.status, RunStatus::Failed);
    assert_eq!(report.failure.as_ref().unwrap().exit_code, 5);
    assert!(report.potential.data().is_some() && report.channels.data().is_some());
    assert!(matches!(report.states, Section::Skipped { .. }));
    assert!(report.diagnostics.solver.is_some());
    assert!(!tmp.path().join(".rotorcage.lock").exists());
}

#[test]
fn csv_bundle_has_documented_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config(tmp.path());
    cfg.output.formats = vec![OutputFormat::CsvBundle];
    run_pipeline(&cfg).unwrap();
    assert!(!tmp.path().join("report.json").exists());
    let expected = [
        ("sections.csv", "section,status,reason"),
        ("radial_fit.csv", "k,r0,v0,rms"),
        ("angular_fit.csv", "term,coefficient"),
        ("decomposition.csv", "k,q,re,im"),
        ("rank_power.csv", "k,power"),
        ("channels.csv", "delta_m0_open,delta_m1_open,r0,r1,r2,epsilon"),
        ("states.csv", "energy_cm1,n,l,lambda,m,j,spin,purity"),
        ("levels.csv", "index,energy_cm1,label,spin"),
        ("peaks.csv", "label,position_cm1,class,delta_m,degeneracy"),
        ("lines.csv", "initial,final,position_cm1,class,delta_m,spin,peak"),
        ("pathways.csv", "from,to,delta_m,open,driving_rank"),
        ("eigenvalues.csv", "index,energy_cm1,residual"),
        ("solver_history.csv", "iter,converged_count,min_residual"),
        ("warnings.csv", "warning"),
    ];
    for (file, header) in expected {
        let text = fs::read_to_string(tmp.path().join(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
        assert_eq!(text.lines().next().unwrap(), header, "{file}");
    }
}

#[test]
fn invalid_configuration_fails_before_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let mut cfg = small_config(&out);
    cfg.grid.nr = 4;
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("grid.nr"));
    assert!(!out.exists());
}
