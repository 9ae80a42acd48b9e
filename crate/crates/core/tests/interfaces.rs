//! External-interface checks: the JSON schemas and CSV layouts other
//! tools consume, exercised through the public surface.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use loopmoment_core::experiments::{hull_report, write_image_csv, ExperimentManifest};
use loopmoment_core::flow::{flow_down, FlowConfig};
use loopmoment_core::grassmann::GrassModel;
use loopmoment_core::jsonio::{GrassPointJson, LatticeJson, LoopJson, MomentJson, TorusJson};
use loopmoment_core::liegroup::{LatticeVector, TorusVector};
use loopmoment_core::loops::{random_loop, AlgebraicLoop};
use loopmoment_core::moment::{moment, Objective};

#[test]
fn loop_json_schema_keys() {
    let lp = AlgebraicLoop::<f64>::lattice_loop(&LatticeVector::new(vec![1, -1]).unwrap());
    let v: Value =
        serde_json::from_str(&serde_json::to_string(&LoopJson::from_loop(&lp)).unwrap()).unwrap();
    assert_eq!(v["group"], "SU");
    assert_eq!(v["N"], 2);
    assert_eq!(v["order"], 1);
    let coeffs = v["coeffs"].as_array().unwrap();
    assert_eq!(coeffs.len(), 3);
    for c in coeffs {
        assert!(c["k"].is_i64());
        assert_eq!(c["re"].as_array().unwrap().len(), 2);
        assert_eq!(c["im"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn torus_and_lattice_json_carry_the_chart() {
    let t = TorusVector::from_chart(3, &[0.5, -0.25]).unwrap();
    let v: Value =
        serde_json::from_str(&serde_json::to_string(&TorusJson::from_torus(&t)).unwrap()).unwrap();
    assert_eq!(v["N"], 3);
    assert_eq!(v["coords"].as_array().unwrap().len(), 2);

    let x = LatticeVector::new(vec![2, -1, -1]).unwrap();
    let v: Value =
        serde_json::from_str(&serde_json::to_string(&LatticeJson::from_lattice(&x)).unwrap())
            .unwrap();
    assert_eq!(v["N"], 3);
    assert_eq!(v["coords"], serde_json::json!([2, -1]));
    let back = serde_json::from_value::<LatticeJson>(v)
        .unwrap()
        .to_lattice()
        .unwrap();
    assert_eq!(back, x);
}

#[test]
fn moment_json_schema() {
    let lp = AlgebraicLoop::<f64>::lattice_loop(&LatticeVector::new(vec![1, -1]).unwrap());
    let mu = moment(&lp);
    let v: Value =
        serde_json::from_str(&serde_json::to_string(&MomentJson::from_moment(&mu)).unwrap())
            .unwrap();
    assert!((v["E"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["p"].as_array().unwrap().len(), 1);
    assert!((v["p"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn grass_point_json_has_row_legend() {
    let model = GrassModel::<f64>::new(2, 1).unwrap();
    let p = model.embed(&AlgebraicLoop::<f64>::constant(2)).unwrap();
    let v: Value =
        serde_json::from_str(&serde_json::to_string(&GrassPointJson::from_point(&p)).unwrap())
            .unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0]["k"], -1);
    assert_eq!(rows[0]["j"], 1);
    assert_eq!(rows[3]["k"], 0);
    assert_eq!(rows[3]["j"], 2);
    assert_eq!(v["re"].as_array().unwrap().len(), 4);
}

#[test]
fn flow_trace_csv_layout() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let lp = random_loop::<f64, _>(2, 1, 0.5, &mut rng).unwrap();
    let trace = flow_down(&lp, &Objective::Energy, &FlowConfig::default()).unwrap();
    let mut csv = Vec::new();
    trace.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,f,gradnorm"));
    let first = lines.next().unwrap();
    assert_eq!(first.split(',').count(), 3);
    assert_eq!(text.lines().count(), trace.samples.len() + 1);
}

#[test]
fn image_csv_layout() {
    let report = hull_report(2, 10, 23, 0.5);
    let mut csv = Vec::new();
    let rows = write_image_csv(&report, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(rows, 10);
    assert_eq!(text.lines().next(), Some("sample_id,p_1,E,margin"));
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn manifest_json_defaults_are_valid_and_stable() {
    let m = ExperimentManifest::default();
    let text = m.to_json();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["group_n"], 2);
    assert_eq!(v["image_count"], 10000);
    assert!(v["tolerances"]["level_residual"].as_f64().unwrap() > 0.0);
    // round trip is identity
    let back = ExperimentManifest::from_json(&text).unwrap();
    assert_eq!(m, back);
}
