use relequil::presets::Preset;
use relequil::report::{
    cmd_analyze, cmd_integrals, cmd_parity_scan, cmd_solve_cc, path_flow, sflow_battery, CcRecord, IntegralsRecord,
    JobSpec, ModeChoice, OutputKind, ParityFamily, ParityScanSummary, PathFlowRecord, RunRecord, SflowBatterySummary,
};
use serde::{de::DeserializeOwned, Serialize};

fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(value: &T) {
    let text = serde_json::to_string_pretty(value).unwrap();
    let back: T = serde_json::from_str(&text).unwrap();
    assert_eq!(&back, value);
}

/// For records without `PartialEq`: emitting the parsed value reproduces the text.
fn text_round_trip<T: Serialize + DeserializeOwned>(value: &T) {
    let text = serde_json::to_string(value).unwrap();
    let back: T = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
}

#[test]
fn job_specs_round_trip() {
    let mut job = JobSpec::preset(Preset::Square, 4).with_masses(&[1.0, 2.0, 1.0, 2.0]).with_mode(ModeChoice::Simple4);
    job.outputs = vec![OutputKind::Report, OutputKind::MatricesCsv];
    job.tolerances.cc = Some(1e-12);
    round_trip(&job);
    let explicit = JobSpec::from_json(
        r#"{"ambient_dim": 2, "positions": [[1, 0], [-0.5, 0.8], [-0.5, -0.8]], "masses": [1, 1, 1]}"#,
    )
    .unwrap();
    round_trip(&explicit);
}

#[test]
fn command_records_round_trip() {
    round_trip::<RunRecord<CcRecord>>(&cmd_solve_cc(&JobSpec::preset(Preset::Euler, 2), None).unwrap());
    round_trip::<RunRecord<IntegralsRecord>>(&cmd_integrals(&JobSpec::preset(Preset::Lagrange, 4), None).unwrap());
    round_trip::<RunRecord<ParityScanSummary>>(
        &cmd_parity_scan(20, 6, 3, ParityFamily::Mixed, None).unwrap(),
    );
    round_trip::<SflowBatterySummary>(&sflow_battery(20, (4, 6), 10, 5));
    let base = nalgebra::DMatrix::from_diagonal(&nalgebra::dvector![1.0, -2.0, 0.5]);
    let dir = nalgebra::DMatrix::identity(3, 3);
    round_trip::<PathFlowRecord>(&path_flow(&base, &dir, -0.25, 3.0).unwrap());
    text_round_trip(&cmd_analyze(&JobSpec::preset(Preset::Tetrahedron, 4), None).unwrap());
}

#[test]
fn report_lists_every_verdict_with_hypotheses() {
    let rec = cmd_analyze(&JobSpec::preset(Preset::Tetrahedron, 4), None).unwrap();
    let v = serde_json::to_value(&rec.payload.report).unwrap();
    for key in relequil::stability::THEOREM_KEYS {
        assert!(v["theorem_verdicts"][key].is_string(), "{key}");
        assert!(v["theorem_details"][key]["hypotheses"].is_array(), "{key}");
    }
    assert_eq!(v["theorem_verdicts"]["main-2.1"], "unstable");
}
