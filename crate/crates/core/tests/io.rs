mod common;

use std::fs;

use common::random_state;
use pairtomo::io::{
    density_matrix_from_json, density_matrix_to_json, emit_metrics, load_crystal_config, read_bootstrap,
    read_records, reconstruction_to_json, write_atomic, write_bootstrap, write_metrics, write_records,
};
use pairtomo::measurement::simulate_set;
use pairtomo::mle::{mle_fit, Metric};
use pairtomo::state::{bell_state, werner};
use pairtomo::{
    build_plan, BasisState, BootstrapStats, DensityMatrix, Error, FitOptions, MeasurementRecord, MeasurementSetting,
    SetNoiseModel,
};
use proptest::prelude::*;

fn to_csv(records: &[MeasurementRecord]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records).unwrap();
    String::from_utf8(buf).unwrap()
}

fn any_setting() -> impl Strategy<Value = MeasurementSetting> {
    (0usize..6, 0usize..6).prop_map(|(s, i)| MeasurementSetting::new(BasisState::ALL[s], BasisState::ALL[i]))
}

proptest! {
    #[test]
    fn count_records_round_trip(
        rows in prop::collection::vec((any_setting(), 0u64..10_000_000, prop::option::of(1e-3f64..1e3)), 1..40)
    ) {
        let records: Vec<MeasurementRecord> = rows
            .iter()
            .map(|(s, c, t)| MeasurementRecord::counts(*s, *c as f64, *t).unwrap())
            .collect();
        let back: Vec<MeasurementRecord> = read_records(to_csv(&records).as_bytes()).unwrap();
        prop_assert_eq!(back, records);
    }

    #[test]
    fn power_records_round_trip(
        rows in prop::collection::vec((any_setting(), 0.0f64..1e-6, 1e-6f64..1.0), 1..40)
    ) {
        let records: Vec<MeasurementRecord> = rows
            .iter()
            .map(|(s, p, seed)| MeasurementRecord::power(*s, *p, *seed).unwrap())
            .collect();
        let text = to_csv(&records);
        // power rows leave integration_time empty
        prop_assert!(text.lines().skip(1).all(|l| l.ends_with(',')));
        let back: Vec<MeasurementRecord> = read_records(text.as_bytes()).unwrap();
        for (a, b) in back.iter().zip(&records) {
            prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
            prop_assert_eq!(a.seed_power.unwrap().to_bits(), b.seed_power.unwrap().to_bits());
            prop_assert_eq!(a.setting, b.setting);
        }
    }

    #[test]
    fn density_matrix_json_is_bit_faithful(seed in 0u64..10_000) {
        let rho = random_state(31, seed);
        let back: DensityMatrix = density_matrix_from_json(&density_matrix_to_json(&rho).unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                prop_assert_eq!(back.get(i, j).re.to_bits(), rho.get(i, j).re.to_bits());
                prop_assert_eq!(back.get(i, j).im.to_bits(), rho.get(i, j).im.to_bits());
            }
        }
    }
}

#[test]
fn example_rows_parse() {
    let text = "setting_signal,setting_idler,value_kind,value,seed_power,integration_time\n\
                H,H,counts,4980,,1.0\n\
                R,L,counts,2511,,1.0\n";
    let records: Vec<MeasurementRecord> = read_records(text.as_bytes()).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].setting, MeasurementSetting::new(BasisState::H, BasisState::H));
    assert_eq!(records[0].value, 4980.0);
    assert_eq!(records[1].integration_time, Some(1.0));

    let power = "setting_signal,setting_idler,value_kind,value,seed_power,integration_time\n\
                 D,A,power,6.0e-11,0.02,\n";
    let records: Vec<MeasurementRecord> = read_records(power.as_bytes()).unwrap();
    assert_eq!(records[0].seed_power, Some(0.02));
    assert_eq!(records[0].integration_time, None);
}

#[test]
fn malformed_rows_report_their_line() {
    let header = "setting_signal,setting_idler,value_kind,value,seed_power,integration_time\n";
    let cases = [
        "H,H,counts,12.5,,1\n",
        "H,H,counts,-3,,1\n",
        "H,X,counts,3,,1\n",
        "H,H,power,1e-9,,\n",
        "H,H,counts,3,0.02,1\n",
        "H,H,power,1e-9,0.02,1\n",
        "H,H,photons,3,,1\n",
    ];
    for bad in cases {
        let text = format!("{header}H,V,counts,1,,1\n{bad}");
        match read_records::<f64, _>(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3, "{bad}"),
            other => panic!("{bad}: {other:?}"),
        }
    }
    let mixed = format!("{header}H,V,counts,1,,1\nH,H,power,1e-9,0.02,\n");
    assert!(matches!(read_records::<f64, _>(mixed.as_bytes()), Err(Error::Parse { line: 3, .. })));
    let wrong_header = "a,b,c\nH,H,counts\n";
    assert!(matches!(read_records::<f64, _>(wrong_header.as_bytes()), Err(Error::Parse { line: 1, .. })));
    assert!(read_records::<f64, _>(header.as_bytes()).unwrap().is_empty());
}

#[test]
fn reconstruction_json_carries_fit_fields() {
    let rho = bell_state(0.1).unwrap();
    let records = simulate_set(&rho, &build_plan(), &SetNoiseModel::noiseless()).unwrap();
    let fit = mle_fit(&records, None, &FitOptions::default()).unwrap();
    let text = reconstruction_to_json(&fit).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["basis", "re", "im", "objective", "iterations", "converged", "method"] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
    assert_eq!(value["method"], "mle");
    let back: DensityMatrix = density_matrix_from_json(&text).unwrap();
    assert_eq!(back, fit.rho);
}

#[test]
fn density_matrix_json_rejects_bad_input() {
    let good = density_matrix_to_json(&bell_state(0.0).unwrap()).unwrap();
    let reordered = good.replacen("\"HH\"", "\"XX\"", 1);
    assert!(density_matrix_from_json::<f64>(&reordered).is_err());
    let mut value: serde_json::Value = serde_json::from_str(&good).unwrap();
    value["re"][0][0] = serde_json::json!(0.9);
    assert!(density_matrix_from_json::<f64>(&value.to_string()).is_err());
}

#[test]
fn bootstrap_csv_round_trips() {
    let stats = vec![
        BootstrapStats {
            metric_name: "fidelity".into(),
            mean: 0.9912345678901234,
            std_dev: 1.5e-4,
            n_resamples: 100,
            skipped: 0,
        },
        BootstrapStats {
            metric_name: "relative_phase".into(),
            mean: -0.0247,
            std_dev: 0.0,
            n_resamples: 98,
            skipped: 2,
        },
    ];
    let mut buf = Vec::new();
    write_bootstrap(&mut buf, &stats).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("metric,mean,std_dev,n_resamples,skipped\n"));
    let back: Vec<BootstrapStats> = read_bootstrap(text.as_bytes()).unwrap();
    assert_eq!(back, stats);
}

#[test]
fn metrics_csv_keeps_undefined_phase_row() {
    let target = bell_state(0.0).unwrap();
    let report = emit_metrics(&DensityMatrix::maximally_mixed(), &target, None).unwrap();
    assert!((report.fidelity_to_target - 0.25).abs() < 1e-12);
    assert!(report.concurrence.abs() < 1e-12);
    assert!((report.purity - 0.25).abs() < 1e-12);
    assert!(report.relative_phase.is_none());
    let mut buf = Vec::new();
    write_metrics(&mut buf, &report).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "metric,value,std_dev,note");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("relative_phase,,,"));

    let stats = vec![BootstrapStats {
        metric_name: Metric::Concurrence.name().into(),
        mean: 0.5,
        std_dev: 0.01,
        n_resamples: 10,
        skipped: 0,
    }];
    let report = emit_metrics(&werner(0.8).unwrap(), &target, Some(&stats)).unwrap();
    assert_eq!(report.std_dev("concurrence"), Some(0.01));
    assert!(report.relative_phase.is_some());
}

#[test]
fn crystal_config_resolves_dispersion_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("disp.json"),
        include_str!("../data/mgo_ln_5pct_zelmon.json"),
    )
    .unwrap();
    let path = dir.path().join("crystal.json");
    fs::write(&path, r#"{"length": 0.004, "dispersion_file": "disp.json"}"#).unwrap();
    let config: pairtomo::CrystalConfig = load_crystal_config(&path).unwrap();
    assert_eq!(config.length, 0.004);
    assert_eq!(config.dispersion, pairtomo::spectral::Dispersion::mgo_linbo3());

    fs::write(&path, r#"{"length": -1.0}"#).unwrap();
    assert!(load_crystal_config::<f64>(&path).is_err());
    fs::write(&path, r#"{"lenght": 0.002}"#).unwrap();
    assert!(load_crystal_config::<f64>(&path).is_err());
}

#[test]
fn atomic_write_leaves_nothing_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let failed = write_atomic(&path, |w| {
        w.write_all(b"partial")?;
        Err(Error::InvalidArgument("stop".into()))
    });
    assert!(failed.is_err());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    write_atomic(&path, |w| Ok(w.write_all(b"done")?)).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), "done");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}
