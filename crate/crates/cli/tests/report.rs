use std::collections::BTreeMap;

use dampwave::config::{Mode, OutputFormat};
use dampwave::report::{write_report, Cell, ExperimentReport};
use dampwave::HarnessError;

fn sample() -> ExperimentReport {
    let mut r = ExperimentReport::new(Mode::Simulate, &["t", "measured", "target", "err", "ok"])
        .with_error("measured", "target", "err");
    for (t, m, g) in [(0.5, 0.1, 0.125), (1.0, 1.0 / 3.0, 0.3)] {
        r.push_row(vec![Cell::Float(t), m.into(), g.into(), (m - g).abs().into(), true.into()]);
    }
    r.meta("n_cells", 400usize);
    r.meta("note", "a, \"quoted\" value");
    r.flag("within", true);
    r
}

#[test]
fn rendering_is_deterministic() {
    for format in [OutputFormat::Csv, OutputFormat::Json] {
        assert_eq!(sample().render(format).unwrap(), sample().render(format).unwrap());
    }
}

#[test]
fn csv_has_header_and_seventeen_digits() {
    let text = String::from_utf8(sample().render(OutputFormat::Csv).unwrap()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,measured,target,err,ok");
    assert_eq!(lines.len(), 3);
    let third = lines[2].split(',').nth(1).unwrap();
    assert_eq!(third, "3.3333333333333331e-1");
    assert_eq!(third.parse::<f64>().unwrap(), 1.0 / 3.0);
}

#[test]
fn empty_trajectory_is_header_only() {
    let r = ExperimentReport::new(Mode::Exact, &["t", "x_shock_measured"]);
    let text = String::from_utf8(r.render(OutputFormat::Csv).unwrap()).unwrap();
    assert_eq!(text, "t,x_shock_measured\n");
}

#[test]
fn json_is_one_object_with_exact_numbers() {
    let bytes = sample().render(OutputFormat::Json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    let obj = v.as_object().unwrap();
    let keys: Vec<&String> = obj.keys().collect();
    assert_eq!(keys.len(), 5);
    assert_eq!(v["mode"], "simulate");
    assert_eq!(v["flags"]["within"], true);
    assert_eq!(v["metadata"]["n_cells"], 400);
    assert_eq!(v["rows"][1]["measured"].as_f64().unwrap(), 1.0 / 3.0);
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.contains("\"measured\": 3.3333333333333331e-1"), "{text}");
    // Columns keep their order inside each row.
    let t = text.find("\"t\": 1.0").unwrap();
    assert!(text[t..].find("\"measured\"").unwrap() < text[t..].find("\"ok\"").unwrap());
}

#[test]
fn nan_measurement_is_a_data_error() {
    let mut r = sample();
    r.rows[0][1] = Cell::Float(f64::NAN);
    for format in [OutputFormat::Csv, OutputFormat::Json] {
        let err = r.render(format).unwrap_err();
        assert!(matches!(err, HarnessError::Data(_)), "{err}");
        assert_eq!(err.exit_code(), 4);
    }
    let mut r = sample();
    r.metadata = BTreeMap::from([("x".to_string(), Cell::Float(f64::NAN))]);
    assert!(r.render(OutputFormat::Json).is_err());
}

#[test]
fn stale_error_column_is_rejected() {
    let mut r = sample();
    r.rows[1][3] = Cell::Float(0.0);
    assert!(r.check_complete().unwrap_err().to_string().contains("err"));
}

#[test]
fn write_report_to_file_and_bad_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_report(&sample(), Some(&path), OutputFormat::Csv).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), sample().render(OutputFormat::Csv).unwrap());
    let bad = dir.path().join("missing").join("r.csv");
    let err = write_report(&sample(), Some(&bad), OutputFormat::Csv).unwrap_err();
    assert_eq!(err.exit_code(), 4);
}
