use std::fs;
use std::path::Path;

use planopt_core::io::{
    embedded_samples, front_to_string, instance_to_string, load_instance, parse_front, parse_instance, read_front,
    write_front, write_instance, LoadError, QualitativeMapping,
};
use planopt_core::model::{ObjectiveSpec, QuantityKey};
use planopt_core::pareto::{nnc_front, ParetoFront, ParetoRequest};

fn samples_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/samples"))
}

fn sample_text(name: &str) -> String {
    fs::read_to_string(samples_dir().join(format!("{name}.json"))).unwrap()
}

#[test]
fn sample_region_has_documented_shape() {
    let inst = load_instance(&samples_dir().join("sample-region.json")).unwrap();
    assert_eq!(inst.activities.len(), 6);
    assert_eq!(inst.pressure_names.len(), 4);
    assert_eq!(inst.receptor_names.len(), 3);
    assert!(inst.errors().is_empty());
    let tox = &inst.indicator_tables[0].factors["NOx"];
    assert_eq!((tox.best, tox.average, tox.worst), (95.0, 197.5, 300.0));
}

#[test]
fn embedded_samples_match_files() {
    for (name, text) in embedded_samples() {
        assert_eq!(text, sample_text(name), "{name}");
        parse_instance(text, None, None, name).unwrap();
    }
}

#[test]
fn zero_efficiency_is_an_invariant_violation() {
    let text = sample_text("toy-segment").replace("\"efficiency\": 0.39", "\"efficiency\": 0");
    match parse_instance(&text, None, None, "t").unwrap_err() {
        LoadError::Invariant(v) => assert!(v.iter().any(|v| v.path == "efficiency"), "{v:?}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn truncated_file_is_a_parse_error() {
    let text = sample_text("sample-region");
    for cut in [1, text.len() / 3, text.len() / 2, text.len() - 3] {
        let err = parse_instance(&text[..cut], None, None, "t").unwrap_err();
        assert_eq!(err.class(), "parse", "{err}");
    }
}

#[test]
fn missing_field_is_a_schema_error_naming_it() {
    let text = sample_text("toy-segment").replace("\"budget\": 1,", "");
    let err = parse_instance(&text, None, None, "t").unwrap_err();
    assert_eq!(err.class(), "schema");
    assert!(err.to_string().contains("budget"), "{err}");
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_instance(Path::new("/nonexistent/instance.json")).unwrap_err();
    assert_eq!(err.class(), "io");
}

#[test]
fn mixed_matrix_is_rejected() {
    let text = sample_text("toy-segment").replace("[[\"high\"], [\"low\"]]", "[[\"high\"], [0.5]]");
    let err = parse_instance(&text, None, None, "t").unwrap_err();
    assert_eq!(err.field(), Some("mop"), "{err}");
}

#[test]
fn labels_outside_coaxial_matrices_are_rejected() {
    let text = sample_text("sample-region").replace("[0.3, 0.5, 20]", "[\"low\", \"low\", \"low\"]");
    let err = parse_instance(&text, None, None, "t").unwrap_err();
    assert_eq!(err.field(), Some("mec"), "{err}");
}

#[test]
fn mapping_override_takes_precedence() {
    let mapping = QualitativeMapping::parse_overrides("high=0.8").unwrap();
    let inst = parse_instance(&sample_text("toy-segment"), None, Some(&mapping), "t").unwrap();
    assert_eq!(inst.mop.get(0, 0), 0.8);
    assert_eq!(inst.mop.get(1, 0), 0.25);
}

#[test]
fn instances_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in embedded_samples() {
        let inst = parse_instance(text, None, None, name).unwrap();
        let path = dir.path().join(format!("{name}.json"));
        write_instance(&inst, &path).unwrap();
        let back = load_instance(&path).unwrap();
        assert_eq!(back, inst);
        assert_eq!(instance_to_string(&back), fs::read_to_string(&path).unwrap());
    }
}

#[test]
fn tables_resolve_relative_to_the_document() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("mop.csv"), "activity,land_occupation\nx,high\ny,low\n").unwrap();
    fs::write(dir.path().join("mpr.csv"), ",landscape\nland_occupation,0.5\n").unwrap();
    let text = sample_text("toy-segment")
        .replace("[[\"high\"], [\"low\"]]", "{\"table\": \"mop.csv\"}")
        .replace("[[\"medium\"]]", "{\"table\": \"mpr.csv\"}");
    let path = dir.path().join("toy.json");
    fs::write(&path, &text).unwrap();
    let from_tables = load_instance(&path).unwrap();
    let inline = parse_instance(&sample_text("toy-segment"), None, None, "t").unwrap();
    assert_eq!(from_tables, inline);

    fs::write(dir.path().join("mop.csv"), "activity,land_occupation\ny,high\nx,low\n").unwrap();
    let err = load_instance(&path).unwrap_err();
    assert_eq!(err.field(), Some("mop"));

    fs::write(dir.path().join("mop.csv"), "activity,land_occupation\nx,high\ny,0.1\n").unwrap();
    let err = load_instance(&path).unwrap_err();
    assert!(err.to_string().contains("mixes"), "{err}");

    assert_eq!(parse_instance(&text, None, None, "t").unwrap_err().class(), "schema");
}

fn toy_front() -> ParetoFront {
    let inst = parse_instance(&sample_text("toy-segment"), None, None, "t").unwrap();
    let request = ParetoRequest {
        objectives: vec![
            ObjectiveSpec::minimize("x", QuantityKey::Activity("x".into())),
            ObjectiveSpec::minimize("y", QuantityKey::Activity("y".into())),
        ],
        points: 5,
        extra: vec![],
    };
    nnc_front(&inst, &request).unwrap()
}

#[test]
fn fronts_round_trip_and_rewrite_byte_stably() {
    let dir = tempfile::tempdir().unwrap();
    let front = toy_front();
    let path = dir.path().join("front.json");
    write_front(&front, &path).unwrap();
    let first = fs::read_to_string(&path).unwrap();
    let back = read_front(&path).unwrap();
    assert_eq!(back, front);
    write_front(&back, &path).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), first);
}

#[test]
fn empty_front_and_dropped_count_round_trip() {
    let mut front = toy_front();
    front.scenarios.clear();
    front.dropped = 2;
    let back = parse_front(&front_to_string(&front), "t").unwrap();
    assert_eq!(back, front);
}

#[test]
fn awkward_reals_round_trip_bit_exactly() {
    let mut front = toy_front();
    let awkward = [0.1 + 0.2, 1.0 / 3.0, 6.02214076e23, 5e-324, -0.0, 69230.76923076923];
    for (k, v) in awkward.into_iter().enumerate() {
        front.scenarios[0].magnitudes.insert(format!("z{k}"), v);
    }
    let back = parse_front(&front_to_string(&front), "t").unwrap();
    for (k, v) in awkward.into_iter().enumerate() {
        assert_eq!(back.scenarios[0].magnitudes[&format!("z{k}")].to_bits(), v.to_bits());
    }
}
