use pinchkit::io::{load_point_data, save_point_data, PointFile, PointValues};
use pinchkit::models::umbilical_sphere_exact;
use pinchkit::scalar::{parse_rational, rational};
use pinchkit::Error;

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn exact_file_keeps_rational_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        &dir,
        "p.json",
        r#"{"n": 5, "m": 1, "c": "1/4", "exact": true,
            "shape_operators": [[["1/3",0,0,0,0],[0,"1/3",0,0,0],[0,0,"1/3",0,0],[0,0,0,"1/3",0],[0,0,0,0,"1/3"]]]}"#,
    );
    let file = load_point_data(&path).unwrap();
    let PointValues::Exact(p) = &file.values else {
        panic!("expected exact values")
    };
    assert_eq!(*p.c(), rational(1, 4));
    assert_eq!(p.shape_op(0)[(2, 2)], parse_rational("1/3").unwrap());

    let again = dir.path().join("q.json");
    save_point_data(&again, &file).unwrap();
    assert_eq!(load_point_data(&again).unwrap(), file);
}

#[test]
fn model_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = umbilical_sphere_exact(6, 3, rational(-1, 2), rational(3, 7)).unwrap();
    let file = PointFile::exact(p).with_label("sphere");
    let path = dir.path().join("s.json");
    save_point_data(&path, &file).unwrap();
    assert_eq!(load_point_data(&path).unwrap(), file);
}

#[test]
fn asymmetric_matrix_names_its_entry() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        &dir,
        "a.json",
        r#"{"n": 5, "m": 2, "c": 0, "shape_operators": [
            [[0,0,0,0,0],[0,0,0,0,0],[0,0,0,0,0],[0,0,0,0,0],[0,0,0,0,0]],
            [[0,0,0,0,0],[0,0,0,1,0],[0,0,0,0,0],[0,0.5,0,0,0],[0,0,0,0,0]]]}"#,
    );
    match load_point_data(&path) {
        Err(Error::Symmetry { alpha, i, j, .. }) => assert_eq!((alpha, i, j), (1, 1, 3)),
        other => panic!("expected a symmetry error, got {other:?}"),
    }
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            r#"{"n": 5, "m": 1, "c": 0, "shape_operators": [], "colour": 1}"#,
            "colour",
        ),
        (r#"{"n": 5, "m": 1, "c": "x", "shape_operators": []}"#, "c"),
        (r#"{"m": 1, "c": 0, "shape_operators": []}"#, "n"),
    ];
    for (i, (text, field)) in cases.iter().enumerate() {
        let path = write(&dir, &format!("s{i}.json"), text);
        match load_point_data(&path) {
            Err(Error::Schema { field: f, .. }) => assert_eq!(f, *field),
            other => panic!("case {i}: expected a schema error, got {other:?}"),
        }
    }
}

#[test]
fn wrong_matrix_size_is_a_dimension_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        &dir,
        "d.json",
        r#"{"n": 5, "m": 1, "c": 0, "shape_operators": [[[1]]]}"#,
    );
    assert!(matches!(load_point_data(&path), Err(Error::DimensionMismatch(_))));
}
