mod common;

use betachart::ingest::*;
use common::*;

fn cols(s: &str) -> Vec<String> {
    parse_cols(s)
}

#[test]
fn tire_fixture_parses() {
    let t = Table::from_path(&tire_fixture()).unwrap();
    assert_eq!(t.n(), 18);
    assert_eq!(t.headers, ["y", "x1", "x2", "x3", "x4", "x5"]);
    assert_eq!(t.rows[0], vec![0.0140, -1.0, -1.0, -1.0, -1.0, 1.0]);
    assert_eq!(t.rows[5], vec![0.0108, 0.0, 0.0, 0.0, 0.0, 0.0]);
}

#[test]
fn tire_designs() {
    let d = read_csv(&tire_fixture(), "y", &cols(TIRE_MEAN), &cols(TIRE_DISP), &IngestOptions::default()).unwrap();
    assert_eq!((d.x.nrows(), d.x.ncols(), d.z.ncols()), (18, 6, 3));
    assert_eq!(d.mean_names, ["(Intercept)", "x1", "x2", "x1*x2", "x1*x4", "x2*x5"]);
    // row 2: x1 = -1, x2 = 1, x4 = 1, x5 = -1
    assert_eq!(d.x.row(1).iter().copied().collect::<Vec<_>>(), vec![1.0, -1.0, 1.0, -1.0, -1.0, -1.0]);
    assert_eq!(d.z.row(1).iter().copied().collect::<Vec<_>>(), vec![1.0, -1.0, -1.0]);
    assert!(!d.adjusted);
}

#[test]
fn out_of_range_response_names_its_row() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.csv", "y,x\n0.2,1\n0.3,2\n1.2,3\n");
    let e = read_csv(&p, "y", &cols("x"), &[], &IngestOptions::default()).unwrap_err();
    assert!(e.to_string().contains("row 3"), "{e}");
}

#[test]
fn missing_file_and_column() {
    let e = read_csv(std::path::Path::new("/nonexistent/data.csv"), "y", &[], &[], &IngestOptions::default()).unwrap_err();
    assert!(e.to_string().contains("/nonexistent/data.csv"));
    let e = read_csv(&tire_fixture(), "y", &cols("x9"), &[], &IngestOptions::default()).unwrap_err();
    assert!(e.to_string().contains("x9"));
}

#[test]
fn boundary_responses_need_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "edge.csv", "y,x\n0,1\n0.3,2\n0.6,3\n1,4\n0.45,5\n");
    let raw = read_csv(&p, "y", &cols("x"), &[], &IngestOptions::default()).unwrap();
    let e = raw.dataset().unwrap_err().to_string();
    assert!(e.contains("row 1") && e.contains("boundary adjustment"), "{e}");
    let adj = read_csv(&p, "y", &cols("x"), &[], &IngestOptions { boundary_adjust: true, ..Default::default() }).unwrap();
    assert!(adj.adjusted);
    assert_eq!(adj.y[0], 0.1);
    assert_eq!(adj.y[3], 0.9);
    assert!(adj.y.iter().all(|&v| v > 0.0 && v < 1.0));
}
