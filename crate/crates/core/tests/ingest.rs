use std::io::Write;

use subset_aic::{find_dependencies, load_csv, Dataset, GramSystem, ResponseColumn, VarSet};

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn housing_shape_and_standardization() {
    let d = load_csv(data("housing.csv"), &ResponseColumn::from("MEDV")).unwrap();
    assert_eq!((d.n(), d.p()), (506, 13));
    assert_eq!(d.predictor_name(0), "CRIM");
    assert_eq!(d.response_name(), "MEDV");
    let s = d.standardize().unwrap();
    let info = s.standardization().unwrap();
    assert_eq!(info.divisor, "n-1");
    assert!(info.constant_predictors().is_empty());
    let n = s.n() as f64;
    for j in 0..s.p() {
        let c = s.column(j);
        let mean = c.iter().sum::<f64>() / n;
        let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
    }
    assert!(find_dependencies(&s).is_empty());
}

#[test]
fn auto_mpg_one_hot_groups_are_dependent() {
    let d = load_csv(data("auto-mpg.csv"), &ResponseColumn::from("mpg")).unwrap();
    assert_eq!((d.n(), d.p()), (392, 25));
    let raw = find_dependencies(&d);
    let std = find_dependencies(&d.standardize().unwrap());
    assert_eq!(raw.len(), 3);
    let a: Vec<VarSet> = raw.member_sets().collect();
    let b: Vec<VarSet> = std.member_sets().collect();
    assert_eq!(a, b);
    // Each one-hot group (cylinders, model year, origin) is one dependent set.
    let sizes: Vec<usize> = a.iter().map(|s| s.len()).collect();
    assert_eq!(sizes, vec![5, 13, 3]);
}

#[test]
fn response_by_index_and_last() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "y,a,b\n1,2,3\n2,1,5\n4,0,1\n3,3,2").unwrap();
    let by_name = load_csv(f.path(), &ResponseColumn::from("y")).unwrap();
    let by_index = load_csv(f.path(), &ResponseColumn::from("0")).unwrap();
    assert_eq!(by_name, by_index);
    assert_eq!(by_name.response(), &[1.0, 2.0, 4.0, 3.0]);
    let last = load_csv(f.path(), &ResponseColumn::Last).unwrap();
    assert_eq!(last.response_name(), "b");
}

#[test]
fn non_numeric_cell_reports_its_location() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "a,b,y\n1,2,3\n4,oops,6\n7,8,9").unwrap();
    let err = load_csv(f.path(), &ResponseColumn::from("y")).unwrap_err().to_string();
    assert!(
        err.contains("row 2") && err.contains("(b)") && err.contains("oops"),
        "{err}"
    );
}

#[test]
fn gram_matches_direct_sums() {
    let d = Dataset::from_columns(vec![vec![1.0, 2.0, 4.0], vec![0.5, -1.0, 3.0]], vec![2.0, 1.0, 7.0]).unwrap();
    let g = GramSystem::build(&d).unwrap();
    assert_eq!(g.g(0, 0), 3.0);
    assert_eq!(g.g(1, 2), 1.0 * 0.5 - 2.0 + 12.0);
    assert_eq!(g.b(2), 1.0 - 1.0 + 21.0);
    assert_eq!(g.yty(), 4.0 + 1.0 + 49.0);
}
