use std::path::Path;
use std::process::{Command, Output};

fn sunflower(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sunflower")).args(args).env("SUNFLOWER_WORKERS", "1").output().unwrap()
}

fn data_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn generate_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    // The envelope embeds the out path, so both runs target the same file.
    let a = dir.path().join("a.json");
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let o = sunflower(&["generate", "--d", "3", "--m", "5", "--n", "8", "--seed", "4", "--out", a.to_str().unwrap()]);
        assert!(o.status.success());
        assert!(String::from_utf8_lossy(&o.stderr).contains("vertices=128"));
        bytes.push(std::fs::read(&a).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["d"], 3);
    assert_eq!(v["artifact"]["adjacency"].as_array().unwrap().len(), 128);
}

#[test]
fn invalid_params_list_violations() {
    let o = sunflower(&["spectrum", "--d", "4", "--m", "4", "--n", "6"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("d must be odd") && err.contains("m must be odd") && err.contains("multiple of 4"));
}

#[test]
fn spectrum_has_one_row_per_eigenpair() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    assert!(sunflower(&["spectrum", "--d", "3", "--m", "3", "--n", "4", "--out", out.to_str().unwrap()]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# config: {"));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["l", "j", "mu", "lambda", "residual"]);
    assert_eq!(rows.len(), 12);
}

#[test]
fn artifact_errors_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(sunflower(&["quantum", "--graph", missing.to_str().unwrap()]).status.code(), Some(4));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"artifact\": {\"schema_version\": 99}}").unwrap();
    assert_eq!(sunflower(&["quantum", "--graph", bad.to_str().unwrap()]).status.code(), Some(5));
}

#[test]
fn other_error_families() {
    assert_eq!(sunflower(&["expansion", "--backend", "implicit"]).status.code(), Some(6));
    assert_eq!(sunflower(&["expansion", "--part", "bipartite", "--bipartite-n", "21", "--draws", "1"]).status.code(), Some(9));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "nonsense = 1\n").unwrap();
    assert_eq!(sunflower(&["spectrum", "--config", cfg.to_str().unwrap()]).status.code(), Some(11));
    assert_eq!(sunflower(&["spectrum", "--mode", "sideways"]).status.code(), Some(2));
}

#[test]
fn quantum_via_artifact_matches_direct_build() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let direct = dir.path().join("direct.csv");
    let loaded = dir.path().join("loaded.csv");
    assert!(sunflower(&["generate", "--seed", "9", "--out", g.to_str().unwrap()]).status.success());
    assert!(sunflower(&["quantum", "--seed", "9", "--trials", "30", "--out", direct.to_str().unwrap()]).status.success());
    assert!(sunflower(&["quantum", "--seed", "9", "--trials", "30", "--graph", g.to_str().unwrap(), "--out", loaded.to_str().unwrap()])
        .status
        .success());
    assert_eq!(read_csv(&direct).1, read_csv(&loaded).1);
}

#[test]
fn embedded_config_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    let o = sunflower(&["quantum", "--mode", "filtered", "--seed", "3", "--trials", "25", "--out", first.to_str().unwrap()]);
    assert!(o.status.success());
    let o = sunflower(&["quantum", "--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(data_lines(&first), data_lines(&second));
}

#[test]
fn toml_config_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "d = 5\nm = 3\nn = 4\nell_max = 7\n").unwrap();
    let out = dir.path().join("f.json");
    assert!(sunflower(&["filter", "--config", cfg.to_str().unwrap(), "--ell-max", "4", "--out", out.to_str().unwrap()]).status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["d"], 5);
    assert_eq!(v["config"]["ell_max"], 4);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert!(v["elapsed_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn separation_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sep.csv");
    let o = sunflower(&["separation", "--d", "3", "--ns", "8,12,16", "--trials", "100", "--seed", "5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(rows.len(), 3);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for r in &rows {
        let rate: f64 = r[col("quantum_rate")].parse().unwrap();
        assert!(rate >= 2.0 / 3.0, "{r:?}");
        assert_eq!(r[col("m")].parse::<usize>().unwrap(), r[col("n")].parse::<usize>().unwrap() + 1);
    }
}

#[test]
fn classical_and_bipartite_tables() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.csv");
    assert!(sunflower(&["classical", "--trials", "40", "--ns", "8,12", "--out", c.to_str().unwrap()]).status.success());
    let (header, rows) = read_csv(&c);
    assert!(header.contains(&"wilson_low".to_string()));
    assert_eq!(rows.len(), 2);
    let b = dir.path().join("b.csv");
    let o = sunflower(&["expansion", "--part", "bipartite", "--bipartite-n", "8,10", "--draws", "10", "--samples", "2000", "--out", b.to_str().unwrap()]);
    assert!(o.status.success());
    let (header, rows) = read_csv(&b);
    assert_eq!(&header[..2], ["N", "D"]);
    assert_eq!(rows.len(), 2);
}
