use std::path::Path;
use std::process::{Command, Output};

fn fdrlos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdrlos")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn rows(csv_text: &[u8]) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_reader(csv_text);
    r.records().map(|x| x.unwrap()).collect()
}

fn header(csv_text: &[u8]) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv_text);
    r.headers().unwrap().iter().map(str::to_string).collect()
}

fn col(h: &[String], name: &str) -> usize {
    h.iter().position(|c| c == name).unwrap()
}

#[test]
fn point_gives_one_record_per_method() {
    let o = fdrlos(&["point", "--k", "20", "--m", "2", "--snr-db", "10", "--methods", "closed_form,quadrature"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let h = header(&o.stdout);
    assert_eq!(h.len(), 16);
    let rs = rows(&o.stdout);
    assert_eq!(rs.len(), 2);
    for r in &rs {
        let c: f64 = r[col(&h, "capacity_bps_hz")].parse().unwrap();
        assert!((c - 3.13246).abs() < 1e-4, "{c}");
        assert_eq!(&r[col(&h, "status")], "ok");
        assert_eq!(&r[col(&h, "runtime_ms")], "");
    }
}

#[test]
fn usage_errors_exit_one() {
    let cases: [&[&str]; 5] = [
        &["point", "--k", "20", "--m", "0.4", "--snr-db", "10"],
        &["point", "--k", "20", "--m", "2", "--snr-db", "10", "--methods", ","],
        &["point", "--k", "20", "--m", "2", "--snr-db", "10", "--methods", "bogus"],
        &["sweep", "--k", "20", "--m", "2", "--snr-range", "0:40:-5"],
        &["frobnicate"],
    ];
    for args in cases {
        assert_eq!(code(&fdrlos(args)), 1, "{args:?}");
    }
}

#[test]
fn per_record_failures_exit_two() {
    // the approximations are defined for ORA only
    let o = fdrlos(&["point", "--k", "20", "--m", "2", "--snr-db", "10", "--scheme", "opra", "--methods", "approx_high"]);
    assert_eq!(code(&o), 2);
    let rs = rows(&o.stdout);
    let h = header(&o.stdout);
    assert_eq!(&rs[0][col(&h, "status")], "error");
    assert!(!rs[0][col(&h, "note")].is_empty());
}

#[test]
fn table1_mismatches_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1.csv");
    let o = fdrlos(&["table1", "--terms", "1", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read(&out).unwrap();
    let h = header(&text);
    let rs = rows(&text);
    assert_eq!(rs.len(), 30);
    let failing: Vec<(String, String, String)> = rs
        .iter()
        .filter(|r| &r[col(&h, "status")] == "fail")
        .map(|r| (r[col(&h, "k")].to_string(), r[col(&h, "snr_db")].to_string(), r[col(&h, "method")].to_string()))
        .collect();
    // only the two 30 dB cells of the exact columns disagree with the table
    assert_eq!(failing.len(), 4, "{failing:?}");
    assert!(failing.iter().all(|(_, snr, m)| snr == "30.0" && m != "approx_high_ratio"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["point", "--k", "5", "--m", "2", "--snr-db", "10", "--methods", "mc,quadrature", "--samples", "20000"];
    let a = fdrlos(&args);
    let b = fdrlos(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let mut c_args = args.to_vec();
    c_args.extend(["--streams", "1"]);
    assert_eq!(fdrlos(&c_args).stdout, a.stdout);
    let mut d_args = args.to_vec();
    d_args.extend(["--seed", "7"]);
    assert_ne!(fdrlos(&d_args).stdout, a.stdout);
}

#[test]
fn json_mirrors_csv() {
    let base = ["sweep", "--k", "20", "--m", "2", "--snr-range", "0:20:10", "--methods", "quadrature,high_snr"];
    let c = fdrlos(&base);
    let mut j_args = base.to_vec();
    j_args.extend(["--format", "json"]);
    let j = fdrlos(&j_args);
    assert_eq!(code(&c), 0);
    let h = header(&c.stdout);
    let rs = rows(&c.stdout);
    let js: Vec<serde_json::Map<String, serde_json::Value>> = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(rs.len(), 6);
    assert_eq!(js.len(), rs.len());
    for (r, o) in rs.iter().zip(&js) {
        assert_eq!(o.keys().count(), h.len());
        for (name, field) in h.iter().zip(r.iter()) {
            let v = &o[name];
            match v {
                serde_json::Value::Null => assert_eq!(field, "", "{name}"),
                serde_json::Value::String(s) => assert_eq!(field, s, "{name}"),
                serde_json::Value::Number(n) => {
                    // serde_json's default float parser may be one ulp off
                    let (a, b) = (field.parse::<f64>().unwrap(), n.as_f64().unwrap());
                    assert!((a - b).abs() <= 2.0 * f64::EPSILON * a.abs(), "{name}: {a} vs {b}");
                }
                other => panic!("unexpected {other}"),
            }
        }
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# point settings\nk = 200\nm = 2\nsnr-db = 0\nmethods = quadrature\nformat = json\n").unwrap();
    let o = fdrlos(&["point", "--config", cfg.to_str().unwrap(), "--k", "20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let js: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(js[0]["k"], 20.0);
    let c = js[0]["capacity_bps_hz"].as_f64().unwrap();
    assert!((c - 0.91412).abs() < 1e-4, "{c}");

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(code(&fdrlos(&["point", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn plot_script_accompanies_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let plot = dir.path().join("sweep.gp");
    let o = fdrlos(&[
        "sweep",
        "--k",
        "0.5",
        "--m",
        "2",
        "--snr-range",
        "0:10:10",
        "--methods",
        "quadrature",
        "--output",
        out.to_str().unwrap(),
        "--plot-script",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let script = std::fs::read_to_string(&plot).unwrap();
    assert!(script.contains(&*out.to_string_lossy()));
    assert!(Path::new(&out).exists());
    // a script without a CSV file to read is refused
    assert_eq!(code(&fdrlos(&["point", "--k", "1", "--m", "2", "--snr-db", "0", "--plot-script", "x.gp"])), 1);
}
