use std::process::{Command, Output};

use serde_json::Value;

fn spiderlift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spiderlift"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn float(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn lift_prints_the_lifted_angle() {
    let out = spiderlift(&["lift", "--d", "2", "--j", "1", "--theta", "17/240"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("163/6480"));
    let back = spiderlift(&[
        "lift",
        "--d",
        "2",
        "--j",
        "1",
        "--theta",
        "163/6480",
        "--inverse",
    ]);
    assert_eq!(json(&back)["theta"], "17/240");
}

#[test]
fn approximate_reproduces_the_closed_form() {
    let out = spiderlift(&["approximate", "--s", "0|1", "--degrees", "8"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let lambda = &doc["rows"][0]["report"]["lambda"];
    let want = 8.0 * (num_complex::Complex64::new(0.0, std::f64::consts::TAU / 8.0).exp() - 1.0);
    assert!((float(&lambda["re"]) - want.re).abs() < 1e-12);
    assert!((float(&lambda["im"]) - want.im).abs() < 1e-12);
}

#[test]
fn complex_values_carry_seventeen_significant_digits() {
    let out = spiderlift(&["solve-exp", "--s", "0|1"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text
        .lines()
        .find(|l| l.contains("\"im\""))
        .expect("an imaginary part");
    let number = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = number.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{number}");
}

#[test]
fn exit_codes_follow_the_contract() {
    assert_eq!(code(&spiderlift(&["lift", "--d", "2"])), 1);
    assert_eq!(code(&spiderlift(&["no-such-command"])), 1);
    assert_eq!(
        code(&spiderlift(&[
            "lift", "--d", "2", "--j", "2", "--theta", "1/3"
        ])),
        2
    );
    assert_eq!(
        code(&spiderlift(&[
            "lift", "--d", "2", "--j", "0", "--theta", "x/3"
        ])),
        2
    );
    assert_eq!(
        code(&spiderlift(&[
            "solve-poly",
            "--d",
            "2",
            "--theta",
            "1/7",
            "--tol",
            "0"
        ])),
        2
    );
    assert_eq!(
        code(&spiderlift(&[
            "solve-poly",
            "--d",
            "2",
            "--theta",
            "1/7",
            "--max-iter",
            "2"
        ])),
        3
    );
    assert_eq!(code(&spiderlift(&["--help"])), 0);
}

#[test]
fn approximate_writes_csv() {
    let path = std::env::temp_dir().join(format!("spiderlift-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let out = spiderlift(&[
        "approximate",
        "--s",
        "0|-1",
        "--degrees",
        "5,6,7",
        "--out",
        p,
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let headers: Vec<String> = reader
        .headers()
        .unwrap()
        .iter()
        .take(3)
        .map(String::from)
        .collect();
    assert_eq!(headers, ["d", "theta_num", "theta_den"]);
    let distances: Vec<f64> = rows.iter().map(|r| r[9].parse().unwrap()).collect();
    assert!(distances.windows(2).all(|w| w[1] < w[0]), "{distances:?}");
}

#[test]
fn verify_is_deterministic_and_passes() {
    let a = spiderlift(&["verify", "--suite", "angles", "--seed", "7"]);
    let b = spiderlift(&["verify", "--suite", "angles", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["failed"], 0);
}

#[test]
fn verify_suites_cover_their_contracts() {
    let lift = json(&spiderlift(&["verify", "--suite", "lift", "--seed", "3"]));
    let props = lift["properties"].as_array().unwrap();
    let mono = props.iter().find(|p| p["name"] == "monotonicity").unwrap();
    assert!(mono["cases"].as_u64().unwrap() >= 1000);
    assert!(props.iter().all(|p| p["passed"] == true));

    let address = json(&spiderlift(&[
        "verify", "--suite", "address", "--seed", "3",
    ]));
    let ladder = &address["properties"][0];
    assert_eq!(ladder["cases"], 5);
    assert_eq!(ladder["passed"], true);
}

#[test]
fn thread_cap_is_honored_and_validated() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_spiderlift"))
            .env("SPIDERLIFT_THREADS", threads)
            .args(["class", "--d", "2", "--theta", "17/240"])
            .output()
            .unwrap()
    };
    let ok = run("1");
    assert_eq!(code(&ok), 0);
    assert_eq!(json(&ok)["class"].as_array().unwrap().len(), 4);
    assert_eq!(code(&run("0")), 1);
}

#[test]
fn verify_dynamics_includes_the_ladder_table() {
    let out = spiderlift(&["verify", "--suite", "dynamics", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let names: Vec<&str> = doc["properties"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["name"].as_str().unwrap())
        .collect();
    assert!(
        names
            .iter()
            .any(|n| n.starts_with("degree ladder golden table")),
        "{names:?}"
    );
}
