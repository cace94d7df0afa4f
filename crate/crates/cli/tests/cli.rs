use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chargestate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with_threads(threads: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chargestate"))
        .env("CHARGESTATE_THREADS", threads)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

#[test]
fn build_writes_normalized_document() {
    let doc = json(&run(&[
        "build", "--f", "unity", "--q", "1", "--xi", "5", "--nmax", "60",
    ]));
    let coeffs = doc["coeffs"].as_array().unwrap();
    assert_eq!(coeffs.len(), 61);
    let norm: f64 = coeffs
        .iter()
        .map(|c| {
            let re = c[0].as_f64().unwrap();
            let im = c[1].as_f64().unwrap();
            re * re + im * im
        })
        .sum();
    assert!((norm - 1.0).abs() < 1e-12);
    assert_eq!(doc["branch"], "plus");
    assert_eq!(doc["f"]["name"], "unity");
}

#[test]
fn build_single_coefficient() {
    let doc = json(&run(&[
        "build", "--f", "sqrt", "--q", "0", "--xi", "3", "--nmax", "0",
    ]));
    assert_eq!(doc["coeffs"], serde_json::json!([[1.0, 0.0]]));
}

#[test]
fn build_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    let out = run(&[
        "build",
        "--f",
        "qdef:7",
        "--q",
        "-2",
        "--xi",
        "5,0.5",
        "--nmax",
        "10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(stdout(&out).is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["branch"], "minus");
    assert_eq!(doc["xi"], serde_json::json!([5.0, 0.5]));
}

#[test]
fn usage_errors_exit_one() {
    let cases: &[&[&str]] = &[
        &[
            "build", "--f", "ps:1.5", "--q", "0", "--xi", "1", "--nmax", "5",
        ],
        &[
            "build", "--f", "nope", "--q", "0", "--xi", "1", "--nmax", "5",
        ],
        &[
            "build", "--f", "unity", "--q", "0", "--xi", "1,x", "--nmax", "5",
        ],
        &["verify", "--f", "unity", "--q", "1", "--nmax", "40"],
        &[
            "sweep",
            "--diagnostic",
            "g2_a",
            "--f",
            "unity",
            "--q",
            "1",
            "--xi-start",
            "1",
            "--xi-end",
            "10",
            "--steps",
            "1",
            "--nmax",
            "80",
        ],
        &[
            "sweep",
            "--diagnostic",
            "g2_a",
            "--f",
            "unity",
            "--q",
            "1",
            "--xi-start",
            "5",
            "--xi-end",
            "1",
            "--steps",
            "4",
            "--nmax",
            "80",
        ],
        &[
            "husimi", "--f", "unity", "--q", "1", "--xi", "1", "--nmax", "5", "--alpha2", "1,1",
            "--xmin", "0", "--xmax", "1", "--ymin", "0", "--ymax", "1", "--grid", "1",
        ],
        &["frobnicate"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
    let range = run(cases[0]);
    assert!(String::from_utf8_lossy(&range.stderr).contains("out of range"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["sweep", "--help"]).status.code(), Some(0));
}

#[test]
fn numeric_failure_exits_two_with_index() {
    let out = run(&[
        "build",
        "--f",
        "ps:1e-200",
        "--q",
        "1",
        "--xi",
        "3",
        "--nmax",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("index 1"));
}

#[test]
fn invalid_thread_count_is_usage_error() {
    let out = run_with_threads(
        "many",
        &[
            "pnd", "--f", "unity", "--q", "0", "--xi", "1", "--nmax", "2",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_qdef_g2_is_near_one() {
    let csv = stdout(&run(&[
        "sweep",
        "--diagnostic",
        "g2_a",
        "--f",
        "qdef:7",
        "--q",
        "1",
        "--xi-start",
        "1",
        "--xi-end",
        "10",
        "--steps",
        "50",
        "--nmax",
        "80",
    ]));
    assert!(csv.starts_with("xi,value,defined\n"));
    let rows = rows(&csv);
    assert_eq!(rows.len(), 50);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[49][0].parse::<f64>().unwrap(), 10.0);
    for r in rows {
        assert_eq!(r[2], "1");
        assert!((r[1].parse::<f64>().unwrap() - 1.0).abs() <= 0.05);
    }
}

#[test]
fn sweep_unity_i0_is_negative() {
    let csv = stdout(&run(&[
        "sweep",
        "--diagnostic",
        "i0",
        "--f",
        "unity",
        "--q",
        "1",
        "--xi-start",
        "1",
        "--xi-end",
        "10",
        "--steps",
        "50",
        "--nmax",
        "80",
    ]));
    for r in rows(&csv) {
        assert!(r[1].parse::<f64>().unwrap() < 0.0);
    }
}

#[test]
fn sweep_marks_undefined_rows() {
    // q = 0 with nmax = 0 puts all weight on |0,0>, so g2 has a zero denominator
    let csv = stdout(&run(&[
        "sweep",
        "--diagnostic",
        "g2_b",
        "--f",
        "unity",
        "--q",
        "0",
        "--xi-start",
        "-1",
        "--xi-end",
        "1",
        "--steps",
        "3",
        "--nmax",
        "0",
    ]));
    for r in rows(&csv) {
        assert_eq!(&r[1..], ["", "0"]);
    }
}

#[test]
fn pnd_single_ket_and_sum() {
    let csv = stdout(&run(&[
        "pnd", "--f", "sqrt", "--q", "3", "--xi", "2", "--nmax", "0",
    ]));
    assert_eq!(csv, "n,na,nb,p\n0,3,0,1.0000000000000000e0\n");

    let csv = stdout(&run(&[
        "pnd", "--f", "unity", "--q", "2", "--xi", "5", "--nmax", "80",
    ]));
    let p: Vec<f64> = rows(&csv).iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(p.len(), 81);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let maxima = p.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count();
    assert!(maxima >= 2);
}

fn husimi_args(q: &str, grid: &str) -> Vec<String> {
    [
        "husimi", "--f", "unity", "--q", q, "--xi", "10", "--nmax", "80", "--alpha2", "1,1",
        "--xmin", "-1", "--xmax", "1", "--ymin", "-1", "--ymax", "1", "--grid", grid,
    ]
    .map(String::from)
    .to_vec()
}

fn origin_value(csv: &str) -> f64 {
    rows(csv)
        .iter()
        .find(|r| r[0].parse::<f64>().unwrap() == 0.0 && r[1].parse::<f64>().unwrap() == 0.0)
        .expect("origin row")[2]
        .parse()
        .unwrap()
}

#[test]
fn husimi_origin_hole_follows_charge_sign() {
    let args = husimi_args("1", "3");
    let csv = stdout(&run(&args.iter().map(String::as_str).collect::<Vec<_>>()));
    assert!(csv.starts_with("x,y,q\n"));
    assert_eq!(rows(&csv).len(), 9);
    assert_eq!(origin_value(&csv), 0.0);
    for r in rows(&csv) {
        assert!(r[2].parse::<f64>().unwrap() >= 0.0);
    }

    let args = husimi_args("-1", "3");
    let csv = stdout(&run(&args.iter().map(String::as_str).collect::<Vec<_>>()));
    assert!(origin_value(&csv) > 0.0);
}

#[test]
fn husimi_unit_square_has_four_rows() {
    let csv = stdout(&run(&[
        "husimi", "--f", "sqrt", "--q", "1", "--xi", "2", "--nmax", "10", "--alpha2", "0",
        "--xmin", "0", "--xmax", "1", "--ymin", "0", "--ymax", "1", "--grid", "2",
    ]));
    let r = rows(&csv);
    assert_eq!(r.len(), 4);
    let xy: Vec<(f64, f64)> = r
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert_eq!(xy, [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
}

#[test]
fn csv_round_trips_byte_identically() {
    let outputs = [
        stdout(&run(&[
            "sweep",
            "--diagnostic",
            "mandel_a",
            "--f",
            "ps:0.5",
            "--q",
            "1",
            "--xi-start",
            "1",
            "--xi-end",
            "10",
            "--steps",
            "20",
            "--nmax",
            "80",
        ])),
        stdout(&run(&[
            "pnd", "--f", "sqrt", "--q", "1", "--xi", "10", "--nmax", "80",
        ])),
        stdout(&run(&husimi_args("-2", "9")
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>())),
    ];
    for csv in outputs {
        let mut lines = csv.lines();
        let mut again = format!("{}\n", lines.next().unwrap());
        for line in lines {
            let fields: Vec<String> = line
                .split(',')
                .map(|t| {
                    if t.contains('e') {
                        format!("{:.16e}", t.parse::<f64>().unwrap())
                    } else if t.is_empty() {
                        String::new()
                    } else {
                        t.parse::<i64>().unwrap().to_string()
                    }
                })
                .collect();
            again.push_str(&fields.join(","));
            again.push('\n');
        }
        assert_eq!(again, csv);
    }
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = husimi_args("2", "25");
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let one = run_with_threads("1", &args);
    let many = run_with_threads("4", &args);
    let auto = run_with_threads("0", &args);
    assert_eq!(stdout(&one), stdout(&many));
    assert_eq!(stdout(&one), stdout(&auto));

    let sweep = [
        "sweep",
        "--diagnostic",
        "g12",
        "--f",
        "sqrt",
        "--q",
        "1",
        "--xi-start",
        "1",
        "--xi-end",
        "10",
        "--steps",
        "30",
        "--nmax",
        "80",
    ];
    assert_eq!(
        stdout(&run_with_threads("1", &sweep)),
        stdout(&run_with_threads("3", &sweep))
    );
}

#[test]
fn verify_reports_without_judging() {
    let report = json(&run(&[
        "verify", "--f", "unity", "--q", "1", "--xi", "5", "--nmax", "40", "--nmax2", "80",
    ]));
    for key in [
        "max_interior_residual",
        "boundary_residual",
        "pre_norm",
        "pre_norm2",
        "converged",
        "norm_divergent",
    ] {
        assert!(report.get(key).is_some(), "{key}");
    }
    assert!(report["max_interior_residual"].as_f64().unwrap() < 1e-12);
    assert!(report["pre_norm2"].as_f64().unwrap() > report["pre_norm"].as_f64().unwrap());
    assert_eq!(report["converged"].as_object().unwrap().len(), 5);

    // overflowing raw weights are reported through the log fields
    let report = json(&run(&[
        "verify", "--f", "ps:0.5", "--q", "1", "--xi", "5", "--nmax", "40", "--nmax2", "80",
    ]));
    assert!(report["log_pre_norm2"].as_f64().unwrap() > report["log_pre_norm"].as_f64().unwrap());
    assert!(report["norm_divergent"].is_boolean());
}

#[test]
fn reproduce_writes_every_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 2 * (2 + 4 + 4 + 4 + 4 + 8));
    for kind in ["mandel_a", "g2_a", "g12", "i0", "pnd", "husimi"] {
        assert!(
            names.iter().any(|n| n.starts_with(&format!("{kind}_"))),
            "{kind}"
        );
    }
    assert!(names.contains(&"husimi_qdef-7_q-3.verify.json".to_string()));
    let pnd = std::fs::read_to_string(dir.path().join("pnd_unity_q2.csv")).unwrap();
    assert_eq!(rows(&pnd).len(), 81);
}
