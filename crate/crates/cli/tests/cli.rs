use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bvdual::json::{to_canonical_string, ObservableJson, Precision};
use bvdual::testing::{random_c64_polynomial, random_form};
use bvdual::{LinearObservable, ModeTruncation, PolynomialObservable, TheorySpec};
use rand::SeedableRng;
use serde_json::Value;

fn bvdual(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bvdual"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn stdout_json(o: &Output) -> Value {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).unwrap()
}

fn error_code(o: &Output) -> String {
    let v: Value = serde_json::from_slice(&o.stderr).expect("error JSON on stderr");
    v["error"]["code"].as_str().unwrap().to_string()
}

const O4: &str = r#"{"kind":"polynomial","dimension":2,"degree":1,
 "generators":[{"degree":1,"cutoff":16,"label":"O","modes":[{"k":[1,0],"phase":"cos","idx":[0],"re":1.0}]}],
 "terms":[{"exps":[4],"re":1.0}],
 "theory":{"variant":"pform","dimension":2,"degree":1,"coupling":0.7071067811865476,"cutoff":16}}"#;

fn constant(variant: &str) -> String {
    format!(
        r#"{{"kind":"polynomial","dimension":2,"degree":1,"generators":[],"terms":[{{"exps":[],"re":1.0}}],
        "theory":{{"variant":"{variant}","dimension":2,"degree":1,"coupling":1.0,"cutoff":16}}}}"#
    )
}

#[test]
fn constant_observable_has_expectation_one_by_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let open = write(dir.path(), "c.json", &constant("pform"));
    let closed = write(dir.path(), "cc.json", &constant("closed_pform"));
    for (file, method) in [
        (&open, "diagrams"),
        (&open, "isserlis"),
        (&open, "montecarlo"),
        (&closed, "lattice"),
    ] {
        let v = stdout_json(&bvdual(&[
            "expect",
            "--observable",
            file.to_str().unwrap(),
            "--method",
            method,
        ]));
        assert_eq!(v["value"]["re"].as_f64().unwrap(), 1.0, "{method}");
        assert_eq!(v["method"], method);
        assert!(v["tail_bound"].is_number());
    }
}

#[test]
fn diagrams_and_isserlis_agree_on_fourth_power() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "o4.json", O4);
    let a = stdout_json(&bvdual(&[
        "expect",
        "--observable",
        f.to_str().unwrap(),
        "--method",
        "diagrams",
    ]));
    let b = stdout_json(&bvdual(&[
        "expect",
        "--observable",
        f.to_str().unwrap(),
        "--method",
        "isserlis",
    ]));
    assert_eq!(a["value"], b["value"]);
    assert_eq!(a["value"]["re"].as_f64().unwrap(), 3.0);
}

#[test]
fn missing_file_is_an_io_error() {
    let o = bvdual(&["expect", "--observable", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o), "E_IO");
}

#[test]
fn dual_of_fourth_power_is_hermite() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "o4.json", O4);
    let full = stdout_json(&bvdual(&["dualize", "--observable", f.to_str().unwrap()]));
    for (t, want) in full["terms"]
        .as_array()
        .unwrap()
        .iter()
        .zip([3.0, -6.0, 1.0])
    {
        assert!((t["re"].as_f64().unwrap() - want).abs() < 1e-12);
    }
    let v = stdout_json(&bvdual(&[
        "dualize",
        "--canonical",
        "--observable",
        f.to_str().unwrap(),
    ]));
    let terms: Vec<(u64, f64, f64)> = v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| {
            (
                t["exps"][0].as_u64().unwrap(),
                t["re"].as_f64().unwrap(),
                t["im"].as_f64().unwrap(),
            )
        })
        .collect();
    assert_eq!(terms, vec![(0, 3.0, 0.0), (2, -6.0, 0.0), (4, 1.0, 0.0)]);
    assert_eq!(v["theory"]["degree"], 1);
    assert!((v["theory"]["coupling"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn inverse_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
    for (case, (n, p, r)) in [(2, 1, 0.8), (3, 1, 1.2), (3, 2, 0.6)]
        .into_iter()
        .enumerate()
    {
        let trunc = ModeTruncation::new(16);
        let theory = TheorySpec::pform(n, p, r, 16).unwrap();
        let gens = (0..2)
            .map(|i| LinearObservable::new(random_form(&mut rng, n, p, trunc, 4), format!("b{i}")))
            .collect();
        let o = PolynomialObservable::new(n, p, gens, random_c64_polynomial(&mut rng, 2, 4, 5))
            .unwrap()
            .canonical()
            .unwrap();
        // the canonical file is the rounded one
        let text = to_canonical_string(&ObservableJson::from_polynomial(
            &o,
            Some(theory),
            Precision::Canonical,
        ))
        .unwrap();
        let input = write(dir.path(), &format!("in{case}.json"), &text);
        let reread = stdout_json(&bvdual(&[
            "dualize",
            "--inverse",
            "--observable",
            input.to_str().unwrap(),
        ]));
        assert!(reread.is_object());
        let dual = dir.path().join(format!("dual{case}.json"));
        let back = dir.path().join(format!("back{case}.json"));
        assert!(bvdual(&[
            "dualize",
            "--observable",
            input.to_str().unwrap(),
            "--out",
            dual.to_str().unwrap()
        ])
        .status
        .success());
        assert!(bvdual(&[
            "dualize",
            "--inverse",
            "--canonical",
            "--observable",
            dual.to_str().unwrap(),
            "--out",
            back.to_str().unwrap(),
        ])
        .status
        .success());
        assert_eq!(fs::read_to_string(&back).unwrap(), text);
    }
}

fn closed_and_lift(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(5);
    let trunc = ModeTruncation::new(9);
    let theory = TheorySpec::pform(2, 1, 1.0, 9).unwrap();
    let gens = vec![LinearObservable::new(
        bvdual::testing::random_form_with_harmonic(&mut rng, 2, 1, trunc, 4),
        "b0",
    )];
    let lift =
        PolynomialObservable::new(2, 1, gens, random_c64_polynomial(&mut rng, 1, 3, 3)).unwrap();
    let closed_theory = theory.with_variant(bvdual::Variant::ClosedPForm).unwrap();
    let restricted = lift.restrict_to_closed().unwrap();
    let lift_path = write(
        dir,
        "lift.json",
        &to_canonical_string(&ObservableJson::from_polynomial(
            &lift,
            None,
            Precision::Canonical,
        ))
        .unwrap(),
    );
    let closed = write(
        dir,
        "closed.json",
        &to_canonical_string(&ObservableJson::from_polynomial(
            &restricted,
            Some(closed_theory),
            Precision::Canonical,
        ))
        .unwrap(),
    );
    let other = PolynomialObservable::new(
        2,
        1,
        vec![LinearObservable::new(
            random_form(&mut rng, 2, 1, trunc, 3),
            "c",
        )],
        random_c64_polynomial(&mut rng, 1, 2, 2),
    )
    .unwrap();
    let wrong = write(
        dir,
        "wrong.json",
        &to_canonical_string(&ObservableJson::from_polynomial(
            &other,
            None,
            Precision::Canonical,
        ))
        .unwrap(),
    );
    (closed, lift_path, wrong)
}

#[test]
fn closed_input_needs_a_lift() {
    let dir = tempfile::tempdir().unwrap();
    let (closed, lift, wrong) = closed_and_lift(dir.path());
    let o = bvdual(&["dualize", "--observable", closed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_code(&o), "E_NEEDS_LIFT");

    let cfg = write(
        dir.path(),
        "lift.toml",
        &format!("lift = {:?}\n", lift.file_name().unwrap().to_str().unwrap()),
    );
    let v = stdout_json(&bvdual(&[
        "dualize",
        "--observable",
        closed.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]));
    assert_eq!(v["theory"]["variant"], "closed_pform");
    assert_eq!(v["theory"]["coupling"].as_f64().unwrap(), 0.5);

    let bad = write(
        dir.path(),
        "bad.toml",
        &format!("lift = {:?}\n", wrong.to_str().unwrap()),
    );
    let o = bvdual(&[
        "dualize",
        "--observable",
        closed.to_str().unwrap(),
        "--config",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_code(&o), "E_LIFT_MISMATCH");
}

#[test]
fn verify_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hermite.json");
    let o = bvdual(&["verify", "hermite", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("suite,check,measured,tolerance,passed"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(!csv.contains("runtime"));
    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report[0]["passed"], true);
    assert!(report[0]["runtime_seconds"].is_null());
    assert_eq!(fs::read_to_string(out.with_extension("csv")).unwrap(), csv);

    let timed = bvdual(&["verify", "hermite", "--timings"]);
    assert!(String::from_utf8(timed.stdout)
        .unwrap()
        .contains("runtime_seconds"));

    let o = bvdual(&["verify", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "o4.json", O4);
    let run = || {
        bvdual(&[
            "expect",
            "--observable",
            f.to_str().unwrap(),
            "--method",
            "montecarlo",
            "--seed",
            "9",
        ])
        .stdout
    };
    assert_eq!(run(), run());
    let threads = bvdual(&[
        "expect",
        "--observable",
        f.to_str().unwrap(),
        "--method",
        "montecarlo",
        "--seed",
        "9",
        "--threads",
        "1",
    ]);
    assert_eq!(threads.stdout, run());
}

#[test]
fn config_errors_and_guards() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "o4.json", O4);
    let cfg = write(dir.path(), "typo.toml", "lattice_cutof = 3.0\n");
    let o = bvdual(&[
        "expect",
        "--observable",
        f.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o), "E_PARSE");

    let big = write(
        dir.path(),
        "big.json",
        &O4.replace("\"exps\":[4]", "\"exps\":[26]"),
    );
    let o = bvdual(&["expect", "--observable", big.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_code(&o), "E_TOO_LARGE");

    let o = bvdual(&[
        "expect",
        "--observable",
        f.to_str().unwrap(),
        "--method",
        "lattice",
    ]);
    assert_eq!(o.status.code(), Some(3));

    let o = bvdual(&["expect"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o), "E_USAGE");
}

#[test]
fn config_supplies_theory_and_lambda_projects_forms() {
    let dir = tempfile::tempdir().unwrap();
    let text = O4.replace(
        r#","theory":{"variant":"pform","dimension":2,"degree":1,"coupling":0.7071067811865476,"cutoff":16}"#,
        "",
    );
    let f = write(dir.path(), "o4.json", &text);
    let cfg = write(
        dir.path(),
        "run.toml",
        "seed = 3\n[theory]\nvariant = \"pform\"\ndimension = 2\ndegree = 1\ncoupling = 1.0\ncutoff = 16\n",
    );
    let v = stdout_json(&bvdual(&[
        "expect",
        "--observable",
        f.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]));
    // <O^4> = 3 (1/2R^2)^2
    assert!((v["value"]["re"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    // the only mode has |k|^2 = 1, so a zero cutoff leaves the zero observable
    let v = stdout_json(&bvdual(&[
        "expect",
        "--observable",
        f.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--lambda",
        "0",
    ]));
    assert_eq!(v["value"]["re"].as_f64().unwrap(), 0.0);
    assert_eq!(v["mode_cutoff"], 0);
}

#[test]
fn wilson_observable_from_a_chain() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"kind":"wilson","chain":{"type":"coordinate_cycle","indices":[0],"offset":[0.0,0.7]},
        "epsilon":0.1,"dimension":2,"cutoff":64,"charge":{"re":1.0,"im":0.0},
        "theory":{"variant":"pform","dimension":2,"degree":1,"coupling":1.0,"cutoff":64}}"#;
    let f = write(dir.path(), "w.json", text);
    let d = dir.path().join("t.json");
    assert!(bvdual(&[
        "dualize",
        "--observable",
        f.to_str().unwrap(),
        "--out",
        d.to_str().unwrap()
    ])
    .status
    .success());
    let dual: Value = serde_json::from_str(&fs::read_to_string(&d).unwrap()).unwrap();
    assert_eq!(dual["kind"], "thooft");
    assert!(dual["prefactor"]["re"].as_f64().unwrap() < 1.0);

    let closed = |p: &Path, name: &str| {
        let t = fs::read_to_string(p)
            .unwrap()
            .replace("\"pform\"", "\"closed_pform\"");
        write(dir.path(), name, &t)
    };
    let a = stdout_json(&bvdual(&[
        "expect",
        "--observable",
        closed(&f, "wc.json").to_str().unwrap(),
    ]));
    let b = stdout_json(&bvdual(&[
        "expect",
        "--observable",
        closed(&d, "tc.json").to_str().unwrap(),
    ]));
    let rel = (a["value"]["re"].as_f64().unwrap() - b["value"]["re"].as_f64().unwrap()).abs()
        / a["value"]["re"].as_f64().unwrap().abs();
    assert!(rel < 1e-6, "{a} vs {b}");
}
