//! End-to-end tests of the binary: envelope shape, exit codes, worked
//! examples, determinism of seeded runs, and figure CSV consistency.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use unital::channel::{identity_channel, kraus_to_choi, werner_holevo, ChoiState};
use unital::covariant::{negativity, CovariantCoords, CovariantState};
use unital::linalg::CMatrix;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unital"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write_tmp(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("unital-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).expect("temp file writable");
    path
}

fn tmp_out(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("unital-cli-{}-{name}", std::process::id()))
}

#[test]
fn argv_problems_exit_two_and_help_exits_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["covariant", "--help"])), 0);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    // covariant point group: missing entirely, and mixed parametrizations
    assert_eq!(code(&run(&["covariant", "coords", "--d", "3"])), 2);
    assert_eq!(
        code(&run(&[
            "covariant", "coords", "--d", "3", "--q0", "1", "--epsilon", "0"
        ])),
        2
    );
    assert_eq!(
        code(&run(&["covariant", "coords", "--d", "3", "--q1", "0.5"])),
        2
    );
    // extremal: exactly one of file / --example
    assert_eq!(code(&run(&["extremal"])), 2);
    let ch = write_tmp("both.json", &werner_holevo(3).unwrap().to_json_string());
    assert_eq!(
        code(&run(&["extremal", ch.to_str().unwrap(), "--example"])),
        2
    );
    // optimize without a seed: reproducibility is not optional
    assert_eq!(
        code(&run(&[
            "optimize",
            "--objective",
            "tr-u-ubar-t2",
            "--d",
            "3",
            "--D",
            "1"
        ])),
        2
    );
}

#[test]
fn check_reports_channel_properties() {
    let ch = write_tmp("wh3.json", &werner_holevo(3).unwrap().to_json_string());
    let out = run(&["check", ch.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["command"], "check");
    assert_eq!(v["status"], "ok");
    assert_eq!(v["inputs"]["channel"], ch.to_str().unwrap());
    assert_eq!(v["outputs"]["d"], 3);
    assert_eq!(v["outputs"]["n_kraus"], 3);
    assert_eq!(v["outputs"]["cp"], true);
    assert_eq!(v["outputs"]["tp"], true);
    assert_eq!(v["outputs"]["unital"], true);
    assert!(v["outputs"]["tp_defect"].as_f64().unwrap() < 1e-12);
}

#[test]
fn malformed_channel_files_exit_three() {
    // a Kraus block that is not square
    let bad = write_tmp(
        "nonsquare.json",
        r#"{"d":2,"kraus":[{"rows":2,"cols":3,"re":[1,0,0,0,1,0],"im":[0,0,0,0,0,0]}]}"#,
    );
    let out = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let v = json_of(&out);
    assert_eq!(v["status"], "error");
    assert!(v["outputs"]["message"].as_str().unwrap().contains("2x3"));
    // not JSON at all
    let garbled = write_tmp("garbled.json", "not a channel");
    assert_eq!(code(&run(&["check", garbled.to_str().unwrap()])), 3);
    // missing file
    assert_eq!(code(&run(&["check", "/nonexistent/channel.json"])), 3);
    // wrong entry count inside a matrix
    let short = write_tmp(
        "short.json",
        r#"{"d":2,"kraus":[{"rows":2,"cols":2,"re":[1,0],"im":[0,0]}]}"#,
    );
    assert_eq!(code(&run(&["check", short.to_str().unwrap()])), 3);
}

#[test]
fn choi_emits_the_dual_state() {
    let ch = write_tmp("id2.json", &identity_channel(2).to_json_string());
    let out = run(&["choi", ch.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    let state: ChoiState = serde_json::from_value(v["outputs"]["state"].clone()).unwrap();
    let want = kraus_to_choi(&identity_channel(2));
    assert_eq!(state.d(), 2);
    assert!((state.rho() - want.rho()).max_abs() < 1e-15);
    assert!(v["outputs"]["tp_defect"].as_f64().unwrap() < 1e-15);
    assert!(v["outputs"]["unital_defect"].as_f64().unwrap() < 1e-15);
}

#[test]
fn negativity_example_is_exactly_one_half() {
    let out = run(&["covariant", "negativity", "--d", "3", "--epsilon", "0.6667"]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["command"], "covariant negativity");
    // 0.6667 is a decimal stand-in for 2/3: it snaps to the endpoint and the
    // result is the extreme antisymmetric state, negativity exactly 1/(d-1)
    assert_eq!(v["outputs"]["negativity"].as_f64().unwrap(), 0.5);
    assert_eq!(v["outputs"]["x"].as_f64().unwrap(), -1.0);
    assert_eq!(
        v["outputs"]["epsilon_used"].as_f64().unwrap(),
        2.0 / 3.0
    );
    // inputs echo the raw argument, not the snapped value
    assert_eq!(v["inputs"]["epsilon"].as_f64().unwrap(), 0.6667);
    // far outside the snap width stays an error
    assert_eq!(
        code(&run(&["covariant", "negativity", "--d", "3", "--epsilon", "0.9"])),
        4
    );
    // negativity needs odd d
    assert_eq!(
        code(&run(&[
            "covariant", "negativity", "--d", "4", "--q0", "0.0", "--q1", "1.0", "--q2", "0.0"
        ])),
        4
    );
}

#[test]
fn covariant_point_routes_and_domain_errors() {
    // even-dimension membership is the whole triangle
    let out = run(&[
        "covariant", "membership", "--d", "4", "--q0", "0.25", "--q1", "0.25", "--q2", "0.5",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["outputs"]["member"], true);
    // the antisymmetric state escapes for odd d
    let out = run(&[
        "covariant", "membership", "--d", "3", "--q0", "0", "--q1", "1", "--q2", "0",
    ]);
    assert_eq!(json_of(&out)["outputs"]["member"], false);
    // weights must lie on the simplex
    assert_eq!(
        code(&run(&[
            "covariant", "coords", "--d", "3", "--q0", "0.9", "--q1", "0.9", "--q2", "0.9"
        ])),
        4
    );
    // the epsilon family needs odd d
    assert_eq!(
        code(&run(&["covariant", "coords", "--d", "4", "--epsilon", "0.1"])),
        4
    );
    // a slightly negative epsilon snaps to 0: the family boundary point
    let out = run(&["covariant", "coords", "--d", "5", "--epsilon", "-0.0005"]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["outputs"]["epsilon_used"].as_f64().unwrap(), 0.0);
    assert!((v["outputs"]["x"].as_f64().unwrap() - (-0.6)).abs() < 1e-15);
}

#[test]
fn quaternion_certificates_match_the_examples() {
    let out = run(&["birkhoff", "quaternion", "--d", "3"]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert!((v["outputs"]["y"].as_f64().unwrap() - (-7.0 / 9.0)).abs() < 1e-12);
    assert_eq!(v["outputs"]["hermitian"], true);
    assert_eq!(v["outputs"]["unitary"], true);
    let out = run(&["birkhoff", "quaternion", "--d", "5"]);
    let v = json_of(&out);
    assert!((v["outputs"]["y"].as_f64().unwrap() - (-23.0 / 25.0)).abs() < 1e-12);
    // no quaternion model outside d in {3, 5}
    assert_eq!(code(&run(&["birkhoff", "quaternion", "--d", "4"])), 4);
    assert_eq!(code(&run(&["birkhoff", "quaternion", "--d", "7"])), 4);
}

#[test]
fn depolarizing_verdict_flips_at_the_threshold() {
    // threshold for d = 3 is eps = 2(d-1)/d^2 = 4/9
    let out = run(&[
        "birkhoff", "depolarizing", "--d", "3", "--D", "2", "--epsilon", "0.4",
    ]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["outputs"]["restored"], true);
    assert!((v["outputs"]["y"].as_f64().unwrap() - (-1.0 / 3.0 - 0.4)).abs() < 1e-12);
    let out = run(&[
        "birkhoff", "depolarizing", "--d", "3", "--D", "2", "--epsilon", "0.46",
    ]);
    assert_eq!(json_of(&out)["outputs"]["restored"], false);
    // only the qubit partner is certified
    assert_eq!(
        code(&run(&[
            "birkhoff", "depolarizing", "--d", "3", "--D", "3", "--epsilon", "0.4"
        ])),
        4
    );
}

#[test]
fn two_copy_membership_flips_at_epsilon_star() {
    let out = run(&["birkhoff", "two-copy", "--epsilon", "0.31"]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["outputs"]["member"], true);
    let f = v["outputs"]["f"].as_f64().unwrap();
    let f12 = v["outputs"]["f12"].as_f64().unwrap();
    assert!((f - (-1.0 / 3.0 - 0.31)).abs() < 1e-12);
    assert!((f12 - f * f).abs() < 1e-12);
    assert!(
        (v["outputs"]["epsilon_star"].as_f64().unwrap() - 0.316532165396677).abs() < 1e-12
    );
    let out = run(&["birkhoff", "two-copy", "--epsilon", "0.35"]);
    assert_eq!(json_of(&out)["outputs"]["member"], false);
    assert_eq!(code(&run(&["birkhoff", "two-copy", "--epsilon", "0.8"])), 4);
}

#[test]
fn witness_reports_the_tight_constant_and_evaluates() {
    let b = write_tmp("b-id3.json", &CMatrix::identity(3).to_json_string());
    let out = run(&["witness", "--b", b.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    // w(1) = 1 - 2/d for odd d
    assert!((v["outputs"]["w"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!(v["outputs"].get("value").is_none());

    let rho = write_tmp(
        "wh3-choi.json",
        &kraus_to_choi(&werner_holevo(3).unwrap()).to_json_string(),
    );
    let out = run(&[
        "witness",
        "--b",
        b.to_str().unwrap(),
        "--rho",
        rho.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert!((v["outputs"]["value"].as_f64().unwrap() - (-2.0 / 3.0)).abs() < 1e-12);
    assert_eq!(v["outputs"]["certifies_outside"], true);

    // a non-square B is a file problem
    let bad = write_tmp(
        "b-rect.json",
        r#"{"rows":2,"cols":3,"re":[1,0,0,0,1,0],"im":[0,0,0,0,0,0]}"#,
    );
    assert_eq!(code(&run(&["witness", "--b", bad.to_str().unwrap()])), 3);
    // mismatched dimensions between the two files as well
    let b2 = write_tmp("b-id2.json", &CMatrix::identity(2).to_json_string());
    assert_eq!(
        code(&run(&[
            "witness",
            "--b",
            b2.to_str().unwrap(),
            "--rho",
            rho.to_str().unwrap()
        ])),
        3
    );
}

#[test]
fn optimize_is_byte_identical_and_finds_the_floor() {
    let args = [
        "optimize",
        "--objective",
        "tr-u-ubar-t2",
        "--d",
        "3",
        "--D",
        "1",
        "--restarts",
        "6",
        "--seed",
        "11",
        "--max-iter",
        "500",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    let v = json_of(&first);
    // min tr[U conj(U)]/d over U(3) is -1 + 2/3
    assert!((v["outputs"]["value"].as_f64().unwrap() - (-1.0 / 3.0)).abs() < 1e-3);
    assert_eq!(v["outputs"]["restarts_used"], 6);
    assert!(v["outputs"].get("minimizer").is_none());

    // degenerate dimensions are a parameter problem
    assert_eq!(
        code(&run(&[
            "optimize",
            "--objective",
            "tr-usym-pt",
            "--d",
            "0",
            "--D",
            "2",
            "--seed",
            "1"
        ])),
        4
    );
}

#[test]
fn decompose_affine_is_seeded_and_reconstructs() {
    let ch = write_tmp("wh3-aff.json", &werner_holevo(3).unwrap().to_json_string());
    let args = [
        "decompose",
        "affine",
        ch.to_str().unwrap(),
        "--seed",
        "7",
    ];
    let first = run(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, run(&args).stdout);
    let v = json_of(&first);
    assert!(v["outputs"]["residual"].as_f64().unwrap() < 1e-8);
    assert!((v["outputs"]["coefficient_sum"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(v["outputs"]["generators"], 66);
    let coeffs = v["outputs"]["coefficients"].as_array().unwrap();
    assert_eq!(coeffs.len(), 66);
    // affine, not convex: some coefficient is negative for this channel
    assert!(coeffs.iter().any(|c| c.as_f64().unwrap() < 0.0));
}

#[test]
fn decompose_hs_splits_into_two_unitaries() {
    let ch = write_tmp("wh3-hs.json", &werner_holevo(3).unwrap().to_json_string());
    let out = run(&["decompose", "hs", ch.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["outputs"]["weights"][0].as_f64().unwrap(), 0.5);
    assert_eq!(v["outputs"]["weights"][1].as_f64().unwrap(), 0.5);
    assert!(v["outputs"]["residual"].as_f64().unwrap() < 1e-10);
    for k in 0..2 {
        let u: CMatrix =
            serde_json::from_value(v["outputs"]["hs_unitaries"][k].clone()).unwrap();
        assert!(u.unitary_defect() < 1e-8);
    }
}

#[test]
fn extremal_example_separates_the_two_notions() {
    let out = run(&["extremal", "--example"]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["outputs"]["d"], 3);
    assert_eq!(v["outputs"]["report"]["extremal_in_unital"], true);
    assert_eq!(v["outputs"]["report"]["extremal_in_all"], false);
    assert_eq!(v["outputs"]["report"]["n_kraus"], 4);

    // a unitary conjugation is extremal in both senses
    let ch = write_tmp("id3-ext.json", &identity_channel(3).to_json_string());
    let v = json_of(&run(&["extremal", ch.to_str().unwrap()]));
    assert_eq!(v["outputs"]["report"]["extremal_in_unital"], true);
    assert_eq!(v["outputs"]["report"]["extremal_in_all"], true);
}

#[test]
fn figure_two_copy_emits_the_pair_plane() {
    let out_path = tmp_out("fig-two-copy.csv");
    let args = [
        "figure",
        "two-copy",
        "--d",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ];
    let out = run(&args);
    assert_eq!(code(&out), 0);
    let body = std::fs::read_to_string(&out_path).unwrap();
    let again = run(&args);
    assert_eq!(code(&again), 0);
    assert_eq!(body, std::fs::read_to_string(&out_path).unwrap());
    assert_eq!(out.stdout, again.stdout);

    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("section,f,f12"));
    assert_eq!(lines.next(), Some("triangle,1,1"));
    // the hull boundary starts at the curve's left end and closes the loop
    assert!(body.contains("\nregion,-0.8518518518518519,1\n"));
    let marker: Vec<&str> = body
        .lines()
        .filter(|l| l.starts_with("epsilon_star,"))
        .collect();
    assert_eq!(marker.len(), 1);
    let fields: Vec<f64> = marker[0]
        .split(',')
        .skip(1)
        .map(|s| s.parse().unwrap())
        .collect();
    let x = -1.0 / 3.0 - 0.316532165396677;
    assert!((fields[0] - x).abs() < 1e-12);
    assert!((fields[1] - x * x).abs() < 1e-12);

    // the pair plane is a d = 3 analysis
    assert_eq!(
        code(&run(&["figure", "two-copy", "--d", "5", "--out", "/tmp/x.csv"])),
        4
    );
    // unwritable output is a file problem
    assert_eq!(
        code(&run(&[
            "figure",
            "two-copy",
            "--d",
            "3",
            "--out",
            "/nonexistent-dir/fig.csv"
        ])),
        3
    );
}

#[test]
fn figure_covariant_traces_triangle_boundary_and_segment() {
    let out_path = tmp_out("fig-covariant.csv");
    let out = run(&[
        "figure",
        "covariant",
        "--d",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(
        v["outputs"]["sections"],
        serde_json::json!(["triangle", "boundary", "covariant_segment"])
    );
    let body = std::fs::read_to_string(&out_path).unwrap();
    assert!(body.starts_with("section,x,y\ntriangle,1,3\n"));
    // segment from the antisymmetric state to the symmetric projector
    assert!(body.contains("\ncovariant_segment,-1,0\n"));
    assert!(body.ends_with("covariant_segment,1,0.5\n"));
    // boundary rises from (lo, 0) and ends at the ideal-channel vertex (1, 3)
    assert!(body.contains("\nboundary,-0.33333333333333337,0\n"));
    assert!(body.contains("\nboundary,1,3\n"));

    // even d: the boundary collapses onto the triangle
    let out_path4 = tmp_out("fig-covariant-d4.csv");
    let out = run(&[
        "figure",
        "covariant",
        "--d",
        "4",
        "--out",
        out_path4.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let body = std::fs::read_to_string(&out_path4).unwrap();
    assert!(body.contains("\nboundary,1,4\n"));
    assert!(body.contains("\nboundary,-1,0\n"));

    assert_eq!(
        code(&run(&["figure", "covariant", "--d", "1", "--out", "/tmp/x.csv"])),
        4
    );
}

#[test]
fn figure_negativity_levels_match_the_closed_form() {
    let out_path = tmp_out("fig-negativity.csv");
    let out = run(&[
        "figure",
        "negativity",
        "--d",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let body = std::fs::read_to_string(&out_path).unwrap();
    let mut seen = [0usize; 5];
    for line in body.lines().skip(1) {
        let mut it = line.split(',');
        let section = it.next().unwrap();
        let Some(rest) = section.strip_prefix("level_") else {
            continue;
        };
        let k: usize = rest.parse().unwrap();
        let x: f64 = it.next().unwrap().parse().unwrap();
        let y: f64 = it.next().unwrap().parse().unwrap();
        let state = CovariantState::from_coords(3, CovariantCoords { x, y }).unwrap();
        let want = k as f64 / 5.0 / 2.0;
        assert!(
            (negativity(&state).unwrap() - want).abs() < 1e-9,
            "level_{k} point ({x}, {y}) off the level"
        );
        seen[k - 1] += 1;
    }
    assert!(seen.iter().all(|&n| n > 0), "every level populated: {seen:?}");
    // the maximal level degenerates to the antisymmetric corner
    assert_eq!(seen[4], 1);

    assert_eq!(
        code(&run(&["figure", "negativity", "--d", "4", "--out", "/tmp/x.csv"])),
        4
    );
}
