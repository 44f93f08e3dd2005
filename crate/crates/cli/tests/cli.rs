use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).to_string_lossy().into_owned()
}

fn holo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holo")).args(args).output().expect("spawn holo")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("holo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_trivial_two_tangle_summary() {
    let o = holo(&["solve", &data("trivial2.json"), "--traceless", "--seed", "3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let rows: Vec<Vec<&str>> = s.lines().skip(1).map(|l| l.split_whitespace().collect()).collect();
    let abelian = rows.iter().find(|r| r[0] == "U1").expect("abelian row");
    assert_eq!(abelian[2], "2");
    let irr = rows.iter().find(|r| r[0] == "Z2").expect("irreducible row");
    assert_eq!(irr[3], "1", "{s}");
}

#[test]
fn pillowcase_abelian_classes_are_the_corners() {
    let pts = tmp("corners.json");
    let csv = tmp("corners.csv");
    let o = holo(&["solve", &data("pillowcase.json"), "--traceless", "--ansatz", "abelian", "--out", pts.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("U1         U1               4"));
    let o = holo(&["reduce", pts.to_str().unwrap(), "--chart", "pillowcase", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let corners = text.lines().skip(1).filter(|l| l.ends_with(",1")).count();
    assert_eq!(corners, 4, "{text}");
}

#[test]
fn trivial_tangle_image_is_an_edge_arc() {
    let pts = tmp("arc.json");
    let csv = tmp("arc.csv");
    let svg = tmp("arc.svg");
    assert!(holo(&["solve", &data("trivial2.json"), "--traceless", "--out", pts.to_str().unwrap()]).status.success());
    let o = holo(&[
        "reduce",
        pts.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
        "--polyline",
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut thetas = Vec::new();
    for l in text.lines().skip(1) {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f[0].parse::<f64>().unwrap(), 0.0, "point off the edge: {l}");
        thetas.push(f[1].parse::<f64>().unwrap());
    }
    assert_eq!(thetas.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
    assert!((thetas.iter().cloned().fold(0.0, f64::max) - std::f64::consts::PI).abs() < 1e-12);
    let picture = std::fs::read_to_string(&svg).unwrap();
    assert!(picture.contains("<polyline"));
    assert!(picture.contains(r#"width="512" height="512""#));
}

#[test]
fn fingerprint_chart_for_six_points() {
    let tangle = tmp("sphere3.json");
    std::fs::write(
        &tangle,
        serde_json::to_string(&holo_core::tangles::sphere_tangle(3).unwrap()).unwrap(),
    )
    .unwrap();
    let pts = tmp("sphere3_points.json");
    let o = holo(&["solve", tangle.to_str().unwrap(), "--traceless", "--restarts", "8", "--ansatz", "none", "--out", pts.to_str().unwrap()]);
    assert!(o.status.success());
    let o = holo(&["reduce", pts.to_str().unwrap(), "--chart", "fingerprint"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("f0,f1,"));
    let o = holo(&["reduce", pts.to_str().unwrap(), "--chart", "pillowcase"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_constraints_exit_two() {
    assert_eq!(holo(&["solve", &data("empty.json")]).status.code(), Some(2));
    assert_eq!(holo(&["solve"]).status.code(), Some(2));
    assert_eq!(holo(&["solve", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn flow_examples() {
    let out = tmp("flowed.json");
    let o = holo(&["flow", "--genus", "2", "--curve", "C_I(1)", "--t", "0.7", "--rep", &data("genus2_rep.json"), "--out", out.to_str().unwrap(), "--check"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: holo_core::Representation = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let a1 = rep.get("A1").unwrap();
    let (c, s) = (0.7f64.cos(), 0.7f64.sin());
    assert!(a1.distance(holo_core::UnitQuaternion::new(0.0, c, 0.0, -s)) < 1e-14);

    let o = holo(&["flow", "--genus", "2", "--curve", "C_III(2)", "--t", "0", "--rep", &data("genus2_rep.json")]);
    let zero: holo_core::Representation = serde_json::from_str(&stdout(&o)).unwrap();
    let input: holo_core::Representation =
        serde_json::from_str(&std::fs::read_to_string(data("genus2_rep.json")).unwrap()).unwrap();
    assert_eq!(zero, input);

    let o = holo(&["flow", "--genus", "2", "--curve", "C_XIX(1)", "--t", "1", "--rep", &data("genus2_rep.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn off_variety_flow_input_exit_three() {
    let bad = tmp("bad_rep.json");
    std::fs::write(&bad, r#"{"A1":[1,0,0,0],"D1":[0,1,0,0],"A2":[0,0,1,0],"D2":[0.6,0.8,0,0]}"#).unwrap();
    let o = holo(&["flow", "--genus", "2", "--curve", "C_I(1)", "--t", "1", "--rep", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn probe_hypothesis_violation_exit_three() {
    let o = holo(&["probe", "--genus", "2", "--rep", &data("genus2_rep.json"), "--hypothesis", "abelian"]);
    assert_eq!(o.status.code(), Some(3));
    let o = holo(&["probe", "--genus", "2", "--samples", "2", "--check"]);
    assert!(o.status.success());
}

#[test]
fn output_independent_of_thread_count() {
    let run = |threads: &str| {
        let out = tmp(&format!("threads{threads}.json"));
        let o = Command::new(env!("CARGO_BIN_EXE_holo"))
            .env("HOLO_THREADS", threads)
            .args(["solve", &data("pillowcase.json"), "--traceless", "--seed", "9", "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(o.status.success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn selftest_flags() {
    for sub in ["solve", "classify", "flow", "reduce", "probe", "plot"] {
        let o = holo(&[sub, "--selftest"]);
        assert!(o.status.success(), "{sub}: {}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
    assert!(holo(&["selftest"]).status.success());
}

#[test]
fn plot_requires_svg() {
    assert_eq!(holo(&["plot", &data("genus2_rep.json")]).status.code(), Some(2));
}
