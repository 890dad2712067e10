//! End-to-end tests of the command line interface: exit codes, printed
//! certificates, file round trips and byte-level determinism.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use uniformize::angles::stereographic_subspace;
use uniformize::io;
use uniformize::map::WeightedMap;
use uniformize::shapes::{
    weighted_cube, weighted_genus_two, weighted_square_torus, weighted_truncated_tetrahedron,
};

fn run(args: &[&str], seed: Option<&str>) -> Output {
    let mut command = Command::new(env!("CARGO_BIN_EXE_uniformize"));
    command.args(args).env_remove("UNIFORMIZE_SEED");
    if let Some(seed) = seed {
        command.env("UNIFORMIZE_SEED", seed);
    }
    command.output().expect("the binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

fn write_fixture(dir: &Path, name: &str, weighted: &WeightedMap) -> PathBuf {
    let path = dir.join(name);
    io::write_map(&path, weighted).expect("fixture written");
    path
}

#[test]
fn validate_accepts_the_torus_and_rejects_the_truncated_tetrahedron() {
    let dir = tempfile::tempdir().unwrap();
    let torus = write_fixture(dir.path(), "torus.json", &weighted_square_torus());
    let trunc = write_fixture(dir.path(), "trunc.json", &weighted_truncated_tetrahedron());

    let good = run(&["validate", torus.to_str().unwrap()], None);
    assert!(good.status.success());
    assert!(stdout(&good).contains("verdict: valid"));

    let bad = run(&["validate", trunc.to_str().unwrap()], None);
    assert_eq!(bad.status.code(), Some(2));
    let text = stdout(&bad);
    assert!(text.contains("verdict: invalid"));
    assert!(text.contains("violated loop") || text.contains("violated cut"));
}

#[test]
fn init_rejects_the_truncated_tetrahedron_with_a_cut_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let weighted = weighted_truncated_tetrahedron();
    let trunc = write_fixture(dir.path(), "trunc.json", &weighted);
    let out = dir.path().join("angles.json");

    // Anchored at a triangle the flow problem is structurally well posed
    // and fails with a violated cut.
    let map = weighted.map();
    let triangle = (0..map.face_count())
        .find(|&f| map.face_darts(f).len() == 3)
        .unwrap()
        .to_string();
    let result = run(
        &[
            "init",
            trunc.to_str().unwrap(),
            "--face",
            &triangle,
            "-o",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(result.status.code(), Some(2));
    assert!(stdout(&result).contains("violated cut"));
    assert!(!out.exists());

    // Anchored at a hexagon the infeasibility surfaces even earlier, as an
    // overdrawn angle budget at a hub vertex.
    let hexagon = (0..map.face_count())
        .find(|&f| map.face_darts(f).len() == 6)
        .unwrap()
        .to_string();
    let budget = run(
        &[
            "init",
            trunc.to_str().unwrap(),
            "--face",
            &hexagon,
            "-o",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(budget.status.code(), Some(2));
    assert!(stderr(&budget).contains("angle budget"));
    assert!(!out.exists());
}

#[test]
fn solve_on_a_sphere_requires_a_face_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cube = write_fixture(dir.path(), "cube.json", &weighted_cube());
    let out = dir.path().join("solution.json");
    let result = run(
        &["solve", cube.to_str().unwrap(), "-o", out.to_str().unwrap()],
        None,
    );
    assert_eq!(result.status.code(), Some(2));
    let text = stderr(&result);
    assert!(text.contains("--face"));
    assert!(text.contains("Usage:"));
    assert!(!out.exists());
}

#[test]
fn solve_volume_and_render_agree_on_the_cube() {
    let dir = tempfile::tempdir().unwrap();
    let weighted = weighted_cube();
    let cube = write_fixture(dir.path(), "cube.json", &weighted);
    let out = dir.path().join("solution.json");
    let solve = run(
        &[
            "solve",
            cube.to_str().unwrap(),
            "--face",
            "0",
            "-o",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(solve.status.success(), "{}", stderr(&solve));

    let solution = io::read_solution(&out, &weighted).unwrap();
    let sub = stereographic_subspace(&weighted, 0).unwrap();
    for dart in 0..weighted.map().dart_count() {
        if sub.star_dart[dart] {
            assert!((solution.system.psi[dart] - FRAC_PI_4).abs() < 1e-9);
        }
    }

    let volume = run(
        &[
            "volume",
            out.to_str().unwrap(),
            "--map",
            cube.to_str().unwrap(),
        ],
        None,
    );
    assert!(volume.status.success());
    let text = stdout(&volume);
    assert!(text.contains("volume (functional form):"));
    assert!(text.contains("volume (orthoscheme sum):"));
    assert!(text.contains("difference:"));
    let value: f64 = text
        .lines()
        .next()
        .unwrap()
        .rsplit(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let expected = 8.0 * uniformize::lobach::lob(FRAC_PI_4);
    assert!((value - expected).abs() < 1e-7);

    let svg = dir.path().join("cube.svg");
    let render = run(
        &[
            "render",
            out.to_str().unwrap(),
            "--map",
            cube.to_str().unwrap(),
            "-o",
            svg.to_str().unwrap(),
            "--chart",
            "stereo",
        ],
        None,
    );
    assert!(render.status.success(), "{}", stderr(&render));
    let body = std::fs::read_to_string(&svg).unwrap();
    assert!(body.starts_with("<svg"));
    assert!(body.contains("<circle"));
    assert!(body.contains("<line"));
}

#[test]
fn render_refuses_a_chart_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let torus = write_fixture(dir.path(), "torus.json", &weighted_square_torus());
    let out = dir.path().join("solution.json");
    let solve = run(
        &["solve", torus.to_str().unwrap(), "-o", out.to_str().unwrap()],
        None,
    );
    assert!(solve.status.success());
    let svg = dir.path().join("torus.svg");
    let render = run(
        &[
            "render",
            out.to_str().unwrap(),
            "--map",
            torus.to_str().unwrap(),
            "-o",
            svg.to_str().unwrap(),
            "--chart",
            "poincare",
        ],
        None,
    );
    assert_eq!(render.status.code(), Some(2));
    assert!(stderr(&render).contains("chart"));
}

#[test]
fn pipeline_emits_the_summary_record() {
    let dir = tempfile::tempdir().unwrap();
    let torus = write_fixture(dir.path(), "torus.json", &weighted_square_torus());
    let result = run(&["pipeline", torus.to_str().unwrap()], None);
    assert!(result.status.success(), "{}", stderr(&result));
    let value: serde_json::Value = serde_json::from_str(&stdout(&result)).unwrap();
    let object = value.as_object().unwrap();
    let mut keys: Vec<&str> = object.keys().map(|k| k.as_str()).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        ["L", "chi", "grad_norm", "max_residual", "volume_ortho"]
    );
    assert_eq!(object["chi"].as_i64(), Some(0));
    let functional = object["L"].as_f64().unwrap();
    let expected = 16.0 * uniformize::lobach::lob(FRAC_PI_4);
    assert!((functional - expected).abs() < 1e-7);
    assert!(object["grad_norm"].as_f64().unwrap() <= 1e-10);
    assert!(object["max_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn degree_valued_input_matches_the_radian_run() {
    let dir = tempfile::tempdir().unwrap();
    let weighted = weighted_square_torus();
    let torus = write_fixture(dir.path(), "torus.json", &weighted);
    let mut raw: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&torus).unwrap()).unwrap();
    let theta: Vec<f64> = raw["theta"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_f64().unwrap() * 180.0 / PI)
        .collect();
    raw["theta"] = serde_json::json!(theta);
    let degrees = dir.path().join("torus_deg.json");
    std::fs::write(&degrees, raw.to_string()).unwrap();

    let radian_run = run(&["pipeline", torus.to_str().unwrap()], None);
    let degree_run = run(&["pipeline", degrees.to_str().unwrap(), "--degrees"], None);
    assert!(radian_run.status.success());
    assert!(degree_run.status.success());
    assert_eq!(stdout(&radian_run), stdout(&degree_run));
}

#[test]
fn solved_files_and_rendered_images_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let genus2 = write_fixture(dir.path(), "genus2.json", &weighted_genus_two());
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    for out in [&first, &second] {
        let solve = run(
            &[
                "solve",
                genus2.to_str().unwrap(),
                "--perturb",
                "0.2",
                "-o",
                out.to_str().unwrap(),
            ],
            Some("11"),
        );
        assert!(solve.status.success(), "{}", stderr(&solve));
    }
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());

    let svg_a = dir.path().join("a.svg");
    let svg_b = dir.path().join("b.svg");
    for svg in [&svg_a, &svg_b] {
        let render = run(
            &[
                "render",
                first.to_str().unwrap(),
                "--map",
                genus2.to_str().unwrap(),
                "-o",
                svg.to_str().unwrap(),
                "--overlay",
                "quads",
            ],
            None,
        );
        assert!(render.status.success(), "{}", stderr(&render));
    }
    assert_eq!(std::fs::read(&svg_a).unwrap(), std::fs::read(&svg_b).unwrap());
}

#[test]
fn different_seeds_reach_the_same_maximizer() {
    let dir = tempfile::tempdir().unwrap();
    let weighted = weighted_square_torus();
    let torus = write_fixture(dir.path(), "torus.json", &weighted);
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    for (out, seed) in [(&first, "3"), (&second, "90210")] {
        let solve = run(
            &[
                "solve",
                torus.to_str().unwrap(),
                "--perturb",
                "0.3",
                "-o",
                out.to_str().unwrap(),
            ],
            Some(seed),
        );
        assert!(solve.status.success(), "{}", stderr(&solve));
    }
    let a = io::read_solution(&first, &weighted).unwrap();
    let b = io::read_solution(&second, &weighted).unwrap();
    for (x, y) in a.system.psi.iter().zip(&b.system.psi) {
        assert!((x - y).abs() < 1e-8);
        assert!((x - FRAC_PI_4).abs() < 1e-8);
    }
}

#[test]
fn solution_files_round_trip_byte_identically_through_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let weighted = weighted_square_torus();
    let torus = write_fixture(dir.path(), "torus.json", &weighted);
    let out = dir.path().join("solution.json");
    let solve = run(
        &["solve", torus.to_str().unwrap(), "-o", out.to_str().unwrap()],
        None,
    );
    assert!(solve.status.success());
    let bytes = std::fs::read(&out).unwrap();
    let solution = io::read_solution(&out, &weighted).unwrap();
    let rewritten = io::solution_to_json(&solution);
    assert_eq!(bytes, rewritten.as_bytes());
}
