use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fic_cli::{parse_suite, render_suite};
use proptest::prelude::*;
use sha2::{Digest, Sha256};

fn fic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fic")).args(args).output().expect("spawn fic")
}

const SMALL: &str = r#"
[defaults]
t_end = 1.0

[welded_a]
k0 = 100.0
t_d = 5.0

[welded_b]
k0 = 10.0
t_d = 1.0

[contact_a]
coupling = "contact"
contact_pos = 0.05
k0 = 100.0
t_d = 5.0
k_env = 500.0
d_env = 0.0
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn parallel_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let suite = write(tmp.path(), "small.cfg", SMALL);
    let one = tmp.path().join("one");
    let four = tmp.path().join("four");
    assert!(fic(&["run", &suite, "--out", one.to_str().unwrap(), "--jobs", "1"]).status.success());
    assert!(fic(&["run", &suite, "--out", four.to_str().unwrap(), "--jobs", "4"]).status.success());
    let a = read_dir_sorted(&one);
    let b = read_dir_sorted(&four);
    assert_eq!(a.len(), 5);
    assert_eq!(a, b);
}

#[test]
fn manifest_lists_every_file_with_its_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let suite = write(tmp.path(), "small.cfg", SMALL);
    let out = tmp.path().join("out");
    assert!(fic(&["run", &suite, "--out", out.to_str().unwrap()]).status.success());
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["welded_a_trace.csv", "welded_b_trace.csv", "contact_a_trace.csv", "summary.csv"]);
    for f in files {
        let bytes = fs::read(out.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), format!("{:x}", Sha256::digest(&bytes)));
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    let trace = fs::read_to_string(out.join("welded_a_trace.csv")).unwrap();
    assert!(trace.starts_with("t,x,x_dot,x_tilde,h_e,F_env,x_d_h,phase,x_max,V,in_contact\n"));
    assert_eq!(trace.lines().count(), 102);
}

#[test]
fn list_output_parses_back_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let suite = write(tmp.path(), "small.cfg", SMALL);
    let out = fic(&["run", &suite, "--list"]);
    assert!(out.status.success());
    let listed = String::from_utf8(out.stdout).unwrap();
    assert_eq!(parse_suite(SMALL, "a").unwrap(), parse_suite(&listed, "b").unwrap());
}

#[test]
fn empty_suite_warns_and_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let suite = write(tmp.path(), "empty.cfg", "");
    let out = fic(&["run", &suite, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn invalid_stiffness_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let suite = write(tmp.path(), "bad.cfg", "[bad]\nk0 = -1.0\nt_d = 5.0\n");
    let out = fic(&["run", &suite, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("K0 must be positive"));
}

#[test]
fn syntax_error_reports_line() {
    let tmp = tempfile::tempdir().unwrap();
    let suite = write(tmp.path(), "bad.cfg", "[a]\nk0 = 1.0\nt_d = = 5\n");
    let out = fic(&["run", &suite, "--list"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn diverging_run_is_reported_and_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[ok]\nk0 = 100.0\nt_d = 5.0\nt_end = 0.1\n\n[runaway]\ncontrol = \"off\"\nk_env = 0.0\nd_env = 0.0\nk0 = 1.0\nt_d = 1.0\nv0 = 2e6\nt_end = 0.1\n";
    let suite = write(tmp.path(), "div.cfg", text);
    let dir = tmp.path().join("o");
    let out = fic(&["run", &suite, "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let summary = fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert!(summary.lines().nth(2).unwrap().contains("failed: simulation diverged"), "{summary}");
    assert!(dir.join("ok_trace.csv").exists());
    assert!(!dir.join("runaway_trace.csv").exists());
}

#[test]
fn physics_step_override_is_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let suite = write(tmp.path(), "small.cfg", SMALL);
    let out = fic(&["run", &suite, "--list", "--physics-dt", "0.003"]);
    assert_eq!(out.status.code(), Some(2));
    let out = fic(&["run", &suite, "--list", "--physics-dt", "0.001"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("physics_dt = 0.001"));
}

#[test]
fn self_check_passes() {
    let out = fic(&["--check"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn bundled_suites_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("suites");
    let mut total = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let specs = fic_cli::load_suite(&path).unwrap();
        assert!(!specs.is_empty(), "{}", path.display());
        total += specs.len();
    }
    assert_eq!(total, 15 + 15 + 3 + 3 + 2);
}

proptest! {
    #[test]
    fn render_round_trips_arbitrary_suites(
        entries in prop::collection::vec(
            (0.1f64..1000.0, 1.0f64..40.0, -20.0f64..20.0, 0.0f64..600.0, 0.0f64..300.0, prop::bool::ANY, -1.0f64..1.0, 1e-3f64..0.1),
            0..6,
        )
    ) {
        let mut text = String::new();
        for (i, (k0, f_max, t_d, k_env, d_env, contact, x0, sigma)) in entries.iter().enumerate() {
            let t_d = if *t_d == 0.0 { 1.0 } else { *t_d };
            text.push_str(&format!(
                "[e{i}]\nk0 = {k0:?}\nf_max = {f_max:?}\nt_d = {t_d:?}\nk_env = {k_env:?}\nd_env = {d_env:?}\nx0 = {x0:?}\nsigma = {sigma:?}\ncoupling = \"{}\"\n\n",
                if *contact { "contact" } else { "welded" }
            ));
        }
        let specs = parse_suite(&text, "gen").unwrap();
        prop_assert_eq!(&parse_suite(&render_suite(&specs), "again").unwrap(), &specs);
    }
}
