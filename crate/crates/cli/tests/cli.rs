use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cmc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(out: &Path, file: &str) -> String {
    fs::read_to_string(out.join(file)).unwrap()
}

fn value(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing"))
        .parse()
        .unwrap()
}

#[test]
fn solve_reports_small_error_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["solve", "domain=cap:0.3", "H=0.5", "data=exact-trace", "level=4"];
    assert!(cmc(&args, &a).status.success());
    assert!(cmc(&args, &b).status.success());
    for f in ["report.txt", "solution.csv", "meridian.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(value(&read(&a, "report.txt"), "linf_error") <= 1e-3);
    assert!(read(&a, "solution.csv").starts_with("vertex_id,x,y,z,v,W,H_estimate\n"));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# minimal surface\nH = 0.0\nlevel = 2\ndata = constant:0.4\n").unwrap();
    let out = dir.path().join("o");
    let o = cmc(&["solve", "--config", cfg.to_str().unwrap(), "level=3"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read(&out, "report.txt");
    assert_eq!(value(&report, "vertices"), 217.0);
    let sol = read(&out, "solution.csv");
    assert!(sol.lines().skip(1).all(|l| (l.split(',').nth(4).unwrap().parse::<f64>().unwrap() - 0.4).abs() < 1e-10));
}

#[test]
fn verify_exact_minimal_case_and_failure_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    assert!(cmc(&["verify-exact", "H=0", "level=4"], &out).status.success());
    assert!(value(&read(&out, "report.txt"), "curvature_max_abs_deviation") < 1e-8);
    let o = cmc(&["verify-exact", "H=0.5", "level=2", "tol=1e-9"], &out);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u");
    let o = cmc(&["solve", "H=0.5", "foo=1", "zap=2"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("foo, zap"));
    assert_eq!(cmc(&["solve", "H=1.0"], &out).status.code(), Some(2));
    assert_eq!(cmc(&["solve", "H=0.1", "data=samples:/nonexistent"], &out).status.code(), Some(2));
    assert_eq!(cmc(&["solve", "--config", "/nonexistent.cfg"], &out).status.code(), Some(2));
    assert_eq!(cmc(&["solve", "H=0.1", "domain=cap:1.2"], &out).status.code(), Some(2));
}

#[test]
fn samples_file_supplies_boundary_data() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m");
    assert!(cmc(&["mesh", "level=2"], &m).status.success());
    let mesh = read(&m, "mesh.txt");
    let mut lines = mesh.lines();
    let nv: usize = lines.next().unwrap().split_whitespace().next().unwrap().parse().unwrap();
    let mut samples = String::from("vertex_id,value\n");
    for (i, l) in lines.take(nv).enumerate() {
        if l.ends_with(" 1") {
            samples.push_str(&format!("{i},0.25\n"));
        }
    }
    let file = dir.path().join("samples.csv");
    fs::write(&file, samples).unwrap();
    let out = dir.path().join("s");
    let data = format!("data=samples:{}", file.display());
    assert!(cmc(&["solve", "H=0", "level=2", &data], &out).status.success());
    let sol = read(&out, "solution.csv");
    assert!(sol.lines().skip(1).all(|l| (l.split(',').nth(4).unwrap().parse::<f64>().unwrap() - 0.25).abs() < 1e-10));
    fs::write(&file, "0,1.0\n").unwrap();
    assert_eq!(cmc(&["solve", "H=0", "level=2", &data], &out).status.code(), Some(2));
}

#[test]
fn convergence_table_has_ratios_near_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    assert!(cmc(&["convergence", "domain=cap:0.3", "H=0.5", "levels=3..5"], &out).status.success());
    let table = read(&out, "convergence.csv");
    let ratios: Vec<f64> = table.lines().skip(2).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ratios.len(), 2);
    assert!(ratios.iter().all(|r| (3.0..=5.0).contains(r)), "{table}");
}

#[test]
fn rearrange_input_file_and_random_checks() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("set.rle");
    let mut text = String::new();
    for c in 0..6 {
        text.push_str(&format!("{c}: 0-4,6-6,9-10\n"));
    }
    fs::write(&input, text).unwrap();
    let out = dir.path().join("r");
    let arg = format!("input={}", input.display());
    let o = cmc(&["rearrange", "level=0", "exact=true", "H=0.3", &arg], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read(&out, "report.txt");
    assert_eq!(value(&report, "volume_before"), value(&report, "volume_after"));
    assert!(value(&report, "F_after") <= value(&report, "F_before"));
    assert!(read(&out, "rearranged.rle").starts_with("0: 0-7\n"));
    let out2 = dir.path().join("r2");
    assert!(cmc(&["rearrange", "samples=50", "seed=9", "minimize=true"], &out2).status.success());
    assert_eq!(value(&read(&out2, "report.txt"), "f_increase_violations"), 0.0);
}

#[test]
fn oracle_barrier_and_asymptotic_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    assert!(cmc(&["oracle", "H=0.5", "n=3", "grid=128"], &o).status.success());
    assert!(read(&o, "profile.csv").starts_with("theta,v,dv\n"));
    assert!(value(&read(&o, "report.txt"), "linf_error_closed_form") < 1e-7);
    let b = dir.path().join("b");
    assert!(cmc(&["barrier-check", "H=0.5", "level=4"], &b).status.success());
    assert!(read(&b, "cone.csv").starts_with("vertex_id,h,margin\n"));
    let a = dir.path().join("a");
    assert!(cmc(&["asymptotic", "schedule=0.4,0.2", "base_level=3"], &a).status.success());
    assert_eq!(read(&a, "asymptotic.csv").lines().count(), 3);
}
