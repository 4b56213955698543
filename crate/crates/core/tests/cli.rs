use slipcell::cli::{run, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK};

fn args(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

fn run_in(dir: &std::path::Path, cmd: &str) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let full = format!("{cmd} --out {}", dir.join("report").display());
    let code = run(&args(&full), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn every_command_is_deterministic() {
    let cases = [
        "psi0 --b 1,0 --n 1,0 --nu 0.3333 --mu 4pi",
        "psirel --b 2,1 --n 0.6,0.8",
        "psiinf --b 1,1 --n 1,-1",
        "cell-energy --a 1,0;0,-1 --laminate-normals 36 --triple-normals 8",
        "zigzag-scan --steps 50",
        "threshold-scan --param eta --steps 4 --tol 1e-4",
        "phasefield-eval --m 32 --eps 0.125 --iters 5",
        "scaling-fit --m 64 --eps 0.125,0.0625,0.03125",
        "near-far --m 16 --eps 0.125",
        "selfenergy --a 0,1;0,-1 --density l1",
        "limit-energy --a 0,1;0,0 --density frobenius --m 16",
    ];
    for cmd in cases {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let (c1, o1) = run_in(d1.path(), cmd);
        let (c2, o2) = run_in(d2.path(), cmd);
        assert_eq!((c1, c2), (EXIT_OK, EXIT_OK), "{cmd}");
        assert_eq!(o1, o2, "{cmd}");
        let body = std::fs::read(d1.path().join("report.csv")).unwrap();
        assert_eq!(body, std::fs::read(d2.path().join("report.csv")).unwrap());
        let meta = std::fs::read_to_string(d1.path().join("report.meta")).unwrap();
        assert!(meta.contains("mu_over_4pi="), "{cmd}: {meta}");
    }
}

#[test]
fn psi0_example_reports_the_cubic_value() {
    let d = tempfile::tempdir().unwrap();
    let (code, out) = run_in(d.path(), "psi0 --b 1,0 --n 1,0 --nu 0.3333 --mu 4pi");
    assert_eq!(code, EXIT_OK);
    let v: f64 = out.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((v - 1.5).abs() < 1e-4);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let d = tempfile::tempdir().unwrap();
    let conf = d.path().join("job.conf");
    std::fs::write(&conf, "# cubic copper-like\nnu = 0.2\nb = 1,0\nn = 1,0\n").unwrap();
    let (_, a) = run_in(d.path(), &format!("psi0 --config {}", conf.display()));
    let (_, b) = run_in(d.path(), &format!("psi0 --config {} --nu 0.3333", conf.display()));
    assert_ne!(a, b);
    let meta = std::fs::read_to_string(d.path().join("report.meta")).unwrap();
    assert!(meta.contains("param.nu=0.3333") && meta.contains("param.mu=4pi"));
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run_in(d.path(), "unknown-command").0, EXIT_CONFIG);
    assert_eq!(run_in(d.path(), "psi0 --nu 0.6 --b 1,0").0, EXIT_CONFIG);
    assert_eq!(run_in(d.path(), "psi0").0, EXIT_CONFIG);
    // a kernel table with a negative eigenvalue is a numerical failure
    let table = d.path().join("bad.csv");
    let rows: String = (0..32)
        .map(|j| format!("{},1,0,0,-1\n", 2.0 * std::f64::consts::PI * j as f64 / 32.0))
        .collect();
    std::fs::write(&table, rows).unwrap();
    assert_eq!(run_in(d.path(), &format!("psi0 --b 1,0 --kernel {}", table.display())).0, EXIT_NUMERICAL);
}
