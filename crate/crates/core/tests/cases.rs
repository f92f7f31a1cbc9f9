use std::f64::consts::PI;
use std::path::Path;

use derham_ns::cases::{
    convergence_study, run, write_convergence_csv, CaseDefinition, CaseName, SimulationConfig, DIAGNOSTICS_COLUMNS,
};
use derham_ns::operators::{BoundaryCondition, BoundaryKind, Edge};
use derham_ns::Error;
use proptest::prelude::*;

fn short_taylor_green(steps: usize) -> SimulationConfig {
    let mut cfg = SimulationConfig::new(CaseName::TaylorGreen);
    cfg.grid.degree = 2;
    cfg.grid.cells_per_patch = [8, 8];
    cfg.stepper.dt = 1e-3;
    cfg.run.t_final = steps as f64 * 1e-3;
    cfg
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn snapshots(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("snapshot_"))
        .collect();
    names.sort();
    names
}

#[test]
fn ten_steps_give_eleven_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(short_taylor_green(10), Some(dir.path())).unwrap();
    assert_eq!(out.steps, 10);
    let (header, rows) = read_rows(&dir.path().join("diagnostics.csv"));
    assert_eq!(header, DIAGNOSTICS_COLUMNS);
    assert_eq!(rows.len(), 11);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    assert!((rows[10][0] - 0.01).abs() < 1e-12);
    assert!(out.final_error.unwrap() < 0.1);
    // Cadence 0: diagnostics only.
    assert!(snapshots(dir.path()).is_empty());
}

#[test]
fn snapshots_follow_the_cadence() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short_taylor_green(5);
    cfg.output.snapshot_every = 2;
    cfg.output.sample = [5, 4];
    run(cfg, Some(dir.path())).unwrap();
    let names = snapshots(dir.path());
    assert_eq!(
        names,
        ["snapshot_000000.txt", "snapshot_000002.txt", "snapshot_000004.txt", "snapshot_000005.txt"]
    );
    let text = std::fs::read_to_string(dir.path().join("snapshot_000004.txt")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# grid 5 4"));
    assert!(lines.next().unwrap().starts_with("# bounds 0 "));
    assert!(lines.next().unwrap().starts_with("# time 0.004"));
    assert_eq!(lines.next(), Some("# x y u_x u_y p omega"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(' ').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.len() == 6));
    assert_eq!((rows[0][0], rows[0][1]), (0.0, 0.0));
    assert!((rows[19][0] - PI).abs() < 1e-15 && (rows[19][1] - PI).abs() < 1e-15);
}

#[test]
fn identical_configs_give_identical_diagnostics() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut cfg = short_taylor_green(5);
    cfg.grid.n_patches = [2, 2];
    cfg.grid.cells_per_patch = [4, 4];
    run(cfg.clone(), Some(a.path())).unwrap();
    run(cfg, Some(b.path())).unwrap();
    let read = |d: &Path| std::fs::read(d.join("diagnostics.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn failed_steps_flush_the_last_good_state() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short_taylor_green(1);
    cfg.stepper.dt = 5.0;
    cfg.run.t_final = 10.0;
    cfg.stepper.picard_max_iter = 2;
    let out = run(cfg, Some(dir.path())).unwrap();
    assert!(out.failure.is_some());
    assert!(out.summary_line().starts_with("failed"));
    assert_eq!(snapshots(dir.path()), [format!("snapshot_{:06}.txt", out.steps)]);
}

/// The exact steady state has `u · n = 0` and `u × n = 0` on every edge,
/// and the linear pressure `π y − π²/2` matches the pressure data.
#[test]
fn poiseuille_exact_solution_matches_boundary_data() {
    let case = CaseDefinition::new(CaseName::Poiseuille);
    let pressure = |_x: f64, y: f64| PI * y - 0.5 * PI * PI;
    for c in &case.boundary.conditions {
        let n = c.edge.normal();
        for k in 0..50 {
            let s = PI * (k as f64 + 0.5) / 50.0;
            let (x, y) = match c.edge {
                Edge::Left => (0.0, s),
                Edge::Right => (PI, s),
                Edge::Bottom => (s, 0.0),
                Edge::Top => (s, PI),
            };
            let u = case.exact(0.0, x, y).unwrap();
            let got = match c.kind {
                BoundaryKind::Normal => u[0] * n[0] + u[1] * n[1],
                BoundaryKind::Tangential => u[0] * n[1] - u[1] * n[0],
                BoundaryKind::Pressure => pressure(x, y),
            };
            assert!((got - c.value).abs() < 1e-10, "{c:?} at ({x}, {y}): {got}");
        }
    }
    // The steady state also solves the momentum balance: ν ∂xx u_y = ∂y p.
    let h = 1e-4;
    let uy = |x: f64| case.exact(0.0, x, 1.0).unwrap()[1];
    let lap = (uy(1.0 + h) - 2.0 * uy(1.0) + uy(1.0 - h)) / (h * h);
    assert!((case.nu * lap - PI).abs() < 1e-5);
}

#[test]
fn convergence_table_marks_failed_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short_taylor_green(1);
    cfg.stepper.dt = 5.0;
    cfg.stepper.picard_max_iter = 2;
    let rows = convergence_study(&cfg, &[4, 8], &[1]).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.error.is_none() && r.order.is_none()));
    let path = dir.path().join("conv.csv");
    write_convergence_csv(&path, &rows).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("degree,cells,h,error,order"));
    assert!(text.lines().nth(1).unwrap().ends_with(",,"));
}

#[test]
fn convergence_needs_an_exact_solution_and_divisible_meshes() {
    let cfg = SimulationConfig::new(CaseName::LidDrivenCavity);
    assert!(matches!(convergence_study(&cfg, &[4], &[1]), Err(Error::Config(_))));
    let mut cfg = short_taylor_green(1);
    cfg.grid.n_patches = [3, 3];
    assert!(matches!(convergence_study(&cfg, &[8], &[1]), Err(Error::Config(_))));
}

#[test]
fn config_rejects_unknown_and_inconsistent_input() {
    let bad = [
        "case = \"karman\"",
        "case = \"taylor_green\"\n[grid]\ndegree = 2\nn_patches = [1, 1]\ncells_per_patch = [4, 4]\nspacing = 3",
        "case = \"taylor_green\"\n[stepper]\ndt = -1.0",
        "case = \"taylor_green\"\n[stepper]\nnu = 0.1",
        "case = \"taylor_green\"\n[[boundary]]\nedge = \"left\"\nkind = \"normal\"",
        "case = \"poiseuille\"\n[run]\nt_final = 0.0",
    ];
    for text in bad {
        assert!(matches!(SimulationConfig::from_toml(text), Err(Error::Config(_))), "{text}");
    }
    let cfg = SimulationConfig::from_toml("case = \"blasius\"\n[physics]\nnu = 0.01").unwrap();
    assert_eq!(cfg.stepper_config().nu, 0.01);
    assert_eq!(cfg.stepper_config().alpha, 0.0);
}

fn arb_condition() -> impl Strategy<Value = BoundaryCondition> {
    (0usize..4, 0usize..3, -10.0f64..10.0, proptest::option::of((0.0f64..0.5, 0.5f64..1.0))).prop_map(
        |(e, k, value, range)| {
            let kind = [BoundaryKind::Normal, BoundaryKind::Tangential, BoundaryKind::Pressure][k];
            let mut c = BoundaryCondition::new(Edge::ALL[e], kind, value);
            c.range = range;
            c
        },
    )
}

fn arb_config() -> impl Strategy<Value = SimulationConfig> {
    (
        (1usize..4, 1usize..4, 2usize..9, proptest::option::of(1e-4f64..1.0), proptest::option::of(0.0f64..1e3)),
        (1e-5f64..1e-1, -12i32..-4, 1usize..100, proptest::bool::ANY, proptest::option::of(1e-12f64..1e-4)),
        (0usize..10, 2usize..50, proptest::collection::vec(arb_condition(), 0..6)),
    )
        .prop_map(|((p, np, nc, nu, alpha), (dt, tol_exp, iters, cfl, steady), (every, sample, boundary))| {
            let mut cfg = SimulationConfig::new(CaseName::LidDrivenCavity);
            cfg.grid.degree = p;
            cfg.grid.n_patches = [np, np + 1];
            cfg.grid.cells_per_patch = [nc, nc];
            cfg.physics.nu = nu;
            cfg.physics.alpha = alpha;
            cfg.stepper.dt = dt;
            cfg.stepper.picard_tol = 10f64.powi(tol_exp);
            cfg.stepper.cg_tol = 10f64.powi(tol_exp - 2);
            cfg.stepper.picard_max_iter = iters;
            cfg.run.cfl_auto = cfl;
            cfg.run.steady_tol = steady;
            cfg.output.snapshot_every = every;
            cfg.output.sample = [sample, sample + 1];
            cfg.output.dir = format!("runs/{p}_{np}").into();
            cfg.boundary = boundary;
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips_through_toml(cfg in arb_config()) {
        let text = cfg.to_toml().unwrap();
        let back = SimulationConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml().unwrap(), text);
    }
}
