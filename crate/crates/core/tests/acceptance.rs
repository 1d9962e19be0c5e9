//! End-to-end acceptance suite. Prints one pass/fail line per criterion and
//! exits non-zero if any criterion fails.

mod support;

use std::process::ExitCode;
use std::time::Instant;

use permeaflow::energy::verify_identities;
use permeaflow::experiments::{
    check_permeability, check_rates, check_run, check_sharp_limit, convergence_study, run_case, sharp_limit_cells,
    shear_drop_permeabilities, CaseKind, CaseReport, CaseSpec, Check, RateTable, RunOutcome, DIV_TOL,
    ENERGY_TOL,
};
use permeaflow::scheme::Stepper;

const IDENTITY_ORDER: f64 = 1.9;
const ORACLE_TOL: f64 = 1e-8;

/// Reference L2 Cauchy errors at 16, 32 and 64 cells per side. The c entry
/// at 32 is the value implied by the neighbouring errors and printed rates.
const REFERENCE_L2: [(&str, [f64; 3]); 5] = [
    ("phi", [4.01e-2, 8.90e-3, 2.22e-3]),
    ("c", [1.01e-2, 2.71e-3, 6.80e-4]),
    ("u", [1.15e-4, 3.23e-5, 8.06e-6]),
    ("v", [1.15e-4, 3.23e-5, 8.06e-6]),
    ("p", [1.57e-3, 1.24e-4, 3.00e-5]),
];

struct Suite {
    lines: Vec<(usize, Check)>,
    runs: Vec<(String, f64)>,
}

impl Suite {
    fn record(&mut self, criterion: usize, check: Check) {
        println!("criterion {criterion}: {check}");
        self.lines.push((criterion, check));
    }

    fn observe(&mut self, label: String, o: &RunOutcome) {
        self.runs.push((label, o.stats.max_div_projected));
    }
}

fn combine(name: &str, checks: &[Check]) -> Check {
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.to_string()).collect();
    let detail = if failed.is_empty() {
        checks.iter().map(|c| c.detail.clone()).collect::<Vec<_>>().join("; ")
    } else {
        failed.join("; ")
    };
    Check::new(name, failed.is_empty(), detail)
}

fn two_interface(suite: &mut Suite) {
    let spec = CaseSpec::by_name("TwoInterface1D").unwrap();
    let o = run_case(&spec, &spec.solver_config()).unwrap();
    let checks: Vec<Check> = check_run(&o).into_iter().filter(|c| c.name != "projection").collect();
    suite.observe("TwoInterface1D".into(), &o);
    suite.record(1, combine("two-interface steady state", &checks));
}

fn sharp_limit(suite: &mut Suite) {
    let mut rows = Vec::new();
    for eps in [0.04, 0.02, 0.01] {
        let mut spec = CaseSpec::new(CaseKind::SharpLimit1D { epsilon: eps }).unwrap();
        spec.grid.nx = sharp_limit_cells(eps);
        let o = run_case(&spec, &spec.solver_config()).unwrap();
        if let CaseReport::SharpLimit { bulk_linf, .. } = o.report {
            rows.push((eps, bulk_linf));
        }
        suite.observe(format!("SharpLimit1D eps={eps}"), &o);
    }
    suite.record(2, check_sharp_limit(&rows));
}

fn magnitudes(table: &RateTable) -> Check {
    let mut worst = (String::new(), 1.0f64);
    let mut ok = true;
    for (var, reference) in REFERENCE_L2 {
        let rows = table.rows(var).unwrap_or(&[]);
        for (row, r) in rows.iter().zip(reference) {
            let ratio = (row.l2 / r).max(r / row.l2);
            ok &= ratio <= 10.0;
            if ratio > worst.1 {
                worst = (format!("{var} at {}", row.n), ratio);
            }
        }
        ok &= rows.len() >= reference.len();
    }
    Check::new(
        "error magnitudes",
        ok,
        format!("largest ratio to reference {:.2} ({})", worst.1, worst.0),
    )
}

fn convergence(suite: &mut Suite) {
    let template = CaseSpec::new(CaseKind::Convergence2D { h: 1.0 / 16.0, dt: 1e-4 }).unwrap();
    let (table, runs) = convergence_study(&template, &[16, 32, 64, 128]).unwrap();
    print!("{table}");
    for r in &runs {
        suite.observe(format!("Convergence2D {}x{}", r.spec.grid.nx, r.spec.grid.ny), r);
    }
    suite.record(3, combine("convergence", &[check_rates(&table), magnitudes(&table)]));
}

fn energy(suite: &mut Suite) {
    let mut conservation = Vec::new();
    let (mut worst, mut checked) = (0.0f64, 0);
    for k in 0..=8 {
        let dt = 0.1 / f64::powi(2.0, k);
        let spec = CaseSpec::new(CaseKind::EnergyStability { dt }).unwrap();
        let o = run_case(&spec, &spec.solver_config()).unwrap();
        suite.observe(format!("EnergyStability dt={dt:e}"), &o);
        worst = worst.max(o.stats.max_energy_increase);
        checked += usize::from(o.stats.energy_checked);
        for mut c in check_run(&o).into_iter().filter(|c| c.name == "conservation") {
            c.name = format!("{} dt={dt:e}", c.name);
            conservation.push(c);
        }
    }
    suite.record(
        4,
        Check::new(
            "energy stability",
            checked == 9 && worst <= ENERGY_TOL,
            format!("{checked} step sizes checked, largest per-step increase {worst:.2e}"),
        ),
    );
    suite.record(5, combine("conservation", &conservation));
}

fn identities(suite: &mut Suite) {
    let rep = verify_identities(&[1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0]).unwrap();
    let ok = rep
        .stress_orders
        .iter()
        .chain(&rep.deformation_orders)
        .all(|&p| p >= IDENTITY_ORDER);
    suite.record(
        6,
        Check::new(
            "tensor identities",
            ok,
            format!(
                "stress orders {:.2?}, deformation orders {:.2?}",
                rep.stress_orders, rep.deformation_orders
            ),
        ),
    );
}

fn permeability(suite: &mut Suite) {
    let mut reports = Vec::new();
    for k in shear_drop_permeabilities() {
        let mut spec = CaseSpec::new(CaseKind::ShearDrop { k }).unwrap();
        spec.params.k = k;
        let o = run_case(&spec, &spec.solver_config()).unwrap();
        suite.observe(format!("ShearDrop K={k:.4}"), &o);
        reports.push(o.report);
    }
    let spec = CaseSpec::by_name("TwoDroplets").unwrap();
    let o = run_case(&spec, &spec.solver_config()).unwrap();
    suite.observe("TwoDroplets".into(), &o);
    let mut checks = vec![check_permeability(&reports)];
    checks.extend(check_run(&o).into_iter().filter(|c| c.name != "projection"));
    suite.record(8, combine("permeability", &checks));
}

fn gaussian(suite: &mut Suite) {
    let spec = CaseSpec::by_name("Gaussian2D").unwrap();
    let o = run_case(&spec, &spec.solver_config()).unwrap();
    suite.observe("Gaussian2D".into(), &o);
}

fn projection(suite: &mut Suite) {
    let (label, worst) = suite
        .runs
        .iter()
        .cloned()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or_default();
    let ok = suite.runs.iter().all(|r| r.1 <= DIV_TOL);
    let n = suite.runs.len();
    suite.record(
        7,
        Check::new("projection", ok, format!("{n} runs, largest max |div u| {worst:.2e} ({label})")),
    );
}

fn oracle(suite: &mut Suite) {
    let dt = 1e-3;
    let spec = CaseSpec::new(CaseKind::Convergence2D { h: 1.0 / 32.0, dt }).unwrap();
    let mut s = spec.initial_state().unwrap();
    let mut stepper = Stepper::new(s.grid(), spec.params, spec.solver_config(), spec.bc).unwrap();
    for _ in 0..2 {
        s = stepper.advance(&s).unwrap().0;
    }
    let reference = support::oracle_step(&s, &spec.params, dt);
    let (next, _) = stepper.advance(&s).unwrap();
    let diffs = support::compare(&next, &reference);
    let worst = diffs.iter().cloned().fold(("", 0.0), |m, d| if d.1 > m.1 { d } else { m });
    suite.record(
        9,
        Check::new(
            "oracle equivalence",
            diffs.iter().all(|d| d.1 <= ORACLE_TOL),
            format!("largest relative difference {:.2e} in {}", worst.1, worst.0),
        ),
    );
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    let mut suite = Suite {
        lines: Vec::new(),
        runs: Vec::new(),
    };
    type Stage = fn(&mut Suite);
    let stages: [(&str, Stage); 9] = [
        ("two-interface", two_interface),
        ("sharp limit", sharp_limit),
        ("identities", identities),
        ("oracle", oracle),
        ("gaussian", gaussian),
        ("convergence", convergence),
        ("energy", energy),
        ("permeability", permeability),
        ("projection", projection),
    ];
    for (name, stage) in stages {
        let t = Instant::now();
        stage(&mut suite);
        eprintln!("acceptance stage {name} finished in {:.1} s", t.elapsed().as_secs_f64());
    }
    suite.lines.sort_by_key(|l| l.0);
    println!("\nacceptance summary ({:.0} s):", start.elapsed().as_secs_f64());
    for (n, c) in &suite.lines {
        println!("  criterion {n}: {}", if c.passed { "PASS" } else { "FAIL" });
    }
    if suite.lines.iter().all(|l| l.1.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
