//! End-to-end acceptance: every criterion at its stated tolerance and time
//! budget, one summary line each. Built without the test harness so the
//! summary is printed even when output capture is on.

use std::time::Duration;

use bvdual::verify::{run_suite, VerifyConfig};

struct Criterion {
    number: usize,
    title: &'static str,
    suite: &'static str,
    budget: Duration,
}

const CRITERIA: [Criterion; 9] = [
    Criterion {
        number: 1,
        title: "Hermite reproduction",
        suite: "hermite",
        budget: Duration::from_secs(1),
    },
    Criterion {
        number: 2,
        title: "double-dual identity",
        suite: "double-dual",
        budget: Duration::from_secs(10),
    },
    Criterion {
        number: 3,
        title: "oracle equivalence",
        suite: "oracle",
        budget: Duration::from_secs(60),
    },
    Criterion {
        number: 4,
        title: "Stokes vanishing",
        suite: "stokes",
        budget: Duration::from_secs(10),
    },
    Criterion {
        number: 5,
        title: "BV algebra",
        suite: "bd",
        budget: Duration::from_secs(10),
    },
    Criterion {
        number: 6,
        title: "lattice duality of incident pairs",
        suite: "plancherel",
        budget: Duration::from_secs(600),
    },
    Criterion {
        number: 7,
        title: "Wilson-'t Hooft exchange",
        suite: "wilson-thooft",
        budget: Duration::from_secs(120),
    },
    Criterion {
        number: 8,
        title: "factorisation",
        suite: "factorisation",
        budget: Duration::from_secs(30),
    },
    Criterion {
        number: 9,
        title: "geometry",
        suite: "geometry",
        budget: Duration::from_secs(30),
    },
];

fn main() {
    let config = VerifyConfig::default();
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let report = run_suite(c.suite, &config).unwrap_or_else(|e| panic!("{}: {e}", c.suite));
        let runtime = Duration::from_secs_f64(report.runtime_seconds.unwrap_or(0.0));
        let in_budget = runtime <= c.budget;
        let ok = report.passed && in_budget;
        let worst = report.worst().expect("suites report at least one check");
        println!(
            "criterion {} [{}] {}: {} | worst check {:?}: measured {:.3e}, tolerance {:.1e} | {:.2}s of {}s",
            c.number,
            c.suite,
            c.title,
            if ok { "PASS" } else { "FAIL" },
            worst.name,
            worst.measured,
            worst.tolerance,
            runtime.as_secs_f64(),
            c.budget.as_secs()
        );
        for check in report.checks.iter().filter(|k| !k.passed) {
            println!(
                "    failed: {} measured {:e} tolerance {:e}",
                check.name, check.measured, check.tolerance
            );
        }
        if !ok {
            failed.push(c.number);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
