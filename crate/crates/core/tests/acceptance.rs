//! End-to-end acceptance run: one line per criterion, nonzero exit on any
//! failure. The pulse benchmark is run once and shared by five criteria.

use pulse_cns::solver::Scheme;
use pulse_cns::verify::{self, Benchmark, BenchmarkConfig, CheckReport};
use std::process::ExitCode;
use std::time::{Duration, Instant};

struct Line {
    label: &'static str,
    report: CheckReport,
    elapsed: Duration,
}

fn timed(label: &'static str, f: impl FnOnce() -> CheckReport) -> Line {
    let start = Instant::now();
    let report = f();
    Line { label, report, elapsed: start.elapsed() }
}

fn or_error(name: &str, r: pulse_cns::Result<CheckReport>) -> CheckReport {
    r.unwrap_or_else(|e| CheckReport::errored(name, &e))
}

fn main() -> ExitCode {
    // `cargo test -- --list` style probes from tooling
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut lines = Vec::new();

    let mut id = timed("identity suite", || or_error("identities", verify::identities(64, 10, 7)));
    // the identity suite also carries a one-minute budget
    if id.elapsed > Duration::from_secs(60) {
        id.report.passed = false;
        id.report.detail.push_str(&format!("; runtime {:.1} s over 60 s", id.elapsed.as_secs_f64()));
    }
    lines.push(id);

    let bench_start = Instant::now();
    let bench = Benchmark::run(BenchmarkConfig::default());
    let bench_time = bench_start.elapsed();
    let shared = |label, f: &dyn Fn(&Benchmark) -> CheckReport, name: &str| match &bench {
        Ok(b) => Line { label, report: f(b), elapsed: bench_time },
        Err(e) => Line { label, report: CheckReport::errored(name, e), elapsed: bench_time },
    };
    lines.push(shared("energy equality", &|b| b.energy_check(), "energy_balance"));
    lines.push(shared("mass and density floor", &|b| b.mass_check(), "mass_and_lower_bound"));
    lines.push(shared("explicit-constant inequality", &|b| b.inequality_check(), "l3_interpolation"));

    lines.push(timed("potential density dual formula", verify::potential_agreement));
    lines.push(timed("toy model oracle", || or_error("toy_model_oracle", verify::toy_oracle())));
    lines.push(timed("schedule arithmetic", || or_error("schedule_arithmetic", verify::schedule_arithmetic())));
    lines.push(timed("collapse surrogate", || {
        or_error("collapse_reciprocal_fit", verify::collapse(32, 1.0, Scheme::ExplicitRk4).map(|r| r.0))
    }));
    lines.push(timed("littlewood-paley partition", || or_error("littlewood_paley", verify::dyadic(64, 3))));
    lines.push(timed("frequency-split limit", || or_error("freq_split_parseval", verify::freq_split_limit(64, 3))));
    lines.push(shared("lagrangian density formula", &|b| b.lagrangian_check(), "lagrangian_density"));
    lines.push(timed("manufactured convergence", || or_error("manufactured_convergence", verify::manufactured())));
    lines.push(shared("qualitative decay", &|b| or_error("energy_decay", b.decay_check()), "energy_decay"));

    let total = lines.len();
    let mut failed = 0;
    for (i, l) in lines.iter().enumerate() {
        if !l.report.passed {
            failed += 1;
        }
        println!("[{:>2}/{total}] {:<32} {} ({:.1} s)", i + 1, l.label, l.report, l.elapsed.as_secs_f64());
    }
    if let Ok(b) = &bench {
        println!("benchmark: {} steps, {:.1} s wall including the dt/2 window", b.summary.steps, bench_time.as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", total - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
