//! `pulse-cns`: run, inspect and verify short-pulse compressible flows.
//!
//! Exit status: 0 on success, 1 when a check fails or a run breaks down,
//! 2 for usage, configuration and missing-input errors.

use clap::{Parser, Subcommand};
use pulse_cns::checkpoint;
use pulse_cns::config::RunConfig;
use pulse_cns::csv::{parse_diagnostics, write_rows, DiagnosticsWriter};
use pulse_cns::diagnostics::{self, is_hard_inequality, DiagnosticsRecord};
use pulse_cns::envelope::{self, envelope_schedule, envelope_value, EnvelopeSchedule, Phase};
use pulse_cns::fft::Band;
use pulse_cns::harness::{envelope_check, thresholds_report};
use pulse_cns::lagrangian::{density_formula_residual, trajectory_csv, Tracker};
use pulse_cns::pulse::build_pulse;
use pulse_cns::solver::{self, RunObserver};
use pulse_cns::verify::{run_suite, SUITES};
use pulse_cns::{Error, PulseParams, State};
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pulse-cns", version, about = "Short-pulse compressible Navier-Stokes solver and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a template config (unless it exists) and the initial checkpoint.
    Init {
        #[arg(long, default_value = "pulse.cfg")]
        config: PathBuf,
    },
    /// Integrate, streaming diagnostics.csv, checkpoints and trajectories.
    Run {
        #[arg(long, default_value = "pulse.cfg")]
        config: PathBuf,
        /// Start from this checkpoint instead of the pulse.
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Recompute diagnostics records from checkpoints.
    Diagnose {
        #[arg(long, default_value = "pulse.cfg")]
        config: PathBuf,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(required = true)]
        checkpoints: Vec<PathBuf>,
    },
    /// Print the envelope schedule and, optionally, its values.
    Envelope {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long = "t")]
        times: Vec<f64>,
    },
    /// Tabulate the toy model f(t) = 1/(delta^alpha + gamma t).
    Toy {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long = "t", required = true)]
        times: Vec<f64>,
    },
    /// Run a group of acceptance checks.
    Verify {
        #[arg(long, default_value = "fast", value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
    },
    /// Summarize a finished run directory into report.txt and envelope.csv.
    Report {
        #[arg(long, default_value = "pulse.cfg")]
        config: PathBuf,
    },
}

/// Errors carry the exit status they map to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config { .. }
            | Error::Io(_)
            | Error::InvalidArgument(_)
            | Error::InvalidGrid(_)
            | Error::PulseTooWide { .. }
            | Error::Checkpoint(_)
            | Error::Csv(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type Outcome = std::result::Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("PULSE_CNS_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: PULSE_CNS_THREADS = '{v}' is not a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let outcome = match cli.command {
        Command::Init { config } => init(&config),
        Command::Run { config, from } => run(&config, from.as_deref()),
        Command::Diagnose { config, out, checkpoints } => diagnose(&config, out.as_deref(), &checkpoints),
        Command::Envelope { delta, alpha, gamma, epsilon, times } => print_envelope(delta, alpha, gamma, epsilon, &times),
        Command::Toy { delta, alpha, gamma, times } => toy(delta, alpha, gamma, &times),
        Command::Verify { suite } => verify(&suite),
        Command::Report { config } => report(&config),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<RunConfig, Failure> {
    RunConfig::load(path).map_err(|e| match e {
        Error::Config { .. } => usage(format!("{}: {e}", path.display())),
        e => e.into(),
    })
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn checkpoint_path(dir: &Path, step: u64) -> PathBuf {
    dir.join(format!("checkpoint_{step:08}.pcns"))
}

fn init(config: &Path) -> Outcome {
    let cfg = if config.exists() {
        load(config)?
    } else {
        let cfg = RunConfig::default();
        write_file(config, &cfg.to_text())?;
        println!("wrote template {}", config.display());
        cfg
    };
    let state = build_pulse(&cfg.pulse, cfg.grid)?;
    create_dir(&cfg.output_dir)?;
    let path = checkpoint_path(&cfg.output_dir, 0);
    checkpoint::write(&path, &state, &cfg.pulse)?;
    let init = pulse_cns::pulse::derived_initials(&state, &cfg.pulse)?;
    println!("wrote {}", path.display());
    println!(
        "||a0||: Linf {:.6e}, L1 {:.6e}, L2 {:.6e}, L6 {:.6e}",
        init.a0_linf, init.a0_l1, init.a0_l2, init.a0_l6
    );
    println!("||F0||_2 {:.6e}, H(rho0) {:.6e}, weighted initial energy {:.6e}", init.f0_l2, init.h_rho0, init.e0_scaled);
    Ok(ExitCode::SUCCESS)
}

struct Streams<'a> {
    csv: DiagnosticsWriter<BufWriter<File>>,
    dir: &'a Path,
    tracker: Option<Tracker>,
    checkpoints: usize,
}

impl RunObserver for Streams<'_> {
    fn on_record(&mut self, r: &DiagnosticsRecord) -> pulse_cns::Result<()> {
        self.csv.write(r)?;
        self.csv.flush()
    }
    fn on_checkpoint(&mut self, step: u64, state: &State, params: &PulseParams) -> pulse_cns::Result<()> {
        self.checkpoints += 1;
        checkpoint::write(&checkpoint_path(self.dir, step), state, params)
    }
    fn on_snapshot(&mut self, _step: u64, state: &State) -> pulse_cns::Result<()> {
        match self.tracker.as_mut() {
            Some(t) => t.push(state),
            None => Ok(()),
        }
    }
}

fn run(config: &Path, from: Option<&Path>) -> Outcome {
    let cfg = load(config)?;
    let (initial, params) = match from {
        Some(p) => {
            let ck = checkpoint::read(p)?;
            if ck.state.grid() != cfg.grid {
                return Err(usage(format!("{} does not match the configured grid", p.display())));
            }
            let params = PulseParams { gamma: ck.gamma, mu: ck.mu, lambda: ck.lambda, ..cfg.pulse };
            (ck.state, params)
        }
        None => (build_pulse(&cfg.pulse, cfg.grid)?, cfg.pulse),
    };
    create_dir(&cfg.output_dir)?;
    let csv_path = cfg.output_dir.join("diagnostics.csv");
    let file = File::create(&csv_path).map_err(|e| usage(format!("cannot create {}: {e}", csv_path.display())))?;
    let late = initial.t > cfg.tau + 1e-9 * cfg.tau.abs().max(1.0);
    let tracker = if cfg.seeds.is_empty() || cfg.solver.snapshot_every == 0 || late {
        if !cfg.seeds.is_empty() {
            if late {
                eprintln!("note: run starts at t = {} after the release time {}, particles are not tracked", initial.t, cfg.tau);
            } else {
                eprintln!("note: solver.snapshot_every = 0, particles are not tracked");
            }
        }
        None
    } else {
        let band = if params.gamma == 1.0 { Band::Cube(cfg.grid.dealias_cutoff()) } else { Band::Full };
        Some(Tracker::new(&cfg.seeds, cfg.tau, &params, band)?)
    };
    let mut streams =
        Streams { csv: DiagnosticsWriter::new(BufWriter::new(file)), dir: &cfg.output_dir, tracker, checkpoints: 0 };
    let summary = solver::run(&initial, &params, &cfg.solver, &cfg.diagnostics, &mut streams)?;
    println!(
        "{} steps to t = {:.6}, {} records in {}, {} checkpoints, {:.1} s",
        summary.steps,
        summary.t_final,
        summary.records,
        csv_path.display(),
        streams.checkpoints,
        summary.wall_time.as_secs_f64()
    );
    println!("min rho {:.6}, max rho {:.6}, mass drift {:.3e}", summary.min_rho, summary.max_rho, summary.max_mass_drift);
    if let Some(t) = streams.tracker.take() {
        let trajs = t.finish();
        let mut worst = 0.0f64;
        for (i, tr) in trajs.iter().enumerate() {
            write_file(&cfg.output_dir.join(format!("trajectory_{i:03}.csv")), &trajectory_csv(tr))?;
            worst = worst.max(density_formula_residual(tr));
        }
        println!("{} trajectories, density formula residual {worst:.3e}", trajs.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn diagnose(config: &Path, out: Option<&Path>, paths: &[PathBuf]) -> Outcome {
    let cfg = load(config)?;
    let mut records = Vec::with_capacity(paths.len());
    for p in paths {
        let ck = checkpoint::read(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        let params = PulseParams { gamma: ck.gamma, mu: ck.mu, lambda: ck.lambda, ..cfg.pulse };
        records.push(diagnostics::record(&ck.state, &params, &cfg.diagnostics)?);
    }
    records.sort_by(|a, b| a.t.total_cmp(&b.t));
    let text = pulse_cns::csv::write_diagnostics(&records)?;
    match out {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn schedule_text(s: &EnvelopeSchedule) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "delta = {:e}, alpha = {}, gamma = {}, epsilon = {}", s.delta, s.alpha, s.gamma, s.epsilon);
    let _ = writeln!(o, "N0 = {}, in regime: {}", s.n0, s.in_regime);
    let _ = writeln!(o, "T0 = {:.6e}", s.t0);
    let _ = writeln!(o, "T1 = {:.6e}", s.t1);
    let _ = writeln!(o, "T2 = {:.6e}", s.t2);
    let _ = writeln!(o, "L6 switch = {:.6e}", s.l6_switch_time());
    let _ = writeln!(o, "beta = {:.6}", s.beta);
    if s.intervals() > 0 {
        let _ = writeln!(o, "{:>4} {:>14} {:>14} {:>12}", "j", "t_{j-1}", "t_j", "bound");
        for j in 1..=s.intervals() {
            let _ = writeln!(o, "{j:>4} {:>14.6e} {:>14.6e} {:>12.1}", s.t[j - 1], s.t[j], s.interval_start_value(j));
        }
        let _ = writeln!(o, "L1 over [0, T0] = {:.6} (bound {:.6})", envelope::envelope_l1(s), envelope::l1_bound(s));
    }
    o
}

fn phase_name(p: Phase) -> String {
    match p {
        Phase::Collapse(j) => format!("collapse_{j}"),
        Phase::Plateau => "plateau".into(),
        Phase::SmallAmplitude => "small_amplitude".into(),
    }
}

fn print_envelope(delta: f64, alpha: f64, gamma: f64, epsilon: f64, times: &[f64]) -> Outcome {
    let s = envelope_schedule(delta, alpha, gamma, epsilon)?;
    print!("{}", schedule_text(&s));
    for &t in times {
        if !(t >= 0.0) {
            return Err(usage(format!("--t {t} must be nonnegative")));
        }
        let v = envelope_value(&s, t);
        println!("t = {t:e}: bound {:.6e} ({})", v.value, phase_name(v.phase));
    }
    Ok(ExitCode::SUCCESS)
}

fn toy(delta: f64, alpha: f64, gamma: f64, times: &[f64]) -> Outcome {
    if !(delta > 0.0 && alpha > 0.0 && gamma > 0.0) {
        return Err(usage("delta, alpha and gamma must be positive"));
    }
    for &t in times {
        if !(t >= 0.0) {
            return Err(usage(format!("--t {t} must be nonnegative")));
        }
        println!("t = {t}: f = {}", envelope::toy_model(delta, alpha, gamma, t));
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(suite: &str) -> Outcome {
    let reports = run_suite(suite)?;
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} of {} checks passed", reports.len() - failed, reports.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn report(config: &Path) -> Outcome {
    let cfg = load(config)?;
    let csv_path = cfg.output_dir.join("diagnostics.csv");
    let text = std::fs::read_to_string(&csv_path).map_err(|e| usage(format!("{}: {e}", csv_path.display())))?;
    let records = parse_diagnostics(&text)?;
    let (first, last) = match (records.first(), records.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(usage(format!("{} holds no records", csv_path.display()))),
    };
    let p = cfg.pulse;
    let s = envelope_schedule(p.delta, p.alpha, p.gamma, p.epsilon)?;
    let mut o = String::new();
    let _ = writeln!(o, "run directory {}", cfg.output_dir.display());
    let _ = writeln!(o, "{} records, t in [{}, {}]", records.len(), first.t, last.t);
    let drift = records.iter().map(|r| ((r.mass - first.mass) / first.mass).abs()).fold(0.0, f64::max);
    let min_rho = records.iter().map(|r| r.min_rho).fold(f64::INFINITY, f64::min);
    let _ = writeln!(o, "mass drift {drift:.3e}; min rho {min_rho:.6} (floor {:.6})", 0.5f64.powf(1.0 / p.gamma));
    let balance = records.iter().map(|r| r.energy_balance_residual).filter(|v| v.is_finite()).fold(0.0, f64::max);
    let elliptic = records.iter().map(|r| r.elliptic_residual).fold(0.0, f64::max);
    let _ = writeln!(o, "worst energy balance residual {balance:.3e}; worst elliptic residual {elliptic:.3e}");
    let rise = records.windows(2).filter(|w| w[0].t >= s.t0).map(|w| w[1].e - w[0].e).fold(0.0, f64::max);
    let d_int: f64 = records.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].d + w[1].d)).sum();
    let _ = writeln!(o, "E {:.6e} -> {:.6e}; largest rise after T0 {rise:.3e}; integral of D {d_int:.6e}", first.e, last.e);
    let violations: Vec<String> = records
        .iter()
        .flat_map(|r| {
            r.ineq_margins
                .iter()
                .filter(|(name, lhs, rhs)| is_hard_inequality(name) && *lhs > rhs + 1e-12 * rhs.abs().max(lhs.abs()))
                .map(move |m| format!("{} at t = {}", m.0, r.t))
        })
        .collect();
    let _ = writeln!(o, "inequality violations: {}", if violations.is_empty() { "none".into() } else { violations.join(", ") });
    o.push('\n');
    o.push_str(&schedule_text(&s));
    let series: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.linf_a)).collect();
    match envelope_check(&series, &s) {
        Ok(env) => {
            for m in &env.intervals {
                let _ = writeln!(o, "interval {}: worst margin {:.4} at t = {:e} ({} samples)", m.j, m.worst_margin, m.worst_t, m.samples);
            }
            if let Some((t, obs, bound)) = env.violation {
                let _ = writeln!(o, "first excess at t = {t:e}: {obs:.6e} > {bound:.6e}");
            }
            if let Some(f) = &env.fit {
                let _ = writeln!(o, "reciprocal fit on [{}, {}]: c0 = {:.6}, c1 = {:.6}, r2 = {:.6}", f.window.0, f.window.1, f.intercept, f.exponent, f.r_squared);
            }
            let _ = writeln!(o, "envelope check: {}", if env.passed { "pass" } else { "fail" });
        }
        Err(e) => {
            let _ = writeln!(o, "envelope check not evaluated: {e}");
        }
    }
    o.push('\n');
    let _ = write!(o, "{}", thresholds_report(&s, &records));
    let env_rows = records.iter().map(|r| {
        let v = envelope_value(&s, r.t);
        vec![r.t, r.linf_a, v.value]
    });
    write_file(&cfg.output_dir.join("envelope.csv"), &write_rows(&["t", "linf_a", "envelope"], env_rows))?;
    write_file(&cfg.output_dir.join("report.txt"), &o)?;
    print!("{o}");
    Ok(ExitCode::SUCCESS)
}
