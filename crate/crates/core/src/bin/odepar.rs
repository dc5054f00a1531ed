//! Command-line driver: single runs, sweeps, order measurement and traces.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use odepar::bench::{
    convergence_order, emit_stepsize_trace, run_integrate, sweep_cpus, sweep_tolerance, write_csv, write_header,
    write_trajectory, BenchError, Method, RunParams, CPU_HEADER, TOL_HEADER, TRACE_HEADER,
};
use odepar::systems::by_name;
use odepar::Trajectory;

#[derive(Parser)]
#[command(name = "odepar", version, about = "Parallel Runge-Kutta integrators and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one integration and print its record.
    Integrate {
        #[command(flatten)]
        common: Common,
        /// Also write every accepted point as `t,y1,...,yd`.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Sweep `tol = 10^-T` over a range of exponents.
    SweepTol {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        t_min: u32,
        #[arg(long, default_value_t = 15)]
        t_max: u32,
        /// Add a serial dop853 row after each row.
        #[arg(long)]
        baseline: bool,
    },
    /// Sweep the probe count of dop853-aspa.
    SweepCpus {
        #[command(flatten)]
        common: Common,
        /// Comma-separated probe counts.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,5,10,20")]
        counts: Vec<usize>,
    },
    /// Measure the convergence order with fixed steps.
    Order {
        #[command(flatten)]
        common: Common,
        /// Comma-separated step sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        hs: Vec<f64>,
    },
    /// Per-iteration step sizes of a dop853-aspa run.
    Trace {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value = "dop853")]
    method: String,
    #[arg(long, default_value = "ho")]
    system: String,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    /// Probe count for dop853-aspa.
    #[arg(long, default_value_t = 1)]
    n_cpu: usize,
    /// PIRK iterations.
    #[arg(long, default_value_t = 9)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Perturbs the initial state by up to 1e-3 per component.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn params(&self) -> Result<RunParams, BenchError> {
        let method: Method = self.method.parse()?;
        let y0 = match self.seed {
            Some(seed) => {
                let sys = by_name(&self.system).map_err(|e| BenchError::Usage(e.to_string()))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Some(sys.initial_state().iter().map(|v| v + rng.gen_range(-1e-3..1e-3)).collect())
            }
            None => None,
        };
        Ok(RunParams {
            method,
            system: self.system.clone(),
            t0: self.t0,
            t_end: self.t_end,
            tol: self.tol,
            h: self.h,
            n_cpu: self.n_cpu,
            m: self.m,
            workers: self.workers,
            y0,
        })
    }

    fn output(&self) -> Result<Box<dyn Write>, BenchError> {
        Ok(match &self.out {
            Some(path) => Box::new(File::create(path)?),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Integrate { common, trajectory } => {
            let p = common.params()?;
            let mut traj = Trajectory::new();
            let out = if trajectory.is_some() { run_integrate(&p, &mut traj)? } else { run_integrate(&p, &mut ())? };
            write_csv(&[out.record], common.output()?)?;
            if let Some(path) = trajectory {
                write_trajectory(&traj, File::create(path)?)?;
            }
        }
        Command::SweepTol { common, t_min, t_max, baseline } => {
            if t_min > t_max || t_max > 300 {
                return Err(BenchError::Usage(format!("bad exponent range {t_min}..={t_max}")));
            }
            let exponents: Vec<u32> = (t_min..=t_max).collect();
            let rows = sweep_tolerance(&common.params()?, &exponents, baseline)?;
            emit(&rows, TOL_HEADER, common.output()?)?;
        }
        Command::SweepCpus { common, counts } => {
            let rows = sweep_cpus(&common.params()?, &counts)?;
            emit(&rows, CPU_HEADER, common.output()?)?;
        }
        Command::Order { common, hs } => {
            let p = common.params()?;
            let sys = by_name(&p.system).map_err(|e| BenchError::Usage(e.to_string()))?;
            let fit = convergence_order(p.method, &sys, &hs, p.t_end, p.m)?;
            let mut out = common.output()?;
            writeln!(out, "h,error,saturated")?;
            for pt in &fit.points {
                writeln!(out, "{},{:e},{}", pt.h, pt.error, pt.saturated)?;
            }
            eprintln!("slope {:.4} from {} of {} points", fit.slope, fit.used, fit.points.len());
        }
        Command::Trace { common } => {
            let (_, rows) = emit_stepsize_trace(&common.params()?)?;
            emit(&rows, TRACE_HEADER, common.output()?)?;
        }
    }
    Ok(())
}

fn emit<T: serde::Serialize>(rows: &[T], header: &str, out: Box<dyn Write>) -> Result<(), BenchError> {
    if rows.is_empty() {
        write_header(header, out)
    } else {
        write_csv(rows, out)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("odepar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
