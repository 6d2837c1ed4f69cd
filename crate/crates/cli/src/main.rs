use std::fs::File;
use std::io::{self, BufReader};
use std::path::PathBuf;
use std::process::ExitCode;

use bilip::harness::{parse_suite_list, run_suite, SuiteConfig, Verdict, DEFAULT_GRID};
use bilip::maps::{by_name, gallery, sample_derivative_profile, SampleGrid};
use bilip::spaces::{boyd_lower_index, default_t_grid, norm, SpaceSpec, StepProfile};
use bilip::symbolic::{expand_composition, expand_inverse, expand_product, InverseMode};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bilip", version, about = "High-order derivatives of inverse, composed and product maps, and their norms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Comp,
    Inv,
    Prod,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Unsub,
    Sub,
}

#[derive(Subcommand)]
enum Command {
    /// Print the symbolic expansion of an m-th derivative
    Expand {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        order: u32,
        /// emit the JSON term list
        #[arg(long)]
        json: bool,
        /// inverse expansions only: keep or substitute lower inverse derivatives
        #[arg(long, value_enum, default_value = "unsub")]
        mode: Mode,
    },
    /// Norm of a step profile read from CSV
    Norm {
        #[arg(long)]
        profile: PathBuf,
        /// e.g. `Lp:2`, `Lorentz:2,1`, `Orlicz:pow3`, `Conv(Lp:2)^1.5`
        #[arg(long)]
        space: String,
    },
    /// Run verification checks and write reports
    Verify {
        /// `default`, or comma-separated check ids and `prefix*` patterns
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// TOML file with `suite`, `grid`, `seed`, `out`, `timing`; flags win
        #[arg(long)]
        config: Option<PathBuf>,
        /// fill the runtime_ms column (reports are then no longer reproducible)
        #[arg(long)]
        timing: bool,
    },
    /// Estimate the lower Boyd index of a space
    Boyd {
        #[arg(long)]
        space: String,
    },
    /// List the shipped test maps
    Gallery,
    /// Sample |D^k f| (or |D^k f⁻¹| over the image) into a CSV step profile
    Profile {
        #[arg(long)]
        map: String,
        #[arg(long)]
        order: u32,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        #[arg(long)]
        inverse: bool,
        /// write here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

type Failure = Box<dyn std::error::Error>;

fn expand(kind: Kind, order: u32, json: bool, mode: Mode) -> Result<(), Failure> {
    let e = match kind {
        Kind::Comp => expand_composition(order)?,
        Kind::Prod => expand_product(order)?,
        Kind::Inv => expand_inverse(
            order,
            match mode {
                Mode::Unsub => InverseMode::Unsubstituted,
                Mode::Sub => InverseMode::Substituted,
            },
        )?,
    };
    if json {
        println!("{}", e.to_json());
    } else {
        println!("{e}");
    }
    Ok(())
}

fn verify(
    suite: Option<String>,
    grid: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
    timing: bool,
) -> Result<ExitCode, Failure> {
    let mut cfg = match config {
        Some(path) => SuiteConfig::from_toml(&std::fs::read_to_string(path)?)?,
        None => SuiteConfig::default(),
    };
    if let Some(s) = suite {
        cfg.suite = parse_suite_list(&s);
    }
    cfg.grid = grid.unwrap_or(cfg.grid);
    cfg.seed = seed.unwrap_or(cfg.seed);
    cfg.out = out.or(cfg.out);
    cfg.timing |= timing;
    let outcome = run_suite(&cfg)?;
    for r in &outcome.reports {
        let o = &r.outcome;
        println!("{:<13} {:<40} ratio {:<12.6e} tol {:.3e}", o.verdict.to_string(), r.check_id, o.ratio, o.tol);
    }
    let count = |v: Verdict| outcome.reports.iter().filter(|r| r.outcome.verdict == v).count();
    println!(
        "{} checks: {} pass, {} fail, {} vacuous, {} skipped",
        outcome.reports.len(),
        count(Verdict::Pass),
        count(Verdict::Fail),
        count(Verdict::Vacuous),
        count(Verdict::SkippedGate)
    );
    Ok(ExitCode::from(outcome.exit_code as u8))
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Expand { kind, order, json, mode } => expand(kind, order, json, mode)?,
        Command::Norm { profile, space } => {
            let spec: SpaceSpec = space.parse()?;
            let u = StepProfile::read_csv(BufReader::new(File::open(profile)?))?;
            println!("{}", norm(&u, &spec)?);
        }
        Command::Verify { suite, grid, seed, out, config, timing } => {
            return verify(suite, grid, seed, out, config, timing);
        }
        Command::Boyd { space } => {
            let spec: SpaceSpec = space.parse()?;
            let est = boyd_lower_index(&spec, &default_t_grid())?;
            println!("space {spec}");
            println!("lower Boyd index ≈ {:.6} (fit residual {:.2e})", est.slope, est.residual);
            for (t, v) in &est.points {
                println!("  t = {t:<10} ‖E_1/t‖ ≥ {v:.6e}");
            }
        }
        Command::Gallery => {
            for m in gallery() {
                let domain: Vec<String> = m.domain().iter().map(|(a, b)| format!("({a:.6}, {b:.6})")).collect();
                println!(
                    "{:<16} n={} L={:.6} inverse={:?} domain={}",
                    m.name(),
                    m.dim(),
                    m.lipschitz(),
                    m.inverse_mode(),
                    domain.join(" x ")
                );
            }
        }
        Command::Profile { map, order, grid, margin, inverse, out } => {
            let m = by_name(&map)?;
            let g = SampleGrid::interior(&m, margin, grid)?;
            let p = sample_derivative_profile(&m, order, &g, inverse)?;
            match out {
                Some(path) => p.write_csv(File::create(path)?)?,
                None => p.write_csv(io::stdout().lock())?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
