use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use trgeom::scenario::{self, Overrides, Scenario, Task};
use trgeom::GeomError;

#[derive(Parser)]
#[command(name = "trgeom", version, about = "Totally real submanifolds of Kähler manifolds: Maslov forms, linearised operators, Moser isotopy and Newton continuation")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Flags {
    /// Grid nodes per axis, overriding the scenario.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Headline certificate tolerance, overriding the scenario.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory (default: `out/<scenario name>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Allow Newton continuation of immersions of dimension ≥ 2.
    #[arg(long, global = true)]
    experimental_nd: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the fixed-seed invariant suites of one module, or `all`.
    Validate {
        #[arg(default_value = "all")]
        module: String,
    },
    /// Maslov form of an immersion (default scenario: clifford_maslov).
    Maslov { config: Option<String> },
    /// Linearised Maslov operator and its spectrum (default: core_geodesic_spectrum).
    Linearize { config: Option<String> },
    /// Moser transport along a family of forms (default: clifford_moser).
    Moser { config: Option<String> },
    /// Newton continuation and uniqueness probe (default: hyperbolic_persistence).
    Persist { config: Option<String> },
    /// Run a scenario config file or a bundled scenario by name.
    Run { config: String },
    /// List the bundled scenarios.
    List,
}

fn load(config: Option<&str>, default: &str, task: Option<Task>) -> Result<Scenario, GeomError> {
    let s = scenario::resolve(config.unwrap_or(default))?;
    match task {
        Some(t) if t != s.task() => Err(GeomError::Config {
            line: 0,
            key: "task".into(),
            message: format!("scenario `{}` runs `{}`, not `{}`", s.name, s.task().name(), t.name()),
        }),
        _ => Ok(s),
    }
}

fn run_scenario(mut s: Scenario, overrides: &Overrides) -> Result<bool, GeomError> {
    s.apply(overrides);
    let outcome = scenario::run(&s)?;
    let dir = s.out.clone().unwrap_or_else(|| PathBuf::from("out").join(&s.name));
    scenario::write_report(&dir, &s, &outcome)?;
    for c in &outcome.certificates {
        let bound = match (c.min, c.max) {
            (Some(a), Some(b)) => format!("in [{a:e}, {b:e}]"),
            (Some(a), None) => format!(">= {a:e}"),
            (None, Some(b)) => format!("<= {b:e}"),
            (None, None) => String::new(),
        };
        println!("{} {} = {:e} {bound}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value);
    }
    println!("{}: {} (report in {})", s.name, if outcome.pass() { "ok" } else { "FAILED" }, dir.display());
    Ok(outcome.pass())
}

fn validate(module: &str, out: Option<&PathBuf>) -> Result<bool, GeomError> {
    let checks = scenario::validate(module)?;
    for c in &checks {
        println!("{} {}::{} = {:e} (tol {:e})", if c.pass { "PASS" } else { "FAIL" }, c.module, c.name, c.value, c.tol);
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(&checks).expect("checks serialise") + "\n";
        std::fs::write(dir.join("validate.json"), json)?;
    }
    Ok(checks.iter().all(|c| c.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.flags.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let overrides = Overrides {
        resolution: cli.flags.resolution,
        tol: cli.flags.tol,
        seed: cli.flags.seed,
        out: cli.flags.out.clone(),
        experimental_nd: cli.flags.experimental_nd,
    };
    let result = match &cli.command {
        Command::Validate { module } => validate(module, cli.flags.out.as_ref()),
        Command::Maslov { config } => {
            load(config.as_deref(), "clifford_maslov", Some(Task::Maslov)).and_then(|s| run_scenario(s, &overrides))
        }
        Command::Linearize { config } => load(config.as_deref(), "core_geodesic_spectrum", Some(Task::Linearize))
            .and_then(|s| run_scenario(s, &overrides)),
        Command::Moser { config } => {
            load(config.as_deref(), "clifford_moser", Some(Task::Moser)).and_then(|s| run_scenario(s, &overrides))
        }
        Command::Persist { config } => load(config.as_deref(), "hyperbolic_persistence", Some(Task::Persist))
            .and_then(|s| run_scenario(s, &overrides)),
        Command::Run { config } => load(Some(config), "", None).and_then(|s| run_scenario(s, &overrides)),
        Command::List => {
            for (name, _) in scenario::BUNDLED {
                println!("{name}");
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
