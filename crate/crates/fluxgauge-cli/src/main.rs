//! Command-line driver: solve, report, verify, sweep, and export over
//! config files.
//!
//! Exit codes: 0 success, 2 config error, 3 solver failure, 4 verification
//! failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use fluxgauge::report::{
    alpha_section, capacitance_section, comparison_section, contour_rows, mask_rows, read_grid,
    vector_rows, verification_section, write_grid, RunManifest,
};
use fluxgauge::{
    compare_to_prediction, domain_scaling_check, load_config, loop_battery, refinement_check,
    run_sweep, vector_potential, Config, Error, Method, Scenario,
};

#[derive(Parser)]
#[command(name = "fluxgauge", version, about = "Stream-function field solver for a parallel-plate SQUID cross section")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file; repeatable, later files override earlier keys
    #[arg(short, long, global = true, action = ArgAction::Append)]
    config: Vec<PathBuf>,

    /// Output directory
    #[arg(short, long, global = true, default_value = "out")]
    out: PathBuf,

    /// Solver backend override
    #[arg(long, global = true, value_enum)]
    method: Option<MethodArg>,

    /// Solver tolerance override
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Grid refinement factor applied before solving
    #[arg(long, global = true, default_value_t = 1)]
    refine: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the stream function; writes psi and vector-potential grids
    Solve {
        /// Also dump the assembled system in coordinate format
        #[arg(long)]
        dump_system: bool,
    },
    /// Gauge parameters, capacitance ratios, and their comparison
    Report,
    /// Consistency battery: loop integrals, grid refinement, domain doubling
    Verify {
        /// Skip the (slower) refined-grid check
        #[arg(long)]
        skip_refinement: bool,
        /// Skip the domain-doubling check
        #[arg(long)]
        skip_domain: bool,
    },
    /// Evaluate the sweep definition from the config
    Sweep,
    /// Export solution data as tab-separated points
    Export {
        #[arg(long, value_enum)]
        what: ExportKind,
        /// Grid file produced by `solve` (contour and vectors exports)
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Cg,
    Sor,
    Dense,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Cg => Method::Cg,
            MethodArg::Sor => Method::Sor,
            MethodArg::Dense => Method::DenseDirect,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportKind {
    Contour,
    Vectors,
    Mask,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(cli: &Cli) -> Result<Config, Error> {
    if cli.config.is_empty() {
        return Err(Error::Config {
            key: "--config".into(),
            message: "at least one config file is required".into(),
        });
    }
    let mut texts = Vec::new();
    for path in &cli.config {
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        texts.push((path.display().to_string(), text));
    }
    let mut config = load_config(&texts)?;
    if let Some(m) = cli.method {
        config.scenario.solver.method = m.into();
    }
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(Error::Config {
                key: "--tol".into(),
                message: format!("tolerance must be positive, got {t}"),
            });
        }
        config.scenario.solver.tol = t;
    }
    if cli.refine > 1 {
        config.scenario = config.scenario.refined(cli.refine)?;
    }
    Ok(config)
}

fn manifest_for(cli: &Cli, command: &str, scenario: &Scenario) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        configs: cli.config.iter().map(|p| p.display().to_string()).collect(),
        out_dir: cli.out.display().to_string(),
        warnings: scenario.warnings(),
        ..RunManifest::default()
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Export { what, input } => return cmd_export(cli, *what, input.as_deref()),
        _ => {}
    }

    let config = load(cli)?;
    fs::create_dir_all(&cli.out).map_err(|e| Error::io(cli.out.display().to_string(), e))?;
    let start = Instant::now();

    match &cli.command {
        Command::Solve { dump_system } => cmd_solve(cli, &config, *dump_system, start),
        Command::Report => cmd_report(cli, &config, start),
        Command::Verify {
            skip_refinement,
            skip_domain,
        } => cmd_verify(cli, &config, *skip_refinement, *skip_domain, start),
        Command::Sweep => cmd_sweep(cli, &config, start),
        Command::Export { .. } => unreachable!("handled above"),
    }
}

fn cmd_solve(
    cli: &Cli,
    config: &Config,
    dump_system: bool,
    start: Instant,
) -> Result<ExitCode, Error> {
    let mut manifest = manifest_for(cli, "solve", &config.scenario);
    let solution = match config.scenario.solve_magnetostatic() {
        Ok(s) => s,
        Err(Error::NoConvergence(report)) => {
            // Solver failure still leaves a manifest with the diagnostics.
            manifest.stages.push(("psi".into(), report.clone()));
            manifest.wall_time = start.elapsed().as_secs_f64();
            manifest.write_atomic(&cli.out.join("manifest.txt"))?;
            return Err(Error::NoConvergence(report));
        }
        Err(e) => return Err(e),
    };

    let psi_path = cli.out.join("psi.grid");
    write_grid(&psi_path, &solution.psi)?;
    manifest.artifacts.push(psi_path.display().to_string());

    let a = vector_potential(&solution.psi);
    for (name, values) in [("ax.grid", &a.x_values), ("ay.grid", &a.y_values)] {
        let grid = fluxgauge::ScalarGrid {
            spec: solution.psi.spec,
            values: values.clone(),
        };
        let path = cli.out.join(name);
        write_grid(&path, &grid)?;
        manifest.artifacts.push(path.display().to_string());
    }

    if dump_system {
        let sys = fluxgauge::assemble(
            &solution.mask,
            &solution.field_grid,
            &fluxgauge::DirichletSpec::magnetostatic(),
        )?;
        let path = cli.out.join("system.txt");
        write_text(&path, &sys.dump_coo())?;
        manifest.artifacts.push(path.display().to_string());
    }

    manifest.stages.push(("psi".into(), solution.report.clone()));
    manifest.wall_time = start.elapsed().as_secs_f64();
    manifest.write_atomic(&cli.out.join("manifest.txt"))?;
    println!("solved: {} unknowns in {} iterations, residual {:.3e}",
        solution.psi.spec.node_count(), solution.report.iterations, solution.report.residual_norm);
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(cli: &Cli, config: &Config, start: Instant) -> Result<ExitCode, Error> {
    let mut manifest = manifest_for(cli, "report", &config.scenario);
    let (alpha, psi_report) = config.scenario.alpha_report()?;
    let (cap, v_report) = config.scenario.capacitance_report()?;
    let comparison = compare_to_prediction(&alpha, &cap, config.tolerances.prediction);

    let mut text = alpha_section(&alpha);
    text.push('\n');
    text.push_str(&capacitance_section(&cap));
    text.push('\n');
    text.push_str(&comparison_section(&comparison));
    let path = cli.out.join("report.txt");
    write_text(&path, &text)?;
    manifest.artifacts.push(path.display().to_string());
    manifest.stages.push(("psi".into(), psi_report));
    manifest.stages.push(("potential".into(), v_report));
    manifest.wall_time = start.elapsed().as_secs_f64();
    manifest.write_atomic(&cli.out.join("manifest.txt"))?;
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    cli: &Cli,
    config: &Config,
    skip_refinement: bool,
    skip_domain: bool,
    start: Instant,
) -> Result<ExitCode, Error> {
    let mut manifest = manifest_for(cli, "verify", &config.scenario);
    let tol = config.tolerances;
    let mut battery = loop_battery(&config.scenario, &tol)?;

    if !skip_refinement {
        let delta = refinement_check(&config.scenario, 2)?;
        battery.refinement_delta = Some(delta);
        battery.verdicts.push(fluxgauge::verification::CheckVerdict {
            name: "refinement_ratio_delta".into(),
            value: delta,
            threshold: tol.refinement_cap,
            pass: delta <= tol.refinement_cap,
        });
    }
    if !skip_domain {
        let delta = domain_scaling_check(&config.scenario, 2)?;
        battery.domain_delta = Some(delta);
        battery.verdicts.push(fluxgauge::verification::CheckVerdict {
            name: "domain_doubling_delta".into(),
            value: delta,
            threshold: tol.domain_cap,
            pass: delta <= tol.domain_cap,
        });
    }

    let text = verification_section(&battery);
    let path = cli.out.join("verification.txt");
    write_text(&path, &text)?;
    manifest.artifacts.push(path.display().to_string());
    manifest.wall_time = start.elapsed().as_secs_f64();
    manifest.write_atomic(&cli.out.join("manifest.txt"))?;
    print!("{text}");

    if battery.passed() {
        println!("verification: PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verification: FAIL");
        Ok(ExitCode::from(4))
    }
}

fn cmd_sweep(cli: &Cli, config: &Config, start: Instant) -> Result<ExitCode, Error> {
    let def = config.sweep.as_ref().ok_or_else(|| Error::Config {
        key: "sweep".into(),
        message: "config has no [sweep] section with axes".into(),
    })?;
    let mut manifest = manifest_for(cli, "sweep", &config.scenario);
    let table = run_sweep(&config.raw, def)?;
    let path = cli.out.join(format!("{}.tsv", table.table));
    write_text(&path, &table.to_tsv())?;
    manifest.artifacts.push(path.display().to_string());
    manifest.wall_time = start.elapsed().as_secs_f64();
    manifest.write_atomic(&cli.out.join("manifest.txt"))?;
    let failures = table.rows.iter().filter(|r| r.error.is_some()).count();
    println!(
        "sweep `{}`: {} rows ({} failed) -> {}",
        table.table,
        table.rows.len(),
        failures,
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_export(cli: &Cli, what: ExportKind, input: Option<&Path>) -> Result<ExitCode, Error> {
    fs::create_dir_all(&cli.out).map_err(|e| Error::io(cli.out.display().to_string(), e))?;
    let start = Instant::now();
    let (name, text, scenario) = match what {
        ExportKind::Contour => {
            let input = input.ok_or_else(|| Error::Config {
                key: "--input".into(),
                message: "contour export needs a psi grid file".into(),
            })?;
            let grid = read_grid(input)?;
            ("contour.tsv", contour_rows(&grid), None)
        }
        ExportKind::Vectors => {
            let input = input.ok_or_else(|| Error::Config {
                key: "--input".into(),
                message: "vectors export needs a psi grid file".into(),
            })?;
            let psi = read_grid(input)?;
            let config = load(cli)?;
            let mask = config.scenario.mask()?;
            if mask.spec != psi.spec {
                return Err(Error::InconsistentGrids);
            }
            let a = vector_potential(&psi);
            ("vectors.tsv", vector_rows(&a, &mask), Some(config.scenario))
        }
        ExportKind::Mask => {
            let config = load(cli)?;
            let mask = config.scenario.mask()?;
            ("mask.tsv", mask_rows(&mask), Some(config.scenario))
        }
    };
    let path = cli.out.join(name);
    write_text(&path, &text)?;

    let mut manifest = RunManifest {
        command: "export".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        configs: cli.config.iter().map(|p| p.display().to_string()).collect(),
        out_dir: cli.out.display().to_string(),
        ..RunManifest::default()
    };
    if let Some(sc) = scenario {
        manifest.warnings = sc.warnings();
    }
    manifest.artifacts.push(path.display().to_string());
    manifest.wall_time = start.elapsed().as_secs_f64();
    manifest.write_atomic(&cli.out.join("manifest.txt"))?;
    println!("exported {}", path.display());
    Ok(ExitCode::SUCCESS)
}
