use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pssl_core::concepts::{ClassSpec, ConceptClass};
use pssl_core::error::{Error, Result};
use pssl_core::harness::{
    run_audit, run_experiment, summary_table, write_audit_csv, AuditExperiment, ExperimentConfig,
};

#[derive(Parser, Debug)]
#[command(name = "pssl", version, about = "Private semi-supervised learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the config's root seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the config's trial count.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Directory for reports.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print an aligned summary table.
    #[arg(long, global = true)]
    summary: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the trials of an experiment config.
    Run { config: PathBuf },
    /// Run an experiment config's sweep and write the curve table.
    Sweep { config: PathBuf },
    /// Estimate epsilon for a mechanism on a neighbouring pair.
    Audit { config: PathBuf },
    /// Brute-force VC dimension of a class spec, e.g. `thresh:3` or `xor(rect:2x2)`.
    Vc { class: String },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn experiment(cli: &Cli, path: &Path, need_sweep: bool) -> Result<()> {
    let mut cfg = ExperimentConfig::from_json(&read(path)?)?;
    if need_sweep && cfg.sweep.is_none() {
        return Err(Error::Config(format!("{} has no sweep", path.display())));
    }
    if let Some(s) = cli.seed {
        cfg.root_seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    if let Some(d) = &cli.out_dir {
        cfg.output.dir = Some(d.clone());
    }
    let report = run_experiment(&cfg)?;
    if cli.summary {
        print!("{}", summary_table(&report));
    }
    if cfg.output.dir.is_none() {
        println!("{}", serde_json::to_string_pretty(&report)?);
    }
    Ok(())
}

fn audit(cli: &Cli, path: &Path) -> Result<()> {
    let mut exp = AuditExperiment::from_json(&read(path)?)?;
    if let Some(s) = cli.seed {
        exp.audit.seed = s;
    }
    if let Some(t) = cli.trials {
        exp.audit.trials = t;
    }
    let report = run_audit(&exp)?;
    if cli.summary {
        println!(
            "{}: epsilon_hat = {:.4} (point {:.4}) over {} trials",
            report.mechanism, report.epsilon_hat, report.epsilon_point, report.trials
        );
    }
    match &cli.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("audit.json"), serde_json::to_string_pretty(&report)? + "\n")?;
            write_audit_csv(std::fs::File::create(dir.join("audit.csv"))?, &[(exp.index(), &report)])?;
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(())
}

fn vc(spec: &str) -> Result<()> {
    let spec: ClassSpec = spec.parse()?;
    let class = ConceptClass::build(&spec, Default::default())?;
    println!("{} members={} vc={}", class.id(), class.len(), class.vc_dimension()?);
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Trial { source, .. } => exit_code(source),
        Error::Resource(_) => 3,
        Error::Config(_) | Error::Json(_) | Error::Domain(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("pssl: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Run { config } => experiment(&cli, config, false),
        Command::Sweep { config } => experiment(&cli, config, true),
        Command::Audit { config } => audit(&cli, config),
        Command::Vc { class } => vc(class),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pssl: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
