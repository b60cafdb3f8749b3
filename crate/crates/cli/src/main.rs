use sparsetomo_cli::{
    run, CliError, ExperimentConfig, ExperimentKind, RecoveryMode, EXIT_GUARANTEE, EXIT_OK,
    EXIT_VALIDATION,
};
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "\
usage: sparsetomo <subcommand> --config PATH [--seed U64] [--out DIR] [--mode theorem|empirical]

subcommands:
  run-nmr      Fourier reconstruction of an integer-spectrum time evolution
  run-fermion  Chebyshev reconstruction of a fermionic Gaussian time evolution
  support-id   identify the sparse support from Pauli probes
  recover      run the recovery pipeline of the configured experiment
  predict      evaluate observables on a stored coefficient sidecar
  audit        execute the property-audit ledger

exit codes: 0 ok, 1 validation, 2 numerical-guarantee failure, 3 i/o";

struct Args {
    subcommand: String,
    config: PathBuf,
    seed: Option<u64>,
    out: PathBuf,
    mode: Option<RecoveryMode>,
}

fn parse_args(argv: &[String]) -> Result<Args, String> {
    if argv.is_empty() {
        return Err(USAGE.into());
    }
    let subcommand = argv[0].clone();
    let mut config: Option<PathBuf> = None;
    let mut seed: Option<u64> = None;
    let mut out = PathBuf::from("out");
    let mut mode: Option<RecoveryMode> = None;
    let mut it = argv[1..].iter();
    while let Some(flag) = it.next() {
        let mut value = |name: &str| -> Result<String, String> {
            it.next().cloned().ok_or_else(|| format!("flag {name} needs a value"))
        };
        match flag.as_str() {
            "--config" => config = Some(PathBuf::from(value("--config")?)),
            "--seed" => {
                seed = Some(
                    value("--seed")?
                        .parse::<u64>()
                        .map_err(|e| format!("bad --seed: {e}"))?,
                )
            }
            "--out" => out = PathBuf::from(value("--out")?),
            "--mode" => {
                mode = Some(match value("--mode")?.as_str() {
                    "theorem" => RecoveryMode::Theorem,
                    "empirical" => RecoveryMode::Empirical,
                    other => return Err(format!("unknown mode '{other}'")),
                })
            }
            other => return Err(format!("unknown flag '{other}'\n{USAGE}")),
        }
    }
    let config = config.ok_or_else(|| format!("--config is required\n{USAGE}"))?;
    Ok(Args { subcommand, config, seed, out, mode })
}

fn execute(args: Args) -> Result<i32, CliError> {
    let mut config = ExperimentConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(mode) = args.mode {
        if let Some(rec) = config.recovery.as_mut() {
            rec.mode = mode;
        }
    }
    let expected = match args.subcommand.as_str() {
        "run-nmr" => Some(ExperimentKind::Nmr),
        "run-fermion" => Some(ExperimentKind::Fermion),
        "support-id" => Some(ExperimentKind::SupportId),
        "audit" => Some(ExperimentKind::Audit),
        "predict" => Some(ExperimentKind::Predict),
        "recover" => None, // takes the experiment from the config
        other => {
            return Err(CliError::Validation(format!("unknown subcommand '{other}'\n{USAGE}")))
        }
    };
    if let Some(kind) = expected {
        if config.experiment != kind {
            return Err(CliError::Validation(format!(
                "config experiment {:?} does not match the subcommand",
                config.experiment
            )));
        }
    }
    let output = run(&config, &args.out)?;
    eprintln!("report: {}", output.summary_path.display());
    Ok(if output.guarantee_met { EXIT_OK } else { EXIT_GUARANTEE })
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let args = match parse_args(&argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
    };
    match execute(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
