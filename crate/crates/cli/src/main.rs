use clap::{ArgMatches, Args, Command, FromArgMatches, Parser, Subcommand};
use postsel_cli::config::KEYS;
use postsel_cli::{build_config, commands, parse_config, CliError, Preset};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "postsel", version, about = "QSVT post-selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Experiment,

    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, default_value = "paper", value_parser = ["paper", "desk"])]
    preset: String,

    #[command(flatten)]
    overrides: KeyOverrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Experiment {
    /// LAA fidelity and success probability against p* (mixed-state post-selection).
    Fig4,
    /// Pseudoinverse decoder fidelity and success probability against p*.
    Fig6,
    /// FPAA on random pure-state instances.
    Fpaa,
    /// Kraus chain vs SWAP deferral vs compression gadget.
    GadgetCheck,
    /// Randomized bound checks.
    Bounds,
    /// Circuit-tier LAA and decoder runs against their spectrum formulas.
    Protocol,
    /// Runs the experiment named by the `experiment` key.
    Run,
}

impl Experiment {
    fn name(self) -> Option<&'static str> {
        Some(match self {
            Self::Fig4 => "fig4",
            Self::Fig6 => "fig6",
            Self::Fpaa => "fpaa",
            Self::GadgetCheck => "gadget-check",
            Self::Bounds => "bounds",
            Self::Protocol => "protocol",
            Self::Run => return None,
        })
    }
}

/// `--<key> VALUE` for every config key, in key order.
struct KeyOverrides(Vec<(String, String)>);

impl FromArgMatches for KeyOverrides {
    fn from_arg_matches(m: &ArgMatches) -> Result<Self, clap::Error> {
        Ok(Self(KEYS.iter().filter_map(|k| m.get_one::<String>(k).map(|v| (k.to_string(), v.clone()))).collect()))
    }

    fn update_from_arg_matches(&mut self, m: &ArgMatches) -> Result<(), clap::Error> {
        *self = Self::from_arg_matches(m)?;
        Ok(())
    }
}

impl Args for KeyOverrides {
    fn augment_args(cmd: Command) -> Command {
        KEYS.iter().fold(cmd, |cmd, &k| {
            cmd.arg(clap::Arg::new(k).long(k).value_name("VALUE").global(true).help_heading("Config keys"))
        })
    }

    fn augment_args_for_update(cmd: Command) -> Command {
        Self::augment_args(cmd)
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut pairs = match &cli.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => Vec::new(),
    };
    pairs.extend(cli.overrides.0);
    let experiment = match cli.command.name() {
        Some(name) => {
            if let Some((_, v)) = pairs.iter().rev().find(|(k, _)| k == "experiment") {
                if v != name {
                    return Err(CliError::Usage(format!(
                        "config names experiment '{v}' but the subcommand is '{name}'"
                    )));
                }
            }
            name.to_string()
        }
        None => pairs
            .iter()
            .rev()
            .find(|(k, _)| k == "experiment")
            .map(|(_, v)| v.clone())
            .ok_or_else(|| CliError::Usage("`run` needs an experiment key".into()))?,
    };
    let preset: Preset = cli.preset.parse()?;
    let cfg = build_config(&experiment, preset, &pairs)?;
    let summary = commands::run(&cfg)?;
    for a in &summary.assertions {
        println!("{} {:<48} {:>14.6e}  {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.measured, a.relation);
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    Ok(summary.all_passed())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e @ CliError::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
