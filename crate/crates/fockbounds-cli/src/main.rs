//! Command-line front end: evaluate output-entropy bounds, emit figure
//! data, and run verification suites with reproducible configuration.
//!
//! Every command prints a canonical `config:` line first; rerunning with
//! the same flags reproduces both the echo and any output files byte for
//! byte, independent of `FOCKBOUNDS_THREADS`.

mod figures;
mod output;
mod verifycmd;

use anyhow::{anyhow, bail, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use fockbounds::bounds::{bound, BoundKind};
use fockbounds::channels::ChannelSpec;
use fockbounds::regions::TradeoffScenario;
use fockbounds::Entropy;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fockbounds",
    version,
    about = "Output-entropy bounds and rate regions of bosonic Gaussian channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the three output-entropy lower bounds at one point.
    Bound(BoundArgs),
    /// Emit the data behind one of the standard figures.
    Figure(FigureArgs),
    /// Run a verification suite against exact simulation.
    Verify(verifycmd::VerifyArgs),
}

#[derive(Args, Debug)]
#[command(group(
    ArgGroup::new("family")
        .required(true)
        .args(["attenuator", "amplifier", "contravariant", "additive"])
))]
struct ChannelFlags {
    /// Attenuator with this transmissivity (0 to 1).
    #[arg(long, value_name = "ETA")]
    attenuator: Option<f64>,
    /// Amplifier with this gain (at least 1).
    #[arg(long, value_name = "KAPPA")]
    amplifier: Option<f64>,
    /// Contravariant amplifier with this gain (at least 1).
    #[arg(long, value_name = "KAPPA")]
    contravariant: Option<f64>,
    /// Additive-noise channel with this many noise photons.
    #[arg(long, value_name = "NOISE")]
    additive: Option<f64>,
    /// Mean photon number of the thermal environment mode.
    #[arg(long, value_name = "E", default_value_t = 0.0)]
    env: f64,
}

impl ChannelFlags {
    fn resolve(&self) -> Result<ChannelSpec> {
        if let Some(noise) = self.additive {
            if self.env != 0.0 {
                bail!("the additive channel's noise is its own parameter; --env does not apply");
            }
            return Ok(ChannelSpec::additive_noise(noise)?);
        }
        if let Some(eta) = self.attenuator {
            return Ok(ChannelSpec::attenuator(eta, self.env)?);
        }
        if let Some(kappa) = self.amplifier {
            return Ok(ChannelSpec::amplifier(kappa, self.env)?);
        }
        if let Some(kappa) = self.contravariant {
            return Ok(ChannelSpec::contravariant_amplifier(kappa, self.env)?);
        }
        unreachable!("clap requires exactly one family flag");
    }
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    channel: ChannelFlags,
    /// Input entropy per mode, in nats.
    #[arg(long, value_name = "NATS")]
    entropy: f64,
    /// Number of modes.
    #[arg(long, default_value_t = 1)]
    modes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigureName {
    Epni,
    Broadcast,
    Tradeoff,
}

impl FigureName {
    fn label(&self) -> &'static str {
        match self {
            FigureName::Epni => "epni",
            FigureName::Broadcast => "broadcast",
            FigureName::Tradeoff => "tradeoff",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatName {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioName {
    /// Classical rate, quantum rate, entanglement generation.
    Cq,
    /// Public, private, key generation.
    Pp,
}

#[derive(Args)]
struct FigureArgs {
    /// Which figure to emit.
    #[arg(value_enum)]
    name: FigureName,
    /// Attenuation parameter(s); epni accepts several.
    #[arg(long, value_name = "ETA", num_args = 1..)]
    eta: Option<Vec<f64>>,
    /// Input energy constraint for the region figures.
    #[arg(long, value_name = "E")]
    energy: Option<f64>,
    /// Environment photons for the epni figure.
    #[arg(long, value_name = "E")]
    env: Option<f64>,
    /// Samples per curve.
    #[arg(long)]
    samples: Option<usize>,
    /// Largest input entropy of the epni sweep, in nats.
    #[arg(long, value_name = "NATS")]
    entropy_max: Option<f64>,
    /// Rate scenario for the trade-off figure.
    #[arg(long, value_enum)]
    scenario: Option<ScenarioName>,
    /// Output file (default figure-<name>.<format>).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatName,
    /// Also write a gnuplot script next to the data file.
    #[arg(long)]
    gnuplot: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bound(args) => run_bound(&args),
        Command::Figure(args) => run_figure(&args),
        Command::Verify(args) => verifycmd::run(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Worker count for internal sweeps; output never depends on it.
fn thread_count() -> Result<usize> {
    match std::env::var("FOCKBOUNDS_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| anyhow!("FOCKBOUNDS_THREADS must be a positive integer, got {v:?}")),
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn run_bound(args: &BoundArgs) -> Result<ExitCode> {
    let spec = args.channel.resolve()?;
    if args.modes == 0 {
        bail!("--modes must be at least 1");
    }
    if !(args.entropy >= 0.0 && args.entropy.is_finite()) {
        bail!("--entropy must be a nonnegative number of nats");
    }
    println!(
        "config: {}",
        json!({
            "command": "bound",
            "channel": spec,
            "entropy": args.entropy,
            "modes": args.modes,
        })
    );
    let total = Entropy::from_nats(args.entropy * args.modes as f64);
    for kind in [BoundKind::EntropyPower, BoundKind::QuantumLimited, BoundKind::GaussianConjecture]
    {
        let value = bound(kind, &spec, total, args.modes);
        if value.in_domain {
            println!("{:<16} {:.12} nats/mode", kind.label(), value.nats / args.modes as f64);
        } else {
            println!("{:<16} out of domain at these parameters", kind.label());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn single_eta(args: &FigureArgs, default: f64) -> Result<f64> {
    match args.eta.as_deref() {
        None => Ok(default),
        Some([eta]) => Ok(*eta),
        Some(_) => bail!("this figure takes exactly one --eta"),
    }
}

fn run_figure(args: &FigureArgs) -> Result<ExitCode> {
    let threads = thread_count()?;
    let ext = match args.format {
        FormatName::Csv => "csv",
        FormatName::Json => "json",
    };
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("figure-{}.{ext}", args.name.label())));

    let (set, config) = match args.name {
        FigureName::Epni => {
            let etas = args.eta.clone().unwrap_or_else(|| vec![0.1, 0.2]);
            let env = args.env.unwrap_or(0.0);
            let entropy_max = args.entropy_max.unwrap_or(6.0);
            let samples = args.samples.unwrap_or(601);
            let set = figures::epni(&etas, env, entropy_max, samples, threads)?;
            let config = json!({
                "command": "figure",
                "figure": "epni",
                "eta": etas,
                "env": env,
                "entropy_max": entropy_max,
                "samples": samples,
                "format": ext,
                "out": out.display().to_string(),
            });
            (set, config)
        }
        FigureName::Broadcast => {
            let eta = single_eta(args, 0.9)?;
            let energy = args.energy.unwrap_or(4.0);
            let samples = args.samples.unwrap_or(512);
            let set = figures::broadcast(eta, energy, samples, threads)?;
            let config = json!({
                "command": "figure",
                "figure": "broadcast",
                "eta": eta,
                "energy": energy,
                "samples": samples,
                "format": ext,
                "out": out.display().to_string(),
            });
            (set, config)
        }
        FigureName::Tradeoff => {
            let eta = single_eta(args, 0.9)?;
            let energy = args.energy.unwrap_or(4.0);
            let samples = args.samples.unwrap_or(257);
            let scenario = match args.scenario.unwrap_or(ScenarioName::Cq) {
                ScenarioName::Cq => TradeoffScenario::ClassicalQuantum,
                ScenarioName::Pp => TradeoffScenario::PublicPrivate,
            };
            let set = figures::tradeoff(eta, energy, scenario, samples, threads)?;
            let config = json!({
                "command": "figure",
                "figure": "tradeoff",
                "eta": eta,
                "energy": energy,
                "samples": samples,
                "scenario": match scenario {
                    TradeoffScenario::ClassicalQuantum => "cq",
                    TradeoffScenario::PublicPrivate => "pp",
                },
                "format": ext,
                "out": out.display().to_string(),
            });
            (set, config)
        }
    };
    println!("config: {config}");

    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let file = std::fs::File::create(&out)?;
    match args.format {
        FormatName::Csv => set.write_csv(file)?,
        FormatName::Json => set.write_json(file)?,
    }
    println!("wrote {} curves to {}", set.curves.len(), out.display());

    if args.gnuplot {
        let script_path = out.with_extension("gp");
        let data_name = out
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| out.display().to_string());
        std::fs::write(&script_path, set.gnuplot_script(&data_name))?;
        println!("wrote plot script to {}", script_path.display());
    }
    Ok(ExitCode::SUCCESS)
}
