//! Verification suite runner: resolves channel and ensemble flags, runs
//! the harness, bundles reports into one JSON artifact.

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use fockbounds::channels::ChannelSpec;
use fockbounds::verify::{
    default_thermal_grid, verify_lower_bounds, verify_moe_entanglement_breaking,
    verify_thermal_formulas, EnsembleKind, EnsembleSpec, VerificationReport, VerifyOptions,
};
use serde::Serialize;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    /// Thermal inputs against the closed-form output entropies.
    Thermal,
    /// Minimum-output-entropy floor on entanglement-breaking channels.
    EbMoe,
    /// Quantum-limited and entropy-power bounds on random inputs.
    LowerBounds,
    /// Every suite at reduced trial counts.
    All,
}

impl SuiteName {
    fn label(&self) -> &'static str {
        match self {
            SuiteName::Thermal => "thermal",
            SuiteName::EbMoe => "eb-moe",
            SuiteName::LowerBounds => "lower-bounds",
            SuiteName::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Attenuator,
    Amplifier,
    Contravariant,
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnsembleName {
    Ginibre,
    Diagonal,
    Pure,
    Displaced,
    Product,
    Entangled,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Which suite to run.
    #[arg(value_enum)]
    pub suite: SuiteName,
    /// Channel family for the sampling suites.
    #[arg(long, value_enum)]
    pub channel: Option<FamilyName>,
    /// Attenuator transmissivity.
    #[arg(long, value_name = "ETA")]
    pub eta: Option<f64>,
    /// Amplifier gain.
    #[arg(long, value_name = "KAPPA")]
    pub kappa: Option<f64>,
    /// Environment mean photon number.
    #[arg(long, value_name = "E")]
    pub env: Option<f64>,
    /// Noise photons of the additive family.
    #[arg(long, value_name = "E")]
    pub noise: Option<f64>,
    /// Modes per input state.
    #[arg(long)]
    pub modes: Option<usize>,
    /// Fock cutoff per mode.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Random trials (thermal: number of grid points).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Input ensemble for the sampling suites.
    #[arg(long, value_enum)]
    pub ensemble: Option<EnsembleName>,
    /// Rank of the Ginibre ensemble (defaults to full rank).
    #[arg(long)]
    pub rank: Option<usize>,
    /// Mean photons of the displaced-thermal ensemble.
    #[arg(long, value_name = "N")]
    pub thermal_mean: Option<f64>,
    /// Largest displacement modulus of the displaced-thermal ensemble.
    #[arg(long, value_name = "Z")]
    pub displacement: Option<f64>,
    /// Master seed for all random ensembles.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Report path (default verify-report.json).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl VerifyArgs {
    /// The family, when not given, is inferred from whichever parameter
    /// flag was passed, falling back to the suite's default.
    fn resolve_channel(&self, default: FamilyName) -> Result<ChannelSpec> {
        let family = self.channel.unwrap_or(if self.eta.is_some() {
            FamilyName::Attenuator
        } else if self.noise.is_some() {
            FamilyName::Additive
        } else if self.kappa.is_some() && default == FamilyName::Attenuator {
            FamilyName::Amplifier
        } else {
            default
        });
        let env = self.env.unwrap_or(0.0);
        let spec = match family {
            FamilyName::Attenuator => {
                if self.kappa.is_some() || self.noise.is_some() {
                    bail!("--kappa/--noise do not apply to the attenuator");
                }
                ChannelSpec::attenuator(self.eta.unwrap_or(0.5), env)?
            }
            FamilyName::Amplifier => {
                if self.eta.is_some() || self.noise.is_some() {
                    bail!("--eta/--noise do not apply to the amplifier");
                }
                ChannelSpec::amplifier(self.kappa.unwrap_or(1.5), env)?
            }
            FamilyName::Contravariant => {
                if self.eta.is_some() || self.noise.is_some() {
                    bail!("--eta/--noise do not apply to the contravariant amplifier");
                }
                ChannelSpec::contravariant_amplifier(self.kappa.unwrap_or(1.5), env)?
            }
            FamilyName::Additive => {
                if self.eta.is_some() || self.kappa.is_some() || self.env.is_some() {
                    bail!("the additive family takes only --noise");
                }
                ChannelSpec::additive_noise(self.noise.unwrap_or(0.7))?
            }
        };
        Ok(spec)
    }

    fn resolve_ensemble(&self, modes: usize, cutoff: usize, trials: usize) -> Result<EnsembleSpec> {
        let dim = cutoff.pow(modes as u32);
        let kind = match self.ensemble.unwrap_or(EnsembleName::Ginibre) {
            EnsembleName::Ginibre => {
                EnsembleKind::GinibreMixed { rank: self.rank.unwrap_or(dim).min(dim) }
            }
            EnsembleName::Diagonal => EnsembleKind::RandomDiagonal,
            EnsembleName::Pure => EnsembleKind::RandomPure,
            EnsembleName::Displaced => EnsembleKind::DisplacedThermal {
                mean_photons: self.thermal_mean.unwrap_or(0.4),
                max_displacement: self.displacement.unwrap_or(0.8),
            },
            EnsembleName::Product => EnsembleKind::ProductOfOneMode,
            EnsembleName::Entangled => EnsembleKind::EntangledBipartite,
        };
        let spec = EnsembleSpec { kind, modes, cutoff, trials, seed: self.seed };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Serialize)]
struct Bundle {
    config: serde_json::Value,
    reports: Vec<VerificationReport>,
}

/// Evenly strided subset of the grid, full grid when n is larger.
fn stride_subset<T: Copy>(grid: &[T], n: usize) -> Vec<T> {
    if n == 0 || n >= grid.len() {
        return grid.to_vec();
    }
    (0..n).map(|i| grid[i * grid.len() / n]).collect()
}

fn print_summary(report: &VerificationReport) {
    let s = &report.summary;
    println!(
        "{} [{}]: {}/{} pass, {} inconclusive, min margin {:+.3e}",
        report.check,
        report.channel.label(),
        s.passes,
        s.trials,
        s.inconclusive,
        s.min_margin,
    );
}

fn thermal_suite(args: &VerifyArgs, opts: &VerifyOptions) -> Result<VerificationReport> {
    let cutoff = args.cutoff.unwrap_or(40);
    let grid = default_thermal_grid();
    let subset = stride_subset(&grid, args.trials.unwrap_or(grid.len()));
    Ok(verify_thermal_formulas(&subset, cutoff, opts)?)
}

fn eb_moe_suite(args: &VerifyArgs, opts: &VerifyOptions) -> Result<VerificationReport> {
    let channel = args.resolve_channel(FamilyName::Contravariant)?;
    let modes = args.modes.unwrap_or(2);
    let ensemble =
        args.resolve_ensemble(modes, args.cutoff.unwrap_or(10), args.trials.unwrap_or(25))?;
    Ok(verify_moe_entanglement_breaking(&channel, &ensemble, opts)?)
}

fn lower_bounds_suite(args: &VerifyArgs, opts: &VerifyOptions) -> Result<VerificationReport> {
    let channel = args.resolve_channel(FamilyName::Attenuator)?;
    let modes = args.modes.unwrap_or(1);
    let ensemble =
        args.resolve_ensemble(modes, args.cutoff.unwrap_or(16), args.trials.unwrap_or(50))?;
    Ok(verify_lower_bounds(&channel, &ensemble, opts)?)
}

/// Fixed representative set at reduced trial counts; `--trials`,
/// `--cutoff`, and `--seed` rescale every entry.
fn all_suites(args: &VerifyArgs, opts: &VerifyOptions) -> Result<Vec<VerificationReport>> {
    let seed = args.seed;
    let thermal_cutoff = args.cutoff.unwrap_or(40);
    let grid = default_thermal_grid();
    let subset = stride_subset(&grid, args.trials.map(|t| t * 8).unwrap_or(grid.len()));
    let mut reports = vec![verify_thermal_formulas(&subset, thermal_cutoff, opts)?];

    // Beam-splitter and squeezer dilations only: multi-mode additive
    // noise pays full-joint quadrature costs, so its floor is exercised
    // one mode at a time elsewhere.
    let moe_trials = args.trials.unwrap_or(15);
    let moe = [
        (ChannelSpec::contravariant_amplifier(1.5, 0.0)?, 10),
        (ChannelSpec::attenuator(0.3, 1.0)?, 10),
        (ChannelSpec::amplifier(2.0, 1.2)?, 8),
    ];
    for (channel, cutoff) in moe {
        let dim = cutoff * cutoff;
        let ensemble = EnsembleSpec {
            kind: EnsembleKind::GinibreMixed { rank: dim },
            modes: 2,
            cutoff,
            trials: moe_trials,
            seed,
        };
        reports.push(verify_moe_entanglement_breaking(&channel, &ensemble, opts)?);
    }

    let lb_trials = args.trials.unwrap_or(25);
    let lb = [
        (ChannelSpec::attenuator(0.5, 0.0)?, 16),
        (ChannelSpec::amplifier(1.5, 0.2)?, 12),
        (ChannelSpec::additive_noise(0.7)?, 12),
    ];
    for (channel, cutoff) in lb {
        let ensemble = EnsembleSpec {
            kind: EnsembleKind::GinibreMixed { rank: cutoff },
            modes: 1,
            cutoff,
            trials: lb_trials,
            seed,
        };
        reports.push(verify_lower_bounds(&channel, &ensemble, opts)?);
    }
    Ok(reports)
}

pub fn run(args: &VerifyArgs) -> Result<ExitCode> {
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("verify-report.json"));
    let mut dump_dir = out.clone();
    dump_dir.set_extension("");
    let dump_dir = PathBuf::from(format!("{}-dumps", dump_dir.display()));
    let opts = VerifyOptions { dump_dir: Some(dump_dir.clone()), ..VerifyOptions::default() };

    let config = match args.suite {
        SuiteName::Thermal => json!({
            "command": "verify",
            "suite": "thermal",
            "cutoff": args.cutoff.unwrap_or(40),
            "points": args.trials,
            "out": out.display().to_string(),
        }),
        SuiteName::EbMoe | SuiteName::LowerBounds => {
            let default = if args.suite == SuiteName::EbMoe {
                FamilyName::Contravariant
            } else {
                FamilyName::Attenuator
            };
            let channel = args.resolve_channel(default)?;
            let modes = args.modes.unwrap_or(if args.suite == SuiteName::EbMoe { 2 } else { 1 });
            let cutoff = args
                .cutoff
                .unwrap_or(if args.suite == SuiteName::EbMoe { 10 } else { 16 });
            let trials = args
                .trials
                .unwrap_or(if args.suite == SuiteName::EbMoe { 25 } else { 50 });
            let ensemble = args.resolve_ensemble(modes, cutoff, trials)?;
            json!({
                "command": "verify",
                "suite": args.suite.label(),
                "channel": channel,
                "ensemble": ensemble,
                "out": out.display().to_string(),
            })
        }
        SuiteName::All => json!({
            "command": "verify",
            "suite": "all",
            "cutoff": args.cutoff,
            "trials": args.trials,
            "seed": args.seed,
            "out": out.display().to_string(),
        }),
    };
    println!("config: {config}");

    let reports = match args.suite {
        SuiteName::Thermal => vec![thermal_suite(args, &opts)?],
        SuiteName::EbMoe => vec![eb_moe_suite(args, &opts)?],
        SuiteName::LowerBounds => vec![lower_bounds_suite(args, &opts)?],
        SuiteName::All => all_suites(args, &opts)?,
    };
    for report in &reports {
        print_summary(report);
    }
    let failures: usize = reports.iter().map(|r| r.summary.failures).sum();

    let bundle = Bundle { config, reports };
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut body = serde_json::to_string_pretty(&bundle)?;
    body.push('\n');
    std::fs::write(&out, body)?;
    println!("report written to {}", out.display());

    if failures > 0 {
        println!("BOUND VIOLATION: {failures} failing trials, dumps in {}", dump_dir.display());
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
