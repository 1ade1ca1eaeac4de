//! Randomized verification that simulated channel outputs respect the
//! closed-form bounds.
//!
//! Three checks are provided. The minimum-output-entropy check asserts
//! the thermal-input formula as a per-state lower bound, which is a
//! theorem for entanglement-breaking parameters at any mode count and
//! for every one-mode channel. The lower-bound check asserts the
//! quantum-limited composition bound wherever it applies and records the
//! entropy-power margin alongside. The thermal-formula check simulates
//! thermal inputs directly against the closed forms.
//!
//! Trials are independent: each draws its own RNG stream from the master
//! seed by counter, so reports are identical no matter how trials are
//! scheduled. Violations smaller than a slack coupled to the measured
//! trace deficit are attributed to truncation; anything larger fails the
//! run and dumps the offending state for inspection.

use crate::bounds::{entropy_power_bound, gaussian_conjecture_bound, quantum_limited_bound};
use crate::channels::{
    apply_channel, apply_tensor_power, displacement_operator, ChannelSpec, DilationPlan,
};
use crate::error::{Error, Result};
use crate::fock::{
    dagger, g, mean_photons, partial_trace, tensor, thermal_state, thermal_support,
    von_neumann_entropy, FockState,
};
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Absolute tolerance for the thermal-formula grid check; the grid is
/// chosen so truncation error stays well below it.
pub const THERMAL_TOL: f64 = 1e-4;

/// Families of random input states. All samplers damp high Fock levels
/// so that the occupation beyond the cutoff is negligible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    /// `G G†` normalized, `G` a complex Gaussian matrix of the given rank.
    GinibreMixed { rank: usize },
    /// Random probability vector on the Fock diagonal.
    RandomDiagonal,
    /// Thermal state displaced by a random phase-space offset of modulus
    /// at most `max_displacement`.
    DisplacedThermal { mean_photons: f64, max_displacement: f64 },
    /// Haar-like random pure state (entangled across modes when n > 1).
    RandomPure,
    /// Independent one-mode Ginibre states on every mode.
    ProductOfOneMode,
    /// Two-mode mixed state from tracing an ancilla out of a random
    /// tripartite pure state; generically entangled.
    EntangledBipartite,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub modes: usize,
    pub cutoff: usize,
    pub trials: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::BadParameter("ensemble needs at least one mode".into()));
        }
        if self.cutoff < 2 {
            return Err(Error::BadDimension(self.cutoff));
        }
        if self.trials == 0 {
            return Err(Error::BadParameter("ensemble needs at least one trial".into()));
        }
        let dim = self.cutoff.pow(self.modes as u32);
        match self.kind {
            EnsembleKind::GinibreMixed { rank } => {
                if rank == 0 || rank > dim {
                    return Err(Error::BadParameter(format!(
                        "Ginibre rank must lie in 1..={dim}, got {rank}"
                    )));
                }
            }
            EnsembleKind::DisplacedThermal { mean_photons, max_displacement } => {
                if !(mean_photons >= 0.0) || !(max_displacement >= 0.0) {
                    return Err(Error::BadParameter(
                        "displaced thermal parameters must be nonnegative".into(),
                    ));
                }
                if mean_photons > self.cutoff as f64 / 8.0 {
                    return Err(Error::BadParameter(format!(
                        "thermal mean {mean_photons} too hot for cutoff {}",
                        self.cutoff
                    )));
                }
            }
            EnsembleKind::EntangledBipartite => {
                if self.modes != 2 {
                    return Err(Error::BadParameter(
                        "entangled bipartite sampling needs exactly two modes".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Rough upper estimate of the per-mode mean photon number the
    /// sampler produces, used to size dilation plans.
    fn mean_hint(&self) -> f64 {
        match self.kind {
            EnsembleKind::DisplacedThermal { mean_photons, max_displacement } => {
                mean_photons + max_displacement * max_displacement + 0.5
            }
            _ => {
                let q = envelope_base(self.cutoff);
                2.0 * q / (1.0 - q) + 0.5
            }
        }
    }
}

/// Per-level amplitude damping base: chosen so the top Fock level of a
/// sampled state carries about 1e-5 in relative probability. Output
/// cutoffs are sized from the measured means and every trial tracks its
/// deficit, so the envelope only has to keep energies moderate, not
/// eliminate the tail outright.
fn envelope_base(cutoff: usize) -> f64 {
    10f64.powf(-5.0 / (cutoff.max(2) - 1) as f64)
}

/// Amplitude envelope over the joint Fock basis, damping by total
/// photon number.
fn envelope(dims: &[usize]) -> Vec<f64> {
    let cutoff = dims.iter().copied().max().unwrap_or(2);
    let q = envelope_base(cutoff);
    let dim: usize = dims.iter().product();
    let mut w = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut rest = i;
        let mut photons = 0usize;
        for m in 0..dims.len() {
            let below: usize = dims[m + 1..].iter().product();
            photons += rest / below;
            rest %= below;
        }
        w.push(q.powf(photons as f64 / 2.0));
    }
    w
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Stream 0 is reserved so trial indices stay distinct from the
    // master stream.
    rng.set_stream(trial as u64 + 1);
    rng
}

fn ginibre_state(
    rng: &mut ChaCha8Rng,
    dims: &[usize],
    rank: usize,
) -> Result<FockState> {
    let dim: usize = dims.iter().product();
    let w = envelope(dims);
    let mut m = Array2::<Complex64>::zeros((dim, rank));
    for i in 0..dim {
        for j in 0..rank {
            m[(i, j)] = complex_gaussian(rng) * w[i];
        }
    }
    let mut rho = Array2::<Complex64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..rank {
                s += m[(i, k)] * m[(j, k)].conj();
            }
            rho[(i, j)] = s;
        }
    }
    let tr: f64 = (0..dim).map(|i| rho[(i, i)].re).sum();
    rho.mapv_inplace(|z| z / tr);
    FockState::from_matrix(rho, dims, 0.0)
}

fn diagonal_state(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<FockState> {
    let dim: usize = dims.iter().product();
    let w = envelope(dims);
    let mut p: Vec<f64> = (0..dim)
        .map(|i| {
            let u: f64 = rng.gen_range(1e-12..1.0);
            -u.ln() * w[i] * w[i]
        })
        .collect();
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    let mut rho = Array2::<Complex64>::zeros((dim, dim));
    for i in 0..dim {
        rho[(i, i)] = Complex64::new(p[i], 0.0);
    }
    FockState::from_matrix(rho, dims, 0.0)
}

fn pure_state(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<FockState> {
    let dim: usize = dims.iter().product();
    let w = envelope(dims);
    let mut v: Vec<Complex64> = (0..dim).map(|i| complex_gaussian(rng) * w[i]).collect();
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    FockState::pure(&v, dims)
}

/// One displaced thermal mode; `resampled` counts displacement halvings
/// forced by the energy cap.
fn displaced_thermal_mode(
    rng: &mut ChaCha8Rng,
    cutoff: usize,
    mean: f64,
    max_displacement: f64,
    resampled: &mut usize,
) -> Result<FockState> {
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    // Area-uniform modulus.
    let mut r = max_displacement * rng.gen_range(0.0f64..1.0).sqrt();
    let cap = cutoff as f64 / 6.0;
    loop {
        let alpha = Complex64::from_polar(r, theta);
        let base = thermal_state(mean, cutoff)?;
        let state = if r == 0.0 {
            base
        } else {
            let d = displacement_operator(alpha, cutoff)?;
            let m = d.dot(base.matrix()).dot(&dagger(&d));
            FockState::from_matrix(m, &[cutoff], base.trace_deficit())?
        };
        if mean_photons(&state).per_mode() <= cap || r < 1e-6 {
            return Ok(state);
        }
        r *= 0.5;
        *resampled += 1;
    }
}

/// Deterministic state for `(spec.seed, trial)`; identical inputs give
/// bit-identical matrices.
pub fn sample_state(spec: &EnsembleSpec, trial: usize) -> Result<FockState> {
    let (state, _) = sample_state_counted(spec, trial)?;
    Ok(state)
}

fn sample_state_counted(spec: &EnsembleSpec, trial: usize) -> Result<(FockState, usize)> {
    spec.validate()?;
    let mut rng = trial_rng(spec.seed, trial);
    let dims = vec![spec.cutoff; spec.modes];
    let mut resampled = 0usize;
    let state = match spec.kind {
        EnsembleKind::GinibreMixed { rank } => ginibre_state(&mut rng, &dims, rank)?,
        EnsembleKind::RandomDiagonal => diagonal_state(&mut rng, &dims)?,
        EnsembleKind::RandomPure => pure_state(&mut rng, &dims)?,
        EnsembleKind::DisplacedThermal { mean_photons, max_displacement } => {
            let mut modes = Vec::with_capacity(spec.modes);
            for _ in 0..spec.modes {
                modes.push(displaced_thermal_mode(
                    &mut rng,
                    spec.cutoff,
                    mean_photons,
                    max_displacement,
                    &mut resampled,
                )?);
            }
            let mut joint = modes[0].clone();
            for m in &modes[1..] {
                joint = tensor(&joint, m);
            }
            joint
        }
        EnsembleKind::ProductOfOneMode => {
            let mut joint: Option<FockState> = None;
            for _ in 0..spec.modes {
                let one = ginibre_state(&mut rng, &[spec.cutoff], spec.cutoff)?;
                joint = Some(match joint {
                    Some(j) => tensor(&j, &one),
                    None => one,
                });
            }
            joint.expect("at least one mode")
        }
        EnsembleKind::EntangledBipartite => {
            // Random pure state on two modes plus a small ancilla; the
            // ancilla is traced out, leaving a generically entangled
            // mixed state. The envelope damps system photons only.
            const ANCILLA: usize = 3;
            let full_dims = [spec.cutoff, spec.cutoff, ANCILLA];
            let sys_env = envelope(&[spec.cutoff, spec.cutoff]);
            let dim = spec.cutoff * spec.cutoff * ANCILLA;
            let mut v: Vec<Complex64> = Vec::with_capacity(dim);
            for i in 0..dim {
                let sys_index = i / ANCILLA;
                v.push(complex_gaussian(&mut rng) * sys_env[sys_index]);
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in &mut v {
                *z /= norm;
            }
            let pure = FockState::pure(&v, &full_dims)?;
            partial_trace(&pure, &[0, 1])?
        }
    };
    Ok((state, resampled))
}

/// Slack granted to bound violations before they count as failures:
/// a fixed floor plus a term proportional to the lost trace, scaled by
/// the log of the output dimension (the scale of the entropy error a
/// lost tail can cause).
pub fn truncation_slack(deficit: f64, d_out: usize, modes: usize) -> f64 {
    let ln_dim = modes as f64 * (d_out.max(2) as f64).ln();
    (10.0 * deficit * ln_dim).max(1e-4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialOutcome {
    Pass,
    Fail,
    /// Truncation loss too large to trust the comparison either way.
    Inconclusive,
}

/// One evaluated bound, all values per mode.
#[derive(Debug, Clone, Serialize)]
pub struct BoundRecord {
    pub bound: String,
    pub value_per_mode: f64,
    pub margin_per_mode: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub input_entropy_per_mode: f64,
    pub output_entropy_per_mode: f64,
    pub input_mean_photons_per_mode: f64,
    pub bounds: Vec<BoundRecord>,
    /// Margin of the asserted bound: output entropy minus bound, per mode.
    pub margin: f64,
    pub trace_deficit: f64,
    pub slack: f64,
    pub outcome: TrialOutcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary {
    pub trials: usize,
    pub passes: usize,
    pub failures: usize,
    pub inconclusive: usize,
    pub resampled: usize,
    pub min_margin: f64,
    pub max_trace_deficit: f64,
    pub slack_floor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub channel: ChannelSpec,
    pub modes: usize,
    pub ensemble: Option<EnsembleSpec>,
    pub trials: Vec<TrialRecord>,
    pub summary: ReportSummary,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.summary.failures == 0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Knobs shared by the verification runs.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Never demand margins tighter than this.
    pub slack_floor: f64,
    /// Deficits past this make a trial inconclusive rather than judged.
    pub inconclusive_deficit: f64,
    /// Where to dump failing states; no dumps when unset.
    pub dump_dir: Option<PathBuf>,
    /// Replaces the automatically sized dilation plan (diagnostics).
    pub plan_override: Option<DilationPlan>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            slack_floor: 1e-4,
            inconclusive_deficit: 1e-3,
            dump_dir: None,
            plan_override: None,
        }
    }
}

/// Output-tail target for randomized multi-mode runs. A dropped tail of
/// mass t costs about t * ln(dim / t) of entropy, an order below the
/// slack these margins are judged against; pushing it lower only
/// inflates the eigendecomposition cost on joint outputs.
const SAMPLED_OUT_TAIL: f64 = 3e-6;

/// Tail for the one-mode thermal-formula grid, whose margins must stay
/// inside the much tighter grid tolerance.
const THERMAL_OUT_TAIL: f64 = 1e-9;

/// Dilation plan for verification runs: generous input-side sizes from
/// the recommender, output cutoff sized so truncation cannot eat the
/// asserted margins, and the hard cap disabled (trials classify
/// truncation themselves).
fn verify_plan(
    channel: &ChannelSpec,
    cutoff: usize,
    hint: f64,
    tail: f64,
    opts: &VerifyOptions,
) -> DilationPlan {
    if let Some(plan) = opts.plan_override {
        return plan.with_deficit_cap(1.0);
    }
    let plan = DilationPlan::recommend(channel, cutoff, hint);
    let out_mean = channel.thermal_output_mean(hint);
    let d_out = match channel {
        ChannelSpec::Attenuator { env_photons, .. } => {
            if *env_photons == 0.0 {
                // Quantum-limited attenuation never raises the photon
                // number, so the input cutoff is exact.
                cutoff
            } else {
                (thermal_support(out_mean, tail) + 4).min(plan.d_sys)
            }
        }
        ChannelSpec::Amplifier { .. } => plan.d_sys,
        ChannelSpec::ContravariantAmplifier { .. } => {
            (thermal_support(out_mean, tail) + 4).min(plan.d_env)
        }
        ChannelSpec::AdditiveNoise { .. } => {
            plan.d_out.max((thermal_support(out_mean, tail) + 4).min(plan.d_sys))
        }
    };
    plan.with_output_cutoff(d_out).with_deficit_cap(1.0)
}

/// Applies the channel at the plan's generous output cutoff, then cuts
/// the output down to the smallest box whose measured tail mass stays
/// within the sampled-run tail target. Filtering the Kraus family at a
/// smaller cutoff produces exactly this corner, so the shrink only moves
/// truncation bookkeeping; the payoff is the caller's eigendecomposition,
/// cubic in whatever dimension this returns. Random inputs are damped
/// far below their worst-case thermal tails, which is what makes the
/// shrink usually large.
fn apply_sized_to_deficit(
    channel: &ChannelSpec,
    input: &FockState,
    plan: &DilationPlan,
) -> Result<FockState> {
    let output = apply_tensor_power(channel, input, plan)?;
    if matches!(channel, ChannelSpec::AdditiveNoise { .. }) {
        // The additive plan is already support-sized, and its quadrature
        // output does not satisfy the corner identity above.
        return Ok(output);
    }
    shrink_to_box(output, SAMPLED_OUT_TAIL)
}

/// Truncates a uniform-cutoff state to the smallest per-mode cutoff
/// whose dropped diagonal mass stays within `budget`, folding the mass
/// into the trace deficit.
fn shrink_to_box(state: FockState, budget: f64) -> Result<FockState> {
    let dims = state.dims().to_vec();
    let d = dims[0];
    if dims.iter().any(|&x| x != d) {
        return Ok(state);
    }
    let n = dims.len();
    let m = state.matrix();
    let dim = m.nrows();
    // Diagonal mass grouped by the highest per-mode level of the joint
    // index; dropping everything above a cut costs the bucket tail.
    let mut bucket = vec![0.0f64; d];
    for idx in 0..dim {
        let mut rem = idx;
        let mut top = 0usize;
        for _ in 0..n {
            top = top.max(rem % d);
            rem /= d;
        }
        bucket[top] += m[(idx, idx)].re;
    }
    let mut cut = d;
    let mut dropped = 0.0;
    while cut > 2 && dropped + bucket[cut - 1] <= budget {
        dropped += bucket[cut - 1];
        cut -= 1;
    }
    if cut == d {
        return Ok(state);
    }
    let keep: Vec<usize> = (0..dim)
        .filter(|&idx| {
            let mut rem = idx;
            (0..n).all(|_| {
                let level = rem % d;
                rem /= d;
                level < cut
            })
        })
        .collect();
    let mut corner = Array2::zeros((keep.len(), keep.len()));
    for (r, &ir) in keep.iter().enumerate() {
        for (c, &ic) in keep.iter().enumerate() {
            corner[(r, c)] = m[(ir, ic)];
        }
    }
    FockState::from_matrix(corner, &vec![cut; n], state.trace_deficit() + dropped)
}

enum CheckMode {
    /// Assert the thermal-input formula as a floor (minimum output
    /// entropy, proven for entanglement breaking and one mode).
    ThermalFloor,
    /// Assert the quantum-limited composition bound; record the
    /// entropy-power margin alongside.
    LowerBounds,
}

fn write_failure_dump(
    dir: &Path,
    check: &str,
    trial: usize,
    state: &FockState,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let stem = format!("{check}-trial{trial:04}");
    let bin_path = dir.join(format!("{stem}.bin"));
    let m = state.matrix();
    let mut bytes = Vec::with_capacity(m.len() * 16);
    for z in m.iter() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    std::fs::write(&bin_path, bytes)?;
    #[derive(Serialize)]
    struct Sidecar<'a> {
        file: String,
        format: &'static str,
        rows: usize,
        cols: usize,
        dims: &'a [usize],
        trace_deficit: f64,
        check: &'a str,
        trial: usize,
    }
    let sidecar = Sidecar {
        file: bin_path.file_name().unwrap().to_string_lossy().into_owned(),
        format: "complex128 little-endian, re/im interleaved, row-major",
        rows: m.nrows(),
        cols: m.ncols(),
        dims: state.dims(),
        trace_deficit: state.trace_deficit(),
        check,
        trial,
    };
    let json_path = dir.join(format!("{stem}.json"));
    std::fs::write(&json_path, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(bin_path)
}

fn run_trials(
    check: &str,
    channel: &ChannelSpec,
    ensemble: &EnsembleSpec,
    opts: &VerifyOptions,
    mode: CheckMode,
) -> Result<VerificationReport> {
    ensemble.validate()?;
    let n = ensemble.modes;
    let plan = verify_plan(channel, ensemble.cutoff, ensemble.mean_hint(), SAMPLED_OUT_TAIL, opts);
    let mut trials = Vec::with_capacity(ensemble.trials);
    let mut resampled_total = 0usize;
    let (mut passes, mut failures, mut inconclusive) = (0usize, 0usize, 0usize);
    let mut min_margin = f64::INFINITY;
    let mut max_deficit = 0.0f64;

    for t in 0..ensemble.trials {
        let (input, resampled) = sample_state_counted(ensemble, t)?;
        resampled_total += resampled;
        let s_in = von_neumann_entropy(&input)?;
        let mean_in = mean_photons(&input).per_mode();
        let output = if opts.plan_override.is_some() {
            apply_tensor_power(channel, &input, &plan)?
        } else {
            apply_sized_to_deficit(channel, &input, &plan)?
        };
        let s_out = von_neumann_entropy(&output)?;
        let deficit = output.trace_deficit();
        max_deficit = max_deficit.max(deficit);

        let nf = n as f64;
        let out_per_mode = s_out.nats() / nf;
        let mut bounds = Vec::new();
        let asserted = match mode {
            CheckMode::ThermalFloor => {
                let b = gaussian_conjecture_bound(channel, s_in, n);
                let value = b.nats / nf;
                bounds.push(BoundRecord {
                    bound: "thermal-formula".into(),
                    value_per_mode: value,
                    margin_per_mode: out_per_mode - value,
                });
                value
            }
            CheckMode::LowerBounds => {
                let ql = quantum_limited_bound(channel, s_in, n);
                let epi = entropy_power_bound(channel, s_in, n);
                if !ql.in_domain {
                    return Err(Error::BadParameter(format!(
                        "quantum-limited bound does not apply to {}",
                        channel.label()
                    )));
                }
                let value = ql.nats / nf;
                bounds.push(BoundRecord {
                    bound: "quantum-limited".into(),
                    value_per_mode: value,
                    margin_per_mode: out_per_mode - value,
                });
                bounds.push(BoundRecord {
                    bound: "epi".into(),
                    value_per_mode: epi.nats / nf,
                    margin_per_mode: out_per_mode - epi.nats / nf,
                });
                value
            }
        };
        let margin = out_per_mode - asserted;
        let slack = truncation_slack(deficit, output.dims()[0], n).max(opts.slack_floor);
        let outcome = if deficit > opts.inconclusive_deficit {
            inconclusive += 1;
            TrialOutcome::Inconclusive
        } else if margin < -slack {
            failures += 1;
            if let Some(dir) = &opts.dump_dir {
                write_failure_dump(dir, check, t, &input)?;
            }
            TrialOutcome::Fail
        } else {
            passes += 1;
            TrialOutcome::Pass
        };
        if outcome != TrialOutcome::Inconclusive {
            min_margin = min_margin.min(margin);
        }
        trials.push(TrialRecord {
            trial: t,
            input_entropy_per_mode: s_in.nats() / nf,
            output_entropy_per_mode: out_per_mode,
            input_mean_photons_per_mode: mean_in,
            bounds,
            margin,
            trace_deficit: deficit,
            slack,
            outcome,
        });
    }

    Ok(VerificationReport {
        check: check.into(),
        channel: *channel,
        modes: n,
        ensemble: Some(*ensemble),
        summary: ReportSummary {
            trials: trials.len(),
            passes,
            failures,
            inconclusive,
            resampled: resampled_total,
            min_margin,
            max_trace_deficit: max_deficit,
            slack_floor: opts.slack_floor,
        },
        trials,
    })
}

/// Checks that every sampled output entropy sits above the thermal-input
/// value at matched input entropy. Licensed for entanglement-breaking
/// parameters at any mode count, and for every one-mode channel.
pub fn verify_moe_entanglement_breaking(
    channel: &ChannelSpec,
    ensemble: &EnsembleSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    if ensemble.modes > 1 && !channel.is_entanglement_breaking() {
        return Err(Error::BadParameter(format!(
            "{} with these parameters is not entanglement breaking; the \
             multi-mode minimum-output-entropy floor is not a theorem there",
            channel.label()
        )));
    }
    run_trials("moe-floor", channel, ensemble, opts, CheckMode::ThermalFloor)
}

/// Margin of the thermal-equality case: a thermal product input should
/// meet the thermal formula with margin zero up to truncation.
pub fn moe_equality_margin(
    channel: &ChannelSpec,
    modes: usize,
    mean: f64,
    cutoff: usize,
    opts: &VerifyOptions,
) -> Result<f64> {
    let plan = verify_plan(channel, cutoff, mean + 0.5, THERMAL_OUT_TAIL, opts);
    let one = thermal_state(mean, cutoff)?;
    let mut input = one.clone();
    for _ in 1..modes {
        input = tensor(&input, &one);
    }
    let output = apply_tensor_power(channel, &input, &plan)?;
    let s_out = von_neumann_entropy(&output)?.nats() / modes as f64;
    Ok(s_out - g(channel.thermal_output_mean(mean)))
}

/// Checks the quantum-limited composition bound on every trial and
/// records entropy-power margins for comparison.
pub fn verify_lower_bounds(
    channel: &ChannelSpec,
    ensemble: &EnsembleSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    run_trials("lower-bounds", channel, ensemble, opts, CheckMode::LowerBounds)
}

/// Grid of thermal inputs whose outputs the closed forms predict
/// exactly; twelve points per channel family.
pub fn default_thermal_grid() -> Vec<(ChannelSpec, f64)> {
    let mut grid = Vec::new();
    for &(eta, env) in &[(0.3, 0.2), (0.3, 0.8), (0.7, 0.5), (0.7, 0.0), (0.9, 0.3), (0.5, 1.0)] {
        for &n in &[0.3, 1.0] {
            grid.push((ChannelSpec::attenuator(eta, env).unwrap(), n));
        }
    }
    for &(kappa, env) in &[(1.2, 0.0), (1.2, 0.3), (1.5, 0.3), (1.5, 0.0), (2.0, 0.0), (2.0, 0.3)] {
        for &n in &[0.0, 0.8] {
            grid.push((ChannelSpec::amplifier(kappa, env).unwrap(), n));
        }
    }
    for &(kappa, env) in &[(1.2, 0.0), (1.2, 0.4), (1.5, 0.0), (1.5, 0.4), (2.0, 0.0), (2.0, 0.4)] {
        for &n in &[0.2, 1.0] {
            grid.push((ChannelSpec::contravariant_amplifier(kappa, env).unwrap(), n));
        }
    }
    for &e in &[0.2, 0.5, 1.0, 1.5] {
        for &n in &[0.0, 0.6, 1.2] {
            grid.push((ChannelSpec::additive_noise(e).unwrap(), n));
        }
    }
    grid
}

/// Simulates each thermal input on one mode and compares the output
/// entropy with the closed form; failures are absolute deviations past
/// the grid tolerance.
pub fn verify_thermal_formulas(
    grid: &[(ChannelSpec, f64)],
    cutoff: usize,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let mut trials = Vec::with_capacity(grid.len());
    let (mut passes, mut failures) = (0usize, 0usize);
    let mut min_margin = f64::INFINITY;
    let mut max_deficit = 0.0f64;
    for (t, (channel, mean)) in grid.iter().enumerate() {
        let plan = verify_plan(channel, cutoff, mean + 0.5, THERMAL_OUT_TAIL, opts);
        let input = thermal_state(*mean, cutoff)?;
        let s_in = von_neumann_entropy(&input)?;
        let output = apply_channel(channel, &input, &plan)?;
        let s_out = von_neumann_entropy(&output)?.nats();
        let closed = g(channel.thermal_output_mean(*mean));
        let margin = s_out - closed;
        let deficit = output.trace_deficit();
        max_deficit = max_deficit.max(deficit);
        min_margin = min_margin.min(margin);
        let outcome = if margin.abs() <= THERMAL_TOL {
            passes += 1;
            TrialOutcome::Pass
        } else {
            failures += 1;
            TrialOutcome::Fail
        };
        trials.push(TrialRecord {
            trial: t,
            input_entropy_per_mode: s_in.nats(),
            output_entropy_per_mode: s_out,
            input_mean_photons_per_mode: *mean,
            bounds: vec![BoundRecord {
                bound: format!("thermal-formula-{}", channel.label()),
                value_per_mode: closed,
                margin_per_mode: margin,
            }],
            margin,
            trace_deficit: deficit,
            slack: THERMAL_TOL,
            outcome,
        });
    }
    Ok(VerificationReport {
        check: "thermal-formulas".into(),
        // The grid spans all families; record the first entry as a
        // representative and keep per-trial channels in the bound labels.
        channel: grid.first().map(|(c, _)| *c).unwrap_or(
            ChannelSpec::additive_noise(0.0).expect("identity channel"),
        ),
        modes: 1,
        ensemble: None,
        summary: ReportSummary {
            trials: trials.len(),
            passes,
            failures,
            inconclusive: 0,
            resampled: 0,
            min_margin,
            max_trace_deficit: max_deficit,
            slack_floor: THERMAL_TOL,
        },
        trials,
    })
}

/// Truncation health of one channel application.
#[derive(Debug, Clone, Serialize)]
pub struct TruncationDiagnostics {
    pub input_deficit: f64,
    pub output_deficit: f64,
    /// Photon mass the input carries on joint levels where some mode
    /// exceeds half its cutoff: the part most exposed to truncation.
    pub tail_mean_photons: f64,
    pub recommended_cutoff: usize,
    pub flagged: bool,
}

/// Reports how much trace an application loses and whether the cutoff
/// looks too small for the state.
pub fn truncation_diagnostics(
    state: &FockState,
    channel: &ChannelSpec,
    plan: &DilationPlan,
) -> Result<TruncationDiagnostics> {
    let output = apply_tensor_power(channel, state, &plan.with_deficit_cap(1.0))?;
    let dims = state.dims();
    let m = state.matrix();
    let mut tail = 0.0;
    for i in 0..m.nrows() {
        let mut rest = i;
        let mut photons = 0usize;
        let mut in_tail = false;
        for mode in 0..dims.len() {
            let below: usize = dims[mode + 1..].iter().product();
            let level = rest / below;
            rest %= below;
            photons += level;
            if 2 * level > dims[mode] {
                in_tail = true;
            }
        }
        if in_tail {
            tail += photons as f64 * m[(i, i)].re;
        }
    }
    let out_mean = channel.thermal_output_mean(mean_photons(state).per_mode());
    let input_deficit = state.trace_deficit();
    let output_deficit = output.trace_deficit();
    Ok(TruncationDiagnostics {
        input_deficit,
        output_deficit,
        tail_mean_photons: tail,
        recommended_cutoff: thermal_support(out_mean, 1e-10).max(plan.d_in),
        flagged: input_deficit + output_deficit > 1e-6,
    })
}
