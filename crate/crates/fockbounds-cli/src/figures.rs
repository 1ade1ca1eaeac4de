//! Builders for the standard figure data sets.

use crate::output::{Curve, CurveSet, Point};
use anyhow::{bail, Result};
use fockbounds::bounds::{bound, BoundKind};
use fockbounds::channels::ChannelSpec;
use fockbounds::regions::{
    broadcast_achievable, broadcast_outer, broadcast_time_sharing, project_cq_plane, RegionCurve,
    RegionKind, TradeoffScenario,
};
use fockbounds::Entropy;

type Job<'a, T> = Box<dyn FnOnce() -> T + Send + 'a>;

/// Runs the jobs on up to `threads` workers. Results are slotted by job
/// index, so the output order never depends on scheduling.
fn run_jobs<T: Send>(jobs: Vec<Job<'_, T>>, threads: usize) -> Vec<T> {
    let n = jobs.len();
    let threads = threads.clamp(1, n.max(1));
    if threads <= 1 {
        return jobs.into_iter().map(|job| job()).collect();
    }
    let mut buckets: Vec<Vec<(usize, Job<'_, T>)>> = (0..threads).map(|_| Vec::new()).collect();
    for (i, job) in jobs.into_iter().enumerate() {
        buckets[i % threads].push((i, job));
    }
    let mut slots: Vec<Option<T>> = std::iter::repeat_with(|| None).take(n).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = buckets
            .into_iter()
            .map(|bucket| {
                scope.spawn(move || {
                    bucket.into_iter().map(|(i, job)| (i, job())).collect::<Vec<_>>()
                })
            })
            .collect();
        for handle in handles {
            for (i, value) in handle.join().expect("figure worker panicked") {
                slots[i] = Some(value);
            }
        }
    });
    slots.into_iter().map(|slot| slot.expect("every job fills its slot")).collect()
}

/// Bound values against input entropy for quantum-limited attenuators
/// (or thermal ones when `env > 0`): three bound curves per eta.
pub fn epni(
    etas: &[f64],
    env: f64,
    entropy_max: f64,
    samples: usize,
    threads: usize,
) -> Result<CurveSet> {
    if etas.is_empty() {
        bail!("the epni figure needs at least one --eta");
    }
    if samples < 2 {
        bail!("need at least two samples per curve");
    }
    if !(entropy_max > 0.0) {
        bail!("--entropy-max must be positive");
    }
    let mut jobs: Vec<Job<'_, Result<Option<Curve>>>> = Vec::new();
    for &eta in etas {
        let channel = ChannelSpec::attenuator(eta, env)?;
        for kind in [BoundKind::EntropyPower, BoundKind::QuantumLimited, BoundKind::GaussianConjecture] {
            jobs.push(Box::new(move || {
                epni_curve(&channel, eta, env, kind, entropy_max, samples)
            }));
        }
    }
    let mut curves = Vec::new();
    for result in run_jobs(jobs, threads) {
        if let Some(curve) = result? {
            curves.push(curve);
        }
    }
    Ok(CurveSet { figure: "epni".into(), curves })
}

fn epni_curve(
    channel: &ChannelSpec,
    eta: f64,
    env: f64,
    kind: BoundKind,
    entropy_max: f64,
    samples: usize,
) -> Result<Option<Curve>> {
    let mut points = Vec::with_capacity(samples);
    for i in 0..samples {
        let s = entropy_max * i as f64 / (samples - 1) as f64;
        let value = bound(kind, channel, Entropy::from_nats(s), 1);
        if !value.in_domain {
            // Domain depends on the channel parameters only, so the
            // whole curve is vacuous; skip it rather than plot -inf.
            eprintln!(
                "note: {} bound out of domain for eta={eta}, env={env}; curve omitted",
                kind.label()
            );
            return Ok(None);
        }
        points.push(Point { x: s, y: value.nats, beta: None });
    }
    Ok(Some(Curve {
        name: format!("{}-eta{eta}", kind.label()),
        eta: Some(eta),
        energy: Some(env),
        points,
    }))
}

fn from_region(region: RegionCurve) -> Curve {
    let betas = region.betas;
    Curve {
        name: region.kind.label().into(),
        eta: Some(region.params.eta),
        energy: Some(region.params.energy),
        points: region
            .points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Point { x, y, beta: betas.as_ref().map(|b| b[i]) })
            .collect(),
    }
}

/// The four boundary curves of the two-receiver broadcast rate region.
pub fn broadcast(eta: f64, energy: f64, samples: usize, threads: usize) -> Result<CurveSet> {
    let jobs: Vec<Job<'_, fockbounds::Result<RegionCurve>>> = vec![
        Box::new(move || broadcast_time_sharing(eta, energy)),
        Box::new(move || broadcast_achievable(eta, energy, samples)),
        Box::new(move || broadcast_outer(eta, energy, RegionKind::OuterEpi, samples)),
        Box::new(move || broadcast_outer(eta, energy, RegionKind::OuterQuantumLimited, samples)),
    ];
    let mut curves = Vec::new();
    for result in run_jobs(jobs, threads) {
        curves.push(from_region(result?));
    }
    Ok(CurveSet { figure: "broadcast".into(), curves })
}

/// The four planar (C, Q) envelope curves of the trade-off region.
pub fn tradeoff(
    eta: f64,
    energy: f64,
    scenario: TradeoffScenario,
    samples: usize,
    threads: usize,
) -> Result<CurveSet> {
    let kinds = [
        RegionKind::TimeSharing,
        RegionKind::Achievable,
        RegionKind::OuterEpi,
        RegionKind::OuterQuantumLimited,
    ];
    let jobs: Vec<Job<'_, fockbounds::Result<RegionCurve>>> = kinds
        .into_iter()
        .map(|kind| {
            let job: Job<'_, _> =
                Box::new(move || project_cq_plane(kind, scenario, eta, energy, samples));
            job
        })
        .collect();
    let mut curves = Vec::new();
    for result in run_jobs(jobs, threads) {
        curves.push(from_region(result?));
    }
    Ok(CurveSet { figure: "tradeoff".into(), curves })
}
