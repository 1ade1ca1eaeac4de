//! Rate regions built from the output-entropy bounds: the two-receiver
//! degraded broadcast channel and the triple trade-off coding of the
//! quantum-limited attenuator.
//!
//! A beam splitter of transmissivity `eta` in `[1/2, 1]` sends the
//! transmitted arm to receiver A' and the reflected arm to receiver B';
//! B' sees a further-attenuated copy of A' (transmissivity
//! `(1-eta)/eta`), so every output-entropy lower bound for the
//! quantum-limited attenuator turns into an outer bound on the rate
//! region. The same mechanism bounds the trade-off regions for
//! classical/quantum/entanglement rates and public/private/key rates.
//!
//! Boundaries are reported as sampled curves in the nonnegative
//! quadrant, one [`RegionCurve`] per strategy or bound family.

use crate::bounds::{epi_f_lambda, epi_f_lambda_inverse, f_lambda, f_lambda_inverse};
use crate::error::{Error, Result};
use crate::fock::{g, g_inverse};
use serde::Serialize;

/// A pair of simultaneously achievable rates, in nats per channel use.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatePair {
    pub r_a: f64,
    pub r_b: f64,
}

impl RatePair {
    pub fn new(r_a: f64, r_b: f64) -> Result<Self> {
        if !(r_a >= 0.0) || !(r_b >= 0.0) {
            return Err(Error::BadParameter(format!(
                "rates must be nonnegative, got ({r_a}, {r_b})"
            )));
        }
        Ok(RatePair { r_a, r_b })
    }
}

/// A triple of trade-off rates. The third rate may be negative: a
/// negative entanglement-generation or key rate means the resource is
/// consumed rather than produced.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateTriple {
    pub c: f64,
    pub q_or_p: f64,
    pub g_or_k: f64,
}

impl RateTriple {
    pub fn new(c: f64, q_or_p: f64, g_or_k: f64) -> Result<Self> {
        if !(c >= 0.0) || !(q_or_p >= 0.0) {
            return Err(Error::BadParameter(format!(
                "classical and quantum/private rates must be nonnegative, got ({c}, {q_or_p})"
            )));
        }
        Ok(RateTriple { c, q_or_p, g_or_k })
    }

    /// Whether the triple satisfies classical/quantum/entanglement
    /// constraints with the given right-hand sides.
    pub fn satisfies_cqg(&self, bounds: &TradeoffBounds) -> bool {
        self.c + 2.0 * self.q_or_p <= bounds.first
            && self.q_or_p + self.g_or_k <= bounds.second
            && self.c + self.q_or_p + self.g_or_k <= bounds.third
    }

    /// Whether the triple satisfies public/private/key constraints with
    /// the given right-hand sides.
    pub fn satisfies_cpk(&self, bounds: &TradeoffBounds) -> bool {
        self.c + self.q_or_p <= bounds.first
            && self.q_or_p + self.g_or_k <= bounds.second
            && self.c + self.q_or_p + self.g_or_k <= bounds.third
    }
}

/// Which strategy or bound family a curve describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    /// Superposition or trade-off coding: the conjectured-optimal region.
    Achievable,
    /// Straight segment between the single-task corner points.
    TimeSharing,
    /// Outer bound from the entropy-power family.
    OuterEpi,
    /// Outer bound from the quantum-limited composition family.
    OuterQuantumLimited,
}

impl RegionKind {
    pub fn label(&self) -> &'static str {
        match self {
            RegionKind::Achievable => "achievable",
            RegionKind::TimeSharing => "time-sharing",
            RegionKind::OuterEpi => "outer-epi",
            RegionKind::OuterQuantumLimited => "outer-ql",
        }
    }
}

/// Which rate triple the trade-off constraints govern. The projected
/// planar regions of the two scenarios coincide; both are kept so that
/// the coincidence can be checked rather than assumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TradeoffScenario {
    /// Classical rate, quantum rate, entanglement generation.
    ClassicalQuantum,
    /// Public classical, private classical, key generation.
    PublicPrivate,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegionParams {
    pub eta: f64,
    pub energy: f64,
}

/// Sampled boundary of a planar rate region. `x` is strictly
/// increasing, `y` stays in the nonnegative quadrant and never
/// increases. For envelope curves `betas` records the maximizing
/// trade-off parameter per sample.
#[derive(Debug, Clone, Serialize)]
pub struct RegionCurve {
    pub points: Vec<(f64, f64)>,
    pub kind: RegionKind,
    pub params: RegionParams,
    pub formula_id: String,
    pub betas: Option<Vec<f64>>,
}

impl RegionCurve {
    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::BadParameter(format!(
                "curve {} needs at least two points",
                self.formula_id
            )));
        }
        if let Some(betas) = &self.betas {
            if betas.len() != self.points.len() {
                return Err(Error::BadParameter(format!(
                    "curve {} has {} beta entries for {} points",
                    self.formula_id,
                    betas.len(),
                    self.points.len()
                )));
            }
        }
        for w in self.points.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if !(x1 > x0) {
                return Err(Error::BadParameter(format!(
                    "curve {}: x not strictly increasing at {x0}",
                    self.formula_id
                )));
            }
            // Envelope maximization leaves sub-1e-9 jitter; larger
            // increases would mean a genuinely non-monotone boundary.
            if y1 > y0 + 1e-9 {
                return Err(Error::BadParameter(format!(
                    "curve {}: boundary increases at x = {x1}",
                    self.formula_id
                )));
            }
        }
        if self.points.iter().any(|&(_, y)| y < 0.0) {
            return Err(Error::BadParameter(format!(
                "curve {}: negative rate emitted",
                self.formula_id
            )));
        }
        Ok(())
    }
}

fn check_params(eta: f64, energy: f64) -> Result<()> {
    if !(0.5..=1.0).contains(&eta) {
        return Err(Error::BadParameter(format!(
            "transmissivity must lie in [1/2, 1], got {eta}"
        )));
    }
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::BadParameter(format!(
            "energy per mode must be positive, got {energy}"
        )));
    }
    Ok(())
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::BadParameter(format!(
            "need at least two samples, got {samples}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// degraded broadcast channel

/// Boundary value of the broadcast region for the chosen family: the
/// largest rate to the weak receiver compatible with rate `r_a` to the
/// strong one, clamped to zero past the curve's end.
pub fn broadcast_boundary(eta: f64, energy: f64, kind: RegionKind, r_a: f64) -> Result<f64> {
    check_params(eta, energy)?;
    if !(r_a >= 0.0) {
        return Err(Error::BadParameter(format!(
            "rate must be nonnegative, got {r_a}"
        )));
    }
    let lambda = (1.0 - eta) / eta;
    let ceiling = g((1.0 - eta) * energy);
    let value = match kind {
        RegionKind::Achievable => ceiling - g(lambda * g_inverse(r_a)),
        RegionKind::TimeSharing => ceiling * (1.0 - r_a / g(eta * energy)),
        RegionKind::OuterEpi => ceiling - epi_f_lambda(lambda, r_a),
        RegionKind::OuterQuantumLimited => ceiling - f_lambda(lambda, r_a),
    };
    Ok(value.max(0.0))
}

/// Rate to the strong receiver at which the boundary reaches zero.
pub fn broadcast_x_max(eta: f64, energy: f64, kind: RegionKind) -> Result<f64> {
    check_params(eta, energy)?;
    let lambda = (1.0 - eta) / eta;
    let ceiling = g((1.0 - eta) * energy);
    Ok(match kind {
        RegionKind::Achievable | RegionKind::TimeSharing => g(eta * energy),
        // eta = 1 sends nothing to the weak receiver; every family's
        // boundary is identically zero and the extent is conventional.
        RegionKind::OuterEpi => {
            if lambda == 0.0 {
                g(energy)
            } else {
                epi_f_lambda_inverse(lambda, ceiling)
            }
        }
        RegionKind::OuterQuantumLimited => {
            if lambda == 0.0 {
                g(energy)
            } else {
                f_lambda_inverse(lambda, ceiling)
            }
        }
    })
}

fn broadcast_curve(
    eta: f64,
    energy: f64,
    kind: RegionKind,
    samples: usize,
) -> Result<RegionCurve> {
    check_samples(samples)?;
    let x_max = broadcast_x_max(eta, energy, kind)?;
    let mut points = Vec::with_capacity(samples);
    for i in 0..samples {
        let x = x_max * i as f64 / (samples - 1) as f64;
        points.push((x, broadcast_boundary(eta, energy, kind, x)?));
    }
    let curve = RegionCurve {
        points,
        kind,
        params: RegionParams { eta, energy },
        formula_id: format!("broadcast-{}", kind.label()),
        betas: None,
    };
    curve.validate()?;
    Ok(curve)
}

/// Superposition-coding region boundary, sampled on `[0, g(eta E)]`.
pub fn broadcast_achievable(eta: f64, energy: f64, samples: usize) -> Result<RegionCurve> {
    broadcast_curve(eta, energy, RegionKind::Achievable, samples)
}

/// Outer-bound boundary for one of the two proven bound families,
/// sampled out to where it meets the axis.
pub fn broadcast_outer(
    eta: f64,
    energy: f64,
    kind: RegionKind,
    samples: usize,
) -> Result<RegionCurve> {
    match kind {
        RegionKind::OuterEpi | RegionKind::OuterQuantumLimited => {
            broadcast_curve(eta, energy, kind, samples)
        }
        other => Err(Error::BadParameter(format!(
            "broadcast outer bound needs an outer family, got {}",
            other.label()
        ))),
    }
}

/// Time-sharing baseline: the segment between the two single-receiver
/// capacities.
pub fn broadcast_time_sharing(eta: f64, energy: f64) -> Result<RegionCurve> {
    check_params(eta, energy)?;
    let curve = RegionCurve {
        points: vec![(0.0, g((1.0 - eta) * energy)), (g(eta * energy), 0.0)],
        kind: RegionKind::TimeSharing,
        params: RegionParams { eta, energy },
        formula_id: "broadcast-time-sharing".into(),
        betas: None,
    };
    curve.validate()?;
    Ok(curve)
}

// ---------------------------------------------------------------------------
// triple trade-off regions

/// Right-hand sides of the three trade-off inequalities at one value of
/// the trade-off parameter. In the classical/quantum/entanglement
/// scenario the components bound `C + 2Q`, `Q + G` and `C + Q + G`; in
/// the public/private/key scenario they bound `C + P`, `P + K` and
/// `C + P + K`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TradeoffBounds {
    pub first: f64,
    pub second: f64,
    pub third: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::BadParameter(format!(
            "trade-off parameter must lie in [0, 1], got {beta}"
        )));
    }
    Ok(())
}

fn tradeoff_bounds(
    eta: f64,
    energy: f64,
    beta: f64,
    kind: RegionKind,
    scenario: TradeoffScenario,
) -> Result<TradeoffBounds> {
    check_params(eta, energy)?;
    check_beta(beta)?;
    let cap = g(eta * energy);
    let mut bounds = match kind {
        RegionKind::Achievable => TradeoffBounds {
            first: g(beta * energy) + cap - g((1.0 - eta) * beta * energy),
            second: g(eta * beta * energy) - g((1.0 - eta) * beta * energy),
            third: cap - g((1.0 - eta) * beta * energy),
        },
        RegionKind::OuterEpi | RegionKind::OuterQuantumLimited => {
            let lambda = (1.0 - eta) / eta;
            let y = g(beta * eta * energy);
            let (fv, back) = if kind == RegionKind::OuterEpi {
                (epi_f_lambda(lambda, y), epi_f_lambda_inverse(eta, y))
            } else {
                (f_lambda(lambda, y), f_lambda_inverse(eta, y))
            };
            TradeoffBounds {
                first: cap + back - fv,
                second: y - fv,
                third: cap - fv,
            }
        }
        RegionKind::TimeSharing => {
            return Err(Error::BadParameter(
                "time sharing is a segment, not a constraint triple".into(),
            ))
        }
    };
    if scenario == TradeoffScenario::PublicPrivate {
        // Public plus private classical rate is capped by the plain
        // classical capacity, independent of the trade-off parameter.
        bounds.first = cap;
    }
    Ok(bounds)
}

/// Trade-off coding constraints on classical rate, quantum rate and
/// entanglement generation.
pub fn tradeoff_achievable_cqg(eta: f64, energy: f64, beta: f64) -> Result<TradeoffBounds> {
    tradeoff_bounds(
        eta,
        energy,
        beta,
        RegionKind::Achievable,
        TradeoffScenario::ClassicalQuantum,
    )
}

/// Trade-off coding constraints on public, private and key rates.
pub fn tradeoff_achievable_cpk(eta: f64, energy: f64, beta: f64) -> Result<TradeoffBounds> {
    tradeoff_bounds(
        eta,
        energy,
        beta,
        RegionKind::Achievable,
        TradeoffScenario::PublicPrivate,
    )
}

/// Outer-bound constraints on classical, quantum and entanglement rates
/// for the chosen bound family.
pub fn tradeoff_outer_cqg(
    eta: f64,
    energy: f64,
    beta: f64,
    kind: RegionKind,
) -> Result<TradeoffBounds> {
    tradeoff_bounds(eta, energy, beta, kind, TradeoffScenario::ClassicalQuantum)
}

/// Outer-bound constraints on public, private and key rates for the
/// chosen bound family.
pub fn tradeoff_outer_cpk(
    eta: f64,
    energy: f64,
    beta: f64,
    kind: RegionKind,
) -> Result<TradeoffBounds> {
    tradeoff_bounds(eta, energy, beta, kind, TradeoffScenario::PublicPrivate)
}

/// Largest second rate compatible with first rate `c` at a fixed
/// trade-off parameter, with the entanglement (resp. key) rate pinned
/// to zero.
fn planar_value(bounds: &TradeoffBounds, c: f64, scenario: TradeoffScenario) -> f64 {
    match scenario {
        TradeoffScenario::ClassicalQuantum => ((bounds.first - c) / 2.0)
            .min(bounds.second)
            .min(bounds.third - c),
        TradeoffScenario::PublicPrivate => (bounds.first - c)
            .min(bounds.second)
            .min(bounds.third - c),
    }
}

/// Golden-section maximization on `[a, b]` for a unimodal objective.
fn golden_max(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..48 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
        if b - a < 1e-12 {
            break;
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

/// Planar trade-off region boundary: for each classical rate on a
/// uniform grid over `[0, g(eta E)]`, the largest quantum (or private)
/// rate over the trade-off parameter sweep, with the third rate set to
/// zero. Time sharing returns the straight segment between the
/// single-task corners instead.
pub fn project_cq_plane(
    kind: RegionKind,
    scenario: TradeoffScenario,
    eta: f64,
    energy: f64,
    samples: usize,
) -> Result<RegionCurve> {
    check_params(eta, energy)?;
    let cap = g(eta * energy);
    let formula_id = format!("tradeoff-{}", kind.label());
    if kind == RegionKind::TimeSharing {
        // Corners: classical capacity alone, and the full-energy
        // quantum (or private) rate alone.
        let q_corner = g(eta * energy) - g((1.0 - eta) * energy);
        let curve = RegionCurve {
            points: vec![(0.0, q_corner.max(0.0)), (cap, 0.0)],
            kind,
            params: RegionParams { eta, energy },
            formula_id,
            betas: None,
        };
        curve.validate()?;
        return Ok(curve);
    }
    check_samples(samples)?;

    // The constraint triple depends only on beta, so sweep it once.
    const BETA_GRID: usize = 101;
    let grid: Vec<(f64, TradeoffBounds)> = (0..BETA_GRID)
        .map(|i| {
            let beta = i as f64 / (BETA_GRID - 1) as f64;
            Ok((beta, tradeoff_bounds(eta, energy, beta, kind, scenario)?))
        })
        .collect::<Result<_>>()?;

    let mut points = Vec::with_capacity(samples);
    let mut betas = Vec::with_capacity(samples);
    for i in 0..samples {
        let c = cap * i as f64 / (samples - 1) as f64;
        let mut best_idx = 0;
        let mut best = f64::NEG_INFINITY;
        for (idx, (_, b)) in grid.iter().enumerate() {
            let v = planar_value(b, c, scenario);
            if v > best {
                best = v;
                best_idx = idx;
            }
        }
        // Refine between the grid neighbors of the coarse maximizer.
        let lo = grid[best_idx.saturating_sub(1)].0;
        let hi = grid[(best_idx + 1).min(BETA_GRID - 1)].0;
        let (beta_star, refined) = golden_max(lo, hi, |beta| {
            match tradeoff_bounds(eta, energy, beta, kind, scenario) {
                Ok(b) => planar_value(&b, c, scenario),
                Err(_) => f64::NEG_INFINITY,
            }
        });
        let q = refined.max(best).max(0.0);
        points.push((c, q));
        betas.push(beta_star);
    }
    let curve = RegionCurve {
        points,
        kind,
        params: RegionParams { eta, energy },
        formula_id,
        betas: Some(betas),
    };
    curve.validate()?;
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ETA: f64 = 0.9;
    const E: f64 = 4.0;
    // Frozen reference points for eta = 0.9, E = 4.
    const G_36: f64 = 2.4084971524137953112;
    const G_04: f64 = 0.83757742401936012878;
    const G_4: f64 = 2.5020121176909393977;

    #[test]
    fn broadcast_achievable_endpoints() {
        let curve = broadcast_achievable(ETA, E, 512).unwrap();
        let (x0, y0) = curve.points[0];
        let (x1, y1) = *curve.points.last().unwrap();
        assert_eq!(x0, 0.0);
        assert!((y0 - G_04).abs() < 1e-10);
        assert!((x1 - G_36).abs() < 1e-10);
        assert!(y1.abs() < 1e-10);
    }

    #[test]
    fn broadcast_boundaries_agree_at_zero_rate() {
        for kind in [
            RegionKind::Achievable,
            RegionKind::TimeSharing,
            RegionKind::OuterEpi,
            RegionKind::OuterQuantumLimited,
        ] {
            let y = broadcast_boundary(ETA, E, kind, 0.0).unwrap();
            assert!((y - G_04).abs() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn time_sharing_midpoint_and_interior() {
        let mid = broadcast_boundary(ETA, E, RegionKind::TimeSharing, G_36 / 2.0).unwrap();
        assert!((mid - G_04 / 2.0).abs() < 1e-12);
        // The straight segment lies inside the superposition-coding
        // region everywhere.
        for i in 0..=100 {
            let x = G_36 * i as f64 / 100.0;
            let ts = broadcast_boundary(ETA, E, RegionKind::TimeSharing, x).unwrap();
            let ach = broadcast_boundary(ETA, E, RegionKind::Achievable, x).unwrap();
            assert!(ts <= ach + 1e-10, "x = {x}");
        }
    }

    #[test]
    fn broadcast_epi_boundary_matches_frozen_value() {
        // lambda = 1/9 at the achievable region's x extent.
        let y = broadcast_boundary(ETA, E, RegionKind::OuterEpi, G_36).unwrap();
        assert!((y - (G_04 - 0.7533660241351384506)).abs() < 1e-12);
    }

    #[test]
    fn broadcast_containment_chain() {
        // Time sharing inside achievable inside the quantum-limited
        // outer bound inside the entropy-power outer bound, on a grid
        // spanning the widest curve.
        let x_max = broadcast_x_max(ETA, E, RegionKind::OuterEpi).unwrap();
        assert!(x_max > G_36);
        let ql_max = broadcast_x_max(ETA, E, RegionKind::OuterQuantumLimited).unwrap();
        assert!(ql_max > G_36 && ql_max <= x_max + 1e-12);
        for i in 0..=512 {
            let x = x_max * i as f64 / 512.0;
            let ts = broadcast_boundary(ETA, E, RegionKind::TimeSharing, x).unwrap();
            let ach = broadcast_boundary(ETA, E, RegionKind::Achievable, x).unwrap();
            let ql = broadcast_boundary(ETA, E, RegionKind::OuterQuantumLimited, x).unwrap();
            let epi = broadcast_boundary(ETA, E, RegionKind::OuterEpi, x).unwrap();
            assert!(ts <= ach + 1e-10, "x = {x}");
            assert!(ach <= ql + 1e-10, "x = {x}");
            assert!(ql <= epi + 1e-10, "x = {x}");
        }
    }

    #[test]
    fn broadcast_achievable_is_concave() {
        let curve = broadcast_achievable(ETA, E, 256).unwrap();
        for w in curve.points.windows(3) {
            let second = w[2].1 - 2.0 * w[1].1 + w[0].1;
            assert!(second <= 1e-9, "at x = {}", w[1].0);
        }
    }

    #[test]
    fn broadcast_outer_rejects_non_outer_kinds() {
        assert!(broadcast_outer(ETA, E, RegionKind::Achievable, 16).is_err());
        assert!(broadcast_outer(ETA, E, RegionKind::TimeSharing, 16).is_err());
    }

    #[test]
    fn half_transmissivity_outer_bound_is_a_straight_line() {
        // lambda = 1 makes both auxiliary functions the identity, so the
        // outer boundary is g(E/2) - x.
        let ceiling = g(2.0);
        for kind in [RegionKind::OuterEpi, RegionKind::OuterQuantumLimited] {
            for i in 0..=20 {
                let x = ceiling * i as f64 / 20.0;
                let y = broadcast_boundary(0.5, E, kind, x).unwrap();
                assert!((y - (ceiling - x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tradeoff_triples_match_frozen_values_at_full_beta() {
        let b = tradeoff_achievable_cqg(ETA, E, 1.0).unwrap();
        assert!((b.first - (G_4 + G_36 - G_04)).abs() < 1e-12);
        assert!((b.second - (G_36 - G_04)).abs() < 1e-12);
        assert!((b.third - (G_36 - G_04)).abs() < 1e-12);
        assert!((b.first - 4.07293184608537458).abs() < 1e-12);
        assert!((b.second - 1.5709197283944351824).abs() < 1e-12);
    }

    #[test]
    fn tradeoff_triples_at_zero_beta() {
        for kind in [
            RegionKind::Achievable,
            RegionKind::OuterEpi,
            RegionKind::OuterQuantumLimited,
        ] {
            for scenario in [
                TradeoffScenario::ClassicalQuantum,
                TradeoffScenario::PublicPrivate,
            ] {
                let b = tradeoff_bounds(ETA, E, 0.0, kind, scenario).unwrap();
                assert!((b.first - G_36).abs() < 1e-11, "{kind:?} {scenario:?}");
                assert!(b.second.abs() < 1e-11, "{kind:?} {scenario:?}");
                assert!((b.third - G_36).abs() < 1e-11, "{kind:?} {scenario:?}");
            }
        }
    }

    #[test]
    fn public_private_first_component_is_constant() {
        for i in 0..=10 {
            let beta = i as f64 / 10.0;
            let b = tradeoff_achievable_cpk(ETA, E, beta).unwrap();
            assert_eq!(b.first, g(ETA * E));
            let cqg = tradeoff_achievable_cqg(ETA, E, beta).unwrap();
            assert_eq!(b.second, cqg.second);
            assert_eq!(b.third, cqg.third);
        }
    }

    #[test]
    fn outer_triples_contain_achievable_triples() {
        for i in 0..=100 {
            let beta = i as f64 / 100.0;
            let ach = tradeoff_achievable_cqg(ETA, E, beta).unwrap();
            let ql = tradeoff_outer_cqg(ETA, E, beta, RegionKind::OuterQuantumLimited).unwrap();
            let epi = tradeoff_outer_cqg(ETA, E, beta, RegionKind::OuterEpi).unwrap();
            assert!(ach.first <= ql.first + 1e-10, "beta = {beta}");
            assert!(ach.second <= ql.second + 1e-10, "beta = {beta}");
            assert!(ach.third <= ql.third + 1e-10, "beta = {beta}");
            assert!(ql.first <= epi.first + 1e-10, "beta = {beta}");
            assert!(ql.second <= epi.second + 1e-10, "beta = {beta}");
            assert!(ql.third <= epi.third + 1e-10, "beta = {beta}");
        }
    }

    #[test]
    fn quantum_plus_entanglement_bound_below_total_bound() {
        for i in 0..=20 {
            let beta = i as f64 / 20.0;
            let b = tradeoff_achievable_cqg(ETA, E, beta).unwrap();
            assert!(b.second <= b.third + 1e-12);
        }
    }

    #[test]
    fn rate_triple_constraint_checks() {
        let b = tradeoff_achievable_cqg(ETA, E, 1.0).unwrap();
        let inside = RateTriple::new(0.4, 0.3, 0.0).unwrap();
        assert!(inside.satisfies_cqg(&b));
        let outside = RateTriple::new(0.4, 2.0, 0.0).unwrap();
        assert!(!outside.satisfies_cqg(&b));
        // Consuming entanglement relaxes the second and third constraints.
        let consuming = RateTriple::new(0.4, 2.0, -3.0).unwrap();
        assert!(consuming.satisfies_cqg(&b) == (0.4 + 2.0 * 2.0 <= b.first));
        assert!(RateTriple::new(-0.1, 0.0, 0.0).is_err());
        assert!(RatePair::new(0.1, -0.2).is_err());
    }

    #[test]
    fn projected_envelope_endpoints_and_containment() {
        let ach = project_cq_plane(
            RegionKind::Achievable,
            TradeoffScenario::ClassicalQuantum,
            ETA,
            E,
            256,
        )
        .unwrap();
        let ql = project_cq_plane(
            RegionKind::OuterQuantumLimited,
            TradeoffScenario::ClassicalQuantum,
            ETA,
            E,
            256,
        )
        .unwrap();
        let epi = project_cq_plane(
            RegionKind::OuterEpi,
            TradeoffScenario::ClassicalQuantum,
            ETA,
            E,
            256,
        )
        .unwrap();
        // Q = 0 endpoint at the classical capacity; C = 0 endpoint at
        // the full-energy quantum rate (the beta = 1 corner).
        let (x_end, y_end) = *ach.points.last().unwrap();
        assert!((x_end - G_36).abs() < 1e-10);
        assert!(y_end.abs() < 1e-10);
        assert!((ach.points[0].1 - (G_36 - G_04)).abs() < 1e-9);
        for i in 0..ach.points.len() {
            assert!(ach.points[i].1 <= ql.points[i].1 + 1e-10, "i = {i}");
            assert!(ql.points[i].1 <= epi.points[i].1 + 1e-10, "i = {i}");
        }
    }

    #[test]
    fn time_sharing_segment_inside_projected_achievable() {
        let ts = project_cq_plane(
            RegionKind::TimeSharing,
            TradeoffScenario::ClassicalQuantum,
            ETA,
            E,
            2,
        )
        .unwrap();
        assert_eq!(ts.points.len(), 2);
        let (c0, q0) = ts.points[0];
        let (c1, q1) = ts.points[1];
        assert_eq!(c0, 0.0);
        assert!((q0 - (G_36 - G_04)).abs() < 1e-10);
        assert!((c1 - G_36).abs() < 1e-12);
        assert_eq!(q1, 0.0);
        let ach = project_cq_plane(
            RegionKind::Achievable,
            TradeoffScenario::ClassicalQuantum,
            ETA,
            E,
            128,
        )
        .unwrap();
        for &(c, q) in &ach.points {
            let ts_q = q0 * (1.0 - c / c1);
            assert!(ts_q <= q + 1e-9, "c = {c}");
        }
    }

    #[test]
    fn classical_quantum_and_public_private_projections_coincide() {
        for kind in [
            RegionKind::Achievable,
            RegionKind::OuterQuantumLimited,
            RegionKind::OuterEpi,
        ] {
            let cq = project_cq_plane(kind, TradeoffScenario::ClassicalQuantum, ETA, E, 128)
                .unwrap();
            let pp =
                project_cq_plane(kind, TradeoffScenario::PublicPrivate, ETA, E, 128).unwrap();
            for i in 0..cq.points.len() {
                assert!(
                    (cq.points[i].1 - pp.points[i].1).abs() < 1e-10,
                    "{kind:?} i = {i}"
                );
            }
        }
    }

    #[test]
    fn projected_envelope_is_concave_and_monotone() {
        let ach = project_cq_plane(
            RegionKind::Achievable,
            TradeoffScenario::ClassicalQuantum,
            ETA,
            E,
            256,
        )
        .unwrap();
        ach.validate().unwrap();
        for w in ach.points.windows(3) {
            let second = w[2].1 - 2.0 * w[1].1 + w[0].1;
            // Envelope jitter from the beta refinement stays well under
            // the grid scale.
            assert!(second <= 1e-7, "at c = {}", w[1].0);
        }
    }

    #[test]
    fn unit_transmissivity_projection_is_monotone() {
        let curve = project_cq_plane(
            RegionKind::Achievable,
            TradeoffScenario::ClassicalQuantum,
            1.0,
            E,
            64,
        )
        .unwrap();
        curve.validate().unwrap();
        for w in curve.points.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-9);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(broadcast_achievable(0.4, E, 16).is_err());
        assert!(broadcast_achievable(ETA, 0.0, 16).is_err());
        assert!(broadcast_achievable(ETA, E, 1).is_err());
        assert!(tradeoff_achievable_cqg(ETA, E, 1.5).is_err());
        assert!(tradeoff_achievable_cqg(ETA, E, -0.1).is_err());
        assert!(tradeoff_outer_cqg(ETA, E, 0.5, RegionKind::TimeSharing).is_err());
        assert!(broadcast_boundary(ETA, E, RegionKind::Achievable, -1.0).is_err());
    }
}
