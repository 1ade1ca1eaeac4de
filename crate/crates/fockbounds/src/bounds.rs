//! Closed-form lower bounds on the output entropy of the four channels.
//!
//! Three families are implemented, all phrased per mode and scaled by the
//! mode count (every formula is additive over independent modes):
//!
//! * entropy-power bounds, valid for every parameter choice;
//! * quantum-limited bounds built from the one-parameter families
//!   [`f_lambda`] and its amplifier and additive-noise analogs, valid up
//!   to the entanglement-breaking thresholds and tighter than the
//!   entropy-power family inside their domain;
//! * the Gaussian-extremizer value: the output entropy of the thermal
//!   input with the same entropy, conjectured minimal and hence an upper
//!   envelope for any valid lower bound.
//!
//! The contravariant amplifier has no quantum-limited bound; its
//! [`BoundValue`] carries `in_domain = false` there.

use crate::channels::ChannelSpec;
use crate::fock::{g, g_inverse, Entropy};
use serde::Serialize;

/// Which lower-bound family a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    EntropyPower,
    QuantumLimited,
    GaussianConjecture,
}

impl BoundKind {
    pub fn label(&self) -> &'static str {
        match self {
            BoundKind::EntropyPower => "epi",
            BoundKind::QuantumLimited => "quantum-limited",
            BoundKind::GaussianConjecture => "gaussian",
        }
    }
}

/// A lower bound in nats, total over all modes. Out-of-domain bounds
/// carry `in_domain = false` and negative infinity, so `max` folds treat
/// them as vacuous.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundValue {
    pub kind: BoundKind,
    pub nats: f64,
    pub in_domain: bool,
}

fn per_mode(input_entropy: Entropy, modes: usize) -> f64 {
    assert!(modes >= 1, "bounds need at least one mode");
    let s = input_entropy.nats();
    assert!(s >= -1e-9, "input entropy must be nonnegative, got {s}");
    s.max(0.0) / modes as f64
}

/// `ln(exp(a) + exp(b))` without overflow; either argument may be
/// negative infinity.
fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

// ---------------------------------------------------------------------------
// one-parameter auxiliary families

/// The attenuator composition function
/// `f_lambda(x) = g(lambda g^-1(x + c) + lambda) - c` with
/// `c = g(lambda/(1-lambda))`: the exact minimum output entropy of the
/// quantum-limited attenuator of transmissivity `lambda` over inputs of
/// entropy `x`. Monotone and increasing, `f_lambda(0) = 0`, `f_1 = id`.
pub fn f_lambda(lambda: f64, x: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&lambda),
        "lambda must lie in [0, 1], got {lambda}"
    );
    assert!(x >= -1e-9, "f_lambda needs nonnegative input, got {x}");
    let x = x.max(0.0);
    if lambda == 1.0 {
        return x;
    }
    // f(0) = 0 exactly; skip the bisection noise of g_inverse there.
    if lambda == 0.0 || x == 0.0 {
        return 0.0;
    }
    let c = g(lambda / (1.0 - lambda));
    g(lambda * g_inverse(x + c) + lambda) - c
}

/// Inverse of [`f_lambda`] in `x` for `lambda` in `(0, 1]`, by bracket
/// doubling and bisection.
pub fn f_lambda_inverse(lambda: f64, y: f64) -> f64 {
    assert!(
        lambda > 0.0 && lambda <= 1.0,
        "inverse needs lambda in (0, 1], got {lambda}"
    );
    assert!(y >= -1e-9, "f_lambda_inverse needs nonnegative input, got {y}");
    let y = y.max(0.0);
    if lambda == 1.0 || y == 0.0 {
        return y;
    }
    let mut hi = y.max(1.0);
    while f_lambda(lambda, hi) < y {
        hi *= 2.0;
        assert!(hi < 1e12, "f_lambda_inverse bracket failed for y = {y}");
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f_lambda(lambda, mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// The entropy-power analog `ln(lambda e^x + 1 - lambda)`, evaluated in a
/// form that cannot overflow. Dominated by [`f_lambda`] pointwise.
pub fn epi_f_lambda(lambda: f64, x: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&lambda),
        "lambda must lie in [0, 1], got {lambda}"
    );
    if lambda == 0.0 {
        return 0.0;
    }
    if x >= 0.0 {
        x + (lambda + (1.0 - lambda) * (-x).exp()).ln()
    } else {
        (lambda * x.exp() + 1.0 - lambda).ln()
    }
}

/// Closed-form inverse of [`epi_f_lambda`] on `y >= 0`.
pub fn epi_f_lambda_inverse(lambda: f64, y: f64) -> f64 {
    assert!(
        lambda > 0.0 && lambda <= 1.0,
        "inverse needs lambda in (0, 1], got {lambda}"
    );
    assert!(y >= -1e-9, "epi_f_lambda_inverse needs nonnegative input, got {y}");
    let y = y.max(0.0);
    // e^x = (e^y - (1 - lambda)) / lambda, rearranged around e^-y.
    y + ((1.0 - (1.0 - lambda) * (-y).exp()) / lambda).ln()
}

// ---------------------------------------------------------------------------
// bounds on the channel output entropy

/// Entropy-power lower bound. Valid for every channel and parameter
/// choice, but not tight: it vanishes against the thermal value at zero
/// input entropy.
pub fn entropy_power_bound(
    spec: &ChannelSpec,
    input_entropy: Entropy,
    modes: usize,
) -> BoundValue {
    let s = per_mode(input_entropy, modes);
    let nats = match *spec {
        ChannelSpec::Attenuator { eta, env_photons } => {
            let a = if eta == 0.0 {
                f64::NEG_INFINITY
            } else {
                eta.ln() + s
            };
            let b = if eta == 1.0 {
                f64::NEG_INFINITY
            } else {
                (1.0 - eta).ln() + g(env_photons)
            };
            log_sum_exp(a, b)
        }
        ChannelSpec::Amplifier { kappa, env_photons } => {
            let a = kappa.ln() + s;
            let b = if kappa == 1.0 {
                f64::NEG_INFINITY
            } else {
                (kappa - 1.0).ln() + g(env_photons)
            };
            log_sum_exp(a, b)
        }
        ChannelSpec::ContravariantAmplifier { kappa, env_photons } => {
            let a = if kappa == 1.0 {
                f64::NEG_INFINITY
            } else {
                (kappa - 1.0).ln() + s
            };
            let b = kappa.ln() + g(env_photons);
            log_sum_exp(a, b)
        }
        ChannelSpec::AdditiveNoise { noise_photons } => {
            let b = if noise_photons == 0.0 {
                f64::NEG_INFINITY
            } else {
                1.0 + noise_photons.ln()
            };
            log_sum_exp(s, b)
        }
    };
    BoundValue {
        kind: BoundKind::EntropyPower,
        nats: nats * modes as f64,
        in_domain: true,
    }
}

/// Quantum-limited lower bound: exact minimum output entropy for the
/// quantum-limited channel, extended below the entanglement-breaking
/// threshold by composition. Out of domain (environment too hot, or the
/// contravariant channel) the value is vacuous.
pub fn quantum_limited_bound(
    spec: &ChannelSpec,
    input_entropy: Entropy,
    modes: usize,
) -> BoundValue {
    let s = per_mode(input_entropy, modes);
    let out_of_domain = BoundValue {
        kind: BoundKind::QuantumLimited,
        nats: f64::NEG_INFINITY,
        in_domain: false,
    };
    let nats = match *spec {
        ChannelSpec::Attenuator { eta, env_photons } => {
            if eta == 1.0 {
                s
            } else if env_photons <= eta / (1.0 - eta) {
                let c = g(eta / (1.0 - eta));
                let ge = g(env_photons);
                g(eta * g_inverse(s + c - ge) + eta) + ge - c
            } else {
                return out_of_domain;
            }
        }
        ChannelSpec::Amplifier { kappa, env_photons } => {
            if kappa == 1.0 {
                s
            } else if env_photons <= 1.0 / (kappa - 1.0) {
                let c = g(1.0 / (kappa - 1.0));
                let ge = g(env_photons);
                g(kappa * g_inverse(s + c - ge) + kappa) + ge - c
            } else {
                return out_of_domain;
            }
        }
        ChannelSpec::ContravariantAmplifier { .. } => return out_of_domain,
        ChannelSpec::AdditiveNoise { noise_photons } => {
            if noise_photons == 0.0 {
                s
            } else if noise_photons <= 1.0 {
                g(g_inverse(s - noise_photons.ln()) + 1.0) + noise_photons.ln()
            } else {
                return out_of_domain;
            }
        }
    };
    BoundValue {
        kind: BoundKind::QuantumLimited,
        nats: nats * modes as f64,
        in_domain: true,
    }
}

/// Output entropy of the thermal input state with the given entropy: the
/// conjectured minimum over all inputs, and the ceiling any valid lower
/// bound must stay under.
pub fn gaussian_conjecture_bound(
    spec: &ChannelSpec,
    input_entropy: Entropy,
    modes: usize,
) -> BoundValue {
    let s = per_mode(input_entropy, modes);
    let n_in = g_inverse(s);
    BoundValue {
        kind: BoundKind::GaussianConjecture,
        nats: g(spec.thermal_output_mean(n_in)) * modes as f64,
        in_domain: true,
    }
}

/// The tighter of the two proven bounds; the entropy-power value when the
/// quantum-limited family does not apply.
pub fn best_known_bound(spec: &ChannelSpec, input_entropy: Entropy, modes: usize) -> BoundValue {
    let epi = entropy_power_bound(spec, input_entropy, modes);
    let ql = quantum_limited_bound(spec, input_entropy, modes);
    // In domain the quantum-limited value dominates analytically; prefer
    // it on ties that are pure floating-point noise.
    if ql.in_domain && ql.nats >= epi.nats - 1e-12 * (1.0 + epi.nats.abs()) {
        ql
    } else {
        epi
    }
}

/// Dispatch by kind; the Gaussian value is the conjectured optimum, not a
/// proven bound.
pub fn bound(
    kind: BoundKind,
    spec: &ChannelSpec,
    input_entropy: Entropy,
    modes: usize,
) -> BoundValue {
    match kind {
        BoundKind::EntropyPower => entropy_power_bound(spec, input_entropy, modes),
        BoundKind::QuantumLimited => quantum_limited_bound(spec, input_entropy, modes),
        BoundKind::GaussianConjecture => gaussian_conjecture_bound(spec, input_entropy, modes),
    }
}
