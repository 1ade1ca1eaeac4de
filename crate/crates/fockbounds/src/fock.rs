//! Truncated Fock-space states and the entropy toolkit built on them.
//!
//! States are density matrices on `D_1 x ... x D_n` level spaces, stored
//! dense together with a `trace_deficit`: the probability mass the
//! truncation has provably dropped. The invariant `trace + deficit = 1`
//! is maintained by every constructor in this crate, so trace loss is
//! always visible to callers instead of silently renormalized away.

use crate::error::{Error, Result};
use crate::linalg;
use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

pub(crate) type CMat = Array2<Complex64>;

/// Eigenvalues whose magnitude falls below this are treated as exact zeros
/// when computing entropies; anything more negative than `-NEG_EIG_TOL` is
/// rejected as not a state.
pub(crate) const EIG_CLAMP: f64 = 1e-14;
pub(crate) const NEG_EIG_TOL: f64 = 1e-8;

/// Von Neumann entropy in nats.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Entropy(f64);

impl Entropy {
    pub fn from_nats(nats: f64) -> Self {
        Entropy(nats)
    }

    pub fn nats(self) -> f64 {
        self.0
    }
}

/// Mean photon number of a state, kept as a total over all modes so the
/// per-mode figure is always an explicit division.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanPhotons {
    pub total: f64,
    pub modes: usize,
}

impl MeanPhotons {
    pub fn per_mode(&self) -> f64 {
        self.total / self.modes as f64
    }
}

/// A (possibly subnormalized) density matrix on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockState {
    dims: Vec<usize>,
    matrix: CMat,
    trace_deficit: f64,
}

impl FockState {
    /// Builds a state from an explicit matrix.
    ///
    /// Requires Hermiticity within `1e-12` (max entry deviation), every
    /// per-mode dimension at least 2, and `trace + trace_deficit = 1`
    /// within `1e-8`. The stored deficit is snapped to `1 - trace` so the
    /// invariant is exact afterwards.
    pub fn from_matrix(matrix: CMat, dims: &[usize], trace_deficit: f64) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::BadDimension(0));
        }
        for &d in dims {
            if d < 2 {
                return Err(Error::BadDimension(d));
            }
        }
        let dim: usize = dims.iter().product();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::NotAState(format!(
                "matrix is {}x{} but mode dimensions give {}",
                matrix.nrows(),
                matrix.ncols(),
                dim
            )));
        }
        let mut herm_err = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                herm_err = herm_err.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if herm_err > 1e-12 {
            return Err(Error::NotAState(format!(
                "Hermiticity violated by {herm_err:.3e}"
            )));
        }
        if !(0.0..1.0).contains(&trace_deficit) {
            return Err(Error::NotAState(format!(
                "trace deficit {trace_deficit} outside [0, 1)"
            )));
        }
        let tr = trace_of(&matrix);
        if (tr + trace_deficit - 1.0).abs() > 1e-8 {
            return Err(Error::NotAState(format!(
                "trace {tr} + deficit {trace_deficit} is not 1"
            )));
        }
        Ok(FockState {
            dims: dims.to_vec(),
            matrix,
            trace_deficit: (1.0 - tr).max(0.0),
        })
    }

    /// Rank-one state from a (nearly) normalized amplitude vector.
    pub fn pure(amplitudes: &[Complex64], dims: &[usize]) -> Result<Self> {
        let dim: usize = dims.iter().product();
        if amplitudes.len() != dim {
            return Err(Error::BadDimension(amplitudes.len()));
        }
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-8 {
            return Err(Error::NotAState(format!(
                "amplitude norm^2 {norm2} is not 1"
            )));
        }
        let mut m = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = amplitudes[i] * amplitudes[j].conj() / norm2;
            }
        }
        FockState::from_matrix(m, dims, 0.0)
    }

    /// `|n><n|` on a single mode.
    pub fn number_state(n: usize, cutoff: usize) -> Result<Self> {
        if n >= cutoff {
            return Err(Error::BadParameter(format!(
                "photon number {n} does not fit below cutoff {cutoff}"
            )));
        }
        let mut v = vec![Complex64::new(0.0, 0.0); cutoff];
        v[n] = Complex64::new(1.0, 0.0);
        FockState::pure(&v, &[cutoff])
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Per-mode Fock dimensions. Channel outputs and all public constructors
    /// produce uniform dimensions; `tensor` of unequal factors does not.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn modes(&self) -> usize {
        self.dims.len()
    }

    /// Largest per-mode dimension.
    pub fn cutoff(&self) -> usize {
        *self.dims.iter().max().expect("at least one mode")
    }

    pub fn trace(&self) -> f64 {
        trace_of(&self.matrix)
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    /// Rescales the matrix to unit trace and zeroes the deficit.
    ///
    /// Use when downstream formulas require a normalized state and the
    /// deficit has already been accounted for through an error budget.
    pub fn renormalize(&self) -> FockState {
        let tr = self.trace();
        let m = self.matrix.mapv(|z| z / tr);
        FockState {
            dims: self.dims.clone(),
            matrix: m,
            trace_deficit: 0.0,
        }
    }

    /// Full spectral check: eigenvalues no more negative than `-1e-8`.
    /// Cheap invariants (Hermiticity, trace) are re-checked too.
    pub fn validate(&self) -> Result<()> {
        let copy = FockState::from_matrix(self.matrix.clone(), &self.dims, self.trace_deficit)?;
        let ev = linalg::eigvalsh(copy.matrix())?;
        if let Some(min) = ev.first() {
            if *min < -NEG_EIG_TOL {
                return Err(Error::NotAState(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(matrix: CMat, dims: Vec<usize>, trace_deficit: f64) -> Self {
        FockState {
            dims,
            matrix,
            trace_deficit,
        }
    }
}

pub(crate) fn trace_of(m: &CMat) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// Annihilation operator on one mode: `a[n-1, n] = sqrt(n)`.
pub fn annihilation_operator(cutoff: usize) -> CMat {
    let mut a = Array2::zeros((cutoff, cutoff));
    for n in 1..cutoff {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    let mut out = Array2::zeros((m.ncols(), m.nrows()));
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(j, i)] = m[(i, j)].conj();
        }
    }
    out
}

/// Photon number operator `diag(0, 1, ..., cutoff-1)`.
pub fn number_operator(cutoff: usize) -> CMat {
    let mut n = Array2::zeros((cutoff, cutoff));
    for k in 0..cutoff {
        n[(k, k)] = Complex64::new(k as f64, 0.0);
    }
    n
}

/// One-mode thermal state with mean photon number `mean`, i.e. the Gibbs
/// state `p_n = mean^n / (mean+1)^{n+1}`. Probabilities are those of the
/// untruncated geometric series; the dropped tail `(mean/(mean+1))^cutoff`
/// is recorded as the trace deficit rather than renormalized away.
pub fn thermal_state(mean: f64, cutoff: usize) -> Result<FockState> {
    if !(mean >= 0.0) {
        return Err(Error::BadParameter(format!(
            "thermal mean photon number must be nonnegative, got {mean}"
        )));
    }
    if cutoff < 2 {
        return Err(Error::BadDimension(cutoff));
    }
    let mut m = Array2::zeros((cutoff, cutoff));
    if mean == 0.0 {
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        return FockState::from_matrix(m, &[cutoff], 0.0);
    }
    let q = mean / (mean + 1.0);
    let mut p = 1.0 / (mean + 1.0);
    for n in 0..cutoff {
        m[(n, n)] = Complex64::new(p, 0.0);
        p *= q;
    }
    let deficit = q.powi(cutoff as i32);
    FockState::from_matrix(m, &[cutoff], deficit)
}

/// Smallest dimension that keeps the thermal tail `(E/(E+1))^d` at or
/// below `tail`, floored at 2.
pub fn thermal_support(mean: f64, tail: f64) -> usize {
    assert!(tail > 0.0 && tail < 1.0);
    if mean <= 0.0 {
        return 2;
    }
    let q = mean / (mean + 1.0);
    let d = (tail.ln() / q.ln()).ceil() as usize;
    d.max(2)
}

/// The bosonic entropy function `g(x) = (x+1) ln(x+1) - x ln x` in nats:
/// the entropy of a one-mode thermal state with mean photon number `x`.
pub fn g(x: f64) -> f64 {
    assert!(x >= -1e-9, "g is defined for nonnegative x, got {x}");
    let x = x.max(0.0);
    if x == 0.0 {
        return 0.0;
    }
    (x + 1.0) * (x + 1.0).ln() - x * x.ln()
}

/// Inverse of [`g`] on `y >= 0` by bisection on the bracket `[0, e^y]`.
///
/// `g(e^y) >= ln(e^y + 1) > y` makes the upper end valid. The search runs
/// to a relative width of `1e-13`, comfortably inside the `1e-12`
/// round-trip contract.
pub fn g_inverse(y: f64) -> f64 {
    assert!(y >= -1e-9, "g_inverse is defined for nonnegative y, got {y}");
    if y <= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0f64;
    let mut hi = y.exp();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < y {
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

/// Kronecker product of two states; deficits combine as
/// `1 - (1 - d_a)(1 - d_b)`.
pub fn tensor(a: &FockState, b: &FockState) -> FockState {
    let (na, nb) = (a.matrix.nrows(), b.matrix.nrows());
    let mut m = Array2::zeros((na * nb, na * nb));
    for i in 0..na {
        for j in 0..na {
            let aij = a.matrix[(i, j)];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    m[(i * nb + k, j * nb + l)] = aij * b.matrix[(k, l)];
                }
            }
        }
    }
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    let deficit = 1.0 - (1.0 - a.trace_deficit) * (1.0 - b.trace_deficit);
    FockState::from_parts_unchecked(m, dims, deficit)
}

/// Partial trace keeping the listed modes (ascending, no duplicates).
/// The deficit carries over unchanged: tracing cannot recover lost mass.
pub fn partial_trace(state: &FockState, keep: &[usize]) -> Result<FockState> {
    let n = state.modes();
    if keep.is_empty()
        || keep.windows(2).any(|w| w[0] >= w[1])
        || *keep.last().unwrap() >= n
    {
        return Err(Error::BadParameter(format!(
            "keep list {keep:?} invalid for {n} modes"
        )));
    }
    let dims = &state.dims;
    let keep_dims: Vec<usize> = keep.iter().map(|&m| dims[m]).collect();
    let traced: Vec<usize> = (0..n).filter(|m| !keep.contains(m)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&m| dims[m]).collect();
    let kd: usize = keep_dims.iter().product();
    let td: usize = traced_dims.iter().product();

    // Strides of each mode in the full row index.
    let mut stride = vec![1usize; n];
    for m in (0..n.saturating_sub(1)).rev() {
        stride[m] = stride[m + 1] * dims[m + 1];
    }

    let flat = |idx_keep: usize, idx_tr: usize| -> usize {
        let mut rest_k = idx_keep;
        let mut rest_t = idx_tr;
        let mut full = 0usize;
        // Decompose both packed indices mode by mode (row-major order).
        for (pos, &m) in keep.iter().enumerate() {
            let below: usize = keep_dims[pos + 1..].iter().product();
            let v = rest_k / below;
            rest_k %= below;
            full += v * stride[m];
        }
        for (pos, &m) in traced.iter().enumerate() {
            let below: usize = traced_dims[pos + 1..].iter().product();
            let v = rest_t / below;
            rest_t %= below;
            full += v * stride[m];
        }
        full
    };

    let mut out = Array2::zeros((kd, kd));
    for i in 0..kd {
        for j in 0..kd {
            let mut s = Complex64::new(0.0, 0.0);
            for t in 0..td {
                s += state.matrix[(flat(i, t), flat(j, t))];
            }
            out[(i, j)] = s;
        }
    }
    Ok(FockState::from_parts_unchecked(
        out,
        keep_dims,
        state.trace_deficit,
    ))
}

/// Mean photon number `Tr[N rho]` summed over all modes of the stored
/// (possibly subnormalized) matrix.
pub fn mean_photons(state: &FockState) -> MeanPhotons {
    let dims = &state.dims;
    let n = dims.len();
    let dim = state.matrix.nrows();
    let mut total = 0.0;
    for i in 0..dim {
        let mut rest = i;
        let mut photons = 0usize;
        for m in 0..n {
            let below: usize = dims[m + 1..].iter().product();
            photons += rest / below;
            rest %= below;
        }
        total += photons as f64 * state.matrix[(i, i)].re;
    }
    MeanPhotons { total, modes: n }
}

/// Von Neumann entropy `-Tr[rho ln rho]` of the matrix as stored.
///
/// Eigenvalues in `[-1e-14, 1e-14]` are treated as zero; anything below
/// `-1e-8` rejects the input. Subnormalized matrices are accepted (the
/// deficit's entropy contribution is the caller's concern).
pub fn von_neumann_entropy(state: &FockState) -> Result<Entropy> {
    let ev = linalg::eigvalsh(state.matrix())?;
    let mut s = 0.0;
    for &lambda in &ev {
        if lambda < -NEG_EIG_TOL {
            return Err(Error::NotAState(format!(
                "negative eigenvalue {lambda:.3e}"
            )));
        }
        if lambda > EIG_CLAMP {
            s -= lambda * lambda.ln();
        }
    }
    Ok(Entropy::from_nats(s))
}
