//! The kernel as a self-adjoint operator on mean-zero functions.
//!
//! For `P` reversible with respect to `π`, `S = D^{1/2} P D^{-1/2}` (with
//! `D = diag(π)`) is symmetric and `u = D^{1/2} 1` is an eigenvector of `S`
//! with eigenvalue 1. Everything here works on `S` compressed to the
//! orthogonal complement of `u`, which is the Euclidean image of `L²₀(π)`
//! under `f ↦ D^{1/2} f`. The complement is spanned by the trailing columns of
//! the Householder reflector that sends `u` to a multiple of `e₀`, so the
//! constant mode is deflated explicitly instead of being searched for among
//! the computed eigenvalues.
//!
//! Two routes to the asymptotic variance are provided: the spectral sum
//! `Σ w_i (1 + λ_i)/(1 − λ_i)` over the atoms of the spectral measure of `f`,
//! and the autocovariance series `γ₀ + 2 Σ γ_k`, which only needs repeated
//! applications of `P`.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernel::{
    center_observable, check_irreducible, compute_period, Observable, StationaryDistribution,
    TransitionKernel, TOL_CENTER, TOL_REV,
};
use crate::matrix::{dot, symmetric_eigen, SquareMatrix};

/// Eigenvalues within this of 1 are treated as sitting at 1.
pub const TOL_ONE: f64 = 1e-9;
/// Spectral mass below this is treated as absent.
pub const TOL_MASS: f64 = 1e-9;
/// Largest acceptable `‖P φ − λ φ‖_π` for a returned eigenpair.
pub const RESIDUAL_CONTRACT: f64 = 1e-9;

/// `⟨f, g⟩_π = Σ π_x f_x g_x`
#[derive(Debug, Clone)]
pub struct PiInnerProduct<'a> {
    pi: &'a StationaryDistribution,
}

impl<'a> PiInnerProduct<'a> {
    pub fn new(pi: &'a StationaryDistribution) -> Self {
        Self { pi }
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.pi
            .as_slice()
            .iter()
            .zip(f)
            .zip(g)
            .map(|((p, a), b)| p * a * b)
            .sum()
    }

    pub fn norm_sq(&self, f: &[f64]) -> f64 {
        self.inner(f, f)
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.norm_sq(f).sqrt()
    }
}

/// Orthonormal basis of `u⊥`, `u = √π`, held as a Householder reflector.
pub(crate) struct MeanZeroBasis {
    sqrt_pi: Vec<f64>,
    w: Vec<f64>,
    beta: f64,
}

impl MeanZeroBasis {
    pub(crate) fn new(pi: &StationaryDistribution) -> Self {
        let sqrt_pi: Vec<f64> = pi.as_slice().iter().map(|p| p.sqrt()).collect();
        let norm = dot(&sqrt_pi, &sqrt_pi).sqrt();
        let mut w = sqrt_pi.clone();
        // u₀ > 0, so adding the norm avoids cancellation
        w[0] += norm;
        let beta = 2.0 / dot(&w, &w);
        Self { sqrt_pi, w, beta }
    }

    /// `Bᵀ A B` for symmetric `A`, where `B` is the basis.
    pub(crate) fn compress(&self, a: &SquareMatrix) -> SquareMatrix {
        let n = a.n();
        let w = &self.w;
        let beta = self.beta;
        let p = a.mul_vec(w);
        let kappa = dot(w, &p);
        // H A H = A − β w pᵀ − β p wᵀ + β² κ w wᵀ
        let full = SquareMatrix::from_fn(n, |i, j| {
            a[(i, j)] - beta * (w[i] * p[j] + p[i] * w[j]) + beta * beta * kappa * w[i] * w[j]
        });
        SquareMatrix::from_fn(n - 1, |i, j| full[(i + 1, j + 1)]).symmetric_part()
    }

    /// `B v` as a Euclidean vector of length n.
    pub(crate) fn lift(&self, v: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(v.len() + 1);
        x.push(0.0);
        x.extend_from_slice(v);
        let s = self.beta * dot(&self.w, &x);
        x.iter_mut().zip(&self.w).for_each(|(xi, wi)| *xi -= s * wi);
        x
    }

    pub(crate) fn sqrt_pi(&self) -> &[f64] {
        &self.sqrt_pi
    }
}

/// `D^{1/2} P D^{-1/2}` together with its asymmetry.
pub(crate) fn symmetrize(
    k: &TransitionKernel,
    pi: &StationaryDistribution,
) -> Result<SquareMatrix> {
    if k.n() != pi.n() {
        return Err(Error::DimensionMismatch {
            expected: pi.n(),
            found: k.n(),
        });
    }
    let s = pi.as_slice();
    let sq: Vec<f64> = s.iter().map(|p| p.sqrt()).collect();
    let m = SquareMatrix::from_fn(k.n(), |x, y| sq[x] * k.get(x, y) / sq[y]);
    let residual = m.asymmetry();
    if residual > TOL_REV {
        return Err(Error::NotReversible { residual });
    }
    Ok(m.symmetric_part())
}

/// Spectrum of `P` restricted to `L²₀(π)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDecomposition {
    /// n − 1 eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// π-orthonormal, each with zero π-mean.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `max_i ‖P φ_i − λ_i φ_i‖_π`
    pub residual: f64,
}

impl SpectralDecomposition {
    pub fn max_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    /// `max |λ_i|`; zero on a single-state space.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |r, l| r.max(l.abs()))
    }

    /// `1 − λ_max`
    pub fn spectral_gap(&self) -> f64 {
        1.0 - self.max_eigenvalue().unwrap_or(0.0)
    }
}

/// Symmetrize, deflate the constant mode, diagonalize, map back.
pub fn eigendecompose_restricted(
    k: &TransitionKernel,
    pi: &StationaryDistribution,
) -> Result<SpectralDecomposition> {
    let s = symmetrize(k, pi)?;
    let basis = MeanZeroBasis::new(pi);
    let reduced = basis.compress(&s);
    let eig = symmetric_eigen(&reduced)?;

    let mut psis: Vec<Vec<f64>> = eig.eigenvectors.iter().map(|v| basis.lift(v)).collect();
    reorthonormalize(&mut psis, basis.sqrt_pi());

    let inv_sqrt: Vec<f64> = basis.sqrt_pi().iter().map(|r| 1.0 / r).collect();
    let eigenvectors: Vec<Vec<f64>> = psis
        .iter()
        .map(|psi| psi.iter().zip(&inv_sqrt).map(|(a, b)| a * b).collect())
        .collect();

    let ip = PiInnerProduct::new(pi);
    let mut residual = 0.0f64;
    for (phi, &lambda) in eigenvectors.iter().zip(&eig.eigenvalues) {
        let pf = k.apply(phi);
        let r: Vec<f64> = pf.iter().zip(phi).map(|(a, b)| a - lambda * b).collect();
        residual = residual.max(ip.norm(&r));
    }
    if !(residual <= RESIDUAL_CONTRACT) {
        return Err(Error::EigensolverFailure { residual });
    }
    Ok(SpectralDecomposition {
        eigenvalues: eig.eigenvalues,
        eigenvectors,
        residual,
    })
}

/// Modified Gram–Schmidt in the Euclidean (√π-scaled) picture, against `u` first.
fn reorthonormalize(vs: &mut [Vec<f64>], u: &[f64]) {
    for i in 0..vs.len() {
        let (done, rest) = vs.split_at_mut(i);
        let v = &mut rest[0];
        let c = dot(v, u);
        v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
        for prev in done.iter() {
            let c = dot(v, prev);
            v.iter_mut().zip(prev).for_each(|(a, b)| *a -= c * b);
        }
        let norm = dot(v, v).sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralAtom {
    pub lambda: f64,
    pub weight: f64,
}

/// Finite-dimensional spectral measure of a centered observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralMeasure {
    pub atoms: Vec<SpectralAtom>,
}

impl SpectralMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().fold(0.0, |m, a| m + a.weight)
    }

    /// Mass carried by atoms with `λ > 1 − TOL_ONE`.
    pub fn mass_near_one(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.lambda > 1.0 - TOL_ONE)
            .fold(0.0, |m, a| m + a.weight)
    }

    /// Mass carried by atoms with `λ < −1 + TOL_ONE`.
    pub fn mass_near_minus_one(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.lambda < -1.0 + TOL_ONE)
            .fold(0.0, |m, a| m + a.weight)
    }

    /// `Σ w λ^k`, the lag-k autocovariance implied by the measure.
    pub fn moment(&self, k: i32) -> f64 {
        self.atoms.iter().map(|a| a.weight * a.lambda.powi(k)).sum()
    }
}

fn ensure_centered(f: &Observable, pi: &StationaryDistribution) -> Result<()> {
    if f.n() != pi.n() {
        return Err(Error::DimensionMismatch {
            expected: pi.n(),
            found: f.n(),
        });
    }
    let mean = pi.mean(f.values());
    let scale = f.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if mean.abs() > TOL_CENTER * scale {
        return Err(Error::NotCentered { mean });
    }
    Ok(())
}

/// Atoms `(λ_i, ⟨f, φ_i⟩_π²)`.
pub fn spectral_measure(
    f: &Observable,
    dec: &SpectralDecomposition,
    pi: &StationaryDistribution,
) -> Result<SpectralMeasure> {
    ensure_centered(f, pi)?;
    let ip = PiInnerProduct::new(pi);
    let atoms = dec
        .eigenvalues
        .iter()
        .zip(&dec.eigenvectors)
        .map(|(&lambda, phi)| SpectralAtom {
            lambda,
            weight: ip.inner(f.values(), phi).powi(2),
        })
        .collect();
    Ok(SpectralMeasure { atoms })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceValue {
    Finite(f64),
    Infinite,
}

impl VarianceValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }
}

impl Serialize for VarianceValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => s.serialize_f64(*v),
            Self::Infinite => s.serialize_str("+inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    Spectral,
    Autocov,
    Empirical,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VarianceDiagnostics {
    /// Spectral mass within `TOL_ONE` of λ = 1.
    pub weight_near_one: f64,
    /// Bound on the dropped autocovariance tail.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_bound: Option<f64>,
    /// Number of lags summed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lags: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    /// False when irreducibility was not enforced.
    pub hypotheses_verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceResult {
    pub value: VarianceValue,
    pub method: VarianceMethod,
    pub diagnostics: VarianceDiagnostics,
}

/// `Σ w (1 + λ)/(1 − λ)` over a spectral measure; +∞ when mass sits at 1.
pub fn variance_from_measure(measure: &SpectralMeasure) -> VarianceResult {
    let near_one = measure.mass_near_one();
    let value = if near_one > TOL_MASS {
        VarianceValue::Infinite
    } else {
        let v = measure
            .atoms
            .iter()
            .filter(|a| a.lambda <= 1.0 - TOL_ONE)
            .map(|a| {
                if a.lambda < -1.0 + TOL_ONE {
                    // integrand vanishes at −1
                    0.0
                } else {
                    a.weight * (1.0 + a.lambda) / (1.0 - a.lambda)
                }
            })
            .fold(0.0, |acc, t| acc + t);
        VarianceValue::Finite(v.max(0.0))
    };
    VarianceResult {
        value,
        method: VarianceMethod::Spectral,
        diagnostics: VarianceDiagnostics {
            weight_near_one: near_one,
            hypotheses_verified: true,
            ..Default::default()
        },
    }
}

fn require_reversible(k: &TransitionKernel, pi: &StationaryDistribution) -> Result<()> {
    if k.n() != pi.n() {
        return Err(Error::DimensionMismatch {
            expected: pi.n(),
            found: k.n(),
        });
    }
    if !k.is_reversible_for(pi) {
        return Err(Error::NotReversible {
            residual: k.detailed_balance_residual(pi),
        });
    }
    Ok(())
}

/// Asymptotic variance through the spectral measure of the centered observable.
///
/// Requires reversibility and irreducibility. Any observable is accepted; it is
/// centered first since the variance only depends on `f − E_π f`.
pub fn asymptotic_variance_spectral(
    f: &Observable,
    k: &TransitionKernel,
    pi: &StationaryDistribution,
) -> Result<VarianceResult> {
    require_reversible(k, pi)?;
    if !check_irreducible(k) {
        return Err(Error::NotIrreducible);
    }
    let dec = eigendecompose_restricted(k, pi)?;
    let f0 = center_observable(f, pi)?;
    Ok(variance_from_measure(&spectral_measure(&f0, &dec, pi)?))
}

/// Same as [`asymptotic_variance_spectral`] without the irreducibility
/// requirement; reducible kernels may yield [`VarianceValue::Infinite`].
pub fn asymptotic_variance_spectral_unchecked(
    f: &Observable,
    k: &TransitionKernel,
    pi: &StationaryDistribution,
) -> Result<VarianceResult> {
    require_reversible(k, pi)?;
    let dec = eigendecompose_restricted(k, pi)?;
    let f0 = center_observable(f, pi)?;
    let mut r = variance_from_measure(&spectral_measure(&f0, &dec, pi)?);
    r.diagnostics.hypotheses_verified = check_irreducible(k);
    Ok(r)
}

/// `γ_0, …, γ_K` with `γ_k = ⟨f, P^k f⟩_π`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutocovarianceSequence {
    pub gammas: Vec<f64>,
}

/// Lag autocovariances by repeated matrix–vector products.
pub fn lag_autocovariance(
    f: &Observable,
    k: &TransitionKernel,
    pi: &StationaryDistribution,
    kmax: usize,
) -> Result<AutocovarianceSequence> {
    ensure_centered(f, pi)?;
    if k.n() != pi.n() {
        return Err(Error::DimensionMismatch {
            expected: pi.n(),
            found: k.n(),
        });
    }
    let ip = PiInnerProduct::new(pi);
    let mut gammas = Vec::with_capacity(kmax + 1);
    let mut g = f.values().to_vec();
    gammas.push(ip.norm_sq(&g));
    for _ in 0..kmax {
        g = k.apply(&g);
        gammas.push(ip.inner(f.values(), &g));
    }
    Ok(AutocovarianceSequence { gammas })
}

/// Exact `(1/N) Var_π(Σ_{k=1..N} f(X_k))` for a stationary chain, from the
/// autocovariances: `γ₀ + 2 Σ_{k<N} (1 − k/N) γ_k`.
pub fn finite_horizon_variance(
    f: &Observable,
    k: &TransitionKernel,
    pi: &StationaryDistribution,
    horizon: usize,
) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let f0 = center_observable(f, pi)?;
    let seq = lag_autocovariance(&f0, k, pi, horizon - 1)?;
    let n = horizon as f64;
    let tail: f64 = seq
        .gammas
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, g)| (1.0 - j as f64 / n) * g)
        .sum();
    Ok(seq.gammas[0] + 2.0 * tail)
}

/// Asymptotic variance as `γ₀ + 2 Σ_{k=1..K} γ_k`, with `K` the smallest lag
/// count whose geometric tail bound `2 γ₀ ρ^{K+1} / (1 − ρ)` is below `tail_tol`.
///
/// `ρ` is the largest `|λ|` over atoms that carry mass for `f`. Periodic
/// kernels are accepted only when `f` has no mass at −1.
pub fn asymptotic_variance_autocov(
    f: &Observable,
    k: &TransitionKernel,
    pi: &StationaryDistribution,
    tail_tol: f64,
) -> Result<VarianceResult> {
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tail tolerance {tail_tol} must be positive"
        )));
    }
    require_reversible(k, pi)?;
    let period = compute_period(k)?;
    let dec = eigendecompose_restricted(k, pi)?;
    let f0 = center_observable(f, pi)?;
    let measure = spectral_measure(&f0, &dec, pi)?;

    let mass_at_minus_one = measure.mass_near_minus_one();
    if !period.is_aperiodic() && mass_at_minus_one > TOL_MASS {
        return Err(Error::NotAperiodic {
            period: period.period,
            mass: mass_at_minus_one,
        });
    }
    let rho = measure
        .atoms
        .iter()
        .filter(|a| a.weight > TOL_MASS && a.lambda >= -1.0 + TOL_ONE)
        .fold(0.0f64, |r, a| r.max(a.lambda.abs()));
    if rho >= 1.0 - TOL_ONE {
        return Err(Error::SpectralRadiusOne { rho });
    }

    let gamma0 = PiInnerProduct::new(pi).norm_sq(f0.values());
    let bound_at = |lags: usize| 2.0 * gamma0 * rho.powi(lags as i32 + 1) / (1.0 - rho);
    let lags = if gamma0 == 0.0 || rho == 0.0 {
        0
    } else {
        // smallest K with 2γ₀ρ^{K+1}/(1−ρ) ≤ tol
        let exact = ((tail_tol * (1.0 - rho) / (2.0 * gamma0)).ln() / rho.ln() - 1.0).ceil();
        let mut lags = exact.max(0.0) as usize;
        while bound_at(lags) > tail_tol {
            lags += 1;
        }
        lags
    };
    let seq = lag_autocovariance(&f0, k, pi, lags)?;
    let v = seq.gammas[0] + 2.0 * seq.gammas[1..].iter().sum::<f64>();
    Ok(VarianceResult {
        value: VarianceValue::Finite(v.max(0.0)),
        method: VarianceMethod::Autocov,
        diagnostics: VarianceDiagnostics {
            weight_near_one: measure.mass_near_one(),
            truncation_bound: Some(if gamma0 == 0.0 || rho == 0.0 {
                0.0
            } else {
                bound_at(lags)
            }),
            lags: Some(lags),
            hypotheses_verified: true,
            ..Default::default()
        },
    })
}
