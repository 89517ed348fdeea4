//! Efficiency ordering of reversible Markov kernels on finite state spaces.
//!
//! For a kernel `P` reversible with respect to `π` and an observable `f`, the
//! asymptotic variance `v(f, P) = lim N·Var(mean of f over N stationary steps)`
//! equals `∫ (1 + λ)/(1 − λ) dE_f(λ)` over the spectral measure of `f`. `P`
//! efficiency-dominates `Q` when `v(f, P) ≤ v(f, Q)` for every `f`, which holds
//! exactly when `Q − P` is positive on mean-zero functions.
//!
//! - [`kernel`]: distributions, kernels, observables, validators and the
//!   standard kernel constructors.
//! - [`spectral`]: restricted eigendecomposition, spectral measures, and the
//!   spectral and autocovariance routes to `v(f, P)`.
//! - [`dominance`]: efficiency, Peskun and antithetic checks, mixtures,
//!   Hasse diagrams and the Loewner inversion check.
//! - [`simulate`]: seeded stationary paths and batch-means estimates.

// `!(x > 0.0)` style tests are there to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dominance;
pub mod error;
pub mod kernel;
pub mod matrix;
pub mod simulate;
pub mod spectral;

pub use dominance::{
    covariance_dominance, covariance_dominance_with, efficiency_dominates,
    efficiency_dominates_with, is_antithetic, loewner_inversion_check, mixture_dominance_check,
    partial_order_diagram, partial_order_diagram_with, peskun_dominates, DominanceOptions,
    DominanceReport, HasseDiagram, LoewnerVerdicts, MixtureReport, Relation,
};
pub use error::{Error, Result};
pub use kernel::{
    center_observable, check_irreducible, compute_period, make_iid, make_lazy,
    make_metropolis_hastings, make_mixture, validate_kernel, Observable, PeriodReport, StateSpace,
    StationaryDistribution, TransitionKernel,
};
pub use matrix::SquareMatrix;
pub use simulate::{
    empirical_asymptotic_variance, empirical_vs_spectral, sample_chain, BatchMethod, ChainPath,
    EmpiricalVariance, SimulationComparison, SimulationOptions,
};
pub use spectral::{
    asymptotic_variance_autocov, asymptotic_variance_spectral, eigendecompose_restricted,
    lag_autocovariance, spectral_measure, SpectralDecomposition, SpectralMeasure, VarianceResult,
    VarianceValue,
};

/// Every tolerance in one place, for reports.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Tolerances {
    pub tol_sum: f64,
    pub tol_rev: f64,
    pub tol_edge: f64,
    pub tol_center: f64,
    pub tol_one: f64,
    pub tol_mass: f64,
    pub tol_pos: f64,
    pub tol_pesk: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_sum: kernel::TOL_SUM,
            tol_rev: kernel::TOL_REV,
            tol_edge: kernel::TOL_EDGE,
            tol_center: kernel::TOL_CENTER,
            tol_one: spectral::TOL_ONE,
            tol_mass: spectral::TOL_MASS,
            tol_pos: dominance::TOL_POS,
            tol_pesk: dominance::TOL_PESK,
        }
    }
}
