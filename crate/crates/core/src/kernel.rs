//! State spaces, stationary distributions, transition kernels and observables,
//! together with the structural validators and the standard kernel families.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// Row sums and mixture weights must be within this of 1.
pub const TOL_SUM: f64 = 1e-12;
/// Detailed balance and stationarity tolerance, relative to the largest flow.
pub const TOL_REV: f64 = 1e-10;
/// Entries above this count as edges of the support graph.
pub const TOL_EDGE: f64 = 1e-14;
/// A centered observable has `|E_π f|` at most this.
pub const TOL_CENTER: f64 = 1e-12;

/// A finite state space with optional display labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    n: usize,
    labels: Option<Vec<String>>,
}

impl StateSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "state space must be nonempty".into(),
            ));
        }
        Ok(Self { n, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut space = Self::new(labels.len())?;
        let mut seen = std::collections::HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate state label {label:?}"
                )));
            }
        }
        space.labels = Some(labels);
        Ok(space)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(labels) => labels[x].clone(),
            None => x.to_string(),
        }
    }
}

/// Strictly positive probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StationaryDistribution {
    pi: Vec<f64>,
}

impl StationaryDistribution {
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if pi.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        if let Some((x, &v)) = pi
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {x} is {v}; states with zero mass must be pruned"
            )));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > TOL_SUM {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self { pi })
    }

    /// Normalizes nonnegative weights; zero weights are rejected.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        Ok(Self {
            pi: vec![1.0 / n as f64; n],
        })
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.pi
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        self.pi.iter().zip(f).map(|(p, v)| p * v).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.n() != other.n() {
            return f64::INFINITY;
        }
        self.pi
            .iter()
            .zip(&other.pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for StationaryDistribution {
    type Error = Error;

    fn try_from(pi: Vec<f64>) -> Result<Self> {
        Self::new(pi)
    }
}

impl From<StationaryDistribution> for Vec<f64> {
    fn from(d: StationaryDistribution) -> Self {
        d.pi
    }
}

/// Which validations a kernel passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KernelChecks {
    pub stochastic: bool,
    pub stationary: bool,
    pub reversible: bool,
}

impl KernelChecks {
    pub fn all(&self) -> bool {
        self.stochastic && self.stationary && self.reversible
    }
}

/// Row-stochastic transition matrix; row `x` is the law of the next state from `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    p: SquareMatrix,
    checks: KernelChecks,
}

impl TransitionKernel {
    /// Validates nonnegativity and row sums only; stationarity and
    /// reversibility flags stay false until checked against a distribution.
    pub fn new(p: SquareMatrix) -> Result<Self> {
        check_stochastic(&p)?;
        Ok(Self {
            p,
            checks: KernelChecks {
                stochastic: true,
                ..Default::default()
            },
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(SquareMatrix::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            p: SquareMatrix::identity(n),
            checks: KernelChecks {
                stochastic: true,
                stationary: true,
                reversible: true,
            },
        }
    }

    /// Two-state kernel that switches state with probability `flip`.
    pub fn two_state_flip(flip: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip) {
            return Err(Error::InvalidArgument(format!(
                "flip probability {flip} outside [0, 1]"
            )));
        }
        let p = SquareMatrix::from_rows(&[[1.0 - flip, flip], [flip, 1.0 - flip]])?;
        Ok(Self {
            p,
            checks: KernelChecks {
                stochastic: true,
                stationary: true,
                reversible: true,
            },
        })
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.p
    }

    pub fn checks(&self) -> KernelChecks {
        self.checks
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[(x, y)]
    }

    /// `(P f)(x) = Σ_y p[x,y] f(y)`
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.p.mul_vec(f)
    }

    /// Largest detailed-balance violation `|π_x p[x,y] − π_y p[y,x]|`, divided
    /// by the largest flow `π_x p[x,y]`.
    pub fn detailed_balance_residual(&self, pi: &StationaryDistribution) -> f64 {
        let w = pi.as_slice();
        let n = self.n();
        let mut scale = 0.0f64;
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                scale = scale.max(w[x] * self.p[(x, y)]);
                if y > x {
                    worst = worst.max((w[x] * self.p[(x, y)] - w[y] * self.p[(y, x)]).abs());
                }
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    /// `max_y |(πP)_y − π_y|`
    pub fn stationarity_residual(&self, pi: &StationaryDistribution) -> f64 {
        let pp = self.p.vec_mul(pi.as_slice());
        pp.iter()
            .zip(pi.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_reversible_for(&self, pi: &StationaryDistribution) -> bool {
        pi.n() == self.n() && self.detailed_balance_residual(pi) <= TOL_REV
    }

    /// Entries `> TOL_EDGE` define the directed support graph.
    pub fn support(&self) -> Vec<Vec<usize>> {
        self.p
            .rows()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &v)| v > TOL_EDGE)
                    .map(|(y, _)| y)
                    .collect()
            })
            .collect()
    }

    pub(crate) fn from_parts(p: SquareMatrix, checks: KernelChecks) -> Self {
        Self { p, checks }
    }
}

fn check_stochastic(p: &SquareMatrix) -> Result<()> {
    for (x, row) in p.rows().enumerate() {
        if let Some((y, &value)) = row
            .iter()
            .enumerate()
            .find(|(_, &v)| v < -TOL_SUM || v.is_nan())
        {
            return Err(Error::NegativeEntry { x, y, value });
        }
        let sum: f64 = row.iter().sum();
        if !((sum - 1.0).abs() <= TOL_SUM) {
            return Err(Error::RowSumViolation { x, sum });
        }
    }
    Ok(())
}

/// Validates `p` against `pi` and records which properties hold. Entries are
/// never modified; a failing property is reported through the flags.
pub fn validate_kernel(p: SquareMatrix, pi: &StationaryDistribution) -> Result<TransitionKernel> {
    if p.n() != pi.n() {
        return Err(Error::DimensionMismatch {
            expected: pi.n(),
            found: p.n(),
        });
    }
    let mut k = TransitionKernel::new(p)?;
    k.checks.stationary = k.stationarity_residual(pi) <= TOL_REV;
    k.checks.reversible = k.detailed_balance_residual(pi) <= TOL_REV;
    Ok(k)
}

/// Scales every row of a nonnegative matrix to sum to 1. Rows that sum to
/// zero are left untouched so that validation still reports them.
pub fn renormalize_rows(p: &SquareMatrix) -> SquareMatrix {
    let n = p.n();
    let sums: Vec<f64> = p.rows().map(|r| r.iter().sum()).collect();
    SquareMatrix::from_fn(n, |x, y| {
        if sums[x] > 0.0 {
            p[(x, y)] / sums[x]
        } else {
            p[(x, y)]
        }
    })
}

fn bfs_reach(adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    level[start] = Some(0);
    queue.push_back(start);
    while let Some(x) = queue.pop_front() {
        let lx = level[x].unwrap();
        for &y in &adj[x] {
            if level[y].is_none() {
                level[y] = Some(lx + 1);
                queue.push_back(y);
            }
        }
    }
    level
}

/// Strong connectivity of the support digraph.
pub fn check_irreducible(k: &TransitionKernel) -> bool {
    let adj = k.support();
    if adj.is_empty() {
        return false;
    }
    if bfs_reach(&adj, 0).iter().any(Option::is_none) {
        return false;
    }
    let mut rev = vec![Vec::new(); adj.len()];
    for (x, ys) in adj.iter().enumerate() {
        for &y in ys {
            rev[y].push(x);
        }
    }
    bfs_reach(&rev, 0).iter().all(Option::is_some)
}

/// Period of an irreducible chain and its cyclic classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub period: usize,
    /// `classes[i]` moves entirely into `classes[(i + 1) % period]`. A single
    /// class holding every state when aperiodic.
    pub classes: Vec<Vec<usize>>,
}

impl PeriodReport {
    pub fn is_aperiodic(&self) -> bool {
        self.period == 1
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Gcd of cycle lengths of the support graph, from BFS level differences.
pub fn compute_period(k: &TransitionKernel) -> Result<PeriodReport> {
    if !check_irreducible(k) {
        return Err(Error::NotIrreducible);
    }
    let adj = k.support();
    let level: Vec<usize> = bfs_reach(&adj, 0).into_iter().map(Option::unwrap).collect();
    let mut d = 0;
    for (x, ys) in adj.iter().enumerate() {
        for &y in ys {
            // level[y] <= level[x] + 1 along any edge
            d = gcd(d, level[x] + 1 - level[y]);
        }
    }
    let mut classes = vec![Vec::new(); d];
    for (x, &l) in level.iter().enumerate() {
        classes[l % d].push(x);
    }
    Ok(PeriodReport { period: d, classes })
}

/// Independent sampling from π: every row equals π.
pub fn make_iid(pi: &StationaryDistribution) -> TransitionKernel {
    let n = pi.n();
    let w = pi.as_slice();
    TransitionKernel::from_parts(
        SquareMatrix::from_fn(n, |_, y| w[y]),
        KernelChecks {
            stochastic: true,
            stationary: true,
            reversible: true,
        },
    )
}

/// Metropolis–Hastings correction of `proposal` towards `pi`.
///
/// Off-diagonal entries are formed from the symmetric flow
/// `min(π_x q[x,y], π_y q[y,x])` so detailed balance holds to rounding.
pub fn make_metropolis_hastings(
    proposal: &TransitionKernel,
    pi: &StationaryDistribution,
) -> Result<TransitionKernel> {
    let n = proposal.n();
    if pi.n() != n {
        return Err(Error::DimensionMismatch {
            expected: pi.n(),
            found: n,
        });
    }
    let w = pi.as_slice();
    let q = proposal.matrix();
    let mut p = SquareMatrix::zeros(n);
    for x in 0..n {
        let mut off = 0.0;
        for y in 0..n {
            if y == x || q[(x, y)] <= 0.0 {
                continue;
            }
            let flow = (w[x] * q[(x, y)]).min(w[y] * q[(y, x)].max(0.0));
            let v = flow / w[x];
            p[(x, y)] = v;
            off += v;
        }
        p[(x, x)] = 1.0 - off;
    }
    let mut k = TransitionKernel::new(p)?;
    k.checks.stationary = k.stationarity_residual(pi) <= TOL_REV;
    k.checks.reversible = k.detailed_balance_residual(pi) <= TOL_REV;
    Ok(k)
}

/// `Σ α_k P_k`. The result inherits a flag only when every component has it.
pub fn make_mixture(kernels: &[TransitionKernel], alpha: &[f64]) -> Result<TransitionKernel> {
    let Some(first) = kernels.first() else {
        return Err(Error::BadWeights("no kernels to mix".into()));
    };
    if alpha.len() != kernels.len() {
        return Err(Error::BadWeights(format!(
            "{} weights for {} kernels",
            alpha.len(),
            kernels.len()
        )));
    }
    if let Some(a) = alpha.iter().find(|a| !(**a >= 0.0) || !a.is_finite()) {
        return Err(Error::BadWeights(format!(
            "weight {a} is not a probability"
        )));
    }
    let total: f64 = alpha.iter().sum();
    if (total - 1.0).abs() > TOL_SUM {
        return Err(Error::BadWeights(format!("weights sum to {total}")));
    }
    let n = first.n();
    if let Some(k) = kernels.iter().find(|k| k.n() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: k.n(),
        });
    }
    let mut p = SquareMatrix::zeros(n);
    let mut checks = KernelChecks {
        stochastic: true,
        stationary: true,
        reversible: true,
    };
    for (k, &a) in kernels.iter().zip(alpha) {
        p = p.add(&k.matrix().scaled(a));
        checks.stationary &= k.checks.stationary;
        checks.reversible &= k.checks.reversible;
    }
    check_stochastic(&p)?;
    Ok(TransitionKernel::from_parts(p, checks))
}

/// `β I + (1 − β) P`
pub fn make_lazy(k: &TransitionKernel, beta: f64) -> Result<TransitionKernel> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidArgument(format!(
            "laziness {beta} outside [0, 1]"
        )));
    }
    let n = k.n();
    let mut p = k.matrix().scaled(1.0 - beta);
    for x in 0..n {
        let off: f64 = (0..n).filter(|&y| y != x).map(|y| p[(x, y)]).sum();
        p[(x, x)] = 1.0 - off;
    }
    Ok(TransitionKernel::from_parts(p, k.checks))
}

/// A real function on the state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    f: Vec<f64>,
    centered: bool,
}

impl Observable {
    pub fn new(f: Vec<f64>) -> Self {
        Self { f, centered: false }
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }
}

impl From<Vec<f64>> for Observable {
    fn from(f: Vec<f64>) -> Self {
        Self::new(f)
    }
}

/// `f − E_π(f)`, flagged centered.
pub fn center_observable(f: &Observable, pi: &StationaryDistribution) -> Result<Observable> {
    if f.n() != pi.n() {
        return Err(Error::DimensionMismatch {
            expected: pi.n(),
            found: f.n(),
        });
    }
    let mean = pi.mean(&f.f);
    let mut g: Vec<f64> = f.f.iter().map(|v| v - mean).collect();
    // one refinement pass brings |E_π g| down to rounding of the second mean
    let residual = pi.mean(&g);
    if residual != 0.0 {
        g.iter_mut().for_each(|v| *v -= residual);
    }
    Ok(Observable {
        f: g,
        centered: true,
    })
}
