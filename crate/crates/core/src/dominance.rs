//! Orderings of reversible kernels.
//!
//! `P` efficiency-dominates `Q` (smaller asymptotic variance for every
//! observable) exactly when `Q − P` is a positive operator on `L²₀(π)`, so
//! every efficiency verdict here is a sign test on the smallest eigenvalue of
//! the symmetrized, constant-deflated difference `D^{1/2}(Q − P)D^{-1/2}`.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{
    check_irreducible, make_mixture, StationaryDistribution, TransitionKernel, TOL_REV,
};
use crate::matrix::{spd_inverse, symmetric_eigen, SquareMatrix};
use crate::spectral::{symmetrize, MeanZeroBasis};

/// Positivity tolerance, relative to `max(1, ‖difference‖₂)`.
pub const TOL_POS: f64 = 1e-8;
/// Slack for entrywise Peskun comparisons.
pub const TOL_PESK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// The first kernel dominates the second.
    Dominates,
    /// The second kernel dominates the first.
    Dominated,
    Equal,
    Incomparable,
}

impl Relation {
    /// True for `Dominates` and `Equal`.
    pub fn holds(self) -> bool {
        matches!(self, Self::Dominates | Self::Equal)
    }

    pub fn reversed(self) -> Self {
        match self {
            Self::Dominates => Self::Dominated,
            Self::Dominated => Self::Dominates,
            r => r,
        }
    }

    fn from_directions(forward: bool, backward: bool) -> Self {
        match (forward, backward) {
            (true, true) => Self::Equal,
            (true, false) => Self::Dominates,
            (false, true) => Self::Dominated,
            (false, false) => Self::Incomparable,
        }
    }
}

/// An off-diagonal entry where the first kernel moves less mass than the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeskunViolation {
    pub x: usize,
    pub y: usize,
    pub p: f64,
    pub q: f64,
}

impl PeskunViolation {
    pub fn shortfall(&self) -> f64 {
        self.q - self.p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub relation: Relation,
    /// Smallest eigenvalue of `Q − P` on `L²₀(π)`; absent for Peskun reports.
    pub min_eig_qp: Option<f64>,
    /// Smallest eigenvalue of `P − Q` on `L²₀(π)`.
    pub min_eig_pq: Option<f64>,
    /// Effective tolerance the verdict was taken against.
    pub tolerance: f64,
    /// `max |P − Q|` entrywise.
    pub max_entry_diff: f64,
    /// Peskun violations of the forward direction, largest shortfall first.
    pub witness: Vec<PeskunViolation>,
    pub hypotheses_verified: bool,
}

impl DominanceReport {
    pub fn dominates(&self) -> bool {
        self.relation.holds()
    }

    /// The verdict phrased as a statement about asymptotic variances.
    pub fn efficiency_summary(&self) -> &'static str {
        match self.relation {
            Relation::Dominates => "v(f,P) <= v(f,Q) for every observable f",
            Relation::Dominated => "v(f,Q) <= v(f,P) for every observable f",
            Relation::Equal => "v(f,P) = v(f,Q) for every observable f",
            Relation::Incomparable => "each kernel has lower variance for some observable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceOptions {
    pub tol_pos: f64,
    /// Require both kernels to be irreducible; disabling marks reports as unverified.
    pub check_hypotheses: bool,
}

impl Default for DominanceOptions {
    fn default() -> Self {
        Self {
            tol_pos: TOL_POS,
            check_hypotheses: true,
        }
    }
}

fn check_dims(n: usize, kernels: &[&TransitionKernel]) -> Result<()> {
    for k in kernels {
        if k.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: k.n(),
            });
        }
    }
    Ok(())
}

/// Distinguishes "stationary for another distribution" from "stationary but not reversible".
fn symmetrize_for(k: &TransitionKernel, pi: &StationaryDistribution) -> Result<SquareMatrix> {
    match symmetrize(k, pi) {
        Err(Error::NotReversible { residual }) => {
            let drift = k.stationarity_residual(pi);
            if drift > TOL_REV {
                Err(Error::DifferentStationary { max_diff: drift })
            } else {
                Err(Error::NotReversible { residual })
            }
        }
        other => other,
    }
}

/// Eigenvalues (ascending) of `Q − P` restricted to `L²₀(π)`.
pub fn restricted_difference_spectrum(
    p: &TransitionKernel,
    q: &TransitionKernel,
    pi: &StationaryDistribution,
) -> Result<Vec<f64>> {
    check_dims(pi.n(), &[p, q])?;
    let sp = symmetrize_for(p, pi)?;
    let sq = symmetrize_for(q, pi)?;
    let basis = MeanZeroBasis::new(pi);
    Ok(symmetric_eigen(&basis.compress(&sq.sub(&sp)))?.eigenvalues)
}

/// Eigenvalues (ascending) of `P` restricted to `L²₀(π)`, without eigenvectors.
pub fn restricted_spectrum(p: &TransitionKernel, pi: &StationaryDistribution) -> Result<Vec<f64>> {
    check_dims(pi.n(), &[p])?;
    let sp = symmetrize_for(p, pi)?;
    Ok(symmetric_eigen(&MeanZeroBasis::new(pi).compress(&sp))?.eigenvalues)
}

fn scaled_tol(tol: f64, spectrum: &[f64]) -> f64 {
    let norm = spectrum.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    tol * norm.max(1.0)
}

/// Covariance dominance: does `⟨f, P f⟩ ≤ ⟨f, Q f⟩` hold for all centered `f`?
pub fn covariance_dominance(
    p: &TransitionKernel,
    q: &TransitionKernel,
    pi: &StationaryDistribution,
) -> Result<DominanceReport> {
    covariance_dominance_with(p, q, pi, &DominanceOptions::default())
}

pub fn covariance_dominance_with(
    p: &TransitionKernel,
    q: &TransitionKernel,
    pi: &StationaryDistribution,
    opts: &DominanceOptions,
) -> Result<DominanceReport> {
    let spectrum = restricted_difference_spectrum(p, q, pi)?;
    let irreducible = check_irreducible(p) && check_irreducible(q);
    if opts.check_hypotheses && !irreducible {
        return Err(Error::NotIrreducible);
    }
    let n = pi.n();
    let (min_qp, min_pq) = match (spectrum.first(), spectrum.last()) {
        (Some(&lo), Some(&hi)) => (lo, -hi),
        _ => (0.0, 0.0),
    };
    let tolerance = scaled_tol(opts.tol_pos, &spectrum);
    let forward = min_qp >= -tolerance;
    let backward = min_pq >= -tolerance;
    let max_entry_diff = p.matrix().max_abs_diff(q.matrix());
    let relation = if forward && backward && max_entry_diff > n as f64 * tolerance {
        // Both spectral tests pass inside the band but the matrices differ:
        // keep the direction with the larger margin rather than calling them equal.
        if min_qp >= min_pq {
            Relation::Dominates
        } else {
            Relation::Dominated
        }
    } else {
        Relation::from_directions(forward, backward)
    };
    Ok(DominanceReport {
        relation,
        min_eig_qp: Some(min_qp),
        min_eig_pq: Some(min_pq),
        tolerance,
        max_entry_diff,
        witness: Vec::new(),
        hypotheses_verified: irreducible,
    })
}

/// Efficiency dominance, decided through the covariance criterion.
pub fn efficiency_dominates(
    p: &TransitionKernel,
    q: &TransitionKernel,
    pi: &StationaryDistribution,
) -> Result<DominanceReport> {
    covariance_dominance(p, q, pi)
}

pub fn efficiency_dominates_with(
    p: &TransitionKernel,
    q: &TransitionKernel,
    pi: &StationaryDistribution,
    opts: &DominanceOptions,
) -> Result<DominanceReport> {
    covariance_dominance_with(p, q, pi, opts)
}

fn peskun_violations(p: &TransitionKernel, q: &TransitionKernel) -> Vec<PeskunViolation> {
    let n = p.n();
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x != y && p.get(x, y) < q.get(x, y) - TOL_PESK {
                out.push(PeskunViolation {
                    x,
                    y,
                    p: p.get(x, y),
                    q: q.get(x, y),
                });
            }
        }
    }
    out.sort_by(|a, b| {
        b.shortfall()
            .total_cmp(&a.shortfall())
            .then((a.x, a.y).cmp(&(b.x, b.y)))
    });
    out
}

/// Peskun dominance: `p[x,y] ≥ q[x,y]` off the diagonal, for every state.
pub fn peskun_dominates(
    p: &TransitionKernel,
    q: &TransitionKernel,
    pi: &StationaryDistribution,
) -> Result<DominanceReport> {
    check_dims(pi.n(), &[p, q])?;
    let witness = peskun_violations(p, q);
    let backward = peskun_violations(q, p).is_empty();
    Ok(DominanceReport {
        relation: Relation::from_directions(witness.is_empty(), backward),
        min_eig_qp: None,
        min_eig_pq: None,
        tolerance: TOL_PESK,
        max_entry_diff: p.matrix().max_abs_diff(q.matrix()),
        witness,
        hypotheses_verified: true,
    })
}

/// Restricted spectrum inside `[−1, 0]` up to `TOL_POS`.
pub fn is_antithetic(p: &TransitionKernel, pi: &StationaryDistribution) -> Result<bool> {
    let spectrum = restricted_spectrum(p, pi)?;
    Ok(spectrum.last().is_none_or(|&hi| hi <= TOL_POS))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureReport {
    /// Smallest eigenvalue of `Q_k − P_k` on `L²₀(π)`, per component.
    pub component_min_eigs: Vec<f64>,
    /// Every `Q_k − P_k` is positive within tolerance.
    pub premise_holds: bool,
    /// Dominance verdict for `Σ α_k P_k` against `Σ α_k Q_k`.
    pub conclusion: DominanceReport,
    /// False only if the premise held and the conclusion did not.
    pub consistent: bool,
}

/// Component-wise positivity against dominance of the mixtures.
pub fn mixture_dominance_check(
    ps: &[TransitionKernel],
    qs: &[TransitionKernel],
    alpha: &[f64],
    pi: &StationaryDistribution,
) -> Result<MixtureReport> {
    if ps.len() != qs.len() {
        return Err(Error::BadWeights(format!(
            "{} P components against {} Q components",
            ps.len(),
            qs.len()
        )));
    }
    let mut component_min_eigs = Vec::with_capacity(ps.len());
    let mut premise_holds = true;
    for (p, q) in ps.iter().zip(qs) {
        let spectrum = restricted_difference_spectrum(p, q, pi)?;
        let lo = spectrum.first().copied().unwrap_or(0.0);
        premise_holds &= lo >= -scaled_tol(TOL_POS, &spectrum);
        component_min_eigs.push(lo);
    }
    let p = make_mixture(ps, alpha)?;
    let q = make_mixture(qs, alpha)?;
    let conclusion = covariance_dominance(&p, &q, pi)?;
    let consistent = !premise_holds || conclusion.dominates();
    Ok(MixtureReport {
        component_min_eigs,
        premise_holds,
        conclusion,
        consistent,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HasseNode {
    /// Kernels found equal, in input order; the first is the representative.
    pub names: Vec<String>,
}

impl HasseNode {
    pub fn label(&self) -> String {
        self.names.join(" = ")
    }
}

/// Covering relation of efficiency dominance over a set of kernels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HasseDiagram {
    pub nodes: Vec<HasseNode>,
    /// `(a, b)`: node `a` dominates node `b` with nothing in between.
    pub edges: Vec<(usize, usize)>,
    /// Transitivity or merge inconsistencies found along the way.
    pub diagnostics: Vec<String>,
}

impl HasseDiagram {
    /// One `a > b` line per covering edge.
    pub fn edge_list(&self) -> String {
        self.edges
            .iter()
            .map(|&(a, b)| format!("{} > {}\n", self.nodes[a].label(), self.nodes[b].label()))
            .collect()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

pub fn partial_order_diagram(
    kernels: &[(String, TransitionKernel)],
    pi: &StationaryDistribution,
) -> Result<HasseDiagram> {
    partial_order_diagram_with(kernels, pi, &DominanceOptions::default())
}

/// Pairwise dominance, equal kernels merged, then transitive reduction.
pub fn partial_order_diagram_with(
    kernels: &[(String, TransitionKernel)],
    pi: &StationaryDistribution,
    opts: &DominanceOptions,
) -> Result<HasseDiagram> {
    let mut names = HashSet::new();
    for (name, k) in kernels {
        if !names.insert(name.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "duplicate kernel name {name:?}"
            )));
        }
        if k.n() != pi.n() {
            return Err(Error::DimensionMismatch {
                expected: pi.n(),
                found: k.n(),
            });
        }
    }
    let m = kernels.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    let verdicts: Vec<Relation> = pairs
        .par_iter()
        .map(|&(i, j)| {
            covariance_dominance_with(&kernels[i].1, &kernels[j].1, pi, opts).map(|r| r.relation)
        })
        .collect::<Result<_>>()?;
    let mut rel = vec![vec![Relation::Equal; m]; m];
    for (&(i, j), &r) in pairs.iter().zip(&verdicts) {
        rel[i][j] = r;
        rel[j][i] = r.reversed();
    }

    let mut diagnostics = Vec::new();
    let mut parent: Vec<usize> = (0..m).collect();
    for &(i, j) in &pairs {
        if rel[i][j] == Relation::Equal {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut node_of = vec![usize::MAX; m];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..m {
        let root = find(&mut parent, i);
        if node_of[root] == usize::MAX {
            node_of[root] = members.len();
            members.push(Vec::new());
        }
        node_of[i] = node_of[root];
        members[node_of[i]].push(i);
    }
    for group in &members {
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a + 1..] {
                if rel[i][j] != Relation::Equal {
                    diagnostics.push(format!(
                        "{} and {} merged through other kernels but compare as {:?}",
                        kernels[i].0, kernels[j].0, rel[i][j]
                    ));
                }
            }
        }
    }

    let g = members.len();
    let reps: Vec<usize> = members.iter().map(|grp| grp[0]).collect();
    let mut above = vec![vec![false; g]; g];
    for a in 0..g {
        for b in 0..g {
            above[a][b] = a != b && rel[reps[a]][reps[b]] == Relation::Dominates;
        }
    }
    let label = |a: usize| kernels[reps[a]].0.as_str();
    for a in 0..g {
        for b in 0..g {
            if !above[a][b] {
                continue;
            }
            for c in 0..g {
                if above[b][c] && !above[a][c] {
                    diagnostics.push(format!(
                        "transitivity: {} > {} > {} but {} vs {} is {:?}",
                        label(a),
                        label(b),
                        label(c),
                        label(a),
                        label(c),
                        rel[reps[a]][reps[c]]
                    ));
                }
            }
        }
    }

    // reachability over the verdict digraph
    let mut reach = above.clone();
    for mid in 0..g {
        let through = reach[mid].clone();
        for row in reach.iter_mut().filter(|r| r[mid]) {
            row.iter_mut().zip(&through).for_each(|(ab, &mb)| *ab |= mb);
        }
    }
    let cyclic = (0..g).any(|a| reach[a][a]);
    if cyclic {
        diagnostics.push("verdict digraph has a cycle; covering edges not reduced".into());
    }
    let mut edges = Vec::new();
    for (a, row) in above.iter().enumerate() {
        for (b, &ab) in row.iter().enumerate() {
            if !ab {
                continue;
            }
            let implied = !cyclic && (0..g).any(|c| c != b && row[c] && reach[c][b]);
            if !implied {
                edges.push((a, b));
            }
        }
    }

    let nodes = members
        .iter()
        .map(|grp| HasseNode {
            names: grp.iter().map(|&i| kernels[i].0.clone()).collect(),
        })
        .collect();
    Ok(HasseDiagram {
        nodes,
        edges,
        diagnostics,
    })
}

/// Both Loewner verdicts for a pair of symmetric positive definite matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoewnerVerdicts {
    /// `t ⪯ m`
    pub order_holds: bool,
    /// `m⁻¹ ⪯ t⁻¹`
    pub inverted_holds: bool,
    /// Smallest eigenvalue of `m − t`.
    pub order_min_eig: f64,
    /// Smallest eigenvalue of `t⁻¹ − m⁻¹`.
    pub inverted_min_eig: f64,
    pub order_tolerance: f64,
    pub inverted_tolerance: f64,
}

impl LoewnerVerdicts {
    pub fn agree(&self) -> bool {
        self.order_holds == self.inverted_holds
    }

    /// Agreement, or a disagreement explained by a minimum eigenvalue lying
    /// within `band` times its tolerance of zero.
    pub fn consistent_within(&self, band: f64) -> bool {
        self.agree()
            || self.order_min_eig.abs() <= band * self.order_tolerance
            || self.inverted_min_eig.abs() <= band * self.inverted_tolerance
    }
}

fn require_spd(a: &SquareMatrix) -> Result<()> {
    let scale = a.frobenius_norm().max(1.0);
    let asymmetry = a.asymmetry();
    if asymmetry > TOL_REV * scale {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let lo = symmetric_eigen(a)?
        .eigenvalues
        .first()
        .copied()
        .unwrap_or(f64::INFINITY);
    if !(lo > TOL_POS) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
    }
    Ok(())
}

/// Checks `t ⪯ m` and, independently, `m⁻¹ ⪯ t⁻¹`.
pub fn loewner_inversion_check(t: &SquareMatrix, m: &SquareMatrix) -> Result<LoewnerVerdicts> {
    if t.n() != m.n() {
        return Err(Error::DimensionMismatch {
            expected: t.n(),
            found: m.n(),
        });
    }
    require_spd(t)?;
    require_spd(m)?;
    let order = symmetric_eigen(&m.sub(t))?.eigenvalues;
    let inverted = symmetric_eigen(&spd_inverse(t)?.sub(&spd_inverse(m)?))?.eigenvalues;
    let order_min_eig = order.first().copied().unwrap_or(0.0);
    let inverted_min_eig = inverted.first().copied().unwrap_or(0.0);
    let order_tolerance = scaled_tol(TOL_POS, &order);
    let inverted_tolerance = scaled_tol(TOL_POS, &inverted);
    Ok(LoewnerVerdicts {
        order_holds: order_min_eig >= -order_tolerance,
        inverted_holds: inverted_min_eig >= -inverted_tolerance,
        order_min_eig,
        inverted_min_eig,
        order_tolerance,
        inverted_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{make_iid, make_lazy, make_metropolis_hastings};

    fn uniform(n: usize) -> StationaryDistribution {
        StationaryDistribution::uniform(n).unwrap()
    }

    fn flip(p: f64) -> TransitionKernel {
        TransitionKernel::two_state_flip(p).unwrap()
    }

    #[test]
    fn flip_pairs() {
        let pi = uniform(2);
        let r = covariance_dominance(&flip(0.9), &flip(0.6), &pi).unwrap();
        assert_eq!(r.relation, Relation::Dominates);
        assert!((r.min_eig_qp.unwrap() - 0.6).abs() < 1e-14);

        let r = covariance_dominance(&flip(0.6), &flip(0.6), &pi).unwrap();
        assert_eq!(r.relation, Relation::Equal);
        assert_eq!(r.min_eig_qp, Some(0.0));
        assert_eq!(r.min_eig_pq, Some(0.0));

        let r = covariance_dominance(&flip(0.9), &make_iid(&pi), &pi).unwrap();
        assert_eq!(r.relation, Relation::Dominates);
        assert!((r.min_eig_qp.unwrap() - 0.8).abs() < 1e-14);

        let r = efficiency_dominates(&make_iid(&pi), &flip(0.25), &pi).unwrap();
        assert_eq!(r.relation, Relation::Dominates);
        let r = efficiency_dominates(&flip(0.6), &flip(0.9), &pi).unwrap();
        assert_eq!(r.relation, Relation::Dominated);
    }

    #[test]
    fn dominance_errors() {
        let pi = uniform(2);
        assert_eq!(
            covariance_dominance(&flip(0.5), &TransitionKernel::identity(2), &pi),
            Err(Error::NotIrreducible)
        );
        let r = covariance_dominance_with(
            &flip(0.5),
            &TransitionKernel::identity(2),
            &pi,
            &DominanceOptions {
                check_hypotheses: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!r.hypotheses_verified);
        assert_eq!(r.relation, Relation::Dominates);

        let skewed = StationaryDistribution::new(vec![0.75, 0.25]).unwrap();
        let mh = make_metropolis_hastings(&flip(0.5), &skewed).unwrap();
        assert!(matches!(
            covariance_dominance(&flip(0.5), &mh, &pi),
            Err(Error::DifferentStationary { .. })
        ));
        assert!(matches!(
            covariance_dominance(&flip(0.5), &TransitionKernel::identity(3), &pi),
            Err(Error::DimensionMismatch { .. })
        ));
        let rot = TransitionKernel::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
            .unwrap();
        assert!(matches!(
            covariance_dominance(&rot, &make_iid(&uniform(3)), &uniform(3)),
            Err(Error::NotReversible { .. })
        ));
    }

    #[test]
    fn peskun_examples() {
        let pi = uniform(2);
        assert!(peskun_dominates(&flip(0.9), &flip(0.6), &pi)
            .unwrap()
            .dominates());
        let lazy = make_lazy(&flip(0.7), 0.4).unwrap();
        assert!(peskun_dominates(&flip(0.7), &lazy, &pi)
            .unwrap()
            .dominates());
        let r = peskun_dominates(&flip(0.6), &flip(0.9), &pi).unwrap();
        assert_eq!(r.relation, Relation::Dominated);
        assert_eq!(r.witness.len(), 2);
        assert_eq!(
            r.witness[0],
            PeskunViolation {
                x: 0,
                y: 1,
                p: 0.6,
                q: 0.9
            }
        );
        assert!(matches!(
            peskun_dominates(&flip(0.6), &TransitionKernel::identity(3), &pi),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn antithetic_examples() {
        let pi = uniform(2);
        assert!(is_antithetic(&flip(0.9), &pi).unwrap());
        assert!(is_antithetic(&make_iid(&pi), &pi).unwrap());
        assert!(!is_antithetic(&flip(0.25), &pi).unwrap());
    }

    #[test]
    fn mixture_with_single_component_matches_direct_comparison() {
        let pi = uniform(2);
        let r = mixture_dominance_check(&[flip(0.9)], &[flip(0.6)], &[1.0], &pi).unwrap();
        let direct = covariance_dominance(&flip(0.9), &flip(0.6), &pi).unwrap();
        assert_eq!(r.conclusion, direct);
        assert!(r.premise_holds && r.consistent);
    }

    #[test]
    fn mixture_converse_counterexample() {
        let pi = uniform(2);
        let (p1, p2) = (flip(0.9), flip(0.3));
        let r = mixture_dominance_check(&[p1.clone(), p2.clone()], &[p2, p1], &[0.5, 0.5], &pi)
            .unwrap();
        assert_eq!(r.conclusion.relation, Relation::Equal);
        assert!(!r.premise_holds);
        assert!(r.component_min_eigs[0] > 0.0 && r.component_min_eigs[1] < 0.0);
    }

    #[test]
    fn hasse_chain_of_flips() {
        let pi = uniform(2);
        let ks = vec![
            ("f25".to_string(), flip(0.25)),
            ("f90".to_string(), flip(0.9)),
            ("f50".to_string(), flip(0.5)),
        ];
        let h = partial_order_diagram(&ks, &pi).unwrap();
        assert_eq!(h.nodes.len(), 3);
        assert_eq!(h.edges, vec![(1, 2), (2, 0)]);
        assert_eq!(h.edge_list(), "f90 > f50\nf50 > f25\n");
        assert!(h.diagnostics.is_empty());
    }

    #[test]
    fn hasse_merges_equal_kernels() {
        let pi = uniform(2);
        let ks = vec![("a".to_string(), flip(0.4)), ("b".to_string(), flip(0.4))];
        let h = partial_order_diagram(&ks, &pi).unwrap();
        assert_eq!(
            h.nodes,
            vec![HasseNode {
                names: vec!["a".into(), "b".into()]
            }]
        );
        assert!(h.edges.is_empty());
    }

    #[test]
    fn hasse_rejects_mixed_dimensions_and_duplicates() {
        let pi = uniform(2);
        let three = make_iid(&uniform(3));
        let ks = vec![("a".to_string(), flip(0.7)), ("mh".to_string(), three)];
        assert!(matches!(
            partial_order_diagram(&ks, &pi),
            Err(Error::DimensionMismatch { .. })
        ));
        let ks = vec![("a".to_string(), flip(0.7)), ("a".to_string(), flip(0.2))];
        assert!(matches!(
            partial_order_diagram(&ks, &pi),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn loewner_examples() {
        let v = loewner_inversion_check(
            &SquareMatrix::identity(2),
            &SquareMatrix::identity(2).scaled(2.0),
        )
        .unwrap();
        assert!(v.order_holds && v.inverted_holds);
        let t = SquareMatrix::from_rows(&[[1.0, 0.0], [0.0, 3.0]]).unwrap();
        let m = SquareMatrix::from_rows(&[[2.0, 0.0], [0.0, 2.0]]).unwrap();
        let v = loewner_inversion_check(&t, &m).unwrap();
        assert!(!v.order_holds && !v.inverted_holds);
        assert!((v.order_min_eig + 1.0).abs() < 1e-14);
        assert!((v.inverted_min_eig - (1.0 / 3.0 - 0.5)).abs() < 1e-14);
    }

    #[test]
    fn loewner_errors() {
        let bad = SquareMatrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            loewner_inversion_check(&bad, &SquareMatrix::identity(2)),
            Err(Error::NotSymmetric { .. })
        ));
        let singular = SquareMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(
            loewner_inversion_check(&SquareMatrix::identity(2), &singular),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
