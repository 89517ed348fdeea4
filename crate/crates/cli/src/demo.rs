//! Built-in problem files.

use anyhow::{ensure, Result};
use mcorder::{
    make_iid, make_lazy, make_metropolis_hastings, make_mixture, SquareMatrix,
    StationaryDistribution, TransitionKernel,
};

use crate::problem::ProblemFile;

fn entry(name: &str, k: &TransitionKernel) -> (String, SquareMatrix) {
    (name.to_string(), k.matrix().clone())
}

/// One `flip{p}` kernel per switching probability, uniform π, `f = (1, −1)`.
pub fn two_state(ps: &[f64]) -> Result<ProblemFile> {
    ensure!(!ps.is_empty(), "need at least one flip probability");
    let mut kernels = Vec::with_capacity(ps.len());
    for &p in ps {
        let k = TransitionKernel::two_state_flip(p)?;
        let name = format!("flip{p}");
        ensure!(
            kernels.iter().all(|(n, _)| *n != name),
            "flip probability {p} given twice"
        );
        kernels.push(entry(&name, &k));
    }
    Ok(ProblemFile {
        n: 2,
        pi: vec![0.5, 0.5],
        kernels,
        observables: vec![("f".into(), vec![1.0, -1.0])],
    })
}

/// Lazy nearest-neighbour walk on an `n`-cycle, with the i.i.d. kernel for reference.
pub fn cycle_walk(n: usize, beta: f64) -> Result<ProblemFile> {
    ensure!(n >= 3, "a cycle needs at least 3 states");
    let pi = StationaryDistribution::uniform(n)?;
    let step = TransitionKernel::new(SquareMatrix::from_fn(n, |x, y| {
        if (x + 1) % n == y || (y + 1) % n == x {
            0.5
        } else {
            0.0
        }
    }))?;
    let walk = make_lazy(&step, beta)?;
    let tau = std::f64::consts::TAU;
    Ok(ProblemFile {
        n,
        pi: pi.as_slice().to_vec(),
        kernels: vec![entry("walk", &walk), entry("iid", &make_iid(&pi))],
        observables: vec![
            (
                "cosine".into(),
                (0..n).map(|x| (tau * x as f64 / n as f64).cos()).collect(),
            ),
            (
                "indicator0".into(),
                (0..n).map(|x| if x == 0 { 1.0 } else { 0.0 }).collect(),
            ),
        ],
    })
}

/// Metropolis–Hastings on `{0, …, n−1}` for a discretized Gaussian target
/// centred in the middle, with a local and a global proposal.
pub fn mh_discrete(n: usize, width: Option<f64>) -> Result<ProblemFile> {
    ensure!(n >= 2, "need at least 2 states");
    let mid = (n - 1) as f64 / 2.0;
    let width = width.unwrap_or(n as f64 / 6.0);
    ensure!(width > 0.0, "width must be positive");
    let weights: Vec<f64> = (0..n)
        .map(|x| (-0.5 * ((x as f64 - mid) / width).powi(2)).exp())
        .collect();
    let pi = StationaryDistribution::from_weights(&weights)?;
    // reflecting ±1 proposal; the boundary keeps the rejected half as a hold
    let local = TransitionKernel::new(SquareMatrix::from_fn(n, |x, y| {
        let edge = (x == 0 || x == n - 1) as usize as f64;
        if x.abs_diff(y) == 1 {
            0.5
        } else if x == y {
            0.5 * edge
        } else {
            0.0
        }
    }))?;
    let global = make_iid(&StationaryDistribution::uniform(n)?);
    let mh_local = make_metropolis_hastings(&local, &pi)?;
    let mh_global = make_metropolis_hastings(&global, &pi)?;
    Ok(ProblemFile {
        n,
        pi: pi.as_slice().to_vec(),
        kernels: vec![
            entry("mh-local", &mh_local),
            entry("mh-global", &mh_global),
            entry("iid", &make_iid(&pi)),
        ],
        observables: vec![
            ("position".into(), (0..n).map(|x| x as f64).collect()),
            (
                "upper".into(),
                (0..n)
                    .map(|x| if x as f64 > mid { 1.0 } else { 0.0 })
                    .collect(),
            ),
        ],
    })
}

/// `P1` strictly dominates `P2`; pairing `(P1, P2)` against `(P2, P1)` with
/// equal weights gives identical mixtures although the second component pair
/// is ordered the wrong way.
pub fn mixture_counterexample() -> Result<ProblemFile> {
    let n = 3;
    let pi = StationaryDistribution::uniform(n)?;
    let p1 = make_iid(&pi);
    let p2 = make_lazy(&p1, 0.5)?;
    let alpha = [0.5, 0.5];
    let p = make_mixture(&[p1.clone(), p2.clone()], &alpha)?;
    let q = make_mixture(&[p2.clone(), p1.clone()], &alpha)?;
    Ok(ProblemFile {
        n,
        pi: pi.as_slice().to_vec(),
        kernels: vec![
            entry("P1", &p1),
            entry("P2", &p2),
            entry("Q1", &p2),
            entry("Q2", &p1),
            entry("P", &p),
            entry("Q", &q),
        ],
        observables: vec![("f".into(), vec![1.0, 0.0, -1.0])],
    })
}
