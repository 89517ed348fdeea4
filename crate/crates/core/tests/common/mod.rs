//! Random instance generators shared by the integration suites.
#![allow(dead_code)]

use mcorder::matrix::SquareMatrix;
use mcorder::{center_observable, make_lazy, Observable, StationaryDistribution, TransitionKernel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weights drawn from [0.1, 1], normalized.
pub fn random_pi(rng: &mut ChaCha8Rng, n: usize) -> StationaryDistribution {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    StationaryDistribution::from_weights(&w).unwrap()
}

/// Reversible kernel built from a random symmetric flow matrix.
///
/// `π_x p[x,y] = c·w_xy` with `w` symmetric and positive off the diagonal, so the
/// kernel is irreducible. `fill ∈ (0, 1]` is the fraction of the tightest row
/// used for off-diagonal mass; `fill < 1` leaves every diagonal positive
/// (aperiodic).
pub fn random_reversible(
    rng: &mut ChaCha8Rng,
    pi: &StationaryDistribution,
    fill: f64,
) -> TransitionKernel {
    let n = pi.n();
    let p = pi.as_slice();
    let mut w = SquareMatrix::zeros(n);
    for x in 0..n {
        for y in x + 1..n {
            let v = rng.gen_range(0.05..1.0);
            w[(x, y)] = v;
            w[(y, x)] = v;
        }
    }
    let c = (0..n)
        .map(|x| p[x] / w.row(x).iter().sum::<f64>())
        .fold(f64::INFINITY, f64::min)
        * fill;
    let m = SquareMatrix::from_fn(n, |x, y| if x == y { 0.0 } else { c * w[(x, y)] / p[x] });
    with_diagonal(m)
}

/// Reversible kernel whose support is a random spanning tree plus a few extra
/// edges: sparse and usually slower mixing than [`random_reversible`].
pub fn random_sparse_reversible(
    rng: &mut ChaCha8Rng,
    pi: &StationaryDistribution,
    fill: f64,
) -> TransitionKernel {
    let n = pi.n();
    let p = pi.as_slice();
    let mut w = SquareMatrix::zeros(n);
    for x in 1..n {
        let y = rng.gen_range(0..x);
        let v = rng.gen_range(0.05..1.0);
        w[(x, y)] = v;
        w[(y, x)] = v;
    }
    for _ in 0..n / 2 {
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if x != y {
            let v = rng.gen_range(0.05..1.0);
            w[(x, y)] = v;
            w[(y, x)] = v;
        }
    }
    let c = (0..n)
        .map(|x| p[x] / w.row(x).iter().sum::<f64>().max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min)
        * fill;
    let m = SquareMatrix::from_fn(n, |x, y| if x == y { 0.0 } else { c * w[(x, y)] / p[x] });
    with_diagonal(m)
}

/// Sets each diagonal entry to one minus the row's off-diagonal mass.
pub fn with_diagonal(mut m: SquareMatrix) -> TransitionKernel {
    let n = m.n();
    for x in 0..n {
        let off: f64 = (0..n).filter(|&y| y != x).map(|y| m[(x, y)]).sum();
        m[(x, x)] = 1.0 - off;
    }
    TransitionKernel::new(m).unwrap()
}

/// Moves extra mass onto off-diagonal pairs while keeping detailed balance:
/// for a random pair (x, y), `π_x p[x,y]` grows by `t` and both diagonals
/// pay for it. The result Peskun-dominates the input.
pub fn boost_off_diagonal(
    rng: &mut ChaCha8Rng,
    k: &TransitionKernel,
    pi: &StationaryDistribution,
    pairs: usize,
) -> TransitionKernel {
    let n = k.n();
    let p = pi.as_slice();
    let mut m = k.matrix().clone();
    for _ in 0..pairs {
        let x = rng.gen_range(0..n);
        let y = rng.gen_range(0..n);
        if x == y {
            continue;
        }
        // keep both diagonals nonnegative
        let room = (p[x] * m[(x, x)]).min(p[y] * m[(y, y)]);
        let t = rng.gen_range(0.0..1.0) * room;
        m[(x, y)] += t / p[x];
        m[(y, x)] += t / p[y];
        m[(x, x)] -= t / p[x];
        m[(y, y)] -= t / p[y];
    }
    with_diagonal(m)
}

/// `P = D^{-1/2} (u uᵀ + Σ λ_i ψ_i ψ_iᵀ) D^{1/2}` with a random orthonormal
/// `ψ` basis of `u⊥`. Entries stay nonnegative when `max |λ| ≤ min π`.
pub fn kernel_with_spectrum(
    rng: &mut ChaCha8Rng,
    pi: &StationaryDistribution,
    lambdas: &[f64],
) -> TransitionKernel {
    let n = pi.n();
    assert_eq!(lambdas.len(), n - 1);
    let sq: Vec<f64> = pi.as_slice().iter().map(|p| p.sqrt()).collect();
    let mut basis: Vec<Vec<f64>> = vec![sq.clone()];
    while basis.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(b).for_each(|(a, b)| *a -= c * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
    }
    let mut s = SquareMatrix::from_fn(n, |i, j| sq[i] * sq[j]);
    for (lambda, psi) in lambdas.iter().zip(&basis[1..]) {
        s = s.add(&SquareMatrix::from_fn(n, |i, j| lambda * psi[i] * psi[j]));
    }
    let m = SquareMatrix::from_fn(n, |x, y| s[(x, y)] * sq[y] / sq[x]);
    TransitionKernel::new(m).expect("spectrum too wide for this distribution")
}

pub fn random_observable(rng: &mut ChaCha8Rng, n: usize) -> Observable {
    Observable::new((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
}

pub fn random_centered(rng: &mut ChaCha8Rng, pi: &StationaryDistribution) -> Observable {
    center_observable(&random_observable(rng, pi.n()), pi).unwrap()
}

pub fn lazy(k: &TransitionKernel, beta: f64) -> TransitionKernel {
    make_lazy(k, beta).unwrap()
}

/// Lazy simple random walk on an `n`-cycle.
pub fn cycle_walk(n: usize, beta: f64) -> TransitionKernel {
    let m = SquareMatrix::from_fn(n, |x, y| {
        if (x + 1) % n == y || (y + 1) % n == x {
            0.5
        } else {
            0.0
        }
    });
    lazy(&TransitionKernel::new(m).unwrap(), beta)
}

/// Uniform 3-state pair where the first kernel efficiency-dominates the second
/// but moves less mass from 0 to 2. Found by random search over a 0.05 grid;
/// `Q − P` on mean-zero functions has eigenvalues ≈ 0.0221 and 0.6779.
pub fn efficiency_not_peskun_fixture() -> (TransitionKernel, TransitionKernel) {
    let p = TransitionKernel::from_rows(&[[0.45, 0.35, 0.2], [0.35, 0.35, 0.3], [0.2, 0.3, 0.5]])
        .unwrap();
    let q =
        TransitionKernel::from_rows(&[[0.6, 0.1, 0.3], [0.1, 0.8, 0.1], [0.3, 0.1, 0.6]]).unwrap();
    (p, q)
}

/// Brute-force `max_{x,y} |π_x p[x,y] − π_y p[y,x]|`, for oracle use.
pub fn max_detailed_balance_gap(k: &TransitionKernel, pi: &StationaryDistribution) -> f64 {
    let p = pi.as_slice();
    let n = k.n();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            worst = worst.max((p[x] * k.get(x, y) - p[y] * k.get(y, x)).abs());
        }
    }
    worst
}
