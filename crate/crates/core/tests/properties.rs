mod common;

use common::*;
use mcorder::matrix::SquareMatrix;
use mcorder::spectral::{finite_horizon_variance, PiInnerProduct};
use mcorder::{
    asymptotic_variance_spectral, center_observable, check_irreducible, compute_period,
    covariance_dominance, eigendecompose_restricted, is_antithetic, lag_autocovariance,
    loewner_inversion_check, make_iid, make_lazy, make_metropolis_hastings, make_mixture,
    partial_order_diagram, peskun_dominates, spectral_measure, validate_kernel, Observable,
    Relation, TransitionKernel,
};
use proptest::prelude::*;
use rand::Rng;

fn seed_and_size(max_n: usize) -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 2..=max_n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constructors_produce_stochastic_reversible_kernels((seed, n) in seed_and_size(12)) {
        let mut rng = rng(seed);
        let pi = random_pi(&mut rng, n);
        let fill = rng.gen_range(0.1..1.0);
        let base = random_reversible(&mut rng, &pi, fill);
        let qpi = random_pi(&mut rng, n);
        let proposal = random_sparse_reversible(&mut rng, &qpi, 0.7);
        let beta = rng.gen_range(0.0..=1.0);
        let a = rng.gen_range(0.0..=1.0);
        let kernels = [
            make_iid(&pi),
            make_metropolis_hastings(&proposal, &pi).unwrap(),
            make_mixture(&[base.clone(), make_iid(&pi)], &[a, 1.0 - a]).unwrap(),
            make_lazy(&base, beta).unwrap(),
        ];
        for k in &kernels {
            let v = validate_kernel(k.matrix().clone(), &pi).unwrap();
            prop_assert!(v.checks().stochastic);
            prop_assert!(v.checks().stationary);
            prop_assert!(v.checks().reversible);
            prop_assert!(max_detailed_balance_gap(k, &pi) <= 1e-12);
        }
        prop_assert!(check_irreducible(&kernels[0]));
    }

    #[test]
    fn centering_is_an_idempotent_linear_projection((seed, n) in seed_and_size(20)) {
        let mut rng = rng(seed);
        let pi = random_pi(&mut rng, n);
        let f = random_observable(&mut rng, n);
        let g = random_observable(&mut rng, n);
        let (a, b) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let cf = center_observable(&f, &pi).unwrap();
        let twice = center_observable(&cf, &pi).unwrap();
        for (x, y) in cf.values().iter().zip(twice.values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert!(pi.mean(cf.values()).abs() <= 1e-12);
        let combo: Vec<f64> = f.values().iter().zip(g.values()).map(|(x, y)| a * x + b * y).collect();
        let lhs = center_observable(&Observable::new(combo), &pi).unwrap();
        let cg = center_observable(&g, &pi).unwrap();
        for ((l, x), y) in lhs.values().iter().zip(cf.values()).zip(cg.values()) {
            prop_assert!((l - (a * x + b * y)).abs() <= 1e-12);
        }
    }

    #[test]
    fn periodic_classes_pass_all_mass_forward(seed in any::<u64>(), left in 1usize..5, right in 1usize..5) {
        let mut rng = rng(seed);
        let n = left + right;
        let m = SquareMatrix::from_fn(n, |x, y| {
            if (x < left) != (y < left) { 1.0 } else { 0.0 }
        });
        let rows: Vec<Vec<f64>> = m.rows().map(|r| {
            let w: Vec<f64> = r.iter().map(|&v| v * rng.gen_range(0.1..1.0)).collect();
            let s: f64 = w.iter().sum();
            w.iter().map(|v| v / s).collect()
        }).collect();
        let k = TransitionKernel::from_rows(&rows).unwrap();
        let report = compute_period(&k).unwrap();
        prop_assert_eq!(report.period, 2);
        for (i, class) in report.classes.iter().enumerate() {
            let next = &report.classes[(i + 1) % report.period];
            for &x in class {
                let mass: f64 = next.iter().map(|&y| k.get(x, y)).sum();
                prop_assert!(mass >= 1.0 - n as f64 * 1e-14);
            }
        }
    }

    #[test]
    fn decomposition_meets_its_contract((seed, n) in seed_and_size(25)) {
        let mut rng = rng(seed);
        let pi = random_pi(&mut rng, n);
        let fill = rng.gen_range(0.1..1.0);
        let k = if seed % 2 == 0 {
            random_reversible(&mut rng, &pi, fill)
        } else {
            random_sparse_reversible(&mut rng, &pi, fill)
        };
        let dec = eigendecompose_restricted(&k, &pi).unwrap();
        let ip = PiInnerProduct::new(&pi);
        prop_assert_eq!(dec.eigenvalues.len(), n - 1);
        prop_assert!(dec.residual <= 1e-9);
        prop_assert!(dec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        for (i, phi) in dec.eigenvectors.iter().enumerate() {
            prop_assert!(dec.eigenvalues[i].abs() <= 1.0 + 1e-10);
            prop_assert!(ip.inner(phi, &vec![1.0; n]).abs() <= 1e-10);
            for (j, psi) in dec.eigenvectors.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip.inner(phi, psi) - expected).abs() <= 1e-10);
            }
        }
        let f = random_centered(&mut rng, &pi);
        let m = spectral_measure(&f, &dec, &pi).unwrap();
        prop_assert!((m.total_mass() - ip.norm_sq(f.values())).abs() <= 1e-9);
        prop_assert!(m.atoms.iter().all(|a| a.weight >= 0.0));
        prop_assert!(m.mass_near_one() <= 1e-9);
    }

    #[test]
    fn kernel_is_a_contraction_in_l2_pi((seed, n) in seed_and_size(20)) {
        let mut rng = rng(seed);
        let pi = random_pi(&mut rng, n);
        let fill = rng.gen_range(0.1..1.0);
        let k = random_reversible(&mut rng, &pi, fill);
        let ip = PiInnerProduct::new(&pi);
        let f = random_observable(&mut rng, n);
        prop_assert!(ip.norm(&k.apply(f.values())) <= ip.norm(f.values()) + 1e-12);
    }

    #[test]
    fn autocovariances_decay_geometrically((seed, n) in seed_and_size(15)) {
        let mut rng = rng(seed);
        let pi = random_pi(&mut rng, n);
        let k = random_sparse_reversible(&mut rng, &pi, 0.9);
        let f = random_centered(&mut rng, &pi);
        let rho = eigendecompose_restricted(&k, &pi).unwrap().spectral_radius();
        let seq = lag_autocovariance(&f, &k, &pi, 40).unwrap();
        let g0 = seq.gammas[0];
        for (j, g) in seq.gammas.iter().enumerate() {
            prop_assert!(g.abs() <= g0 * rho.powi(j as i32) + 1e-12);
        }
    }

    #[test]
    fn finite_horizon_variance_converges_at_rate_one_over_n((seed, n) in seed_and_size(8)) {
        let mut rng = rng(seed);
        let pi = random_pi(&mut rng, n);
        let fill = rng.gen_range(0.3..0.9);
        let k = random_reversible(&mut rng, &pi, fill);
        let f = random_observable(&mut rng, n);
        let v = asymptotic_variance_spectral(&f, &k, &pi).unwrap().value.finite().unwrap();
        let dec = eigendecompose_restricted(&k, &pi).unwrap();
        let f0 = center_observable(&f, &pi).unwrap();
        let m = spectral_measure(&f0, &dec, &pi).unwrap();
        // |v_N − v| = (2/N)|Σ w λ (1 − λ^N)/(1 − λ)²| ≤ C/N
        let c: f64 = m.atoms.iter().map(|a| 2.0 * a.weight * a.lambda.abs() / (1.0 - a.lambda).powi(2)).sum();
        for horizon in [100usize, 1000, 10_000] {
            let vn = finite_horizon_variance(&f, &k, &pi, horizon).unwrap();
            prop_assert!((vn - v).abs() <= c / horizon as f64 + 1e-10);
        }
    }

    #[test]
    fn peskun_quadratic_form_identity((seed, n) in seed_and_size(10)) {
        let mut rng = rng(seed);
        let pi = random_pi(&mut rng, n);
        let q = random_reversible(&mut rng, &pi, 0.8);
        let p = boost_off_diagonal(&mut rng, &q, &pi, n);
        prop_assert!(peskun_dominates(&p, &q, &pi).unwrap().dominates());
        let f = random_centered(&mut rng, &pi);
        let fv = f.values();
        let w = pi.as_slice();
        let ip = PiInnerProduct::new(&pi);
        let lhs = ip.inner(fv, &q.apply(fv)) - ip.inner(fv, &p.apply(fv));
        let mut rhs = 0.0;
        for x in 0..n {
            for y in 0..n {
                let delta = if x == y { 1.0 } else { 0.0 };
                let mu = delta + p.get(x, y) - q.get(x, y);
                rhs += 0.5 * (fv[x] - fv[y]).powi(2) * mu * w[x];
            }
        }
        prop_assert!((lhs - rhs).abs() <= 1e-10);
        prop_assert!(rhs >= -1e-12);
    }

    #[test]
    fn antithetic_iff_dominates_iid((seed, n) in seed_and_size(10)) {
        let mut rng = rng(seed);
        let pi = random_pi(&mut rng, n);
        let k = random_reversible(&mut rng, &pi, 1.0);
        let a = is_antithetic(&k, &pi).unwrap();
        let d = covariance_dominance(&k, &make_iid(&pi), &pi).unwrap().dominates();
        prop_assert_eq!(a, d);
    }

    #[test]
    fn hasse_edges_form_a_partial_order((seed, n) in seed_and_size(6)) {
        let mut rng = rng(seed);
        let pi = random_pi(&mut rng, n);
        let base = random_reversible(&mut rng, &pi, 0.9);
        let mut ks = vec![("base".to_string(), base.clone())];
        for i in 0..4 {
            let k = if i % 2 == 0 {
                make_lazy(&base, rng.gen_range(0.05..0.9)).unwrap()
            } else {
                {
                let fill = rng.gen_range(0.2..1.0);
                random_reversible(&mut rng, &pi, fill)
            }
            };
            ks.push((format!("k{i}"), k));
        }
        ks.push(("copy".to_string(), base.clone()));
        let h = partial_order_diagram(&ks, &pi).unwrap();
        prop_assert!(h.diagnostics.is_empty(), "{:?}", h.diagnostics);
        prop_assert!(h.nodes[0].names.contains(&"copy".to_string()));
        for &(a, b) in &h.edges {
            prop_assert!(a != b);
            prop_assert!(!h.edges.contains(&(b, a)));
        }
    }

    #[test]
    fn rank_one_update_agrees_with_sherman_morrison(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = rng(seed);
        let a = SquareMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let t = a.matmul(&a.transpose()).add(&SquareMatrix::identity(n).scaled(0.5));
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = t.add(&SquareMatrix::from_fn(n, |i, j| v[i] * v[j]));
        let verdicts = loewner_inversion_check(&t, &m).unwrap();
        prop_assert!(verdicts.order_holds && verdicts.inverted_holds);
        // t⁻¹ − m⁻¹ = (t⁻¹v)(t⁻¹v)ᵀ / (1 + vᵀt⁻¹v) has trace ‖t⁻¹v‖² / (1 + vᵀt⁻¹v) ≥ 0,
        // and its only nonzero eigenvalue equals that trace
        let tinv = mcorder::matrix::spd_inverse(&t).unwrap();
        let w = tinv.mul_vec(&v);
        let denom = 1.0 + v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let top = w.iter().map(|x| x * x).sum::<f64>() / denom;
        let diff = tinv.sub(&mcorder::matrix::spd_inverse(&m).unwrap());
        let trace: f64 = (0..n).map(|i| diff[(i, i)]).sum();
        prop_assert!((trace - top).abs() <= 1e-8 * top.max(1.0));
    }
}

#[test]
fn efficiency_without_peskun_fixture() {
    let (p, q) = efficiency_not_peskun_fixture();
    let pi = mcorder::StationaryDistribution::uniform(3).unwrap();
    let eff = covariance_dominance(&p, &q, &pi).unwrap();
    assert_eq!(eff.relation, Relation::Dominates);
    assert!((eff.min_eig_qp.unwrap() - 0.022128).abs() < 1e-5);
    let pesk = peskun_dominates(&p, &q, &pi).unwrap();
    assert!(!pesk.dominates());
    assert_eq!((pesk.witness[0].x, pesk.witness[0].y), (0, 2));
    // and a few observables confirm the variance ordering
    let mut rng = rng(42);
    for _ in 0..20 {
        let f = random_centered(&mut rng, &pi);
        let vp = asymptotic_variance_spectral(&f, &p, &pi)
            .unwrap()
            .value
            .finite()
            .unwrap();
        let vq = asymptotic_variance_spectral(&f, &q, &pi)
            .unwrap()
            .value
            .finite()
            .unwrap();
        assert!(vp <= vq + 1e-12);
    }
}
