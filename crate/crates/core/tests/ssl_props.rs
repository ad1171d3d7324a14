mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{dot, random_connected, random_labels, random_vec};
use topoal::graph::{laplacian, SparseGraph};
use topoal::sparse::CsrMatrix;
use topoal::ssl::{
    laplace_learn, multiscale_operator, poisson_potential, poisson_reweight, pwll_learn, solve_spd, LabelMatrix,
    ReweightFunction, RewireTerm, RewiredOperator, SolveOptions,
};

fn check_laplace(g: &SparseGraph, labels: &LabelMatrix) {
    let l = laplacian(g);
    let sol = laplace_learn(&l, labels).unwrap();
    let k = labels.classes();
    let max_deg = g.weights().row_sums().into_iter().fold(0.0f64, f64::max);
    for c in 0..k {
        let col: Vec<f64> = (0..g.len()).map(|v| sol.row(v)[c]).collect();
        let lu = l.matrix().apply(&col);
        for v in 0..g.len() {
            if !labels.is_labeled(v) {
                assert!(lu[v].abs() <= 1e-6 * max_deg, "harmonicity at {v}: {}", lu[v]);
            }
        }
    }
    for v in 0..g.len() {
        let row = sol.row(v);
        assert!(row.iter().all(|&x| (-1e-8..=1.0 + 1e-8).contains(&x)));
        if labels.is_labeled(v) {
            for (c, &x) in row.iter().enumerate() {
                assert_eq!(x, labels.target(v, c));
            }
        } else {
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        }
    }
}

#[test]
fn laplace_properties_on_random_graphs() {
    for seed in 0..20u64 {
        let n = 30 + 10 * (seed as usize % 8);
        let g = random_connected(n, 0.08, seed);
        check_laplace(&g, &random_labels(n, 2 + seed as usize % 3, 1 + seed as usize % 2, seed));
    }
}

#[test]
fn poisson_residual_and_positivity() {
    for seed in 0..10u64 {
        let g = random_connected(120, 0.05, 40 + seed);
        let labeled: Vec<usize> = (0..6).map(|t| (t * 17 + seed as usize) % 120).collect();
        let (g0, res) = poisson_potential(&g, &labeled).unwrap();
        assert!(res <= 1e-8, "residual {res}");
        assert!(g0.iter().sum::<f64>().abs() < 1e-9);
        let gamma = poisson_reweight(&g, &labeled).unwrap();
        assert!(gamma.values().iter().all(|&x| x > 0.0));
    }
}

#[test]
fn pwll_and_laplace_coincide_at_zero_tau() {
    for seed in 0..10u64 {
        let g = random_connected(50, 0.1, seed);
        let labels = random_labels(50, 3, 1, seed);
        let a = laplace_learn(&laplacian(&g), &labels).unwrap();
        let b = pwll_learn(&g, &ReweightFunction::uniform(50), &labels, 0.0).unwrap();
        for v in 0..50 {
            for c in 0..3 {
                assert!((a.row(v)[c] - b.row(v)[c]).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn tau_shrinks_unlabeled_norms() {
    for seed in 0..10u64 {
        let g = random_connected(10, 0.2, seed);
        let labels = random_labels(10, 2, 1, seed);
        let gamma = poisson_reweight(&g, labels.labeled()).unwrap();
        let a = pwll_learn(&g, &gamma, &labels, 0.0).unwrap();
        let b = pwll_learn(&g, &gamma, &labels, 0.1).unwrap();
        for v in 0..10 {
            if !labels.is_labeled(v) {
                let na = dot(a.row(v), a.row(v)).sqrt();
                let nb = dot(b.row(v), b.row(v)).sqrt();
                assert!(nb < na, "node {v}: {nb} !< {na}");
            }
        }
    }
}

#[test]
fn rewired_operator_stays_symmetric_psd() {
    let g1 = random_connected(80, 0.05, 1);
    let g2 = random_connected(80, 0.03, 2);
    let mut r = RewiredOperator::new(&g1, 1, 1.0, vec![RewireTerm { power: 2, weight: 4.0 }]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        r.rewire_update(std::slice::from_ref(&g2), rng.gen_range(0..80)).unwrap();
        let m = r.operator().matrix();
        assert!(m.is_symmetric());
        let scale = m.values().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let ones = m.apply(&[1.0; 80]);
        assert!(ones.iter().all(|x| x.abs() <= 1e-10 * scale));
        for _ in 0..5 {
            let x = random_vec(80, &mut rng);
            assert!(dot(&x, &m.apply(&x)) >= -1e-10 * dot(&x, &x) * scale);
        }
    }
}

#[test]
fn one_shot_rewiring_is_the_full_operator() {
    for seed in 0..5u64 {
        let n = 40 * (seed as usize + 1);
        let g1 = random_connected(n, 0.05, seed);
        let g2 = random_connected(n, 0.02, seed + 100);
        let all: Vec<usize> = (0..n).collect();
        let mut r = RewiredOperator::new(&g1, 1, 1.0, vec![RewireTerm { power: 2, weight: 4.0 }]).unwrap();
        r.rewire_update_set(std::slice::from_ref(&g2), &all).unwrap();
        let full = multiscale_operator(&[g1, g2], &[1, 2], &[1.0, 4.0]).unwrap();
        assert_eq!(r.operator().matrix(), full.matrix());
    }
}

fn random_spd(n: usize, seed: u64) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b: Vec<Vec<f64>> = (0..n).map(|_| random_vec(n, &mut rng)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| dot(&b[i], &b[j]) + if i == j { 0.1 } else { 0.0 }).collect())
        .collect();
    CsrMatrix::from_dense(&rows)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn residual_never_grows_with_iterations(n in 2usize..30, seed in any::<u64>()) {
        let a = random_spd(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let b = vec![random_vec(n, &mut rng)];
        let mut prev = f64::INFINITY;
        for it in 0..=2 * n {
            let opts = SolveOptions { tol: 1e-14, max_iter: Some(it) };
            let (_, rep) = solve_spd(&a, &b, &opts).unwrap();
            prop_assert!(rep.residual <= prev * (1.0 + 1e-9) + 1e-15);
            prev = rep.residual;
        }
    }

    #[test]
    fn laplace_properties_hold(n in 8usize..80, extra in 0.0f64..0.2, seed in any::<u64>(), classes in 2usize..5) {
        prop_assume!(classes <= n);
        let g = random_connected(n, extra, seed);
        check_laplace(&g, &random_labels(n, classes, 1, seed));
    }
}
