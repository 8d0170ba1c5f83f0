mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ranklab::concentration::{h2, talagrand_sweep, PointSet};
use ranklab::experiments::{bernoulli_subset, diagonal_kappa_witness, matrix_restriction_experiment, trial_rng};
use ranklab::polyrank::{c_constant, gowers_arank};
use ranklab::ranks::bias;
use ranklab::{Budget, Matrix, PolyMap, PrimeField, Tensor};

use common::{binomial_tail, character_sum_bias, four_term_bracket, gowers_norm_power};

#[test]
fn counting_bias_matches_character_sum_over_gf5() {
    let f = PrimeField::new(5).unwrap();
    for seed in 0..8 {
        let t = Tensor::random(f, vec![2, 2, 2], seed);
        let fast = bias(&t, 1 << 20).unwrap().to_f64();
        assert!((fast - character_sum_bias(&t)).abs() < 1e-9, "seed {seed}");
    }
}

#[test]
fn gowers_rank_matches_direct_uniformity_norm() {
    let f3 = PrimeField::new(3).unwrap();
    let cases = [
        PolyMap::new(f3, 2, 2, vec![vec![(vec![1, 1], 1)]]).unwrap(),
        PolyMap::new(f3, 2, 2, vec![vec![(vec![2, 0], 1), (vec![0, 2], 2)]]).unwrap(),
        PolyMap::random_seeded(f3, 2, 1, 2, 5),
        PolyMap::random_seeded(PrimeField::new(5).unwrap(), 2, 1, 2, 6),
    ];
    for p in cases {
        let r = gowers_arank(&p, &Budget::default()).unwrap();
        let b = r.bias().unwrap().to_f64();
        assert!((b - gowers_norm_power(&p, 2)).abs() < 1e-9, "{}", p.to_text());
    }
    // cubic over GF(5): U^3 enumerates 5^8 tuples
    let p = PolyMap::random_seeded(PrimeField::new(5).unwrap(), 2, 1, 3, 2);
    let b = gowers_arank(&p, &Budget::default()).unwrap().bias().unwrap().to_f64();
    assert!((b - gowers_norm_power(&p, 3)).abs() < 1e-9);
}

#[test]
fn bracket_agrees_with_four_term_difference_over_gf3() {
    let f = PrimeField::new(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let n = rng.random_range(2..=5);
        let p = PolyMap::random(f, n, 2, 3, &mut rng);
        let (mut i_set, mut j_set) = (Vec::new(), Vec::new());
        for v in 0..n {
            match rng.random_range(0..3) {
                0 => i_set.push(v),
                1 => j_set.push(v),
                _ => {}
            }
        }
        let b = p.bracket(&i_set, &j_set).unwrap();
        assert_eq!(b.truth_tables(), four_term_bracket(&p, &i_set, &j_set));
    }
}

#[test]
fn talagrand_lhs_matches_direct_h2_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let n = 7;
        let members: Vec<u32> = (0..6).map(|_| rng.random_range(0..1u32 << n)).collect();
        let a = PointSet::new(n, members).unwrap();
        let sigma = 0.3;
        let sweep = talagrand_sweep(&a, sigma).unwrap();
        for r in &sweep {
            let direct: f64 = (0..1u32 << n)
                .filter(|&x| h2(x, &a) >= r.k)
                .map(|x| sigma.powi(x.count_ones() as i32) * (1.0 - sigma).powi((n - x.count_ones() as usize) as i32))
                .sum();
            assert!((r.lhs_f64() - direct).abs() < 1e-12);
        }
    }
}

#[test]
fn identity_matrix_experiment_matches_binomial_tail() {
    // rank(I|_{I×I}) = |I|
    let n = 40;
    let sigma = 0.5;
    let rho = 1.0 - (1.0f64 - sigma).sqrt();
    let threshold = (rho * rho * n as f64 / 4.0).ceil() as usize;
    let expect = binomial_tail(n, sigma, threshold);
    let rec = matrix_restriction_experiment(&Matrix::identity(PrimeField::gf2(), n), sigma, 20_000, 9).unwrap();
    let se = (expect * (1.0 - expect) / 20_000.0).sqrt();
    assert!((rec.empirical_prob - expect).abs() <= 4.0 * se + 1e-12);
    assert!(rec.holds);
}

#[test]
fn diagonal_witness_matches_independent_survival() {
    for (sigma, d) in [(0.5, 3usize), (0.8, 2), (0.3, 4)] {
        let rec = diagonal_kappa_witness(10, d, sigma, 20_000, 3).unwrap();
        let exact = sigma.powi(d as i32) * 10.0;
        let mean = rec.params["mean_rank"].as_f64().unwrap();
        let se = rec.params["mean_rank_stderr"].as_f64().unwrap();
        assert!((mean - exact).abs() <= 4.0 * se, "sigma {sigma} d {d}");
    }
}

#[test]
fn union_of_restrictions_is_a_restriction() {
    // I ∪ J with I ∼ [n]_ρ, J ∼ [n]_σ is distributed as [n]_η, η = 1 − (1−ρ)(1−σ)
    let n = 20;
    let (rho, sigma) = (0.2, 0.3);
    let eta = 1.0 - (1.0 - rho) * (1.0 - sigma);
    let draws = 100_000u64;
    let mut hist = vec![0u64; n + 1];
    for t in 0..draws {
        let mut rng = trial_rng(21, t);
        let i = bernoulli_subset(n, rho, &mut rng);
        let j = bernoulli_subset(n, sigma, &mut rng);
        let mut u: Vec<usize> = i.into_iter().chain(j).collect();
        u.sort_unstable();
        u.dedup();
        hist[u.len()] += 1;
    }
    // chi-square over cells with expected count >= 5
    let mut chi = 0.0;
    let mut cells = 0;
    for (k, &obs) in hist.iter().enumerate() {
        let p = binomial_tail(n, eta, k) - binomial_tail(n, eta, k + 1);
        let e = p * draws as f64;
        if e >= 5.0 {
            chi += (obs as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    // the 0.999 quantile of chi-square with 20 degrees of freedom is 45.3
    assert!(cells <= 21);
    assert!(chi < 45.3, "chi-square {chi} over {cells} cells");
}

#[test]
fn c_constant_recursion() {
    // c(1/2, 0) = 1, c(1/2, d) = c(1/2, d−1)^2 / 20, c(σ, d) = c(1/2, d)^(⌈log2 1/σ⌉)
    let mut half = 1.0f64;
    for d in 0..=3u32 {
        if d > 0 {
            half = half * half / 20.0;
        }
        assert!((c_constant(0.5, d).unwrap() - half).abs() <= 1e-13 * half);
        assert!((c_constant(0.25, d).unwrap() - half * half).abs() <= 1e-13 * half * half);
        assert!((c_constant(0.2, d).unwrap() - half.powi(3)).abs() <= 1e-13 * half.powi(3));
    }
}
