use std::f64::consts::{FRAC_PI_2, TAU};

use interwalk::evolution::{
    apply_interpolated, apply_qw, apply_rw, evolve, evolve_grid, marginal, persistent_rw_reference,
    pure_qw_reference, ArcAmplitudes, ArcWeights, DensityGrid,
};
use interwalk::fourier::{char_fn, char_fn_of, hat_h};
use interwalk::limit_law::ArcsineMixture;
use interwalk::linalg::{eigenvalues, Mat4, C64};
use interwalk::poisson::prop3_char_fn;
use interwalk::trajectory::{mc_distribution, run_trajectory, trajectory_rng, McConfig};
use interwalk::{Coin, WalkParams};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coin_strategy() -> impl Strategy<Value = Coin> {
    (0.02f64..0.98, 0.0f64..TAU, 0.0f64..TAU)
        .prop_map(|(s, phi, chi)| Coin::from_stay_prob(s, phi, chi).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn channel_preserves_state_invariants(coin in coin_strategy(), p in 0.0f64..=1.0, t in 1usize..40) {
        let params = WalkParams::new(coin, p).unwrap();
        evolve_grid(&params, DensityGrid::initial(), t, |g| g.check_invariants()).unwrap();
    }

    #[test]
    fn interpolation_is_convex_combination(coin in coin_strategy(), p in 0.0f64..=1.0, t in 0usize..12) {
        let params = WalkParams::new(coin, p).unwrap();
        let grid = evolve_grid(&params, DensityGrid::initial(), t, |_| Ok(())).unwrap();
        let direct = apply_interpolated(&grid, &coin, p);
        let rw = apply_rw(&grid, &coin);
        let qw = apply_qw(&grid, &coin);
        let (pc, qc) = (C64::new(p, 0.0), C64::new(1.0 - p, 0.0));
        for ((d, r), q) in direct.blocks().iter().zip(rw.blocks()).zip(qw.blocks()) {
            prop_assert!((*d - (r.scale(pc) + q.scale(qc))).max_abs() <= 1e-15);
        }
    }

    #[test]
    fn endpoints_are_exact_reductions(coin in coin_strategy(), t in 0usize..30) {
        let rw = WalkParams::new(coin, 1.0).unwrap();
        let grid = evolve_grid(&rw, DensityGrid::initial(), t, |_| Ok(())).unwrap();
        prop_assert_eq!(apply_interpolated(&grid, &coin, 1.0), apply_rw(&grid, &coin));
        prop_assert_eq!(apply_interpolated(&grid, &coin, 0.0), apply_qw(&grid, &coin));
    }

    #[test]
    fn first_step_splits_evenly(coin in coin_strategy(), p in 0.0f64..=1.0) {
        let mu = evolve(&WalkParams::new(coin, p).unwrap(), 1).unwrap();
        prop_assert!((mu.prob(-1) - 0.5).abs() <= 1e-12);
        prop_assert!((mu.prob(1) - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn pure_states_stay_pure_under_qw(coin in coin_strategy(), re in -1.0f64..1.0, im in -1.0f64..1.0, t in 1usize..25) {
        let l = C64::new(re, im);
        let r = C64::new(0.3, -0.8);
        let norm = (l.norm_sqr() + r.norm_sqr()).sqrt();
        let init = ArcAmplitudes::new(l / norm, r / norm);
        let params = WalkParams::new(coin, 0.0).unwrap();
        let grid = evolve_grid(&params, DensityGrid::at_origin(init.density()), t, |_| Ok(())).unwrap();
        let reference = pure_qw_reference(&coin, t, init).unwrap();
        prop_assert!(marginal(&grid).unwrap().max_abs_diff(&reference) <= 1e-12);
        // purity: Σ_{x,y} ‖ρ(x,y)‖²_F = (tr ρ)² = 1
        let purity: f64 = grid.blocks().iter().map(|b| b.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>()).sum();
        prop_assert!((purity - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn rw_endpoint_matches_arc_oracle(coin in coin_strategy(), w in 0.0f64..=1.0, t in 0usize..30) {
        let init = ArcAmplitudes::new(C64::new(w.sqrt(), 0.0), C64::new(0.0, (1.0 - w).sqrt()));
        let rho0 = init.density();
        let params = WalkParams::new(coin, 1.0).unwrap();
        let grid = evolve_grid(&params, DensityGrid::at_origin(rho0), t, |_| Ok(())).unwrap();
        let reference = persistent_rw_reference(coin.stay_prob(), t, ArcWeights::matched(&coin, &rho0)).unwrap();
        if t > 0 {
            prop_assert!(marginal(&grid).unwrap().max_abs_diff(&reference) <= 1e-10);
        }
    }

    #[test]
    fn trajectory_weights_are_normalized(coin in coin_strategy(), p in 0.0f64..=1.0, seed in any::<u64>()) {
        let params = WalkParams::new(coin, p).unwrap();
        let w = run_trajectory(&params, 30, &mut trajectory_rng(seed, 3)).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn char_fn_bounded_and_converged(coin in coin_strategy(), p in 0.0f64..=1.0, xi in -4.0f64..4.0, t in 0usize..50) {
        let params = WalkParams::new(coin, p).unwrap();
        let a = char_fn(&params, t, xi, 256).unwrap();
        let b = char_fn(&params, t, xi, 512).unwrap();
        prop_assert!(a.norm() <= 1.0 + 1e-10);
        prop_assert!((a - b).norm() <= 1e-10);
    }

    #[test]
    fn eigenvalues_match_trace_and_determinant(entries in proptest::collection::vec(-1.0f64..1.0, 32)) {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = C64::new(entries[8 * i + 2 * j], entries[8 * i + 2 * j + 1]);
            }
        }
        let ev = eigenvalues(&m).unwrap();
        let sum: C64 = ev.iter().sum();
        let prod: C64 = ev.iter().product();
        let (tr, det) = (m.trace(), m.det());
        prop_assert!((sum - tr).norm() <= 1e-9 * tr.norm().max(1.0));
        prop_assert!((prod - det).norm() <= 1e-9 * det.norm().max(1.0));
    }

    #[test]
    fn mixture_is_symmetric(q in 0.01f64..0.99, r in 0.05f64..20.0, x in 0.0f64..6.0) {
        let m = ArcsineMixture::new(q, r).unwrap();
        prop_assert!((m.f_star(x) - m.f_star(-x)).abs() <= 1e-12);
        prop_assert!((m.cdf(x) + m.cdf(-x) - 1.0).abs() <= 1e-10);
        let (a, b) = m.support();
        let s = m.sigma_sq(x);
        prop_assert!(a - 1e-12 <= s && s <= b + 1e-12);
    }

    #[test]
    fn limit_char_fn_is_even_bounded_stable(s in 0.05f64..0.95, gamma in 0.0f64..50.0, xi in 0.0f64..12.0) {
        let coin = Coin::from_stay_prob(s, 0.3, 1.2).unwrap();
        let plus = prop3_char_fn(&coin, gamma, xi, 512).unwrap();
        let minus = prop3_char_fn(&coin, gamma, -xi, 512).unwrap();
        let fine = prop3_char_fn(&coin, gamma, xi, 1024).unwrap();
        prop_assert!((plus - minus).abs() <= 1e-12);
        prop_assert!(plus.abs() <= 1.0 + 1e-10);
        prop_assert!((plus - fine).abs() <= 1e-9);
    }
}

#[test]
fn hadamard_profile_is_symmetric_to_t_100() {
    for p in [0.0, 0.1, 0.5, 1.0] {
        let params = WalkParams::new(Coin::hadamard(), p).unwrap();
        evolve_grid(&params, DensityGrid::initial(), 100, |g| {
            let mu = marginal(g)?;
            for (x, v) in mu.iter() {
                assert!((v - mu.prob(-x)).abs() <= 1e-10, "p={p} t={} x={x}", g.t());
            }
            Ok(())
        })
        .unwrap();
    }
}

#[test]
fn small_t_symmetry_by_brute_force_paths() {
    // Enumerate all 2^t Kraus words of the decoherent channel and sum
    // the resulting pure-state weights; compare with the grid at p = 1.
    let coin = Coin::hadamard();
    let t = 8;
    let params = WalkParams::new(coin, 1.0).unwrap();
    let exact = evolve(&params, t).unwrap();
    let mut brute = vec![0.0; t + 1];
    for start in 0..2 {
        for word in 0u32..(1 << t) {
            // a word picks A (left shift by P) or B (right shift by Q) per step
            let mut amp = if start == 0 { [C64::new(1.0, 0.0), C64::new(0.0, 0.0)] } else { [C64::new(0.0, 0.0), C64::new(1.0, 0.0)] };
            let mut x = 0i64;
            for step in 0..t {
                let v = if word >> step & 1 == 0 {
                    x -= 1;
                    [coin.a * amp[0] + coin.b * amp[1], C64::new(0.0, 0.0)]
                } else {
                    x += 1;
                    [C64::new(0.0, 0.0), coin.c * amp[0] + coin.d * amp[1]]
                };
                amp = v;
            }
            brute[((x + t as i64) / 2) as usize] += 0.5 * (amp[0].norm_sqr() + amp[1].norm_sqr());
        }
    }
    for (a, b) in exact.probs().iter().zip(&brute) {
        assert!((a - b).abs() <= 1e-14);
    }
}

#[test]
fn mc_is_reproducible() {
    let params = WalkParams::new(Coin::hadamard(), 0.3).unwrap();
    let cfg = McConfig::new(500, 2024, 25).unwrap();
    let a = mc_distribution(&params, &cfg).unwrap();
    let b = mc_distribution(&params, &cfg).unwrap();
    assert_eq!(a.dist.probs(), b.dist.probs());
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn mc_endpoint_p1_matches_persistent_walk() {
    let coin = Coin::hadamard();
    let params = WalkParams::new(coin, 1.0).unwrap();
    let est = mc_distribution(&params, &McConfig::new(100_000, 9, 20).unwrap()).unwrap();
    let reference = persistent_rw_reference(0.5, 20, ArcWeights { left: 0.5, right: 0.5 }).unwrap();
    for (j, (got, want)) in est.dist.probs().iter().zip(reference.probs()).enumerate() {
        // every trajectory is a point mass at p = 1, so the exact binomial spread applies
        let tol = 4.0 * (want * (1.0 - want) / 100_000.0).sqrt() + 1e-12;
        assert!((got - want).abs() <= tol, "site {j}: {got} vs {want} (se {})", est.stderr[j]);
    }
}

#[test]
fn mc_endpoint_p0_is_deterministic_per_chirality() {
    let coin = Coin::from_stay_prob(0.3, 0.4, 1.0).unwrap();
    let params = WalkParams::new(coin, 0.0).unwrap();
    let w = run_trajectory(&params, 15, &mut trajectory_rng(5, 0)).unwrap();
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let left = pure_qw_reference(&coin, 15, ArcAmplitudes::new(one, zero)).unwrap();
    let right = pure_qw_reference(&coin, 15, ArcAmplitudes::new(zero, one)).unwrap();
    let close = |r: &interwalk::Distribution| r.probs().iter().zip(&w).all(|(a, b)| (a - b).abs() <= 1e-12);
    assert!(close(&left) || close(&right));
}

#[test]
fn char_fn_cross_check_at_quarter_turn() {
    let params = WalkParams::new(Coin::from_stay_prob(0.7, 1.0, 2.0).unwrap(), 0.25).unwrap();
    let mu = evolve(&params, 30).unwrap();
    let a = char_fn(&params, 30, FRAC_PI_2, 256).unwrap();
    assert!((a - char_fn_of(&mu, FRAC_PI_2)).norm() <= 1e-8);
}

#[test]
fn eigenvalues_of_generators_match_trace_and_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for _ in 0..1000 {
        let coin = Coin::from_stay_prob(
            rng.random_range(0.01..0.99),
            rng.random_range(0.0..TAU),
            rng.random_range(0.0..TAU),
        )
        .unwrap();
        let params = WalkParams::new(coin, rng.random_range(0.0..=1.0)).unwrap();
        let m = hat_h(&params, rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
        let ev = eigenvalues(&m).unwrap();
        let sum: C64 = ev.iter().sum();
        let prod: C64 = ev.iter().product();
        let (tr, det) = (m.trace(), m.det());
        assert!((sum - tr).norm() <= 1e-9 * tr.norm().max(1.0));
        assert!((prod - det).norm() <= 1e-9 * det.norm().max(1.0));
    }
}
