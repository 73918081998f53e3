//! End-to-end acceptance gate: one test per release criterion, at the stated
//! tolerances. Seeds are fixed so every run checks the same instances.

use std::time::Instant;

use dkp_core::{
    admissible_support, asymptotic_branches, beta_zero_product, build_kappa, build_phi, build_rho,
    canonical_index, curve_points_at_beta, curve_polynomial, det_w, euclid_case, integrate,
    kernel_vector, minor_ratio, newton_genus, random_state_default, recurrence_residual,
    sequence_case, special_state, Complex64, Error, LatticeState, SignTable,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

const FOUR_SIZES: [(usize, usize); 4] = [(3, 2), (5, 2), (4, 3), (5, 3)];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn coprime_pairs(max: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 3..=max {
        for m in 2..n {
            if gcd(n, m) == 1 {
                out.push((n, m));
            }
        }
    }
    out
}

fn annular(rng: &mut ChaCha12Rng, lo: f64, hi: f64) -> Complex64 {
    let r = lo + (hi - lo) * rng.gen::<f64>();
    let t = std::f64::consts::TAU * rng.gen::<f64>();
    Complex64::from_polar(r, t)
}

/// The walk forcing of the κ table: the value of κ(n−1, m+1) − κ(n, m),
/// restated here independently of the construction.
fn kappa_forcing(n: i64, m: i64, big_n: i64, big_m: i64) -> i64 {
    let site = (n.rem_euclid(big_n), m.rem_euclid(big_m));
    let one_n = 1 % big_n;
    let neg_m = (big_m - 1) % big_m;
    match site {
        s if s == (one_n, neg_m) => -1,
        s if s == (one_n, 0) => 1,
        s if s == (0, neg_m) => 1,
        s if s == (0, 0) => -1,
        _ => 0,
    }
}

/// The walk forcing of the ρ table, ρ(n−1, m+1) − ρ(n, m).
fn rho_forcing(n: i64, m: i64, big_n: i64, big_m: i64) -> i64 {
    let site = (n.rem_euclid(big_n), m.rem_euclid(big_m));
    let one_n = 1 % big_n;
    let neg_n = (big_n - 1) % big_n;
    let neg_m = (big_m - 1) % big_m;
    match site {
        s if s == (neg_n, neg_m) => 1,
        s if s == (one_n, 0) => 1,
        s if s == (0, neg_m) => -1,
        s if s == (0, 0) => -1,
        _ => 0,
    }
}

fn table_values(t: &SignTable) -> Vec<i8> {
    t.values().to_vec()
}

#[test]
fn criterion_01_sign_table_relations() {
    let start = Instant::now();
    for (n, m) in coprime_pairs(12) {
        let (bn, bm) = (n as i64, m as i64);
        let kappa = build_kappa(n, m).unwrap();
        let rho = build_rho(n, m).unwrap();
        assert_eq!(kappa.at(0, 0), 0, "kappa(0,0) on {n}x{m}");
        for mm in 0..bm {
            for nn in 0..bn {
                let k = i64::from(kappa.at(nn, mm));
                // defining difference relation, exact in integer arithmetic
                assert_eq!(
                    i64::from(kappa.at(nn - 1, mm + 1)) - k,
                    kappa_forcing(nn, mm, bn, bm),
                    "kappa difference at ({nn},{mm}) on {n}x{m}"
                );
                assert_eq!(
                    i64::from(kappa.at(-nn, -mm)),
                    -k,
                    "kappa antisymmetry at ({nn},{mm}) on {n}x{m}"
                );
                assert!((-1..=1).contains(&k));
                // rho in terms of kappa, with the two corner corrections
                let delta = i64::from(nn == 0 && mm == 0) - i64::from(nn == bn - 1 && mm == 0);
                assert_eq!(
                    i64::from(rho.at(nn, mm)),
                    i64::from(kappa.at(nn + 1, mm)) + k + delta,
                    "rho identity at ({nn},{mm}) on {n}x{m}"
                );
                // rho's own difference relation
                assert_eq!(
                    i64::from(rho.at(nn - 1, mm + 1)) - i64::from(rho.at(nn, mm)),
                    rho_forcing(nn, mm, bn, bm),
                    "rho difference at ({nn},{mm}) on {n}x{m}"
                );
            }
        }
    }
    // frozen 3x2 tables, m-major site order (0,0),(1,0),(2,0),(0,1),(1,1),(2,1)
    assert_eq!(
        table_values(&build_kappa(3, 2).unwrap()),
        vec![0, -1, 1, 0, 1, -1]
    );
    assert_eq!(
        table_values(&build_rho(3, 2).unwrap()),
        vec![0, 0, 0, 1, 0, -1]
    );
    assert_eq!(
        table_values(&build_phi(3, 2).unwrap()),
        vec![0, 0, 0, 0, 1, -1]
    );
    assert!(
        start.elapsed().as_secs_f64() < 1.0,
        "sign-table checks exceeded 1 s"
    );
}

#[test]
fn criterion_02_determinant_scaling_law() {
    let probes = [(c(0.83, 0.21), c(-0.4, 0.67)), (c(-1.1, 0.4), c(0.3, -0.9))];
    for seed in 0..50u64 {
        let (n, m) = FOUR_SIZES[(seed % 4) as usize];
        let state = random_state_default(n, m, seed).unwrap();
        for lambda in [c(2.0, 0.0), c(1.0, 1.0)] {
            let a: Vec<Complex64> = state.a_grid().iter().map(|&z| lambda * z).collect();
            let b: Vec<Complex64> = state
                .b_grid()
                .iter()
                .map(|&z| lambda * lambda * z)
                .collect();
            let scaled = LatticeState::new(n, m, a, b).unwrap();
            for (alpha, beta) in probes {
                let base = det_w(&state, alpha, beta).unwrap();
                let lhs = det_w(
                    &scaled,
                    lambda.powi(n as i32) * alpha,
                    lambda.powi(m as i32) * beta,
                )
                .unwrap();
                let rhs = lambda.powi((n * m) as i32) * base;
                let scale = lhs.norm().max(rhs.norm()).max(1e-300);
                assert!(
                    (lhs - rhs).norm() < 1e-10 * scale,
                    "scaling law broke: {n}x{m} seed {seed} lambda {lambda}"
                );
            }
        }
    }
}

#[test]
fn criterion_03_curve_support_enumeration() {
    for (n, m) in FOUR_SIZES {
        for seed in [0u64, 1, 2] {
            let state = random_state_default(n, m, seed).unwrap();
            let curve = curve_polynomial(&state).unwrap();
            let mut expected = admissible_support(n, m);
            expected.sort_unstable();
            let support = curve.support();
            assert_eq!(
                support, expected,
                "support enumeration differs for {n}x{m} seed {seed}"
            );
            for &(i, j) in &support {
                assert!(
                    support.binary_search(&(-i, j)).is_ok(),
                    "support of {n}x{m} seed {seed} misses the mirror of ({i},{j})"
                );
            }
        }
    }
}

#[test]
fn criterion_04_special_state_three_term_curve() {
    for (n, m) in [(3, 2), (5, 2), (4, 3)] {
        let state = special_state(n, m).unwrap();
        let curve = curve_polynomial(&state).unwrap();
        let support = curve.support();
        let mut expected = vec![(-(m as i64), 0i64), (0, n as i64), (m as i64, 0)];
        expected.sort_unstable();
        assert_eq!(support, expected, "three-term support for {n}x{m}");
        for (i, j) in expected {
            let modulus = curve.coeff(i, j).norm();
            assert!(
                (modulus - 1.0).abs() < 1e-10,
                "coefficient ({i},{j}) of {n}x{m} has modulus {modulus}"
            );
        }
    }
}

#[test]
fn criterion_05_beta_zero_factorization() {
    for (n, m) in FOUR_SIZES {
        for seed in [3u64, 7] {
            let state = random_state_default(n, m, seed).unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(1000 + seed);
            for _ in 0..20 {
                let alpha = annular(&mut rng, 0.4, 1.4);
                let lhs = det_w(&state, alpha, c(0.0, 0.0)).unwrap();
                let rhs = beta_zero_product(&state, alpha).unwrap();
                let scale = lhs.norm().max(rhs.norm()).max(1e-300);
                assert!(
                    (lhs - rhs).norm() < 1e-10 * scale,
                    "block factorization broke: {n}x{m} seed {seed} alpha {alpha}"
                );
            }
        }
    }
}

#[test]
fn criterion_06_flow_conservation() {
    for (n, m, seed) in [(3, 2, 1u64), (3, 2, 6), (4, 3, 16), (4, 3, 22)] {
        let start = Instant::now();
        let state = random_state_default(n, m, seed).unwrap();
        let (_, full) = integrate(&state, 1e-3, 1000, 10).unwrap();
        assert!(
            full.max_drift < 1e-8,
            "coefficient drift {:.3e} on {n}x{m} seed {seed}",
            full.max_drift
        );
        assert!(
            full.sum_a_drift < 1e-10,
            "sum-A drift {:.3e} on {n}x{m} seed {seed}",
            full.sum_a_drift
        );
        assert!(
            full.prod_b_drift < 1e-10,
            "product-B drift {:.3e} on {n}x{m} seed {seed}",
            full.prod_b_drift
        );
        // halving the step divides the drift by ~2^4, the integrator's order
        let (_, half) = integrate(&state, 5e-4, 2000, 20).unwrap();
        let ratio = full.max_drift / half.max_drift;
        assert!(
            (12.0..=20.0).contains(&ratio),
            "halving ratio {ratio:.2} on {n}x{m} seed {seed}"
        );
        assert!(
            start.elapsed().as_secs_f64() < 30.0,
            "flow run exceeded 30 s on {n}x{m} seed {seed}"
        );
    }
}

#[test]
fn criterion_07_newton_polygon_genus() {
    for (n, m) in coprime_pairs(8) {
        let mut found = None;
        for seed in 0..32u64 {
            let state = random_state_default(n, m, seed).unwrap();
            let curve = curve_polynomial(&state).unwrap();
            if curve.is_generic() {
                found = Some(curve);
                break;
            }
        }
        let curve = found.unwrap_or_else(|| panic!("no generic state found for {n}x{m}"));
        let (_, genus) = newton_genus(&curve);
        assert_eq!(genus, (n - 1) * m, "interior count for {n}x{m}");
    }
    // the hand-counted polygon: hull (0,0),(4,0),(2,3) holds 4 interior points
    let curve = curve_polynomial(&random_state_default(3, 2, 0).unwrap()).unwrap();
    let (polygon, genus) = newton_genus(&curve);
    assert_eq!(genus, 4);
    assert_eq!(polygon.interior().len(), 4);
}

#[test]
fn criterion_08_kernel_vectors_on_curve() {
    for (n, m) in FOUR_SIZES {
        let state = random_state_default(n, m, 11).unwrap();
        let curve = curve_polynomial(&state).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for _ in 0..10 {
            let beta = annular(&mut rng, 0.4, 1.6);
            let points = curve_points_at_beta(&curve, beta).unwrap();
            assert_eq!(points.len(), 2 * m, "{n}x{m} beta {beta}");
            for point in &points {
                let psi = kernel_vector(&state, point).unwrap();
                assert!(
                    psi.residual() < 1e-9,
                    "kernel residual {:.3e} at {n}x{m} beta {beta}",
                    psi.residual()
                );
                let rec = recurrence_residual(&state, point, &psi);
                assert!(
                    rec < 1e-8,
                    "recurrence residual {rec:.3e} at {n}x{m} beta {beta}"
                );

                // minor ratios against the SVD kernel, across two row choices
                let col1 = canonical_index(1, 1, n, m);
                let col2 = canonical_index(0, 0, n, m);
                let expected = psi.at(1, 1) / psi.at(0, 0);
                let mut ratios = Vec::new();
                'rows: for mm in 0..m as i64 {
                    for nn in 0..n as i64 {
                        match minor_ratio(&state, point, canonical_index(nn, mm, n, m), col1, col2)
                        {
                            Ok(r) => {
                                ratios.push(r);
                                if ratios.len() == 2 {
                                    break 'rows;
                                }
                            }
                            Err(Error::MinorDenominator(_)) => continue,
                            Err(e) => panic!("minor ratio failed: {e}"),
                        }
                    }
                }
                assert_eq!(
                    ratios.len(),
                    2,
                    "not enough usable rows at {n}x{m} beta {beta}"
                );
                for r in &ratios {
                    assert!(
                        (r - expected).norm() < 1e-8,
                        "minor ratio vs kernel {:.3e} at {n}x{m} beta {beta}",
                        (r - expected).norm()
                    );
                }
                assert!(
                    (ratios[0] - ratios[1]).norm() < 1e-8,
                    "row dependence {:.3e} at {n}x{m} beta {beta}",
                    (ratios[0] - ratios[1]).norm()
                );
            }
        }
    }
}

#[test]
fn criterion_09_asymptotic_branches() {
    for (n, m) in FOUR_SIZES {
        let state = random_state_default(n, m, 5).unwrap();
        let curve = curve_polynomial(&state).unwrap();
        let near = asymptotic_branches(&curve, 1e4).unwrap();
        let far = asymptotic_branches(&curve, 1e6).unwrap();
        for b in [&near, &far] {
            assert_eq!(b.large.len(), m, "{n}x{m}: expected {m} large roots");
            assert_eq!(b.small.len(), m, "{n}x{m}: expected {m} small roots");
        }
        let rel_large =
            (near.large_ratio_mean - far.large_ratio_mean).norm() / far.large_ratio_mean.norm();
        let rel_small =
            (near.small_ratio_mean - far.small_ratio_mean).norm() / far.small_ratio_mean.norm();
        assert!(
            rel_large < 0.01,
            "{n}x{m}: large-branch mean moved {rel_large:.3e}"
        );
        assert!(
            rel_small < 0.01,
            "{n}x{m}: small-branch mean moved {rel_small:.3e}"
        );
    }
}

#[test]
fn criterion_10_euclid_parity() {
    for a in 2..=20usize {
        for b in 2..=20usize {
            if a == b || gcd(a, b) != 1 {
                continue;
            }
            assert_eq!(
                euclid_case(a, b).unwrap(),
                sequence_case(a, b).unwrap(),
                "parity prediction vs enumeration for ({a},{b})"
            );
            assert_ne!(
                euclid_case(a, b).unwrap(),
                euclid_case(b, a).unwrap(),
                "({a},{b}) and ({b},{a}) should land in opposite cases"
            );
        }
    }
}
