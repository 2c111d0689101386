use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::adversary::{build_depolarizing_attack, random_attack, NoiseChannelSpec, ReturnTriple};
use crate::fock::FockLabel;

const TOL: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn sum(vs: &[(&EveVector, f64)]) -> EveVector {
    let mut out = zero_vector(vs[0].0.len());
    for (v, s) in vs {
        for (a, x) in out.iter_mut().zip(v.iter()) {
            *a += x * *s;
        }
    }
    out
}

fn depolarizing(qz: f64, qx: f64, pf: f64, pr: f64) -> ObservedStatistics {
    let m = build_depolarizing_attack(&NoiseChannelSpec::new(qz, qx, pf, pr).unwrap()).unwrap();
    analytic_statistics(&m.first, &m.second).unwrap().0
}

fn closed_form(qz: f64, qx: f64, pf: f64, pr: f64) -> ObservedStatistics {
    let eta = (1.0 - pf) * (1.0 - pr);
    ObservedStatistics {
        e00: 0.25 * (1.0 - qz),
        e01: 0.25 * qz,
        e10: 0.25 * qz,
        e11: 0.25 * (1.0 - qz),
        m_total: 0.5,
        p0_plus: 0.125,
        p1_plus: 0.125,
        p_plus_plus: 1.0 - qx,
        p_ctrl_0: 0.5,
        p_ctrl_1: 0.5,
        p_double: 0.0,
        p_create_0: 0.0,
        p_create_1: 0.0,
    }
    .scaled(eta)
}

fn assert_close(a: &ObservedStatistics, b: &ObservedStatistics, tol: f64) {
    for ((name, x), y) in ObservedStatistics::FIELD_NAMES
        .iter()
        .zip(a.values())
        .zip(b.values())
    {
        assert!((x - y).abs() <= tol, "{name}: {x} vs {y}");
    }
}

fn check_identities(first: &FirstAttack, second: &SecondAttack) {
    let (s, v) = analytic_statistics(first, second).unwrap();
    s.validate().unwrap();
    let e: [f64; 4] = core::array::from_fn(|i| norm_sqr(&v.e[i]));
    for (i, x) in s.raw_key().iter().enumerate() {
        assert!((e[i] - x).abs() < TOL, "<E{i}>");
    }
    let re01 = v.e_inner(0, 1).re;
    assert!((2.0 * re01 - (2.0 * s.p0_plus - e[0] - e[1])).abs() < TOL);
    let re23 = v.e_inner(2, 3).re;
    assert!((2.0 * re23 - (2.0 * s.p1_plus - e[2] - e[3])).abs() < TOL);

    let a = sum(&[(&v.e[0], 1.0), (&v.e[2], 1.0), (&v.g0, -1.0), (&v.h0, 1.0)]);
    let b = sum(&[(&v.e[1], 1.0), (&v.e[3], 1.0), (&v.g1, -1.0), (&v.h1, 1.0)]);
    let ab = sum(&[(&a, 1.0), (&b, 1.0)]);
    assert!((norm_sqr(&ab) - s.p_plus_plus).abs() < TOL, "p++");
    assert!((2.0 * norm_sqr(&a) - s.p_ctrl_0).abs() < TOL, "pctrl0");
    assert!((2.0 * norm_sqr(&b) - s.p_ctrl_1).abs() < TOL, "pctrl1");
    assert!(
        (2.0 * norm_sqr(&v.g0) - s.p_create_0).abs() < TOL,
        "pcreate0"
    );
    assert!(
        (2.0 * norm_sqr(&v.g1) - s.p_create_1).abs() < TOL,
        "pcreate1"
    );
    assert!(check_double_click_bound(&v, &s));
}

#[test]
fn depolarizing_matches_closed_form() {
    for &(qz, qx, pf, pr) in &[
        (0.0, 0.0, 0.0, 0.0),
        (0.05, 0.05, 0.0, 0.0),
        (0.1, 0.18, 0.0, 0.0),
        (0.2, 0.1, 0.3, 0.4),
        (0.5, 0.5, 0.9, 0.1),
    ] {
        assert_close(
            &depolarizing(qz, qx, pf, pr),
            &closed_form(qz, qx, pf, pr),
            TOL,
        );
    }
}

#[test]
fn forward_loss_one_kills_everything() {
    let s = depolarizing(0.1, 0.1, 1.0, 0.0);
    assert!(s.values().iter().all(|v| v.abs() < TOL));
}

#[test]
fn identities_hold_for_depolarizing() {
    let m =
        build_depolarizing_attack(&NoiseChannelSpec::new(0.07, 0.12, 0.2, 0.1).unwrap()).unwrap();
    check_identities(&m.first, &m.second);
}

#[test]
fn identities_hold_for_random_attacks() {
    for seed in 0..40 {
        let m = random_attack(seed, 1 + (seed as usize % 4), 2).unwrap();
        check_identities(&m.first, &m.second);
    }
}

// Each input gets its own three output directions, so U_R is an isometry
// whenever every amplitude triple is a unit vector.
fn block_attack(input_dim: usize, inputs: &[(FockLabel, usize, [f64; 3])]) -> SecondAttack {
    let dim = 3 * inputs.len();
    let unit = |i: usize, a: f64| {
        let mut v = zero_vector(dim);
        v[i] = c(a);
        v
    };
    let mut actions = BTreeMap::new();
    for (j, &(label, k, [a, b, z])) in inputs.iter().enumerate() {
        actions.insert(
            (label, k),
            ReturnTriple {
                g01: unit(3 * j, a),
                g10: unit(3 * j + 1, b),
                g00: unit(3 * j + 2, z),
            },
        );
    }
    SecondAttack::new(input_dim, dim, actions).unwrap()
}

// Eve injects |1,1> and sends back at most one photon.
#[test]
fn double_click_bound_with_two_photon_attack() {
    let mut injected = BTreeMap::new();
    injected.insert(FockLabel::VACUUM, vec![c(0.6), c(0.0)]);
    injected.insert(FockLabel::new(1, 1), vec![c(0.0), c(0.8)]);
    let first = FirstAttack::new(2, injected).unwrap();
    let r = core::f64::consts::FRAC_1_SQRT_2;
    let second = block_attack(
        2,
        &[
            (FockLabel::VACUUM, 0, [0.3, 0.0, (0.91f64).sqrt()]),
            (FockLabel::new(1, 1), 1, [0.5, 0.5, r]),
            (FockLabel::ZERO, 1, [1.0, 0.0, 0.0]),
            (FockLabel::ONE, 1, [0.0, 1.0, 0.0]),
            (FockLabel::VACUUM, 1, [0.0, 0.0, 1.0]),
        ],
    );
    let (s, v) = analytic_statistics(&first, &second).unwrap();
    assert!((s.p_double - 0.64).abs() < TOL);
    assert!((norm_sqr(&v.h0) - 0.08).abs() < TOL);
    assert!((norm_sqr(&v.h1) - 0.08).abs() < TOL);
    assert!((norm_sqr(&v.h_vac) - 0.16).abs() < TOL);
    assert!((s.p_create_0 - 0.36 * 0.09).abs() < TOL);
    assert!(check_double_click_bound(&v, &s));
    check_identities(&first, &second);
}

#[test]
fn non_isometric_second_attack_is_rejected() {
    let m = build_depolarizing_attack(&NoiseChannelSpec::lossless(0.1, 0.1).unwrap()).unwrap();
    let mut actions = BTreeMap::new();
    for (key, t) in m.second.inputs() {
        let mut t = t.clone();
        for x in t.g01.iter_mut() {
            *x *= 2.0;
        }
        actions.insert(*key, t);
    }
    match SecondAttack::new(m.second.input_dim(), m.second.output_dim(), actions) {
        Err(_) => {}
        Ok(bad) => assert!(matches!(
            analytic_statistics(&m.first, &bad),
            Err(Error::NotIsometric)
        )),
    }
}

#[test]
fn scaled_and_validate() {
    let s = closed_form(0.1, 0.1, 0.0, 0.0);
    s.validate().unwrap();
    let t = s.scaled(0.5);
    assert!((t.m_total - 0.25).abs() < TOL);
    let mut bad = s;
    bad.m_total = 0.4;
    assert!(bad.validate().is_err());
    assert_eq!(field(&s, "p_plus_plus"), Some(0.9));
    assert_eq!(field(&s, "nope"), None);
}

#[test]
fn monte_carlo_within_five_sigma() {
    let m = build_depolarizing_attack(&NoiseChannelSpec::new(0.1, 0.1, 0.1, 0.2).unwrap()).unwrap();
    let (exact, _) = analytic_statistics(&m.first, &m.second).unwrap();
    let est = monte_carlo_statistics(&m.first, &m.second, 200_000, 7).unwrap();
    for ((x, y), se) in exact
        .values()
        .iter()
        .zip(est.stats.values())
        .zip(est.std_errors.values())
    {
        assert!((x - y).abs() <= 5.0 * se, "{x} vs {y} ({se})");
    }
}

#[test]
fn monte_carlo_counts_double_clicks() {
    let m = random_attack(3, 3, 2).unwrap();
    let (exact, _) = analytic_statistics(&m.first, &m.second).unwrap();
    assert!(exact.p_double > 0.01);
    let est = monte_carlo_statistics(&m.first, &m.second, 200_000, 1).unwrap();
    for ((x, y), se) in exact
        .values()
        .iter()
        .zip(est.stats.values())
        .zip(est.std_errors.values())
    {
        assert!((x - y).abs() <= 5.0 * se, "{x} vs {y} ({se})");
    }
}

#[test]
fn monte_carlo_is_deterministic_and_chunk_additive() {
    let m = build_depolarizing_attack(&NoiseChannelSpec::lossless(0.05, 0.05).unwrap()).unwrap();
    let rounds = 2 * CHUNK_ROUNDS + 17;
    let a = monte_carlo_statistics(&m.first, &m.second, rounds, 11).unwrap();
    let b = monte_carlo_statistics(&m.first, &m.second, rounds, 11).unwrap();
    assert_eq!(a, b);
    let c = monte_carlo_statistics(&m.first, &m.second, rounds, 12).unwrap();
    assert_ne!(a.tally, c.tally);

    let sampler = RoundSampler::new(&m.first, &m.second, OperationWeights::default()).unwrap();
    let chunks: Vec<_> = RoundSampler::chunks(rounds).collect();
    assert_eq!(chunks.len(), 3);
    let reversed = chunks
        .iter()
        .rev()
        .fold(RoundTally::default(), |acc, &(i, n)| {
            acc.merge(&sampler.run_chunk(11, i, n))
        });
    assert_eq!(reversed, a.tally);
    assert_eq!(a.tally.rounds, rounds);
}

#[test]
fn monte_carlo_error_shrinks_like_inverse_sqrt() {
    let m = build_depolarizing_attack(&NoiseChannelSpec::lossless(0.1, 0.1).unwrap()).unwrap();
    let small = monte_carlo_statistics(&m.first, &m.second, 10_000, 3).unwrap();
    let large = monte_carlo_statistics(&m.first, &m.second, 1_000_000, 3).unwrap();
    let ratio = small.std_errors.e00 / large.std_errors.e00;
    assert!((ratio - 10.0).abs() < 0.5, "{ratio}");
}

#[test]
fn monte_carlo_rejects_zero_rounds() {
    let m = build_depolarizing_attack(&NoiseChannelSpec::lossless(0.1, 0.1).unwrap()).unwrap();
    assert!(matches!(
        monte_carlo_statistics(&m.first, &m.second, 0, 0),
        Err(Error::ZeroRounds)
    ));
    let bad = OperationWeights {
        ctrl: -1.0,
        ..OperationWeights::default()
    };
    assert!(RoundSampler::new(&m.first, &m.second, bad).is_err());
}

#[test]
fn weights_do_not_bias_conditional_frequencies() {
    let m = build_depolarizing_attack(&NoiseChannelSpec::lossless(0.1, 0.2).unwrap()).unwrap();
    let (exact, _) = analytic_statistics(&m.first, &m.second).unwrap();
    let w = OperationWeights {
        ctrl: 0.7,
        swap_x: 0.2,
        swap_all: 0.1,
    };
    let est = monte_carlo_statistics_with_weights(&m.first, &m.second, 300_000, 5, w).unwrap();
    assert!((exact.p_plus_plus - est.stats.p_plus_plus).abs() <= 5.0 * est.std_errors.p_plus_plus);
    assert!((exact.e00 - est.stats.e00).abs() <= 5.0 * est.std_errors.e00);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_attacks_give_valid_statistics(seed in any::<u64>(), dim in 1usize..5) {
        let m = random_attack(seed, dim, 2).unwrap();
        let (s, v) = analytic_statistics(&m.first, &m.second).unwrap();
        prop_assert!(s.validate().is_ok());
        prop_assert!(check_double_click_bound(&v, &s));
    }

    #[test]
    fn depolarizing_closed_form(qz in 0.0..=0.5f64, qx in 0.0..=0.5f64, pf in 0.0..1.0f64, pr in 0.0..1.0f64) {
        let a = depolarizing(qz, qx, pf, pr);
        let b = closed_form(qz, qx, pf, pr);
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() < TOL);
        }
    }
}
