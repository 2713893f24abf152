use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

use super::*;
use crate::io::formulas::qft_column;
use crate::program::parse_subroutine;
use crate::sim::DensityMatrix;

const QFT: &str = include_str!("../harness/assets/qft.qpl");

fn qft() -> Program {
    Program::parse(QFT).unwrap()
}

/// P(|X/reps − p_exp| ≤ tol) for X ~ Binomial(reps, p), summed term by term.
fn binomial_pass_probability(reps: u64, p: f64, p_exp: f64, tol: f64) -> f64 {
    let mut total = 0.0;
    let mut log_choose = 0.0f64;
    for k in 0..=reps {
        if k > 0 {
            log_choose += ((reps - k + 1) as f64).ln() - (k as f64).ln();
        }
        if ((k as f64 / reps as f64) - p_exp).abs() <= tol + 1e-12 {
            total += (log_choose + k as f64 * p.ln() + (reps - k) as f64 * (1.0 - p).ln()).exp();
        }
    }
    total
}

#[test]
fn tbd_documented_cases() {
    let mut rng = RandomStream::new(1);
    let plus = StateVector::from_amplitudes_normalized(vec![Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)]).unwrap();
    let mut h = Circuit::new(1);
    h.gate("H", None, &[], &[0]);
    for _ in 0..50 {
        assert!(tbd_check(&plus, &h, &mut rng).is_pass());
    }
    let one = StateVector::basis(1, 1).unwrap();
    let v = tbd_check(&one, &Circuit::new(1), &mut rng);
    assert!(v.is_fail());
    assert_eq!(v.evidence.counts, [(1, 1)].into());
}

type Complex = crate::sim::Complex64;

#[test]
fn tbd_with_uncompute_subroutine() {
    let undo = parse_subroutine("sub Undo(int n, qubits q[n]) { H q; }").unwrap();
    let plus2 = StateVector::from_amplitudes_normalized(vec![Complex::new(1.0, 0.0); 4]).unwrap();
    let args = [("n".to_string(), 2)].into();
    let mut rng = RandomStream::new(3);
    assert!(tbd_check_program(&plus2, &undo, &args, &mut rng).is_pass());
    let bad = parse_subroutine("sub Undo(int n, qubits q[n]) { H q[7]; }").unwrap();
    assert_eq!(tbd_check_program(&plus2, &bad, &args, &mut rng).status, Status::Inconclusive);
}

#[test]
fn qft_classical_outputs_pass_synthesized_uncompute() {
    let p = qft();
    let mut rng = RandomStream::new(5);
    for n in 1..=6usize {
        let inv = Invocation::new("QFT").arg("n", n as i64);
        for j in 0..1u64 << n {
            let out = p.run(&inv, StateVector::basis(n, j).unwrap(), &mut rng).unwrap().state;
            let expected = qft_column(n, j).unwrap();
            let Detector::Tbd { uncompute } = plan_detector(&expected, &[0..n], &[], SbdConfig::default()) else {
                panic!("QFT columns are product states");
            };
            assert!(tbd_check(&out, &uncompute, &mut rng).is_pass(), "n={n} j={j}");
        }
    }
}

#[test]
fn tbd_flags_a_wrong_qft_output() {
    let n = 3;
    let expected = qft_column(n, 5).unwrap();
    let uncompute = preparation_circuit(&expected, &[0..n]).unwrap().adjoint();
    let wrong = qft_column(n, 4).unwrap();
    // orthogonal columns: every run fails
    let mut rng = RandomStream::new(8);
    assert!((0..20).all(|_| tbd_check(&wrong, &uncompute, &mut rng).is_fail()));
}

#[test]
fn sbd_documented_cases() {
    let mut rng = RandomStream::new(11);
    let cfg = SbdConfig::default();
    let v = sbd_frequency_check(|_| Ok(false), 0.5, cfg, &mut rng);
    assert!(v.is_fail());
    assert_eq!(v.evidence.counts[&0], 200);
    let v = sbd_frequency_check(|r| Ok(r.coin(0.5)), 0.5, cfg, &mut rng);
    assert!(v.is_pass());
    assert_eq!(v.evidence.repetitions, 200);
    let v = sbd_frequency_check(|_| Err("boom".into()), 0.5, cfg, &mut rng);
    assert_eq!(v.status, Status::Inconclusive);
    assert!(SbdConfig::new(0.5, 10).is_err());
    assert!(SbdConfig::new(0.1, 0).is_err());
}

#[test]
fn sbd_tail_bounds_match_binomial_oracle() {
    // both directions of the calibration requirement
    assert!(binomial_pass_probability(200, 0.5, 0.5, 0.1) >= 0.99);
    assert!(1.0 - binomial_pass_probability(200, 0.75, 0.5, 0.1) >= 0.99);
    let cfg = SbdConfig::default();
    let root = RandomStream::new(12);
    let passes = (0..400)
        .filter(|&i| {
            let mut rng = root.derive(i);
            sbd_frequency_check(|r| Ok(r.coin(0.5)), 0.5, cfg, &mut rng).is_pass()
        })
        .count();
    assert!(passes >= 392, "{passes}");
}

#[test]
fn sbd_on_qft_two_value_output() {
    // (|1⟩+|6⟩)/√2 through QFT, undo the image of |1⟩: outcome 0 about half the time
    let n = 3;
    let p = qft();
    let inv = Invocation::new("QFT").arg("n", 3);
    let input = Preparation::TwoValue { x: 1, y: 6, theta: 0.0 }.state(n).unwrap();
    let mut rng = RandomStream::new(13);
    let out = p.run(&inv, input, &mut rng).unwrap().state;
    let hint = qft_column(n, 1).unwrap();
    let expected = crate::io::formulas::qft_spec();
    let ctx = crate::io::SpecContext { width: 3, inv: &inv, oracles: &BTreeMap::new() };
    let want =
        expected.expected_output(&ctx, &Preparation::TwoValue { x: 1, y: 6, theta: 0.0 }.state(n).unwrap()).unwrap();
    let Detector::SbdFrequency { transform: Some(t), target, expected, config } =
        plan_detector(&want, &[0..n], &[hint], SbdConfig::default())
    else {
        panic!("expected SBD with transform");
    };
    assert_eq!(target, 0);
    assert!((expected - 0.5).abs() < 1e-9);
    let v = sbd_frequency_check(
        |r| {
            let mut s = out.clone();
            t.apply(&mut s).map_err(|e| e.to_string())?;
            Ok(s.sample(&[0, 1, 2], r).map_err(|e| e.to_string())?.as_integer() == target)
        },
        expected,
        config,
        &mut rng,
    );
    assert!(v.is_pass(), "{v:?}");
    let f = v.evidence.observed.unwrap();
    assert!((0.4..=0.6).contains(&f));
}

#[test]
fn swap_test_statistics() {
    let mut rng = RandomStream::new(21);
    let zero = StateVector::basis(1, 0).unwrap();
    let one = StateVector::basis(1, 1).unwrap();
    assert!((0..200).all(|_| swap_test_states(&zero, &zero, &mut rng).unwrap() == SwapOutcome::Same));
    let reps = 10_000;
    let diff = (0..reps).filter(|_| swap_test_states(&zero, &one, &mut rng).unwrap() == SwapOutcome::Different).count();
    assert!((diff as f64 / reps as f64 - 0.5).abs() <= 0.02, "{diff}");
    assert!(swap_test_states(&zero, &StateVector::zero(2).unwrap(), &mut rng).is_err());

    // two draws of I/2: P(different) = (1 − Tr ρ²)/2 = 1/4
    let mixed = vec![(0.5, zero.clone()), (0.5, one.clone())];
    let rho = DensityMatrix::from_ensemble(&mixed).unwrap();
    let p_diff = (1.0 - rho.purity()) / 2.0;
    let diff = (0..reps)
        .filter(|_| {
            let a = draw_member(&mixed, &mut rng).clone();
            let b = draw_member(&mixed, &mut rng).clone();
            swap_test_states(&a, &b, &mut rng).unwrap() == SwapOutcome::Different
        })
        .count();
    let sigma = (p_diff * (1.0 - p_diff) / reps as f64).sqrt();
    assert!((diff as f64 / reps as f64 - p_diff).abs() <= 4.0 * sigma, "{diff}");
}

#[test]
fn swap_test_round_on_generators() {
    let zero = parse_subroutine("sub Z0(int n, qubits q[n]) { }").unwrap();
    let one = parse_subroutine("sub O1(int n, qubits q[n]) { X q; }").unwrap();
    let mut rng = RandomStream::new(22);
    assert!((0..50).all(|_| swap_test_round(&zero, &zero, 2, &mut rng).unwrap() == SwapOutcome::Same));
    let diff =
        (0..400).filter(|_| swap_test_round(&zero, &one, 1, &mut rng).unwrap() == SwapOutcome::Different).count();
    // 4σ around 200
    assert!((diff as i64 - 200).abs() <= 40, "{diff}");
}

#[test]
fn purity_documented_cases() {
    let plus = parse_subroutine("sub Plus(int n, qubits q[n]) { H q; }").unwrap();
    let mut rng = RandomStream::new(31);
    for t in [1, 10] {
        assert!((0..30).all(|_| purity_check(&StateSource::Generator(plus.clone()), 2, t, &mut rng).unwrap()));
    }
    assert!(purity_check(&StateSource::Generator(plus), 2, 0, &mut rng).is_err());

    let mixed =
        StateSource::Ensemble(vec![(0.5, StateVector::basis(1, 0).unwrap()), (0.5, StateVector::basis(1, 1).unwrap())]);
    let trials = 1000;
    let falses = (0..trials).filter(|_| !purity_check(&mixed, 1, 10, &mut rng).unwrap()).count();
    let want = 1.0 - 0.75f64.powi(10);
    assert!((falses as f64 / trials as f64 - want).abs() <= 0.05, "{falses}");
}

#[test]
fn identity_documented_cases() {
    let mut rng = RandomStream::new(41);
    let empty = Program::parse("sub E(int n, qubits q[n]) { }").unwrap();
    let inv = Invocation::new("E").arg("n", 3);
    assert!(identity_check(&empty, &inv, identity_inputs_for(3), &mut rng).is_pass());
    let flip = Program::parse("sub F(int n, qubits q[n]) { X q[0]; }").unwrap();
    let inv = Invocation::new("F").arg("n", 3);
    let v = identity_check(&flip, &inv, 8, &mut rng);
    assert!(v.is_fail());
    assert_eq!(identity_inputs_for(1), 8);
    assert_eq!(identity_inputs_for(3), 18);
}

#[test]
fn qft_then_inverse_is_identity() {
    let src = [QFT, include_str!("../harness/assets/invqft.qpl")];
    let p = parse_sources(&src).unwrap();
    let mut rng = RandomStream::new(42);
    for n in 1..=4 {
        let inv = Invocation::new("QFTInvCheck").arg("n", n);
        assert!(identity_check(&p, &inv, 20, &mut rng).is_pass());
    }
}

fn all_pass(results: &[RelationResult]) -> bool {
    results.iter().all(|r| r.status() == Some(Status::Pass))
}

#[test]
fn variants_of_h_and_qft_pass() {
    let h = Program::parse("sub Had(int n, qubits q[n]) { H q; }").unwrap();
    let mut rng = RandomStream::new(51);
    let set = VariantSet::derived(&h, "Had").unwrap();
    let cfg = VariantConfig { k_values: (-2..=2).collect(), ..Default::default() };
    let r = test_variants(&h, &Invocation::new("Had").arg("n", 2), &set, &cfg, &mut rng).unwrap();
    assert_eq!(r.len(), 1 + 5 + 2);
    assert!(all_pass(&r), "{r:?}");

    let p = qft();
    let set = VariantSet::derived(&p, "QFT").unwrap();
    let r = test_variants(&p, &Invocation::new("QFT").arg("n", 3), &set, &VariantConfig::default(), &mut rng).unwrap();
    assert!(all_pass(&r), "{r:?}");
}

#[test]
fn controlled_variant_ignoring_controls_fails_zero_bit_relation() {
    let p = qft();
    let mut set = VariantSet::derived(&p, "QFT").unwrap();
    let mut bad = p.subroutine("QFT").unwrap().clone();
    bad.name = "QFT__ctl".into();
    bad.params.insert(0, set.controlled.as_ref().unwrap().params[0].clone());
    set.controlled = Some(bad);
    let mut rng = RandomStream::new(52);
    let r = test_variants(&p, &Invocation::new("QFT").arg("n", 2), &set, &VariantConfig::default(), &mut rng).unwrap();
    let get = |name: &str| r.iter().find(|x| x.relation == name).unwrap().status();
    assert_eq!(get("inverse"), Some(Status::Pass));
    assert_eq!(get("controlled(all-one)"), Some(Status::Pass));
    assert_eq!(get("controlled(zero-bit)"), Some(Status::Fail));
}

#[test]
fn missing_variants_are_skipped() {
    let p = qft();
    let mut rng = RandomStream::new(53);
    let r = test_variants(
        &p,
        &Invocation::new("QFT").arg("n", 2),
        &VariantSet::default(),
        &VariantConfig::default(),
        &mut rng,
    )
    .unwrap();
    assert!(r.iter().all(|x| x.verdict.is_none() && x.note.starts_with("skipped")));
}

#[test]
fn verdicts_are_deterministic() {
    let p = qft();
    let set = VariantSet::derived(&p, "QFT").unwrap();
    let run = || {
        let mut rng = RandomStream::new(99);
        let r =
            test_variants(&p, &Invocation::new("QFT").arg("n", 2), &set, &VariantConfig::default(), &mut rng).unwrap();
        r.into_iter().map(|x| x.verdict).collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

    #[test]
    fn tbd_is_sound_on_two_value_states(n in 1usize..=5, x in 0u64..32, y in 0u64..32, theta in -3.0f64..3.0, seed in 0u64..1000) {
        let (x, y) = (x % (1 << n), y % (1 << n));
        proptest::prop_assume!(x != y);
        let s = Preparation::TwoValue { x, y, theta }.state(n).unwrap();
        let c = preparation_circuit(&s, &[0..n]).unwrap();
        let mut rng = RandomStream::new(seed);
        prop_assert!(tbd_check(&s, &c.adjoint(), &mut rng).is_pass());
    }

    #[test]
    fn sbd_verdict_is_deterministic(seed in 0u64..10_000, p in 0.0f64..1.0) {
        let cfg = SbdConfig::new(0.1, 50).unwrap();
        let a = sbd_frequency_check(|r| Ok(r.coin(p)), p, cfg, &mut RandomStream::new(seed));
        let b = sbd_frequency_check(|r| Ok(r.coin(p)), p, cfg, &mut RandomStream::new(seed));
        prop_assert_eq!(a, b);
    }
}
