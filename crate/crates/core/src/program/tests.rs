use super::*;
use crate::sim::{Complex64, RandomStream, StateVector};

const QFT_SRC: &str = include_str!("../harness/assets/qft.qpl");
const INVQFT_SRC: &str = include_str!("../harness/assets/invqft.qpl");

fn qft() -> Program {
    Program::parse(QFT_SRC).unwrap()
}

fn dft_column(n: usize, x: usize) -> StateVector {
    let dim = 1usize << n;
    let amps = (0..dim)
        .map(|y| {
            let phase = 2.0 * std::f64::consts::PI * (x * y) as f64 / dim as f64;
            Complex64::from_polar(1.0 / (dim as f64).sqrt(), phase)
        })
        .collect();
    StateVector::from_amplitudes(amps).unwrap()
}

fn run(p: &Program, inv: &Invocation, init: StateVector) -> StateVector {
    p.run(inv, init, &mut RandomStream::new(1)).unwrap().state
}

#[test]
fn qft_on_one_qubit_is_hadamard() {
    let p = qft();
    let inv = Invocation::new("QFT").arg("n", 1);
    let out = run(&p, &inv, StateVector::basis(1, 0).unwrap());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((out.amplitude(0).re - h).abs() < 1e-12);
    assert!((out.amplitude(1).re - h).abs() < 1e-12);
}

#[test]
fn qft_two_qubits_on_01() {
    let p = qft();
    let out = run(&p, &Invocation::new("QFT").arg("n", 2), StateVector::basis(2, 1).unwrap());
    let want =
        [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5), Complex64::new(-0.5, 0.0), Complex64::new(0.0, -0.5)];
    for (a, b) in out.amplitudes().iter().zip(want) {
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn qft_matches_dft_matrix() {
    let p = qft();
    for n in 1..=5 {
        let inv = Invocation::new("QFT").arg("n", n as i64);
        for x in 0..1usize << n {
            let out = run(&p, &inv, StateVector::basis(n, x as u64).unwrap());
            assert!(out.approx_eq_exact(&dft_column(n, x), 1e-10), "n={n} x={x}");
        }
    }
}

#[test]
fn hand_written_and_derived_inverses_undo_qft() {
    let mut p = parse_sources(&[QFT_SRC, INVQFT_SRC]).unwrap();
    let derived = p.derive_inverse("QFT").unwrap();
    p.insert_subroutine(derived);
    for n in 1..=4i64 {
        for inverse in ["InvQFT", "QFT__adj"] {
            for x in 0..1u64 << n {
                let init = StateVector::basis(n as usize, x).unwrap();
                let mid = run(&p, &Invocation::new("QFT").arg("n", n), init.clone());
                let back = run(&p, &Invocation::new(inverse).arg("n", n), mid);
                assert!(back.approx_eq_exact(&init, 1e-10), "{inverse} n={n} x={x}");
            }
        }
    }
}

#[test]
fn adjoint_call_variant_matches_derived_inverse() {
    let src = format!("{QFT_SRC}\nsub Undo(int n, qubits qs[n]) {{ call QFT[adj](n)(qs); }}\n");
    let mut p = Program::parse(&src).unwrap();
    p.insert_subroutine(p.derive_inverse("QFT").unwrap());
    let init = dft_column(3, 5);
    let a = run(&p, &Invocation::new("Undo").arg("n", 3), init.clone());
    let b = run(&p, &Invocation::new("QFT__adj").arg("n", 3), init);
    assert!(a.approx_eq_exact(&b, 1e-12));
    assert!(a.approx_eq_exact(&StateVector::basis(3, 5).unwrap(), 1e-10));
}

#[test]
fn controlled_variant_acts_only_when_control_is_set() {
    let mut p = qft();
    p.insert_subroutine(p.derive_controlled("QFT").unwrap());
    let inv = Invocation::new("QFT__ctl").arg("n", 2).size(CONTROL_PARAM, 1);
    for x in 0..4u64 {
        let off = StateVector::basis(3, x).unwrap();
        assert!(run(&p, &inv, off.clone()).approx_eq_exact(&off, 1e-12));
        let on = StateVector::basis(3, 4 + x).unwrap();
        let want = StateVector::basis(1, 1).unwrap().tensor(&dft_column(2, x as usize)).unwrap();
        assert!(run(&p, &inv, on).approx_eq_exact(&want, 1e-10), "x={x}");
    }
}

#[test]
fn power_variant_composes() {
    let mut p = qft();
    p.insert_subroutine(p.derive_power("QFT").unwrap());
    let n = 3;
    let init = StateVector::basis(n, 6).unwrap();
    let pow = |k: i64, s: StateVector| run(&p, &Invocation::new("QFT__pow").arg("n", n as i64).arg(POWER_PARAM, k), s);
    // QFT^4 is the identity
    assert!(pow(4, init.clone()).approx_eq_exact(&init, 1e-10));
    assert!(pow(0, init.clone()).approx_eq_exact(&init, 1e-12));
    assert!(pow(-1, pow(1, init.clone())).approx_eq_exact(&init, 1e-10));
    assert!(pow(2, init.clone()).approx_eq_exact(&pow(1, pow(1, init.clone())), 1e-10));
    assert!(pow(-3, init.clone()).approx_eq_exact(&pow(1, init), 1e-10));
}

#[test]
fn pow_call_variant() {
    let src = format!("{QFT_SRC}\nsub Twice(int n, int k, qubits qs[n]) {{ call QFT[pow(k)](n)(qs); }}\n");
    let p = Program::parse(&src).unwrap();
    let init = StateVector::basis(2, 1).unwrap();
    let twice = run(&p, &Invocation::new("Twice").arg("n", 2).arg("k", 2), init.clone());
    let once = run(&p, &Invocation::new("QFT").arg("n", 2), init.clone());
    let again = run(&p, &Invocation::new("QFT").arg("n", 2), once);
    assert!(twice.approx_eq_exact(&again, 1e-12));
    let neg = run(&p, &Invocation::new("Twice").arg("n", 2).arg("k", -1), dft_column(2, 1));
    assert!(neg.approx_eq_exact(&init, 1e-10));
}

#[test]
fn dependency_graph_and_integration_order() {
    let p = qft();
    let g = p.dependency_graph();
    assert_eq!(g.callees("QFT").cloned().collect::<Vec<_>>(), ["CRk", "Reverse"]);
    assert_eq!(g.callees("CRk").count(), 0);
    assert_eq!(g.callers("CRk").cloned().collect::<Vec<_>>(), ["QFT"]);
    assert_eq!(p.integration_order().unwrap(), ["CRk", "Reverse", "QFT"]);

    let only = Program::parse("sub CRk() { } sub Reverse() { } sub QFT() { call CRk()(); call Reverse()(); }").unwrap();
    assert_eq!(only.integration_order().unwrap(), ["CRk", "Reverse", "QFT"]);
}

#[test]
fn cycles_are_reported() {
    let p = Program::parse("sub A(qubits q[1]) { call B()(q); } sub B(qubits q[1]) { call A()(q); } entry A;").unwrap();
    assert!(matches!(p.integration_order(), Err(ProgramError::Cycle(_))));
    let err = p.run_from_zero(&Invocation::new("A"), &mut RandomStream::new(0)).unwrap_err();
    assert!(matches!(err, ProgramError::Recursion { .. }), "{err}");
}

#[test]
fn substitute_replaces_and_checks_signature() {
    let p = qft();
    let fake = parse_subroutine("sub Other(int n, qubits qs[n]) { X qs; }").unwrap();
    let q = p.substitute("Reverse", &fake).unwrap();
    assert_eq!(q.subroutine("Reverse").unwrap().body, fake.body);
    let bad = parse_subroutine("sub Other(qubits qs) { X qs; }").unwrap();
    assert!(matches!(p.substitute("Reverse", &bad), Err(ProgramError::SignatureMismatch(_))));
    assert!(matches!(p.substitute("Nope", &fake), Err(ProgramError::UnknownSubroutine(_))));
}

#[test]
fn oracle_slots_bind_at_run_time_or_by_substitution() {
    let p = Program::parse(
        "oracle F(qubits q[1]) is adj; sub Main(qubits q[1]) { call F()(q); call F[adj]()(q); call F()(q); }",
    )
    .unwrap();
    let x = parse_subroutine("sub Flip(qubits q[1]) { S q; }").unwrap();
    let inv = Invocation::new("Main").oracle("F", x.clone());
    let mut rng = RandomStream::new(0);
    let out = p.run(&inv, StateVector::basis(1, 1).unwrap(), &mut rng).unwrap();
    assert!((out.state.amplitude(1) - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    let err = p.run_from_zero(&Invocation::new("Main"), &mut rng).unwrap_err();
    assert!(matches!(err, ProgramError::UnboundOracle(_)));
    let bound = p.substitute("F", &x).unwrap();
    bound.run_from_zero(&Invocation::new("Main"), &mut rng).unwrap();

    let no_adj = Program::parse("oracle F(qubits q[1]); sub Main(qubits q[1]) { call F[adj]()(q); }").unwrap();
    let err = no_adj.run_from_zero(&Invocation::new("Main").oracle("F", x), &mut rng).unwrap_err();
    assert!(matches!(err, ProgramError::VariantUnsupported { .. }), "{err}");
    let err = no_adj.derive_inverse("Main").unwrap_err();
    assert!(matches!(err, ProgramError::NotInvertible { .. }));
}

#[test]
fn runtime_errors_name_the_location() {
    let p = Program::parse("sub A(int n, qubits qs[n]) {\n    X qs[n];\n}").unwrap();
    let err = p.run_from_zero(&Invocation::new("A").arg("n", 2), &mut RandomStream::new(0)).unwrap_err();
    match &err {
        ProgramError::IndexOutOfRange { index, len, at, .. } => {
            assert_eq!((*index, *len, at.pos.line, at.pos.col), (2, 2, 2, 5));
        }
        other => panic!("{other}"),
    }
    let p = Program::parse("sub A(int n, qubits qs[1]) { k = 1 / (n - n); }").unwrap();
    let err = p.run_from_zero(&Invocation::new("A").arg("n", 2), &mut RandomStream::new(0)).unwrap_err();
    assert!(matches!(err, ProgramError::DivisionByZero { .. }));
}

#[test]
fn measurement_records_results_and_blocks_inversion() {
    let p = Program::parse("sub A(qubits q[2]) { X q[1]; m = measure q; reset q[1]; }").unwrap();
    let out = p.run_from_zero(&Invocation::new("A"), &mut RandomStream::new(0)).unwrap();
    assert_eq!(out.results["m"], 1);
    assert!(out.measured);
    assert!(out.state.approx_eq_exact(&StateVector::zero(2).unwrap(), 1e-12));
    assert!(matches!(p.derive_inverse("A"), Err(ProgramError::NotInvertible { .. })));
    assert!(matches!(p.derive_controlled("A"), Err(ProgramError::NotInvertible { .. })));
    assert!(!p.is_unitary("A"));
}

#[test]
fn inverse_keeps_classical_setup_in_front() {
    let src = "sub A(int n, qubits qs[n]) {
        r = 0;
        for i in 1..n { if (i * i <= n) { r = i; } }
        for i in 1..r { H qs[0]; T qs[0]; }
        R1(pi / 3) qs[n-1];
    }";
    let mut p = Program::parse(src).unwrap();
    p.insert_subroutine(p.derive_inverse("A").unwrap());
    let inv = Invocation::new("A").arg("n", 5);
    let init = StateVector::basis(5, 3).unwrap();
    let mid = run(&p, &inv, init.clone());
    let back = run(&p, &Invocation::new("A__adj").arg("n", 5), mid);
    assert!(back.approx_eq_exact(&init, 1e-12));

    let reuse = Program::parse("sub A(qubits qs[2]) { k = 0; X qs[k]; k = 1; X qs[k]; }").unwrap();
    assert!(reuse.derive_inverse("A").is_err());
}

#[test]
fn trace_matches_direct_execution() {
    let p = qft();
    let inv = Invocation::new("QFT").arg("n", 3);
    let c = p.trace_circuit(&inv).unwrap();
    let mut s = StateVector::basis(3, 2).unwrap();
    c.apply(&mut s).unwrap();
    assert!(s.approx_eq_exact(&dft_column(3, 2), 1e-10));
}

#[test]
fn validate_flags_undefined_names_and_bad_calls() {
    qft().validate().unwrap();
    let bad = Program::parse("sub A(qubits qs[2]) { X qs[j]; }").unwrap();
    assert!(bad.validate().is_err());
    let bad = Program::parse("sub B(int k, qubits q[1]) { } sub A(qubits qs[2]) { call B()(qs); }").unwrap();
    assert!(bad.validate().is_err());
}
