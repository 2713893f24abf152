use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::detect::Status;
use crate::io::formulas::grover_iterations;
use crate::program::Invocation;
use crate::sim::{RandomStream, StateVector};

fn shipped(name: &str) -> (TestPlan, Program) {
    let plan = benchmark(name).unwrap().plan().unwrap();
    let program = load_program(&plan).unwrap();
    (plan, program)
}

#[test]
fn every_shipped_plan_passes_its_benchmark() {
    for b in builtin_benchmarks() {
        let plan = b.plan().unwrap();
        assert_eq!(plan.target, b.target, "{}", b.name);
        assert_eq!(plan.mark, b.mark(), "{}", b.name);
        let program = load_program(&plan).unwrap();
        let results = run_plan(&plan, &program, 1).unwrap();
        assert!(results.cases() > 0, "{}", b.name);
        assert_eq!(results.count(Status::Pass), results.cases(), "{}: {results:?}", b.name);
    }
}

#[test]
fn qft_plan_has_six_frames() {
    let (plan, program) = shipped("QFT");
    let suite = build_suite(&plan, &program).unwrap();
    let labels: Vec<String> = suite.frames().iter().map(|f| f.label()).collect();
    assert_eq!(labels, ["n=1 qs:C", "n=1 qs:S", "n=2 qs:C", "n=2 qs:S", "n=6 qs:C", "n=6 qs:S"]);
}

#[test]
fn qft_without_first_hadamard_fails() {
    let (plan, _) = shipped("QFT");
    let broken = crate::program::parse_sources(&[&benchmarks::QFT_SRC.replace("H qs[i];", "")])
        .unwrap()
        .with_entry("QFT")
        .unwrap();
    let results = run_plan(&plan, &broken, 1).unwrap();
    assert!(results.count(Status::Fail) >= 1);
    assert!(!results.all_pass());
}

#[test]
fn unknown_partition_variable_is_a_plan_error() {
    let text = benchmark("Reverse").unwrap().plan_text.replace("[partition.qs]", "[partition.qz]");
    assert!(matches!(TestPlan::parse(&text), Err(HarnessError::Plan(_))));
}

#[test]
fn plan_header_and_unknown_keys_are_rejected() {
    let text = benchmark("Reverse").unwrap().plan_text;
    assert!(TestPlan::parse(&text.replacen(PLAN_HEADER, "qprobe-plan v9", 1)).is_err());
    assert!(TestPlan::parse(&text.replace("[plan]", "[plan]\nshots = 3")).is_err());
}

#[test]
fn memsearch_integrates_bottom_up() {
    let entry = integration("memsearch").unwrap();
    let program = entry.program().unwrap().with_entry("MemSearch").unwrap();
    let plans = entry.plans().unwrap();
    let outcome = run_integration(&program, &plans, &BTreeMap::new(), IntegrationOptions::default()).unwrap();
    assert_eq!(outcome.order, ["PO", "PhaseFlip", "GS", "MemSearch"]);
    assert_eq!(outcome.levels.len(), 4);
    assert!(outcome.all_pass(), "{outcome:?}");
}

#[test]
fn integration_needs_a_plan_per_level() {
    let entry = integration("memsearch").unwrap();
    let program = entry.program().unwrap().with_entry("MemSearch").unwrap();
    let plans: Vec<TestPlan> = entry.plans().unwrap().into_iter().filter(|p| p.target != "GS").collect();
    let err = run_integration(&program, &plans, &BTreeMap::new(), IntegrationOptions::default()).unwrap_err();
    assert!(err.to_string().contains("`GS`"), "{err}");
}

#[test]
fn qft_integration_path_is_callees_first() {
    let (_, program) = shipped("QFT");
    assert_eq!(integration_path(&program, &BTreeMap::new()).unwrap(), ["CRk", "Reverse", "QFT"]);
}

#[test]
fn empty_reports_are_header_only() {
    let tsv = emit_report(Report::Suites(&[]), Format::Tsv);
    assert_eq!(tsv, "program\tframe\tcases\tpass\tfail\tinconclusive\tpass_rate\n");
    assert_eq!(emit_report(Report::Mutations { reports: &[], timing: false }, Format::Tsv).lines().count(), 1);
}

#[test]
fn rates_have_four_decimals() {
    assert_eq!(rate(963, 1311), "0.7346");
    assert_eq!(rate(0, 0), "0.0000");
    assert_eq!(rate(1, 1), "1.0000");
}

#[test]
fn job_count_does_not_change_results() {
    for name in ["QFT", "Purity", "Grover"] {
        let (plan, program) = shipped(name);
        let one = run_plan(&plan, &program, 1).unwrap();
        let many = run_plan(&plan, &program, 8).unwrap();
        assert_eq!(
            emit_report(Report::Suites(&[one]), Format::Tsv),
            emit_report(Report::Suites(&[many]), Format::Tsv),
            "{name}"
        );
    }
}

fn sub(src: &str, name: &str) -> crate::program::SubroutineDef {
    crate::program::parse_sources(&[src]).unwrap().subroutine(name).unwrap().clone()
}

#[test]
fn grover_iteration_loop_matches_closed_form() {
    let (_, program) = shipped("Grover");
    let nothing = sub("sub Nothing(int n, qubits q[n]) { }", "Nothing");
    for n in 1..=10usize {
        let inv = Invocation::new("Grover").arg("n", n as i64).oracle("OracleK", nothing.clone());
        let mut rng = RandomStream::new(0);
        let out = program.run(&inv, StateVector::zero(n).unwrap(), &mut rng).unwrap();
        assert_eq!(out.results["iters"], grover_iterations(n) as i64, "n={n}");
    }
}

#[test]
fn qpe_reads_an_exact_phase() {
    let (_, program) = shipped("QPE");
    // Phase 1/4 on |1>: U^p = R1(p * pi / 2).
    let u = sub("sub U(int p, qubits t[1]) { R1(p * pi / 2) t[0]; }", "U");
    for clock in 2..=4i64 {
        let inv = Invocation::new("QPE").arg("Nclock", clock).arg("Ntarget", 1).oracle("Upower", u.clone());
        let width = clock as usize + 1;
        let mut rng = RandomStream::new(0);
        let out = program.run(&inv, StateVector::basis(width, 1).unwrap(), &mut rng).unwrap();
        // clock = round(2^Nclock / 4), target stays |1>.
        let expect = (((1u64 << clock) / 4) << 1) | 1;
        assert!((out.state.amplitude(expect as usize).norm() - 1.0).abs() < 1e-9, "Nclock={clock}");
    }
}

#[test]
fn marks_spec_flips_exactly_the_marked_state() {
    let (_, program) = shipped("PhaseFlip");
    let spec = named_spec("marks:5", &program, "PhaseFlip").unwrap();
    let inv = Invocation::new("PhaseFlip").arg("n", 3);
    let oracles = BTreeMap::new();
    let ctx = crate::io::SpecContext { width: 3, inv: &inv, oracles: &oracles };
    for j in 0..8u64 {
        let col = spec.expected_output(&ctx, &StateVector::basis(3, j).unwrap()).unwrap();
        let sign = if j == 5 { -1.0 } else { 1.0 };
        assert!((col.amplitude(j as usize).re - sign).abs() < 1e-12, "j={j}");
    }
    assert!(named_spec("marks:x", &program, "PhaseFlip").is_err());
    assert!(named_spec("nonsense", &program, "PhaseFlip").is_err());
}

#[test]
fn buckets_reject_representatives_outside() {
    assert!(parse_bucket("2..5:7").is_err());
    assert!(parse_bucket(">=3:2").is_err());
    assert!(parse_bucket("5..2").is_err());
    assert!(parse_bucket("4:5").is_err());
    assert_eq!(parse_bucket(">=3").unwrap().rep, DEFAULT_REPRESENTATIVE);
    assert_eq!(parse_bucket(">=9").unwrap().rep, 9);
}

proptest! {
    #[test]
    fn buckets_round_trip(lo in 0i64..50, span in 0i64..20, off in 0i64..20, bounded in any::<bool>()) {
        if bounded {
            let hi = lo + span;
            let rep = lo + off.min(span);
            let b = parse_bucket(&format!("{lo}..{hi}:{rep}")).unwrap();
            prop_assert_eq!((b.lo, b.hi, b.rep), (lo, Some(hi), rep));
        } else {
            let b = parse_bucket(&format!(">={lo}:{}", lo + off)).unwrap();
            prop_assert_eq!((b.lo, b.hi, b.rep), (lo, None, lo + off));
            let again = parse_bucket(&b.label()).unwrap();
            prop_assert_eq!(again.lo, lo);
        }
    }
}

#[test]
fn integration_stops_at_the_first_failing_level() {
    let entry = integration("memsearch").unwrap();
    let mut program = entry.program().unwrap().with_entry("MemSearch").unwrap();
    // Without the X conjugation the phase lands on the all-ones state.
    program.insert_subroutine(sub("sub PhaseFlip(int n, qubits qs[n]) { ctrl(qs[0..n-2]) Z qs[n-1]; }", "PhaseFlip"));
    let plans = entry.plans().unwrap();
    let stop = run_integration(&program, &plans, &BTreeMap::new(), IntegrationOptions::default()).unwrap();
    assert_eq!(stop.stopped_at.as_deref(), Some("PhaseFlip"));
    assert_eq!(stop.levels.len(), 2);
    assert!(!stop.all_pass());
    let options = IntegrationOptions { continue_on_failure: true, jobs: 1 };
    let all = run_integration(&program, &plans, &BTreeMap::new(), options).unwrap();
    assert_eq!(all.levels.len(), 4);
    assert!(all.stopped_at.is_none() && !all.all_pass());
}
