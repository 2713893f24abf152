//! Acceptance criteria, one line each. Run with
//! `cargo test -p qprobe-core --test acceptance`.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use qprobe_core::detect::{
    purity_check, sbd_frequency_check, test_variants, SbdConfig, StateSource, Status, VariantConfig, VariantSet,
};
use qprobe_core::harness::{
    benchmark, build_suite, emit_report, load_program, run_mutation, run_plan, Format, MutationOutcome, Report,
    COMPARE_N_MAX,
};
use qprobe_core::mutate::{
    classify_survivors, run_mutation_analysis, Mutant, MutationDescriptor, MutationReport, MutationType, SurvivorClass,
};
use qprobe_core::program::{parse_sources, parse_subroutine, Invocation, Program, StmtPath};
use qprobe_core::sim::{Complex64, DensityMatrix, Gate, RandomStream, StateVector};

/// Benchmarks of the mutation-rate criterion; QPE is a variants demo.
const SEVEN: [&str; 7] = ["Reverse", "MultiSWAP", "QFT", "invQFT", "Purity", "PhaseFlip", "Grover"];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.1?}, limit {limit:?}"))
    }
}

// Direct evaluation of QFT|j> = 2^(-n/2) sum_k exp(2 pi i j k / 2^n) |k>.
fn qft_column(n: usize, j: u64) -> Vec<Complex64> {
    let dim = 1u64 << n;
    let scale = 1.0 / (dim as f64).sqrt();
    (0..dim).map(|k| Complex64::from_polar(scale, 2.0 * PI * ((j * k) % dim) as f64 / dim as f64)).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let program = benchmark("QFT").unwrap().program().unwrap();
    let mut worst = 1.0f64;
    for n in 1..=6usize {
        let inv = Invocation::new("QFT").arg("n", n as i64);
        for j in 0..1u64 << n {
            let out = program.run(&inv, StateVector::basis(n, j).unwrap(), &mut RandomStream::new(0)).unwrap();
            let overlap: Complex64 =
                qft_column(n, j).iter().zip(out.state.amplitudes()).map(|(e, a)| e.conj() * a).sum();
            worst = worst.min(overlap.norm_sqr());
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    check(worst >= 1.0 - 1e-9, format!("min fidelity {worst:.15} over n=1..6, all basis inputs"))
}

const H_POWER: &str = "
sub HPower(int n, qubits qs[n]) {
    H qs;
}
entry HPower;
";

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let qft = benchmark("QFT").unwrap().program().unwrap();
    let hpow = parse_sources(&[H_POWER]).unwrap();
    let config = VariantConfig::default();
    let (mut total, mut passed) = (0, 0);
    for (program, name) in [(&qft, "QFT"), (&hpow, "HPower")] {
        let variants = VariantSet::derived(program, name).unwrap();
        for n in 1..=4i64 {
            let inv = Invocation::new(name).arg("n", n);
            let rng = RandomStream::new(42).derive_path(&[n as u64, name.len() as u64]);
            for r in test_variants(program, &inv, &variants, &config, &mut rng.clone()).unwrap() {
                total += 1;
                if r.status() == Some(Status::Pass) {
                    passed += 1;
                } else {
                    return Err(format!("{name} n={n} {}: {:?} {}", r.relation, r.status(), r.note));
                }
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    check(
        passed == total && total > 0,
        format!("{passed}/{total} relations pass (QFT, HPower; n=1..4; k=-3..3; {} inputs each)", config.num_inputs),
    )
}

fn hand_mutant(id: &str, sub: &str, detail: &str, mutated: Program) -> Mutant {
    let descriptor = MutationDescriptor {
        mtype: MutationType::Sm,
        operation: "exchange-control-target".into(),
        sub: sub.into(),
        path: StmtPath(vec![0]),
        detail: detail.into(),
    };
    Mutant { id: id.into(), descriptor, mutated }
}

type Edits<'a> = Vec<(&'a str, &'a str)>;

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    // (benchmark, subroutine, source edits)
    let cases: [(&str, &str, Edits); 2] = [
        (
            "QFT",
            "QFT",
            vec![
                ("call CRk(j-i+1)(qs[j], qs[i]);", "call CRk(j-i+1)(qs[i], qs[j]);"),
                ("ctrl(ctl[0]) R1(2 * pi / 2 ** k) tgt[0];", "ctrl(tgt[0]) R1(2 * pi / 2 ** k) ctl[0];"),
            ],
        ),
        ("PhaseFlip", "PhaseFlip", vec![("ctrl(qs[0..n-2]) Z qs[n-1];", "ctrl(qs[1..n-1]) Z qs[0];")]),
    ];
    for (bench, target, edits) in cases {
        let entry = benchmark(bench).unwrap();
        let plan = entry.plan().unwrap();
        let program = load_program(&plan).unwrap();
        let suite = build_suite(&plan, &program).unwrap();
        let mut mutants = Vec::new();
        for (i, (from, to)) in edits.iter().enumerate() {
            let sources: Vec<String> = entry.sources.iter().map(|s| s.replace(from, to)).collect();
            assert!(sources.iter().any(|s| s.contains(to)), "edit `{from}` did not apply");
            let refs: Vec<&str> = sources.iter().map(String::as_str).collect();
            let mutated = parse_sources(&refs).unwrap().with_entry(target).unwrap();
            mutants.push(hand_mutant(&format!("{bench}:X-{i}"), target, to, mutated));
        }
        let report = run_mutation_analysis(&suite, &program, &mutants, 4).unwrap();
        let survivors = classify_survivors(&report, &program, &mutants, &suite, COMPARE_N_MAX);
        for (m, r) in mutants.iter().zip(&report.results) {
            let class = survivors.iter().find(|s| s.id == m.id).map(|s| s.class.clone());
            let cases: usize = report.cases.iter().sum();
            lines.push(format!(
                "{} `{}`: {} kills in {cases} cases, {:?}",
                m.id,
                m.descriptor.detail,
                r.fails.iter().map(Vec::len).sum::<usize>(),
                class
            ));
            if r.killed() || class != Some(SurvivorClass::Equivalent) {
                return Err(lines.join("; "));
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(lines.join("; "))
}

fn is_classical_frame(label: &str) -> bool {
    !label.contains(":S")
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut one_sided = 0;
    for name in ["Reverse", "MultiSWAP"] {
        let mut plan = benchmark(name).unwrap().plan().unwrap();
        plan.mutation.as_mut().unwrap().config.types = vec![MutationType::Gm, MutationType::Cm, MutationType::Mm];
        let program = load_program(&plan).unwrap();
        let out = run_mutation(&plan, &program, 4).unwrap();
        let r = &out.report;
        let ci: Vec<usize> = (0..r.frames.len()).filter(|&f| is_classical_frame(&r.frames[f])).collect();
        let si: Vec<usize> = (0..r.frames.len()).filter(|&f| !is_classical_frame(&r.frames[f])).collect();
        let mm_killed_in = |frames: &[usize]| {
            r.results
                .iter()
                .filter(|m| m.descriptor.mtype == MutationType::Mm && frames.iter().any(|&f| m.killed_in(f)))
                .count()
        };
        let (mm_ci, mm_si) = (mm_killed_in(&ci), mm_killed_in(&si));
        one_sided += r
            .results
            .iter()
            .filter(|m| ci.iter().any(|&f| m.killed_in(f)) != si.iter().any(|&f| m.killed_in(f)))
            .count();
        details.push(format!("{name}: {} mutants, MM killed by CI {mm_ci}, by SI {mm_si}", r.results.len()));
        if mm_ci != 0 || mm_si == 0 {
            return Err(details.join("; "));
        }
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    details.push(format!("{one_sided} mutants killed by only one input kind"));
    check(one_sided >= 1, details.join("; "))
}

struct CorpusRun {
    outcomes: Vec<MutationOutcome>,
    elapsed: Duration,
}

impl CorpusRun {
    fn new(jobs: usize) -> CorpusRun {
        let start = Instant::now();
        let outcomes = SEVEN
            .iter()
            .map(|name| {
                let plan = benchmark(name).unwrap().plan().unwrap();
                let program = load_program(&plan).unwrap();
                run_mutation(&plan, &program, jobs).unwrap()
            })
            .collect();
        CorpusRun { outcomes, elapsed: start.elapsed() }
    }

    fn tsv(&self) -> String {
        let reports: Vec<MutationReport> = self.outcomes.iter().map(|o| o.report.clone()).collect();
        let survivors: Vec<_> = self.outcomes.iter().flat_map(|o| o.survivors.clone()).collect();
        emit_report(Report::Mutations { reports: &reports, timing: false }, Format::Tsv)
            + &emit_report(Report::Survivors(&survivors), Format::Tsv)
    }
}

fn criterion_5(run: &CorpusRun) -> Outcome {
    let (mut mutants, mut killed, mut equivalent, mut classified, mut survived) = (0, 0, 0, 0, 0);
    let mut per = Vec::new();
    for (name, o) in SEVEN.iter().zip(&run.outcomes) {
        let eq = o.survivors.iter().filter(|s| s.class == SurvivorClass::Equivalent).count();
        mutants += o.report.results.len();
        killed += o.report.killed();
        equivalent += eq;
        classified += o.survivors.len();
        survived += o.report.results.len() - o.report.killed();
        per.push(format!("{name} {}/{}", o.report.killed(), o.report.results.len() - eq));
    }
    let rate = killed as f64 / (mutants - equivalent) as f64;
    within(run.elapsed, Duration::from_secs(60 * 60))?;
    check(
        mutants >= 150 && rate >= 0.90 && classified == survived,
        format!(
            "{killed} killed of {} non-equivalent ({mutants} mutants, {equivalent} equivalent): rate {rate:.4}; \
             {classified}/{survived} survivors classified; [{}]; {:.1?}",
            mutants - equivalent,
            per.join(", "),
            run.elapsed
        ),
    )
}

const PURE_GENERATORS: [&str; 3] = [
    "sub G(int n, qubits q[n]) { }",
    "sub G(int n, qubits q[n]) { H q; }",
    "sub G(int n, qubits q[n]) { H q[0]; CNOT q[0], q[n-1]; T q[0]; }",
];

// One member of the maximally mixed single-qubit ensemble per call.
const MIXED_GENERATOR: &str = "sub G(int n, qubits q[n]) { H q[0]; m = measure q[0]; }";

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let trials = 1000;
    let root = RandomStream::new(42);
    let mut pure_true = 0;
    for (g, src) in PURE_GENERATORS.iter().enumerate() {
        let source = StateSource::Generator(parse_subroutine(src).unwrap());
        for i in 0..trials {
            pure_true += purity_check(&source, 2, 10, &mut root.derive_path(&[0, g as u64, i])).unwrap() as usize;
        }
    }
    let half = Complex64::new(1.0, 0.0);
    let mixed = StateSource::Ensemble(vec![
        (0.5, StateVector::from_amplitudes(vec![half, Complex64::new(0.0, 0.0)]).unwrap()),
        (0.5, StateVector::from_amplitudes(vec![Complex64::new(0.0, 0.0), half]).unwrap()),
    ]);
    let false_freq =
        (0..trials).filter(|&i| !purity_check(&mixed, 1, 10, &mut root.derive_path(&[1, i])).unwrap()).count() as f64
            / trials as f64;

    // The same statistics through the shipped Purity program.
    let program = benchmark("Purity").unwrap().program().unwrap();
    let run_program = |src: &str, i: u64| {
        let inv = Invocation::new("Purity").arg("n", 1).arg("t", 10).oracle("GenRho", parse_subroutine(src).unwrap());
        program.run_from_zero(&inv, &mut root.derive_path(&[2, i])).unwrap().results["isPure"]
    };
    let program_pure = (0..trials).filter(|&i| run_program(PURE_GENERATORS[1], i) == 1).count();
    let program_false = (0..trials).filter(|&i| run_program(MIXED_GENERATOR, i) == 0).count() as f64 / trials as f64;

    let expected = 1.0 - 0.75f64.powi(10);
    within(start.elapsed(), Duration::from_secs(60))?;
    check(
        pure_true == 3 * trials as usize
            && program_pure == trials as usize
            && (false_freq - expected).abs() <= 0.05
            && (program_false - expected).abs() <= 0.05,
        format!(
            "pure TRUE {pure_true}/{} (program {program_pure}/{trials}); mixed FALSE {false_freq:.4} \
             (program {program_false:.4}), expected {expected:.4} +- 0.05",
            3 * trials
        ),
    )
}

// P(|X/n - p0| <= tol) for X ~ Bin(n, p), summed exactly in log space.
fn binomial_within(n: u64, p: f64, p0: f64, tol: f64) -> f64 {
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, k| {
            *acc += (k as f64).ln();
            Some(*acc)
        }))
        .collect();
    (0..=n)
        .filter(|&k| (k as f64 / n as f64 - p0).abs() <= tol + 1e-12)
        .map(|k| {
            let ln = ln_fact[n as usize] - ln_fact[k as usize] - ln_fact[(n - k) as usize]
                + k as f64 * p.ln()
                + (n - k) as f64 * (1.0 - p).ln();
            ln.exp()
        })
        .sum()
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let config = SbdConfig::default();
    let root = RandomStream::new(42);
    let pass_rate = |p: f64, tag: u64| {
        (0..1000u64)
            .filter(|&i| {
                let runner = |rng: &mut RandomStream| -> Result<bool, String> { Ok(rng.coin(p)) };
                sbd_frequency_check(runner, 0.5, config, &mut root.derive_path(&[tag, i])).is_pass()
            })
            .count() as f64
            / 1000.0
    };
    let (fair, biased) = (pass_rate(0.5, 0), pass_rate(0.75, 1));
    let (oracle_fair, oracle_biased) = (binomial_within(200, 0.5, 0.5, 0.1), binomial_within(200, 0.75, 0.5, 0.1));
    within(start.elapsed(), Duration::from_secs(10))?;
    check(
        fair >= 0.99 && 1.0 - biased >= 0.99 && oracle_fair >= 0.99 && 1.0 - oracle_biased >= 0.99,
        format!(
            "Bernoulli(0.5) pass {fair:.3} (binomial {oracle_fair:.5}); Bernoulli(0.75) fail {:.3} (binomial {:.5})",
            1.0 - biased,
            1.0 - oracle_biased
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let (n, k) = (3usize, 5u64);
    let program = benchmark("Grover").unwrap().program().unwrap();
    // Phase oracle for |101>.
    let oracle = parse_subroutine("sub Mark(int n, qubits q[n]) { X q[1]; ctrl(q[0..1]) Z q[2]; X q[1]; }").unwrap();
    let inv = Invocation::new("Grover").arg("n", n as i64).oracle("OracleK", oracle);
    let out = program.run_from_zero(&inv, &mut RandomStream::new(0)).unwrap();
    let iterations = out.results["iters"];
    let all: Vec<usize> = (0..n).collect();
    let exact = out.state.probability_of(&all, k).unwrap();
    let theta = (1.0 / 8f64.sqrt()).asin();
    let closed_form = ((2.0 * iterations as f64 + 1.0) * theta).sin().powi(2);
    let config = SbdConfig::new(0.03, 1000).unwrap();
    let mut shots = RandomStream::new(42);
    let mut hits = 0usize;
    let runner = |rng: &mut RandomStream| -> Result<bool, String> {
        let hit = out.state.sample(&all, rng).map_err(|e| e.to_string())?.as_integer() == k;
        hits += hit as usize;
        Ok(hit)
    };
    let verdict = sbd_frequency_check(runner, exact, config, &mut shots);
    within(start.elapsed(), Duration::from_secs(10))?;
    check(
        iterations == 2 && verdict.is_pass() && (exact - closed_form).abs() < 1e-12,
        format!(
            "{iterations} iterations; P(K) simulated {exact:.6} (closed form {closed_form:.6}); \
             {hits}/1000 shots = {:.3}, tolerance 0.03",
            hits as f64 / 1000.0
        ),
    )
}

fn criterion_9(first: &CorpusRun) -> Outcome {
    let again = CorpusRun::new(1);
    let (a, b) = (first.tsv(), again.tsv());
    let suites = |jobs| {
        SEVEN
            .iter()
            .map(|name| {
                let plan = benchmark(name).unwrap().plan().unwrap();
                run_plan(&plan, &load_program(&plan).unwrap(), jobs).unwrap()
            })
            .collect::<Vec<_>>()
    };
    let (s1, s8) = (suites(1), suites(8));
    let same_suites = emit_report(Report::Suites(&s1), Format::Tsv) == emit_report(Report::Suites(&s8), Format::Tsv);
    check(
        a == b && same_suites,
        format!(
            "mutation TSV {} bytes identical across jobs 8 and 1: {}; suite TSV identical: {same_suites}",
            a.len(),
            a == b
        ),
    )
}

fn random_circuit(n: usize, depth: usize, rng: &mut RandomStream) -> Vec<(Gate, Vec<usize>, Vec<usize>)> {
    let one = ["X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg"];
    (0..depth)
        .map(|_| {
            let mut qubits: Vec<usize> = (0..n).collect();
            rng.shuffle(&mut qubits);
            match rng.below(5) {
                0 => (Gate::builtin("R1", Some(rng.uniform() * 2.0 * PI)).unwrap(), vec![], vec![qubits[0]]),
                1 => (Gate::builtin("Ry", Some(rng.uniform() * 2.0 * PI)).unwrap(), vec![], vec![qubits[0]]),
                2 => (
                    Gate::builtin(["CNOT", "CZ", "SWAP"][rng.index(3)], None).unwrap(),
                    vec![],
                    vec![qubits[0], qubits[1]],
                ),
                3 => (Gate::builtin(one[rng.index(one.len())], None).unwrap(), vec![], vec![qubits[0]]),
                _ => (Gate::builtin(one[rng.index(one.len())], None).unwrap(), vec![qubits[2]], vec![qubits[0]]),
            }
        })
        .collect()
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let mut rng = RandomStream::new(42);
    let names = ["I", "X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg", "CNOT", "CZ", "SWAP"];
    let mut gates: Vec<Gate> = names.iter().map(|g| Gate::builtin(g, None).unwrap()).collect();
    for _ in 0..20 {
        gates.push(Gate::builtin("R1", Some(rng.uniform() * 4.0 * PI - 2.0 * PI)).unwrap());
        gates.push(Gate::builtin("Ry", Some(rng.uniform() * 4.0 * PI - 2.0 * PI)).unwrap());
    }
    // U^dagger U = I, entry by entry.
    let mut unitarity = 0.0f64;
    for g in &gates {
        let (d, m) = (g.dim(), g.matrix());
        for i in 0..d {
            for j in 0..d {
                let dot: Complex64 = (0..d).map(|k| m[k * d + i].conj() * m[k * d + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                unitarity = unitarity.max((dot - target).norm());
            }
        }
    }
    // Whole circuits: columns stay orthonormal and norms stay 1.
    let n = 4;
    let mut norm_defect = 0.0f64;
    let mut circuit_defect = 0.0f64;
    for _ in 0..50 {
        let circuit = random_circuit(n, 40, &mut rng);
        let columns: Vec<StateVector> = (0..1u64 << n)
            .map(|j| {
                let mut s = StateVector::basis(n, j).unwrap();
                for (g, c, t) in &circuit {
                    s.apply_unitary(g, c, t).unwrap();
                    norm_defect = norm_defect.max((s.norm_sqr() - 1.0).abs());
                }
                s
            })
            .collect();
        for (i, a) in columns.iter().enumerate() {
            for (j, b) in columns.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                circuit_defect = circuit_defect.max((a.inner(b).unwrap() - target).norm());
            }
        }
    }
    // Born rule: sample counts within 4 sigma of n p.
    let mut born_worst = 0.0f64;
    let mut born_support = usize::MAX;
    let shots = 20_000usize;
    for _ in 0..5 {
        let circuit = random_circuit(n, 30, &mut rng);
        let mut s = StateVector::zero(n).unwrap();
        for (g, c, t) in &circuit {
            s.apply_unitary(g, c, t).unwrap();
        }
        let all: Vec<usize> = (0..n).collect();
        born_support = born_support.min(s.support(1e-3).len());
        let mut counts = vec![0usize; 1 << n];
        for _ in 0..shots {
            counts[s.sample(&all, &mut rng).unwrap().as_integer() as usize] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            let p = s.amplitude(k).norm_sqr();
            let sigma = (shots as f64 * p * (1.0 - p)).sqrt().max(1e-9);
            born_worst = born_worst.max((c as f64 - shots as f64 * p).abs() / sigma);
        }
    }
    // Density matrices: ensemble -> matrix -> ensemble -> matrix.
    let mut dm_defect = 0.0f64;
    for _ in 0..50 {
        let parts: Vec<(f64, StateVector)> = (0..3)
            .map(|_| {
                let amps = (0..1 << 2).map(|_| Complex64::new(rng.uniform() - 0.5, rng.uniform() - 0.5)).collect();
                (rng.uniform() + 0.1, StateVector::from_amplitudes_normalized(amps).unwrap())
            })
            .collect();
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        let parts: Vec<(f64, StateVector)> = parts.into_iter().map(|(w, s)| (w / total, s)).collect();
        let rho = DensityMatrix::from_ensemble(&parts).unwrap();
        let back = DensityMatrix::from_ensemble(&rho.to_ensemble().unwrap()).unwrap();
        dm_defect = dm_defect.max(rho.max_abs_diff(&back));
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    check(
        unitarity <= 1e-12
            && circuit_defect <= 1e-12
            && norm_defect <= 1e-9
            && born_worst <= 4.0
            && born_support >= 4
            && dm_defect <= 1e-8,
        format!(
            "gate unitarity {unitarity:.1e}, circuit unitarity {circuit_defect:.1e}, norm {norm_defect:.1e}, \
             Born max {born_worst:.2} sigma (support >= {born_support}), dm round-trip {dm_defect:.1e}"
        ),
    )
}

fn run(number: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("criterion {number:>2} {tag} {name} ({:.1?}): {detail}", start.elapsed());
    outcome.is_ok()
}

fn main() {
    let mut results = vec![
        run(1, "QFT oracle equivalence", criterion_1),
        run(2, "variant identity suites", criterion_2),
        run(3, "equivalent-mutant survival", criterion_3),
        run(4, "MM kills need superposition inputs", criterion_4),
    ];
    let corpus = catch_unwind(|| CorpusRun::new(8)).ok();
    match &corpus {
        Some(c) => results.push(run(5, "mutation kill rate", || criterion_5(c))),
        None => results.push(run(5, "mutation kill rate", || Err("corpus run panicked".into()))),
    }
    results.push(run(6, "purity statistics", criterion_6));
    results.push(run(7, "SBD calibration", criterion_7));
    results.push(run(8, "Grover accuracy", criterion_8));
    match &corpus {
        Some(c) => results.push(run(9, "determinism", || criterion_9(c))),
        None => results.push(run(9, "determinism", || Err("corpus run panicked".into()))),
    }
    results.push(run(10, "simulator properties", criterion_10));
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
