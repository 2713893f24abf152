//! Output checks and verdicts: transform-based detection (undo the
//! expected preparation, expect all zeros), statistic-based detection
//! (frequency within a tolerance), swap-test purity, identity checks and
//! the relations between a subroutine and its variants.

mod synth;
mod variants;

use std::collections::BTreeMap;
use std::fmt;

pub use synth::preparation_circuit;
pub use variants::{test_variants, RelationResult, VariantConfig, VariantSet};

use crate::io::OracleInfo;
use crate::partition::Preparation;
use crate::program::{parse_sources, Invocation, Program, SubroutineDef};
use crate::sim::{Circuit, RandomStream, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// What a check observed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Evidence {
    /// Outcome (as an integer over the measured qubits) to count.
    pub counts: BTreeMap<u64, usize>,
    pub observed: Option<f64>,
    pub expected: Option<f64>,
    pub repetitions: usize,
    pub seed: u64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub evidence: Evidence,
}

impl Verdict {
    pub fn new(status: Status, evidence: Evidence) -> Self {
        Verdict { status, evidence }
    }

    pub fn inconclusive(note: impl Into<String>, seed: u64) -> Self {
        Verdict { status: Status::Inconclusive, evidence: Evidence { note: note.into(), seed, ..Default::default() } }
    }

    pub fn is_pass(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn is_fail(&self) -> bool {
        self.status == Status::Fail
    }

    /// Folds a sequence of verdicts: any Fail wins, then Inconclusive.
    pub fn combine(verdicts: impl IntoIterator<Item = Verdict>, seed: u64) -> Verdict {
        let mut evidence = Evidence { seed, ..Default::default() };
        let mut status = Status::Pass;
        for v in verdicts {
            for (k, c) in v.evidence.counts {
                *evidence.counts.entry(k).or_default() += c;
            }
            evidence.repetitions += v.evidence.repetitions;
            if v.status > status {
                status = v.status;
                evidence.note = v.evidence.note;
            }
        }
        Verdict { status, evidence }
    }
}

/// Sampling parameters for statistic-based detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbdConfig {
    pub tolerance: f64,
    pub repetitions: usize,
}

impl Default for SbdConfig {
    fn default() -> Self {
        SbdConfig { tolerance: 0.1, repetitions: 200 }
    }
}

impl SbdConfig {
    pub fn new(tolerance: f64, repetitions: usize) -> Result<Self, String> {
        if !(tolerance > 0.0 && tolerance < 0.5) {
            return Err(format!("tolerance {tolerance} outside (0, 0.5)"));
        }
        if repetitions == 0 {
            return Err("repetitions must be at least 1".into());
        }
        Ok(SbdConfig { tolerance, repetitions })
    }
}

fn all_qubits(state: &StateVector) -> Vec<usize> {
    (0..state.num_qubits()).collect()
}

/// Applies `uncompute` to a copy of `output` and measures every qubit once.
/// Pass iff the outcome is all zeros.
pub fn tbd_check(output: &StateVector, uncompute: &Circuit, rng: &mut RandomStream) -> Verdict {
    let seed = rng.seed();
    let mut s = output.clone();
    if let Err(e) = uncompute.apply(&mut s) {
        return Verdict::inconclusive(format!("uncompute failed: {e}"), seed);
    }
    match s.sample(&all_qubits(&s), rng) {
        Ok(outcome) => tbd_verdict(outcome.as_integer(), seed),
        Err(e) => Verdict::inconclusive(e.to_string(), seed),
    }
}

fn tbd_verdict(outcome: u64, seed: u64) -> Verdict {
    let status = if outcome == 0 { Status::Pass } else { Status::Fail };
    Verdict::new(status, Evidence { counts: [(outcome, 1)].into(), repetitions: 1, seed, ..Default::default() })
}

/// [`tbd_check`] with the uncompute step given as a subroutine, run on the
/// whole register with classical arguments `args`.
pub fn tbd_check_program(
    output: &StateVector,
    uncompute: &SubroutineDef,
    args: &BTreeMap<String, i64>,
    rng: &mut RandomStream,
) -> Verdict {
    let seed = rng.seed();
    let mut program = Program::default();
    program.insert_subroutine(uncompute.clone());
    let inv = Invocation { sub: uncompute.name.clone(), args: args.clone(), ..Default::default() };
    let run = match program.run(&inv, output.clone(), rng) {
        Ok(r) => r,
        Err(e) => return Verdict::inconclusive(format!("uncompute failed: {e}"), seed),
    };
    match run.state.sample(&all_qubits(&run.state), rng) {
        Ok(outcome) => tbd_verdict(outcome.as_integer(), seed),
        Err(e) => Verdict::inconclusive(e.to_string(), seed),
    }
}

/// Runs `runner` `repetitions` times; each call reports whether the
/// predicate held. Pass iff the hit frequency is within `tolerance` of
/// `expected`.
pub fn sbd_frequency_check<F>(mut runner: F, expected: f64, config: SbdConfig, rng: &mut RandomStream) -> Verdict
where
    F: FnMut(&mut RandomStream) -> Result<bool, String>,
{
    let seed = rng.seed();
    let mut hits = 0;
    for _ in 0..config.repetitions {
        match runner(rng) {
            Ok(true) => hits += 1,
            Ok(false) => {}
            Err(e) => return Verdict::inconclusive(e, seed),
        }
    }
    let observed = hits as f64 / config.repetitions as f64;
    // a hair of slack so boundary frequencies like 0.4 are not lost to rounding
    let status = if (observed - expected).abs() <= config.tolerance + 1e-12 { Status::Pass } else { Status::Fail };
    Verdict::new(
        status,
        Evidence {
            counts: [(1, hits), (0, config.repetitions - hits)].into(),
            observed: Some(observed),
            expected: Some(expected),
            repetitions: config.repetitions,
            seed,
            note: String::new(),
        },
    )
}

/// How to judge one test case.
#[derive(Debug, Clone)]
pub enum Detector {
    /// Undo the expected state and expect all zeros.
    Tbd { uncompute: Circuit },
    /// Apply `transform` (if any), measure everything, and compare the
    /// frequency of `target` against `expected`.
    SbdFrequency { transform: Option<Circuit>, target: u64, expected: f64, config: SbdConfig },
    /// A classical result must equal `value`.
    ClassicalCheck { var: String, value: i64 },
    /// Built per case from the spec and the input binding.
    SpecTbd,
}

/// Chooses a detector for `expected`. TBD when the state can be prepared
/// from closed form; otherwise SBD, undoing the first preparable `hint`
/// (typically the image of one input component) if there is one, else
/// counting the most likely outcome.
pub fn plan_detector(
    expected: &StateVector,
    blocks: &[std::ops::Range<usize>],
    hints: &[StateVector],
    config: SbdConfig,
) -> Detector {
    if let Some(c) = preparation_circuit(expected, blocks) {
        return Detector::Tbd { uncompute: c.adjoint() };
    }
    for hint in hints {
        if let Some(c) = preparation_circuit(hint, blocks) {
            let overlap = hint.inner(expected).map(|z| z.norm_sqr()).unwrap_or(0.0);
            if overlap > 0.05 && overlap < 0.95 {
                return Detector::SbdFrequency { transform: Some(c.adjoint()), target: 0, expected: overlap, config };
            }
        }
    }
    let (target, p) = expected
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| (i as u64, a.norm_sqr()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    Detector::SbdFrequency { transform: None, target, expected: p, config }
}

/// Outcome of one swap-test round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapOutcome {
    Same,
    Different,
}

/// Swap test on two explicit states of equal width.
pub fn swap_test_states(a: &StateVector, b: &StateVector, rng: &mut RandomStream) -> Result<SwapOutcome, String> {
    let n = a.num_qubits();
    if b.num_qubits() != n {
        return Err(format!("register sizes differ: {n} vs {}", b.num_qubits()));
    }
    let mut s = StateVector::zero(1).and_then(|z| z.tensor(a)).and_then(|z| z.tensor(b)).map_err(|e| e.to_string())?;
    let mut c = Circuit::new(2 * n + 1);
    c.gate("H", None, &[], &[0]);
    for i in 0..n {
        c.gate("SWAP", None, &[0], &[1 + i, 1 + n + i]);
    }
    c.gate("H", None, &[], &[0]);
    c.apply(&mut s).map_err(|e| e.to_string())?;
    let m = s.measure(&[0], rng).map_err(|e| e.to_string())?;
    Ok(if m.as_integer() == 0 { SwapOutcome::Same } else { SwapOutcome::Different })
}

const SWAP_TEST: &str = "
sub SwapTest(int n, op A, op B, qubits anc[1], qubits a[n], qubits b[n]) {
    call A(n)(a);
    call B(n)(b);
    H anc[0];
    for i in 0..n-1 {
        ctrl(anc[0]) SWAP a[i], b[i];
    }
    H anc[0];
    m = measure anc[0];
}
";

/// One swap-test round on the states prepared by two `(int n, qubits q[n])`
/// subroutines, each run on its own fresh register.
pub fn swap_test_round(
    prep_a: &SubroutineDef,
    prep_b: &SubroutineDef,
    n: usize,
    rng: &mut RandomStream,
) -> Result<SwapOutcome, String> {
    let program = parse_sources(&[SWAP_TEST]).map_err(|e| e.to_string())?;
    let inv = Invocation::new("SwapTest").arg("n", n as i64).oracle("A", prep_a.clone()).oracle("B", prep_b.clone());
    let out = program.run_from_zero(&inv, rng).map_err(|e| e.to_string())?;
    Ok(if out.results.get("m") == Some(&0) { SwapOutcome::Same } else { SwapOutcome::Different })
}

/// Source of the state whose purity is checked.
#[derive(Debug, Clone)]
pub enum StateSource {
    Generator(SubroutineDef),
    Ensemble(Vec<(f64, StateVector)>),
}

fn draw_member<'a>(ensemble: &'a [(f64, StateVector)], rng: &mut RandomStream) -> &'a StateVector {
    let mut u = rng.uniform();
    for (w, s) in ensemble {
        if u < *w {
            return s;
        }
        u -= w;
    }
    &ensemble.last().expect("nonempty").1
}

/// `t` swap-test rounds on two independent copies; false iff any round
/// reports "different".
pub fn purity_check(source: &StateSource, n: usize, t: usize, rng: &mut RandomStream) -> Result<bool, String> {
    if t == 0 {
        return Err("purity check needs at least one round".into());
    }
    for _ in 0..t {
        let outcome = match source {
            StateSource::Generator(g) => swap_test_round(g, g, n, rng)?,
            StateSource::Ensemble(e) => {
                if e.is_empty() {
                    return Err("empty ensemble".into());
                }
                let a = draw_member(e, rng).clone();
                let b = draw_member(e, rng).clone();
                swap_test_states(&a, &b, rng)?
            }
        };
        if outcome == SwapOutcome::Different {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs `inv` on every prepared input, undoes the preparation and
/// measures. Pass iff every outcome is all zeros.
pub fn identity_on_inputs(
    program: &Program,
    inv: &Invocation,
    inputs: &[Preparation],
    rng: &mut RandomStream,
) -> Verdict {
    let seed = rng.seed();
    let width = match program.qubit_layout(inv) {
        Ok(l) => l.width(),
        Err(e) => return Verdict::inconclusive(e.to_string(), seed),
    };
    let mut evidence = Evidence { seed, ..Default::default() };
    let mut status = Status::Pass;
    for prep in inputs {
        let (state, undo) = match (prep.state(width), prep.circuit(width)) {
            (Ok(s), Ok(c)) => (s, c.adjoint()),
            (Err(e), _) | (_, Err(e)) => return Verdict::inconclusive(e.to_string(), seed),
        };
        let out = match program.run(inv, state, rng) {
            Ok(o) => o.state,
            Err(e) => {
                evidence.note = format!("{}: {e}", prep.label());
                return Verdict::new(Status::Fail, evidence);
            }
        };
        let v = tbd_check(&out, &undo, rng);
        match v.status {
            Status::Inconclusive => return v,
            Status::Fail if status == Status::Pass => {
                status = Status::Fail;
                evidence.note = format!("input {} gave outcome {:?}", prep.label(), v.evidence.counts);
            }
            _ => {}
        }
        for (k, c) in v.evidence.counts {
            *evidence.counts.entry(k).or_default() += c;
        }
        evidence.repetitions += 1;
    }
    Verdict::new(status, evidence)
}

/// Half classical, half two-value inputs over `width` qubits.
pub fn random_inputs(width: usize, count: usize, rng: &mut RandomStream) -> Vec<Preparation> {
    let dim = 1u64 << width;
    (0..count)
        .map(|i| {
            if i % 2 == 0 || dim < 2 {
                Preparation::Basis { x: rng.below(dim) }
            } else {
                let x = rng.below(dim);
                let y = (x + 1 + rng.below(dim - 1)) % dim;
                Preparation::TwoValue { x, y, theta: 0.0 }
            }
        })
        .collect()
}

/// Default input count for identity checks at scale `n`.
pub fn identity_inputs_for(n: usize) -> usize {
    (2 * n * n).max(8)
}

/// Checks that `inv` acts as the identity on `num_inputs` random inputs.
pub fn identity_check(program: &Program, inv: &Invocation, num_inputs: usize, rng: &mut RandomStream) -> Verdict {
    let width = match program.qubit_layout(inv) {
        Ok(l) => l.width(),
        Err(e) => return Verdict::inconclusive(e.to_string(), rng.seed()),
    };
    let inputs = random_inputs(width, num_inputs, rng);
    identity_on_inputs(program, inv, &inputs, rng)
}

/// Oracle descriptions attached to an invocation, for specs.
pub type OracleInfos = BTreeMap<String, OracleInfo>;

#[cfg(test)]
mod tests;
