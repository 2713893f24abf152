use rayon::prelude::*;

use super::HarnessError;
use crate::detect::{
    plan_detector, preparation_circuit, sbd_frequency_check, tbd_check, Detector, Evidence, SbdConfig, Status, Verdict,
};
use crate::io::{ClassicalExpectation, IOMark, ProgramSpec, SpecContext};
use crate::mutate::TestSuite;
use crate::partition::{sample_cases, InputBinding, Preparation, SampleConfig, TestFrame};
use crate::program::{Invocation, Layout, Program, RunOutput};
use crate::sim::{RandomStream, StateVector};

/// Probabilities at least this close to 1 are checked on a single run.
const CERTAIN: f64 = 1.0 - 1e-9;

/// Detection settings shared by every case of a suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub sbd: SbdConfig,
    /// Transform-based checks per case.
    pub qra_repeats: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { sbd: SbdConfig::default(), qra_repeats: 1, seed: 42 }
    }
}

enum Check {
    /// Pure input; the detector was chosen from the expected output.
    Quantum {
        input: StateVector,
        detector: Detector,
    },
    /// Mixed input; each execution draws a member and checks its image.
    Mixed,
    Classical {
        input: StateVector,
        var: String,
        expect: ClassicalExpectation,
    },
}

struct CasePlan {
    binding: InputBinding,
    inv: Invocation,
    layout: Layout,
    check: Check,
}

impl CasePlan {
    fn blocks(&self) -> Vec<std::ops::Range<usize>> {
        self.layout.arrays.iter().map(|(_, r)| r.clone()).collect()
    }
}

/// Sampled cases of one plan with their checks, runnable against the
/// base program or any mutant of it.
pub struct Suite {
    name: String,
    spec: ProgramSpec,
    frames: Vec<TestFrame>,
    cases: Vec<Vec<CasePlan>>,
    config: SuiteConfig,
    /// Qubit arrays of the target that are not marked as inputs.
    zero_arrays: Vec<String>,
}

/// Verdicts of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub label: String,
    pub verdicts: Vec<Verdict>,
}

impl FrameResult {
    pub fn count(&self, status: Status) -> usize {
        self.verdicts.iter().filter(|v| v.status == status).count()
    }
}

/// Verdicts of a whole suite, frame by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResults {
    pub program: String,
    pub frames: Vec<FrameResult>,
}

impl SuiteResults {
    pub fn count(&self, status: Status) -> usize {
        self.frames.iter().map(|f| f.count(status)).sum()
    }

    pub fn cases(&self) -> usize {
        self.frames.iter().map(|f| f.verdicts.len()).sum()
    }

    pub fn all_pass(&self) -> bool {
        self.count(Status::Pass) == self.cases()
    }
}

/// Input with every superposition replaced by its first basis component.
fn first_component(binding: &InputBinding, layout: &Layout, drawn: &[Preparation]) -> Option<StateVector> {
    let basis: Vec<Preparation> = drawn
        .iter()
        .map(|p| match p {
            Preparation::Basis { x } | Preparation::TwoValue { x, .. } => Preparation::Basis { x: *x },
            Preparation::Uniform => Preparation::Basis { x: 0 },
        })
        .collect();
    binding.initial_state(layout, &basis).ok()
}

fn fail(note: String, seed: u64) -> Verdict {
    Verdict::new(Status::Fail, Evidence { note, seed, ..Default::default() })
}

impl Suite {
    /// Samples every frame and fixes each case's check from `spec`.
    pub fn build(
        name: &str,
        program: &Program,
        mark: &IOMark,
        spec: ProgramSpec,
        frames: Vec<TestFrame>,
        sample: &SampleConfig,
        config: SuiteConfig,
    ) -> Result<Suite, HarnessError> {
        if config.qra_repeats == 0 {
            return Err(HarnessError::Plan("qra_repeats must be at least 1".into()));
        }
        let root = RandomStream::new(config.seed);
        let mut cases = Vec::with_capacity(frames.len());
        for (f, frame) in frames.iter().enumerate() {
            let bindings = sample_cases(program, frame, mark, sample, &root.derive_path(&[1, f as u64]))?;
            let mut plans = Vec::with_capacity(bindings.len());
            for binding in bindings {
                let inv = binding.invocation(&mark.subroutine);
                let layout = program.qubit_layout(&inv)?;
                let check = Self::plan_check(&spec, &binding, &inv, &layout, config)?;
                plans.push(CasePlan { binding, inv, layout, check });
            }
            cases.push(plans);
        }
        let zero_arrays = program
            .subroutine(&mark.subroutine)?
            .qubit_params()
            .filter(|p| !mark.inputs.iter().any(|v| v.name == p.name))
            .map(|p| p.name.clone())
            .collect();
        Ok(Suite { name: name.to_string(), spec, frames, cases, config, zero_arrays })
    }

    fn plan_check(
        spec: &ProgramSpec,
        binding: &InputBinding,
        inv: &Invocation,
        layout: &Layout,
        config: SuiteConfig,
    ) -> Result<Check, HarnessError> {
        let ctx = SpecContext { width: layout.width(), inv, oracles: &binding.info };
        if binding.has_mixed() {
            if !spec.has_quantum_output() {
                return Err(HarnessError::Plan("mixed quantum inputs need a spec with quantum output".into()));
            }
            return Ok(Check::Mixed);
        }
        // pure bindings consume no randomness when drawn
        let drawn = binding.draw(&mut RandomStream::new(0));
        let input = binding.initial_state(layout, &drawn)?;
        if !spec.has_quantum_output() {
            let (var, expect) = spec.expected_classical(&ctx)?;
            return Ok(Check::Classical { input, var, expect });
        }
        let expected = spec.expected_output(&ctx, &input)?;
        let hints: Vec<StateVector> = first_component(binding, layout, &drawn)
            .map(|h| spec.expected_output(&ctx, &h))
            .transpose()?
            .into_iter()
            .collect();
        let blocks: Vec<_> = layout.arrays.iter().map(|(_, r)| r.clone()).collect();
        let detector = plan_detector(&expected, &blocks, &hints, config.sbd);
        Ok(Check::Quantum { input, detector })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn frames(&self) -> &[TestFrame] {
        &self.frames
    }

    pub fn config(&self) -> SuiteConfig {
        self.config
    }

    /// Input label of one case, for reports and diagnostics.
    pub fn case_label(&self, frame: usize, case: usize) -> String {
        self.cases[frame][case].binding.label()
    }

    /// How the case is judged: `tbd`, `sbd`, `classical` or `mixed-tbd`.
    pub fn detector_kind(&self, frame: usize, case: usize) -> &'static str {
        match &self.cases[frame][case].check {
            Check::Quantum { detector: Detector::SbdFrequency { .. }, .. } => "sbd",
            Check::Quantum { .. } => "tbd",
            Check::Mixed => "mixed-tbd",
            Check::Classical { .. } => "classical",
        }
    }

    /// Whether `program` runs the first case of at least one frame without
    /// a runtime error. Used to discard mutants that crash at every size.
    pub fn dry_run(&self, program: &Program) -> bool {
        let mut rng = RandomStream::new(self.config.seed).derive(3);
        self.cases.iter().filter_map(|c| c.first()).any(|plan| {
            let drawn = plan.binding.draw(&mut rng);
            match plan.binding.initial_state(&plan.layout, &drawn) {
                Ok(input) => program.run(&plan.inv, input, &mut rng).is_ok(),
                Err(_) => false,
            }
        })
    }

    /// Runs every case against `program` on `jobs` worker threads.
    pub fn run(&self, program: &Program, jobs: usize) -> Result<SuiteResults, HarnessError> {
        let units: Vec<(usize, usize)> =
            (0..self.frames.len()).flat_map(|f| (0..self.cases[f].len()).map(move |c| (f, c))).collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| HarnessError::Plan(format!("cannot build worker pool: {e}")))?;
        let verdicts: Vec<Verdict> =
            pool.install(|| units.par_iter().map(|&(f, c)| self.run_case(program, f, c)).collect());
        let mut frames: Vec<FrameResult> =
            self.frames.iter().map(|fr| FrameResult { label: fr.label(), verdicts: Vec::new() }).collect();
        for ((f, _), v) in units.into_iter().zip(verdicts) {
            frames[f].verdicts.push(v);
        }
        Ok(SuiteResults { program: self.name.clone(), frames })
    }

    fn check_quantum(
        &self,
        program: &Program,
        plan: &CasePlan,
        input: &StateVector,
        detector: &Detector,
        streams: &mut Streams,
    ) -> Verdict {
        let seed = streams.seed;
        let first = match program.run(&plan.inv, input.clone(), &mut streams.run) {
            Ok(out) => out,
            Err(e) => return fail(format!("program error: {e}"), seed),
        };
        match detector {
            Detector::Tbd { uncompute } => {
                let mut verdicts = Vec::with_capacity(self.config.qra_repeats);
                let mut out = first;
                for r in 0..self.config.qra_repeats {
                    if r > 0 && out.measured {
                        out = match program.run(&plan.inv, input.clone(), &mut streams.run) {
                            Ok(o) => o,
                            Err(e) => return fail(format!("program error: {e}"), seed),
                        };
                    }
                    verdicts.push(tbd_check(&out.state, uncompute, &mut streams.detect));
                }
                Verdict::combine(verdicts, seed)
            }
            Detector::SbdFrequency { transform, target, expected, config } => {
                let mut error = None;
                let run_rng = &mut streams.run;
                // An unmeasured output is the same every repetition, so
                // transform it once.
                let fixed = if first.measured {
                    None
                } else {
                    let mut state = first.state.clone();
                    if let Some(t) = transform {
                        if let Err(e) = t.apply(&mut state) {
                            return fail(format!("detector error: {e}"), seed);
                        }
                    }
                    Some(state)
                };
                let all: Vec<usize> = (0..first.state.num_qubits()).collect();
                let runner = |rng: &mut RandomStream| -> Result<bool, String> {
                    let hit = |state: &StateVector, rng: &mut RandomStream| -> Result<bool, String> {
                        Ok(state.sample(&all, rng).map_err(|e| e.to_string())?.as_integer() == *target)
                    };
                    if let Some(state) = &fixed {
                        return hit(state, rng);
                    }
                    let mut state = match program.run(&plan.inv, input.clone(), run_rng) {
                        Ok(o) => o.state,
                        Err(e) => {
                            error = Some(e.to_string());
                            return Err(format!("program error: {e}"));
                        }
                    };
                    if let Some(t) = transform {
                        t.apply(&mut state).map_err(|e| e.to_string())?;
                    }
                    hit(&state, rng)
                };
                let v = sbd_frequency_check(runner, *expected, *config, &mut streams.detect);
                match error {
                    Some(e) => fail(format!("program error: {e}"), seed),
                    None => v,
                }
            }
            Detector::ClassicalCheck { .. } | Detector::SpecTbd => {
                Verdict::inconclusive("detector does not apply to quantum outputs", seed)
            }
        }
    }

    fn check_mixed(&self, program: &Program, plan: &CasePlan, streams: &mut Streams) -> Verdict {
        let seed = streams.seed;
        let mut verdicts = Vec::with_capacity(self.config.qra_repeats);
        for _ in 0..self.config.qra_repeats {
            let drawn = plan.binding.draw(&mut streams.draw);
            let input = match plan.binding.initial_state(&plan.layout, &drawn) {
                Ok(s) => s,
                Err(e) => return Verdict::inconclusive(e.to_string(), seed),
            };
            let ctx = SpecContext { width: plan.layout.width(), inv: &plan.inv, oracles: &plan.binding.info };
            let expected = match self.spec.expected_output(&ctx, &input) {
                Ok(s) => s,
                Err(e) => return Verdict::inconclusive(e.to_string(), seed),
            };
            let Some(prep) = preparation_circuit(&expected, &plan.blocks()) else {
                return Verdict::inconclusive("expected output of the drawn member is not preparable", seed);
            };
            let out = match program.run(&plan.inv, input, &mut streams.run) {
                Ok(o) => o,
                Err(e) => return fail(format!("program error: {e}"), seed),
            };
            verdicts.push(tbd_check(&out.state, &prep.adjoint(), &mut streams.detect));
        }
        Verdict::combine(verdicts, seed)
    }

    fn check_classical(
        &self,
        program: &Program,
        plan: &CasePlan,
        input: &StateVector,
        var: &str,
        expect: ClassicalExpectation,
        streams: &mut Streams,
    ) -> Verdict {
        let seed = streams.seed;
        let hit = |out: &RunOutput| out.results.get(var) == Some(&expect.value);
        if expect.probability >= CERTAIN {
            for _ in 0..self.config.qra_repeats {
                match program.run(&plan.inv, input.clone(), &mut streams.run) {
                    Ok(out) if hit(&out) => {}
                    Ok(out) => {
                        let got = out.results.get(var).map_or("nothing".to_string(), |v| v.to_string());
                        return fail(format!("`{var}` = {got}, expected {}", expect.value), seed);
                    }
                    Err(e) => return fail(format!("program error: {e}"), seed),
                }
            }
            return Verdict::new(
                Status::Pass,
                Evidence { repetitions: self.config.qra_repeats, seed, ..Default::default() },
            );
        }
        let mut error = None;
        let run_rng = &mut streams.run;
        let runner = |_: &mut RandomStream| match program.run(&plan.inv, input.clone(), run_rng) {
            Ok(out) => Ok(hit(&out)),
            Err(e) => {
                error = Some(e.to_string());
                Err(e.to_string())
            }
        };
        let v = sbd_frequency_check(runner, expect.probability, self.config.sbd, &mut streams.detect);
        match error {
            Some(e) => fail(format!("program error: {e}"), seed),
            None => v,
        }
    }
}

/// Independent substreams for one case, derived from `(frame, case)` only
/// so that every program variant sees the same randomness.
struct Streams {
    seed: u64,
    run: RandomStream,
    detect: RandomStream,
    draw: RandomStream,
}

impl TestSuite for Suite {
    fn name(&self) -> &str {
        &self.name
    }

    fn frame_labels(&self) -> Vec<String> {
        self.frames.iter().map(TestFrame::label).collect()
    }

    fn case_count(&self, frame: usize) -> usize {
        self.cases[frame].len()
    }

    fn run_case(&self, program: &Program, frame: usize, case: usize) -> Verdict {
        let plan = &self.cases[frame][case];
        let root = RandomStream::new(self.config.seed).derive_path(&[2, frame as u64, case as u64]);
        let mut streams =
            Streams { seed: root.seed(), run: root.derive(0), detect: root.derive(1), draw: root.derive(2) };
        match &plan.check {
            Check::Quantum { input, detector } => self.check_quantum(program, plan, input, detector, &mut streams),
            Check::Mixed => self.check_mixed(program, plan, &mut streams),
            Check::Classical { input, var, expect } => {
                self.check_classical(program, plan, input, var, *expect, &mut streams)
            }
        }
    }

    fn zero_arrays(&self) -> Vec<String> {
        self.zero_arrays.clone()
    }

    fn comparison_invocations(&self, n_max: usize) -> Vec<Invocation> {
        let mut out: Vec<Invocation> = Vec::new();
        for plan in self.cases.iter().filter_map(|c| c.first()) {
            let push = |inv: Invocation, out: &mut Vec<Invocation>| {
                if !out.iter().any(|o| o.args == inv.args && o.oracles == inv.oracles) {
                    out.push(inv);
                }
            };
            push(plan.inv.clone(), &mut out);
            for name in plan.inv.args.keys() {
                for n in 1..=n_max as i64 {
                    let mut inv = plan.inv.clone();
                    inv.args.insert(name.clone(), n);
                    push(inv, &mut out);
                }
            }
        }
        out
    }
}
