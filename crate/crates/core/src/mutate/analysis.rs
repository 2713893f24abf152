use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::{Mutant, MutationDescriptor, MutationType};
use crate::detect::{Status, Verdict};
use crate::program::{Invocation, Program};
use crate::sim::{Circuit, Complex64, StateVector};

/// A fixed set of test cases, grouped into frames, that can be run against
/// any variant of the program it was built for.
pub trait TestSuite: Sync {
    fn name(&self) -> &str;
    fn frame_labels(&self) -> Vec<String>;
    fn case_count(&self, frame: usize) -> usize;
    /// Runs one case against `program`. The same `(frame, case)` must see
    /// the same randomness whichever program is run.
    fn run_case(&self, program: &Program, frame: usize, case: usize) -> Verdict;
    /// Invocations at sizes up to `n_max` for comparing survivors with
    /// the base program.
    fn comparison_invocations(&self, n_max: usize) -> Vec<Invocation>;
    /// Qubit arrays that always start in `|0…0⟩` because they are not
    /// test inputs. Survivors are compared only on columns where these
    /// arrays are zero.
    fn zero_arrays(&self) -> Vec<String> {
        Vec::new()
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum AnalysisError {
    #[error("base program does not pass its own suite: frame {frame} case {case} is {status} ({note})")]
    Sanity { frame: String, case: usize, status: Status, note: String },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MutantResult {
    pub id: String,
    pub descriptor: MutationDescriptor,
    /// Failing case indices, per frame.
    pub fails: Vec<Vec<usize>>,
    /// Cases whose check could not be completed.
    pub inconclusive: usize,
}

impl MutantResult {
    pub fn killed(&self) -> bool {
        self.fails.iter().any(|f| !f.is_empty())
    }

    pub fn killed_in(&self, frame: usize) -> bool {
        !self.fails[frame].is_empty()
    }

    /// `(frame, case)` pairs that failed.
    pub fn killing_cases(&self) -> Vec<(usize, usize)> {
        self.fails.iter().enumerate().flat_map(|(f, cases)| cases.iter().map(move |&c| (f, c))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MutationReport {
    pub program: String,
    pub frames: Vec<String>,
    pub cases: Vec<usize>,
    pub results: Vec<MutantResult>,
    pub elapsed: Option<Duration>,
}

impl MutationReport {
    pub fn killed(&self) -> usize {
        self.results.iter().filter(|r| r.killed()).count()
    }

    pub fn survivors(&self) -> impl Iterator<Item = &MutantResult> {
        self.results.iter().filter(|r| !r.killed())
    }

    /// Mutants of `mtype` and how many of them were killed.
    pub fn per_type(&self, mtype: MutationType) -> (usize, usize) {
        let of_type: Vec<_> = self.results.iter().filter(|r| r.descriptor.mtype == mtype).collect();
        (of_type.len(), of_type.iter().filter(|r| r.killed()).count())
    }

    /// Failing `(case, mutant)` pairs in `frame` for mutants of `mtype`.
    pub fn triggers(&self, frame: usize, mtype: Option<MutationType>) -> usize {
        self.results
            .iter()
            .filter(|r| mtype.is_none_or(|t| r.descriptor.mtype == t))
            .map(|r| r.fails[frame].len())
            .sum()
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, AnalysisError> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| AnalysisError::Pool(e.to_string()))
}

/// Runs every mutant against every case of `suite` after checking that
/// `base` passes all of them. No short-circuiting: trigger counts need
/// every case. Results keep the order of `mutants` regardless of `jobs`.
pub fn run_mutation_analysis<S: TestSuite>(
    suite: &S,
    base: &Program,
    mutants: &[Mutant],
    jobs: usize,
) -> Result<MutationReport, AnalysisError> {
    let started = Instant::now();
    let frames = suite.frame_labels();
    let cases: Vec<usize> = (0..frames.len()).map(|f| suite.case_count(f)).collect();
    let units: Vec<(usize, usize)> = cases.iter().enumerate().flat_map(|(f, &n)| (0..n).map(move |c| (f, c))).collect();
    let pool = pool(jobs)?;

    let base_verdicts: Vec<Verdict> =
        pool.install(|| units.par_iter().map(|&(f, c)| suite.run_case(base, f, c)).collect());
    if let Some((&(f, c), v)) = units.iter().zip(&base_verdicts).find(|(_, v)| v.status != Status::Pass) {
        return Err(AnalysisError::Sanity {
            frame: frames[f].clone(),
            case: c,
            status: v.status,
            note: v.evidence.note.clone(),
        });
    }

    let results = pool.install(|| {
        mutants
            .par_iter()
            .map(|m| {
                let mut fails = vec![Vec::new(); frames.len()];
                let mut inconclusive = 0;
                for &(f, c) in &units {
                    match suite.run_case(&m.mutated, f, c).status {
                        Status::Fail => fails[f].push(c),
                        Status::Inconclusive => inconclusive += 1,
                        Status::Pass => {}
                    }
                }
                MutantResult { id: m.id.clone(), descriptor: m.descriptor.clone(), fails, inconclusive }
            })
            .collect()
    });
    Ok(MutationReport { program: suite.name().to_string(), frames, cases, results, elapsed: Some(started.elapsed()) })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurvivorClass {
    /// Same unitary as the base, up to global phase, at every size tried.
    Equivalent,
    /// Differs from the base; `witness` names a differing basis column.
    Undetected { witness: String },
    /// Not compared (measurement or reset on the path).
    Unverified { reason: String },
}

impl SurvivorClass {
    pub fn label(&self) -> &'static str {
        match self {
            SurvivorClass::Equivalent => "behaviorally-equivalent",
            SurvivorClass::Undetected { .. } => "undetected",
            SurvivorClass::Unverified { .. } => "undetected-unverified",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivorReport {
    pub id: String,
    pub class: SurvivorClass,
}

const EQ_TOL: f64 = 1e-8;

fn column(c: &Circuit, j: usize) -> crate::sim::Result<StateVector> {
    let mut s = StateVector::basis(c.width(), j as u64)?;
    c.apply(&mut s)?;
    Ok(s)
}

/// First of `columns` where `a` and `b` differ beyond one shared global
/// phase, or `None` if they agree.
fn differing_column(a: &Circuit, b: &Circuit, columns: impl IntoIterator<Item = usize>) -> Option<usize> {
    if a.width() != b.width() {
        return Some(0);
    }
    let mut phase: Option<Complex64> = None;
    for j in columns {
        let (Ok(ca), Ok(cb)) = (column(a, j), column(b, j)) else { return Some(j) };
        let phase = *phase.get_or_insert_with(|| {
            let k = (0..ca.dim())
                .max_by(|&x, &y| ca.amplitude(x).norm().total_cmp(&ca.amplitude(y).norm()))
                .expect("nonempty");
            let (x, y) = (ca.amplitude(k), cb.amplitude(k));
            if y.norm() < EQ_TOL {
                Complex64::new(0.0, 0.0)
            } else {
                x / y / (x / y).norm()
            }
        });
        let off = (0..ca.dim()).any(|k| (ca.amplitude(k) - phase * cb.amplitude(k)).norm() > EQ_TOL);
        if off {
            return Some(j);
        }
    }
    None
}

/// Compares each surviving mutant with `base` on every basis input (with
/// the suite's zero arrays at zero) at each comparison invocation the
/// suite offers for sizes up to `n_max`.
pub fn classify_survivors<S: TestSuite>(
    report: &MutationReport,
    base: &Program,
    mutants: &[Mutant],
    suite: &S,
    n_max: usize,
) -> Vec<SurvivorReport> {
    let invocations = suite.comparison_invocations(n_max);
    let zero = suite.zero_arrays();
    report
        .survivors()
        .filter_map(|r| mutants.iter().find(|m| m.id == r.id))
        .map(|m| SurvivorReport { id: m.id.clone(), class: classify_one(base, &m.mutated, &invocations, &zero) })
        .collect()
}

/// Basis columns whose bits in the `zero` arrays are all clear.
fn input_columns(base: &Program, inv: &Invocation, zero: &[String]) -> Option<Vec<usize>> {
    let layout = base.qubit_layout(inv).ok()?;
    let w = layout.width();
    let mask = zero.iter().filter_map(|a| layout.range(a)).flatten().fold(0usize, |m, q| m | 1 << (w - 1 - q));
    Some((0..1usize << w).filter(|j| j & mask == 0).collect())
}

fn classify_one(base: &Program, mutated: &Program, invocations: &[Invocation], zero: &[String]) -> SurvivorClass {
    let mut compared = 0;
    for inv in invocations {
        if !base.is_unitary(&inv.sub) || !mutated.is_unitary(&inv.sub) {
            return SurvivorClass::Unverified { reason: "measurement or reset reachable".into() };
        }
        let Ok(a) = base.trace_circuit(inv) else { continue };
        let Some(columns) = input_columns(base, inv, zero) else { continue };
        let b = match mutated.trace_circuit(inv) {
            Ok(b) => b,
            Err(e) => return SurvivorClass::Undetected { witness: format!("{}: mutant errors: {e}", describe(inv)) },
        };
        // Bad qubit indices fail on every column, so one column is enough.
        if column(&a, 0).is_err() {
            continue;
        }
        if let Err(e) = column(&b, 0) {
            return SurvivorClass::Undetected { witness: format!("{}: mutant errors: {e}", describe(inv)) };
        }
        compared += 1;
        if let Some(j) = differing_column(&a, &b, columns) {
            return SurvivorClass::Undetected { witness: format!("{}: basis column {j} differs", describe(inv)) };
        }
    }
    if compared == 0 {
        SurvivorClass::Unverified { reason: "no comparable invocation".into() }
    } else {
        SurvivorClass::Equivalent
    }
}

fn describe(inv: &Invocation) -> String {
    let args: Vec<String> = inv.args.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{}({})", inv.sub, args.join(", "))
}
