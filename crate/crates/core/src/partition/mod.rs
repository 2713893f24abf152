//! Equivalence classes over test inputs, their combination into test
//! frames, and concrete input sampling.

mod combine;
mod doubles;
mod prepare;

use std::collections::BTreeMap;
use std::fmt;

pub use combine::{combine, covers_all_pairs, Strategy};
pub use doubles::{Double, DoubleKind};
pub use prepare::{prepare_classical, prepare_two_value, prepare_uniform, Fragment, FragmentState, Preparation};
pub(crate) use prepare::{two_term, x_pattern};

use crate::io::{IOMark, MarkError, OracleInfo, VarKind};
use crate::program::{Invocation, Layout, Program, ProgramError, SubroutineDef};
use crate::sim::{Circuit, RandomStream, SimError, StateVector};

#[derive(Debug, Clone, thiserror::Error)]
pub enum PartitionError {
    #[error("value {value} does not fit in {bits} qubits")]
    Range { value: u64, bits: usize },
    #[error("two-value state needs distinct values, got {0} twice")]
    SameValues(u64),
    #[error("variable `{var}`: {reason}")]
    BadSpec { var: String, reason: String },
    #[error("mixed inputs cannot reach `{0}` (it must support inverse or control)")]
    MixedUnsupported(String),
    #[error("base-choice combination needs a base frame")]
    MissingBase,
    #[error("no classes given for variable `{0}`")]
    Empty(String),
    #[error("frame does not bind input `{0}`")]
    Unbound(String),
    #[error("{0}")]
    Sampling(String),
    #[error(transparent)]
    Mark(#[from] MarkError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub type Result<T> = std::result::Result<T, PartitionError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Classical and superposition inputs.
    Csp,
    /// Classical, superposition and mixed inputs.
    Csmp,
}

/// Classes of quantum data. Beyond the CSP/CSMP classes, finer splits let a
/// plan single out boundary values such as `|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantumClass {
    Classical,
    Superposition,
    Mixed,
    Uniform,
    /// `|0…0⟩` only.
    Zero,
    /// `|x⟩` with `x > 0`.
    Nonzero,
    /// `(|0⟩ + |x⟩)/√2` with `x > 0`.
    ZeroPlusNonzero,
    /// `(|x₁⟩ + |x₂⟩)/√2` with distinct `x₁, x₂ > 0`.
    NonzeroPair,
}

impl QuantumClass {
    pub fn label(self) -> &'static str {
        match self {
            QuantumClass::Classical => "C",
            QuantumClass::Superposition => "S",
            QuantumClass::Mixed => "M",
            QuantumClass::Uniform => "U",
            QuantumClass::Zero => "zero",
            QuantumClass::Nonzero => "x>0",
            QuantumClass::ZeroPlusNonzero => "0+x",
            QuantumClass::NonzeroPair => "x1+x2",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        use QuantumClass::*;
        [Classical, Superposition, Mixed, Uniform, Zero, Nonzero, ZeroPlusNonzero, NonzeroPair]
            .into_iter()
            .find(|c| c.label() == label)
    }

    /// Whether sampled inputs are basis states.
    pub fn is_classical(self) -> bool {
        matches!(self, QuantumClass::Classical | QuantumClass::Zero | QuantumClass::Nonzero)
    }
}

/// Range of a classical scale variable with the value tested for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleBucket {
    pub lo: i64,
    pub hi: Option<i64>,
    pub rep: i64,
}

impl ScaleBucket {
    pub fn exactly(v: i64) -> Self {
        ScaleBucket { lo: v, hi: Some(v), rep: v }
    }

    pub fn at_least(lo: i64, rep: i64) -> Self {
        ScaleBucket { lo, hi: None, rep }
    }

    pub fn label(&self) -> String {
        match self.hi {
            Some(h) if h == self.lo => format!("{h}"),
            Some(h) => format!("{}..{h}", self.lo),
            None => format!(">={}", self.lo),
        }
    }

    fn valid(&self) -> bool {
        self.rep >= self.lo && self.hi.is_none_or(|h| self.rep <= h && h >= self.lo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassDescriptor {
    Quantum(QuantumClass),
    Scale(ScaleBucket),
    DoubleChoice { label: String, double: Double },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceClass {
    pub variable: String,
    pub descriptor: ClassDescriptor,
}

impl EquivalenceClass {
    pub fn label(&self) -> String {
        match &self.descriptor {
            ClassDescriptor::Quantum(c) => c.label().to_string(),
            ClassDescriptor::Scale(b) => b.label(),
            ClassDescriptor::DoubleChoice { label, .. } => label.clone(),
        }
    }
}

impl fmt::Display for EquivalenceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.descriptor {
            ClassDescriptor::Scale(b) => write!(f, "{}={}", self.variable, b.rep),
            _ => write!(f, "{}:{}", self.variable, self.label()),
        }
    }
}

/// How to split one variable.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionSpec {
    /// CSP or CSMP. Subroutine-typed variables become state-generator
    /// doubles sized by the classical variable `size`.
    Criterion {
        criterion: Criterion,
        size: Option<String>,
    },
    Buckets(Vec<ScaleBucket>),
    Classes(Vec<QuantumClass>),
    Doubles(Vec<(String, Double)>),
}

/// Classes for one IO-mark variable. `mixed_ok` says whether the variable's
/// path through the program can carry a mixed state.
pub fn partition_variable(
    var: &crate::io::IoVar,
    spec: &PartitionSpec,
    mixed_ok: bool,
) -> Result<Vec<EquivalenceClass>> {
    let bad = |reason: &str| PartitionError::BadSpec { var: var.name.clone(), reason: reason.to_string() };
    let class = |descriptor| EquivalenceClass { variable: var.name.clone(), descriptor };
    let out: Vec<EquivalenceClass> = match (var.kind, spec) {
        (VarKind::Quantum, PartitionSpec::Criterion { criterion, .. }) => {
            let mut cs = vec![QuantumClass::Classical, QuantumClass::Superposition];
            if *criterion == Criterion::Csmp {
                if !mixed_ok {
                    return Err(PartitionError::MixedUnsupported(var.name.clone()));
                }
                cs.push(QuantumClass::Mixed);
            }
            cs.into_iter().map(|c| class(ClassDescriptor::Quantum(c))).collect()
        }
        (VarKind::Quantum, PartitionSpec::Classes(cs)) => {
            if cs.contains(&QuantumClass::Mixed) && !mixed_ok {
                return Err(PartitionError::MixedUnsupported(var.name.clone()));
            }
            cs.iter().map(|&c| class(ClassDescriptor::Quantum(c))).collect()
        }
        (VarKind::Classical, PartitionSpec::Buckets(bs)) => {
            if let Some(b) = bs.iter().find(|b| !b.valid()) {
                return Err(bad(&format!("representative {} outside bucket {}", b.rep, b.label())));
            }
            bs.iter().map(|b| class(ClassDescriptor::Scale(b.clone()))).collect()
        }
        (VarKind::Subroutine, PartitionSpec::Criterion { criterion, size }) => {
            let size = size.clone().ok_or_else(|| bad("state generators need a size variable"))?;
            let mut kinds = vec![("pure-C", DoubleKind::PureClassical), ("pure-S", DoubleKind::PureSuperposition)];
            if *criterion == Criterion::Csmp {
                if !mixed_ok {
                    return Err(PartitionError::MixedUnsupported(var.name.clone()));
                }
                kinds.push(("mixed", DoubleKind::MixedPair));
            }
            kinds
                .into_iter()
                .map(|(label, kind)| {
                    class(ClassDescriptor::DoubleChoice {
                        label: label.to_string(),
                        double: Double { kind, size: size.clone() },
                    })
                })
                .collect()
        }
        (VarKind::Subroutine, PartitionSpec::Doubles(ds)) => {
            if ds.iter().any(|(_, d)| d.kind == DoubleKind::MixedPair) && !mixed_ok {
                return Err(PartitionError::MixedUnsupported(var.name.clone()));
            }
            ds.iter()
                .map(|(label, double)| {
                    class(ClassDescriptor::DoubleChoice { label: label.clone(), double: double.clone() })
                })
                .collect()
        }
        (kind, _) => return Err(bad(&format!("this partition does not apply to {kind:?} variables"))),
    };
    if out.is_empty() {
        return Err(PartitionError::Empty(var.name.clone()));
    }
    Ok(out)
}

/// One class per input variable.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFrame {
    pub classes: Vec<EquivalenceClass>,
}

impl TestFrame {
    pub fn class(&self, var: &str) -> Option<&EquivalenceClass> {
        self.classes.iter().find(|c| c.variable == var)
    }

    pub fn label(&self) -> String {
        self.classes.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
    }

    /// Whether every quantum-data class in the frame yields basis states.
    pub fn is_classical_input(&self) -> bool {
        self.classes.iter().all(|c| match &c.descriptor {
            ClassDescriptor::Quantum(q) => q.is_classical(),
            _ => true,
        })
    }
}

/// How many cases to draw per frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseRule {
    /// `2n²` with `n` the named scale variable (default: the first
    /// classical input of the mark).
    TwoNSquared(Option<String>),
    Fixed(usize),
}

/// Relative phase of sampled two-value states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaRule {
    Fixed(f64),
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig {
    pub cases: CaseRule,
    pub theta: ThetaRule,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { cases: CaseRule::TwoNSquared(None), theta: ThetaRule::Fixed(0.0) }
    }
}

/// Concrete inputs for one test case.
#[derive(Debug, Clone)]
pub struct InputBinding {
    pub case: usize,
    pub args: BTreeMap<String, i64>,
    pub fragments: Vec<Fragment>,
    pub oracles: BTreeMap<String, SubroutineDef>,
    pub info: BTreeMap<String, OracleInfo>,
}

impl InputBinding {
    pub fn invocation(&self, sub: &str) -> Invocation {
        Invocation {
            sub: sub.to_string(),
            args: self.args.clone(),
            sizes: BTreeMap::new(),
            oracles: self.oracles.clone(),
        }
    }

    pub fn fragment(&self, array: &str) -> Option<&Fragment> {
        self.fragments.iter().find(|f| f.array == array)
    }

    pub fn has_mixed(&self) -> bool {
        self.fragments.iter().any(Fragment::is_mixed)
    }

    /// Preparations for one execution, one per fragment, drawing mixed
    /// members from `rng` (pure bindings consume nothing).
    pub fn draw(&self, rng: &mut RandomStream) -> Vec<Preparation> {
        self.fragments.iter().map(|f| f.draw(rng).clone()).collect()
    }

    /// Full-register input: drawn fragments in their arrays, `|0⟩` elsewhere.
    pub fn initial_state(&self, layout: &Layout, drawn: &[Preparation]) -> Result<StateVector> {
        let mut acc: Option<StateVector> = None;
        for (array, range) in &layout.arrays {
            let width = range.len();
            if width == 0 {
                continue;
            }
            let part = match self.fragments.iter().position(|f| &f.array == array) {
                Some(i) => drawn[i].state(width)?,
                None => StateVector::zero(width)?,
            };
            acc = Some(match acc {
                None => part,
                Some(a) => a.tensor(&part)?,
            });
        }
        acc.ok_or_else(|| PartitionError::Sampling("layout has no qubits".into()))
    }

    /// Circuit preparing [`InputBinding::initial_state`] from `|0…0⟩`.
    pub fn input_circuit(&self, layout: &Layout, drawn: &[Preparation]) -> Result<Circuit> {
        let mut c = Circuit::new(layout.width());
        for (i, f) in self.fragments.iter().enumerate() {
            let range = layout.range(&f.array).ok_or_else(|| PartitionError::Unbound(f.array.clone()))?;
            let local = drawn[i].circuit(f.width)?;
            for op in local.ops() {
                let mut op = op.clone();
                op.controls.iter_mut().chain(op.targets.iter_mut()).for_each(|q| *q += range.start);
                c.push(op);
            }
        }
        Ok(c)
    }

    pub fn label(&self) -> String {
        let mut parts: Vec<String> = self.fragments.iter().map(|f| format!("{}={}", f.array, f.label())).collect();
        for (name, info) in &self.info {
            parts.push(match info {
                OracleInfo::PhaseOracle { marked } => format!("{name}=marks{marked:?}"),
                OracleInfo::PhasePower { numerator, bits } => format!("{name}=phase{numerator}/2^{bits}"),
                OracleInfo::StateSource { ensemble } => format!("{name}=source({})", ensemble.len()),
            });
        }
        parts.join(" ")
    }
}

pub(crate) fn draw_distinct(rng: &mut RandomStream, lo: u64, hi: u64) -> Option<(u64, u64)> {
    if hi <= lo + 1 {
        return None;
    }
    let x = lo + rng.below(hi - lo);
    let mut y = lo + rng.below(hi - lo - 1);
    if y >= x {
        y += 1;
    }
    Some((x, y))
}

fn sample_quantum(
    class: QuantumClass,
    width: usize,
    theta: ThetaRule,
    rng: &mut RandomStream,
) -> Result<FragmentState> {
    let dim = 1u64 << width;
    let too_small = || PartitionError::Sampling(format!("{} needs more than {width} qubits", class.label()));
    let theta = |rng: &mut RandomStream| match theta {
        ThetaRule::Fixed(t) => t,
        ThetaRule::Random => rng.uniform() * std::f64::consts::TAU,
    };
    let pure = |p| Ok(FragmentState::Pure(p));
    match class {
        QuantumClass::Classical => pure(Preparation::Basis { x: rng.below(dim) }),
        QuantumClass::Zero => pure(Preparation::Basis { x: 0 }),
        QuantumClass::Nonzero => {
            if dim < 2 {
                return Err(too_small());
            }
            pure(Preparation::Basis { x: 1 + rng.below(dim - 1) })
        }
        QuantumClass::Superposition => {
            let (x, y) = draw_distinct(rng, 0, dim).ok_or_else(too_small)?;
            let theta = theta(rng);
            pure(Preparation::TwoValue { x, y, theta })
        }
        QuantumClass::ZeroPlusNonzero => {
            let y = 1 + rng.below(dim - 1);
            let theta = theta(rng);
            pure(Preparation::TwoValue { x: 0, y, theta })
        }
        QuantumClass::NonzeroPair => {
            let (x, y) = draw_distinct(rng, 1, dim).ok_or_else(too_small)?;
            let theta = theta(rng);
            pure(Preparation::TwoValue { x, y, theta })
        }
        QuantumClass::Uniform => pure(Preparation::Uniform),
        QuantumClass::Mixed => {
            let (x, y) = draw_distinct(rng, 0, dim).ok_or_else(too_small)?;
            let w = 0.25 + 0.5 * rng.uniform();
            Ok(FragmentState::Mixed(vec![(w, Preparation::Basis { x }), (1.0 - w, Preparation::Basis { x: y })]))
        }
    }
}

/// Draws the cases of one frame. Every case uses its own substream of
/// `rng`, so cases are reproducible individually.
pub fn sample_cases(
    program: &Program,
    frame: &TestFrame,
    mark: &IOMark,
    config: &SampleConfig,
    rng: &RandomStream,
) -> Result<Vec<InputBinding>> {
    let sub = program.subroutine(&mark.subroutine)?;
    let mut args = BTreeMap::new();
    for var in &mark.inputs {
        let class = frame.class(&var.name).ok_or_else(|| PartitionError::Unbound(var.name.clone()))?;
        if let ClassDescriptor::Scale(b) = &class.descriptor {
            args.insert(mark.resolve_param(sub, var)?.to_string(), b.rep);
        }
    }
    let count = match &config.cases {
        CaseRule::Fixed(k) => *k,
        CaseRule::TwoNSquared(scale) => {
            let var = match scale {
                Some(v) => mark.input(v).ok_or_else(|| PartitionError::Unbound(v.clone()))?,
                None => mark
                    .inputs
                    .iter()
                    .find(|v| v.kind == VarKind::Classical)
                    .ok_or_else(|| PartitionError::Sampling("no scale variable for 2n² cases".into()))?,
            };
            let n = args[mark.resolve_param(sub, var)?];
            (2 * n * n).max(1) as usize
        }
    };
    let layout =
        program.qubit_layout(&Invocation { sub: mark.subroutine.clone(), args: args.clone(), ..Default::default() })?;
    let mut out = Vec::with_capacity(count);
    for case in 0..count {
        let mut crng = rng.derive(case as u64);
        let mut binding = InputBinding {
            case,
            args: args.clone(),
            fragments: Vec::new(),
            oracles: BTreeMap::new(),
            info: BTreeMap::new(),
        };
        for var in &mark.inputs {
            let class = frame.class(&var.name).expect("checked above");
            let param = mark.resolve_param(sub, var)?;
            match &class.descriptor {
                ClassDescriptor::Scale(_) => {}
                ClassDescriptor::Quantum(q) => {
                    let width = layout.range(param).map_or(0, |r| r.len());
                    binding.fragments.push(Fragment {
                        array: param.to_string(),
                        width,
                        state: sample_quantum(*q, width, config.theta, &mut crng)?,
                    });
                }
                ClassDescriptor::DoubleChoice { double, .. } => {
                    let (def, info) = double.generate(param, &args, &mut crng)?;
                    binding.oracles.insert(param.to_string(), def);
                    if let Some(info) = info {
                        binding.info.insert(param.to_string(), info);
                    }
                }
            }
        }
        out.push(binding);
    }
    Ok(out)
}
