use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::program::{Invocation, Program, ProgramError};
use crate::sim::{Complex64, DensityMatrix, RandomStream, SimError, StateVector, NORM_TOL};

/// What a bound test double does, in terms a spec can evaluate.
#[derive(Debug, Clone)]
pub enum OracleInfo {
    /// `|x⟩ → -|x⟩` for `x` in `marked`, identity elsewhere.
    PhaseOracle { marked: Vec<u64> },
    /// `U^p |t⟩ = exp(2πi·p·numerator·t / 2^bits) |t⟩`.
    PhasePower { numerator: u64, bits: u32 },
    /// Prepares one ensemble member per call.
    StateSource { ensemble: Vec<(f64, StateVector)> },
}

/// Everything a spec procedure may look at for one test case.
#[derive(Clone, Copy)]
pub struct SpecContext<'a> {
    /// Register width of the entry point's layout.
    pub width: usize,
    pub inv: &'a Invocation,
    pub oracles: &'a BTreeMap<String, OracleInfo>,
}

impl SpecContext<'_> {
    pub fn arg(&self, name: &str) -> Result<i64, SpecError> {
        self.inv.args.get(name).copied().ok_or_else(|| SpecError::MissingArgument(name.to_string()))
    }

    pub fn oracle(&self, name: &str) -> Result<&OracleInfo, SpecError> {
        self.oracles.get(name).ok_or_else(|| SpecError::MissingOracle(name.to_string()))
    }
}

/// Expected value of a classical result and the probability of seeing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalExpectation {
    pub value: i64,
    pub probability: f64,
}

pub type BasisMap = Arc<dyn Fn(&SpecContext, u64) -> Result<StateVector, SpecError> + Send + Sync>;
pub type OutcomeRule = Arc<dyn Fn(&SpecContext) -> Result<ClassicalExpectation, SpecError> + Send + Sync>;

/// Expected behavior of the subroutine under test.
#[derive(Clone)]
pub enum ProgramSpec {
    /// Image of each basis state; superpositions follow by linearity.
    UnitaryFormula(BasisMap),
    /// A trusted program run with the same invocation.
    ReferenceProgram(Program),
    /// Expected distribution of one classical result variable.
    ClassicalPredicate { var: String, rule: OutcomeRule },
    /// Output equals input.
    Identity,
}

impl fmt::Debug for ProgramSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProgramSpec::UnitaryFormula(_) => write!(f, "UnitaryFormula"),
            ProgramSpec::ReferenceProgram(p) => write!(f, "ReferenceProgram({})", p.entry()),
            ProgramSpec::ClassicalPredicate { var, .. } => write!(f, "ClassicalPredicate({var})"),
            ProgramSpec::Identity => write!(f, "Identity"),
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SpecError {
    #[error("spec has no quantum output")]
    NoQuantumOutput,
    #[error("spec has no classical output")]
    NoClassicalOutput,
    #[error("spec needs argument `{0}`")]
    MissingArgument(String),
    #[error("spec needs oracle `{0}`")]
    MissingOracle(String),
    #[error("oracle `{0}` has the wrong kind for this spec")]
    OracleKind(String),
    #[error("formula column {column} has norm² {norm}")]
    NotNormalized { column: u64, norm: f64 },
    #[error("formula column {column} has {got} qubits, expected {expected}")]
    Width { column: u64, got: usize, expected: usize },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Program(#[from] ProgramError),
}

/// Amplitudes below this are skipped when expanding over the basis.
const NEGLIGIBLE: f64 = 1e-15;

impl ProgramSpec {
    pub fn formula<F>(f: F) -> Self
    where
        F: Fn(&SpecContext, u64) -> Result<StateVector, SpecError> + Send + Sync + 'static,
    {
        ProgramSpec::UnitaryFormula(Arc::new(f))
    }

    pub fn classical<F>(var: &str, rule: F) -> Self
    where
        F: Fn(&SpecContext) -> Result<ClassicalExpectation, SpecError> + Send + Sync + 'static,
    {
        ProgramSpec::ClassicalPredicate { var: var.to_string(), rule: Arc::new(rule) }
    }

    pub fn has_quantum_output(&self) -> bool {
        !matches!(self, ProgramSpec::ClassicalPredicate { .. })
    }

    /// Expected output state for `input`, which spans the whole layout.
    pub fn expected_output(&self, ctx: &SpecContext, input: &StateVector) -> Result<StateVector, SpecError> {
        match self {
            ProgramSpec::Identity => Ok(input.clone()),
            ProgramSpec::UnitaryFormula(map) => {
                let mut acc = vec![Complex64::new(0.0, 0.0); input.dim()];
                for (j, &a) in input.amplitudes().iter().enumerate() {
                    if a.norm() < NEGLIGIBLE {
                        continue;
                    }
                    let column = map(ctx, j as u64)?;
                    if column.num_qubits() != input.num_qubits() {
                        return Err(SpecError::Width {
                            column: j as u64,
                            got: column.num_qubits(),
                            expected: input.num_qubits(),
                        });
                    }
                    let norm = column.norm_sqr();
                    if (norm - 1.0).abs() > NORM_TOL {
                        return Err(SpecError::NotNormalized { column: j as u64, norm });
                    }
                    for (slot, c) in acc.iter_mut().zip(column.amplitudes()) {
                        *slot += a * c;
                    }
                }
                Ok(StateVector::from_amplitudes_normalized(acc)?)
            }
            ProgramSpec::ReferenceProgram(program) => {
                let mut rng = RandomStream::new(0);
                Ok(program.run(ctx.inv, input.clone(), &mut rng)?.state)
            }
            ProgramSpec::ClassicalPredicate { .. } => Err(SpecError::NoQuantumOutput),
        }
    }

    pub fn expected_classical(&self, ctx: &SpecContext) -> Result<(String, ClassicalExpectation), SpecError> {
        match self {
            ProgramSpec::ClassicalPredicate { var, rule } => Ok((var.clone(), rule(ctx)?)),
            _ => Err(SpecError::NoClassicalOutput),
        }
    }
}

/// Probability that `t` swap-test rounds on two independent copies of the
/// ensemble all report "same".
pub fn all_rounds_same(ensemble: &[(f64, StateVector)], t: u32) -> Result<f64, SpecError> {
    let rho = DensityMatrix::from_ensemble(ensemble)?;
    let different = (1.0 - rho.purity()) / 2.0;
    Ok((1.0 - different).powi(t as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::formulas::{qft_column, qft_spec};

    fn ctx<'a>(width: usize, inv: &'a Invocation, oracles: &'a BTreeMap<String, OracleInfo>) -> SpecContext<'a> {
        SpecContext { width, inv, oracles }
    }

    #[test]
    fn formula_extends_by_linearity() {
        let inv = Invocation::new("QFT").arg("n", 2);
        let none = BTreeMap::new();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[0] = Complex64::new(h, 0.0);
        amps[2] = Complex64::new(h, 0.0);
        let input = StateVector::from_amplitudes(amps).unwrap();
        let out = qft_spec().expected_output(&ctx(2, &inv, &none), &input).unwrap();
        let (c0, c2) = (qft_column(2, 0).unwrap(), qft_column(2, 2).unwrap());
        for k in 0..4 {
            let want = (c0.amplitude(k) + c2.amplitude(k)) * h;
            assert!((out.amplitude(k) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_and_reference_specs() {
        let inv = Invocation::new("F").arg("n", 2);
        let none = BTreeMap::new();
        let input = StateVector::basis(2, 3).unwrap();
        let same = ProgramSpec::Identity.expected_output(&ctx(2, &inv, &none), &input).unwrap();
        assert_eq!(same, input);

        let program = Program::parse("sub F(int n, qubits q[n]) { H q[0]; CNOT q[0], q[1]; }").unwrap();
        let direct = program.run(&inv, input.clone(), &mut RandomStream::new(9)).unwrap().state;
        let via = ProgramSpec::ReferenceProgram(program).expected_output(&ctx(2, &inv, &none), &input).unwrap();
        assert_eq!(direct, via);

        let c = ProgramSpec::classical("r", |_| Ok(ClassicalExpectation { value: 1, probability: 1.0 }));
        assert!(matches!(c.expected_output(&ctx(2, &inv, &none), &input), Err(SpecError::NoQuantumOutput)));
    }

    #[test]
    fn swap_test_probability_for_maximally_mixed_qubit() {
        let mixed = [(0.5, StateVector::basis(1, 0).unwrap()), (0.5, StateVector::basis(1, 1).unwrap())];
        assert!((all_rounds_same(&mixed, 10).unwrap() - 0.75f64.powi(10)).abs() < 1e-12);
        let pure = [(1.0, StateVector::basis(1, 1).unwrap())];
        assert!((all_rounds_same(&pure, 10).unwrap() - 1.0).abs() < 1e-12);
    }
}
