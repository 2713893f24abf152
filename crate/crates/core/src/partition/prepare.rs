use std::f64::consts::FRAC_1_SQRT_2;

use super::PartitionError;
use crate::sim::{Circuit, Complex64, RandomStream, StateVector};

fn check_range(value: u64, n: usize) -> Result<(), PartitionError> {
    if n == 0 || n > crate::sim::MAX_QUBITS || value >= 1u64 << n {
        return Err(PartitionError::Range { value, bits: n });
    }
    Ok(())
}

/// Basis state `|x⟩` on `n` qubits.
pub fn prepare_classical(x: u64, n: usize) -> Result<StateVector, PartitionError> {
    check_range(x, n)?;
    Ok(StateVector::basis(n, x)?)
}

/// Uniform superposition over all `2^n` basis states.
pub fn prepare_uniform(n: usize) -> Result<StateVector, PartitionError> {
    check_range(0, n)?;
    let amp = Complex64::new((1.0 / (1u64 << n) as f64).sqrt(), 0.0);
    Ok(StateVector::from_amplitudes(vec![amp; 1 << n])?)
}

/// `(|x⟩ + e^{iθ}|y⟩)/√2`.
pub fn prepare_two_value(x: u64, y: u64, theta: f64, n: usize) -> Result<StateVector, PartitionError> {
    check_range(x, n)?;
    check_range(y, n)?;
    if x == y {
        return Err(PartitionError::SameValues(x));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[x as usize] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amps[y as usize] = Complex64::from_polar(FRAC_1_SQRT_2, theta);
    Ok(StateVector::from_amplitudes(amps)?)
}

/// How an input fragment was built, kept so detectors can undo it.
#[derive(Debug, Clone, PartialEq)]
pub enum Preparation {
    Basis { x: u64 },
    TwoValue { x: u64, y: u64, theta: f64 },
    Uniform,
}

impl Preparation {
    pub fn state(&self, n: usize) -> Result<StateVector, PartitionError> {
        match *self {
            Preparation::Basis { x } => prepare_classical(x, n),
            Preparation::TwoValue { x, y, theta } => prepare_two_value(x, y, theta, n),
            Preparation::Uniform => prepare_uniform(n),
        }
    }

    /// Gate sequence taking `|0…0⟩` to the prepared state, up to global phase.
    pub fn circuit(&self, n: usize) -> Result<Circuit, PartitionError> {
        let mut c = Circuit::new(n);
        match *self {
            Preparation::Basis { x } => {
                check_range(x, n)?;
                x_pattern(&mut c, n, x, 0);
            }
            Preparation::TwoValue { x, y, theta } => {
                self.state(n)?;
                let (a, b) = (Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::from_polar(FRAC_1_SQRT_2, theta));
                two_term(&mut c, n, (x, a), (y, b), 0);
            }
            Preparation::Uniform => {
                check_range(0, n)?;
                for q in 0..n {
                    c.gate("H", None, &[], &[q]);
                }
            }
        }
        Ok(c)
    }

    pub fn label(&self) -> String {
        match *self {
            Preparation::Basis { x } => format!("|{x}>"),
            Preparation::TwoValue { x, y, theta: 0.0 } => format!("|{x}>+|{y}>"),
            Preparation::TwoValue { x, y, theta } => format!("|{x}>+e^{{i{theta:.4}}}|{y}>"),
            Preparation::Uniform => "uniform".to_string(),
        }
    }
}

fn bit(n: usize, x: u64, q: usize) -> bool {
    (x >> (n - 1 - q)) & 1 == 1
}

/// X on every qubit where `x` has a one, offset by `base`.
pub(crate) fn x_pattern(c: &mut Circuit, n: usize, x: u64, base: usize) {
    for q in (0..n).filter(|&q| bit(n, x, q)) {
        c.gate("X", None, &[], &[base + q]);
    }
}

/// Prepares `a|x⟩ + b|y⟩` (up to global phase) on qubits `base..base+n`.
pub(crate) fn two_term(c: &mut Circuit, n: usize, (x, a): (u64, Complex64), (y, b): (u64, Complex64), base: usize) {
    let pivot = (0..n).find(|&q| bit(n, x, q) != bit(n, y, q)).expect("x != y");
    let ((lo, alo), (hi, ahi)) = if bit(n, x, pivot) { ((y, b), (x, a)) } else { ((x, a), (y, b)) };
    x_pattern(c, n, lo, base);
    c.gate("Ry", Some(2.0 * ahi.norm().atan2(alo.norm())), &[], &[base + pivot]);
    let phase = ahi.arg() - alo.arg();
    if phase.abs() > 1e-15 {
        c.gate("R1", Some(phase), &[], &[base + pivot]);
    }
    for q in (0..n).filter(|&q| q != pivot && bit(n, lo, q) != bit(n, hi, q)) {
        c.gate("CNOT", None, &[], &[base + pivot, base + q]);
    }
}

/// One quantum input: either a pure preparation or an ensemble, one
/// member of which is drawn per execution.
#[derive(Debug, Clone, PartialEq)]
pub enum FragmentState {
    Pure(Preparation),
    Mixed(Vec<(f64, Preparation)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub array: String,
    pub width: usize,
    pub state: FragmentState,
}

impl Fragment {
    pub fn is_mixed(&self) -> bool {
        matches!(self.state, FragmentState::Mixed(_))
    }

    /// The preparation used for one execution.
    pub fn draw(&self, rng: &mut RandomStream) -> &Preparation {
        match &self.state {
            FragmentState::Pure(p) => p,
            FragmentState::Mixed(parts) => {
                let mut u = rng.uniform();
                for (w, p) in parts {
                    if u < *w {
                        return p;
                    }
                    u -= w;
                }
                &parts.last().expect("nonempty ensemble").1
            }
        }
    }

    pub fn label(&self) -> String {
        match &self.state {
            FragmentState::Pure(p) => p.label(),
            FragmentState::Mixed(parts) => {
                parts.iter().map(|(w, p)| format!("{w:.3}:{}", p.label())).collect::<Vec<_>>().join(";")
            }
        }
    }
}
