use num_complex::Complex64;

use super::{check_register_size, Gate, RandomStream, Result, SimError, NORM_TOL};

/// Result of measuring an ordered list of qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MeasurementOutcome {
    bits: Vec<u8>,
}

impl MeasurementOutcome {
    pub fn from_bits(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        MeasurementOutcome { bits }
    }

    /// Bits of `value`, most significant first.
    pub fn from_integer(value: u64, width: usize) -> Self {
        let bits = (0..width).map(|i| ((value >> (width - 1 - i)) & 1) as u8).collect();
        MeasurementOutcome { bits }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Big-endian integer value: the first measured qubit is the MSB.
    pub fn as_integer(&self) -> u64 {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b))
    }
}

/// Pure state over `2^n` basis states, qubit 0 on the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: u64) -> Result<Self> {
        check_register_size(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim as u64 {
            return Err(SimError::OutcomeOutOfRange { outcome: index, bits: num_qubits });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    /// Wraps an amplitude vector, checking its length and normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let state = Self::from_amplitudes_unnormalized(amps)?;
        let n2 = state.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized(n2));
        }
        Ok(state)
    }

    /// Wraps an amplitude vector and rescales it to unit norm.
    pub fn from_amplitudes_normalized(amps: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::from_amplitudes_unnormalized(amps)?;
        state.normalize()?;
        Ok(state)
    }

    fn from_amplitudes_unnormalized(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(SimError::BadLength(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_register_size(num_qubits)?;
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n2 = self.norm_sqr();
        if n2 <= f64::MIN_POSITIVE {
            return Err(SimError::ZeroNorm);
        }
        let inv = 1.0 / n2.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    /// Bit mask of `qubit` inside a basis index.
    #[inline]
    pub fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(SimError::QubitOutOfRange { index: q, num_qubits: self.num_qubits });
            }
            if qubits[..i].contains(&q) {
                return Err(SimError::OverlappingQubits(q));
            }
        }
        Ok(())
    }

    /// Applies `gate` to `targets`, conditioned on every qubit in `controls`
    /// being `|1⟩`. `targets[0]` is the most significant bit of the gate's
    /// local basis.
    pub fn apply_unitary(&mut self, gate: &Gate, controls: &[usize], targets: &[usize]) -> Result<()> {
        if targets.len() != gate.arity() {
            return Err(SimError::ArityMismatch {
                gate: gate.name().to_string(),
                arity: gate.arity(),
                given: targets.len(),
            });
        }
        let all: Vec<usize> = controls.iter().chain(targets).copied().collect();
        self.check_qubits(&all)?;
        let ctrl_mask = controls.iter().fold(0, |m, &q| m | self.mask(q));
        let tmasks: Vec<usize> = targets.iter().map(|&q| self.mask(q)).collect();
        self.apply_masked(gate.matrix(), ctrl_mask, &tmasks);
        Ok(())
    }

    fn apply_masked(&mut self, matrix: &[Complex64], ctrl_mask: usize, tmasks: &[usize]) {
        let k = tmasks.len();
        let d = 1usize << k;
        let tmask_all = tmasks.iter().fold(0, |m, &t| m | t);
        if k == 1 {
            let t = tmasks[0];
            let (m00, m01, m10, m11) = (matrix[0], matrix[1], matrix[2], matrix[3]);
            for i in 0..self.amps.len() {
                if i & t != 0 || i & ctrl_mask != ctrl_mask {
                    continue;
                }
                let a0 = self.amps[i];
                let a1 = self.amps[i | t];
                self.amps[i] = m00 * a0 + m01 * a1;
                self.amps[i | t] = m10 * a0 + m11 * a1;
            }
            return;
        }
        let offsets: Vec<usize> =
            (0..d).map(|l| (0..k).filter(|m| (l >> (k - 1 - m)) & 1 == 1).fold(0, |acc, m| acc | tmasks[m])).collect();
        let mut local = vec![Complex64::new(0.0, 0.0); d];
        for i in 0..self.amps.len() {
            if i & tmask_all != 0 || i & ctrl_mask != ctrl_mask {
                continue;
            }
            for (l, off) in offsets.iter().enumerate() {
                local[l] = self.amps[i | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let row = &matrix[r * d..(r + 1) * d];
                self.amps[i | off] = row.iter().zip(&local).map(|(m, a)| m * a).sum();
            }
        }
    }

    /// Outcome of `qubits` (first qubit = MSB) encoded in basis index `i`.
    fn outcome_of(&self, i: usize, masks: &[usize]) -> usize {
        masks.iter().fold(0, |acc, &m| (acc << 1) | usize::from(i & m != 0))
    }

    /// Born distribution over the `2^|qubits|` outcomes.
    pub fn probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.check_qubits(qubits)?;
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect();
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            probs[self.outcome_of(i, &masks)] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Exact probability of observing `outcome` on `qubits`; no collapse.
    pub fn probability_of(&self, qubits: &[usize], outcome: u64) -> Result<f64> {
        if qubits.len() < 64 && outcome >= 1u64 << qubits.len() {
            return Err(SimError::OutcomeOutOfRange { outcome, bits: qubits.len() });
        }
        Ok(self.probabilities(qubits)?[outcome as usize])
    }

    /// Draws an outcome from the Born distribution without collapsing.
    pub fn sample(&self, qubits: &[usize], rng: &mut RandomStream) -> Result<MeasurementOutcome> {
        let probs = self.probabilities(qubits)?;
        let total: f64 = probs.iter().sum();
        if total <= f64::MIN_POSITIVE {
            return Err(SimError::ZeroNorm);
        }
        let r = rng.uniform() * total;
        let mut acc = 0.0;
        let mut chosen = probs.len() - 1;
        for (k, p) in probs.iter().enumerate() {
            acc += p;
            if r < acc && *p > 0.0 {
                chosen = k;
                break;
            }
        }
        // guard against landing on a zero-probability tail through rounding
        if probs[chosen] == 0.0 {
            chosen = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        }
        Ok(MeasurementOutcome::from_integer(chosen as u64, qubits.len()))
    }

    /// Projective measurement in the computational basis with collapse.
    pub fn measure(&mut self, qubits: &[usize], rng: &mut RandomStream) -> Result<MeasurementOutcome> {
        let outcome = self.sample(qubits, rng)?;
        self.collapse(qubits, outcome.as_integer())?;
        Ok(outcome)
    }

    /// Projects onto `outcome` for `qubits` and renormalizes.
    pub fn collapse(&mut self, qubits: &[usize], outcome: u64) -> Result<()> {
        self.check_qubits(qubits)?;
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect();
        for i in 0..self.amps.len() {
            if self.outcome_of(i, &masks) as u64 != outcome {
                self.amps[i] = Complex64::new(0.0, 0.0);
            }
        }
        self.normalize()
    }

    /// Measures `qubits` and flips each one that reads 1 back to `|0⟩`.
    pub fn reset(&mut self, qubits: &[usize], rng: &mut RandomStream) -> Result<()> {
        let outcome = self.measure(qubits, rng)?;
        let x = Gate::builtin("X", None)?;
        for (&q, &b) in qubits.iter().zip(outcome.bits()) {
            if b == 1 {
                self.apply_unitary(&x, &[], &[q])?;
            }
        }
        Ok(())
    }

    /// `self ⊗ other`, with `self` on the leading (most significant) qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.num_qubits + other.num_qubits;
        check_register_size(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { num_qubits: n, amps })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(SimError::DimensionMismatch(self.num_qubits, other.num_qubits));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Equality up to a global phase: `|⟨self|other⟩| ≥ 1 - tol`.
    pub fn approx_eq_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        self.inner(other).map(|z| z.norm() >= 1.0 - tol).unwrap_or(false)
    }

    /// Entrywise equality within `tol`.
    pub fn approx_eq_exact(&self, other: &StateVector, tol: f64) -> bool {
        self.num_qubits == other.num_qubits && self.amps.iter().zip(&other.amps).all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Basis indices with non-negligible amplitude.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.amps.iter().enumerate().filter(|(_, a)| a.norm() > tol).map(|(i, _)| i).collect()
    }
}
