use super::{Gate, Result, StateVector};

/// One gate application with resolved qubit indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Op {
    pub gate: Gate,
    pub controls: Vec<usize>,
    pub targets: Vec<usize>,
}

impl Op {
    pub fn new(gate: Gate, controls: Vec<usize>, targets: Vec<usize>) -> Self {
        Op { gate, controls, targets }
    }

    pub fn adjoint(&self) -> Op {
        Op { gate: self.gate.adjoint(), controls: self.controls.clone(), targets: self.targets.clone() }
    }
}

/// A flat gate list over local qubit indices `0..width`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Circuit {
    width: usize,
    ops: Vec<Op>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Circuit { width, ops: Vec::new() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, op: Op) {
        debug_assert!(op.controls.iter().chain(&op.targets).all(|&q| q < self.width));
        self.ops.push(op);
    }

    /// Appends a built-in gate. Panics on unknown names; meant for
    /// hand-built circuits, not user input.
    pub fn gate(&mut self, name: &str, angle: Option<f64>, controls: &[usize], targets: &[usize]) -> &mut Self {
        let gate = Gate::builtin(name, angle).expect("built-in gate");
        self.push(Op::new(gate, controls.to_vec(), targets.to_vec()));
        self
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.ops.extend(other.ops.iter().cloned());
    }

    /// Reversed, with every gate replaced by its adjoint.
    pub fn adjoint(&self) -> Circuit {
        Circuit { width: self.width, ops: self.ops.iter().rev().map(Op::adjoint).collect() }
    }

    /// Applies the circuit with local qubit `i` mapped to `qubits[i]`.
    pub fn apply_on(&self, state: &mut StateVector, qubits: &[usize]) -> Result<()> {
        debug_assert!(qubits.len() >= self.width);
        for op in &self.ops {
            let c: Vec<usize> = op.controls.iter().map(|&q| qubits[q]).collect();
            let t: Vec<usize> = op.targets.iter().map(|&q| qubits[q]).collect();
            state.apply_unitary(&op.gate, &c, &t)?;
        }
        Ok(())
    }

    /// Applies the circuit on the leading `width` qubits of `state`.
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        let qubits: Vec<usize> = (0..self.width).collect();
        self.apply_on(state, &qubits)
    }

    /// The state this circuit prepares from `|0...0⟩`.
    pub fn prepare(&self) -> Result<StateVector> {
        let mut s = StateVector::zero(self.width)?;
        self.apply(&mut s)?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_undoes_the_circuit() {
        let mut c = Circuit::new(3);
        c.gate("H", None, &[], &[0])
            .gate("R1", Some(0.4), &[0], &[2])
            .gate("T", None, &[], &[1])
            .gate("SWAP", None, &[], &[1, 2])
            .gate("Ry", Some(1.1), &[], &[1]);
        let mut s = c.prepare().unwrap();
        c.adjoint().apply(&mut s).unwrap();
        assert!(s.approx_eq_exact(&StateVector::zero(3).unwrap(), 1e-12));
    }
}
