use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{Result, SimError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// An immutable unitary gate. Matrices are stored row-major over the
/// `2^arity` local basis, with the first target on the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    name: String,
    arity: usize,
    matrix: Vec<Complex64>,
    angle: Option<f64>,
}

/// Names of every built-in gate, in a fixed order.
pub const BUILTIN_GATES: &[&str] = &["I", "X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg", "R1", "Ry", "CNOT", "CZ", "SWAP"];

impl Gate {
    pub fn new(name: impl Into<String>, arity: usize, matrix: Vec<Complex64>) -> Self {
        assert_eq!(matrix.len(), 1 << (2 * arity), "matrix size must be 4^arity");
        Gate { name: name.into(), arity, matrix, angle: None }
    }

    /// Looks up a built-in gate by name. Parametrized gates (`R1`, `Ry`)
    /// require an angle in radians; the others reject one.
    pub fn builtin(name: &str, angle: Option<f64>) -> Result<Gate> {
        let takes_angle = matches!(name, "R1" | "Ry");
        match (takes_angle, angle) {
            (true, None) => return Err(SimError::MissingAngle(name.to_string())),
            (false, Some(_)) => return Err(SimError::UnexpectedAngle(name.to_string())),
            _ => {}
        }
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let (arity, matrix) = match name {
            "I" => (1, vec![ONE, ZERO, ZERO, ONE]),
            "X" => (1, vec![ZERO, ONE, ONE, ZERO]),
            "Y" => (1, vec![ZERO, -I, I, ZERO]),
            "Z" => (1, vec![ONE, ZERO, ZERO, -ONE]),
            "H" => (1, vec![h, h, h, -h]),
            "S" => (1, vec![ONE, ZERO, ZERO, I]),
            "Sdg" => (1, vec![ONE, ZERO, ZERO, -I]),
            "T" => (1, vec![ONE, ZERO, ZERO, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]),
            "Tdg" => (1, vec![ONE, ZERO, ZERO, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)]),
            "R1" => {
                let theta = angle.unwrap_or_default();
                (1, vec![ONE, ZERO, ZERO, Complex64::from_polar(1.0, theta)])
            }
            "Ry" => {
                let half = angle.unwrap_or_default() / 2.0;
                let (s, c) = half.sin_cos();
                (
                    1,
                    vec![
                        Complex64::new(c, 0.0),
                        Complex64::new(-s, 0.0),
                        Complex64::new(s, 0.0),
                        Complex64::new(c, 0.0),
                    ],
                )
            }
            "CNOT" => {
                let mut m = vec![ZERO; 16];
                m[0] = ONE;
                m[5] = ONE;
                m[11] = ONE;
                m[14] = ONE;
                (2, m)
            }
            "CZ" => {
                let mut m = vec![ZERO; 16];
                m[0] = ONE;
                m[5] = ONE;
                m[10] = ONE;
                m[15] = -ONE;
                (2, m)
            }
            "SWAP" => {
                let mut m = vec![ZERO; 16];
                m[0] = ONE;
                m[6] = ONE;
                m[9] = ONE;
                m[15] = ONE;
                (2, m)
            }
            other => return Err(SimError::UnknownGate(other.to_string())),
        };
        Ok(Gate { name: name.to_string(), arity, matrix, angle })
    }

    /// Arity of a built-in gate, without constructing it.
    pub fn builtin_arity(name: &str) -> Option<usize> {
        match name {
            "CNOT" | "CZ" | "SWAP" => Some(2),
            n if BUILTIN_GATES.contains(&n) => Some(1),
            _ => None,
        }
    }

    pub fn builtin_takes_angle(name: &str) -> bool {
        matches!(name, "R1" | "Ry")
    }

    /// Name and angle of the adjoint of a built-in gate.
    pub fn builtin_adjoint(name: &str, angle: Option<f64>) -> (String, Option<f64>) {
        match name {
            "S" => ("Sdg".into(), None),
            "Sdg" => ("S".into(), None),
            "T" => ("Tdg".into(), None),
            "Tdg" => ("T".into(), None),
            "R1" | "Ry" => (name.into(), angle.map(|a| -a)),
            other => (other.into(), angle),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn angle(&self) -> Option<f64> {
        self.angle
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    /// Conjugate-transpose of this gate.
    pub fn adjoint(&self) -> Gate {
        let d = self.dim();
        let mut m = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                m[c * d + r] = self.matrix[r * d + c].conj();
            }
        }
        let (name, angle) = Gate::builtin_adjoint(&self.name, self.angle);
        Gate { name, arity: self.arity, matrix: m, angle }
    }

    /// `max |(U†U - I)_{rc}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += self.matrix[k * d + r].conj() * self.matrix[k * d + c];
                }
                if r == c {
                    acc -= ONE;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_is_unitary() {
        for name in BUILTIN_GATES {
            let angle = Gate::builtin_takes_angle(name).then_some(0.7);
            let g = Gate::builtin(name, angle).unwrap();
            assert!(g.unitarity_defect() <= super::super::UNITARY_TOL, "{name}");
            assert_eq!(Gate::builtin_arity(name), Some(g.arity()));
        }
    }

    #[test]
    fn adjoint_names_follow_the_builtin_table() {
        let s = Gate::builtin("S", None).unwrap().adjoint();
        assert_eq!(s.name(), "Sdg");
        assert_eq!(s.matrix(), Gate::builtin("Sdg", None).unwrap().matrix());
        let r = Gate::builtin("R1", Some(0.3)).unwrap().adjoint();
        assert_eq!(r.angle(), Some(-0.3));
        for (a, b) in r.matrix().iter().zip(Gate::builtin("R1", Some(-0.3)).unwrap().matrix()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn angle_arguments_are_checked() {
        assert_eq!(Gate::builtin("R1", None), Err(SimError::MissingAngle("R1".into())));
        assert_eq!(Gate::builtin("H", Some(1.0)), Err(SimError::UnexpectedAngle("H".into())));
        assert!(matches!(Gate::builtin("Q", None), Err(SimError::UnknownGate(_))));
    }
}
