use std::collections::BTreeMap;
use std::fmt::Write;

use super::{draw_distinct, PartitionError, Result};
use crate::io::OracleInfo;
use crate::program::{parse_subroutine, SubroutineDef};
use crate::sim::{RandomStream, StateVector};

/// Kinds of generated stand-ins for subroutine-typed inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum DoubleKind {
    /// Prepares a random basis state.
    PureClassical,
    /// Prepares a random two-value superposition.
    PureSuperposition,
    /// Measures a biased coin and prepares one of two basis states, so
    /// each call yields a member of a two-element ensemble.
    MixedPair,
    /// Phase oracle marking one random basis state.
    PhaseOracle,
    /// `U^power` for a diagonal phase oracle whose eigenphases are exact in
    /// the number of bits held by the named variable.
    PhasePower { bits: String },
    /// A fixed, tester-written subroutine.
    Fixed(SubroutineDef),
}

/// A generated double whose register width is the value of `size`.
#[derive(Debug, Clone, PartialEq)]
pub struct Double {
    pub kind: DoubleKind,
    pub size: String,
}

fn x_lines(out: &mut String, w: usize, x: u64) {
    for q in (0..w).filter(|&q| (x >> (w - 1 - q)) & 1 == 1) {
        let _ = writeln!(out, "    X q[{q}];");
    }
}

fn lookup(args: &BTreeMap<String, i64>, name: &str) -> Result<usize> {
    match args.get(name) {
        Some(&v) if v >= 1 => Ok(v as usize),
        Some(&v) => Err(PartitionError::Sampling(format!("`{name}` = {v} is not a register size"))),
        None => Err(PartitionError::Sampling(format!("double needs `{name}` bound by the frame"))),
    }
}

impl Double {
    pub fn new(kind: DoubleKind, size: &str) -> Self {
        Double { kind, size: size.to_string() }
    }

    /// A concrete subroutine for one test case, with a description a spec
    /// can use.
    pub fn generate(
        &self,
        name: &str,
        args: &BTreeMap<String, i64>,
        rng: &mut RandomStream,
    ) -> Result<(SubroutineDef, Option<OracleInfo>)> {
        if let DoubleKind::Fixed(def) = &self.kind {
            return Ok((def.clone(), None));
        }
        let w = lookup(args, &self.size)?;
        let dim = 1u64 << w;
        let mut body = String::new();
        let source = |parts: Vec<(f64, u64)>| -> Result<OracleInfo> {
            let ensemble =
                parts.into_iter().map(|(p, x)| Ok((p, StateVector::basis(w, x)?))).collect::<Result<Vec<_>>>()?;
            Ok(OracleInfo::StateSource { ensemble })
        };
        let (header, info) = match &self.kind {
            DoubleKind::PureClassical => {
                let x = rng.below(dim);
                x_lines(&mut body, w, x);
                (format!("sub {name}(int n, qubits q[{w}])"), source(vec![(1.0, x)])?)
            }
            DoubleKind::PureSuperposition => {
                let (x, y) = draw_distinct(rng, 0, dim)
                    .ok_or_else(|| PartitionError::Sampling("superposition needs two values".into()))?;
                let pivot = (0..w).find(|&q| ((x ^ y) >> (w - 1 - q)) & 1 == 1).expect("x != y");
                let lo = if (x >> (w - 1 - pivot)) & 1 == 0 { x } else { y };
                x_lines(&mut body, w, lo);
                let _ = writeln!(body, "    H q[{pivot}];");
                for q in (0..w).filter(|&q| q != pivot && ((x ^ y) >> (w - 1 - q)) & 1 == 1) {
                    let _ = writeln!(body, "    CNOT q[{pivot}], q[{q}];");
                }
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let mut amps = vec![crate::sim::Complex64::new(0.0, 0.0); dim as usize];
                amps[x as usize].re = h;
                amps[y as usize].re = h;
                let state = StateVector::from_amplitudes(amps)?;
                (format!("sub {name}(int n, qubits q[{w}])"), OracleInfo::StateSource { ensemble: vec![(1.0, state)] })
            }
            DoubleKind::MixedPair => {
                let (x, y) = draw_distinct(rng, 0, dim)
                    .ok_or_else(|| PartitionError::Sampling("mixed pair needs two values".into()))?;
                let p0 = 0.25 + 0.5 * rng.uniform();
                let angle = 2.0 * p0.sqrt().acos();
                let _ = writeln!(body, "    Ry({angle:.17}) q[0];\n    c = measure q[0];\n    reset q[0];");
                body.push_str("    if (c == 0) {\n");
                x_lines(&mut body, w, x);
                body.push_str("    } else {\n");
                x_lines(&mut body, w, y);
                body.push_str("    }\n");
                let p0 = (angle / 2.0).cos().powi(2);
                (format!("sub {name}(int n, qubits q[{w}])"), source(vec![(p0, x), (1.0 - p0, y)])?)
            }
            DoubleKind::PhaseOracle => {
                let k = rng.below(dim);
                let flips = !k & (dim - 1);
                x_lines(&mut body, w, flips);
                if w == 1 {
                    body.push_str("    Z q[0];\n");
                } else {
                    let _ = writeln!(body, "    ctrl(q[0..{}]) Z q[{}];", w - 2, w - 1);
                }
                x_lines(&mut body, w, flips);
                (format!("sub {name}(int n, qubits q[{w}])"), OracleInfo::PhaseOracle { marked: vec![k] })
            }
            DoubleKind::PhasePower { bits } => {
                let b = lookup(args, bits)?;
                let numerator = 1 + rng.below((1u64 << b) - 1);
                for q in 0..w {
                    let weight = numerator << (w - 1 - q);
                    let _ = writeln!(body, "    R1(2 * pi * power * {weight} / {}) q[{q}];", 1u64 << b);
                }
                (format!("sub {name}(int power, qubits q[{w}])"), OracleInfo::PhasePower { numerator, bits: b as u32 })
            }
            DoubleKind::Fixed(_) => unreachable!(),
        };
        let def = parse_subroutine(&format!("{header} {{\n{body}}}"))?;
        Ok((def, Some(info)))
    }
}
