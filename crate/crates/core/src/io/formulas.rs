//! Reference formulas for the shipped benchmarks, written directly on
//! amplitudes so they share no code with the interpreter.

use std::f64::consts::PI;

use super::spec::{all_rounds_same, ClassicalExpectation, OracleInfo, ProgramSpec, SpecContext, SpecError};
use crate::sim::{Complex64, StateVector};

/// `QFT|j⟩ = 2^{-n/2} Σ_k exp(2πi·jk/2^n) |k⟩`.
pub fn qft_column(n: usize, j: u64) -> Result<StateVector, SpecError> {
    let dim = 1u64 << n;
    let scale = 1.0 / (dim as f64).sqrt();
    let amps = (0..dim).map(|k| Complex64::from_polar(scale, 2.0 * PI * ((j * k) % dim) as f64 / dim as f64)).collect();
    Ok(StateVector::from_amplitudes(amps)?)
}

/// `|j₁…jₙ⟩ → |jₙ…j₁⟩`.
pub fn reverse_bits(n: usize, j: u64) -> u64 {
    (0..n).fold(0, |acc, b| (acc << 1) | ((j >> b) & 1))
}

/// `|a⟩|b⟩ → |b⟩|a⟩` for two `half`-qubit registers.
pub fn swap_halves(half: usize, j: u64) -> u64 {
    let mask = (1u64 << half) - 1;
    ((j & mask) << half) | (j >> half)
}

fn phase_basis(n: usize, index: u64, sign: f64) -> Result<StateVector, SpecError> {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[index as usize] = Complex64::new(sign, 0.0);
    Ok(StateVector::from_amplitudes(amps)?)
}

/// Optimal iteration count for one marked element among `2^n`.
pub fn grover_iterations(n: usize) -> u32 {
    (PI / 4.0 * ((1u64 << n) as f64).sqrt()).floor() as u32
}

/// Grover search from basis state `j`: uniform superposition by Hadamards,
/// then `iterations` rounds of phase oracle and inversion about the mean.
pub fn grover_state(n: usize, marked: &[u64], iterations: u32, j: u64) -> Result<StateVector, SpecError> {
    let dim = 1usize << n;
    let scale = 1.0 / (dim as f64).sqrt();
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|k| {
            let sign = if (j & k as u64).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            Complex64::new(sign * scale, 0.0)
        })
        .collect();
    for _ in 0..iterations {
        for &m in marked {
            amps[m as usize] = -amps[m as usize];
        }
        let mean = amps.iter().sum::<Complex64>() / dim as f64;
        amps.iter_mut().for_each(|a| *a = mean * 2.0 - *a);
    }
    Ok(StateVector::from_amplitudes(amps)?)
}

/// Phase estimation with clock register first: `|c⟩|t⟩` where the target
/// is an eigenvector of the phase oracle with eigenphase `numerator·t/2^bits`.
pub fn qpe_column(clock: usize, target: usize, numerator: u64, bits: u32, j: u64) -> Result<StateVector, SpecError> {
    let nc = 1u64 << clock;
    let c = j >> target;
    let t = j & ((1u64 << target) - 1);
    let phase = (numerator * t) as f64 / (1u64 << bits) as f64;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (clock + target)];
    // H on every clock qubit, phase kickback on |k⟩, then the inverse DFT.
    for m in 0..nc {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..nc {
            let sign = if (c & k).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            let angle = 2.0 * PI * (phase * k as f64 - (k * m % nc) as f64 / nc as f64);
            acc += Complex64::from_polar(sign, angle);
        }
        amps[((m << target) | t) as usize] = acc / nc as f64;
    }
    Ok(StateVector::from_amplitudes_normalized(amps)?)
}

pub fn qft_spec() -> ProgramSpec {
    ProgramSpec::formula(|ctx, j| qft_column(ctx.width, j))
}

pub fn reverse_spec() -> ProgramSpec {
    ProgramSpec::formula(|ctx, j| Ok(StateVector::basis(ctx.width, reverse_bits(ctx.width, j))?))
}

pub fn swap_spec() -> ProgramSpec {
    ProgramSpec::formula(|ctx, j| Ok(StateVector::basis(ctx.width, swap_halves(ctx.width / 2, j))?))
}

/// `|x⟩ → -|x⟩` for `x > 0`, `|0⟩ → |0⟩`.
pub fn phase_flip_spec() -> ProgramSpec {
    ProgramSpec::formula(|ctx, j| phase_basis(ctx.width, j, if j == 0 { 1.0 } else { -1.0 }))
}

fn marked<'a>(ctx: &'a SpecContext, oracle: &str) -> Result<&'a [u64], SpecError> {
    match ctx.oracle(oracle)? {
        OracleInfo::PhaseOracle { marked } => Ok(marked),
        _ => Err(SpecError::OracleKind(oracle.to_string())),
    }
}

/// Grover search whose oracle is the phase oracle bound to `oracle`.
pub fn grover_spec(oracle: &str) -> ProgramSpec {
    let oracle = oracle.to_string();
    ProgramSpec::formula(move |ctx, j| {
        let n = ctx.width;
        grover_state(n, marked(ctx, &oracle)?, grover_iterations(n), j)
    })
}

/// `|x⟩ → (-1)^{f(x)} |x⟩` for the oracle's marked set.
pub fn phase_oracle_spec(oracle: &str) -> ProgramSpec {
    let oracle = oracle.to_string();
    ProgramSpec::formula(move |ctx, j| {
        let sign = if marked(ctx, &oracle)?.contains(&j) { -1.0 } else { 1.0 };
        phase_basis(ctx.width, j, sign)
    })
}

/// Phase estimation over a `clock` array sized by `clock_len` followed by
/// the target register, using the phase-power oracle bound to `oracle`.
pub fn qpe_spec(clock_len: &str, oracle: &str) -> ProgramSpec {
    let (clock_len, oracle) = (clock_len.to_string(), oracle.to_string());
    ProgramSpec::formula(move |ctx, j| {
        let clock = ctx.arg(&clock_len)? as usize;
        match ctx.oracle(&oracle)? {
            OracleInfo::PhasePower { numerator, bits } => qpe_column(clock, ctx.width - clock, *numerator, *bits, j),
            _ => Err(SpecError::OracleKind(oracle.clone())),
        }
    })
}

/// One Grover iteration on `|j⟩` without the initial Hadamards: phase
/// oracle, then inversion about the mean.
pub fn grover_step_column(n: usize, marked: &[u64], j: u64) -> Result<StateVector, SpecError> {
    let dim = 1usize << n;
    let sign = if marked.contains(&j) { -1.0 } else { 1.0 };
    let amps = (0..dim)
        .map(|k| {
            let delta = if k as u64 == j { 1.0 } else { 0.0 };
            Complex64::new(sign * (2.0 / dim as f64 - delta), 0.0)
        })
        .collect();
    Ok(StateVector::from_amplitudes(amps)?)
}

/// One Grover iteration whose oracle is the phase oracle bound to `oracle`.
pub fn grover_step_spec(oracle: &str) -> ProgramSpec {
    let oracle = oracle.to_string();
    ProgramSpec::formula(move |ctx, j| grover_step_column(ctx.width, marked(ctx, &oracle)?, j))
}

/// Phase oracle over a fixed marked set.
pub fn marked_phase_spec(marked: Vec<u64>) -> ProgramSpec {
    ProgramSpec::formula(move |ctx, j| phase_basis(ctx.width, j, if marked.contains(&j) { -1.0 } else { 1.0 }))
}

/// Grover search for a fixed marked set with the optimal iteration count.
pub fn grover_marked_spec(marked: Vec<u64>) -> ProgramSpec {
    ProgramSpec::formula(move |ctx, j| grover_state(ctx.width, &marked, grover_iterations(ctx.width), j))
}

/// Swap-test purity program: `result` is 1 iff all `rounds` rounds on two
/// copies of the state drawn from `generator` report "same".
pub fn purity_spec(result: &str, generator: &str, rounds: &str) -> ProgramSpec {
    let (generator, rounds) = (generator.to_string(), rounds.to_string());
    ProgramSpec::classical(result, move |ctx| {
        let t = ctx.arg(&rounds)?;
        let ensemble = match ctx.oracle(&generator)? {
            OracleInfo::StateSource { ensemble } => ensemble,
            _ => return Err(SpecError::OracleKind(generator.clone())),
        };
        let same = all_rounds_same(ensemble, t.max(0) as u32)?;
        Ok(if same >= 1.0 - 1e-9 {
            ClassicalExpectation { value: 1, probability: 1.0 }
        } else {
            ClassicalExpectation { value: 0, probability: 1.0 - same }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qft_columns_are_orthonormal() {
        for n in 1..=6 {
            let cols: Vec<_> = (0..1u64 << n).map(|j| qft_column(n, j).unwrap()).collect();
            for (a, ca) in cols.iter().enumerate() {
                assert!((ca.norm_sqr() - 1.0).abs() < 1e-12);
                for cb in &cols[a + 1..] {
                    assert!(ca.inner(cb).unwrap().norm() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn qft_first_columns() {
        let plus = qft_column(1, 0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((plus.amplitude(0).re - h).abs() < 1e-15 && (plus.amplitude(1).re - h).abs() < 1e-15);
        // j = 1 on two qubits: phases 1, i, -1, -i
        let c = qft_column(2, 1).unwrap();
        let expect = [(0.5, 0.0), (0.0, 0.5), (-0.5, 0.0), (0.0, -0.5)];
        for (k, (re, im)) in expect.iter().enumerate() {
            assert!((c.amplitude(k) - Complex64::new(*re, *im)).norm() < 1e-12);
        }
    }

    #[test]
    fn bit_helpers() {
        assert_eq!(reverse_bits(3, 0b110), 0b011);
        assert_eq!(reverse_bits(1, 1), 1);
        assert_eq!(swap_halves(2, 0b0111), 0b1101);
    }

    #[test]
    fn grover_matches_closed_form() {
        for n in 2..=6 {
            let r = grover_iterations(n);
            let theta = (1.0 / (1u64 << n) as f64).sqrt().asin();
            let p = ((2 * r + 1) as f64 * theta).sin().powi(2);
            let s = grover_state(n, &[3], r, 0).unwrap();
            assert!((s.amplitude(3).norm_sqr() - p).abs() < 1e-12, "n={n}");
        }
        assert_eq!(grover_iterations(3), 2);
    }

    #[test]
    fn qpe_reads_exact_phases() {
        // three clock qubits, eigenphase 5/8 on |1⟩
        let s = qpe_column(3, 1, 5, 3, 1).unwrap();
        assert!((s.amplitude((5 << 1) | 1).norm_sqr() - 1.0).abs() < 1e-12);
        let s = qpe_column(3, 1, 5, 3, 0).unwrap();
        assert!((s.amplitude(0).norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grover_step_columns_are_orthonormal() {
        let n = 3;
        let cols: Vec<_> = (0..8).map(|j| grover_step_column(n, &[5], j).unwrap()).collect();
        for (a, ca) in cols.iter().enumerate() {
            assert!((ca.norm_sqr() - 1.0).abs() < 1e-12);
            for cb in &cols[a + 1..] {
                assert!(ca.inner(cb).unwrap().norm() < 1e-12);
            }
        }
        // from the uniform state one step equals one Grover iteration
        let h = 1.0 / 8f64.sqrt();
        let mut acc = [Complex64::new(0.0, 0.0); 8];
        for c in &cols {
            for (k, slot) in acc.iter_mut().enumerate() {
                *slot += c.amplitude(k) * h;
            }
        }
        let want = grover_state(n, &[5], 1, 0).unwrap();
        for (k, a) in acc.iter().enumerate() {
            assert!((a - want.amplitude(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn purity_spec_for_maximally_mixed_qubit() {
        let half = vec![(0.5, StateVector::basis(1, 0).unwrap()), (0.5, StateVector::basis(1, 1).unwrap())];
        let oracles: std::collections::BTreeMap<_, _> =
            [("G".to_string(), OracleInfo::StateSource { ensemble: half })].into();
        let inv = crate::program::Invocation::new("Purity").arg("t", 10);
        let ctx = SpecContext { width: 3, inv: &inv, oracles: &oracles };
        let (var, e) = purity_spec("isPure", "G", "t").expected_classical(&ctx).unwrap();
        assert_eq!((var.as_str(), e.value), ("isPure", 0));
        assert!((e.probability - (1.0 - 0.75f64.powi(10))).abs() < 1e-12);
    }
}
