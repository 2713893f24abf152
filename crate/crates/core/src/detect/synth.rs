//! Preparation circuits for states the harness knows in closed form, used
//! to undo an expected output before measuring.

use std::ops::Range;

use crate::partition::{two_term, x_pattern};
use crate::sim::{Circuit, Complex64, StateVector};

const SUPPORT_TOL: f64 = 1e-9;
const FACTOR_TOL: f64 = 1e-9;

/// Splits `amps` over `dim_a × dim_b` into a product, if it is one.
fn split(amps: &[Complex64], dim_a: usize, dim_b: usize) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
    let (pivot, _) = amps.iter().enumerate().max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))?;
    let (ia, ib) = (pivot / dim_b, pivot % dim_b);
    let p = amps[pivot];
    if p.norm() < SUPPORT_TOL {
        return None;
    }
    let a: Vec<Complex64> = (0..dim_a).map(|i| amps[i * dim_b + ib]).collect();
    let b: Vec<Complex64> = (0..dim_b).map(|j| amps[ia * dim_b + j] / p).collect();
    for i in 0..dim_a {
        for j in 0..dim_b {
            if (amps[i * dim_b + j] - a[i] * b[j]).norm() > FACTOR_TOL {
                return None;
            }
        }
    }
    Some((a, b))
}

fn normalized(v: Vec<Complex64>) -> Vec<Complex64> {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / n).collect()
}

/// Prepares a `w`-qubit fragment at `base`: basis state, two-term state,
/// or product of single-qubit states.
fn fragment(c: &mut Circuit, amps: &[Complex64], w: usize, base: usize) -> bool {
    let support: Vec<usize> = (0..amps.len()).filter(|&i| amps[i].norm() > SUPPORT_TOL).collect();
    match support.as_slice() {
        [x] => {
            x_pattern(c, w, *x as u64, base);
            true
        }
        [x, y] => {
            two_term(c, w, (*x as u64, amps[*x]), (*y as u64, amps[*y]), base);
            true
        }
        _ => {
            let mut rest = amps.to_vec();
            let mut ops = Vec::new();
            for q in 0..w {
                let remaining = w - q;
                let Some((head, tail)) = split(&rest, 2, 1 << (remaining - 1)) else {
                    return false;
                };
                let head = normalized(head);
                ops.push((q, head[0], head[1]));
                rest = normalized(tail);
            }
            for (q, a0, a1) in ops {
                let theta = 2.0 * a1.norm().atan2(a0.norm());
                if theta.abs() > 1e-15 {
                    c.gate("Ry", Some(theta), &[], &[base + q]);
                }
                if a0.norm() > SUPPORT_TOL && a1.norm() > SUPPORT_TOL {
                    let phase = a1.arg() - a0.arg();
                    if phase.abs() > 1e-15 {
                        c.gate("R1", Some(phase), &[], &[base + q]);
                    }
                }
            }
            true
        }
    }
}

fn blocks_circuit(state: &StateVector, blocks: &[Range<usize>]) -> Option<Circuit> {
    let n = state.num_qubits();
    let mut c = Circuit::new(n);
    let mut rest = state.amplitudes().to_vec();
    let mut used = 0;
    for (i, block) in blocks.iter().enumerate() {
        let w = block.len();
        let remaining = n - used;
        let (head, tail) = if i + 1 == blocks.len() {
            (rest.clone(), vec![Complex64::new(1.0, 0.0)])
        } else {
            split(&rest, 1 << w, 1 << (remaining - w))?
        };
        if !fragment(&mut c, &normalized(head), w, block.start) {
            return None;
        }
        rest = normalized(tail);
        used += w;
    }
    Some(c)
}

/// A circuit taking `|0…0⟩` to `state` up to global phase, trying the
/// given contiguous blocks (typically the layout's arrays) first and the
/// whole register second. `None` when neither works.
pub fn preparation_circuit(state: &StateVector, blocks: &[Range<usize>]) -> Option<Circuit> {
    let n = state.num_qubits();
    let blocks: Vec<Range<usize>> = blocks.iter().filter(|b| !b.is_empty()).cloned().collect();
    let contiguous = !blocks.is_empty()
        && blocks[0].start == 0
        && blocks.windows(2).all(|w| w[0].end == w[1].start)
        && blocks.last().is_some_and(|b| b.end == n);
    let candidates: Vec<Circuit> = [
        if contiguous && blocks.len() > 1 { blocks_circuit(state, &blocks) } else { None },
        blocks_circuit(state, &[0..n]),
    ]
    .into_iter()
    .flatten()
    .collect();
    candidates.into_iter().find(|c| c.prepare().map(|s| s.approx_eq_up_to_phase(state, 1e-8)).unwrap_or(false))
}
