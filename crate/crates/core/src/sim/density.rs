use num_complex::Complex64;

use super::{check_register_size, Result, SimError, StateVector, NORM_TOL};

/// Off-diagonal magnitude below which the Jacobi sweep stops.
const JACOBI_THRESHOLD: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 100;
/// Eigenvalues at or below this are dropped from ensembles.
const WEIGHT_FLOOR: f64 = 1e-12;
/// Eigenvalues below `-NEGATIVE_TOL` make a matrix invalid.
const NEGATIVE_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-9;

/// Eigenpairs of a Hermitian matrix, sorted by descending eigenvalue.
/// `vectors[i]` is the unit eigenvector for `values[i]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// Cyclic Jacobi diagonalization of an `n × n` Hermitian matrix stored
/// row-major. Each rotation first removes the phase of the pivot, then
/// applies a real Givens rotation.
pub fn hermitian_eigen(matrix: &[Complex64], n: usize) -> HermitianEigen {
    assert_eq!(matrix.len(), n * n, "matrix must be n×n");
    let mut a = matrix.to_vec();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let max_off = |a: &[Complex64]| {
        let mut m = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                m = m.max(a[p * n + q].norm());
            }
        }
        m
    };

    for _ in 0..JACOBI_MAX_SWEEPS {
        if max_off(&a) < JACOBI_THRESHOLD {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r < 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let d = aqq - app;
                let theta = if d.abs() < 1e-300 { std::f64::consts::FRAC_PI_4 } else { 0.5 * (2.0 * r / d).atan() };
                let (s, c) = theta.sin_cos();
                // U restricted to the (p, q) block
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = Complex64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * u_pp + akq * u_qp;
                    a[k * n + q] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[q * n + k] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * u_pp + vkq * u_qp;
                    v[k * n + q] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re).then(i.cmp(&j)));
    HermitianEigen {
        values: order.iter().map(|&i| a[i * n + i].re).collect(),
        vectors: order.iter().map(|&i| (0..n).map(|k| v[k * n + i]).collect()).collect(),
    }
}

/// Mixed state: `2^n × 2^n` Hermitian, positive semidefinite, trace one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity and trace. Positivity is checked when the
    /// matrix is decomposed.
    pub fn from_entries(num_qubits: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_register_size(num_qubits)?;
        let d = 1usize << num_qubits;
        if entries.len() != d * d {
            return Err(SimError::BadLength(entries.len()));
        }
        let rho = DensityMatrix { num_qubits, entries };
        let dev = rho.hermitian_defect();
        if dev > HERMITIAN_TOL {
            return Err(SimError::NotHermitian(dev));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(SimError::BadTrace(tr));
        }
        Ok(rho)
    }

    pub fn pure(state: &StateVector) -> Self {
        Self::from_ensemble(&[(1.0, state.clone())]).expect("pure state is a valid ensemble")
    }

    /// `ρ = Σ wᵢ |ψᵢ⟩⟨ψᵢ|`.
    pub fn from_ensemble(parts: &[(f64, StateVector)]) -> Result<Self> {
        let first = parts.first().ok_or(SimError::EmptyEnsemble)?;
        let n = first.1.num_qubits();
        let mut sum = 0.0;
        for (w, s) in parts {
            if *w < 0.0 {
                return Err(SimError::NegativeWeight(*w));
            }
            if s.num_qubits() != n {
                return Err(SimError::DimensionMismatch(n, s.num_qubits()));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(SimError::WeightSum(sum));
        }
        let d = 1usize << n;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for (w, s) in parts {
            let amps = s.amplitudes();
            for r in 0..d {
                if amps[r].norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += amps[r] * amps[c].conj() * *w;
                }
            }
        }
        Ok(DensityMatrix { num_qubits: n, entries })
    }

    /// Spectral decomposition into an ensemble of eigenstates with
    /// eigenvalue above `1e-12`, largest weight first.
    pub fn to_ensemble(&self) -> Result<Vec<(f64, StateVector)>> {
        let dev = self.hermitian_defect();
        if dev > HERMITIAN_TOL {
            return Err(SimError::NotHermitian(dev));
        }
        let eig = hermitian_eigen(&self.entries, self.dim());
        if let Some(&min) = eig.values.last() {
            if min < -NEGATIVE_TOL {
                return Err(SimError::NegativeEigenvalue(min));
            }
        }
        eig.values
            .into_iter()
            .zip(eig.vectors)
            .filter(|(w, _)| *w > WEIGHT_FLOOR)
            .map(|(w, vec)| Ok((w, StateVector::from_amplitudes_normalized(vec)?)))
            .collect()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entry(i, i).re).sum()
    }

    /// `Tr(ρ σ)`; equals `Tr ρ²` when `other` is `self`.
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        if self.num_qubits != other.num_qubits {
            return Err(SimError::DimensionMismatch(self.num_qubits, other.num_qubits));
        }
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..d {
            for c in 0..d {
                acc += self.entry(r, c) * other.entry(c, r);
            }
        }
        Ok(acc.re)
    }

    pub fn purity(&self) -> f64 {
        self.overlap(self).expect("same dimension")
    }

    pub fn hermitian_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.entry(r, c) - self.entry(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `max |ρ - σ|` entrywise.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus() -> StateVector {
        StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap()
    }

    fn minus() -> StateVector {
        StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]).unwrap()
    }

    #[test]
    fn pure_state_has_unit_purity() {
        let rho = DensityMatrix::from_ensemble(&[(1.0, StateVector::zero(1).unwrap())]).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_ensembles_give_the_same_maximally_mixed_state() {
        let a = DensityMatrix::from_ensemble(&[
            (0.5, StateVector::basis(1, 0).unwrap()),
            (0.5, StateVector::basis(1, 1).unwrap()),
        ])
        .unwrap();
        let b = DensityMatrix::from_ensemble(&[(0.5, plus()), (0.5, minus())]).unwrap();
        let half = DensityMatrix::from_entries(1, vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(a.max_abs_diff(&half) < 1e-12);
        assert!(b.max_abs_diff(&half) < 1e-12);
        assert!((a.purity() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ensemble_errors() {
        let z = StateVector::zero(1).unwrap();
        assert!(matches!(DensityMatrix::from_ensemble(&[(0.7, z.clone())]), Err(SimError::WeightSum(_))));
        assert!(matches!(
            DensityMatrix::from_ensemble(&[(0.5, z.clone()), (0.5, StateVector::zero(2).unwrap())]),
            Err(SimError::DimensionMismatch(1, 2))
        ));
        assert!(matches!(
            DensityMatrix::from_entries(1, vec![c(0.5, 0.0), c(0.3, 0.0), c(0.0, 0.0), c(0.5, 0.0)]),
            Err(SimError::NotHermitian(_))
        ));
        let negative =
            DensityMatrix { num_qubits: 1, entries: vec![c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)] };
        assert!(matches!(negative.to_ensemble(), Err(SimError::NegativeEigenvalue(_))));
    }

    #[test]
    fn decompose_maximally_mixed() {
        let half = DensityMatrix::from_entries(1, vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        let parts = half.to_ensemble().unwrap();
        assert_eq!(parts.len(), 2);
        for (w, _) in &parts {
            assert!((w - 0.5).abs() < 1e-12);
        }
        assert!(parts[0].1.inner(&parts[1].1).unwrap().norm() < 1e-12);
    }

    #[test]
    fn decompose_pure_plus() {
        let rho = DensityMatrix::pure(&plus());
        let parts = rho.to_ensemble().unwrap();
        assert_eq!(parts.len(), 1);
        assert!((parts[0].0 - 1.0).abs() < 1e-12);
        assert!(parts[0].1.approx_eq_up_to_phase(&plus(), 1e-12));
    }

    #[test]
    fn decompose_diagonal_reads_weights() {
        let rho = DensityMatrix::from_entries(1, vec![c(0.75, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.25, 0.0)]).unwrap();
        let weights: Vec<f64> = rho.to_ensemble().unwrap().iter().map(|p| p.0).collect();
        assert!((weights[0] - 0.75).abs() < 1e-12 && (weights[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn complex_hermitian_round_trip() {
        let a = StateVector::from_amplitudes_normalized(vec![c(0.3, 0.2), c(-0.1, 0.7), c(0.2, -0.4), c(0.5, 0.1)])
            .unwrap();
        let b = StateVector::from_amplitudes_normalized(vec![c(0.0, 1.0), c(0.4, 0.0), c(-0.3, 0.3), c(0.1, -0.2)])
            .unwrap();
        let cst = StateVector::basis(2, 3).unwrap();
        let rho = DensityMatrix::from_ensemble(&[(0.5, a), (0.3, b), (0.2, cst)]).unwrap();
        let back = DensityMatrix::from_ensemble(&rho.to_ensemble().unwrap()).unwrap();
        assert!(rho.max_abs_diff(&back) <= super::super::DM_TOL);
    }
}
