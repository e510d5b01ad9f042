use num_complex::Complex64;

use crate::error::{QdeqError, Result};

/// Complex amplitude type used throughout the simulator.
pub type C64 = Complex64;

/// Tolerance on the unit-norm invariant of a [`StateVector`].
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Pure state of a `num_qubits` register as `2^Q` complex amplitudes.
///
/// Qubit 0 is the most significant bit of the basis index, so for two qubits
/// the amplitudes are ordered `|00>, |01>, |10>, |11>` with qubit 0 leftmost.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// The all-zero basis state `|0...0>`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(QdeqError::invalid(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps an amplitude vector, checking its length and unit norm.
    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_qubits(num_qubits)?;
        if amplitudes.len() != 1usize << num_qubits {
            return Err(QdeqError::DimensionMismatch {
                gate: None,
                detail: format!(
                    "{} amplitudes for {} qubits (expected {})",
                    amplitudes.len(),
                    num_qubits,
                    1usize << num_qubits
                ),
            });
        }
        let state = Self {
            num_qubits,
            amplitudes,
        };
        let norm = state.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QdeqError::invalid(format!(
                "amplitudes are not normalized (norm {norm})"
            )));
        }
        Ok(state)
    }

    /// Real amplitudes, checked like [`StateVector::from_amplitudes`].
    pub fn from_real(num_qubits: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(
            num_qubits,
            amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect(),
        )
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.num_qubits != other.num_qubits {
            return Err(QdeqError::DimensionMismatch {
                gate: None,
                detail: format!(
                    "inner product of {}- and {}-qubit states",
                    self.num_qubits, other.num_qubits
                ),
            });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Probability of each basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub(crate) fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }
}

fn check_qubits(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > 24 {
        return Err(QdeqError::invalid(format!(
            "qubit count {num_qubits} outside supported range 1..=24"
        )));
    }
    Ok(())
}

/// `sum_i conj(a_i) b_i`.
pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Bit mask selecting `qubit` in a basis index of a `num_qubits` register.
#[inline]
pub(crate) fn qubit_mask(num_qubits: usize, qubit: usize) -> usize {
    1usize << (num_qubits - 1 - qubit)
}

/// Applies a 2x2 matrix to `target` in place, visiting amplitude pairs by stride.
pub(crate) fn apply_single(amps: &mut [C64], num_qubits: usize, target: usize, m: &[[C64; 2]; 2]) {
    let mask = qubit_mask(num_qubits, target);
    let dim = amps.len();
    let mut base = 0;
    while base < dim {
        for i in base..base + mask {
            let j = i + mask;
            let a = amps[i];
            let b = amps[j];
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[j] = m[1][0] * a + m[1][1] * b;
        }
        base += mask << 1;
    }
}

/// CNOT in place: swaps target amplitudes wherever the control bit is set.
pub(crate) fn apply_cnot(amps: &mut [C64], num_qubits: usize, control: usize, target: usize) {
    let cmask = qubit_mask(num_qubits, control);
    let tmask = qubit_mask(num_qubits, target);
    for i in 0..amps.len() {
        if i & cmask != 0 && i & tmask == 0 {
            amps.swap(i, i | tmask);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_and_norm() {
        let s = StateVector::basis(3, 5).unwrap();
        assert_eq!(s.dim(), 8);
        assert_eq!(s.amplitudes()[5], C64::new(1.0, 0.0));
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!(StateVector::basis(2, 4).is_err());
        assert!(StateVector::zero(0).is_err());
    }

    #[test]
    fn rejects_bad_amplitudes() {
        assert!(StateVector::from_real(2, &[1.0, 0.0, 0.0]).is_err());
        assert!(StateVector::from_real(1, &[1.0, 1.0]).is_err());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(StateVector::from_real(1, &[h, h]).is_ok());
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        assert_eq!(qubit_mask(3, 0), 4);
        assert_eq!(qubit_mask(3, 2), 1);
    }
}
