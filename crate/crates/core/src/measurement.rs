//! Expectation-value readout and the upsampling map back to input dimension.

use serde::{Deserialize, Serialize};

use crate::error::{QdeqError, Result};
use crate::simcore::{qubit_mask, StateVector, C64};

/// Observable family of an ensemble. Every member has spectral norm 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservableKind {
    /// Pauli Z on one qubit; expectations in `[-1, 1]`.
    PauliZ,
    /// Projector `|k><k|` on a computational basis state; expectations in `[0, 1]`.
    BasisProjector,
}

/// Ensemble of `K` observables of one kind.
///
/// `sites` holds qubit indices for [`ObservableKind::PauliZ`] and basis-state
/// indices for [`ObservableKind::BasisProjector`].
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableEnsemble {
    kind: ObservableKind,
    sites: Vec<usize>,
}

impl ObservableEnsemble {
    pub fn pauli_z(qubits: Vec<usize>) -> Self {
        Self {
            kind: ObservableKind::PauliZ,
            sites: qubits,
        }
    }

    /// One Z per qubit of a `num_qubits` register.
    pub fn pauli_z_all(num_qubits: usize) -> Self {
        Self::pauli_z((0..num_qubits).collect())
    }

    pub fn basis_projectors(indices: Vec<usize>) -> Self {
        Self {
            kind: ObservableKind::BasisProjector,
            sites: indices,
        }
    }

    pub fn kind(&self) -> ObservableKind {
        self.kind
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// Ensemble size `K`.
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let limit = match self.kind {
            ObservableKind::PauliZ => num_qubits,
            ObservableKind::BasisProjector => 1usize << num_qubits,
        };
        if let Some(bad) = self.sites.iter().find(|&&s| s >= limit) {
            return Err(QdeqError::invalid(format!(
                "{:?} site {bad} out of range for {num_qubits} qubits",
                self.kind
            )));
        }
        Ok(())
    }

    /// `<psi|M_k|psi>` for every member.
    pub fn expect(&self, state: &StateVector) -> Result<Vec<f64>> {
        self.validate(state.num_qubits())?;
        let amps = state.amplitudes();
        let q = state.num_qubits();
        Ok(match self.kind {
            ObservableKind::PauliZ => self
                .sites
                .iter()
                .map(|&qubit| {
                    let mask = qubit_mask(q, qubit);
                    amps.iter()
                        .enumerate()
                        .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
                        .sum()
                })
                .collect(),
            ObservableKind::BasisProjector => self.sites.iter().map(|&k| amps[k].norm_sqr()).collect(),
        })
    }

    /// `sum_k weights_k M_k |psi>`. Caller guarantees valid sites and `weights.len() == K`.
    pub(crate) fn weighted_apply(&self, state: &StateVector, weights: &[f64]) -> Vec<C64> {
        let amps = state.amplitudes();
        let q = state.num_qubits();
        match self.kind {
            ObservableKind::PauliZ => {
                let masks: Vec<(usize, f64)> = self
                    .sites
                    .iter()
                    .zip(weights)
                    .map(|(&qubit, &w)| (qubit_mask(q, qubit), w))
                    .collect();
                amps.iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let factor: f64 = masks
                            .iter()
                            .map(|&(mask, w)| if i & mask == 0 { w } else { -w })
                            .sum();
                        a * factor
                    })
                    .collect()
            }
            ObservableKind::BasisProjector => {
                let mut out = vec![C64::new(0.0, 0.0); amps.len()];
                for (&k, &w) in self.sites.iter().zip(weights) {
                    out[k] += amps[k] * w;
                }
                out
            }
        }
    }
}

/// Readout of every ensemble member on `state`.
pub fn expect_ensemble(state: &StateVector, ensemble: &ObservableEnsemble) -> Result<Vec<f64>> {
    ensemble.expect(state)
}

/// Scaling applied by the upsampling map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpsampleScale {
    /// Repeated entries scaled by `1/sqrt(r)`; an isometry whenever `r K = n`.
    #[default]
    Isometric,
    /// Plain repetition.
    Unscaled,
}

/// Repeats each of `K` entries `r = ceil(n/K)` times and truncates to `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpsampleMap {
    source_dim: usize,
    target_dim: usize,
    repeat: usize,
    scale: f64,
}

impl UpsampleMap {
    pub fn new(source_dim: usize, target_dim: usize, scaling: UpsampleScale) -> Result<Self> {
        if source_dim == 0 || target_dim == 0 {
            return Err(QdeqError::invalid("upsample dimensions must be positive"));
        }
        let repeat = target_dim.div_ceil(source_dim);
        let scale = match scaling {
            UpsampleScale::Isometric => 1.0 / (repeat as f64).sqrt(),
            UpsampleScale::Unscaled => 1.0,
        };
        Ok(Self {
            source_dim,
            target_dim,
            repeat,
            scale,
        })
    }

    /// `K`.
    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    /// `n`.
    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn repeat(&self) -> usize {
        self.repeat
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.source_dim {
            return Err(QdeqError::DimensionMismatch {
                gate: None,
                detail: format!("upsample input of length {} (expected {})", v.len(), self.source_dim),
            });
        }
        Ok((0..self.target_dim)
            .map(|j| self.scale * v[j / self.repeat])
            .collect())
    }

    /// Transpose of [`UpsampleMap::apply`], used to pull cotangents back to `K` entries.
    pub fn transpose(&self, c: &[f64]) -> Result<Vec<f64>> {
        if c.len() != self.target_dim {
            return Err(QdeqError::DimensionMismatch {
                gate: None,
                detail: format!("upsample cotangent of length {} (expected {})", c.len(), self.target_dim),
            });
        }
        let mut out = vec![0.0; self.source_dim];
        for (j, cj) in c.iter().enumerate() {
            out[j / self.repeat] += self.scale * cj;
        }
        Ok(out)
    }
}

pub fn upsample(v: &[f64], map: &UpsampleMap) -> Result<Vec<f64>> {
    map.apply(v)
}
