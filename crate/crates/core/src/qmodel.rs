//! The quantum model family: encode, apply `U(theta)`, read out, upsample.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::deqsolve::{DeqLayer, LayerVjp};
use crate::encoding::{inject, EncodingKind, EncodingSpec, InjectionMode};
use crate::error::{QdeqError, Result};
use crate::measurement::{ObservableEnsemble, UpsampleMap, UpsampleScale};
use crate::simcore::{backpropagate, random_layer, Angle, GateOp, ParamCircuit, StateVector};

const BLOCK_QUBITS: usize = 4;
const STAIRCASE_STRIDE: usize = 2;
const BLOCK_SEED_STEP: u64 = 0x9e37_79b9_7f4a_7c15;

/// A circuit together with initial values for its trainable slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SeededCircuit {
    pub circuit: ParamCircuit,
    pub init_theta: Vec<f64>,
}

/// The 4-qubit classification block.
///
/// A seeded random layer of `random_ops` gates followed by a trainable layer:
/// RY on every qubit, RZ on every qubit, the CNOT ring `0->1, 1->2, 2->3, 3->0`
/// and a final RY wall.
pub fn build_block4(seed: u64, random_ops: usize) -> Result<SeededCircuit> {
    let layer = random_layer(seed, BLOCK_QUBITS, random_ops)?;
    let mut gates = layer.gates;
    let mut theta = layer.init_params;
    let mut rng = crate::rng::indexed_stream(seed, "circuit", 1);
    let mut wall = |gates: &mut Vec<GateOp>, theta: &mut Vec<f64>, kind| {
        for q in 0..BLOCK_QUBITS {
            gates.push(GateOp::rotation(kind, q, Angle::Param(theta.len())));
            theta.push(rng.random_range(0.0..TAU));
        }
    };
    wall(&mut gates, &mut theta, crate::simcore::GateKind::RY);
    wall(&mut gates, &mut theta, crate::simcore::GateKind::RZ);
    for q in 0..BLOCK_QUBITS {
        gates.push(GateOp::cnot(q, (q + 1) % BLOCK_QUBITS));
    }
    wall(&mut gates, &mut theta, crate::simcore::GateKind::RY);
    let circuit = ParamCircuit::new(BLOCK_QUBITS, gates, theta.len())?;
    Ok(SeededCircuit {
        circuit,
        init_theta: theta,
    })
}

/// Offsets of the 4-qubit windows of a stride-2 staircase on `num_qubits` qubits.
pub fn staircase_windows(num_qubits: usize) -> Vec<usize> {
    (0..)
        .map(|i| i * STAIRCASE_STRIDE)
        .take_while(|offset| offset + BLOCK_QUBITS <= num_qubits)
        .collect()
}

/// Seed of staircase block `index`; block 0 uses the master seed itself.
pub fn block_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add((index as u64).wrapping_mul(BLOCK_SEED_STEP))
}

/// Independently seeded 4-qubit blocks laid out in a stride-2 staircase.
pub fn build_staircase(num_qubits: usize, seed: u64, random_ops_per_block: usize) -> Result<SeededCircuit> {
    let windows = staircase_windows(num_qubits);
    if windows.is_empty() {
        return Err(QdeqError::invalid(format!(
            "a staircase needs at least {BLOCK_QUBITS} qubits, got {num_qubits}"
        )));
    }
    let mut circuit = ParamCircuit::empty(num_qubits)?;
    let mut init_theta = Vec::new();
    for (i, offset) in windows.into_iter().enumerate() {
        let block = build_block4(block_seed(seed, i), random_ops_per_block)?;
        let map: Vec<usize> = (offset..offset + BLOCK_QUBITS).collect();
        circuit.append_mapped(&block.circuit, &map)?;
        init_theta.extend(block.init_theta);
    }
    Ok(SeededCircuit { circuit, init_theta })
}

/// The 10-qubit staircase: blocks on qubits 0-3, 2-5, 4-7 and 6-9.
pub fn build_staircase10(seed: u64, random_ops_per_block: usize) -> Result<SeededCircuit> {
    build_staircase(10, seed, random_ops_per_block)
}

/// `f(z; x) = I_u(<U(theta)^dag M_k U(theta)>_{S(inject(z, x))})`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumModel {
    encoding: EncodingSpec,
    circuit: ParamCircuit,
    theta: Vec<f64>,
    ensemble: ObservableEnsemble,
    upsample: UpsampleMap,
    injection: InjectionMode,
}

/// Intermediate values of one forward evaluation.
struct Trace {
    u: Vec<f64>,
    encoded: StateVector,
    output: StateVector,
}

impl QuantumModel {
    pub fn new(
        encoding: EncodingSpec,
        circuit: ParamCircuit,
        theta: Vec<f64>,
        ensemble: ObservableEnsemble,
        upsample: UpsampleMap,
        injection: InjectionMode,
    ) -> Result<Self> {
        if encoding.num_qubits() != circuit.num_qubits() {
            return Err(QdeqError::invalid(format!(
                "{}-qubit encoding feeding a {}-qubit circuit",
                encoding.num_qubits(),
                circuit.num_qubits()
            )));
        }
        ensemble.validate(circuit.num_qubits())?;
        if upsample.source_dim() != ensemble.len() || upsample.target_dim() != encoding.input_dim() {
            return Err(QdeqError::invalid(format!(
                "upsampling {}->{} does not connect {} observables to {} inputs",
                upsample.source_dim(),
                upsample.target_dim(),
                ensemble.len(),
                encoding.input_dim()
            )));
        }
        let model = Self {
            encoding,
            circuit,
            theta: Vec::new(),
            ensemble,
            upsample,
            injection,
        };
        model.with_theta(theta)
    }

    /// Same model with different trainable parameters.
    pub fn with_theta(mut self, theta: Vec<f64>) -> Result<Self> {
        self.set_theta(theta)?;
        Ok(self)
    }

    pub fn set_theta(&mut self, theta: Vec<f64>) -> Result<()> {
        if theta.len() != self.circuit.num_params() {
            return Err(QdeqError::DimensionMismatch {
                gate: None,
                detail: format!("{} parameters for a circuit with {}", theta.len(), self.circuit.num_params()),
            });
        }
        self.theta = theta;
        Ok(())
    }

    pub fn with_injection(mut self, injection: InjectionMode) -> Self {
        self.injection = injection;
        self
    }

    pub fn encoding(&self) -> &EncodingSpec {
        &self.encoding
    }

    pub fn circuit(&self) -> &ParamCircuit {
        &self.circuit
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn ensemble(&self) -> &ObservableEnsemble {
        &self.ensemble
    }

    pub fn upsample(&self) -> &UpsampleMap {
        &self.upsample
    }

    pub fn injection(&self) -> InjectionMode {
        self.injection
    }

    pub fn input_dim(&self) -> usize {
        self.encoding.input_dim()
    }

    pub fn num_params(&self) -> usize {
        self.theta.len()
    }

    fn trace(&self, z: &[f64], x: &[f64]) -> Result<Trace> {
        if x.len() != self.input_dim() {
            return Err(QdeqError::DimensionMismatch {
                gate: None,
                detail: format!("input of length {} (expected {})", x.len(), self.input_dim()),
            });
        }
        let u = inject(z, x, self.injection)?;
        let encoded = self.encoding.encode(&u)?;
        let output = self.circuit.apply(&self.theta, &encoded)?;
        Ok(Trace { u, encoded, output })
    }

    /// The measured expectations before upsampling.
    pub fn expectations(&self, z: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.ensemble.expect(&self.trace(z, x)?.output)
    }

    /// State after the circuit for latent `z` and input `x`.
    pub fn output_state(&self, z: &[f64], x: &[f64]) -> Result<StateVector> {
        Ok(self.trace(z, x)?.output)
    }

    pub fn forward(&self, z: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let t = self.trace(z, x)?;
        self.upsample.apply(&self.ensemble.expect(&t.output)?)
    }

    /// Cotangent pulled back to `z` and `theta` in one adjoint sweep.
    pub fn vjp(&self, z: &[f64], x: &[f64], cotangent: &[f64]) -> Result<LayerVjp> {
        let t = self.trace(z, x)?;
        let weights = self.upsample.transpose(cotangent)?;
        let lambda = self.ensemble.weighted_apply(&t.output, &weights);
        let (dtheta, lambda_in) = backpropagate(&self.circuit, &self.theta, t.output, lambda)?;
        let dz = match self.injection {
            InjectionMode::Add => self.encoding.vjp(&t.u, t.encoded, lambda_in)?,
            InjectionMode::InputOnly => vec![0.0; z.len()],
        };
        Ok(LayerVjp { dz, dtheta })
    }
}

impl DeqLayer for QuantumModel {
    fn dim(&self) -> usize {
        self.input_dim()
    }

    fn num_params(&self) -> usize {
        self.theta.len()
    }

    fn forward(&self, z: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        QuantumModel::forward(self, z, x)
    }

    fn vjp(&self, z: &[f64], x: &[f64], cotangent: &[f64]) -> Result<LayerVjp> {
        QuantumModel::vjp(self, z, x, cotangent)
    }
}

pub fn forward(model: &QuantumModel, z: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    model.forward(z, x)
}

/// `cotangent^T df/dz`.
pub fn model_vjp_z(model: &QuantumModel, z: &[f64], x: &[f64], cotangent: &[f64]) -> Result<Vec<f64>> {
    Ok(model.vjp(z, x, cotangent)?.dz)
}

/// `cotangent^T df/dtheta`.
pub fn model_grad_theta(model: &QuantumModel, z: &[f64], x: &[f64], cotangent: &[f64]) -> Result<Vec<f64>> {
    Ok(model.vjp(z, x, cotangent)?.dtheta)
}

/// Named model shapes used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelPreset {
    /// 4x4 images, amplitude encoded on 4 qubits, one Z per qubit.
    Mnist4Amplitude,
    /// 4x4 images as 16 angles (YZXY per qubit) on 4 qubits.
    Mnist4Angle,
    /// 10x10 images, amplitude encoded on the 10-qubit staircase.
    TenClass,
}

impl ModelPreset {
    pub fn build(self, seed: u64, random_ops: usize, scale: UpsampleScale) -> Result<QuantumModel> {
        let (encoding, seeded) = match self {
            ModelPreset::Mnist4Amplitude => (EncodingSpec::amplitude(4, 16)?, build_block4(seed, random_ops)?),
            ModelPreset::Mnist4Angle => (EncodingSpec::angle(4)?, build_block4(seed, random_ops)?),
            ModelPreset::TenClass => (EncodingSpec::amplitude(10, 100)?, build_staircase10(seed, random_ops)?),
        };
        let q = encoding.num_qubits();
        let upsample = UpsampleMap::new(q, encoding.input_dim(), scale)?;
        QuantumModel::new(
            encoding,
            seeded.circuit,
            seeded.init_theta,
            ObservableEnsemble::pauli_z_all(q),
            upsample,
            InjectionMode::Add,
        )
    }

    pub fn encoding_kind(self) -> EncodingKind {
        match self {
            ModelPreset::Mnist4Angle => EncodingKind::Angle,
            _ => EncodingKind::Amplitude,
        }
    }
}
