use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::config::TrainConfig;
use crate::error::{QdeqError, Result};

/// Float vectors written as decimal numbers with 17 significant digits.
pub(crate) mod sci_vec {
    use serde::ser::{Error, SerializeSeq};
    use serde::{Deserialize, Deserializer, Serializer};
    use serde_json::value::RawValue;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            if !x.is_finite() {
                return Err(S::Error::custom(format!("cannot store non-finite value {x}")));
            }
            let raw = RawValue::from_string(format!("{x:.16e}")).map_err(S::Error::custom)?;
            seq.serialize_element(&raw)?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<f64>::deserialize(d)
    }
}

/// Everything needed to rebuild a trained model and resume its optimizer.
///
/// The circuit itself is not stored: it is rebuilt from the config's seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub config: TrainConfig,
    /// Optimizer steps taken.
    pub step: u64,
    #[serde(with = "sci_vec")]
    pub theta: Vec<f64>,
    /// Row-major `classes x dim`.
    #[serde(with = "sci_vec")]
    pub head_weight: Vec<f64>,
    #[serde(with = "sci_vec")]
    pub head_bias: Vec<f64>,
    pub adam: AdamState,
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| QdeqError::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Self = serde_json::from_str(text).map_err(|e| QdeqError::Format(format!("checkpoint: {e}")))?;
        ckpt.config.validate()?;
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| QdeqError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| QdeqError::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::DatasetName;
    use crate::deqsolve::SolverMode;
    use crate::encoding::EncodingKind;
    use proptest::prelude::*;

    fn sample(theta: Vec<f64>) -> Checkpoint {
        Checkpoint {
            config: TrainConfig::preset(DatasetName::Mnist4, EncodingKind::Amplitude, SolverMode::ImplicitWarmup),
            step: 7,
            theta: theta.clone(),
            head_weight: theta.iter().map(|t| t * 1e-300).collect(),
            head_bias: vec![f64::MIN_POSITIVE, -0.0, 1.0 / 3.0],
            adam: AdamState {
                m: theta.clone(),
                v: theta.iter().map(|t| t * t).collect(),
                t: 7,
                skipped: 1,
            },
        }
    }

    #[test]
    fn text_uses_seventeen_digits() {
        let text = sample(vec![0.1]).to_json().unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
    }

    #[test]
    fn rejects_non_finite() {
        assert!(sample(vec![f64::NAN]).to_json().is_err());
    }

    proptest! {
        #[test]
        fn bit_exact_round_trip(theta in proptest::collection::vec(-1e6f64..1e6, 0..20)) {
            let c = sample(theta);
            let back = Checkpoint::from_json(&c.to_json().unwrap()).unwrap();
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back.theta), bits(&c.theta));
            prop_assert_eq!(bits(&back.head_weight), bits(&c.head_weight));
            prop_assert_eq!(bits(&back.head_bias), bits(&c.head_bias));
            prop_assert_eq!(bits(&back.adam.v), bits(&c.adam.v));
            prop_assert_eq!(back, c);
        }
    }
}
