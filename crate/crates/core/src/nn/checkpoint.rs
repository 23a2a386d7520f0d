//! Checkpoint format.
//!
//! A checkpoint is a JSON object:
//!
//! ```text
//! {
//!   "format": "cmdqn-mlp/1",
//!   "layers": [ {"input_dim": 8, "output_dim": 128, "activation": "relu"}, ... ],
//!   "params": [ ...flat coefficients... ]
//! }
//! ```
//!
//! `params` holds, per layer in order, the `output_dim × input_dim` weights
//! in row-major order followed by the `output_dim` biases. Floats are written
//! in shortest round-trip form, so a load reproduces the network exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::{LayerSpec, Mlp};
use crate::error::{Error, Result};

const FORMAT: &str = "cmdqn-mlp/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    format: String,
    layers: Vec<LayerSpec>,
    params: Vec<f64>,
}

impl Mlp {
    pub fn to_json(&self) -> Result<String> {
        let ck = Checkpoint {
            format: FORMAT.to_string(),
            layers: self.layers().to_vec(),
            params: self.params().to_vec(),
        };
        Ok(serde_json::to_string(&ck)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        if ck.format != FORMAT {
            return Err(Error::Checkpoint(format!(
                "unknown format tag {:?}",
                ck.format
            )));
        }
        Mlp::from_parts(ck.layers, ck.params)
    }
}

pub fn save_checkpoint(net: &Mlp, path: &Path) -> Result<()> {
    std::fs::write(path, net.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Mlp> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Mlp::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::mlp_specs;
    use crate::rng::stream;

    #[test]
    fn json_round_trip_is_exact() {
        let net = Mlp::init(mlp_specs(8, 16, 2, 4), &mut stream(9, &[])).unwrap();
        let back = Mlp::from_json(&net.to_json().unwrap()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn rejects_malformed() {
        let net = Mlp::init(mlp_specs(2, 3, 1, 2), &mut stream(9, &[])).unwrap();
        let text = net.to_json().unwrap();
        assert!(Mlp::from_json(&text.replace("cmdqn-mlp/1", "other")).is_err());
        let truncated = r#"{"format":"cmdqn-mlp/1","layers":[{"input_dim":1,"output_dim":1,"activation":"identity"}],"params":[1.0]}"#;
        assert!(Mlp::from_json(truncated).is_err());
    }
}
