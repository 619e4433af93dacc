//! Model file: a JSON document holding dimensions, activation, normalization
//! statistics, every weight at full precision and the training config.
//! Floats are written in shortest round-trip form, so reloading is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::read_text;
use crate::error::{Error, Result};
use crate::net::ShallowNet;

pub const FORMAT_TAG: &str = "rssloc-shallow-net";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    parameter_count: usize,
    network: ShallowNet,
}

pub fn model_to_string(net: &ShallowNet) -> Result<String> {
    net.validate()?;
    let file = ModelFile {
        format: FORMAT_TAG.into(),
        version: FORMAT_VERSION,
        parameter_count: net.parameter_count(),
        network: net.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn parse_model(text: &str) -> Result<ShallowNet> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: None,
        line: e.line(),
        msg: e.to_string(),
    })?;
    if file.format != FORMAT_TAG {
        return Err(Error::Format(format!("unexpected model format tag {:?}", file.format)));
    }
    if file.version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported model version {}", file.version)));
    }
    file.network.validate()?;
    if file.parameter_count != file.network.parameter_count() {
        return Err(Error::Format(format!(
            "declared parameter count {} does not match the network ({})",
            file.parameter_count,
            file.network.parameter_count()
        )));
    }
    if let Some(cfg) = &file.network.train_config {
        cfg.validate()?;
    }
    Ok(file.network)
}

pub fn write_model(net: &ShallowNet, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_string(net)?)?;
    Ok(())
}

pub fn read_model(path: &Path) -> Result<ShallowNet> {
    parse_model(&read_text(path)?).map_err(|e| e.with_path(path))
}
