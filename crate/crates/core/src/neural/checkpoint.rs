//! Binary parameter checkpoints.
//!
//! Layout: 8-byte magic, `u32` format version, `u32` header length, a JSON
//! header (config, tensor shape table, parameter count, free-form
//! metadata), then the parameters as little-endian `f64` in storage order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{ModelParams, TensorShape};
use super::NBeatsConfig;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"CFTLNBTS";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    config: NBeatsConfig,
    shapes: Vec<TensorShape>,
    n_params: usize,
    #[serde(default)]
    metadata: serde_json::Value,
}

pub fn write_checkpoint<W: Write>(out: &mut W, params: &ModelParams, metadata: serde_json::Value) -> Result<()> {
    let header = serde_json::to_vec(&Header {
        config: params.config().clone(),
        shapes: params.shapes().to_vec(),
        n_params: params.len(),
        metadata,
    })?;
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    let len = u32::try_from(header.len()).map_err(|_| Error::Checkpoint("header too large".into()))?;
    out.write_all(&len.to_le_bytes())?;
    out.write_all(&header)?;
    let mut payload = Vec::with_capacity(params.len() * 8);
    for v in params.values() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&payload)?;
    Ok(())
}

/// Returns the parameters and the stored metadata.
pub fn read_checkpoint<R: Read>(input: &mut R) -> Result<(ModelParams, serde_json::Value)> {
    let bad = |m: &str| Error::Checkpoint(m.to_string());
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(|_| bad("truncated magic"))?;
    if &magic != MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word).map_err(|_| bad("missing version"))?;
    let version = u32::from_le_bytes(word);
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint version {version} (expected {FORMAT_VERSION})"
        )));
    }
    input.read_exact(&mut word).map_err(|_| bad("missing header length"))?;
    let mut header = vec![0u8; u32::from_le_bytes(word) as usize];
    input.read_exact(&mut header).map_err(|_| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(&header)?;
    let template = ModelParams::zeros(&header.config)?;
    if template.shapes() != header.shapes.as_slice() || template.len() != header.n_params {
        return Err(bad("shape table does not match the configuration"));
    }
    let mut payload = Vec::with_capacity(header.n_params * 8);
    input.read_to_end(&mut payload)?;
    if payload.len() != header.n_params * 8 {
        return Err(Error::Checkpoint(format!(
            "payload holds {} bytes, expected {}",
            payload.len(),
            header.n_params * 8
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((ModelParams::from_values(&header.config, values)?, header.metadata))
}

pub fn save_checkpoint(path: &Path, params: &ModelParams, metadata: serde_json::Value) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_checkpoint(&mut f, params, metadata)?;
    f.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(ModelParams, serde_json::Value)> {
    read_checkpoint(&mut std::io::BufReader::new(std::fs::File::open(path)?))
}
