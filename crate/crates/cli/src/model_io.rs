//! JSON container for sampled operators, schema `bandlab.model.v1`.
//!
//! Blocks are stored row major as `[re, im]` pairs. The `kind`, `field` and
//! seed fields record how the operator was drawn; they are provenance, not
//! needed to reload it.

use bandlab_core::model::BlockTridiagonalOperator;
use bandlab_core::{ComplexMatrix, RngStream};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

pub const MODEL_FORMAT: &str = "bandlab.model.v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelRecord {
    pub format: String,
    pub n: usize,
    pub width: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream_index: Option<u64>,
    pub v_blocks: Vec<Vec<[f64; 2]>>,
    pub t_blocks: Vec<Vec<[f64; 2]>>,
}

fn block_to_pairs(m: &ComplexMatrix) -> Vec<[f64; 2]> {
    m.data().iter().map(|z| [z.re, z.im]).collect()
}

fn block_from_pairs(width: usize, pairs: &[[f64; 2]]) -> CliResult<ComplexMatrix> {
    if pairs.len() != width * width {
        return Err(CliError::Usage(format!(
            "block has {} entries, expected {}",
            pairs.len(),
            width * width
        )));
    }
    Ok(ComplexMatrix::from_vec(
        width,
        width,
        pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
    ))
}

pub fn to_record(
    h: &BlockTridiagonalOperator,
    kind: Option<&str>,
    field: Option<&str>,
    stream: Option<&RngStream>,
) -> ModelRecord {
    ModelRecord {
        format: MODEL_FORMAT.to_string(),
        n: h.n(),
        width: h.width(),
        kind: kind.map(str::to_string),
        field: field.map(str::to_string),
        master_seed: stream.map(RngStream::master_seed),
        stream_index: stream.map(RngStream::stream_index),
        v_blocks: h.v_blocks().iter().map(block_to_pairs).collect(),
        t_blocks: h.t_blocks().iter().map(block_to_pairs).collect(),
    }
}

pub fn to_json(record: &ModelRecord) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("model serialization cannot fail");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> CliResult<BlockTridiagonalOperator> {
    let record: ModelRecord =
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("model json: {e}")))?;
    if record.format != MODEL_FORMAT {
        return Err(CliError::Usage(format!(
            "unsupported model format {:?}, expected {MODEL_FORMAT:?}",
            record.format
        )));
    }
    if record.v_blocks.len() != record.n {
        return Err(CliError::Usage(format!(
            "model declares n = {} but carries {} potential blocks",
            record.n,
            record.v_blocks.len()
        )));
    }
    let v: CliResult<Vec<_>> = record
        .v_blocks
        .iter()
        .map(|b| block_from_pairs(record.width, b))
        .collect();
    let t: CliResult<Vec<_>> = record
        .t_blocks
        .iter()
        .map(|b| block_from_pairs(record.width, b))
        .collect();
    Ok(BlockTridiagonalOperator::from_parts(v?, t?)?)
}
