//! Binary checkpoints: an 8-byte magic, a little-endian format version and
//! a bincode payload.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"PISAACK\0";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn save_checkpoint<T: Serialize>(path: &Path, payload: &T) -> Result<()> {
    let body = bincode::serde::encode_to_vec(payload, bincode::config::standard())
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    let mut bytes = Vec::with_capacity(body.len() + 12);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&body);
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn payload(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path)?;
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(Error::Checkpoint(format!("{} is not a checkpoint file", path.display())));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("four bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "checkpoint format version {version} is not supported (expected {CHECKPOINT_VERSION})"
        )));
    }
    Ok(bytes[12..].to_vec())
}

pub fn load_checkpoint<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let body = payload(path)?;
    let (value, read) = bincode::serde::decode_from_slice(&body, bincode::config::standard())
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    if read != body.len() {
        return Err(Error::Checkpoint("trailing bytes after checkpoint payload".into()));
    }
    Ok(value)
}

/// Decode only a leading value of the payload, such as a header written as
/// the first element of a tuple.
pub fn peek_checkpoint<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let body = payload(path)?;
    let (value, _) = bincode::serde::decode_from_slice(&body, bincode::config::standard())
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok(value)
}
