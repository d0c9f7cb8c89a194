//! Binary embedding store.
//!
//! Layout, all integers little-endian:
//! `"MOFE"` | version u16 | dim u32 | count u64 |
//! count × (refcode_len u16 | refcode UTF-8 | dim × f32) | CRC32 of everything before it.
//!
//! Provider identity is not part of the file.

use std::path::Path;

use thiserror::Error;

use super::Embedding;

pub const STORE_MAGIC: &[u8; 4] = b"MOFE";
pub const STORE_VERSION: u16 = 1;
/// Provider id given to embeddings read back by [`load_embeddings`].
pub const STORED_PROVIDER_ID: &str = "mofe-store";

const HEADER_LEN: usize = 4 + 2 + 4 + 8;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error on embedding store: {0}")]
    Io(#[from] std::io::Error),
    #[error("record '{refcode}' has dimension {found}, expected {expected}")]
    DimensionMismatch {
        refcode: String,
        expected: usize,
        found: usize,
    },
    #[error("record '{refcode}' has provider '{found}', expected '{expected}'")]
    ProviderMismatch {
        refcode: String,
        expected: String,
        found: String,
    },
    #[error("refcode '{0}' is longer than 65535 bytes")]
    RefcodeTooLong(String),
    #[error("not an embedding store (bad magic bytes)")]
    BadMagic,
    #[error("unsupported embedding store version {0}")]
    UnsupportedVersion(u16),
    #[error("embedding store is truncated")]
    Truncated,
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("{0} unexpected bytes after the last record")]
    TrailingBytes(usize),
    #[error("refcode is not valid UTF-8")]
    InvalidRefcode,
}

/// Serializes records into the store layout.
pub fn encode_store(records: &[(String, Embedding)]) -> Result<Vec<u8>, StoreError> {
    let dim = records.first().map_or(0, |(_, e)| e.dim());
    if let Some((_, first)) = records.first() {
        for (refcode, e) in records {
            if e.dim() != dim {
                return Err(StoreError::DimensionMismatch {
                    refcode: refcode.clone(),
                    expected: dim,
                    found: e.dim(),
                });
            }
            if e.provider_id != first.provider_id {
                return Err(StoreError::ProviderMismatch {
                    refcode: refcode.clone(),
                    expected: first.provider_id.clone(),
                    found: e.provider_id.clone(),
                });
            }
        }
    }
    let mut buf = Vec::with_capacity(HEADER_LEN + records.len() * (10 + 4 * dim) + 4);
    buf.extend_from_slice(STORE_MAGIC);
    buf.extend_from_slice(&STORE_VERSION.to_le_bytes());
    buf.extend_from_slice(&(dim as u32).to_le_bytes());
    buf.extend_from_slice(&(records.len() as u64).to_le_bytes());
    for (refcode, e) in records {
        let len = u16::try_from(refcode.len()).map_err(|_| StoreError::RefcodeTooLong(refcode.clone()))?;
        buf.extend_from_slice(&len.to_le_bytes());
        buf.extend_from_slice(refcode.as_bytes());
        for v in &e.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    Ok(buf)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], StoreError> {
        let end = self.pos.checked_add(n).ok_or(StoreError::Truncated)?;
        let s = self.buf.get(self.pos..end).ok_or(StoreError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, StoreError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, StoreError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, StoreError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Parses a store image. Nothing is returned unless the whole image is valid.
pub fn decode_store(bytes: &[u8], provider_id: &str) -> Result<Vec<(String, Embedding)>, StoreError> {
    if bytes.len() < 4 {
        return Err(if STORE_MAGIC.starts_with(bytes) {
            StoreError::Truncated
        } else {
            StoreError::BadMagic
        });
    }
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != STORE_MAGIC {
        return Err(StoreError::BadMagic);
    }
    let version = r.u16()?;
    if version != STORE_VERSION {
        return Err(StoreError::UnsupportedVersion(version));
    }
    let dim = r.u32()? as usize;
    let count = r.u64()?;
    let mut records = Vec::new();
    for _ in 0..count {
        let len = r.u16()? as usize;
        let refcode = std::str::from_utf8(r.take(len)?)
            .map_err(|_| StoreError::InvalidRefcode)?
            .to_string();
        let raw = r.take(dim.checked_mul(4).ok_or(StoreError::Truncated)?)?;
        let values = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        records.push((refcode, Embedding::new(values, provider_id)));
    }
    let body_end = r.pos;
    let stored = r.u32()?;
    if r.pos != bytes.len() {
        return Err(StoreError::TrailingBytes(bytes.len() - r.pos));
    }
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(StoreError::ChecksumMismatch { stored, computed });
    }
    Ok(records)
}

pub fn store_embeddings(records: &[(String, Embedding)], path: impl AsRef<Path>) -> Result<(), StoreError> {
    let buf = encode_store(records)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// Loads a store; embeddings carry [`STORED_PROVIDER_ID`].
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<Vec<(String, Embedding)>, StoreError> {
    load_embeddings_with_provider(path, STORED_PROVIDER_ID)
}

pub fn load_embeddings_with_provider(
    path: impl AsRef<Path>,
    provider_id: &str,
) -> Result<Vec<(String, Embedding)>, StoreError> {
    let bytes = std::fs::read(path)?;
    decode_store(&bytes, provider_id)
}
