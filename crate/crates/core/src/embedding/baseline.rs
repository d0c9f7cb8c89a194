//! Signed hashed character n-grams.

use std::collections::BTreeMap;

use super::{Embedding, ProviderConfig};
use crate::nomenclature::normalize;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over raw bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

/// Distinct character n-grams of `text` for every `n` in `lo..=hi`, with counts.
pub fn char_ngrams(text: &str, lo: usize, hi: usize) -> BTreeMap<&str, u32> {
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let n_chars = bounds.len() - 1;
    let mut grams = BTreeMap::new();
    for n in lo..=hi {
        if n == 0 || n > n_chars {
            continue;
        }
        for start in 0..=(n_chars - n) {
            *grams.entry(&text[bounds[start]..bounds[start + n]]).or_insert(0) += 1;
        }
    }
    grams
}

/// Deterministic embedding of `text`: each distinct n-gram of the normalized
/// text adds `±(1 + ln tf)` to bucket `fnv1a64 % dim`, sign taken from bit 63.
/// The result is L2-normalized; text without n-grams gives the zero vector.
pub fn embed_baseline(text: &str, config: &ProviderConfig) -> Embedding {
    let dim = config.dim;
    let (lo, hi) = config.ngram_range;
    let norm_text = normalize(text);
    let mut acc = vec![0.0f64; dim];
    for (gram, tf) in char_ngrams(&norm_text, lo, hi) {
        let h = fnv1a64(gram.as_bytes());
        let bucket = (h % dim as u64) as usize;
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        acc[bucket] += sign * (1.0 + libm::log(f64::from(tf)));
    }
    let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
    let values = if norm > 0.0 {
        acc.iter().map(|v| (v / norm) as f32).collect()
    } else {
        vec![0.0; dim]
    };
    Embedding {
        values,
        provider_id: config.provider_id(),
    }
}
