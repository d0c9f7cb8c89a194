//! Systematic MOF names: normalization, tokens, descriptors and ablation masks.

mod lexicon;
mod mask;
mod normalize;
mod parse;
mod token;

use thiserror::Error;

pub use lexicon::{is_metal_symbol, multiplier_value, roman_value, Count};
pub use mask::{mask, mask_flags, token_classes, MaskClass, MASK};
pub use normalize::normalize;
pub use parse::{
    mu_histogram, parse, Auxiliary, AuxiliaryKind, Diagnostic, Fragment, FragmentRole,
    LigandDescriptor, MetalDescriptor, MuBin, ParsedName, Severity,
};
pub use token::{tokenize, Token, TokenKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NomenclatureError {
    #[error("unknown multiplier prefix '{0}'")]
    UnknownPrefix(String),
    #[error("malformed roman numeral '{0}'")]
    BadNumeral(String),
}

/// True when the normalized name carries the leading `catena` marker.
pub fn has_catena_marker(name: &str) -> bool {
    tokenize(name)
        .first()
        .is_some_and(|t| t.kind == TokenKind::CatenaMarker)
}
