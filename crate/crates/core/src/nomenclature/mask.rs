use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::lexicon;
use super::parse::{parse_with_roles, TokenRole};
use super::token::{Token, TokenKind};

pub const MASK: &str = "[MASK]";

/// Token groups removed in ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MaskClass {
    MetalTerms,
    LigandTerms,
    MuIndicators,
    StructuralModifiers,
}

impl MaskClass {
    pub const ALL: [MaskClass; 4] = [
        MaskClass::MetalTerms,
        MaskClass::LigandTerms,
        MaskClass::MuIndicators,
        MaskClass::StructuralModifiers,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MaskClass::MetalTerms => "metal",
            MaskClass::LigandTerms => "ligand",
            MaskClass::MuIndicators => "mu",
            MaskClass::StructuralModifiers => "structural",
        }
    }
}

impl fmt::Display for MaskClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MaskClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "metal" | "metalterms" => Ok(MaskClass::MetalTerms),
            "ligand" | "ligandterms" => Ok(MaskClass::LigandTerms),
            "mu" | "muindicators" => Ok(MaskClass::MuIndicators),
            "structural" | "structuralmodifiers" => Ok(MaskClass::StructuralModifiers),
            other => Err(format!("unknown mask class '{other}'")),
        }
    }
}

fn class_of(tokens: &[Token], roles: &[Option<TokenRole>], i: usize) -> Option<MaskClass> {
    let t = &tokens[i];
    match t.kind {
        TokenKind::ElementName | TokenKind::OxidationState => Some(MaskClass::MetalTerms),
        TokenKind::MultiplierPrefix
            if tokens.get(i + 1).is_some_and(|n| n.is_punct("-"))
                && tokens.get(i + 2).is_some_and(|n| n.kind == TokenKind::ElementName) =>
        {
            Some(MaskClass::MetalTerms)
        }
        TokenKind::DonorSet | TokenKind::ChargeAnnotation => Some(MaskClass::LigandTerms),
        TokenKind::BridgeMu | TokenKind::Hapticity => Some(MaskClass::MuIndicators),
        TokenKind::CatenaMarker | TokenKind::SolvateMarker => Some(MaskClass::StructuralModifiers),
        TokenKind::Word if lexicon::is_stereo_word(&t.text) => Some(MaskClass::StructuralModifiers),
        _ if roles[i] == Some(TokenRole::LigandStem) => Some(MaskClass::LigandTerms),
        _ => None,
    }
}

/// The mask class of every token of `name`, aligned with [`super::tokenize`].
pub fn token_classes(name: &str) -> Vec<Option<MaskClass>> {
    let (_, tokens, roles) = parse_with_roles(name);
    (0..tokens.len()).map(|i| class_of(&tokens, &roles, i)).collect()
}

/// Per-token flags: true where the token would be replaced by `[MASK]`.
pub fn mask_flags(name: &str, classes: &BTreeSet<MaskClass>) -> Vec<bool> {
    token_classes(name)
        .into_iter()
        .map(|c| c.is_some_and(|c| classes.contains(&c)))
        .collect()
}

/// Normalizes `name` and replaces every token of the requested classes with `[MASK]`.
pub fn mask(name: &str, classes: &BTreeSet<MaskClass>) -> String {
    let (parsed, tokens, roles) = parse_with_roles(name);
    let text = parsed.normalized;
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    for (i, t) in tokens.iter().enumerate() {
        if class_of(&tokens, &roles, i).is_some_and(|c| classes.contains(&c)) {
            out.push_str(&text[pos..t.span.0]);
            out.push_str(MASK);
            pos = t.span.1;
        }
    }
    out.push_str(&text[pos..]);
    out
}
