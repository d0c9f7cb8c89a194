use serde::{Deserialize, Serialize};

use super::lexicon;
use super::normalize::normalize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    MultiplierPrefix,
    BridgeMu,
    Hapticity,
    ElementName,
    OxidationState,
    DonorSet,
    ChargeAnnotation,
    SolvateMarker,
    CatenaMarker,
    Punctuation,
    Word,
}

/// A classified piece of a normalized name. `span` is a byte range into the
/// normalized string and `text` is exactly that substring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: (usize, usize),
}

impl Token {
    pub fn is_punct(&self, s: &str) -> bool {
        self.kind == TokenKind::Punctuation && self.text == s
    }
}

/// Normalizes `name` and splits it into classified tokens.
pub fn tokenize(name: &str) -> Vec<Token> {
    tokenize_normalized(&normalize(name))
}

/// Tokenizes text that is already in normalized form.
pub(crate) fn tokenize_normalized(text: &str) -> Vec<Token> {
    let raw = lex(text);
    classify(text, raw)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Raw {
    Punct,
    Run,
    Donor,
}

fn is_run_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn lex(text: &str) -> Vec<(Raw, usize, usize)> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(start, c)) = it.peek() {
        if c == ' ' {
            it.next();
            continue;
        }
        let after_hyphen = matches!(out.last(), Some((Raw::Punct, s, e)) if &text[*s..*e] == "-");
        if after_hyphen {
            if let Some(end) = donor_set_at(text, start) {
                out.push((Raw::Donor, start, end));
                while it.peek().is_some_and(|(i, _)| *i < end) {
                    it.next();
                }
                continue;
            }
        }
        if is_run_char(c) {
            let mut end = start;
            while let Some(&(i, ch)) = it.peek() {
                if is_run_char(ch) {
                    end = i + ch.len_utf8();
                    it.next();
                } else {
                    break;
                }
            }
            // primes belong to the preceding locant or label
            while let Some(&(i, '\'')) = it.peek() {
                end = i + 1;
                it.next();
            }
            out.push((Raw::Run, start, end));
        } else {
            it.next();
            out.push((Raw::Punct, start, start + c.len_utf8()));
        }
    }
    out
}

/// Matches `label(,label)*` of donor-atom labels ending at a closing bracket,
/// a space or the end of the text. Returns the end byte offset.
fn donor_set_at(text: &str, start: usize) -> Option<usize> {
    let rest = &text[start..];
    let end_rel = rest
        .find([')', ']', '}', ' '])
        .unwrap_or(rest.len());
    let candidate = &rest[..end_rel];
    if candidate.is_empty() {
        return None;
    }
    let ok = candidate.split(',').all(|label| {
        lexicon::is_donor_label(label)
            && label
                .trim_end_matches('\'')
                .chars()
                .all(|c| c.is_ascii_lowercase())
    });
    ok.then_some(start + end_rel)
}

fn classify(text: &str, raw: Vec<(Raw, usize, usize)>) -> Vec<Token> {
    let slice = |k: usize| -> &str {
        let (_, s, e) = raw[k];
        &text[s..e]
    };
    let is_p = |k: usize, p: &str| raw.get(k).is_some_and(|r| r.0 == Raw::Punct) && slice(k) == p;
    let is_element_run = |k: usize| {
        raw.get(k).is_some_and(|r| r.0 == Raw::Run) && lexicon::fused_metal(slice(k)).is_some()
    };

    let mut tokens = Vec::with_capacity(raw.len());
    for (k, &(r, s, e)) in raw.iter().enumerate() {
        let t = &text[s..e];
        let kind = match r {
            Raw::Punct => TokenKind::Punctuation,
            Raw::Donor => TokenKind::DonorSet,
            Raw::Run => {
                if k == 0 && t == "catena" {
                    TokenKind::CatenaMarker
                } else if t == "mu" || is_numbered(t, "mu") {
                    TokenKind::BridgeMu
                } else if is_numbered(t, "eta") {
                    TokenKind::Hapticity
                } else if lexicon::fused_metal(t).is_some() {
                    TokenKind::ElementName
                } else if lexicon::is_roman(t)
                    && k >= 2
                    && is_p(k - 1, "(")
                    && is_element_run(k - 2)
                    && is_p(k + 1, ")")
                    && raw[k - 2].2 == raw[k - 1].1
                {
                    TokenKind::OxidationState
                } else if lexicon::is_multiplier(t)
                    && (is_p(k + 1, "(") && raw[k + 1].1 == e
                        || is_p(k + 1, "-") && is_element_run(k + 2))
                {
                    TokenKind::MultiplierPrefix
                } else if lexicon::is_charge_word(t) {
                    TokenKind::ChargeAnnotation
                } else if lexicon::is_solvate_word(t) {
                    TokenKind::SolvateMarker
                } else {
                    TokenKind::Word
                }
            }
        };
        tokens.push(Token {
            kind,
            text: t.to_string(),
            span: (s, e),
        });
    }
    tokens
}

fn is_numbered(t: &str, head: &str) -> bool {
    t.strip_prefix(head)
        .is_some_and(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
}
