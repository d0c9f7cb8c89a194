//! Name -> typed descriptors.
//!
//! The grammar is shallow on purpose. A name is `[catena-] body`, the body is a
//! list of space-separated components, and exactly one component (the first that
//! names a metal) is the framework. Framework components are hyphen-separated
//! units: bracketed ligands with an optional multiplier, metals with an optional
//! nuclearity prefix and oxidation state, and bare ligand words. Components before
//! the framework are counter-ions; components after it are guests, solvates and
//! hydrates. Anything that does not fit is kept verbatim as an opaque fragment.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use super::lexicon::{self, Count};
use super::normalize::normalize;
use super::token::{tokenize_normalized, Token, TokenKind};

fn count_str<S: Serializer>(c: &Count, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LigandDescriptor {
    pub name: String,
    /// Written with a bridging descriptor at all (`mu` or `muN`).
    pub bridging: bool,
    /// `N` of `muN`; `None` for plain `mu` and for non-bridging ligands.
    pub bridge_multiplicity: Option<u8>,
    #[serde(serialize_with = "count_str")]
    pub count: Count,
    pub hapticity: Vec<u8>,
    pub donor_set: Vec<String>,
    pub charge_annotation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetalDescriptor {
    pub element: String,
    pub nuclearity: u32,
    pub oxidation_state: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AuxiliaryKind {
    Solvate,
    Hydrate,
    CounterIon,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Auxiliary {
    pub kind: AuxiliaryKind,
    pub name: String,
    #[serde(serialize_with = "count_str")]
    pub count: Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Severity {
    Info,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: (usize, usize),
}

/// Which output list a fragment of the name was assigned to, with its index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FragmentRole {
    Ligand(usize),
    Metal(usize),
    Auxiliary(usize),
    Opaque(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fragment {
    pub span: (usize, usize),
    pub role: FragmentRole,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParsedName {
    pub normalized: String,
    pub catena: bool,
    pub ligands: Vec<LigandDescriptor>,
    pub metals: Vec<MetalDescriptor>,
    pub auxiliaries: Vec<Auxiliary>,
    pub opaque_fragments: Vec<String>,
    pub fragments: Vec<Fragment>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParsedName {
    /// Distinct metal symbols in order of first appearance.
    pub fn metal_elements(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for m in &self.metals {
            if !out.contains(&m.element.as_str()) {
                out.push(&m.element);
            }
        }
        out
    }
}

/// Histogram bin for [`mu_histogram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MuBin {
    Multiplicity(u8),
    Unspecified,
}

/// Counts bridging ligands per multiplicity, weighted by ligand count.
/// Plain `mu` ligands go to [`MuBin::Unspecified`]; non-bridging ligands are skipped.
pub fn mu_histogram<'a>(parsed: impl IntoIterator<Item = &'a ParsedName>) -> BTreeMap<MuBin, Count> {
    let mut hist = BTreeMap::new();
    for p in parsed {
        for l in p.ligands.iter().filter(|l| l.bridging) {
            let bin = l
                .bridge_multiplicity
                .map_or(MuBin::Unspecified, MuBin::Multiplicity);
            *hist.entry(bin).or_insert_with(|| Ratio::from_integer(0)) += l.count;
        }
    }
    hist
}

/// Parses a systematic name. Never fails: unrecognised material is reported
/// through `opaque_fragments` and `diagnostics`.
pub fn parse(name: &str) -> ParsedName {
    parse_with_roles(name).0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TokenRole {
    LigandStem,
}

pub(crate) fn parse_with_roles(name: &str) -> (ParsedName, Vec<Token>, Vec<Option<TokenRole>>) {
    let text = normalize(name);
    let tokens = tokenize_normalized(&text);
    let mut p = Parser {
        text: &text,
        tokens: &tokens,
        roles: vec![None; tokens.len()],
        out: ParsedName {
            normalized: text.clone(),
            catena: false,
            ligands: Vec::new(),
            metals: Vec::new(),
            auxiliaries: Vec::new(),
            opaque_fragments: Vec::new(),
            fragments: Vec::new(),
            diagnostics: Vec::new(),
        },
    };
    p.run();
    let Parser { roles, out, .. } = p;
    (out, tokens.clone(), roles)
}

#[derive(Debug, Clone)]
enum Node {
    Tok(usize),
    Group {
        open: usize,
        close: Option<usize>,
        kids: Vec<Node>,
    },
}

impl Node {
    fn first(&self) -> usize {
        match self {
            Node::Tok(i) => *i,
            Node::Group { open, .. } => *open,
        }
    }

    fn last(&self) -> usize {
        match self {
            Node::Tok(i) => *i,
            Node::Group { open, close, kids } => close
                .or_else(|| kids.last().map(Node::last))
                .unwrap_or(*open),
        }
    }

    fn visit_tokens(&self, f: &mut impl FnMut(usize)) {
        match self {
            Node::Tok(i) => f(*i),
            Node::Group { open, close, kids } => {
                f(*open);
                for k in kids {
                    k.visit_tokens(f);
                }
                if let Some(c) = close {
                    f(*c);
                }
            }
        }
    }
}

fn closer_for(open: &str) -> &'static str {
    match open {
        "(" => ")",
        "[" => "]",
        _ => "}",
    }
}

struct Parser<'a> {
    text: &'a str,
    tokens: &'a [Token],
    roles: Vec<Option<TokenRole>>,
    out: ParsedName,
}

impl<'a> Parser<'a> {
    fn tok(&self, i: usize) -> &'a Token {
        &self.tokens[i]
    }

    fn is_tok(&self, n: &Node, kind: TokenKind) -> bool {
        matches!(n, Node::Tok(i) if self.tok(*i).kind == kind)
    }

    fn is_punct(&self, n: &Node, p: &str) -> bool {
        matches!(n, Node::Tok(i) if self.tok(*i).is_punct(p))
    }

    fn span_of(&self, nodes: &[Node]) -> (usize, usize) {
        let first = nodes.first().map(Node::first).unwrap_or(0);
        let last = nodes.last().map(Node::last).unwrap_or(0);
        (self.tok(first).span.0, self.tok(last).span.1)
    }

    fn text_of(&self, nodes: &[Node]) -> String {
        if nodes.is_empty() {
            return String::new();
        }
        let (s, e) = self.span_of(nodes);
        self.text[s..e].to_string()
    }

    fn diag(&mut self, severity: Severity, message: impl Into<String>, span: (usize, usize)) {
        self.out.diagnostics.push(Diagnostic {
            severity,
            message: message.into(),
            span,
        });
    }

    fn build_tree(&mut self) -> Vec<Node> {
        let mut stack: Vec<(usize, Vec<Node>)> = Vec::new();
        let mut top: Vec<Node> = Vec::new();
        for (i, t) in self.tokens.iter().enumerate() {
            let is_open = t.kind == TokenKind::Punctuation && matches!(t.text.as_str(), "(" | "[" | "{");
            let is_close = t.kind == TokenKind::Punctuation && matches!(t.text.as_str(), ")" | "]" | "}");
            if is_open {
                stack.push((i, Vec::new()));
            } else if is_close && !stack.is_empty() {
                let (open, kids) = stack.pop().expect("non-empty");
                if closer_for(&self.tokens[open].text) != t.text {
                    self.diag(Severity::Warning, "mismatched bracket", t.span);
                }
                let node = Node::Group {
                    open,
                    close: Some(i),
                    kids,
                };
                match stack.last_mut() {
                    Some((_, k)) => k.push(node),
                    None => top.push(node),
                }
            } else {
                if is_close {
                    self.diag(Severity::Warning, "unmatched closing bracket", t.span);
                }
                match stack.last_mut() {
                    Some((_, k)) => k.push(Node::Tok(i)),
                    None => top.push(Node::Tok(i)),
                }
            }
        }
        while let Some((open, kids)) = stack.pop() {
            let span = self.tokens[open].span;
            self.diag(Severity::Warning, "unclosed bracket", span);
            let node = Node::Group {
                open,
                close: None,
                kids,
            };
            match stack.last_mut() {
                Some((_, k)) => k.push(node),
                None => top.push(node),
            }
        }
        top
    }

    fn run(&mut self) {
        if self.tokens.is_empty() {
            return;
        }
        let mut body = self.build_tree();
        if self.tokens[0].kind == TokenKind::CatenaMarker {
            self.out.catena = true;
            body.remove(0);
            if body.first().is_some_and(|n| self.is_punct(n, "-")) {
                body.remove(0);
            }
        }
        if body.len() == 1 {
            if let Node::Group { kids, .. } = &body[0] {
                body = kids.clone();
            }
        }
        if body.is_empty() {
            return;
        }
        let one = Ratio::from_integer(1);
        if !self.parse_sequence(&body, one) {
            let span = self.span_of(&body);
            self.diag(
                Severity::Warning,
                "no metal or ligand descriptors found",
                span,
            );
        }
    }

    fn split_components(&self, nodes: &[Node]) -> Vec<Vec<Node>> {
        let mut comps: Vec<Vec<Node>> = Vec::new();
        let mut cur: Vec<Node> = Vec::new();
        for n in nodes {
            if let Some(prev) = cur.last() {
                if self.tok(prev.last()).span.1 < self.tok(n.first()).span.0 {
                    comps.push(std::mem::take(&mut cur));
                }
            }
            cur.push(n.clone());
        }
        if !cur.is_empty() {
            comps.push(cur);
        }
        comps
    }

    fn split_units(&self, comp: &[Node]) -> Vec<Vec<Node>> {
        comp.split(|n| self.is_punct(n, "-"))
            .filter(|u| !u.is_empty())
            .map(<[Node]>::to_vec)
            .collect()
    }

    /// `[multiplier] group`: returns (multiplier value, group kids, multiplier token).
    fn bracket_unit<'n>(&self, unit: &'n [Node]) -> Option<(Count, &'n [Node])> {
        match unit {
            [Node::Group { kids, .. }] => Some((Ratio::from_integer(1), kids)),
            [Node::Tok(m), Node::Group { kids, .. }]
                if self.tok(*m).kind == TokenKind::MultiplierPrefix =>
            {
                let v = lexicon::multiplier_value(&self.tok(*m).text).ok()?;
                Some((v, kids))
            }
            _ => None,
        }
    }

    fn is_metal_unit(&self, unit: &[Node]) -> bool {
        match unit {
            [n] | [n, Node::Group { .. }] => self.is_tok(n, TokenKind::ElementName),
            _ => false,
        }
    }

    fn has_direct_metal(&self, comp: &[Node]) -> bool {
        self.split_units(comp).iter().any(|u| self.is_metal_unit(u))
    }

    /// A single bracketed unit whose content names a metal directly.
    fn is_complex_unit(&self, unit: &[Node]) -> bool {
        self.bracket_unit(unit).is_some_and(|(_, kids)| {
            self.split_components(kids)
                .iter()
                .any(|c| self.has_direct_metal(c))
        })
    }

    fn has_nested_metal(&self, comp: &[Node]) -> bool {
        let units = self.split_units(comp);
        units.len() == 1 && self.is_complex_unit(&units[0])
    }

    fn contains_kind(&self, nodes: &[Node], kinds: &[TokenKind]) -> bool {
        let mut found = false;
        for n in nodes {
            n.visit_tokens(&mut |i| found |= kinds.contains(&self.tok(i).kind));
        }
        found
    }

    fn looks_ligand_like(&self, comp: &[Node]) -> bool {
        self.contains_kind(comp, &[TokenKind::BridgeMu, TokenKind::Hapticity])
            || self
                .split_units(comp)
                .iter()
                .any(|u| matches!(u.as_slice(), [Node::Tok(m), Node::Group { .. }] if self.tok(*m).kind == TokenKind::MultiplierPrefix))
    }

    /// Parses a component list. Returns false when no framework was found and
    /// everything went to opaque fragments.
    fn parse_sequence(&mut self, nodes: &[Node], outer: Count) -> bool {
        let comps = self.split_components(nodes);
        let framework = comps
            .iter()
            .position(|c| self.has_direct_metal(c))
            .or_else(|| comps.iter().position(|c| self.has_nested_metal(c)))
            .or_else(|| comps.iter().position(|c| self.looks_ligand_like(c)));
        let Some(fw) = framework else {
            for c in &comps {
                self.opaque(c);
            }
            return false;
        };

        for c in &comps[..fw] {
            if self.contains_kind(c, &[TokenKind::ElementName]) {
                self.descend(c, outer);
            } else {
                self.auxiliary(c, AuxiliaryKind::CounterIon, outer);
            }
        }
        self.parse_framework(&comps[fw]);

        let mut pending: Vec<&Vec<Node>> = Vec::new();
        for c in &comps[fw + 1..] {
            if let [Node::Tok(i)] = c.as_slice() {
                let t = self.tok(*i);
                if t.kind == TokenKind::SolvateMarker {
                    if let Some(n) = lexicon::hydrate_count(&t.text) {
                        self.flush_pending(&mut pending, outer);
                        self.push_aux(AuxiliaryKind::Hydrate, "water".into(), n * outer, t.span);
                    } else if pending.is_empty() {
                        self.diag(Severity::Info, "solvate marker without a solvent name", t.span);
                        self.push_aux(AuxiliaryKind::Solvate, String::new(), outer, t.span);
                    } else {
                        let start = self.span_of(pending[0]).0;
                        let name = self.text[start..self.span_of(pending[pending.len() - 1]).1].to_string();
                        pending.clear();
                        self.push_aux(AuxiliaryKind::Solvate, name, outer, (start, t.span.1));
                    }
                    continue;
                }
            }
            if self.contains_kind(c, &[TokenKind::ElementName]) {
                self.flush_pending(&mut pending, outer);
                self.descend(c, outer);
            } else {
                pending.push(c);
            }
        }
        self.flush_pending(&mut pending, outer);
        true
    }

    fn flush_pending(&mut self, pending: &mut Vec<&Vec<Node>>, outer: Count) {
        if pending.is_empty() {
            return;
        }
        let joined: Vec<Node> = pending.iter().flat_map(|c| c.iter().cloned()).collect();
        pending.clear();
        let (count, inner) = match self.bracket_unit(&joined) {
            Some((c, kids)) if !kids.is_empty() => (c, self.text_of(kids)),
            _ => (Ratio::from_integer(1), self.text_of(&joined)),
        };
        let kind = if lexicon::is_counter_ion(&inner) {
            AuxiliaryKind::CounterIon
        } else {
            AuxiliaryKind::Other
        };
        let span = self.span_of(&joined);
        self.push_aux(kind, inner, count * outer, span);
    }

    /// A component outside the framework that still names a metal, e.g. a
    /// metallocenium counter-ion: its contents are parsed as a nested sequence.
    fn descend(&mut self, comp: &[Node], outer: Count) {
        if let Some((count, kids)) = self.bracket_unit(comp) {
            let kids = kids.to_vec();
            if !self.parse_sequence(&kids, count * outer) {
                let span = self.span_of(comp);
                self.diag(Severity::Warning, "unrecognised metal-bearing group", span);
            }
        } else {
            self.parse_framework(comp);
        }
    }

    fn auxiliary(&mut self, comp: &[Node], kind: AuxiliaryKind, outer: Count) {
        let (count, name) = match self.bracket_unit(comp) {
            Some((c, kids)) if !kids.is_empty() => (c, self.text_of(kids)),
            _ => (Ratio::from_integer(1), self.text_of(comp)),
        };
        let span = self.span_of(comp);
        self.push_aux(kind, name, count * outer, span);
    }

    fn push_aux(&mut self, kind: AuxiliaryKind, name: String, count: Count, span: (usize, usize)) {
        self.out.auxiliaries.push(Auxiliary { kind, name, count });
        let idx = self.out.auxiliaries.len() - 1;
        self.out.fragments.push(Fragment {
            span,
            role: FragmentRole::Auxiliary(idx),
        });
    }

    fn opaque(&mut self, nodes: &[Node]) {
        let span = self.span_of(nodes);
        self.out.opaque_fragments.push(self.text[span.0..span.1].to_string());
        let idx = self.out.opaque_fragments.len() - 1;
        self.out.fragments.push(Fragment {
            span,
            role: FragmentRole::Opaque(idx),
        });
        self.diag(Severity::Info, "opaque fragment", span);
    }

    fn is_locant_unit(&self, unit: &[Node]) -> bool {
        unit.iter().all(|n| match n {
            Node::Tok(i) => {
                let t = self.tok(*i);
                t.is_punct(",")
                    || (t.kind == TokenKind::Word
                        && t.text.trim_end_matches('\'').chars().all(|c| c.is_ascii_digit()))
            }
            Node::Group { .. } => false,
        })
    }

    fn parse_framework(&mut self, comp: &[Node]) {
        let units = self.split_units(comp);
        let mut i = 0;
        let mut carry: Vec<Node> = Vec::new();
        while i < units.len() {
            let mut unit = std::mem::take(&mut carry);
            unit.extend(units[i].iter().cloned());
            i += 1;

            // "tetra" - "zinc"
            if let [Node::Tok(m)] = unit.as_slice() {
                if self.tok(*m).kind == TokenKind::MultiplierPrefix
                    && units.get(i).is_some_and(|u| self.is_metal_unit(u))
                {
                    let metal_unit = units[i].clone();
                    i += 1;
                    let value = lexicon::multiplier_value(&self.tok(*m).text).expect("tokenizer checked");
                    let mut whole = unit.clone();
                    whole.extend(metal_unit.iter().cloned());
                    self.metal(&metal_unit, Some(value), &whole);
                    continue;
                }
            }
            if self.is_metal_unit(&unit) {
                self.metal(&unit.clone(), None, &unit);
                continue;
            }
            if i < units.len() && self.is_locant_unit(&unit) {
                // locants belong to the following unit: "2,2'-bipyridine"
                unit.push(Node::Tok(self.hyphen_after(&unit)));
                carry = unit;
                continue;
            }
            if self.is_complex_unit(&unit) {
                let (count, kids) = self.bracket_unit(&unit).expect("complex unit is bracketed");
                let kids = kids.to_vec();
                self.parse_sequence(&kids, count);
                continue;
            }
            if let Some((count, kids)) = self.bracket_unit(&unit) {
                let kids = kids.to_vec();
                self.ligand(&kids, count, &unit);
                continue;
            }
            self.bare_ligand(&unit);
        }
    }

    /// Index of the hyphen token that follows `unit` in the token stream.
    fn hyphen_after(&self, unit: &[Node]) -> usize {
        unit.last().map(Node::last).expect("non-empty unit") + 1
    }

    fn metal(&mut self, unit: &[Node], prefix: Option<Count>, whole: &[Node]) {
        let Node::Tok(e) = unit[0] else { unreachable!("metal unit starts with a token") };
        let word = &self.tok(e).text;
        let (fused, symbol) = lexicon::fused_metal(word).expect("element token");
        let span = self.span_of(whole);
        let mult = prefix.or(fused).unwrap_or_else(|| Ratio::from_integer(1));
        let nuclearity = if mult.is_integer() {
            *mult.numer()
        } else {
            self.diag(Severity::Warning, "fractional nuclearity", span);
            1
        };
        if prefix.is_some() && fused.is_some() {
            self.diag(Severity::Warning, "double multiplier on metal", span);
        }
        let mut oxidation_state = None;
        if let Some(Node::Group { kids, .. }) = unit.get(1) {
            match kids.as_slice() {
                [Node::Tok(o)] if self.tok(*o).kind == TokenKind::OxidationState => {
                    oxidation_state = lexicon::roman_value(&self.tok(*o).text).ok();
                }
                _ => {
                    let s = self.span_of(&unit[1..]);
                    self.diag(Severity::Warning, "unrecognised metal annotation", s);
                }
            }
        }
        self.out.metals.push(MetalDescriptor {
            element: symbol.to_string(),
            nuclearity,
            oxidation_state,
        });
        let idx = self.out.metals.len() - 1;
        self.out.fragments.push(Fragment {
            span,
            role: FragmentRole::Metal(idx),
        });
    }

    fn mark_stem(&mut self, nodes: &[Node]) {
        let mut idx = Vec::new();
        for n in nodes {
            n.visit_tokens(&mut |i| idx.push(i));
        }
        for i in idx {
            let t = self.tok(i);
            let stem_kind = matches!(t.kind, TokenKind::Word | TokenKind::MultiplierPrefix);
            let nuclearity = t.kind == TokenKind::MultiplierPrefix
                && self.tokens.get(i + 2).is_some_and(|n| n.kind == TokenKind::ElementName);
            if stem_kind && !nuclearity && !lexicon::is_stereo_word(&t.text) {
                self.roles[i] = Some(TokenRole::LigandStem);
            }
        }
    }

    fn ligand(&mut self, kids: &[Node], count: Count, unit: &[Node]) {
        let span = self.span_of(unit);
        let mut bridging = false;
        let mut bridge_multiplicity = None;
        let mut hapticity = Vec::new();
        let mut k = 0;
        while k < kids.len() {
            let Node::Tok(i) = kids[k] else { break };
            let t = self.tok(i);
            match t.kind {
                TokenKind::BridgeMu => {
                    if bridging {
                        self.diag(Severity::Warning, "repeated bridging descriptor", t.span);
                    }
                    bridging = true;
                    if let Ok(n) = t.text[2..].parse::<u8>() {
                        if (2..=12).contains(&n) {
                            bridge_multiplicity = Some(n);
                        } else {
                            self.diag(Severity::Warning, "bridging multiplicity outside 2..=12", t.span);
                        }
                    }
                }
                TokenKind::Hapticity => match t.text[3..].parse::<u8>() {
                    Ok(n) if n >= 1 => hapticity.push(n),
                    _ => self.diag(Severity::Warning, "invalid hapticity", t.span),
                },
                _ => break,
            }
            k += 1;
            if kids.get(k).is_some_and(|n| self.is_punct(n, "-") || self.is_punct(n, ",")) {
                k += 1;
            }
        }

        let mut end = kids.len();
        let mut donor_set = Vec::new();
        if end > k && self.is_tok(&kids[end - 1], TokenKind::DonorSet) {
            let Node::Tok(d) = kids[end - 1] else { unreachable!() };
            donor_set = self.tok(d).text.split(',').map(str::to_string).collect();
            end -= 1;
            if end > k && self.is_punct(&kids[end - 1], "-") {
                end -= 1;
            }
        }
        let mut charge = Vec::new();
        while end > k && self.is_tok(&kids[end - 1], TokenKind::ChargeAnnotation) {
            let Node::Tok(c) = kids[end - 1] else { unreachable!() };
            charge.push(self.tok(c).text.clone());
            end -= 1;
        }
        charge.reverse();

        let stem = &kids[k..end];
        if stem.is_empty() {
            self.diag(Severity::Warning, "ligand without a stem", span);
        }
        self.mark_stem(stem);
        let name = self.text_of(stem);
        self.out.ligands.push(LigandDescriptor {
            name,
            bridging,
            bridge_multiplicity,
            count,
            hapticity,
            donor_set,
            charge_annotation: (!charge.is_empty()).then(|| charge.join(" ")),
        });
        let idx = self.out.ligands.len() - 1;
        self.out.fragments.push(Fragment {
            span,
            role: FragmentRole::Ligand(idx),
        });
    }

    fn bare_ligand(&mut self, unit: &[Node]) {
        let span = self.span_of(unit);
        let text = self.text_of(unit);
        let (count, name) = match lexicon::fused_simple_ligand(&text) {
            Some((c, stem)) => (c, stem.to_string()),
            None => {
                if let Some(prefix) = lexicon::leading_multiplier(&text) {
                    self.diag(
                        Severity::Info,
                        format!("'{text}' starts with multiplier '{prefix}'; kept as a stem"),
                        span,
                    );
                }
                (Ratio::from_integer(1), text)
            }
        };
        self.mark_stem(unit);
        self.out.ligands.push(LigandDescriptor {
            name,
            bridging: false,
            bridge_multiplicity: None,
            count,
            hapticity: Vec::new(),
            donor_set: Vec::new(),
            charge_annotation: None,
        });
        let idx = self.out.ligands.len() - 1;
        self.out.fragments.push(Fragment {
            span,
            role: FragmentRole::Ligand(idx),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: u32) -> Count {
        Ratio::from_integer(n)
    }

    #[test]
    fn irmof1() {
        let p = parse("catena-(tris(μ₄-terephthalato)-(μ₄-oxo)-tetra-zinc)");
        assert!(p.catena);
        assert_eq!(p.ligands.len(), 2);
        assert_eq!(p.ligands[0].name, "terephthalato");
        assert_eq!(p.ligands[0].bridge_multiplicity, Some(4));
        assert_eq!(p.ligands[0].count, r(3));
        assert_eq!(p.ligands[1].name, "oxo");
        assert_eq!(p.ligands[1].bridge_multiplicity, Some(4));
        assert_eq!(p.ligands[1].count, r(1));
        assert_eq!(
            p.metals,
            vec![MetalDescriptor {
                element: "Zn".into(),
                nuclearity: 4,
                oxidation_state: None
            }]
        );
        assert!(p.auxiliaries.is_empty());
        assert!(p.opaque_fragments.is_empty());
    }

    #[test]
    fn water_is_opaque() {
        let p = parse("water");
        assert!(!p.catena);
        assert_eq!(p.opaque_fragments, vec!["water".to_string()]);
        assert!(!p.diagnostics.is_empty());
        assert!(p.ligands.is_empty() && p.metals.is_empty());
    }

    #[test]
    fn empty_name() {
        let p = parse("");
        assert!(p.fragments.is_empty());
    }

    #[test]
    fn fused_simple_ligands_and_guests() {
        let p = parse("catena-(tris(μ-4,4'-bipyridine)-hexakis(μ-cyano)-dicyano-diethanol-tetra-manganese bis(4,4'-bipyridine))");
        let names: Vec<_> = p.ligands.iter().map(|l| (l.name.as_str(), l.count)).collect();
        assert_eq!(
            names,
            vec![
                ("4,4'-bipyridine", r(3)),
                ("cyano", r(6)),
                ("cyano", r(2)),
                ("ethanol", r(2))
            ]
        );
        assert_eq!(p.metals[0].element, "Mn");
        assert_eq!(p.metals[0].nuclearity, 4);
        assert_eq!(p.auxiliaries.len(), 1);
        assert_eq!(p.auxiliaries[0].name, "4,4'-bipyridine");
        assert_eq!(p.auxiliaries[0].count, r(2));
        assert_eq!(p.auxiliaries[0].kind, AuxiliaryKind::Other);
    }

    #[test]
    fn mixed_valence_and_hemihydrate() {
        let p = parse("catena-[bis(μ₂-{[(2-oxidophenyl)methylidene]amino}propanoato)-bis(2,2'-bipyridine)-manganese(ii)-manganese(iii) perchlorate hemihydrate]");
        let ox: Vec<_> = p.metals.iter().map(|m| (m.element.as_str(), m.oxidation_state)).collect();
        assert_eq!(ox, vec![("Mn", Some(2)), ("Mn", Some(3))]);
        assert_eq!(p.ligands[0].name, "{[(2-oxidophenyl)methylidene]amino}propanoato");
        assert_eq!(p.ligands[1].count, r(2));
        assert!(!p.ligands[1].bridging);
        assert_eq!(p.auxiliaries[0].kind, AuxiliaryKind::CounterIon);
        assert_eq!(p.auxiliaries[0].name, "perchlorate");
        assert_eq!(p.auxiliaries[1].kind, AuxiliaryKind::Hydrate);
        assert_eq!(p.auxiliaries[1].count, Ratio::new(1, 2));
    }

    #[test]
    fn hapticity_and_donors() {
        let p = parse("catena-(bis(μ₂-η²,η²-syn-benzoquinone)-tetrakis(μ₂-acetato-O,O′)-bis(μ₂-4,4′-bipyridine)-tetra-copper(i) hydroquinone solvate)");
        assert_eq!(p.ligands[0].hapticity, vec![2, 2]);
        assert_eq!(p.ligands[0].name, "syn-benzoquinone");
        assert_eq!(p.ligands[1].donor_set, vec!["o", "o'"]);
        assert_eq!(p.ligands[1].count, r(4));
        assert_eq!(p.metals[0].nuclearity, 4);
        assert_eq!(p.metals[0].oxidation_state, Some(1));
        assert_eq!(p.auxiliaries[0].kind, AuxiliaryKind::Solvate);
        assert_eq!(p.auxiliaries[0].name, "hydroquinone");
    }

    #[test]
    fn multiplier_collision_is_diagnosed() {
        let p = parse("catena-(bis(μ-chloro)-di-copper dimethylammonium)");
        assert_eq!(p.auxiliaries[0].name, "dimethylammonium");
        assert_eq!(p.auxiliaries[0].kind, AuxiliaryKind::CounterIon);
        let p = parse("catena-((μ-oxo)-dimethylsomething-copper)");
        assert!(p.diagnostics.iter().any(|d| d.message.contains("multiplier 'di'")));
    }

    #[test]
    fn unbalanced_brackets_do_not_panic() {
        for s in ["catena-((", ")))", "catena-[(μ-oxo]-zinc", "(((zinc"] {
            let p = parse(s);
            assert!(!p.diagnostics.is_empty(), "{s}");
        }
    }

    #[test]
    fn histogram_weights_by_count() {
        let p = parse("catena-(tris(μ₄-terephthalato)-(μ₄-oxo)-tetra-zinc)");
        let h = mu_histogram([&p]);
        assert_eq!(h.len(), 1);
        assert_eq!(h[&MuBin::Multiplicity(4)], r(4));
        assert!(mu_histogram(std::iter::empty()).is_empty());
        let plain = parse("catena-[bis(μ-iodo)-di-copper(i)]");
        assert_eq!(mu_histogram([&plain])[&MuBin::Unspecified], r(2));
    }
}
