use std::collections::BTreeSet;

use mofname::nomenclature::*;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r(n: u32) -> Count {
    Ratio::from_integer(n)
}

fn metal(p: &ParsedName, symbol: &str) -> MetalDescriptor {
    p.metals
        .iter()
        .find(|m| m.element == symbol)
        .unwrap_or_else(|| panic!("no {symbol} in {:?}", p.metals))
        .clone()
}

const IRMOF1: &str = "catena-(tris(μ₄-Terephthalato)-(μ₄-oxo)-tetra-zinc)";

const DIOXIDO_FRAMEWORKS: [(&str, &str, u32, Option<u8>); 6] = [
    ("(μ -2,5-dioxidoterephthalato)-cobalt(ii)", "Co", 1, Some(2)),
    ("(μ -2,5-dioxidoterephthalato)-di-nickel(ii)", "Ni", 2, Some(2)),
    ("(μ -2,5-dioxido-1,4-benzenedicarboxylato)-di-manganese(ii)", "Mn", 2, Some(2)),
    ("(μ -2,5-dioxido-1,4-benzenedicarboxylato)-di-iron", "Fe", 2, None),
    ("(μ -4,6-dioxyidoisophthalato)-di-cobalt", "Co", 2, None),
    ("(μ -4,6-dioxyidoisophthalato)-di-nickel", "Ni", 2, None),
];

const GEFKAG: &str = "catena-[tris((bis(η^5 -cyclopentadienyl)-cobalt(iii)) dimethylammonium) tris(μ -3,6-dichlorobenzene-1,2,4,5-tetrolato trianion radical)-di-iron(iii) N,N-dimethylformamide solvate]";
const ESOSUB: &str = "catena-[(μ_5 -7,7,8,8-tetracyanoquinodimethane radical anion-N,N,N',N',N'')-thallium(i)]";
const ESOSOV: &str = "catena-[(μ_4 -7,7,8,8-tetracyanoquinodimethane radical anion-N,N,N',N')-thallium(i)]";

#[test]
fn irmof1_parse() {
    let p = parse(IRMOF1);
    assert!(p.catena);
    assert_eq!(p.ligands.len(), 2);
    assert_eq!((p.ligands[0].name.as_str(), p.ligands[0].bridge_multiplicity, p.ligands[0].count), ("terephthalato", Some(4), r(3)));
    assert_eq!((p.ligands[1].name.as_str(), p.ligands[1].bridge_multiplicity, p.ligands[1].count), ("oxo", Some(4), r(1)));
    assert_eq!(p.metals, vec![MetalDescriptor { element: "Zn".into(), nuclearity: 4, oxidation_state: None }]);
    assert!(p.auxiliaries.is_empty() && p.opaque_fragments.is_empty());
    assert_eq!(mu_histogram([&p]), [(MuBin::Multiplicity(4), r(4))].into());
}

#[test]
fn dioxido_framework_metals() {
    for (name, symbol, nuclearity, ox) in DIOXIDO_FRAMEWORKS {
        for full in [name.to_string(), format!("catena-{name}")] {
            let p = parse(&full);
            assert_eq!(p.metal_elements(), vec![symbol], "{full}");
            assert_eq!(p.metals[0].nuclearity, nuclearity, "{full}");
            assert_eq!(p.metals[0].oxidation_state, ox, "{full}");
            assert_eq!(p.ligands.len(), 1, "{full}");
            assert!(p.ligands[0].bridging);
            assert_eq!(p.ligands[0].bridge_multiplicity, None, "plain mu is unspecified");
        }
    }
}

#[test]
fn gefkag_parse() {
    let p = parse(GEFKAG);
    assert!(p.catena);
    let co = metal(&p, "Co");
    assert_eq!(co.oxidation_state, Some(3));
    assert_eq!(metal(&p, "Fe"), MetalDescriptor { element: "Fe".into(), nuclearity: 2, oxidation_state: Some(3) });
    let radical = p
        .ligands
        .iter()
        .find(|l| l.charge_annotation.as_deref() == Some("trianion radical"))
        .expect("trianion radical ligand");
    assert_eq!(radical.name, "3,6-dichlorobenzene-1,2,4,5-tetrolato");
    assert!(radical.bridging);
    assert_eq!(radical.bridge_multiplicity, None);
    assert_eq!(radical.count, r(3));
    let cp = p.ligands.iter().find(|l| l.name == "cyclopentadienyl").unwrap();
    assert_eq!(cp.hapticity, vec![5]);
    assert!(p
        .auxiliaries
        .iter()
        .any(|a| a.kind == AuxiliaryKind::Solvate && a.name == "n,n-dimethylformamide"));
}

#[test]
fn tcnq_polymorphs() {
    let sub = parse(ESOSUB);
    let sov = parse(ESOSOV);
    for (p, mu, donors) in [(&sub, 5, 5), (&sov, 4, 4)] {
        assert_eq!(p.ligands.len(), 1);
        let l = &p.ligands[0];
        assert_eq!(l.name, "7,7,8,8-tetracyanoquinodimethane");
        assert_eq!(l.bridge_multiplicity, Some(mu));
        assert_eq!(l.donor_set.len(), donors);
        assert_eq!(l.charge_annotation.as_deref(), Some("radical anion"));
        assert_eq!(p.metals, vec![MetalDescriptor { element: "Tl".into(), nuclearity: 1, oxidation_state: Some(1) }]);
    }
    assert_eq!(sub.ligands[0].donor_set, ["n", "n", "n'", "n'", "n''"]);
    assert_eq!(
        mu_histogram([&sub, &sov]),
        [(MuBin::Multiplicity(4), r(1)), (MuBin::Multiplicity(5), r(1))].into()
    );
}

#[test]
fn prefix_table_is_exact() {
    let table: [(&[&str], Count); 13] = [
        (&["mono"], r(1)),
        (&["di", "bis"], r(2)),
        (&["tri", "tris"], r(3)),
        (&["tetra", "tetrakis"], r(4)),
        (&["penta", "pentakis"], r(5)),
        (&["hexa", "hexakis"], r(6)),
        (&["hepta", "heptakis"], r(7)),
        (&["octa", "octakis"], r(8)),
        (&["nona"], r(9)),
        (&["deca"], r(10)),
        (&["undeca"], r(11)),
        (&["dodeca"], r(12)),
        (&["hemi"], Ratio::new(1, 2)),
    ];
    for (spellings, value) in table {
        for s in spellings {
            assert_eq!(multiplier_value(s).unwrap(), value, "{s}");
        }
    }
    for bad in ["", "quadra", "tetrak", "x"] {
        assert!(matches!(multiplier_value(bad), Err(NomenclatureError::UnknownPrefix(_))), "{bad}");
    }
}

#[test]
fn roman_table_is_exact() {
    let table = ["i", "ii", "iii", "iv", "v", "vi", "vii", "viii"];
    for (i, numeral) in table.iter().enumerate() {
        assert_eq!(roman_value(numeral).unwrap(), i as u8 + 1);
    }
    for bad in ["", "iiii", "ix", "vv", "iv2", "x"] {
        assert!(matches!(roman_value(bad), Err(NomenclatureError::BadNumeral(_))), "{bad}");
    }
}

#[test]
fn mask_examples() {
    let metal = BTreeSet::from([MaskClass::MetalTerms]);
    assert_eq!(mask(IRMOF1, &metal), "catena-(tris(mu4-terephthalato)-(mu4-oxo)-[MASK]-[MASK])");
    let mu = BTreeSet::from([MaskClass::MuIndicators]);
    assert_eq!(mask("catena-(mu4-oxo)", &mu), "catena-([MASK]-oxo)");
    assert_eq!(mask(GEFKAG, &BTreeSet::new()), normalize(GEFKAG));
}

#[test]
fn mask_oracle_on_irmof1() {
    // independent expectation: class of each token in the IRMOF-1 name
    let toks = tokenize(IRMOF1);
    let classes = token_classes(IRMOF1);
    for (t, c) in toks.iter().zip(&classes) {
        let expected = match t.text.as_str() {
            "catena" => Some(MaskClass::StructuralModifiers),
            "mu4" => Some(MaskClass::MuIndicators),
            "terephthalato" | "oxo" => Some(MaskClass::LigandTerms),
            "tetra" | "zinc" => Some(MaskClass::MetalTerms),
            _ => None,
        };
        assert_eq!(*c, expected, "{}", t.text);
    }
}

// ---- fuzzing ----

const PIECES: &[&str] = &[
    "catena-", "(", ")", "[", "]", "{", "}", "-", " ", ",", "μ₂-", "μ-", "mu3-", "η^5 -", "eta2,", "bis", "tris",
    "tetrakis", "di-", "tetra-", "hemi", "copper", "zinc", "dicopper", "cobalt(ii)", "iron(iii)", "thallium(i)",
    "terephthalato", "oxo", "aqua", "cyano", "2,5-dioxidoterephthalato", "radical", "anion", "trianion", "-n,n'",
    "-o,o',o''", "solvate", "hydrate", "dihydrate", "hemihydrate", "perchlorate", "dimethylammonium", "syn-", "cis",
    "n,n-dimethylformamide", "water", "4,4'-bipyridine", "'", "′", "_", "^", "x", "1", "iv", "(iv)", "\u{2014}",
];

fn fuzz_names(count: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(0..25);
            (0..len).map(|_| PIECES[rng.gen_range(0..PIECES.len())]).collect()
        })
        .collect()
}

fn check_partition(p: &ParsedName) {
    let mut seen = BTreeSet::new();
    for f in &p.fragments {
        assert!(f.span.0 <= f.span.1 && f.span.1 <= p.normalized.len(), "{:?}", f);
        let key = match f.role {
            FragmentRole::Ligand(i) => {
                assert!(i < p.ligands.len());
                (0, i)
            }
            FragmentRole::Metal(i) => {
                assert!(i < p.metals.len());
                (1, i)
            }
            FragmentRole::Auxiliary(i) => {
                assert!(i < p.auxiliaries.len());
                (2, i)
            }
            FragmentRole::Opaque(i) => {
                assert!(i < p.opaque_fragments.len());
                (3, i)
            }
        };
        assert!(seen.insert(key), "fragment assigned twice: {key:?}");
    }
    let total = p.ligands.len() + p.metals.len() + p.auxiliaries.len() + p.opaque_fragments.len();
    assert_eq!(seen.len(), total, "every output item comes from exactly one fragment");
}

#[test]
fn fuzzed_names_parse_and_mask_consistently() {
    let all: Vec<BTreeSet<MaskClass>> = (0..16u8)
        .map(|bits| MaskClass::ALL.iter().enumerate().filter(|(i, _)| bits & (1 << i) != 0).map(|(_, c)| *c).collect())
        .collect();
    for name in fuzz_names(1000, 2024) {
        let p = parse(&name);
        check_partition(&p);
        assert_eq!(p.catena, normalize(&name).starts_with("catena"));
        for l in &p.ligands {
            assert!(l.count > r(0));
            assert!(l.bridge_multiplicity.is_none_or(|m| m >= 2));
            assert!(l.hapticity.iter().all(|h| *h >= 1));
        }
        for m in &p.metals {
            assert!(is_metal_symbol(&m.element));
            assert!(m.nuclearity >= 1);
            assert!(m.oxidation_state.is_none_or(|o| (1..=8).contains(&o)));
        }

        let n_tokens = tokenize(&name).len();
        assert_eq!(mask(&name, &BTreeSet::new()), normalize(&name));
        for a in &all {
            let fa = mask_flags(&name, a);
            assert_eq!(fa.len(), n_tokens);
            for b in &all {
                let union: BTreeSet<MaskClass> = a.union(b).copied().collect();
                let fb = mask_flags(&name, b);
                let fu = mask_flags(&name, &union);
                let or: Vec<bool> = fa.iter().zip(&fb).map(|(x, y)| *x || *y).collect();
                assert_eq!(fu, or, "{name}");
            }
        }
    }
}

proptest! {
    #[test]
    fn token_spans_round_trip(name in "[a-zA-Z0-9μη₄⁵ ,'′()\\[\\]-]{0,60}") {
        let norm = normalize(&name);
        let toks = tokenize(&name);
        let mut last_end = 0;
        for t in &toks {
            prop_assert!(t.span.0 >= last_end);
            prop_assert_eq!(&norm[t.span.0..t.span.1], t.text.as_str());
            prop_assert_eq!(normalize(&t.text), t.text.clone());
            prop_assert!(norm[last_end..t.span.0].chars().all(|c| c == ' '));
            last_end = t.span.1;
        }
        prop_assert!(norm[last_end..].chars().all(|c| c == ' '));
    }

    #[test]
    fn parse_is_total(name in "\\PC{0,80}") {
        let p = parse(&name);
        check_partition(&p);
    }
}
