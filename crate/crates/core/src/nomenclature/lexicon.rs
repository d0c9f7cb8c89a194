//! Word tables used by the tokenizer and parser.

use num_rational::Ratio;

use super::NomenclatureError;

/// Rational count carried by multiplier prefixes ("hemi" is 1/2).
pub type Count = Ratio<u32>;

/// English element names of every metal and metalloid, with their symbols.
/// Spelling variants map to the same symbol.
const METALS: &[(&str, &str)] = &[
    ("lithium", "Li"),
    ("beryllium", "Be"),
    ("boron", "B"),
    ("sodium", "Na"),
    ("magnesium", "Mg"),
    ("aluminium", "Al"),
    ("aluminum", "Al"),
    ("silicon", "Si"),
    ("potassium", "K"),
    ("calcium", "Ca"),
    ("scandium", "Sc"),
    ("titanium", "Ti"),
    ("vanadium", "V"),
    ("chromium", "Cr"),
    ("manganese", "Mn"),
    ("iron", "Fe"),
    ("cobalt", "Co"),
    ("nickel", "Ni"),
    ("copper", "Cu"),
    ("zinc", "Zn"),
    ("gallium", "Ga"),
    ("germanium", "Ge"),
    ("arsenic", "As"),
    ("rubidium", "Rb"),
    ("strontium", "Sr"),
    ("yttrium", "Y"),
    ("zirconium", "Zr"),
    ("niobium", "Nb"),
    ("molybdenum", "Mo"),
    ("technetium", "Tc"),
    ("ruthenium", "Ru"),
    ("rhodium", "Rh"),
    ("palladium", "Pd"),
    ("silver", "Ag"),
    ("cadmium", "Cd"),
    ("indium", "In"),
    ("tin", "Sn"),
    ("antimony", "Sb"),
    ("tellurium", "Te"),
    ("caesium", "Cs"),
    ("cesium", "Cs"),
    ("barium", "Ba"),
    ("lanthanum", "La"),
    ("cerium", "Ce"),
    ("praseodymium", "Pr"),
    ("neodymium", "Nd"),
    ("promethium", "Pm"),
    ("samarium", "Sm"),
    ("europium", "Eu"),
    ("gadolinium", "Gd"),
    ("terbium", "Tb"),
    ("dysprosium", "Dy"),
    ("holmium", "Ho"),
    ("erbium", "Er"),
    ("thulium", "Tm"),
    ("ytterbium", "Yb"),
    ("lutetium", "Lu"),
    ("hafnium", "Hf"),
    ("tantalum", "Ta"),
    ("tungsten", "W"),
    ("rhenium", "Re"),
    ("osmium", "Os"),
    ("iridium", "Ir"),
    ("platinum", "Pt"),
    ("gold", "Au"),
    ("mercury", "Hg"),
    ("thallium", "Tl"),
    ("lead", "Pb"),
    ("bismuth", "Bi"),
    ("polonium", "Po"),
    ("astatine", "At"),
    ("francium", "Fr"),
    ("radium", "Ra"),
    ("actinium", "Ac"),
    ("thorium", "Th"),
    ("protactinium", "Pa"),
    ("uranium", "U"),
    ("neptunium", "Np"),
    ("plutonium", "Pu"),
    ("americium", "Am"),
    ("curium", "Cm"),
    ("berkelium", "Bk"),
    ("californium", "Cf"),
    ("einsteinium", "Es"),
    ("fermium", "Fm"),
    ("mendelevium", "Md"),
    ("nobelium", "No"),
    ("lawrencium", "Lr"),
];

/// Multiplicative prefixes, both the simple ("di") and the bracketed ("bis") series.
const MULTIPLIERS: &[(&str, u32, u32)] = &[
    ("mono", 1, 1),
    ("di", 2, 1),
    ("bis", 2, 1),
    ("tri", 3, 1),
    ("tris", 3, 1),
    ("tetra", 4, 1),
    ("tetrakis", 4, 1),
    ("penta", 5, 1),
    ("pentakis", 5, 1),
    ("hexa", 6, 1),
    ("hexakis", 6, 1),
    ("hepta", 7, 1),
    ("heptakis", 7, 1),
    ("octa", 8, 1),
    ("octakis", 8, 1),
    ("nona", 9, 1),
    ("deca", 10, 1),
    ("undeca", 11, 1),
    ("dodeca", 12, 1),
    ("hemi", 1, 2),
];

const ROMAN: &[(&str, u8)] = &[
    ("i", 1),
    ("ii", 2),
    ("iii", 3),
    ("iv", 4),
    ("v", 5),
    ("vi", 6),
    ("vii", 7),
    ("viii", 8),
];

const CHARGE_WORDS: &[&str] = &[
    "radical",
    "anion",
    "cation",
    "monoanion",
    "dianion",
    "trianion",
    "tetraanion",
    "dication",
    "trication",
    "zwitterion",
];

/// Element symbols that show up as donor-atom labels after a ligand stem.
const DONOR_ATOMS: &[&str] = &[
    "n", "o", "s", "p", "c", "se", "te", "as", "f", "cl", "br", "i",
];

pub(crate) const STEREO_WORDS: &[&str] = &["syn", "anti", "cis", "trans"];

/// Small ligands that are routinely written with a fused multiplier ("diaqua").
const SIMPLE_LIGANDS: &[&str] = &[
    "aqua",
    "ammine",
    "cyano",
    "chloro",
    "bromo",
    "iodo",
    "fluoro",
    "oxo",
    "hydroxo",
    "hydroxy",
    "nitrato",
    "nitrito",
    "azido",
    "thiocyanato",
    "isothiocyanato",
    "carbonyl",
    "methanol",
    "ethanol",
    "formato",
    "acetato",
    "sulfato",
    "pyridine",
];

/// Anions and cations that appear as free counter-ions after the framework.
const COUNTER_IONS: &[&str] = &[
    "perchlorate",
    "nitrate",
    "chloride",
    "bromide",
    "iodide",
    "fluoride",
    "sulfate",
    "tetrafluoroborate",
    "hexafluorophosphate",
    "hexafluoroantimonate",
    "triflate",
    "trifluoromethanesulfonate",
    "hydroxide",
    "acetate",
    "formate",
    "cyanide",
    "thiocyanate",
];

pub fn metal_symbol(word: &str) -> Option<&'static str> {
    METALS.iter().find(|(n, _)| *n == word).map(|(_, s)| *s)
}

/// Splits `word` into an optional multiplier prefix and a metal name,
/// e.g. "dicopper" -> (Some(2), "Cu").
pub fn fused_metal(word: &str) -> Option<(Option<Count>, &'static str)> {
    if let Some(sym) = metal_symbol(word) {
        return Some((None, sym));
    }
    MULTIPLIERS.iter().find_map(|(p, n, d)| {
        let rest = word.strip_prefix(p)?;
        let rest = rest.strip_prefix('-').unwrap_or(rest);
        metal_symbol(rest).map(|s| (Some(Ratio::new(*n, *d)), s))
    })
}

pub fn is_metal_symbol(symbol: &str) -> bool {
    METALS.iter().any(|(_, s)| *s == symbol)
}

pub fn is_multiplier(word: &str) -> bool {
    MULTIPLIERS.iter().any(|(p, _, _)| *p == word)
}

/// Value of a multiplicative prefix ("tris" -> 3, "hemi" -> 1/2).
pub fn multiplier_value(prefix: &str) -> Result<Count, NomenclatureError> {
    MULTIPLIERS
        .iter()
        .find(|(p, _, _)| *p == prefix)
        .map(|(_, n, d)| Ratio::new(*n, *d))
        .ok_or_else(|| NomenclatureError::UnknownPrefix(prefix.to_string()))
}

/// Value of a lowercase roman numeral between i and viii.
pub fn roman_value(numeral: &str) -> Result<u8, NomenclatureError> {
    ROMAN
        .iter()
        .find(|(r, _)| *r == numeral)
        .map(|(_, v)| *v)
        .ok_or_else(|| NomenclatureError::BadNumeral(numeral.to_string()))
}

pub fn is_roman(word: &str) -> bool {
    ROMAN.iter().any(|(r, _)| *r == word)
}

pub fn is_charge_word(word: &str) -> bool {
    CHARGE_WORDS.contains(&word)
}

pub fn is_stereo_word(word: &str) -> bool {
    STEREO_WORDS.contains(&word)
}

pub fn is_donor_label(label: &str) -> bool {
    let stem = label.trim_end_matches('\'');
    !stem.is_empty() && DONOR_ATOMS.contains(&stem)
}

/// Hydrate markers with their water count: "hydrate" -> 1, "hemihydrate" -> 1/2.
pub fn hydrate_count(word: &str) -> Option<Count> {
    let prefix = word.strip_suffix("hydrate")?;
    if prefix.is_empty() {
        return Some(Ratio::from_integer(1));
    }
    multiplier_value(prefix).ok()
}

pub fn is_solvate_word(word: &str) -> bool {
    matches!(word, "solvate" | "clathrate") || hydrate_count(word).is_some()
}

/// Splits a fused multiplier off a known simple ligand ("diaqua" -> (2, "aqua")).
pub fn fused_simple_ligand(word: &str) -> Option<(Count, &'static str)> {
    MULTIPLIERS.iter().find_map(|(p, n, d)| {
        let rest = word.strip_prefix(p)?;
        SIMPLE_LIGANDS
            .iter()
            .find(|l| **l == rest)
            .map(|l| (Ratio::new(*n, *d), *l))
    })
}

/// Returns the multiplier a stem starts with, if any ("dimethylammonium" -> "di").
pub fn leading_multiplier(word: &str) -> Option<&'static str> {
    MULTIPLIERS
        .iter()
        .filter(|(p, _, _)| word.len() > p.len() && word.starts_with(p))
        .max_by_key(|(p, _, _)| p.len())
        .map(|(p, _, _)| *p)
}

pub fn is_counter_ion(text: &str) -> bool {
    COUNTER_IONS.contains(&text) || text.ends_with("ium")
}
