//! Generator for catena-style names with known composition, used by tests,
//! benchmarks and demos. Nothing here resembles real structures beyond the
//! naming grammar.

use crate::corpus::CorpusRecord;
use crate::rng::SplitMix64;

pub const METALS: [&str; 10] = [
    "copper", "zinc", "cobalt", "nickel", "manganese", "iron", "cadmium", "silver", "lead", "magnesium",
];

pub const LIGANDS: [&str; 12] = [
    "terephthalato",
    "benzene-1,3,5-tricarboxylato",
    "isonicotinato",
    "oxalato",
    "formato",
    "pyrazine",
    "acetato",
    "imidazolato",
    "2-methylimidazolato",
    "succinato",
    "fumarato",
    "squarato",
];

const AUX_LIGANDS: [&str; 4] = ["oxo", "hydroxo", "chloro", "aqua"];
const SOLVENTS: [&str; 3] = ["n,n-dimethylformamide", "methanol", "ethanol"];
const MULTIPLIERS: [(&str, &str); 4] = [("", ""), ("bis", "di"), ("tris", "tri"), ("tetrakis", "tetra")];
const ROMAN: [&str; 3] = ["i", "ii", "iii"];

/// One generated name and the choices that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticEntry {
    pub refcode: String,
    pub name: String,
    /// Index into [`METALS`].
    pub metal: usize,
    /// Index into [`LIGANDS`].
    pub ligand: usize,
    pub bridge: u8,
    pub ligand_count: u8,
    pub nuclearity: u8,
    pub oxidation_state: u8,
    pub auxiliary: Option<usize>,
    pub solvent: Option<usize>,
}

impl SyntheticEntry {
    pub fn to_record(&self) -> CorpusRecord {
        CorpusRecord::new(&self.refcode, &self.name)
    }
}

fn pick<'a, T>(rng: &mut SplitMix64, items: &'a [T]) -> (usize, &'a T) {
    let i = rng.below(items.len());
    (i, &items[i])
}

/// `n` names drawn independently and uniformly over the component tables.
pub fn synthetic_entries(n: usize, seed: u64) -> Vec<SyntheticEntry> {
    let mut rng = SplitMix64::new(seed);
    (0..n)
        .map(|i| {
            let (metal, metal_name) = pick(&mut rng, &METALS);
            let (ligand, ligand_name) = pick(&mut rng, &LIGANDS);
            let bridge = 2 + rng.below(5) as u8;
            let ligand_count = 1 + rng.below(4) as u8;
            let nuclearity = 1 + rng.below(4) as u8;
            let oxidation_state = 1 + rng.below(3) as u8;
            let auxiliary = (rng.below(2) == 0).then(|| rng.below(AUX_LIGANDS.len()));
            let solvent = (rng.below(3) == 0).then(|| rng.below(SOLVENTS.len()));

            let mut name = String::from("catena-(");
            name.push_str(MULTIPLIERS[ligand_count as usize - 1].0);
            name.push_str(&format!("(mu{bridge}-{ligand_name})"));
            if let Some(a) = auxiliary {
                name.push_str(&format!("-(mu{bridge}-{})", AUX_LIGANDS[a]));
            }
            name.push('-');
            if nuclearity > 1 {
                name.push_str(MULTIPLIERS[nuclearity as usize - 1].1);
                name.push('-');
            }
            name.push_str(metal_name);
            name.push_str(&format!("({})", ROMAN[oxidation_state as usize - 1]));
            name.push(')');
            if let Some(s) = solvent {
                name.push_str(&format!(" {} solvate", SOLVENTS[s]));
            }
            SyntheticEntry {
                refcode: format!("SYN{i:05}"),
                name,
                metal,
                ligand,
                bridge,
                ligand_count,
                nuclearity,
                oxidation_state,
                auxiliary,
                solvent,
            }
        })
        .collect()
}

/// Records with a smooth composition-dependent pair of bandgap labels.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<CorpusRecord> {
    synthetic_entries(n, seed)
        .into_iter()
        .map(|e| {
            let hse = 0.3 * e.metal as f64 + 0.15 * e.ligand as f64 + 0.05 * f64::from(e.bridge);
            e.to_record()
                .with_property("bandgap_hse06_ev", hse)
                .with_property("bandgap_pbe_ev", 0.7 * hse)
        })
        .collect()
}
