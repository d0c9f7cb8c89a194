use std::collections::{BTreeMap, BTreeSet};

use mofname::predict::Regressor;
use mofname::screen::*;
use mofname::synthetic::synthetic_entries;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns coordinate `i` of the input, shifted.
struct Coord(usize, f64);

impl Regressor for Coord {
    fn dim(&self) -> usize {
        2
    }
    fn predict(&self, x: &[f64]) -> f64 {
        x[self.0] + self.1
    }
}

fn corpus(n: usize, seed: u64) -> Vec<ScreenInput> {
    synthetic_entries(n, seed)
        .into_iter()
        .enumerate()
        .map(|(i, e)| ScreenInput {
            refcode: e.refcode,
            name: e.name,
            // hse06 spans [-0.5, 3.5), pbe lower by 0.4
            vector: vec![-0.5 + 4.0 * ((i * 7919) % n) as f64 / n as f64, 0.0],
        })
        .collect()
}

#[test]
fn screening_contract_on_synthetic_corpus() {
    let items = corpus(1000, 1);
    let exclude: BTreeSet<String> = items.iter().step_by(3).map(|c| c.refcode.clone()).collect();
    let config = ScreenConfig { exclude_refcodes: exclude.clone(), ..Default::default() };
    let hse = Coord(0, 0.0);
    let pbe = Coord(0, -0.4);
    let rows = screen(&items, &hse, &pbe, &config).unwrap();

    // oracle: filter, clamp, cut, sort, truncate
    let mut expected: Vec<(f64, String)> = items
        .iter()
        .filter(|c| !exclude.contains(&c.refcode))
        .map(|c| (c.vector[0].max(0.0), c.refcode.clone()))
        .filter(|(h, _)| *h <= 1.5)
        .collect();
    expected.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    expected.truncate(50);

    assert_eq!(rows.len(), 50);
    for (row, (h, r)) in rows.iter().zip(&expected) {
        assert_eq!(&row.refcode, r);
        assert_eq!(row.predicted_hse06_ev, *h);
        assert!(row.predicted_pbe_ev >= 0.0);
        assert!(!exclude.contains(&row.refcode));
    }
    assert!(rows.windows(2).all(|w| w[0].predicted_hse06_ev <= w[1].predicted_hse06_ev));
}

#[test]
fn planted_rediscovery_rate() {
    let rows: Vec<ScreenRow> = (0..50)
        .map(|i| ScreenRow {
            refcode: format!("R{i:02}"),
            predicted_hse06_ev: i as f64 * 0.01,
            predicted_pbe_ev: 0.0,
            known_conductivity: None,
            name: String::new(),
        })
        .collect();
    let known: BTreeMap<String, Option<f64>> = (0..50).step_by(2).take(18).map(|i| (format!("R{i:02}"), Some(1e-3))).collect();
    assert_eq!(known.len(), 18);
    let r = rediscovery_rate(&rows, &known);
    assert_eq!((r.hits, r.total), (18, 50));
    assert_eq!(r.rate, 0.36);
}

#[test]
fn known_conductivity_is_joined() {
    let items = corpus(20, 2);
    let target = items.iter().find(|c| c.vector[0] <= 0.3).unwrap().refcode.clone();
    let config = ScreenConfig { known_conductors: BTreeMap::from([(target.clone(), Some(0.54))]), ..Default::default() };
    let rows = screen(&items, &Coord(0, 0.0), &Coord(0, 0.0), &config).unwrap();
    for r in &rows {
        assert_eq!(r.known_conductivity, (r.refcode == target).then_some(0.54));
    }
}

proptest! {
    #[test]
    fn permutation_invariant(seed in any::<u64>(), top_k in 1usize..40) {
        let mut items = corpus(120, 3);
        let config = ScreenConfig { top_k, ..Default::default() };
        let a = screen(&items, &Coord(0, 0.0), &Coord(0, 0.1), &config).unwrap();
        items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let b = screen(&items, &Coord(0, 0.0), &Coord(0, 0.1), &config).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rediscovery_monotone(known_bits in proptest::collection::vec(any::<bool>(), 30), extra in 0usize..30) {
        let rows: Vec<ScreenRow> = (0..30)
            .map(|i| ScreenRow { refcode: format!("R{i}"), predicted_hse06_ev: 0.0, predicted_pbe_ev: 0.0, known_conductivity: None, name: String::new() })
            .collect();
        let mut known: BTreeMap<String, ()> = known_bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| (format!("R{i}"), ())).collect();
        let before = rediscovery_rate(&rows, &known);
        known.insert(format!("R{extra}"), ());
        let after = rediscovery_rate(&rows, &known);
        prop_assert!((0.0..=1.0).contains(&before.rate));
        prop_assert!(after.rate >= before.rate);
    }
}
