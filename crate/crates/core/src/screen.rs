//! Ranking of unseen structures by predicted bandgap.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::predict::Regressor;

#[derive(Debug, Error)]
pub enum ScreenError {
    #[error("invalid screen config: {0}")]
    Config(String),
    #[error("{model} model expects dimension {expected}, '{refcode}' has {found}")]
    DimensionMismatch {
        model: &'static str,
        refcode: String,
        expected: usize,
        found: usize,
    },
    #[error("no structures left after exclusion")]
    EmptyAfterExclusion,
    #[error("known-conductor file, line {line}: {message}")]
    Conductors { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenConfig {
    pub hse06_cutoff_ev: f64,
    pub top_k: usize,
    pub exclude_refcodes: BTreeSet<String>,
    /// Refcode to reported conductivity in S/cm, when a value is known.
    pub known_conductors: BTreeMap<String, Option<f64>>,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        Self {
            hse06_cutoff_ev: 1.5,
            top_k: 50,
            exclude_refcodes: BTreeSet::new(),
            known_conductors: BTreeMap::new(),
        }
    }
}

impl ScreenConfig {
    pub fn validate(&self) -> Result<(), ScreenError> {
        if self.hse06_cutoff_ev.is_nan() || self.hse06_cutoff_ev <= 0.0 {
            return Err(ScreenError::Config("cutoff must be positive".into()));
        }
        if self.top_k == 0 {
            return Err(ScreenError::Config("top_k must be at least 1".into()));
        }
        Ok(())
    }
}

/// A structure to be screened.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenInput {
    pub refcode: String,
    pub name: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenRow {
    pub refcode: String,
    pub predicted_hse06_ev: f64,
    pub predicted_pbe_ev: f64,
    pub known_conductivity: Option<f64>,
    pub name: String,
}

/// Drops excluded refcodes, predicts both bandgaps (floored at 0), keeps rows
/// with HSE06 at or below the cutoff, sorts ascending by HSE06 then refcode,
/// and keeps the first `top_k`.
pub fn screen(
    corpus: &[ScreenInput],
    hse06: &dyn Regressor,
    pbe: &dyn Regressor,
    config: &ScreenConfig,
) -> Result<Vec<ScreenRow>, ScreenError> {
    config.validate()?;
    let remaining: Vec<&ScreenInput> = corpus
        .iter()
        .filter(|c| !config.exclude_refcodes.contains(&c.refcode))
        .collect();
    if remaining.is_empty() {
        return Err(ScreenError::EmptyAfterExclusion);
    }
    for (model, m) in [("hse06", hse06), ("pbe", pbe)] {
        if let Some(c) = remaining.iter().find(|c| c.vector.len() != m.dim()) {
            return Err(ScreenError::DimensionMismatch {
                model,
                refcode: c.refcode.clone(),
                expected: m.dim(),
                found: c.vector.len(),
            });
        }
    }
    let mut rows: Vec<ScreenRow> = remaining
        .par_iter()
        .filter_map(|c| {
            let h = hse06.predict(&c.vector).max(0.0);
            (h <= config.hse06_cutoff_ev).then(|| ScreenRow {
                refcode: c.refcode.clone(),
                predicted_hse06_ev: h,
                predicted_pbe_ev: pbe.predict(&c.vector).max(0.0),
                known_conductivity: config.known_conductors.get(&c.refcode).copied().flatten(),
                name: c.name.clone(),
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        a.predicted_hse06_ev
            .total_cmp(&b.predicted_hse06_ev)
            .then_with(|| a.refcode.cmp(&b.refcode))
    });
    rows.truncate(config.top_k);
    Ok(rows)
}

pub const REPORT_HEADER: [&str; 5] = [
    "refcode",
    "pred_hse06_ev",
    "pred_pbe_ev",
    "known_conductivity_s_per_cm",
    "name",
];

pub fn write_report(rows: &[ScreenRow], w: impl Write) -> Result<(), ScreenError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(REPORT_HEADER)?;
    for r in rows {
        out.write_record([
            r.refcode.clone(),
            r.predicted_hse06_ev.to_string(),
            r.predicted_pbe_ev.to_string(),
            r.known_conductivity.map(|c| c.to_string()).unwrap_or_default(),
            r.name.clone(),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads `refcode,conductivity` rows; a blank conductivity marks a known
/// conductor without a value.
pub fn read_known_conductors(r: impl Read) -> Result<BTreeMap<String, Option<f64>>, ScreenError> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["refcode", "conductivity"] {
        return Err(ScreenError::Conductors {
            line: 1,
            message: "header must be 'refcode,conductivity'".into(),
        });
    }
    let mut map = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let cell = row[1].trim();
        let value = if cell.is_empty() {
            None
        } else {
            Some(cell.parse::<f64>().map_err(|_| ScreenError::Conductors {
                line,
                message: format!("'{cell}' is not a number"),
            })?)
        };
        map.insert(row[0].to_string(), value);
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rediscovery {
    pub hits: usize,
    pub total: usize,
    pub rate: f64,
}

/// Fraction of `rows` whose refcode is a known conductor; 0 for no rows.
pub fn rediscovery_rate<V>(rows: &[ScreenRow], known: &BTreeMap<String, V>) -> Rediscovery {
    let hits = rows.iter().filter(|r| known.contains_key(&r.refcode)).count();
    let total = rows.len();
    Rediscovery {
        hits,
        total,
        rate: if total == 0 { 0.0 } else { hits as f64 / total as f64 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Predicts the first coordinate.
    struct First(usize);

    impl Regressor for First {
        fn dim(&self) -> usize {
            self.0
        }
        fn predict(&self, x: &[f64]) -> f64 {
            x[0]
        }
    }

    fn input(refcode: &str, v: f64) -> ScreenInput {
        ScreenInput { refcode: refcode.into(), name: format!("name of {refcode}"), vector: vec![v] }
    }

    #[test]
    fn cutoff_and_order() {
        let corpus = [input("A", 1.0), input("B", 2.0), input("C", 0.5)];
        let rows = screen(&corpus, &First(1), &First(1), &ScreenConfig::default()).unwrap();
        let got: Vec<f64> = rows.iter().map(|r| r.predicted_hse06_ev).collect();
        assert_eq!(got, vec![0.5, 1.0]);
    }

    #[test]
    fn exclusion_and_errors() {
        let corpus = [input("A", 0.1), input("B", 0.2)];
        let config = ScreenConfig { exclude_refcodes: ["A".to_string()].into(), ..Default::default() };
        let rows = screen(&corpus, &First(1), &First(1), &config).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].refcode, "B");
        let all = ScreenConfig { exclude_refcodes: ["A".to_string(), "B".to_string()].into(), ..Default::default() };
        assert!(matches!(screen(&corpus, &First(1), &First(1), &all), Err(ScreenError::EmptyAfterExclusion)));
        assert!(matches!(
            screen(&corpus, &First(2), &First(1), &ScreenConfig::default()),
            Err(ScreenError::DimensionMismatch { model: "hse06", .. })
        ));
    }

    #[test]
    fn negative_predictions_clamp() {
        let rows = screen(&[input("A", -0.4)], &First(1), &First(1), &ScreenConfig::default()).unwrap();
        assert_eq!(rows[0].predicted_hse06_ev, 0.0);
        assert_eq!(rows[0].predicted_pbe_ev, 0.0);
    }

    #[test]
    fn report_csv() {
        let rows = vec![
            ScreenRow { refcode: "A".into(), predicted_hse06_ev: 0.5, predicted_pbe_ev: 0.0, known_conductivity: Some(2e-3), name: "x, y".into() },
            ScreenRow { refcode: "B".into(), predicted_hse06_ev: 1.0, predicted_pbe_ev: 0.25, known_conductivity: None, name: "z".into() },
        ];
        let mut buf = Vec::new();
        write_report(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "refcode,pred_hse06_ev,pred_pbe_ev,known_conductivity_s_per_cm,name\nA,0.5,0,0.002,\"x, y\"\nB,1,0.25,,z\n"
        );
    }

    #[test]
    fn conductors_file() {
        let map = read_known_conductors("refcode,conductivity\nA,0.1\nB,\n".as_bytes()).unwrap();
        assert_eq!(map.get("A"), Some(&Some(0.1)));
        assert_eq!(map.get("B"), Some(&None));
        assert!(read_known_conductors("id,c\n".as_bytes()).is_err());
    }

    #[test]
    fn rediscovery() {
        let rows: Vec<ScreenRow> = (0..4)
            .map(|i| ScreenRow { refcode: format!("R{i}"), predicted_hse06_ev: 0.0, predicted_pbe_ev: 0.0, known_conductivity: None, name: String::new() })
            .collect();
        let none: BTreeMap<String, ()> = BTreeMap::new();
        assert_eq!(rediscovery_rate(&rows, &none).rate, 0.0);
        let all: BTreeMap<String, ()> = rows.iter().map(|r| (r.refcode.clone(), ())).collect();
        assert_eq!(rediscovery_rate(&rows, &all), Rediscovery { hits: 4, total: 4, rate: 1.0 });
        assert_eq!(rediscovery_rate(&[], &all).rate, 0.0);
    }
}
