//! CSV and JSON artifacts. Every file starts with `#` metadata lines
//! (`# key: value`) carrying at least the config hash and code version;
//! CSV bodies are comma-separated with a header row.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::CODE_VERSION;
use crate::contacts::{BiasPoint, ContactRates};
use crate::error::{Error, Result};
use crate::grids::Grids;
use crate::model::Occupations;
use crate::steady::SteadyState;

/// Ordered `key: value` header block.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(config_hash: &str) -> Self {
        Self {
            entries: vec![
                ("config_hash".into(), config_hash.into()),
                ("code_version".into(), CODE_VERSION.into()),
            ],
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Shortest representation that parses back to the same f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Format(format!("not a number: `{s}`")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Metadata,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing column `{name}`")))
    }

    /// Column as numbers; empty cells are skipped.
    pub fn numbers(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column(name)?;
        self.rows
            .iter()
            .filter(|r| !r[c].is_empty())
            .map(|r| parse_f64(&r[c]))
            .collect()
    }
}

pub fn write_table<S: AsRef<str>>(path: &Path, meta: &Metadata, header: &[S], rows: &[Vec<String>]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for (k, v) in &meta.entries {
        writeln!(out, "# {k}: {v}")?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header.iter().map(|h| h.as_ref()))?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut meta = Metadata::default();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        match line.strip_prefix('#') {
            Some(rest) => {
                if let Some((k, v)) = rest.split_once(':') {
                    meta.entries.push((k.trim().into(), v.trim().into()));
                }
            }
            None => break,
        }
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header = rdr.headers()?.iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok(Table { meta, header, rows })
}

/// `{"meta": {...}, "data": value}`, pretty printed.
pub fn write_json<T: Serialize>(path: &Path, meta: &Metadata, data: &T) -> Result<()> {
    let m: serde_json::Map<String, serde_json::Value> = meta
        .entries
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
        .collect();
    let doc = serde_json::json!({ "meta": m, "data": data });
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

pub const STATE_HEADER: [&str; 5] = ["family", "axis", "n1", "n2", "na"];

/// State dump: one `k` row per electron cell (axis = ε, meV) and one `q`
/// row per photon mode (axis = q, nm⁻¹).
pub fn write_state_csv(path: &Path, meta: &Metadata, state: &SteadyState, grids: &Grids) -> Result<()> {
    let occ = &state.occupations;
    let mut rows = Vec::with_capacity(grids.nk() + grids.nq());
    for (k, &e) in grids.eps.iter().enumerate() {
        rows.push(vec!["k".into(), fmt_f64(e), fmt_f64(occ.n1[k]), fmt_f64(occ.n2[k]), String::new()]);
    }
    for (q, &x) in grids.q.iter().enumerate() {
        rows.push(vec!["q".into(), fmt_f64(x), String::new(), String::new(), fmt_f64(occ.na[q])]);
    }
    let meta = meta
        .clone()
        .with("V", fmt_f64(state.bias.v))
        .with("eps_F", fmt_f64(state.eps_f))
        .with("nk", grids.nk())
        .with("nq", grids.nq());
    write_table(path, &meta, &STATE_HEADER, &rows)
}

/// Reads a state dump back: bias, occupations and the two axes.
pub fn read_state_csv(path: &Path) -> Result<(BiasPoint, Occupations, Vec<f64>, Vec<f64>)> {
    let t = read_table(path)?;
    if t.header != STATE_HEADER {
        return Err(Error::Format(format!("unexpected state header {:?}", t.header)));
    }
    let v = parse_f64(t.meta.get("V").ok_or_else(|| Error::Format("missing V metadata".into()))?)?;
    let mut occ = Occupations {
        n1: vec![],
        n2: vec![],
        na: vec![],
    };
    let (mut eps, mut q) = (vec![], vec![]);
    for r in &t.rows {
        match r[0].as_str() {
            "k" => {
                eps.push(parse_f64(&r[1])?);
                occ.n1.push(parse_f64(&r[2])?);
                occ.n2.push(parse_f64(&r[3])?);
            }
            "q" => {
                q.push(parse_f64(&r[1])?);
                occ.na.push(parse_f64(&r[4])?);
            }
            other => return Err(Error::Format(format!("unknown family `{other}`"))),
        }
    }
    Ok((BiasPoint::new(v), occ, eps, q))
}

pub const RATES_HEADER: [&str; 5] = ["eps_kin", "Gin1", "Gout1", "Gin2", "Gout2"];

pub fn write_rates_csv(path: &Path, meta: &Metadata, rates: &ContactRates, grids: &Grids) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..grids.nk())
        .map(|k| {
            [grids.eps[k], rates.gin1[k], rates.gout1[k], rates.gin2[k], rates.gout2[k]]
                .iter()
                .map(|&v| fmt_f64(v))
                .collect()
        })
        .collect();
    write_table(path, meta, &RATES_HEADER, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.0, -1.5e-300, 8.302e9, 1.0 / 3.0, f64::MAX, 5e-324] {
            assert_eq!(parse_f64(&fmt_f64(v)).unwrap().to_bits(), v.to_bits());
        }
        assert!(parse_f64(&fmt_f64(f64::NAN)).unwrap().is_nan());
    }

    #[test]
    fn table_round_trip_keeps_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let meta = Metadata::new("abc").with("V", 1.5);
        let rows = vec![vec!["1e0".to_string(), "x,y".into()], vec!["2e0".into(), "".into()]];
        write_table(&p, &meta, &["a", "b"], &rows).unwrap();
        let t = read_table(&p).unwrap();
        assert_eq!(t.meta, meta);
        assert_eq!(t.header, vec!["a", "b"]);
        assert_eq!(t.rows, rows);
        assert_eq!(t.numbers("a").unwrap(), vec![1.0, 2.0]);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# config_hash: abc\n# code_version: "));
    }
}
