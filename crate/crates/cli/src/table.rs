//! GW table files.
//!
//! ```text
//! gwflop-gw-table v1
//! lattice X
//! multiple-cover yes
//! provenance flop-invariance      # one line per transformation, innermost first
//! 0 3 0,1 H,H,pt 5/2              # genus, points, class, labels (`-` for none), value
//! ```

use std::fmt::Write as _;

use anyhow::Context;
use gwflop::rational::to_pq;
use gwflop::transform::{GwKey, GwTable};
use gwflop::{CurveClass, Rational};

use crate::geometry::Geometry;
use crate::text::{arity, body, coords, fail, int, labels, rational, show_coords, show_labels, ParseError};

pub const HEADER: &str = "gwflop-gw-table v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub genus: u32,
    pub beta: Vec<i64>,
    pub labels: Vec<String>,
    pub value: Rational,
}

/// A table file before its classes are checked against a lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableFile {
    pub lattice: String,
    pub multiple_cover: bool,
    pub provenance: Vec<String>,
    pub records: Vec<Record>,
}

impl TableFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let lines = body(text, HEADER)?;
        let mut lattice = None;
        let mut multiple_cover = false;
        let mut provenance = Vec::new();
        let mut records = Vec::new();
        for (l, w) in &lines {
            match w[0] {
                "lattice" => {
                    arity(*l, w, 2)?;
                    lattice = Some(w[1].to_string());
                }
                "multiple-cover" => {
                    arity(*l, w, 2)?;
                    multiple_cover = match w[1] {
                        "yes" => true,
                        "no" => false,
                        other => return fail(*l, format!("expected yes or no, found `{other}`")),
                    };
                }
                "provenance" => {
                    arity(*l, w, 2)?;
                    provenance.push(w[1].to_string());
                }
                _ => {
                    arity(*l, w, 5).or_else(|_| fail(*l, "records read `genus points class labels value`"))?;
                    let labels = labels(w[3]);
                    let points: usize = int(*l, w[1])?;
                    if points != labels.len() {
                        return fail(*l, format!("{points} points but {} labels", labels.len()));
                    }
                    records.push(Record {
                        genus: int(*l, w[0])?,
                        beta: coords(*l, w[2])?,
                        labels,
                        value: rational(*l, w[4])?,
                    });
                }
            }
        }
        let lattice = lattice.ok_or_else(|| ParseError { line: 1, message: "missing `lattice` line".into() })?;
        Ok(TableFile { lattice, multiple_cover, provenance, records })
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{HEADER}\nlattice {}", self.lattice);
        let _ = writeln!(s, "multiple-cover {}", if self.multiple_cover { "yes" } else { "no" });
        for p in &self.provenance {
            let _ = writeln!(s, "provenance {p}");
        }
        for r in &self.records {
            let _ = writeln!(
                s,
                "{} {} {} {} {}",
                r.genus,
                r.labels.len(),
                show_coords(&r.beta),
                show_labels(&r.labels),
                to_pq(&r.value)
            );
        }
        s
    }

    pub fn from_table(table: &GwTable) -> Self {
        TableFile {
            lattice: table.lattice().name().to_string(),
            multiple_cover: table.multiple_cover,
            provenance: table.provenance.clone(),
            records: table
                .entries()
                .iter()
                .map(|(k, v)| Record {
                    genus: k.genus,
                    beta: k.beta.coords().to_vec(),
                    labels: k.labels().to_vec(),
                    value: v.clone(),
                })
                .collect(),
        }
    }

    pub fn into_table(self, geometry: &Geometry) -> anyhow::Result<GwTable> {
        let mut table = GwTable::new(geometry.lattice(&self.lattice)?.clone());
        table.multiple_cover = self.multiple_cover;
        table.provenance = self.provenance;
        for r in self.records {
            let key = GwKey::new(r.genus, CurveClass::new(r.beta.clone()), r.labels);
            table.insert(key, r.value).with_context(|| format!("record at class {}", show_coords(&r.beta)))?;
        }
        Ok(table)
    }
}

pub fn write_table(table: &GwTable) -> String {
    TableFile::from_table(table).serialize()
}

pub fn read_table(text: &str, geometry: &Geometry) -> anyhow::Result<GwTable> {
    TableFile::parse(text)?.into_table(geometry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_lines() {
        let text =
            "gwflop-gw-table v1\nlattice X\nmultiple-cover yes\nprovenance a\n0 0 1,0 - 1/1\n1 2 0,2 H,pt -3/4\n";
        let file = TableFile::parse(text).unwrap();
        assert_eq!(file.records.len(), 2);
        assert_eq!(file.records[1].labels, vec!["H".to_string(), "pt".to_string()]);
        assert_eq!(file.serialize(), text);
    }

    #[test]
    fn malformed_records() {
        let base = "gwflop-gw-table v1\nlattice X\n";
        for (record, line) in [("0 1 1,0 - 1/1", 3), ("0 0 1,x - 1", 3), ("0 0 1,0 -", 3), ("0 0 1,0 - 1/0", 3)] {
            let e = TableFile::parse(&format!("{base}{record}\n")).unwrap_err();
            assert_eq!(e.line, line, "{record}: {e}");
        }
        assert!(TableFile::parse("gwflop-gw-table v1\n0 0 1,0 - 1\n").is_err());
    }
}
