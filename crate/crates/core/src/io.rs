//! CSV and text-file formats.
//!
//! All floats are serialized with 17 significant digits (`{:.16e}`), which
//! round-trips every finite f64 bit-for-bit. Unbounded interval endpoints are
//! written as the literals `inf` / `-inf`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::data::{
    EntityId, EntityKind, FeatureTable, InteractionRecord, InteractionTable,
};
use crate::error::{Error, Result};

/// 17-significant-digit decimal form; `inf`/`-inf` for unbounded values.
pub fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse::<f64>().map_err(|e| format!("bad float {t:?}: {e}")),
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file))
}

fn create_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().from_writer(file))
}

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Reads an interactions CSV with header `drug_id,protein_id,label[,prediction]`.
pub fn load_interactions(path: impl AsRef<Path>) -> Result<InteractionTable> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let fields: Vec<&str> = headers.iter().collect();
    let with_prediction = match fields.as_slice() {
        ["drug_id", "protein_id", "label"] => false,
        ["drug_id", "protein_id", "label", "prediction"] => true,
        other => {
            return Err(parse_err(
                path,
                1,
                format!("unexpected interactions header {other:?}"),
            ))
        }
    };

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| parse_err(path, line, e.to_string()))?;
        let label = parse_f64(&row[2]).map_err(|m| parse_err(path, line, m))?;
        let prediction = if with_prediction {
            let cell = row[3].trim();
            if cell.is_empty() {
                None
            } else {
                Some(parse_f64(cell).map_err(|m| parse_err(path, line, m))?)
            }
        } else {
            None
        };
        records.push(InteractionRecord {
            drug: EntityId::drug(&row[0]),
            protein: EntityId::protein(&row[1]),
            label,
            prediction,
        });
    }
    InteractionTable::new(records)
}

/// Writes an interactions CSV. The `prediction` column is present iff at
/// least one record carries a prediction; rows without one get an empty cell.
pub fn write_interactions(table: &InteractionTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = create_writer(path)?;
    let any_prediction = table.records().iter().any(|r| r.prediction.is_some());
    let header: &[&str] = if any_prediction {
        &["drug_id", "protein_id", "label", "prediction"]
    } else {
        &["drug_id", "protein_id", "label"]
    };
    writer
        .write_record(header)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    for rec in table.records() {
        let label = fmt_f64(rec.label);
        if any_prediction {
            let pred = rec.prediction.map(fmt_f64).unwrap_or_default();
            writer.write_record([
                rec.drug.token.as_str(),
                rec.protein.token.as_str(),
                label.as_str(),
                pred.as_str(),
            ])
        } else {
            writer.write_record([
                rec.drug.token.as_str(),
                rec.protein.token.as_str(),
                label.as_str(),
            ])
        }
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a features CSV with header `entity_id,f0,...,f{d-1}`.
pub fn load_features(path: impl AsRef<Path>, kind: EntityKind) -> Result<FeatureTable> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let fields: Vec<&str> = headers.iter().collect();
    if fields.first() != Some(&"entity_id") || fields.len() < 2 {
        return Err(parse_err(
            path,
            1,
            format!("unexpected features header {fields:?}"),
        ));
    }
    for (i, name) in fields[1..].iter().enumerate() {
        let expected = format!("f{i}");
        if *name != expected {
            return Err(parse_err(
                path,
                1,
                format!("feature column {} named {name:?}, expected {expected:?}", i + 1),
            ));
        }
    }
    let dimension = fields.len() - 1;

    let mut vectors = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| parse_err(path, line, e.to_string()))?;
        let id = EntityId {
            kind,
            token: row[0].to_string(),
        };
        let mut v = Vec::with_capacity(dimension);
        for cell in row.iter().skip(1) {
            v.push(parse_f64(cell).map_err(|m| parse_err(path, line, m))?);
        }
        if vectors.insert(id.clone(), v).is_some() {
            return Err(parse_err(
                path,
                line,
                format!("duplicate entity {}", id.token),
            ));
        }
    }
    FeatureTable::new(kind, dimension, vectors)
}

pub fn write_features(table: &FeatureTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = create_writer(path)?;
    let mut header = vec!["entity_id".to_string()];
    header.extend((0..table.dimension).map(|i| format!("f{i}")));
    writer
        .write_record(&header)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    for (id, vec) in table.iter() {
        let mut row = vec![id.token.clone()];
        row.extend(vec.iter().map(|&x| fmt_f64(x)));
        writer
            .write_record(&row)
            .map_err(|e| parse_err(path, 0, e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a predictions CSV with header `drug_id,protein_id,prediction`.
pub fn load_predictions(path: impl AsRef<Path>) -> Result<BTreeMap<(String, String), f64>> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let fields: Vec<&str> = headers.iter().collect();
    if fields != ["drug_id", "protein_id", "prediction"] {
        return Err(parse_err(
            path,
            1,
            format!("unexpected predictions header {fields:?}"),
        ));
    }
    let mut map = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| parse_err(path, line, e.to_string()))?;
        let value = parse_f64(&row[2]).map_err(|m| parse_err(path, line, m))?;
        let key = (row[0].to_string(), row[1].to_string());
        if map.insert(key.clone(), value).is_some() {
            return Err(parse_err(
                path,
                line,
                format!("duplicate prediction for ({}, {})", key.0, key.1),
            ));
        }
    }
    Ok(map)
}

pub fn write_predictions(
    rows: impl IntoIterator<Item = (String, String, f64)>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut writer = create_writer(path)?;
    writer
        .write_record(["drug_id", "protein_id", "prediction"])
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    for (drug, protein, value) in rows {
        writer
            .write_record([drug.as_str(), protein.as_str(), fmt_f64(value).as_str()])
            .map_err(|e| parse_err(path, 0, e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// One interval row as written to / read from an intervals CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRow {
    pub drug: String,
    pub protein: String,
    pub prediction: f64,
    pub lower: f64,
    pub upper: f64,
    pub threshold: f64,
    pub method: String,
    pub alpha: f64,
}

const INTERVAL_HEADER: [&str; 8] = [
    "drug_id",
    "protein_id",
    "prediction",
    "lower",
    "upper",
    "threshold",
    "method",
    "alpha",
];

pub fn write_intervals(rows: &[IntervalRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = create_writer(path)?;
    writer
        .write_record(INTERVAL_HEADER)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    for row in rows {
        writer
            .write_record([
                row.drug.as_str(),
                row.protein.as_str(),
                fmt_f64(row.prediction).as_str(),
                fmt_f64(row.lower).as_str(),
                fmt_f64(row.upper).as_str(),
                fmt_f64(row.threshold).as_str(),
                row.method.as_str(),
                fmt_f64(row.alpha).as_str(),
            ])
            .map_err(|e| parse_err(path, 0, e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn load_intervals(path: impl AsRef<Path>) -> Result<Vec<IntervalRow>> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let fields: Vec<&str> = headers.iter().collect();
    if fields != INTERVAL_HEADER {
        return Err(parse_err(
            path,
            1,
            format!("unexpected intervals header {fields:?}"),
        ));
    }
    let mut rows = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| parse_err(path, line, e.to_string()))?;
        let f = |idx: usize| parse_f64(&row[idx]).map_err(|m| parse_err(path, line, m));
        rows.push(IntervalRow {
            drug: row[0].to_string(),
            protein: row[1].to_string(),
            prediction: f(2)?,
            lower: f(3)?,
            upper: f(4)?,
            threshold: f(5)?,
            method: row[6].to_string(),
            alpha: f(7)?,
        });
    }
    Ok(rows)
}

/// Writes cluster assignments as `entity_id,cluster`.
pub fn write_cluster_assignments(
    assignments: &BTreeMap<String, usize>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut writer = create_writer(path)?;
    writer
        .write_record(["entity_id", "cluster"])
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    for (token, cluster) in assignments {
        writer
            .write_record([token.as_str(), cluster.to_string().as_str()])
            .map_err(|e| parse_err(path, 0, e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Writes one row index per line.
pub fn write_row_indices(rows: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for row in rows {
        writeln!(out, "{row}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn load_row_indices(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row: usize = trimmed
            .parse()
            .map_err(|e| parse_err(path, i as u64 + 1, format!("bad row index: {e}")))?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_round_trips_bitwise() {
        for &x in &[
            0.0,
            -0.0,
            1.0,
            9.0,
            0.1,
            -1234.567891234567,
            1e-300,
            -1e300,
            std::f64::consts::PI,
        ] {
            let s = fmt_f64(x);
            let back = parse_f64(&s).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s} -> {back}");
        }
        assert_eq!(parse_f64(&fmt_f64(f64::INFINITY)).unwrap(), f64::INFINITY);
        assert_eq!(parse_f64(&fmt_f64(f64::NEG_INFINITY)).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn interactions_round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let table = InteractionTable::new(vec![
            InteractionRecord::new("d1", "p1", 1.0 / 3.0).with_prediction(1.5),
            InteractionRecord::new("d2", "p1", -3.25),
            InteractionRecord::new("d1", "p2", 1e-12),
        ])
        .unwrap();
        write_interactions(&table, &path).unwrap();
        let loaded = load_interactions(&path).unwrap();
        assert_eq!(loaded.records(), table.records());
        // A second round trip must be byte-identical.
        let path2 = dir.path().join("t2.csv");
        write_interactions(&loaded, &path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn header_only_file_gives_empty_table() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "drug_id,protein_id,label\n").unwrap();
        let table = load_interactions(&path).unwrap();
        assert_eq!(table.len(), 0);
    }

    #[test]
    fn three_row_fixture_loads_in_file_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(
            &path,
            "drug_id,protein_id,label\nd2,p1,2.0\nd1,p1,1.0\nd3,p9,3.0\n",
        )
        .unwrap();
        let table = load_interactions(&path).unwrap();
        let drugs: Vec<&str> = table
            .records()
            .iter()
            .map(|r| r.drug.token.as_str())
            .collect();
        assert_eq!(drugs, ["d2", "d1", "d3"]);
    }

    #[test]
    fn duplicate_pair_in_file_is_an_error_naming_it() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.csv");
        std::fs::write(
            &path,
            "drug_id,protein_id,label\nda,pb,1.0\nda,pb,2.0\n",
        )
        .unwrap();
        let err = load_interactions(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("da") && msg.contains("pb"), "{msg}");
    }

    #[test]
    fn bad_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "drug,target,y\nd,p,1.0\n").unwrap();
        assert!(load_interactions(&path).is_err());
    }

    #[test]
    fn features_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let mut vectors = BTreeMap::new();
        vectors.insert(EntityId::drug("d1"), vec![0.5, -1.25, 3.0]);
        vectors.insert(EntityId::drug("d2"), vec![1.0, 2.0, -0.125]);
        let table = FeatureTable::new(EntityKind::Drug, 3, vectors).unwrap();
        write_features(&table, &path).unwrap();
        let loaded = load_features(&path, EntityKind::Drug).unwrap();
        assert_eq!(loaded, table);
    }

    #[test]
    fn row_indices_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.txt");
        write_row_indices(&[3, 1, 4, 15], &path).unwrap();
        assert_eq!(load_row_indices(&path).unwrap(), vec![3, 1, 4, 15]);
    }

    #[test]
    fn intervals_round_trip_with_inf() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("iv.csv");
        let rows = vec![
            IntervalRow {
                drug: "d1".into(),
                protein: "p1".into(),
                prediction: 0.5,
                lower: -0.5,
                upper: 1.5,
                threshold: 1.0,
                method: "mcp".into(),
                alpha: 0.1,
            },
            IntervalRow {
                drug: "d2".into(),
                protein: "p2".into(),
                prediction: 2.0,
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
                threshold: f64::INFINITY,
                method: "gcp".into(),
                alpha: 0.1,
            },
        ];
        write_intervals(&rows, &path).unwrap();
        assert_eq!(load_intervals(&path).unwrap(), rows);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("-inf") && text.contains("inf"), "{text}");
    }
}
