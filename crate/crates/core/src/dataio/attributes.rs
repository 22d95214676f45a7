use std::fmt;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;

use super::{atomic_write, fmt_f64, parse_f64, read_to_string, valid_id};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrKind {
    Real,
    Categorical,
}

/// How a column enters the trial feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    Log1p,
    /// Binary equality of the two sides (categorical columns).
    Match,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Real(f64),
    Categorical(String),
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub kind: AttrKind,
}

/// One line of the attribute schema file: `name kind transform`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaEntry {
    pub name: String,
    pub kind: AttrKind,
    pub transform: Transform,
}

impl SchemaEntry {
    pub fn new(name: impl Into<String>, kind: AttrKind, transform: Transform) -> Result<Self> {
        let name = name.into();
        let ok = matches!(
            (kind, transform),
            (AttrKind::Real, Transform::Identity | Transform::Log1p)
                | (AttrKind::Categorical, Transform::Match)
        );
        if !ok {
            return Err(Error::invalid(format!(
                "column {name}: transform {transform} does not apply to {kind} values"
            )));
        }
        if !valid_id(&name) || name == "utt_id" {
            return Err(Error::invalid(format!("invalid column name {name:?}")));
        }
        Ok(Self {
            name,
            kind,
            transform,
        })
    }
}

impl fmt::Display for AttrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttrKind::Real => "real",
            AttrKind::Categorical => "categorical",
        })
    }
}

impl FromStr for AttrKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "real" => Ok(AttrKind::Real),
            "categorical" => Ok(AttrKind::Categorical),
            _ => Err(format!("unknown column kind {s:?}")),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::Identity => "identity",
            Transform::Log1p => "log1p",
            Transform::Match => "match",
        })
    }
}

impl FromStr for Transform {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "identity" => Ok(Transform::Identity),
            "log1p" => Ok(Transform::Log1p),
            "match" => Ok(Transform::Match),
            _ => Err(format!("unknown transform {s:?}")),
        }
    }
}

pub fn read_schema(path: impl AsRef<Path>) -> Result<Vec<SchemaEntry>> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let mut out: Vec<SchemaEntry> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let entry = match fields.as_slice() {
            [] => continue,
            [name, kind, transform] => {
                let kind = kind.parse().map_err(|m| Error::parse(path, lineno, m))?;
                let transform = transform.parse().map_err(|m| Error::parse(path, lineno, m))?;
                SchemaEntry::new(*name, kind, transform)
                    .map_err(|e| Error::parse(path, lineno, e.to_string()))?
            }
            _ => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected `name kind transform`, found {} fields", fields.len()),
                ))
            }
        };
        if out.iter().any(|e| e.name == entry.name) {
            return Err(Error::parse(path, lineno, format!("duplicate column {:?}", entry.name)));
        }
        out.push(entry);
    }
    Ok(out)
}

pub fn write_schema(schema: &[SchemaEntry], path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), |w| {
        for e in schema {
            writeln!(w, "{} {} {}", e.name, e.kind, e.transform)?;
        }
        Ok(())
    })
}

/// Per-utterance attributes, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AttributeTable {
    columns: Vec<Column>,
    rows: IndexMap<String, Vec<AttrValue>>,
}

impl AttributeTable {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            rows: IndexMap::new(),
        }
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, utt_id: &str) -> Option<&[AttrValue]> {
        self.rows.get(utt_id).map(Vec::as_slice)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[AttrValue])> {
        self.rows.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Adds a row; values must match the column kinds.
    pub fn insert(&mut self, utt_id: impl Into<String>, values: Vec<AttrValue>) -> Result<()> {
        let utt_id = utt_id.into();
        if !valid_id(&utt_id) {
            return Err(Error::invalid(format!("invalid utterance id {utt_id:?}")));
        }
        if values.len() != self.columns.len() {
            return Err(Error::DimMismatch {
                expected: self.columns.len(),
                found: values.len(),
            });
        }
        for (col, v) in self.columns.iter().zip(&values) {
            let ok = match (col.kind, v) {
                (_, AttrValue::Missing) => true,
                (AttrKind::Real, AttrValue::Real(x)) => x.is_finite(),
                (AttrKind::Categorical, AttrValue::Categorical(s)) => !s.is_empty(),
                _ => false,
            };
            if !ok {
                return Err(Error::invalid(format!(
                    "{utt_id}: value {v:?} invalid for {} column {}",
                    col.kind, col.name
                )));
            }
        }
        if self.rows.contains_key(&utt_id) {
            return Err(Error::invalid(format!("duplicate utterance id {utt_id:?}")));
        }
        self.rows.insert(utt_id, values);
        Ok(())
    }
}

/// Reads an attribute CSV whose column kinds come from `schema`.
///
/// The first column must be `utt_id`; every other header must be declared in
/// the schema and every schema column must be present. Empty fields are
/// stored as [`AttrValue::Missing`]. Errors carry the CSV line number.
pub fn read_attributes(path: impl AsRef<Path>, schema: &[SchemaEntry]) -> Result<AttributeTable> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    if headers.get(0) != Some("utt_id") {
        return Err(Error::parse(path, 1, "first column must be utt_id"));
    }
    let mut columns = Vec::new();
    for name in headers.iter().skip(1) {
        let entry = schema
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::parse(path, 1, format!("column {name:?} not declared in schema")))?;
        if columns.iter().any(|c: &Column| c.name == name) {
            return Err(Error::parse(path, 1, format!("duplicate column {name:?}")));
        }
        columns.push(Column {
            name: name.to_string(),
            kind: entry.kind,
        });
    }
    if let Some(absent) = schema.iter().find(|e| !columns.iter().any(|c| c.name == e.name)) {
        return Err(Error::parse(
            path,
            1,
            format!("schema column {:?} missing from header", absent.name),
        ));
    }

    let mut table = AttributeTable::new(columns);
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let utt_id = record.get(0).unwrap_or_default();
        let mut values = Vec::with_capacity(table.columns.len());
        for (col, field) in table.columns.iter().zip(record.iter().skip(1)) {
            let v = if field.is_empty() {
                AttrValue::Missing
            } else {
                match col.kind {
                    AttrKind::Real => AttrValue::Real(parse_f64(field).ok_or_else(|| {
                        Error::parse(path, line, format!("column {}: invalid real value {field:?}", col.name))
                    })?),
                    AttrKind::Categorical => AttrValue::Categorical(field.to_string()),
                }
            };
            values.push(v);
        }
        table
            .insert(utt_id, values)
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
    }
    Ok(table)
}

pub fn write_attributes(table: &AttributeTable, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), |w| {
        let mut writer = csv::Writer::from_writer(w);
        let mut header = vec!["utt_id"];
        header.extend(table.columns.iter().map(|c| c.name.as_str()));
        writer.write_record(&header)?;
        for (utt, values) in &table.rows {
            let mut record = vec![utt.clone()];
            record.extend(values.iter().map(|v| match v {
                AttrValue::Real(x) => fmt_f64(*x),
                AttrValue::Categorical(s) => s.clone(),
                AttrValue::Missing => String::new(),
            }));
            writer.write_record(&record)?;
        }
        writer.flush()
    })
}
