//! Categorical datasets: loading, encoding, and summary statistics.
//!
//! A dataset holds `R` records over `M` categorical attributes. Attribute `i`
//! has arity `n_i` and its values are encoded as the integers `1..=n_i`.
//! Codes are assigned in order of first appearance per column, and the
//! string-to-code mapping is kept so results stay interpretable.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    attr_names: Vec<String>,
    arities: Vec<u32>,
    records: Vec<Vec<u32>>,
    /// Per attribute, the source strings in code order (`value_maps[i][v-1]`
    /// is the string for code `v`).
    value_maps: Vec<Vec<String>>,
}

/// Options for CSV loading.
#[derive(Clone, Debug)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// Rows containing this marker are rejected with a format error.
    pub missing_marker: Option<String>,
    /// Pre-declared value maps, fixing codes and arities (the sidecar format
    /// written by [`Dataset::value_maps_json`]). Columns may then contain only
    /// declared values, and arities may exceed the set of values actually
    /// present.
    pub value_maps: Option<Vec<Vec<String>>>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            missing_marker: None,
            value_maps: None,
        }
    }
}

impl Dataset {
    /// Builds a dataset from already-encoded parts, validating the schema
    /// invariants.
    pub fn from_encoded(
        attr_names: Vec<String>,
        arities: Vec<u32>,
        records: Vec<Vec<u32>>,
        value_maps: Vec<Vec<String>>,
    ) -> Result<Self> {
        let m = attr_names.len();
        if m == 0 {
            return Err(Error::Config("dataset must have at least one attribute".into()));
        }
        if arities.len() != m || value_maps.len() != m {
            return Err(Error::Config("attribute metadata lengths disagree".into()));
        }
        for (i, map) in value_maps.iter().enumerate() {
            if map.len() != arities[i] as usize {
                return Err(Error::Config(format!(
                    "value map for attribute {} has {} entries, arity is {}",
                    i + 1,
                    map.len(),
                    arities[i]
                )));
            }
        }
        for (r, rec) in records.iter().enumerate() {
            if rec.len() != m {
                return Err(Error::Format {
                    row: r + 2,
                    msg: format!("record has {} fields, expected {}", rec.len(), m),
                });
            }
            for (i, &v) in rec.iter().enumerate() {
                if v < 1 || v > arities[i] {
                    return Err(Error::Format {
                        row: r + 2,
                        msg: format!("code {} out of range for attribute {}", v, i + 1),
                    });
                }
            }
        }
        Ok(Dataset {
            attr_names,
            arities,
            records,
            value_maps,
        })
    }

    pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, opts)
    }

    pub fn from_csv_reader(reader: impl Read, opts: &CsvOptions) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(opts.delimiter)
            .flexible(true)
            .has_headers(true)
            .from_reader(reader);

        let headers = rdr
            .headers()
            .map_err(|e| Error::Format {
                row: 1,
                msg: e.to_string(),
            })?
            .clone();
        if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
            return Err(Error::Format {
                row: 1,
                msg: "empty file: a header row of attribute names is required".into(),
            });
        }
        let m = headers.len();
        let attr_names: Vec<String> = headers.iter().map(|s| s.to_string()).collect();

        let declared = opts.value_maps.as_ref();
        if let Some(maps) = declared {
            if maps.len() != m {
                return Err(Error::Config(format!(
                    "value-map sidecar declares {} attributes, header has {}",
                    maps.len(),
                    m
                )));
            }
        }

        let mut value_maps: Vec<Vec<String>> = match declared {
            Some(maps) => maps.clone(),
            None => vec![Vec::new(); m],
        };
        let mut code_lookup: Vec<HashMap<String, u32>> = value_maps
            .iter()
            .map(|map| {
                map.iter()
                    .enumerate()
                    .map(|(i, s)| (s.clone(), i as u32 + 1))
                    .collect()
            })
            .collect();

        let mut records = Vec::new();
        for (idx, row) in rdr.records().enumerate() {
            let row_no = idx + 2; // 1-based, counting the header
            let row = row.map_err(|e| Error::Format {
                row: row_no,
                msg: e.to_string(),
            })?;
            if row.len() != m {
                return Err(Error::Format {
                    row: row_no,
                    msg: format!("ragged row: {} fields, expected {}", row.len(), m),
                });
            }
            let mut rec = Vec::with_capacity(m);
            for (i, field) in row.iter().enumerate() {
                if let Some(marker) = &opts.missing_marker {
                    if field == marker {
                        return Err(Error::Format {
                            row: row_no,
                            msg: format!(
                                "missing value marker `{marker}` in column `{}`",
                                attr_names[i]
                            ),
                        });
                    }
                }
                let code = match code_lookup[i].get(field) {
                    Some(&c) => c,
                    None if declared.is_some() => {
                        return Err(Error::Format {
                            row: row_no,
                            msg: format!(
                                "value `{field}` in column `{}` not in declared value map",
                                attr_names[i]
                            ),
                        });
                    }
                    None => {
                        let c = value_maps[i].len() as u32 + 1;
                        value_maps[i].push(field.to_string());
                        code_lookup[i].insert(field.to_string(), c);
                        c
                    }
                };
                rec.push(code);
            }
            records.push(rec);
        }

        let arities = value_maps.iter().map(|map| map.len() as u32).collect();
        Ok(Dataset {
            attr_names,
            arities,
            records,
            value_maps,
        })
    }

    pub fn num_attrs(&self) -> usize {
        self.attr_names.len()
    }

    pub fn num_records(&self) -> usize {
        self.records.len()
    }

    pub fn arities(&self) -> &[u32] {
        &self.arities
    }

    pub fn arity(&self, attr: usize) -> u32 {
        self.arities[attr]
    }

    pub fn attr_names(&self) -> &[String] {
        &self.attr_names
    }

    pub fn records(&self) -> &[Vec<u32>] {
        &self.records
    }

    pub fn record(&self, idx: usize) -> &[u32] {
        &self.records[idx]
    }

    pub fn attr_index(&self, name: &str) -> Option<usize> {
        self.attr_names.iter().position(|n| n == name)
    }

    /// Code for a source string, or `None` if the string never occurred.
    pub fn code_for(&self, attr: usize, value: &str) -> Option<u32> {
        self.value_maps[attr]
            .iter()
            .position(|s| s == value)
            .map(|i| i as u32 + 1)
    }

    /// Source string for a code.
    pub fn string_for(&self, attr: usize, code: u32) -> &str {
        &self.value_maps[attr][code as usize - 1]
    }

    pub fn value_maps(&self) -> &[Vec<String>] {
        &self.value_maps
    }

    /// The value-map sidecar: attribute name to its strings in code order.
    pub fn value_maps_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .attr_names
            .iter()
            .zip(&self.value_maps)
            .map(|(name, vals)| (name.clone(), serde_json::json!(vals)))
            .collect();
        serde_json::Value::Object(map)
    }

    pub fn decode_record(&self, rec: &[u32]) -> Vec<String> {
        rec.iter()
            .enumerate()
            .map(|(i, &v)| self.string_for(i, v).to_string())
            .collect()
    }

    pub fn encode_record(&self, fields: &[String]) -> Result<Vec<u32>> {
        fields
            .iter()
            .enumerate()
            .map(|(i, s)| {
                self.code_for(i, s)
                    .ok_or_else(|| Error::Query(format!("unknown value `{s}` for attribute {}", i + 1)))
            })
            .collect()
    }

    /// FNV-1a over the schema and records; used to bind serialized trees to
    /// the dataset their leaf-lists point into.
    pub fn checksum(&self) -> u64 {
        const OFFSET: u64 = 0xcbf29ce484222325;
        const PRIME: u64 = 0x100000001b3;
        let mut h = OFFSET;
        let mut mix = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        mix(self.num_attrs() as u64);
        for &a in &self.arities {
            mix(a as u64);
        }
        mix(self.num_records() as u64);
        for rec in &self.records {
            for &v in rec {
                mix(v as u64);
            }
        }
        h
    }

    pub fn stats(&self) -> DatasetStats {
        let mut freqs: Vec<Vec<u64>> = self
            .arities
            .iter()
            .map(|&a| vec![0u64; a as usize])
            .collect();
        for rec in &self.records {
            for (i, &v) in rec.iter().enumerate() {
                freqs[i][v as usize - 1] += 1;
            }
        }
        DatasetStats {
            num_attrs: self.num_attrs(),
            num_records: self.num_records(),
            arities: self.arities.clone(),
            value_frequencies: freqs,
        }
    }

    /// Writes the records back out as CSV through the value maps.
    pub fn write_csv(&self, w: impl std::io::Write, delimiter: u8) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().delimiter(delimiter).from_writer(w);
        wtr.write_record(&self.attr_names)
            .map_err(|e| Error::Format { row: 1, msg: e.to_string() })?;
        for (r, rec) in self.records.iter().enumerate() {
            wtr.write_record(self.decode_record(rec))
                .map_err(|e| Error::Format { row: r + 2, msg: e.to_string() })?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn into_arc(self) -> Arc<Dataset> {
        Arc::new(self)
    }
}

/// Summary report for a dataset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetStats {
    pub num_attrs: usize,
    pub num_records: usize,
    pub arities: Vec<u32>,
    /// `value_frequencies[i][v-1]` is the number of records with `a_i = v`.
    pub value_frequencies: Vec<Vec<u64>>,
}
