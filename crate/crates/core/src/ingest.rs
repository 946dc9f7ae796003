//! Loading, validating, and cleaning flow-based IDS records from CSV, plus
//! the original-label to grouped-label mapping.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column layout of a flow dataset: ordered feature names plus the label column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowSchema {
    feature_names: Vec<String>,
    label_column: String,
}

impl FlowSchema {
    pub fn new(feature_names: Vec<String>, label_column: impl Into<String>) -> Result<Self> {
        let label_column = label_column.into();
        if label_column.is_empty() {
            return Err(Error::InvalidParameter("empty label column name".into()));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if name.is_empty() {
                return Err(Error::InvalidParameter("empty feature name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate feature name {name:?}"
                )));
            }
            if *name == label_column {
                return Err(Error::InvalidParameter(format!(
                    "label column {label_column:?} listed among features"
                )));
            }
        }
        Ok(Self {
            feature_names,
            label_column,
        })
    }

    /// Build a schema from a CSV header: every trimmed column except
    /// `label_column` becomes a feature, in file order. Repeated column names
    /// (present in some CICIDS-2017 releases) are disambiguated with a
    /// pandas-style `.1`, `.2`, ... suffix.
    pub fn from_csv_header(path: impl AsRef<Path>, label_column: &str) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(Error::io(path))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(BufReader::new(file));
        let headers = reader.byte_headers()?.clone();

        let mut names = Vec::new();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut saw_label = false;
        for raw in headers.iter() {
            let name = String::from_utf8_lossy(raw).trim().to_string();
            if name == label_column && !saw_label {
                saw_label = true;
                continue;
            }
            let n = counts.entry(name.clone()).or_insert(0);
            let unique = if *n == 0 {
                name.clone()
            } else {
                format!("{name}.{n}")
            };
            *n += 1;
            names.push(unique);
        }
        if !saw_label {
            return Err(Error::HeaderMismatch {
                missing: vec![label_column.to_string()],
                unexpected: vec![],
            });
        }
        Self::new(names, label_column)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_column(&self) -> &str {
        &self.label_column
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    /// Schema restricted to the given features, preserving their order here.
    pub fn project(&self, names: &[String]) -> Result<Self> {
        for name in names {
            if self.feature_index(name).is_none() {
                return Err(Error::SchemaMismatch(format!("unknown feature {name:?}")));
            }
        }
        Self::new(names.to_vec(), self.label_column.clone())
    }

    /// Schema with extra feature columns appended.
    pub fn with_features(&self, extra: &[String]) -> Result<Self> {
        let mut names = self.feature_names.clone();
        names.extend_from_slice(extra);
        Self::new(names, self.label_column.clone())
    }
}

/// A columnar table of numeric flow features plus one class label per row.
/// This is the unit moved through the whole pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDataset {
    schema: FlowSchema,
    rows: Array2<f64>,
    labels: Vec<String>,
}

impl FlowDataset {
    pub fn new(schema: FlowSchema, rows: Array2<f64>, labels: Vec<String>) -> Result<Self> {
        if rows.nrows() != labels.len() {
            return Err(Error::LengthMismatch {
                left: rows.nrows(),
                right: labels.len(),
            });
        }
        if rows.ncols() != schema.n_features() {
            return Err(Error::DimensionMismatch {
                left: rows.ncols(),
                right: schema.n_features(),
            });
        }
        Ok(Self {
            schema,
            rows,
            labels,
        })
    }

    pub fn schema(&self) -> &FlowSchema {
        &self.schema
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.rows.ncols()
    }

    /// Per-class row counts in label order.
    pub fn class_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for label in &self.labels {
            *counts.entry(label.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Sorted distinct class labels.
    pub fn classes(&self) -> Vec<String> {
        self.labels
            .iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .cloned()
            .collect()
    }

    /// New dataset containing the given rows, in index order.
    pub fn select_rows(&self, indices: &[usize]) -> FlowDataset {
        let rows = self.rows.select(ndarray::Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        FlowDataset {
            schema: self.schema.clone(),
            rows,
            labels,
        }
    }

    /// New dataset keeping only the named feature columns, in the given order.
    pub fn select_features(&self, names: &[String]) -> Result<FlowDataset> {
        let schema = self.schema.project(names)?;
        let indices: Vec<usize> = names
            .iter()
            .map(|n| self.schema.feature_index(n).unwrap())
            .collect();
        let rows = self.rows.select(ndarray::Axis(1), &indices);
        Ok(FlowDataset {
            schema,
            rows,
            labels: self.labels.clone(),
        })
    }

    /// Concatenate datasets with identical schemas, preserving order.
    pub fn concat(parts: &[FlowDataset]) -> Result<FlowDataset> {
        let first = parts.first().ok_or(Error::EmptyInput("no datasets"))?;
        let schema = first.schema.clone();
        let n_features = schema.n_features();
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for part in parts {
            if part.schema != schema {
                return Err(Error::SchemaMismatch(
                    "datasets have different schemas".into(),
                ));
            }
            data.extend_from_slice(part.rows.as_slice().expect("row-major"));
            labels.extend_from_slice(&part.labels);
        }
        let rows = Array2::from_shape_vec((labels.len(), n_features), data)
            .expect("consistent shape");
        FlowDataset::new(schema, rows, labels)
    }
}

/// Parse one CSV file against a known schema.
///
/// The header must match the schema's columns (features then wherever the
/// label column sits in the file) after whitespace trimming. Non-numeric or
/// empty feature cells are recorded as NaN markers for [`clean`] to remove;
/// `inf`/`Infinity` strings parse to infinities, which `clean` also removes.
pub fn load_csv(path: impl AsRef<Path>, schema: &FlowSchema) -> Result<FlowDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(Error::io(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(BufReader::new(file));

    let headers = reader.byte_headers()?.clone();
    let header_names: Vec<String> = {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        headers
            .iter()
            .map(|raw| {
                let name = String::from_utf8_lossy(raw).trim().to_string();
                let n = counts.entry(name.clone()).or_insert(0);
                let unique = if *n == 0 || name == schema.label_column {
                    name.clone()
                } else {
                    format!("{name}.{n}")
                };
                *n += 1;
                unique
            })
            .collect()
    };

    let mut expected: Vec<&str> = schema.feature_names.iter().map(String::as_str).collect();
    let label_pos = header_names
        .iter()
        .position(|h| h == schema.label_column())
        .ok_or_else(|| Error::HeaderMismatch {
            missing: vec![schema.label_column().to_string()],
            unexpected: vec![],
        })?;
    expected.insert(label_pos.min(expected.len()), schema.label_column());

    if header_names != expected {
        let header_set: HashSet<&str> = header_names.iter().map(String::as_str).collect();
        let expected_set: HashSet<&str> = expected.iter().copied().collect();
        let missing: Vec<String> = expected
            .iter()
            .filter(|c| !header_set.contains(**c))
            .map(|c| c.to_string())
            .collect();
        let unexpected: Vec<String> = header_names
            .iter()
            .filter(|c| !expected_set.contains(c.as_str()))
            .cloned()
            .collect();
        if missing.is_empty() && unexpected.is_empty() {
            return Err(Error::SchemaMismatch(format!(
                "column order differs from schema in {}",
                path.display()
            )));
        }
        return Err(Error::HeaderMismatch {
            missing,
            unexpected,
        });
    }

    let n_features = schema.n_features();
    let n_columns = n_features + 1;
    let mut data: Vec<f64> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut record = csv::ByteRecord::new();
    let mut row = 0usize;
    while reader.read_byte_record(&mut record)? {
        if record.len() != n_columns {
            return Err(Error::RowArity {
                row,
                expected: n_columns,
                got: record.len(),
            });
        }
        for (col, raw) in record.iter().enumerate() {
            if col == label_pos {
                labels.push(String::from_utf8_lossy(raw).trim().to_string());
            } else {
                data.push(parse_cell(raw));
            }
        }
        row += 1;
    }

    let rows = Array2::from_shape_vec((row, n_features), data).expect("consistent shape");
    FlowDataset::new(schema.clone(), rows, labels)
}

fn parse_cell(raw: &[u8]) -> f64 {
    let text = match std::str::from_utf8(raw) {
        Ok(t) => t.trim(),
        Err(_) => return f64::NAN,
    };
    if text.is_empty() {
        return f64::NAN;
    }
    text.parse::<f64>().unwrap_or(f64::NAN)
}

/// Remove every row containing a missing or non-finite value, preserving the
/// order of survivors. CICIDS-2017 carries both null cells and +/-infinity in
/// the rate columns; both fall under this single removal step.
pub fn clean(d: &FlowDataset) -> FlowDataset {
    let keep: Vec<usize> = (0..d.n_rows())
        .filter(|&i| d.rows.row(i).iter().all(|v| v.is_finite()))
        .collect();
    if keep.len() == d.n_rows() {
        return d.clone();
    }
    d.select_rows(&keep)
}

/// Remove exact duplicate rows (feature bits and label), keeping the first
/// occurrence. Off by default in the pipeline.
pub fn dedup(d: &FlowDataset) -> FlowDataset {
    let mut seen: HashSet<(Vec<u64>, &str)> = HashSet::with_capacity(d.n_rows());
    let mut keep = Vec::new();
    for i in 0..d.n_rows() {
        let bits: Vec<u64> = d.rows.row(i).iter().map(|v| v.to_bits()).collect();
        if seen.insert((bits, d.labels[i].as_str())) {
            keep.push(i);
        }
    }
    if keep.len() == d.n_rows() {
        return d.clone();
    }
    d.select_rows(&keep)
}

/// Total mapping from original class names to grouped class names.
///
/// Lookup keys are normalized (trimmed, whitespace collapsed, dash variants
/// unified, case folded) so the label spellings that vary across CICIDS-2017
/// releases all resolve to the same group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    map: BTreeMap<String, String>,
}

/// Normalize a label for map lookup: trim, collapse internal whitespace,
/// unify dash characters (including the replacement char that latin-1
/// en-dashes decode to), drop spaces around dashes, lowercase.
pub fn normalize_label(raw: &str) -> String {
    let unified: String = raw
        .chars()
        .map(|c| match c {
            '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2015}'
            | '\u{FFFD}' | '\u{0096}' => '-',
            c if c.is_whitespace() => ' ',
            c => c,
        })
        .collect();
    let mut out = String::with_capacity(unified.len());
    for token in unified.split_whitespace() {
        if !out.is_empty() && !out.ends_with('-') && !token.starts_with('-') {
            out.push(' ');
        }
        out.push_str(token);
    }
    out.to_lowercase()
}

impl LabelMap {
    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        for (orig, group) in pairs {
            let key = normalize_label(orig.as_ref());
            let group = group.as_ref().trim().to_string();
            if key.is_empty() || group.is_empty() {
                return Err(Error::InvalidParameter("empty label map entry".into()));
            }
            if map.insert(key, group).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "label {:?} mapped twice",
                    orig.as_ref()
                )));
            }
        }
        if map.is_empty() {
            return Err(Error::EmptyInput("label map"));
        }
        Ok(Self { map })
    }

    /// Parse the `original = group` key-value text format. `#` starts a
    /// comment line; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (orig, group) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("label map line without '=': {line:?}"))
            })?;
            pairs.push((orig.trim().to_string(), group.trim().to_string()));
        }
        Self::from_pairs(pairs)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut text = String::new();
        File::open(path)
            .map_err(Error::io(path))?
            .read_to_string(&mut text)
            .map_err(Error::io(path))?;
        Self::parse(&text)
    }

    /// The grouping of the 15 CICIDS-2017 labels into 7 classes, shipped
    /// with the repo.
    pub fn cicids2017() -> Self {
        Self::parse(include_str!("../assets/cicids2017_label_map.txt"))
            .expect("bundled label map parses")
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        self.map.get(&normalize_label(label)).map(String::as_str)
    }

    /// Normalized original labels (the map's domain).
    pub fn domain(&self) -> Vec<&str> {
        self.map.keys().map(String::as_str).collect()
    }

    /// Sorted distinct grouped labels (the map's range).
    pub fn range(&self) -> Vec<&str> {
        self.map
            .values()
            .map(String::as_str)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Replace each row's label with its grouped label. Features are untouched.
pub fn group_labels(d: &FlowDataset, map: &LabelMap) -> Result<FlowDataset> {
    let mut labels = Vec::with_capacity(d.n_rows());
    for (row, label) in d.labels.iter().enumerate() {
        match map.get(label) {
            Some(group) => labels.push(group.to_string()),
            None => {
                return Err(Error::UnknownLabel {
                    label: label.clone(),
                    row,
                })
            }
        }
    }
    Ok(FlowDataset {
        schema: d.schema.clone(),
        rows: d.rows.clone(),
        labels,
    })
}

/// Read the first line of a split artifact without parsing the whole file.
pub(crate) fn read_first_line(path: &Path) -> Result<String> {
    let file = File::open(path).map_err(Error::io(path))?;
    let mut line = String::new();
    BufReader::new(file)
        .read_line(&mut line)
        .map_err(Error::io(path))?;
    Ok(line)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn schema_abc() -> FlowSchema {
        FlowSchema::new(vec!["a".into(), "b".into()], "Label").unwrap()
    }

    fn write_csv(dir: &tempfile::TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn schema_rejects_duplicates_and_label_overlap() {
        assert!(FlowSchema::new(vec!["a".into(), "a".into()], "Label").is_err());
        assert!(FlowSchema::new(vec!["a".into(), "Label".into()], "Label").is_err());
        assert!(FlowSchema::new(vec!["a".into(), "".into()], "Label").is_err());
    }

    #[test]
    fn load_csv_parses_well_formed_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_csv(
            &dir,
            "ok.csv",
            "a, b ,Label\n1,2,x\n3,4,y\n5,6,x\n",
        );
        let d = load_csv(&path, &schema_abc()).unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.labels(), ["x", "y", "x"]);
        assert_eq!(d.rows()[[1, 0]], 3.0);
    }

    #[test]
    fn load_csv_reports_missing_label_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_csv(&dir, "nolabel.csv", "a,b\n1,2\n");
        let err = load_csv(&path, &schema_abc()).unwrap_err();
        match err {
            Error::HeaderMismatch { missing, .. } => assert_eq!(missing, ["Label"]),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_csv_reports_wrong_arity_with_row_index() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_csv(&dir, "arity.csv", "a,b,Label\n1,2,x\n3,4\n");
        let err = load_csv(&path, &schema_abc()).unwrap_err();
        match err {
            Error::RowArity { row, expected, got } => {
                assert_eq!((row, expected, got), (1, 3, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_csv_marks_missing_and_infinite_cells() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_csv(&dir, "gaps.csv", "a,b,Label\n1,,x\nInfinity,2,y\n3,4,z\n");
        let d = load_csv(&path, &schema_abc()).unwrap();
        assert!(d.rows()[[0, 1]].is_nan());
        assert!(d.rows()[[1, 0]].is_infinite());
        assert!(d.rows()[[2, 0]].is_finite());
    }

    #[test]
    fn label_column_position_inside_row_is_respected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_csv(&dir, "mid.csv", "a,Label,b\n1,x,2\n");
        let d = load_csv(&path, &schema_abc()).unwrap();
        assert_eq!(d.labels(), ["x"]);
        assert_eq!(d.rows()[[0, 1]], 2.0);
    }

    #[test]
    fn clean_removes_rows_with_nonfinite_cells() {
        let schema = schema_abc();
        let rows = Array2::from_shape_vec(
            (5, 2),
            vec![
                1.0,
                2.0,
                f64::NAN,
                3.0,
                4.0,
                5.0,
                6.0,
                f64::INFINITY,
                7.0,
                8.0,
            ],
        )
        .unwrap();
        let labels = vec!["a", "b", "c", "d", "e"]
            .into_iter()
            .map(String::from)
            .collect();
        let d = FlowDataset::new(schema, rows, labels).unwrap();
        let cleaned = clean(&d);
        assert_eq!(cleaned.n_rows(), 3);
        assert_eq!(cleaned.labels(), ["a", "c", "e"]);
        // idempotent
        assert_eq!(clean(&cleaned), cleaned);
    }

    #[test]
    fn clean_is_identity_on_finite_data() {
        let schema = schema_abc();
        let rows = Array2::from_shape_vec((2, 2), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let d = FlowDataset::new(schema, rows, vec!["x".into(), "y".into()]).unwrap();
        assert_eq!(clean(&d), d);
    }

    #[test]
    fn dedup_keeps_first_occurrence() {
        let schema = schema_abc();
        let rows =
            Array2::from_shape_vec((3, 2), vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0]).unwrap();
        let d = FlowDataset::new(
            schema,
            rows,
            vec!["x".into(), "x".into(), "y".into()],
        )
        .unwrap();
        let deduped = dedup(&d);
        // identical row with a different label is not a duplicate
        assert_eq!(deduped.n_rows(), 2);
        assert_eq!(deduped.labels(), ["x", "y"]);
    }

    #[test]
    fn label_normalization_unifies_release_variants() {
        assert_eq!(normalize_label("  BENIGN "), "benign");
        assert_eq!(
            normalize_label("Web Attack \u{FFFD} Brute Force"),
            "web attack-brute force"
        );
        assert_eq!(
            normalize_label("Web Attack \u{2013} Brute Force"),
            "web attack-brute force"
        );
        assert_eq!(
            normalize_label("Web Attack-Brute  Force"),
            "web attack-brute force"
        );
    }

    #[test]
    fn bundled_cicids_map_covers_15_labels_and_7_groups() {
        let map = LabelMap::cicids2017();
        assert_eq!(map.len(), 15);
        assert_eq!(
            map.range(),
            [
                "Benign",
                "Bot",
                "Brute Force",
                "DoS/DDoS",
                "Infiltration",
                "PortScan",
                "Web Attack"
            ]
        );
        assert_eq!(map.get("FTP-Patator"), Some("Brute Force"));
        assert_eq!(map.get("Benign"), Some("Benign"));
        assert_eq!(map.get("BENIGN"), Some("Benign"));
        assert_eq!(map.get("Web Attack \u{FFFD} XSS"), Some("Web Attack"));
        assert_eq!(map.get("Heartbleed"), Some("DoS/DDoS"));
    }

    #[test]
    fn group_labels_replaces_labels_and_keeps_features() {
        let schema = schema_abc();
        let rows = Array2::from_shape_vec((2, 2), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let d = FlowDataset::new(
            schema,
            rows.clone(),
            vec!["FTP-Patator".into(), "SSH-Patator".into()],
        )
        .unwrap();
        let grouped = group_labels(&d, &LabelMap::cicids2017()).unwrap();
        assert_eq!(grouped.labels(), ["Brute Force", "Brute Force"]);
        assert_eq!(grouped.rows(), &rows);
    }

    #[test]
    fn group_labels_reports_unknown_label_and_row() {
        let schema = schema_abc();
        let rows = Array2::from_shape_vec((2, 2), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let d = FlowDataset::new(schema, rows, vec!["Benign".into(), "Mystery".into()])
            .unwrap();
        match group_labels(&d, &LabelMap::cicids2017()).unwrap_err() {
            Error::UnknownLabel { label, row } => {
                assert_eq!(label, "Mystery");
                assert_eq!(row, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn class_count_sum_equals_row_count() {
        let schema = schema_abc();
        let rows = Array2::from_shape_vec((4, 2), vec![0.0; 8]).unwrap();
        let d = FlowDataset::new(
            schema,
            rows,
            vec!["a".into(), "b".into(), "a".into(), "c".into()],
        )
        .unwrap();
        let total: usize = d.class_counts().values().sum();
        assert_eq!(total, d.n_rows());
    }
}
