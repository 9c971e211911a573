use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{normalize_text, CorpusError, Dataset, Label, LabeledExample, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    #[default]
    Tsv,
    Csv,
}

impl DataFormat {
    fn delimiter(self) -> u8 {
        match self {
            DataFormat::Tsv => b'\t',
            DataFormat::Csv => b',',
        }
    }

    /// Guesses from the file extension, defaulting to TSV.
    pub fn from_path(path: &Path) -> DataFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DataFormat::Csv,
            _ => DataFormat::Tsv,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            DataFormat::Tsv => "tsv",
            DataFormat::Csv => "csv",
        }
    }
}

impl FromStr for DataFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(DataFormat::Tsv),
            "csv" => Ok(DataFormat::Csv),
            other => Err(format!("unknown data format {other:?} (expected tsv or csv)")),
        }
    }
}

/// Maps label strings found in data files to binary classes. Several names may
/// map to the same class; the first name registered for a class is the one
/// used when writing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    entries: Vec<(String, Label)>,
}

impl LabelMap {
    pub fn new(positive: impl Into<String>, negative: impl Into<String>) -> Self {
        LabelMap { entries: vec![(positive.into(), Label::Positive), (negative.into(), Label::Negative)] }
    }

    /// The shared-task class names for `task`.
    pub fn for_task(task: Task) -> Self {
        let (p, n) = task.class_names();
        LabelMap::new(p, n)
    }

    /// `"1"` → positive, `"0"` → negative.
    pub fn numeric() -> Self {
        LabelMap::new("1", "0")
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (S, Label)>,
        S: Into<String>,
    {
        let mut entries: Vec<(String, Label)> = Vec::new();
        for (name, label) in pairs {
            let name = name.into();
            if entries.iter().any(|(n, _)| *n == name) {
                return Err(CorpusError::InvalidArgument(format!("label {name:?} mapped twice")));
            }
            entries.push((name, label));
        }
        let map = LabelMap { entries };
        for l in [Label::Positive, Label::Negative] {
            if map.name_of(l).is_none() {
                return Err(CorpusError::InvalidArgument(format!("no name for class {l}")));
            }
        }
        Ok(map)
    }

    pub fn get(&self, name: &str) -> Option<Label> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, l)| *l)
    }

    pub fn name_of(&self, label: Label) -> Option<&str> {
        self.entries.iter().find(|(_, l)| *l == label).map(|(n, _)| n.as_str())
    }

    pub fn positive_name(&self) -> &str {
        self.name_of(Label::Positive).expect("label map always names both classes")
    }

    pub fn negative_name(&self) -> &str {
        self.name_of(Label::Negative).expect("label map always names both classes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnlabeledExample {
    pub id: String,
    pub text: String,
}

struct Columns {
    id: usize,
    text: usize,
    label: Option<usize>,
}

fn reader(input: &str, format: DataFormat) -> csv::Reader<&[u8]> {
    let input = input.strip_prefix('\u{feff}').unwrap_or(input);
    let mut b = csv::ReaderBuilder::new();
    b.delimiter(format.delimiter()).has_headers(true).flexible(false);
    if format == DataFormat::Tsv {
        b.quoting(false);
    }
    b.from_reader(input.as_bytes())
}

fn csv_err(e: &csv::Error) -> CorpusError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".to_string(),
        _ => e.to_string(),
    };
    CorpusError::Parse { line, message }
}

fn header_columns(rdr: &mut csv::Reader<&[u8]>, need_label: bool) -> Result<Columns, CorpusError> {
    let headers = rdr.headers().map_err(|e| csv_err(&e))?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(CorpusError::Parse { line: 1, message: "missing header row".into() });
    }
    let find = |name: &str| -> Result<Option<usize>, CorpusError> {
        let mut hits = headers.iter().enumerate().filter(|(_, h)| h.trim() == name).map(|(i, _)| i);
        let first = hits.next();
        if hits.next().is_some() {
            return Err(CorpusError::Parse { line: 1, message: format!("duplicate column {name:?}") });
        }
        Ok(first)
    };
    let missing = |name: &str| CorpusError::Parse { line: 1, message: format!("header has no {name:?} column") };
    let id = find("id")?.ok_or_else(|| missing("id"))?;
    let text = find("text")?.ok_or_else(|| missing("text"))?;
    let label = find("label")?;
    if need_label && label.is_none() {
        return Err(missing("label"));
    }
    Ok(Columns { id, text, label })
}

/// Parses dataset text (the contents of a TSV or CSV file).
pub fn parse_dataset(
    input: &str,
    format: DataFormat,
    label_map: &LabelMap,
    name: &str,
    task: Task,
) -> Result<Dataset, CorpusError> {
    let mut rdr = reader(input, format);
    let cols = header_columns(&mut rdr, true)?;
    let label_col = cols.label.expect("checked by header_columns");
    let mut examples = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(&e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let id = rec[cols.id].trim().to_string();
        if id.is_empty() {
            return Err(CorpusError::Parse { line, message: "empty id".into() });
        }
        if seen.contains(&id) {
            return Err(CorpusError::DuplicateId { line, id });
        }
        let raw_label = rec[label_col].trim();
        let label = label_map
            .get(raw_label)
            .ok_or_else(|| CorpusError::UnknownLabel { line, label: raw_label.to_string() })?;
        let text = normalize_text(&rec[cols.text]);
        if text.is_empty() {
            return Err(CorpusError::EmptyText { line, id });
        }
        seen.insert(id.clone());
        examples.push(LabeledExample { id, text, label });
    }
    Ok(Dataset { name: name.to_string(), task, examples })
}

fn read_to_string(path: &Path) -> Result<String, CorpusError> {
    let bytes = fs::read(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    String::from_utf8(bytes).map_err(|e| {
        let valid = &e.as_bytes()[..e.utf8_error().valid_up_to()];
        let line = valid.iter().filter(|b| **b == b'\n').count() as u64 + 1;
        CorpusError::Parse { line, message: "invalid UTF-8".into() }
    })
}

/// Loads a labeled dataset. The dataset name is the file stem.
pub fn load_dataset(path: &Path, format: DataFormat, label_map: &LabelMap, task: Task) -> Result<Dataset, CorpusError> {
    let input = read_to_string(path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    parse_dataset(&input, format, label_map, name, task)
}

/// Parses a file that needs only `id` and `text` columns (a `label` column, if
/// present, is ignored). Used for unlabeled test sets.
pub fn parse_unlabeled(input: &str, format: DataFormat) -> Result<Vec<UnlabeledExample>, CorpusError> {
    let mut rdr = reader(input, format);
    let cols = header_columns(&mut rdr, false)?;
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(&e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let id = rec[cols.id].trim().to_string();
        if id.is_empty() {
            return Err(CorpusError::Parse { line, message: "empty id".into() });
        }
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId { line, id });
        }
        let text = normalize_text(&rec[cols.text]);
        if text.is_empty() {
            return Err(CorpusError::EmptyText { line, id });
        }
        out.push(UnlabeledExample { id, text });
    }
    Ok(out)
}

pub fn load_unlabeled(path: &Path, format: DataFormat) -> Result<Vec<UnlabeledExample>, CorpusError> {
    parse_unlabeled(&read_to_string(path)?, format)
}

/// Writes `dataset` with header `id,text,label` and labels rendered through
/// `label_map`.
pub fn write_dataset(dataset: &Dataset, path: &Path, format: DataFormat, label_map: &LabelMap) -> Result<(), CorpusError> {
    let io_err = |source: std::io::Error| CorpusError::Io { path: path.to_path_buf(), source };
    let mut b = csv::WriterBuilder::new();
    b.delimiter(format.delimiter());
    if format == DataFormat::Tsv {
        b.quote_style(csv::QuoteStyle::Never);
    }
    let mut w = b.from_path(path).map_err(|e| io_err(std::io::Error::other(e)))?;
    let write = |w: &mut csv::Writer<fs::File>, rec: [&str; 3]| {
        if format == DataFormat::Tsv && rec.iter().any(|f| f.contains(['\t', '\n', '\r'])) {
            return Err(CorpusError::InvalidArgument(format!(
                "field {:?} cannot be written to TSV unquoted",
                rec[0]
            )));
        }
        w.write_record(rec).map_err(|e| io_err(std::io::Error::other(e)))
    };
    write(&mut w, ["id", "text", "label"])?;
    for ex in dataset.examples() {
        let name = label_map
            .name_of(ex.label)
            .ok_or_else(|| CorpusError::InvalidArgument(format!("no name for class {}", ex.label)))?;
        write(&mut w, [&ex.id, &ex.text, name])?;
    }
    w.flush().map_err(io_err)
}
