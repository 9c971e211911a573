//! Shared-task submission files: CSV with header `id,label`, one row per
//! test example in input order, labels written as class names.

use std::fs;
use std::path::Path;

use super::{RunError, Stage};
use crate::corpus::{Label, LabelMap};

/// Renders a submission. Fails on an empty list or mismatched lengths.
pub fn emit_submission(ids: &[String], predictions: &[Label], labels: &LabelMap) -> Result<String, RunError> {
    if ids.is_empty() {
        return Err(RunError::at(Stage::Evaluate, "submission has no rows"));
    }
    if ids.len() != predictions.len() {
        return Err(RunError::at(
            Stage::Evaluate,
            format!("{} ids but {} predictions", ids.len(), predictions.len()),
        ));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let write_err = |e: csv::Error| RunError::at(Stage::Write, e);
    w.write_record(["id", "label"]).map_err(write_err)?;
    for (id, &label) in ids.iter().zip(predictions) {
        let name = labels.name_of(label).expect("label map names both classes");
        w.write_record([id.as_str(), name]).map_err(write_err)?;
    }
    let bytes = w.into_inner().map_err(|e| RunError::at(Stage::Write, e.error()))?;
    Ok(String::from_utf8(bytes).expect("inputs were UTF-8"))
}

/// [`emit_submission`] to a file. Nothing is written on error.
pub fn write_submission(ids: &[String], predictions: &[Label], path: &Path, labels: &LabelMap) -> Result<(), RunError> {
    let text = emit_submission(ids, predictions, labels)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| RunError::at(Stage::Write, format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| RunError::at(Stage::Write, format!("{}: {e}", path.display())))
}

/// Reads a submission back.
pub fn parse_submission(input: &str, labels: &LabelMap) -> Result<Vec<(String, Label)>, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(input.as_bytes());
    let headers = rdr.headers().map_err(|e| e.to_string())?;
    if headers.len() != 2 || &headers[0] != "id" || &headers[1] != "label" {
        return Err("header must be id,label".into());
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| e.to_string())?;
        let line = record.position().map_or(0, |p| p.line());
        let label = labels.get(&record[1]).ok_or_else(|| format!("line {line}: unknown label {:?}", &record[1]))?;
        rows.push((record[0].to_string(), label));
    }
    if rows.is_empty() {
        return Err("submission has no rows".into());
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn round_trip_with_awkward_ids() {
        let map = LabelMap::new("Abusive", "Non-Abusive");
        let ids = ids(&["a,1", "b\"2", "c"]);
        let preds = [Label::Positive, Label::Negative, Label::Positive];
        let text = emit_submission(&ids, &preds, &map).unwrap();
        assert!(text.starts_with("id,label\n"));
        let back = parse_submission(&text, &map).unwrap();
        assert_eq!(back, ids.into_iter().zip(preds).collect::<Vec<_>>());
    }

    #[test]
    fn empty_and_mismatched_inputs_fail_without_writing() {
        let map = LabelMap::new("T", "N");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub.csv");
        assert!(write_submission(&[], &[], &path, &map).is_err());
        assert!(write_submission(&ids(&["a", "b"]), &[Label::Positive], &path, &map).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn parse_rejects_unknown_labels() {
        let map = LabelMap::new("T", "N");
        assert!(parse_submission("id,label\na,X\n", &map).is_err());
        assert!(parse_submission("id,score\na,T\n", &map).is_err());
    }
}
