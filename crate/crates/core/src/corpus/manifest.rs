//! Corpus manifest: a CSV of `path,label` rows pointing at text files.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::{CorpusError, Label, RawDocument};

/// Load every document named by the manifest. Paths resolve relative to the
/// manifest's directory. Ids are `{row:03}_{file_stem}` so corpus order is
/// reproducible and stable under re-sorting.
pub fn load_corpus(manifest_path: &Path) -> Result<Vec<RawDocument>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(manifest_path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                CorpusError::MissingFile(manifest_path.display().to_string())
            }
            _ => CorpusError::Csv(e),
        })?;

    {
        let headers = reader.headers()?;
        let got: Vec<&str> = headers.iter().collect();
        if got != ["path", "label"] {
            return Err(CorpusError::BadHeader(got.join(",")));
        }
    }

    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();

    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .position()
            .map(|p| p.line())
            .unwrap_or(idx as u64 + 2);
        let rel = record.get(0).unwrap_or("");
        let label_field = record.get(1).unwrap_or("");
        let label = Label::parse(label_field).ok_or_else(|| CorpusError::BadLabel {
            row,
            value: label_field.to_string(),
        })?;

        let path = base.join(rel);
        let text = fs::read_to_string(&path)
            .map_err(|_| CorpusError::MissingFile(path.display().to_string()))?;

        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "doc".to_string());
        let id = format!("{:03}_{}", idx, stem);
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id));
        }
        docs.push(RawDocument {
            id,
            label,
            text,
            source_path: path.display().to_string(),
        });
    }
    Ok(docs)
}
