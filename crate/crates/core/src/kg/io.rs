//! Triple-file loading and saving.
//!
//! The on-disk format is the usual KG dump layout: UTF-8 text, one triple
//! per line as `subject<TAB>predicate<TAB>object`, exactly two TABs, no
//! header. Duplicate lines collapse silently; a file with zero triples is
//! an error rather than a silently useless graph.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{GraphBuilder, KgError, KnowledgeGraph};

pub fn load_graph<R: BufRead>(reader: R) -> Result<KnowledgeGraph, KgError> {
    let mut b = GraphBuilder::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(s), Some(p), Some(o), None) if !s.is_empty() && !p.is_empty() && !o.is_empty() => {
                b.add(s, p, o);
            }
            _ => return Err(KgError::MalformedLine(idx + 1)),
        }
    }
    if b.is_empty() {
        return Err(KgError::EmptyGraph);
    }
    Ok(b.build())
}

pub fn load_graph_path<P: AsRef<Path>>(path: P) -> Result<KnowledgeGraph, KgError> {
    load_graph(BufReader::new(File::open(path)?))
}

/// Writes triples in canonical (s,p,o) order, so equal graphs always
/// serialize to identical bytes.
pub fn write_graph<W: Write>(graph: &KnowledgeGraph, mut w: W) -> Result<(), KgError> {
    for t in graph.iter() {
        writeln!(
            w,
            "{}\t{}\t{}",
            graph.entity_label(t.subject),
            graph.predicate_label(t.predicate),
            graph.entity_label(t.object)
        )?;
    }
    Ok(())
}

/// Loads a two-column `label<TAB>display name` file (the shape FB-style
/// dumps ship for mapping machine ids to readable names).
pub fn load_names<R: BufRead>(reader: R) -> Result<Vec<(String, String)>, KgError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        match line.split_once('\t') {
            Some((label, name)) if !label.is_empty() && !name.is_empty() && !name.contains('\t') => {
                out.push((label.to_owned(), name.to_owned()));
            }
            _ => return Err(KgError::MalformedLine(idx + 1)),
        }
    }
    Ok(out)
}

pub fn load_names_path<P: AsRef<Path>>(path: P) -> Result<Vec<(String, String)>, KgError> {
    load_names(BufReader::new(File::open(path)?))
}

/// Writes an old-label to new-label mapping as two TAB-separated columns.
pub fn write_label_map<W: Write>(mapping: &[(String, String)], mut w: W) -> Result<(), KgError> {
    for (old, new) in mapping {
        writeln!(w, "{old}\t{new}")?;
    }
    Ok(())
}
