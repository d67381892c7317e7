//! Trace export: newline-delimited JSON, one event per line, preceded by a
//! schema-version header.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::core::TraceEvent;
use crate::error::{GBoostError, Result};

pub const TRACE_SCHEMA: &str = "gboost-trace/1";

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
}

pub fn export_trace(events: &[TraceEvent], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{}", serde_json::to_string(&Header { schema: TRACE_SCHEMA.to_string() })?)?;
    for ev in events {
        writeln!(f, "{}", serde_json::to_string(ev)?)?;
    }
    Ok(())
}

pub fn import_trace(path: &Path) -> Result<Vec<TraceEvent>> {
    let f = std::fs::File::open(path)?;
    let mut lines = BufReader::new(f).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| GBoostError::Protocol("empty trace file".into()))??;
    let header: Header = serde_json::from_str(&header_line)?;
    if header.schema != TRACE_SCHEMA {
        return Err(GBoostError::Protocol(format!("unknown trace schema '{}'", header.schema)));
    }
    let mut events = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line)?);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{ActionKind, NodeId, TokenId};

    fn event(i: usize) -> TraceEvent {
        TraceEvent {
            iteration: i,
            selected_path: vec![NodeId(0), NodeId(i)],
            expanded_from: NodeId(0),
            action: ActionKind::Collaborative,
            new_node: NodeId(i),
            sampled_tokens: vec![TokenId(5), TokenId(0)],
            reward: 0.25 * i as f64 / 10.0,
            updated_values: vec![(NodeId(i), 0.5, 1), (NodeId(0), 0.5, i as u64)],
        }
    }

    #[test]
    fn empty_trace_has_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ndjson");
        export_trace(&[], &path).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert_eq!(content.lines().count(), 1);
        assert!(import_trace(&path).unwrap().is_empty());
    }

    #[test]
    fn round_trip() {
        let events: Vec<_> = (1..=5).map(event).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ndjson");
        export_trace(&events, &path).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert_eq!(content.lines().count(), 6);
        assert_eq!(import_trace(&path).unwrap(), events);
    }

    #[test]
    fn bad_schema_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ndjson");
        std::fs::write(&path, "{\"schema\":\"other/9\"}\n").unwrap();
        assert!(import_trace(&path).is_err());
    }
}
