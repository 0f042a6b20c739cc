//! Line-delimited record persistence: one JSON object per line, appended.

use super::{HarnessError, MatchRecord};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub fn persist(records: &[MatchRecord], path: &Path) -> Result<(), HarnessError> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut writer = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut writer, record).map_err(|e| HarnessError::MalformedRecord {
            line: 0,
            message: e.to_string(),
        })?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Vec<MatchRecord>, HarnessError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: MatchRecord =
            serde_json::from_str(&line).map_err(|e| HarnessError::MalformedRecord {
                line: i + 1,
                message: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{utt, Verdict};
    use crate::harness::{RecordedStage, RECORD_VERSION};

    fn record(seed: u64) -> MatchRecord {
        MatchRecord {
            record_version: RECORD_VERSION,
            config_digest: "d".into(),
            arm: "arm".into(),
            seed,
            agent_x: "naive".into(),
            agent_y: "naive".into(),
            t_x: "Prosecutor".into(),
            t_y: "Defence".into(),
            seed_text: Vec::new(),
            stages: vec![RecordedStage {
                x: utt(["q"]),
                y: utt(["a"]),
                verdict: Verdict::Zero,
            }],
            terminal_verdict: Verdict::Zero,
            desired_x_verdict: Verdict::One,
            payoff_x: -1.0,
            payoff_y: 1.0,
            nondeterministic: false,
            classifier: None,
            audit: Vec::new(),
            failed: None,
            wall_time_ms: 123,
        }
    }

    #[test]
    fn round_trip_three_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let records = vec![record(0), record(1), record(2)];
        persist(&records, &path).unwrap();
        assert_eq!(load(&path).unwrap(), records);
        // appending keeps earlier lines
        persist(&records[..1], &path).unwrap();
        assert_eq!(load(&path).unwrap().len(), 4);
    }

    #[test]
    fn empty_file_loads_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(load(&path).unwrap().is_empty());
    }

    #[test]
    fn corrupted_line_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let good = serde_json::to_string(&record(0)).unwrap();
        std::fs::write(&path, format!("{good}\nnot json\n{good}\n")).unwrap();
        match load(&path) {
            Err(HarnessError::MalformedRecord { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a malformed-record error, got {other:?}"),
        }
    }

    #[test]
    fn wall_time_is_not_serialized() {
        let a = record(0);
        let mut b = record(0);
        b.wall_time_ms = 999;
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let text = serde_json::to_string(&a).unwrap();
        assert!(!text.contains("wall_time"));
        assert!(text.contains("\"record_version\":1"));
    }
}
