//! The registry's persistence: one append-only record file. Each record is
//! `type u8 ‖ len u32be ‖ body`; the registry replays the file on open and
//! only ever appends. Torn trailing writes are detected and truncated away.

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Submission = 1,
    Publication = 2,
    Amendment = 3,
    AltSubmission = 4,
    AltPublication = 5,
}

impl RecordKind {
    fn from_u8(v: u8) -> Option<RecordKind> {
        match v {
            1 => Some(RecordKind::Submission),
            2 => Some(RecordKind::Publication),
            3 => Some(RecordKind::Amendment),
            4 => Some(RecordKind::AltSubmission),
            5 => Some(RecordKind::AltPublication),
            _ => None,
        }
    }
}

/// Replayable records: kind plus body, in file order.
pub type Records = Vec<(RecordKind, Vec<u8>)>;

pub struct LogFile {
    file: File,
    path: PathBuf,
}

impl LogFile {
    /// Opens (creating if absent) and returns the replayable records.
    pub fn open(path: &Path) -> io::Result<(LogFile, Records)> {
        let mut file = OpenOptions::new()
            .read(true)
            .create(true)
            .append(true)
            .open(path)?;
        let mut bytes = Vec::new();
        file.seek(SeekFrom::Start(0))?;
        file.read_to_end(&mut bytes)?;

        let mut records: Records = Vec::new();
        let mut offset = 0usize;
        let mut valid_end = 0usize;
        while bytes.len() - offset >= 5 {
            let kind = RecordKind::from_u8(bytes[offset]);
            let len =
                u32::from_be_bytes(bytes[offset + 1..offset + 5].try_into().unwrap()) as usize;
            let Some(kind) = kind else { break };
            if bytes.len() - offset - 5 < len {
                break;
            }
            records.push((kind, bytes[offset + 5..offset + 5 + len].to_vec()));
            offset += 5 + len;
            valid_end = offset;
        }
        if valid_end < bytes.len() {
            // Torn tail from an interrupted write: drop it.
            file.set_len(valid_end as u64)?;
        }
        file.seek(SeekFrom::End(0))?;
        Ok((
            LogFile {
                file,
                path: path.to_path_buf(),
            },
            records,
        ))
    }

    pub fn append(&mut self, kind: RecordKind, body: &[u8]) -> io::Result<()> {
        let mut buf = Vec::with_capacity(5 + body.len());
        buf.push(kind as u8);
        buf.extend_from_slice(&(body.len() as u32).to_be_bytes());
        buf.extend_from_slice(body);
        self.file.write_all(&buf)?;
        self.file.flush()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_path(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("pact-logfile-test");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn append_and_replay() {
        let path = temp_path("basic.log");
        std::fs::remove_file(&path).ok();
        {
            let (mut log, records) = LogFile::open(&path).unwrap();
            assert!(records.is_empty());
            log.append(RecordKind::Submission, b"one").unwrap();
            log.append(RecordKind::Publication, b"two").unwrap();
        }
        let (_, records) = LogFile::open(&path).unwrap();
        assert_eq!(
            records,
            vec![
                (RecordKind::Submission, b"one".to_vec()),
                (RecordKind::Publication, b"two".to_vec()),
            ]
        );
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn torn_tail_is_truncated() {
        let path = temp_path("torn.log");
        std::fs::remove_file(&path).ok();
        {
            let (mut log, _) = LogFile::open(&path).unwrap();
            log.append(RecordKind::Submission, b"whole").unwrap();
        }
        // Simulate a torn write.
        {
            let mut f = OpenOptions::new().append(true).open(&path).unwrap();
            f.write_all(&[1, 0, 0, 0, 99, 1, 2, 3]).unwrap();
        }
        let (mut log, records) = LogFile::open(&path).unwrap();
        assert_eq!(records.len(), 1);
        log.append(RecordKind::Amendment, b"after").unwrap();
        drop(log);
        let (_, records) = LogFile::open(&path).unwrap();
        assert_eq!(records.len(), 2);
        std::fs::remove_file(&path).ok();
    }
}
