//! Crash-safe per-subscriber FIFO backed by an append-only journal.
//!
//! Records are a little-endian `u32` length followed by the payload. A small
//! checkpoint file names the live journal generation and the byte offset up
//! to which records were delivered or dropped. Compaction starts a new
//! generation once everything has been delivered.

use std::collections::VecDeque;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
struct Checkpoint {
    generation: u64,
    offset: u64,
    dropped: u64,
}

#[derive(Debug)]
pub struct OfflineQueue {
    dir: PathBuf,
    subscriber: String,
    capacity: usize,
    checkpoint: Checkpoint,
    /// Pending records with the journal offset just past each one.
    pending: VecDeque<(u64, Vec<u8>)>,
    end: u64,
    journal: File,
}

impl OfflineQueue {
    /// Opens or recovers the queue for `subscriber` under `dir`.
    pub fn open(dir: &Path, subscriber: &str, capacity: usize) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let cp_path = checkpoint_path(dir, subscriber);
        let checkpoint = match fs::read(&cp_path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Checkpoint::default(),
            Err(e) => return Err(e),
        };
        remove_stale_generations(dir, subscriber, checkpoint.generation)?;

        let path = journal_path(dir, subscriber, checkpoint.generation);
        let mut bytes = Vec::new();
        if let Ok(mut f) = File::open(&path) {
            f.read_to_end(&mut bytes)?;
        }
        let mut pending = VecDeque::new();
        let mut pos = 0usize;
        let mut valid_end = 0usize;
        while pos + 4 <= bytes.len() {
            let len = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
            let end = pos + 4 + len;
            if end > bytes.len() {
                break;
            }
            if end as u64 > checkpoint.offset {
                pending.push_back((end as u64, bytes[pos + 4..end].to_vec()));
            }
            pos = end;
            valid_end = end;
        }
        let journal = OpenOptions::new().create(true).append(true).open(&path)?;
        // a torn tail from a crash mid-append is discarded
        if valid_end < bytes.len() {
            journal.set_len(valid_end as u64)?;
        }
        Ok(OfflineQueue {
            dir: dir.to_path_buf(),
            subscriber: subscriber.to_string(),
            capacity: capacity.max(1),
            checkpoint,
            pending,
            end: valid_end as u64,
            journal,
        })
    }

    pub fn subscriber(&self) -> &str {
        &self.subscriber
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    /// Records lost to the capacity limit since the queue was created.
    pub fn dropped(&self) -> u64 {
        self.checkpoint.dropped
    }

    pub fn enqueue(&mut self, payload: &[u8]) -> io::Result<()> {
        let len = u32::try_from(payload.len())
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "record too large"))?;
        let mut record = Vec::with_capacity(4 + payload.len());
        record.extend_from_slice(&len.to_le_bytes());
        record.extend_from_slice(payload);
        self.journal.write_all(&record)?;
        self.journal.sync_data()?;
        self.end += record.len() as u64;
        self.pending.push_back((self.end, payload.to_vec()));
        if self.pending.len() > self.capacity {
            let (end, _) = self.pending.pop_front().expect("over capacity");
            self.checkpoint.offset = end;
            self.checkpoint.dropped += 1;
            self.write_checkpoint()?;
        }
        Ok(())
    }

    /// Hands back every pending record in FIFO order and marks them delivered.
    pub fn drain(&mut self) -> io::Result<Vec<Vec<u8>>> {
        if self.pending.is_empty() {
            return Ok(Vec::new());
        }
        let out: Vec<Vec<u8>> = self.pending.drain(..).map(|(_, p)| p).collect();
        self.compact()?;
        Ok(out)
    }

    fn compact(&mut self) -> io::Result<()> {
        let old = journal_path(&self.dir, &self.subscriber, self.checkpoint.generation);
        self.checkpoint.generation += 1;
        self.checkpoint.offset = 0;
        let path = journal_path(&self.dir, &self.subscriber, self.checkpoint.generation);
        self.journal = OpenOptions::new().create(true).append(true).open(path)?;
        self.end = 0;
        self.write_checkpoint()?;
        let _ = fs::remove_file(old);
        Ok(())
    }

    fn write_checkpoint(&self) -> io::Result<()> {
        let path = checkpoint_path(&self.dir, &self.subscriber);
        let tmp = path.with_extension("tmp");
        let mut f = File::create(&tmp)?;
        f.write_all(&serde_json::to_vec(&self.checkpoint).expect("checkpoint serializes"))?;
        f.sync_data()?;
        fs::rename(tmp, path)
    }
}

fn journal_path(dir: &Path, subscriber: &str, generation: u64) -> PathBuf {
    dir.join(format!("{subscriber}.{generation}.journal"))
}

fn checkpoint_path(dir: &Path, subscriber: &str) -> PathBuf {
    dir.join(format!("{subscriber}.checkpoint"))
}

fn remove_stale_generations(dir: &Path, subscriber: &str, live: u64) -> io::Result<()> {
    let prefix = format!("{subscriber}.");
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name();
        let Some(name) = name.to_str() else { continue };
        let Some(gen) = name
            .strip_prefix(&prefix)
            .and_then(|r| r.strip_suffix(".journal"))
            .and_then(|g| g.parse::<u64>().ok())
        else {
            continue;
        };
        if gen != live {
            fs::remove_file(dir.join(name))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fifo_drain() {
        let dir = tempfile::tempdir().unwrap();
        let mut q = OfflineQueue::open(dir.path(), "caregiver", 100).unwrap();
        assert_eq!(q.drain().unwrap(), Vec::<Vec<u8>>::new());
        for i in 0..5u8 {
            q.enqueue(&[i]).unwrap();
        }
        assert_eq!(
            q.drain().unwrap(),
            (0..5u8).map(|i| vec![i]).collect::<Vec<_>>()
        );
        assert!(q.is_empty());
    }

    #[test]
    fn survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut q = OfflineQueue::open(dir.path(), "caregiver", 100).unwrap();
            q.enqueue(b"one").unwrap();
            q.drain().unwrap();
            q.enqueue(b"two").unwrap();
            q.enqueue(b"three").unwrap();
        }
        let mut q = OfflineQueue::open(dir.path(), "caregiver", 100).unwrap();
        assert_eq!(q.drain().unwrap(), vec![b"two".to_vec(), b"three".to_vec()]);
        let mut q = OfflineQueue::open(dir.path(), "caregiver", 100).unwrap();
        assert!(q.drain().unwrap().is_empty());
    }

    #[test]
    fn torn_tail_is_discarded() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut q = OfflineQueue::open(dir.path(), "patient", 100).unwrap();
            q.enqueue(b"whole").unwrap();
        }
        let path = journal_path(dir.path(), "patient", 0);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(&[9, 0, 0, 0, b'x']).unwrap();
        drop(f);
        let mut q = OfflineQueue::open(dir.path(), "patient", 100).unwrap();
        q.enqueue(b"next").unwrap();
        drop(q);
        let mut q = OfflineQueue::open(dir.path(), "patient", 100).unwrap();
        assert_eq!(
            q.drain().unwrap(),
            vec![b"whole".to_vec(), b"next".to_vec()]
        );
    }

    #[test]
    fn capacity_drops_oldest_and_counts() {
        let dir = tempfile::tempdir().unwrap();
        let mut q = OfflineQueue::open(dir.path(), "caregiver", 2).unwrap();
        for i in 0..5u8 {
            q.enqueue(&[i]).unwrap();
        }
        assert_eq!(q.dropped(), 3);
        drop(q);
        let mut q = OfflineQueue::open(dir.path(), "caregiver", 2).unwrap();
        assert_eq!(q.dropped(), 3);
        assert_eq!(q.drain().unwrap(), vec![vec![3], vec![4]]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn delivered_is_enqueued_minus_drops(
            ops in proptest::collection::vec(prop_oneof![
                (0u16..1000).prop_map(Some),
                Just(None),
            ], 1..60),
            capacity in 1usize..8,
            reopen_every in 1usize..10,
        ) {
            let dir = tempfile::tempdir().unwrap();
            let mut q = OfflineQueue::open(dir.path(), "s", capacity).unwrap();
            let mut enqueued = Vec::new();
            let mut delivered = Vec::new();
            for (i, op) in ops.iter().enumerate() {
                match op {
                    Some(v) => { q.enqueue(&v.to_le_bytes()).unwrap(); enqueued.push(*v); }
                    None => delivered.extend(q.drain().unwrap()),
                }
                if i % reopen_every == 0 {
                    drop(q);
                    q = OfflineQueue::open(dir.path(), "s", capacity).unwrap();
                }
            }
            delivered.extend(q.drain().unwrap());
            let delivered: Vec<u16> = delivered
                .iter()
                .map(|b| u16::from_le_bytes([b[0], b[1]]))
                .collect();
            prop_assert_eq!(delivered.len() as u64 + q.dropped(), enqueued.len() as u64);
            // order is preserved: delivered is a subsequence of enqueued
            let mut it = enqueued.iter();
            for d in &delivered {
                prop_assert!(it.any(|e| e == d));
            }
        }
    }
}
