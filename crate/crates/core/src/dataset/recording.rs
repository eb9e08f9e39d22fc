use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{sidecar_path, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::signal::{ComplexSample, IqFrame};

const BYTES_PER_SAMPLE: u64 = 8;

/// Sidecar of a headerless recording of interleaved little-endian f32 I/Q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub format_version: u32,
    pub sample_rate_hz: f64,
    pub center_freq_hz: f64,
    pub device_id: Option<String>,
    pub domain_tag: String,
    pub capture_time_s: f64,
    pub sample_count: u64,
}

impl RecordingMeta {
    pub fn for_frame(frame: &IqFrame) -> Self {
        RecordingMeta {
            format_version: FORMAT_VERSION,
            sample_rate_hz: frame.sample_rate_hz,
            center_freq_hz: frame.center_freq_hz,
            device_id: frame.device_id.clone(),
            domain_tag: frame.domain_tag.clone(),
            capture_time_s: frame.capture_time_s,
            sample_count: frame.len() as u64,
        }
    }

    fn frame(&self, samples: Vec<ComplexSample>) -> IqFrame {
        IqFrame {
            samples,
            sample_rate_hz: self.sample_rate_hz,
            center_freq_hz: self.center_freq_hz,
            device_id: self.device_id.clone(),
            capture_time_s: self.capture_time_s,
            domain_tag: self.domain_tag.clone(),
        }
    }
}

fn encode(samples: &[ComplexSample], out: &mut Vec<u8>) {
    for s in samples {
        out.extend_from_slice(&(s.re as f32).to_le_bytes());
        out.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
}

/// Decodes samples; `first_index` only labels non-finite diagnostics.
fn decode(bytes: &[u8], first_index: u64) -> Result<Vec<ComplexSample>> {
    bytes
        .chunks_exact(BYTES_PER_SAMPLE as usize)
        .enumerate()
        .map(|(k, c)| {
            let i = f32::from_le_bytes(c[..4].try_into().expect("4 bytes"));
            let q = f32::from_le_bytes(c[4..].try_into().expect("4 bytes"));
            if !(i.is_finite() && q.is_finite()) {
                return Err(Error::NonFinite {
                    index: (first_index + k as u64) as usize,
                });
            }
            Ok(ComplexSample::new(f64::from(i), f64::from(q)))
        })
        .collect()
}

/// Writes a whole frame as one recording.
pub fn write_recording(path: &Path, frame: &IqFrame) -> Result<()> {
    frame.validate()?;
    let mut w = RecordingWriter::create(path, RecordingMeta::for_frame(frame))?;
    w.write_samples(&frame.samples)?;
    w.finish()?;
    Ok(())
}

/// Streams samples into a recording; the sidecar is written by [`finish`](Self::finish).
pub struct RecordingWriter {
    path: PathBuf,
    out: BufWriter<File>,
    meta: RecordingMeta,
    written: u64,
    scratch: Vec<u8>,
}

impl RecordingWriter {
    /// `meta.sample_count` is ignored and replaced by the number of samples written.
    pub fn create(path: &Path, meta: RecordingMeta) -> Result<Self> {
        if !(meta.sample_rate_hz > 0.0) {
            return Err(Error::invalid("recording sample rate must be > 0"));
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(RecordingWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
            meta,
            written: 0,
            scratch: Vec::new(),
        })
    }

    /// Appends samples and returns the sample offset they start at.
    pub fn write_samples(&mut self, samples: &[ComplexSample]) -> Result<u64> {
        if let Some(k) = samples
            .iter()
            .position(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::NonFinite {
                index: (self.written + k as u64) as usize,
            });
        }
        self.scratch.clear();
        encode(samples, &mut self.scratch);
        self.out
            .write_all(&self.scratch)
            .map_err(|e| Error::io(&self.path, e))?;
        let offset = self.written;
        self.written += samples.len() as u64;
        Ok(offset)
    }

    pub fn finish(mut self) -> Result<RecordingMeta> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))?;
        self.meta.sample_count = self.written;
        self.meta.format_version = FORMAT_VERSION;
        let side = sidecar_path(&self.path);
        let json = serde_json::to_vec_pretty(&self.meta).map_err(|e| Error::json(&side, e))?;
        std::fs::write(&side, json).map_err(|e| Error::io(&side, e))?;
        Ok(self.meta)
    }
}

/// Random-access reader over a recording, validated against its sidecar on open.
pub struct RecordingReader {
    path: PathBuf,
    file: BufReader<File>,
    pub meta: RecordingMeta,
}

impl RecordingReader {
    pub fn open(path: &Path) -> Result<Self> {
        let side = sidecar_path(path);
        let json = std::fs::read(&side).map_err(|e| Error::io(&side, e))?;
        let meta: RecordingMeta =
            serde_json::from_slice(&json).map_err(|e| Error::json(&side, e))?;
        if meta.format_version != FORMAT_VERSION {
            return Err(Error::format(
                &side,
                format!("unsupported format_version {}", meta.format_version),
            ));
        }
        if !(meta.sample_rate_hz > 0.0) {
            return Err(Error::format(&side, "sample_rate_hz must be > 0"));
        }
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
        if len % BYTES_PER_SAMPLE != 0 {
            let whole = len / BYTES_PER_SAMPLE * BYTES_PER_SAMPLE;
            return Err(Error::format(
                path,
                format!(
                    "{len} bytes is not a whole number of I/Q samples; partial sample starts at byte offset {whole}"
                ),
            ));
        }
        if len / BYTES_PER_SAMPLE != meta.sample_count {
            return Err(Error::format(
                path,
                format!(
                    "sidecar sample_count {} disagrees with file size ({} samples)",
                    meta.sample_count,
                    len / BYTES_PER_SAMPLE
                ),
            ));
        }
        Ok(RecordingReader {
            path: path.to_path_buf(),
            file: BufReader::new(file),
            meta,
        })
    }

    pub fn sample_count(&self) -> u64 {
        self.meta.sample_count
    }

    /// `len` samples starting at sample `offset`.
    pub fn read_range(&mut self, offset: u64, len: u64) -> Result<IqFrame> {
        let end = offset
            .checked_add(len)
            .filter(|&e| e <= self.meta.sample_count);
        if end.is_none() {
            return Err(Error::invalid(format!(
                "range {offset}+{len} exceeds {} samples in {}",
                self.meta.sample_count,
                self.path.display()
            )));
        }
        self.file
            .seek(SeekFrom::Start(offset * BYTES_PER_SAMPLE))
            .map_err(|e| Error::io(&self.path, e))?;
        let mut buf = vec![0u8; (len * BYTES_PER_SAMPLE) as usize];
        self.file
            .read_exact(&mut buf)
            .map_err(|e| Error::io(&self.path, e))?;
        Ok(self.meta.frame(decode(&buf, offset)?))
    }

    /// Consecutive frames of `frame_len` samples; a trailing partial frame is dropped.
    pub fn frames(&mut self, frame_len: u64) -> impl Iterator<Item = Result<IqFrame>> + '_ {
        let n = if frame_len == 0 {
            0
        } else {
            self.meta.sample_count / frame_len
        };
        (0..n).map(move |k| self.read_range(k * frame_len, frame_len))
    }
}

/// The whole capture as one frame.
pub fn read_recording(path: &Path) -> Result<IqFrame> {
    let mut r = RecordingReader::open(path)?;
    let n = r.sample_count();
    r.read_range(0, n)
}

pub fn read_recording_range(path: &Path, offset: u64, len: u64) -> Result<IqFrame> {
    RecordingReader::open(path)?.read_range(offset, len)
}
