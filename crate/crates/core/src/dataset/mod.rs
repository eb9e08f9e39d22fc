//! On-disk formats and capture processing: headerless IQ recordings with JSON
//! sidecars, energy-based packet detection, and feature-set files.
//!
//! Every sidecar carries `format_version`, currently 1.

mod features;
mod packets;
mod recording;

use std::path::{Path, PathBuf};

pub use features::{
    append_feature_set, read_feature_meta, read_feature_set, write_feature_csv, write_feature_set,
    FeatureSetMeta,
};
pub use packets::{
    detect_packets, detect_packets_with, Packet, PacketIndex, DEFAULT_SMOOTHING_WINDOW,
};
pub use recording::{
    read_recording, read_recording_range, write_recording, RecordingMeta, RecordingReader,
    RecordingWriter,
};

pub const FORMAT_VERSION: u32 = 1;

/// JSON sidecar next to a data file: same stem, `.json` extension.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}
