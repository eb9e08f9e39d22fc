//! Envelope power spectrum (EPS) RF fingerprinting.
//!
//! A carrier frequency offset between a transmitter and receiver turns the
//! envelope of the received I and Q components into a rectified sinusoid whose
//! hump rate is twice the offset. The normalized, DC-free power spectrum of that
//! envelope is a compact device fingerprint that is largely blind to the channel,
//! the distance and the received power.
//!
//! The crate is organized as a pipeline:
//!
//! - [`signal`]: sample types, seeded random streams, spectra, Hilbert transforms and FIR design.
//! - [`device`]: synthetic transmitters with CFO warm-up drift, phase noise, IQ imbalance and DC offset.
//! - [`channel`]: path loss, sparse multipath and AWGN for named capture domains.
//! - [`eps`]: envelope extraction and the EPS feature itself, plus the raw-IQ baseline feature.
//! - [`classifier`]: nearest-centroid, k-NN and softmax classifiers with stratified cross-validation.
//! - [`dataset`]: IQ recordings, packet detection and feature-set files.
//! - [`eval`]: scenario files and the `simulate`/`extract`/`evaluate`/`warmup`/`report` commands.
//!
//! Runnable walkthroughs of each stage live in the crate's `examples/` directory.

pub mod channel;
pub mod classifier;
pub mod dataset;
pub mod device;
pub mod eps;
pub mod error;
pub mod eval;
pub mod signal;

pub use error::{Error, Result};
