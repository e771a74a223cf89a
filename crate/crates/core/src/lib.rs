//! gm/ID sizing toolkit for a two-stage Miller-compensated op-amp.
//!
//! * [`device`]: analytic MOSFET surrogate and sizing-table generation
//! * [`lut`], [`lut_io`], [`charts`]: table lookup, inversion, persistence and chart series
//! * [`synth`]: the sizing procedure producing an [`AmpDesign`]
//! * [`verify`]: small-signal report, Bode sweep and spec compliance

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charts;
pub mod design;
pub mod device;
pub mod error;
pub mod kv;
pub mod lut;
pub mod lut_io;
pub mod spec;
pub mod synth;
pub mod verify;

pub use design::{AmpDesign, DeviceSize};
pub use device::{eval_device, generate_lut, DeviceMetrics, DeviceParams, Polarity, Sweep};
pub use error::{Error, Result, Stage};
pub use lut::{DeviceLut, Quantity};
pub use spec::AmpSpec;
pub use synth::{synthesize, SynthOptions};
pub use verify::{bode, report, AmpReport, BodePoint};
