use std::fmt;

use thiserror::Error;

/// Grid axis of a sizing table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Length,
    GateVoltage,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Length => f.write_str("l"),
            Axis::GateVoltage => f.write_str("vgs"),
        }
    }
}

/// Synthesis step, used to tag failures with the stage that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Noise,
    Compensation,
    Slew,
    InputPair,
    ActiveLoad,
    SecondStageCurrent,
    PhaseMargin,
    SecondStage,
    TailSource,
    Mirror,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Noise => "noise (gm12)",
            Stage::Compensation => "compensation (Cc)",
            Stage::Slew => "slew (tail current)",
            Stage::InputPair => "input pair (M1/M2)",
            Stage::ActiveLoad => "active load (M3/M4)",
            Stage::SecondStageCurrent => "second-stage current (Id6)",
            Stage::PhaseMargin => "phase margin (alpha)",
            Stage::SecondStage => "second stage (M6)",
            Stage::TailSource => "tail source (M5)",
            Stage::Mirror => "bias mirror (M7/M8)",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{axis} = {value} is outside the table range [{min}, {max}]")]
    OutOfRange {
        axis: Axis,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error(
        "gm/id target {target} 1/V is not achievable at l = {l} m (achievable [{min}, {max}] 1/V)"
    )]
    InfeasibleTarget {
        l: f64,
        target: f64,
        min: f64,
        max: f64,
    },

    #[error("no grid length reaches gm/gds >= {required} (best {best} at l = {best_l} m)")]
    InfeasibleGain {
        required: f64,
        best: f64,
        best_l: f64,
    },

    #[error("phase margin {0} deg is not reachable with alpha >= 0")]
    InfeasiblePhaseMargin(f64),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("{device}: {source}")]
    Device {
        device: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// True for errors caused by an unreachable target rather than bad input.
    pub fn is_infeasible(&self) -> bool {
        match self {
            Error::InfeasibleTarget { .. }
            | Error::InfeasibleGain { .. }
            | Error::InfeasiblePhaseMargin(_) => true,
            Error::Stage { source, .. } | Error::Device { source, .. } => source.is_infeasible(),
            _ => false,
        }
    }

    /// Innermost error, skipping stage/device tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } | Error::Device { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait ResultExt<T> {
    fn at_stage(self, stage: Stage) -> Result<T>;
    fn for_device(self, device: &'static str) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn at_stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }

    fn for_device(self, device: &'static str) -> Result<T> {
        self.map_err(|e| Error::Device {
            device,
            source: Box::new(e),
        })
    }
}
