use crate::error::{Error, Result};

/// 20·log10 for voltage ratios.
pub fn to_db(linear: f64) -> f64 {
    20.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Target specification for the two-stage amplifier. SI units throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct AmpSpec {
    pub vdd: f64,
    /// K
    pub temperature: f64,
    /// Input-referred noise voltage density (V/√Hz).
    pub noise_density: f64,
    /// Hz
    pub gbw: f64,
    /// F
    pub c_load: f64,
    /// V/s
    pub slew_rate: f64,
    /// First-stage DC gain, linear.
    pub av1_target: f64,
    /// Second-stage DC gain, linear.
    pub av2_target: f64,
    /// Linear.
    pub cmrr_target: f64,
    /// Degrees.
    pub pm_target: f64,
    /// Common-mode input low limit; reported only.
    pub vcm_low: f64,
    /// Common-mode input high limit; reported only.
    pub vcm_high: Option<f64>,
    /// Optional power budget (W).
    pub power_max: Option<f64>,
}

impl AmpSpec {
    /// Splits a total linear gain evenly between the stages.
    pub fn split_gain(total: f64) -> (f64, f64) {
        let per_stage = total.sqrt();
        (per_stage, per_stage)
    }

    pub fn dc_gain_target(&self) -> f64 {
        self.av1_target * self.av2_target
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("vdd", self.vdd),
            ("temperature", self.temperature),
            ("noise_density", self.noise_density),
            ("gbw", self.gbw),
            ("c_load", self.c_load),
            ("slew_rate", self.slew_rate),
            ("av1_target", self.av1_target),
            ("av2_target", self.av2_target),
            ("cmrr_target", self.cmrr_target),
            ("pm_target", self.pm_target),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.pm_target >= 90.0 {
            return Err(Error::invalid(format!(
                "pm_target must be below 90 degrees, got {}",
                self.pm_target
            )));
        }
        if let Some(p) = self.power_max {
            if !(p > 0.0) {
                return Err(Error::invalid(format!(
                    "power_max must be positive, got {p}"
                )));
            }
        }
        Ok(())
    }
}
