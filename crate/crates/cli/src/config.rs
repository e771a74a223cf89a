//! JSON tool configuration. Every block is optional and falls back to the
//! reference setup; unknown keys are rejected. All values in SI units.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use gmid_core::device::thermal_voltage;
use gmid_core::spec::from_db;
use gmid_core::{AmpSpec, DeviceParams, Polarity, Sweep, SynthOptions};

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToolConfig {
    pub devices: DevicesBlock,
    pub sweep: SweepBlock,
    pub spec: SpecBlock,
    pub synthesis: SynthesisBlock,
    pub bode: BodeBlock,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DevicesBlock {
    pub nmos: DeviceBlock,
    pub pmos: DeviceBlock,
}

impl Default for DevicesBlock {
    fn default() -> Self {
        let n = DeviceParams::nmos(DeviceParams::DEFAULT_TEMPERATURE_K);
        let p = DeviceParams::pmos(DeviceParams::DEFAULT_TEMPERATURE_K);
        DevicesBlock {
            nmos: DeviceBlock::from_params(&n),
            pmos: DeviceBlock::from_params(&p),
        }
    }
}

/// Surrogate parameters of one device family. `ut` follows from
/// `spec.temperature_k`; `vds_char_v` defaults to half the supply.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceBlock {
    pub vth0_v: f64,
    #[serde(default = "default_slope")]
    pub n: f64,
    pub k_prime_a_per_v2: f64,
    #[serde(default = "default_lambda0")]
    pub lambda0_m_per_v: f64,
    #[serde(default)]
    pub vds_char_v: Option<f64>,
}

fn default_slope() -> f64 {
    1.3
}

fn default_lambda0() -> f64 {
    0.02e-6
}

impl DeviceBlock {
    fn from_params(p: &DeviceParams) -> Self {
        DeviceBlock {
            vth0_v: p.vth0,
            n: p.n,
            k_prime_a_per_v2: p.k_prime,
            lambda0_m_per_v: p.lambda0,
            vds_char_v: None,
        }
    }

    fn to_params(&self, polarity: Polarity, temperature_k: f64, vdd: f64) -> DeviceParams {
        DeviceParams {
            polarity,
            vth0: self.vth0_v,
            n: self.n,
            ut: thermal_voltage(temperature_k),
            k_prime: self.k_prime_a_per_v2,
            lambda0: self.lambda0_m_per_v,
            vds_char: self.vds_char_v.unwrap_or(vdd / 2.0),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    pub l_min_m: f64,
    pub l_max_m: f64,
    pub n_l: usize,
    pub vgs_min_v: f64,
    pub vgs_max_v: f64,
    pub n_vgs: usize,
}

impl Default for SweepBlock {
    fn default() -> Self {
        let s = Sweep::standard();
        SweepBlock {
            l_min_m: s.l_min,
            l_max_m: s.l_max,
            n_l: s.n_l,
            vgs_min_v: s.vgs_min,
            vgs_max_v: s.vgs_max,
            n_vgs: s.n_vgs,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpecBlock {
    pub vdd_v: f64,
    pub temperature_k: f64,
    pub noise_density_v_per_rthz: f64,
    pub gbw_hz: f64,
    pub c_load_f: f64,
    pub slew_rate_v_per_s: f64,
    /// Total DC gain; split evenly unless `av1`/`av2` are given.
    pub dc_gain_db: f64,
    pub av1: Option<f64>,
    pub av2: Option<f64>,
    pub cmrr_db: f64,
    pub pm_deg: f64,
    pub vcm_low_v: f64,
    pub vcm_high_v: Option<f64>,
    pub power_max_w: Option<f64>,
}

impl Default for SpecBlock {
    fn default() -> Self {
        SpecBlock {
            vdd_v: 0.9,
            temperature_k: 300.0,
            noise_density_v_per_rthz: 8e-9,
            gbw_hz: 60e6,
            c_load_f: 4e-12,
            slew_rate_v_per_s: 18e6,
            dc_gain_db: 40.4,
            av1: None,
            av2: None,
            cmrr_db: 68.0,
            pm_deg: 61.3,
            vcm_low_v: 0.125,
            vcm_high_v: None,
            power_max_w: Some(0.29e-3),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisBlock {
    pub input_gm_id_max: f64,
    pub load_gm_id_initial: f64,
    pub load_check_max_rounds: usize,
    pub mirror_gm_id: f64,
    pub reference_ratio: f64,
}

impl Default for SynthesisBlock {
    fn default() -> Self {
        let o = SynthOptions::default();
        SynthesisBlock {
            input_gm_id_max: o.input_gm_id_max,
            load_gm_id_initial: o.load_gm_id_initial,
            load_check_max_rounds: o.load_check_max_rounds,
            mirror_gm_id: o.mirror_gm_id,
            reference_ratio: o.reference_ratio,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BodeBlock {
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    pub points_per_decade: usize,
}

impl Default for BodeBlock {
    fn default() -> Self {
        BodeBlock {
            f_start_hz: 1e3,
            f_stop_hz: 1e9,
            points_per_decade: 50,
        }
    }
}

impl ToolConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("at `{path}`: {}", e.inner()))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn nmos(&self) -> DeviceParams {
        self.devices
            .nmos
            .to_params(Polarity::N, self.spec.temperature_k, self.spec.vdd_v)
    }

    pub fn pmos(&self) -> DeviceParams {
        self.devices
            .pmos
            .to_params(Polarity::P, self.spec.temperature_k, self.spec.vdd_v)
    }

    pub fn sweep(&self) -> Sweep {
        let s = &self.sweep;
        Sweep {
            l_min: s.l_min_m,
            l_max: s.l_max_m,
            n_l: s.n_l,
            vgs_min: s.vgs_min_v,
            vgs_max: s.vgs_max_v,
            n_vgs: s.n_vgs,
        }
    }

    pub fn amp_spec(&self) -> AmpSpec {
        let s = &self.spec;
        let total = from_db(s.dc_gain_db);
        let (av1, av2) = match (s.av1, s.av2) {
            (Some(a), Some(b)) => (a, b),
            (Some(a), None) => (a, total / a),
            (None, Some(b)) => (total / b, b),
            (None, None) => AmpSpec::split_gain(total),
        };
        AmpSpec {
            vdd: s.vdd_v,
            temperature: s.temperature_k,
            noise_density: s.noise_density_v_per_rthz,
            gbw: s.gbw_hz,
            c_load: s.c_load_f,
            slew_rate: s.slew_rate_v_per_s,
            av1_target: av1,
            av2_target: av2,
            cmrr_target: from_db(s.cmrr_db),
            pm_target: s.pm_deg,
            vcm_low: s.vcm_low_v,
            vcm_high: s.vcm_high_v,
            power_max: s.power_max_w,
        }
    }

    pub fn synth_options(&self) -> SynthOptions {
        let s = &self.synthesis;
        SynthOptions {
            input_gm_id_max: s.input_gm_id_max,
            load_gm_id_initial: s.load_gm_id_initial,
            load_check_max_rounds: s.load_check_max_rounds,
            mirror_gm_id: s.mirror_gm_id,
            reference_ratio: s.reference_ratio,
        }
    }
}
