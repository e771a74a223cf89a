//! Analytic MOSFET surrogate.
//!
//! A continuous weak-to-strong-inversion drain current law stands in for
//! foundry device data:
//!
//! ```text
//! id/W = (2 n k' ut^2 / L) * ln^2(1 + exp((vgs - vth0) / (2 n ut))) * (1 + lambda(L) vds)
//! lambda(L) = lambda0 / L
//! ```
//!
//! gm follows from the closed-form derivative, gds from the channel-length
//! modulation term. PMOS devices use the magnitude convention: `vgs` and
//! `vds` are |Vsg| and |Vsd|.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lut::DeviceLut;

pub const BOLTZMANN: f64 = 1.380649e-23;
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// kT/q in volts.
pub fn thermal_voltage(temperature_k: f64) -> f64 {
    BOLTZMANN * temperature_k / ELEMENTARY_CHARGE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    N,
    P,
}

impl Polarity {
    /// Lowercase device family prefix used in file names.
    pub fn file_prefix(&self) -> &'static str {
        match self {
            Polarity::N => "nmos",
            Polarity::P => "pmos",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarity::N => f.write_str("N"),
            Polarity::P => f.write_str("P"),
        }
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" => Ok(Polarity::N),
            "P" => Ok(Polarity::P),
            other => Err(Error::invalid(format!("unknown polarity {other:?}"))),
        }
    }
}

/// Surrogate model parameters. All voltages in magnitude convention.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    pub polarity: Polarity,
    /// Threshold voltage (V).
    pub vth0: f64,
    /// Subthreshold slope factor.
    pub n: f64,
    /// Thermal voltage (V).
    pub ut: f64,
    /// Process transconductance factor (A/V^2).
    pub k_prime: f64,
    /// Channel-length-modulation scale (m/V): lambda(L) = lambda0 / L.
    pub lambda0: f64,
    /// Drain bias used for characterization (V).
    pub vds_char: f64,
}

impl DeviceParams {
    pub const DEFAULT_TEMPERATURE_K: f64 = 300.0;
    pub const DEFAULT_VDS_CHAR: f64 = 0.45;

    /// Low-threshold NMOS defaults at the given temperature.
    pub fn nmos(temperature_k: f64) -> Self {
        DeviceParams {
            polarity: Polarity::N,
            vth0: 0.30,
            n: 1.3,
            ut: thermal_voltage(temperature_k),
            k_prime: 300e-6,
            lambda0: 0.02e-6,
            vds_char: Self::DEFAULT_VDS_CHAR,
        }
    }

    /// Low-threshold PMOS defaults at the given temperature.
    pub fn pmos(temperature_k: f64) -> Self {
        DeviceParams {
            polarity: Polarity::P,
            vth0: 0.32,
            n: 1.3,
            ut: thermal_voltage(temperature_k),
            k_prime: 120e-6,
            lambda0: 0.02e-6,
            vds_char: Self::DEFAULT_VDS_CHAR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.vth0,
            self.n,
            self.ut,
            self.k_prime,
            self.lambda0,
            self.vds_char,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("device parameters must be finite"));
        }
        if self.ut <= 0.0 {
            return Err(Error::invalid(format!("ut must be > 0, got {}", self.ut)));
        }
        if self.n < 1.0 {
            return Err(Error::invalid(format!("n must be >= 1, got {}", self.n)));
        }
        if self.k_prime <= 0.0 {
            return Err(Error::invalid(format!(
                "k_prime must be > 0, got {}",
                self.k_prime
            )));
        }
        if self.lambda0 < 0.0 {
            return Err(Error::invalid(format!(
                "lambda0 must be >= 0, got {}",
                self.lambda0
            )));
        }
        if self.vds_char <= 0.0 {
            return Err(Error::invalid(format!(
                "vds_char must be > 0, got {}",
                self.vds_char
            )));
        }
        Ok(())
    }

    /// Checks `lambda(L) * vds_char < 1` down to the shortest length `l_min`.
    pub fn validate_for_length(&self, l_min: f64) -> Result<()> {
        self.validate()?;
        let lv = self.lambda(l_min) * self.vds_char;
        if lv >= 1.0 {
            return Err(Error::invalid(format!(
                "lambda(l)*vds_char = {lv} >= 1 at l = {l_min} m; model invalid"
            )));
        }
        Ok(())
    }

    /// Channel-length-modulation coefficient at length `l` (1/V).
    pub fn lambda(&self, l: f64) -> f64 {
        self.lambda0 / l
    }

    /// Weak-inversion ceiling of gm/id, 1/(n ut).
    pub fn gm_over_id_ceiling(&self) -> f64 {
        1.0 / (self.n * self.ut)
    }
}

/// Small-signal ratios of one bias point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceMetrics {
    /// A/m
    pub id_per_w: f64,
    /// 1/V
    pub gm_over_id: f64,
    /// Intrinsic gain. `f64::INFINITY` when lambda0 = 0.
    pub gm_over_gds: f64,
    pub vgs: f64,
    pub l: f64,
}

/// ln(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn eval_device(params: &DeviceParams, vgs: f64, vds: f64, l: f64) -> Result<DeviceMetrics> {
    if !(l > 0.0) {
        return Err(Error::invalid(format!(
            "channel length must be > 0, got {l}"
        )));
    }
    if !(vds > 0.0) {
        return Err(Error::invalid(format!("vds must be > 0, got {vds}")));
    }
    if !vgs.is_finite() {
        return Err(Error::invalid(format!("vgs must be finite, got {vgs}")));
    }
    params.validate()?;

    let nut = params.n * params.ut;
    let x = (vgs - params.vth0) / (2.0 * nut);
    let sp = softplus(x);
    let lambda = params.lambda(l);
    let clm = 1.0 + lambda * vds;

    let id_per_w = 2.0 * nut * params.ut * params.k_prime / l * sp * sp * clm;
    // d ln(id)/d vgs = 2 * logistic(x) / (softplus(x) * 2 n ut)
    let ratio = if sp > 0.0 { logistic(x) / sp } else { 1.0 };
    let gm_over_id = ratio / nut;
    // gds / id = lambda / (1 + lambda vds)
    let gm_over_gds = if lambda > 0.0 {
        gm_over_id * clm / lambda
    } else {
        f64::INFINITY
    };

    Ok(DeviceMetrics {
        id_per_w,
        gm_over_id,
        gm_over_gds,
        vgs,
        l,
    })
}

/// Characterization sweep: uniform grids over L and Vgs.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub l_min: f64,
    pub l_max: f64,
    pub n_l: usize,
    pub vgs_min: f64,
    pub vgs_max: f64,
    pub n_vgs: usize,
}

impl Sweep {
    /// 65 nm to 180 nm and 0.1 V to 0.9 V, ten points each.
    pub fn standard() -> Self {
        Sweep {
            l_min: 65e-9,
            l_max: 180e-9,
            n_l: 10,
            vgs_min: 0.1,
            vgs_max: 0.9,
            n_vgs: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_min > 0.0 && self.l_min < self.l_max && self.l_max.is_finite()) {
            return Err(Error::invalid(format!(
                "length range must satisfy 0 < l_min < l_max, got [{}, {}]",
                self.l_min, self.l_max
            )));
        }
        if !(self.vgs_min < self.vgs_max && self.vgs_min.is_finite() && self.vgs_max.is_finite()) {
            return Err(Error::invalid(format!(
                "vgs range must satisfy vgs_min < vgs_max, got [{}, {}]",
                self.vgs_min, self.vgs_max
            )));
        }
        if self.n_l < 2 || self.n_vgs < 2 {
            return Err(Error::invalid(format!(
                "sweeps need at least 2 points, got n_l = {}, n_vgs = {}",
                self.n_l, self.n_vgs
            )));
        }
        Ok(())
    }
}

/// `n` uniformly spaced points from `lo` to `hi`, endpoints exact.
pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Tabulates the surrogate over `sweep` at `vds = params.vds_char`.
pub fn generate_lut(params: &DeviceParams, sweep: &Sweep) -> Result<DeviceLut> {
    sweep.validate()?;
    params.validate_for_length(sweep.l_min)?;

    let l_grid = linspace(sweep.l_min, sweep.l_max, sweep.n_l);
    let vgs_grid = linspace(sweep.vgs_min, sweep.vgs_max, sweep.n_vgs);
    let cells = l_grid.len() * vgs_grid.len();
    let mut gm_over_id = Vec::with_capacity(cells);
    let mut gm_over_gds = Vec::with_capacity(cells);
    let mut id_per_w = Vec::with_capacity(cells);
    for &l in &l_grid {
        for &vgs in &vgs_grid {
            let m = eval_device(params, vgs, params.vds_char, l)?;
            gm_over_id.push(m.gm_over_id);
            gm_over_gds.push(m.gm_over_gds);
            id_per_w.push(m.id_per_w);
        }
    }

    let provenance = format!(
        "surrogate polarity={} vth0={} n={} ut={} k_prime={} lambda0={}",
        params.polarity, params.vth0, params.n, params.ut, params.k_prime, params.lambda0
    );
    DeviceLut::new(
        params.polarity,
        l_grid,
        vgs_grid,
        gm_over_id,
        gm_over_gds,
        id_per_w,
        params.vds_char,
        provenance,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nmos() -> DeviceParams {
        DeviceParams::nmos(300.0)
    }

    #[test]
    fn thermal_voltage_at_300k() {
        assert!((thermal_voltage(300.0) - 0.025852).abs() < 1e-6);
    }

    #[test]
    fn deep_weak_inversion_approaches_ceiling() {
        let mut p = nmos();
        p.ut = 0.02585;
        let vgs = p.vth0 - 10.0 * p.n * p.ut;
        let m = eval_device(&p, vgs, 0.45, 100e-9).unwrap();
        let ceiling = 1.0 / (p.n * p.ut);
        assert!((ceiling - 29.75).abs() < 0.01);
        assert!((m.gm_over_id - ceiling).abs() / ceiling < 0.02);
        assert!(m.gm_over_id < ceiling);
    }

    #[test]
    fn strong_inversion_asymptote() {
        let p = nmos();
        let m = eval_device(&p, p.vth0 + 0.4, 0.45, 100e-9).unwrap();
        assert!((m.gm_over_id - 5.0).abs() / 5.0 < 0.05, "{}", m.gm_over_id);
    }

    #[test]
    fn zero_clm_gives_infinite_intrinsic_gain() {
        let mut p = nmos();
        p.lambda0 = 0.0;
        let m = eval_device(&p, 0.5, 0.45, 100e-9).unwrap();
        assert!(m.gm_over_gds.is_infinite() && m.gm_over_gds > 0.0);
        assert!(m.gm_over_id.is_finite());
    }

    #[test]
    fn intrinsic_gain_relation() {
        let p = nmos();
        let l = 90e-9;
        let vds = 0.3;
        let m = eval_device(&p, 0.55, vds, l).unwrap();
        let lambda = p.lambda0 / l;
        let expect = m.gm_over_id * (1.0 + lambda * vds) / lambda;
        assert!((m.gm_over_gds - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn rejects_bad_bias() {
        let p = nmos();
        assert!(matches!(
            eval_device(&p, 0.5, 0.45, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            eval_device(&p, 0.5, 0.45, -1e-9),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            eval_device(&p, 0.5, 0.0, 1e-7),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = nmos();
        p.n = 0.9;
        assert!(p.validate().is_err());
        let mut p = nmos();
        p.lambda0 = 1e-6;
        assert!(p.validate_for_length(65e-9).is_err());
    }

    #[test]
    fn deterministic() {
        let p = DeviceParams::pmos(300.0);
        let a = eval_device(&p, 0.4, 0.45, 1e-7).unwrap();
        let b = eval_device(&p, 0.4, 0.45, 1e-7).unwrap();
        assert_eq!(a.id_per_w.to_bits(), b.id_per_w.to_bits());
        assert_eq!(a.gm_over_id.to_bits(), b.gm_over_id.to_bits());
        assert_eq!(a.gm_over_gds.to_bits(), b.gm_over_gds.to_bits());
    }

    #[test]
    fn standard_sweep_shape() {
        let lut = generate_lut(&nmos(), &Sweep::standard()).unwrap();
        assert_eq!(lut.l_grid().len(), 10);
        assert_eq!(lut.vgs_grid().len(), 10);
        assert_eq!(lut.l_grid()[0], 65e-9);
        assert_eq!(lut.l_grid()[9], 180e-9);
        assert_eq!(lut.vgs_grid()[0], 0.1);
        assert_eq!(lut.vgs_grid()[9], 0.9);
    }

    #[test]
    fn minimal_grid_corners_match_direct_eval() {
        let p = DeviceParams::pmos(300.0);
        let sweep = Sweep {
            n_l: 2,
            n_vgs: 2,
            ..Sweep::standard()
        };
        let lut = generate_lut(&p, &sweep).unwrap();
        for (i, &l) in [65e-9, 180e-9].iter().enumerate() {
            for (j, &vgs) in [0.1, 0.9].iter().enumerate() {
                let m = eval_device(&p, vgs, p.vds_char, l).unwrap();
                assert_eq!(lut.node(i, j).gm_over_id, m.gm_over_id);
                assert_eq!(lut.node(i, j).gm_over_gds, m.gm_over_gds);
                assert_eq!(lut.node(i, j).id_per_w, m.id_per_w);
            }
        }
    }

    #[test]
    fn invalid_sweeps() {
        let p = nmos();
        let bad = [
            Sweep {
                l_min: 180e-9,
                l_max: 65e-9,
                ..Sweep::standard()
            },
            Sweep {
                vgs_min: 0.9,
                vgs_max: 0.1,
                ..Sweep::standard()
            },
            Sweep {
                n_l: 1,
                ..Sweep::standard()
            },
            Sweep {
                n_vgs: 0,
                ..Sweep::standard()
            },
        ];
        for s in bad {
            assert!(
                matches!(generate_lut(&p, &s), Err(Error::InvalidArgument(_))),
                "{s:?}"
            );
        }
    }
}
