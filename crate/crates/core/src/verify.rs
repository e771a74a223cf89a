//! Closed-form small-signal verification of a sized amplifier.
//!
//! The open-loop response is modelled with a dominant pole p1, a
//! non-dominant output pole p2 = gm6/(2π CL) and a right-half-plane Miller
//! zero z1 = gm6/(2π Cc):
//!
//! ```text
//! A(jf) = a0 (1 - jf/z1) / ((1 + jf/p1)(1 + jf/p2))
//! ```

use std::f64::consts::PI;

use crate::design::AmpDesign;
use crate::device::{Polarity, BOLTZMANN};
use crate::error::{Error, Result, ResultExt};
use crate::kv::KvDocument;
use crate::lut::{DeviceLut, Quantity};
use crate::spec::{to_db, AmpSpec};

/// Relative slack on inclusive spec boundaries.
const BOUNDARY_TOL: f64 = 1e-9;

/// Allowed relative GBW deviation.
pub const GBW_TOLERANCE: f64 = 0.05;

/// Conductances and capacitances the closed-form model needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallSignal {
    pub gm12: f64,
    pub gds12: f64,
    pub gm34: f64,
    pub gds34: f64,
    pub gm6: f64,
    pub gds6: f64,
    pub gds7: f64,
    pub gds5: f64,
    pub c_c: f64,
    pub c_load: f64,
}

/// PM = 90° − atan(GBW/p2) − atan(GBW/z1), in degrees.
pub fn pm_from_poles(gbw: f64, p2: f64, z1: f64) -> f64 {
    90.0 - (gbw / p2).atan().to_degrees() - (gbw / z1).atan().to_degrees()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    AtLeast,
    AtMost,
    /// Relative band around the requirement.
    Within,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub key: &'static str,
    pub label: &'static str,
    pub unit: &'static str,
    pub measured: f64,
    pub required: f64,
    pub sense: Sense,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpReport {
    pub av1: f64,
    pub av2: f64,
    pub a0: f64,
    pub gbw: f64,
    pub p1: f64,
    pub p2: f64,
    pub z1: f64,
    pub pm: f64,
    pub cmrr: f64,
    pub slew: f64,
    pub power: f64,
    /// Input-referred noise density implied by gm12 (V/√Hz).
    pub input_noise: f64,
    pub small_signal: SmallSignal,
    pub pass_fail: Vec<Verdict>,
}

impl AmpReport {
    pub fn av1_db(&self) -> f64 {
        to_db(self.av1)
    }

    pub fn av2_db(&self) -> f64 {
        to_db(self.av2)
    }

    pub fn a0_db(&self) -> f64 {
        to_db(self.a0)
    }

    pub fn cmrr_db(&self) -> f64 {
        to_db(self.cmrr)
    }

    pub fn overall_pass(&self) -> bool {
        self.pass_fail.iter().all(|v| v.pass)
    }

    /// Report from small-signal parameters alone. Currents enter only via
    /// slew and power.
    pub fn from_small_signal(
        ss: SmallSignal,
        i_d5: f64,
        supply_current: f64,
        spec: &AmpSpec,
    ) -> Result<Self> {
        if !(ss.c_c > 0.0) {
            return Err(Error::InvalidDesign(format!(
                "compensation capacitance must be positive, got {}",
                ss.c_c
            )));
        }
        if !(ss.c_load > 0.0) {
            return Err(Error::InvalidDesign(format!(
                "load capacitance must be positive, got {}",
                ss.c_load
            )));
        }
        let av1 = ss.gm12 / (ss.gds12 + ss.gds34);
        let av2 = ss.gm6 / (ss.gds6 + ss.gds7);
        let a0 = av1 * av2;
        let gbw = ss.gm12 / (2.0 * PI * ss.c_c);
        let p1 = gbw / a0;
        let p2 = ss.gm6 / (2.0 * PI * ss.c_load);
        let z1 = ss.gm6 / (2.0 * PI * ss.c_c);
        let pm = pm_from_poles(gbw, p2, z1);
        let cmrr = av1 * 2.0 * ss.gm34 / ss.gds5;
        let slew = i_d5 / ss.c_c;
        let power = spec.vdd * supply_current;
        let input_noise = (16.0 / 3.0 * BOLTZMANN * spec.temperature / ss.gm12).sqrt();
        let mut rep = AmpReport {
            av1,
            av2,
            a0,
            gbw,
            p1,
            p2,
            z1,
            pm,
            cmrr,
            slew,
            power,
            input_noise,
            small_signal: ss,
            pass_fail: Vec::new(),
        };
        rep.pass_fail = check_against_spec(&rep, spec);
        Ok(rep)
    }
}

fn device_conductance(
    lut: &DeviceLut,
    device: &'static str,
    l: f64,
    vgs: f64,
    i_d: f64,
) -> Result<(f64, f64)> {
    let eval = || -> Result<(f64, f64)> {
        let gm = lut.interp(l, vgs, Quantity::GmOverId)? * i_d;
        let gds = gm / lut.interp(l, vgs, Quantity::GmOverGds)?;
        Ok((gm, gds))
    };
    eval().for_device(device)
}

/// Re-evaluates every device of `design` through its table and computes
/// the performance metrics.
pub fn report(
    design: &AmpDesign,
    lut_n: &DeviceLut,
    lut_p: &DeviceLut,
    spec: &AmpSpec,
) -> Result<AmpReport> {
    if !(design.c_c > 0.0) {
        return Err(Error::InvalidDesign(format!(
            "compensation capacitance must be positive, got {}",
            design.c_c
        )));
    }
    lut_n.expect_polarity(Polarity::N)?;
    lut_p.expect_polarity(Polarity::P)?;
    let currents = [
        design.i_d1,
        design.i_d5,
        design.i_d6,
        design.i_d7,
        design.i_d8,
    ];
    if !currents.iter().all(|&i| i > 0.0 && i.is_finite()) {
        return Err(Error::InvalidDesign(
            "branch currents must be positive".into(),
        ));
    }
    let (gm12, gds12) = device_conductance(lut_p, "M1/M2", design.m12.l, design.vgs1, design.i_d1)?;
    let (gm34, gds34) =
        device_conductance(lut_n, "M3/M4", design.m34.l, design.vgs34, design.i_d1)?;
    let (gm6, gds6) = device_conductance(lut_n, "M6", design.m6.l, design.vgs6, design.i_d6)?;
    let (_, gds7) = device_conductance(lut_p, "M7", design.m7.l, design.vgs5, design.i_d7)?;
    let (_, gds5) = device_conductance(lut_p, "M5", design.m5.l, design.vgs5, design.i_d5)?;
    let ss = SmallSignal {
        gm12,
        gds12,
        gm34,
        gds34,
        gm6,
        gds6,
        gds7,
        gds5,
        c_c: design.c_c,
        c_load: spec.c_load,
    };
    let supply = design.i_d5 + design.i_d6 + design.i_d8;
    AmpReport::from_small_signal(ss, design.i_d5, supply, spec)
}

fn verdict(
    key: &'static str,
    label: &'static str,
    unit: &'static str,
    measured: f64,
    required: f64,
    sense: Sense,
) -> Verdict {
    let pass = match sense {
        Sense::AtLeast => measured >= required - BOUNDARY_TOL * required.abs(),
        Sense::AtMost => measured <= required + BOUNDARY_TOL * required.abs(),
        Sense::Within => {
            (measured - required).abs() <= (GBW_TOLERANCE + BOUNDARY_TOL) * required.abs()
        }
    };
    Verdict {
        key,
        label,
        unit,
        measured,
        required,
        sense,
        pass,
    }
}

/// Per-metric compliance, boundaries inclusive.
pub fn check_against_spec(rep: &AmpReport, spec: &AmpSpec) -> Vec<Verdict> {
    let mut out = vec![
        verdict(
            "irnv",
            "IRNV (S_n(f))",
            "V/sqrt(Hz)",
            rep.input_noise,
            spec.noise_density,
            Sense::AtMost,
        ),
        verdict(
            "gbw",
            "Gain Bandwidth Product (GBW)",
            "Hz",
            rep.gbw,
            spec.gbw,
            Sense::Within,
        ),
        verdict(
            "dc_gain",
            "DC gain (A_o)",
            "dB",
            rep.a0_db(),
            to_db(spec.dc_gain_target()),
            Sense::AtLeast,
        ),
        verdict(
            "phase_margin",
            "Phase Margin (in degrees)",
            "deg",
            rep.pm,
            spec.pm_target,
            Sense::AtLeast,
        ),
        verdict(
            "cmrr",
            "CMRR",
            "dB",
            rep.cmrr_db(),
            to_db(spec.cmrr_target),
            Sense::AtLeast,
        ),
        verdict(
            "slew_rate",
            "Slew Rate",
            "V/s",
            rep.slew,
            spec.slew_rate,
            Sense::AtLeast,
        ),
    ];
    if let Some(p) = spec.power_max {
        out.push(verdict(
            "power",
            "Power Dissipation",
            "W",
            rep.power,
            p,
            Sense::AtMost,
        ));
    }
    out
}

pub fn report_kv(rep: &AmpReport, spec: &AmpSpec) -> KvDocument {
    let mut doc = KvDocument::new();
    doc.push_comment("small-signal performance report");
    doc.push("supply_v", spec.vdd);
    doc.push("c_load_f", spec.c_load);
    doc.push("av1", rep.av1);
    doc.push("av1_db", rep.av1_db());
    doc.push("av2", rep.av2);
    doc.push("av2_db", rep.av2_db());
    doc.push("a0", rep.a0);
    doc.push("a0_db", rep.a0_db());
    doc.push("gbw_hz", rep.gbw);
    doc.push("p1_hz", rep.p1);
    doc.push("p2_hz", rep.p2);
    doc.push("z1_hz", rep.z1);
    doc.push("pm_deg", rep.pm);
    doc.push("cmrr", rep.cmrr);
    doc.push("cmrr_db", rep.cmrr_db());
    doc.push("slew_v_per_s", rep.slew);
    doc.push("power_w", rep.power);
    doc.push("irnv_v_per_rthz", rep.input_noise);
    doc.push("gm12_s", rep.small_signal.gm12);
    doc.push("gm34_s", rep.small_signal.gm34);
    doc.push("gm6_s", rep.small_signal.gm6);
    doc.push("gds12_s", rep.small_signal.gds12);
    doc.push("gds34_s", rep.small_signal.gds34);
    doc.push("gds5_s", rep.small_signal.gds5);
    doc.push("gds6_s", rep.small_signal.gds6);
    doc.push("gds7_s", rep.small_signal.gds7);
    doc.push_comment("common-mode input limits are informational, not verified");
    doc.push("vcm_low_v", spec.vcm_low);
    if let Some(v) = spec.vcm_high {
        doc.push("vcm_high_v", v);
    }
    doc
}

pub fn verdicts_kv(verdicts: &[Verdict]) -> KvDocument {
    let mut doc = KvDocument::new();
    doc.push_comment("specification compliance");
    for v in verdicts {
        let sense = match v.sense {
            Sense::AtLeast => ">=",
            Sense::AtMost => "<=",
            Sense::Within => "within 5% of",
        };
        doc.push(format!("{}.label", v.key), v.label);
        doc.push(format!("{}.measured", v.key), v.measured);
        doc.push(
            format!("{}.required", v.key),
            format!("{sense} {} {}", v.required, v.unit),
        );
        doc.push(
            format!("{}.verdict", v.key),
            if v.pass { "pass" } else { "fail" },
        );
    }
    let overall = verdicts.iter().all(|v| v.pass);
    doc.push("overall", if overall { "pass" } else { "fail" });
    doc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodePoint {
    pub freq: f64,
    pub mag_db: f64,
    pub phase_deg: f64,
}

/// Magnitude (dB) and unwrapped phase (degrees) at frequency `f` ≥ 0.
pub fn response(rep: &AmpReport, f: f64) -> (f64, f64) {
    let term = |corner: f64| 10.0 * (1.0 + (f / corner).powi(2)).log10();
    let mag_db = to_db(rep.a0) + term(rep.z1) - term(rep.p1) - term(rep.p2);
    // each factor stays within (-90°, 90°), so the sum needs no unwrapping
    let phase = -(f / rep.p1).atan() - (f / rep.p2).atan() - (f / rep.z1).atan();
    (mag_db, phase.to_degrees())
}

/// Log-spaced sweep from `f_start`, `points_per_decade` points per decade,
/// up to `f_stop`.
pub fn bode(
    rep: &AmpReport,
    f_start: f64,
    f_stop: f64,
    points_per_decade: usize,
) -> Result<Vec<BodePoint>> {
    if !(f_start > 0.0 && f_start < f_stop && f_stop.is_finite()) {
        return Err(Error::invalid(format!(
            "bode range must satisfy 0 < f_start < f_stop, got [{f_start}, {f_stop}]"
        )));
    }
    if points_per_decade == 0 {
        return Err(Error::invalid("points_per_decade must be >= 1"));
    }
    let decades = (f_stop / f_start).log10();
    let steps = (decades * points_per_decade as f64 + 1e-9).floor() as usize;
    Ok((0..=steps)
        .map(|k| {
            let freq = if k == 0 {
                f_start
            } else {
                f_start * 10f64.powf(k as f64 / points_per_decade as f64)
            };
            let (mag_db, phase_deg) = response(rep, freq);
            BodePoint {
                freq,
                mag_db,
                phase_deg,
            }
        })
        .collect())
}

pub fn bode_csv(points: &[BodePoint]) -> String {
    let mut out = String::from("freq_hz,mag_db,phase_deg\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.freq, p.mag_db, p.phase_deg));
    }
    out
}

/// First 0 dB crossing of a sampled response, interpolated linearly in
/// log-frequency. Returns (frequency, phase in degrees).
pub fn unity_gain_crossing(points: &[BodePoint]) -> Option<(f64, f64)> {
    points.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        if a.mag_db >= 0.0 && b.mag_db < 0.0 {
            let t = a.mag_db / (a.mag_db - b.mag_db);
            let lf = a.freq.log10() + t * (b.freq.log10() - a.freq.log10());
            let phase = a.phase_deg + t * (b.phase_deg - a.phase_deg);
            Some((10f64.powf(lf), phase))
        } else {
            None
        }
    })
}
