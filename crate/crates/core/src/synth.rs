//! gm/ID sizing procedure for the two-stage Miller op-amp.
//!
//! Order of operations:
//! noise → gm12, gm12 + GBW → Cc, slew → tail current, stage-one gain →
//! M1/M2 and the M3/M4 load (with its efficiency check), slew ratio →
//! Id6, phase margin → alpha → gm6 → M6, CMRR → M5, mirror → M7/M8.

use std::f64::consts::PI;

use crate::design::{AmpDesign, DeviceSize};
use crate::device::{Polarity, BOLTZMANN};
use crate::error::{Error, Result, ResultExt, Stage};
use crate::lut::{DeviceLut, Quantity};
use crate::spec::AmpSpec;

/// Width snapping grid (m).
pub const WIDTH_GRID: f64 = 10e-9;
const WIDTH_STEPS_PER_M: f64 = 1e8;

/// Relative slack used when comparing a recomputed gm/id with its assumption.
const LOAD_CHECK_TOL: f64 = 1e-9;

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

/// Input-pair transconductance from the input-referred noise density:
/// gm12 = (16/3) kT / v_n².
pub fn gm_from_noise(noise_density: f64, temperature: f64) -> Result<f64> {
    require_positive("noise_density", noise_density)?;
    require_positive("temperature", temperature)?;
    Ok(16.0 / 3.0 * BOLTZMANN * temperature / (noise_density * noise_density))
}

/// Cc = gm12 / (2π GBW).
pub fn compensation_cap(gm12: f64, gbw: f64) -> Result<f64> {
    require_positive("gm12", gm12)?;
    require_positive("gbw", gbw)?;
    Ok(gm12 / (2.0 * PI * gbw))
}

/// Tail and branch currents from the slew rate: (Id5, Id1) with
/// Id5 = SR·Cc and Id1 = Id5/2.
pub fn tail_currents(slew_rate: f64, c_c: f64) -> Result<(f64, f64)> {
    require_positive("slew_rate", slew_rate)?;
    require_positive("c_c", c_c)?;
    let i_d5 = slew_rate * c_c;
    Ok((i_d5, i_d5 / 2.0))
}

/// Output conductances of the first stage under an equal split:
/// gds12 = gds34 = gm12 / (2 Av1).
pub fn stage1_conductances(gm12: f64, av1_target: f64) -> Result<(f64, f64)> {
    require_positive("gm12", gm12)?;
    require_positive("av1_target", av1_target)?;
    let gds = gm12 / (2.0 * av1_target);
    Ok((gds, gds))
}

/// Chart-sized transistor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizedDevice {
    pub w: f64,
    pub l: f64,
    pub vgs: f64,
}

/// Snaps a width up to the [`WIDTH_GRID`]. Widths already on the grid
/// (up to float noise) are kept.
pub fn round_width(w: f64) -> f64 {
    let steps = (w * WIDTH_STEPS_PER_M - 1e-6).ceil().max(1.0);
    // dividing by the exact power of ten gives the nearest double to the grid value
    steps / WIDTH_STEPS_PER_M
}

/// Picks L from the intrinsic-gain requirement gm/gds_max, reads Vgs off
/// the gm/id column and W off the id/W column.
pub fn size_device(lut: &DeviceLut, gm: f64, i_d: f64, gds_max: f64) -> Result<SizedDevice> {
    require_positive("gm", gm)?;
    require_positive("i_d", i_d)?;
    if !(gds_max > 0.0) {
        return Err(Error::invalid(format!(
            "gds_max must be positive, got {gds_max}"
        )));
    }
    let gm_id = gm / i_d;
    let l = lut.select_length(gm_id, gm / gds_max)?;
    size_at_length(lut, l, gm_id, i_d)
}

/// Sizes a device at a fixed length for the given gm/id and current.
pub fn size_at_length(lut: &DeviceLut, l: f64, gm_id: f64, i_d: f64) -> Result<SizedDevice> {
    let vgs = lut.invert_gmid(l, gm_id)?;
    let id_per_w = lut.interp(l, vgs, Quantity::IdPerW)?;
    Ok(SizedDevice {
        w: round_width(i_d / id_per_w),
        l,
        vgs,
    })
}

/// Outcome of checking the load's operating efficiency against the value
/// assumed while sizing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadVerdict {
    Accept,
    /// Recomputed gm/id exceeds the assumption; resize with this value.
    Reassess(f64),
}

pub fn active_load_check(
    lut_n: &DeviceLut,
    vgs34: f64,
    l34: f64,
    assumed_gm_id: f64,
) -> Result<LoadVerdict> {
    let actual = lut_n.interp(l34, vgs34, Quantity::GmOverId)?;
    if actual <= assumed_gm_id * (1.0 + LOAD_CHECK_TOL) {
        Ok(LoadVerdict::Accept)
    } else {
        Ok(LoadVerdict::Reassess(actual))
    }
}

/// Largest tail output conductance meeting the CMRR target:
/// CMRR = gm12/(gds12 + gds34) · 2 gm34 · R_ss, gds5 = 1/R_ss.
pub fn tail_requirement(
    cmrr_target: f64,
    gm12: f64,
    gds12: f64,
    gds34: f64,
    gm34: f64,
) -> Result<f64> {
    require_positive("cmrr_target", cmrr_target)?;
    require_positive("gm12", gm12)?;
    require_positive("gds12 + gds34", gds12 + gds34)?;
    require_positive("gm34", gm34)?;
    let r_ss = cmrr_target * (gds12 + gds34) / (gm12 * 2.0 * gm34);
    Ok(1.0 / r_ss)
}

/// Smallest second-stage current satisfying Id1/Id6 ≤ Cc / (2 (CL + Cc)).
pub fn second_stage_current(i_d1: f64, c_c: f64, c_load: f64) -> Result<f64> {
    require_positive("i_d1", i_d1)?;
    require_positive("c_c", c_c)?;
    if !(c_load >= 0.0) {
        return Err(Error::invalid(format!("c_load must be >= 0, got {c_load}")));
    }
    Ok(i_d1 * 2.0 * (c_load + c_c) / c_c)
}

/// Upper bound on Id1/Id6 from the slew-rate ratio.
pub fn current_ratio_bound(c_c: f64, c_load: f64) -> f64 {
    c_c / (2.0 * (c_load + c_c))
}

/// PM = 90° − atan(α (Id1/Id6)(CL/Cc)) − atan(α (Id1/Id6)), in degrees.
pub fn phase_margin(alpha: f64, i_d1: f64, i_d6: f64, c_load: f64, c_c: f64) -> f64 {
    let ratio = alpha * i_d1 / i_d6;
    90.0 - (ratio * c_load / c_c).atan().to_degrees() - ratio.atan().to_degrees()
}

/// Inverts [`phase_margin`] for alpha by bisection. The returned alpha
/// never undershoots the target margin.
pub fn solve_alpha(pm_target: f64, i_d1: f64, i_d6: f64, c_load: f64, c_c: f64) -> Result<f64> {
    if !pm_target.is_finite() {
        return Err(Error::invalid(format!(
            "pm_target must be finite, got {pm_target}"
        )));
    }
    if pm_target >= 90.0 {
        return Err(Error::InfeasiblePhaseMargin(pm_target));
    }
    if pm_target <= 0.0 {
        return Err(Error::invalid(format!(
            "pm_target must be > 0, got {pm_target}"
        )));
    }
    require_positive("i_d1", i_d1)?;
    require_positive("i_d6", i_d6)?;
    require_positive("c_c", c_c)?;
    if !(c_load >= 0.0) {
        return Err(Error::invalid(format!("c_load must be >= 0, got {c_load}")));
    }
    let pm = |a: f64| phase_margin(a, i_d1, i_d6, c_load, c_c);

    let mut hi = 1.0;
    while pm(hi) >= pm_target {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::InfeasiblePhaseMargin(pm_target));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pm(mid) >= pm_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// W8 ≈ (2/3) W5 · Id8/Id5.
pub fn mirror_width(w5: f64, i_d8: f64, i_d5: f64) -> Result<f64> {
    require_positive("w5", w5)?;
    require_positive("i_d8", i_d8)?;
    require_positive("i_d5", i_d5)?;
    Ok(2.0 / 3.0 * w5 * i_d8 / i_d5)
}

/// Free choices of the procedure that the equations leave open.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    /// Highest gm/id accepted for the input pair. When the slew-derived
    /// branch current would need more, the current is raised instead.
    pub input_gm_id_max: f64,
    /// Starting gm/id guess for the M3/M4 load.
    pub load_gm_id_initial: f64,
    /// Round cap for the load efficiency check.
    pub load_check_max_rounds: usize,
    /// gm/id of the M5/M7/M8 mirror group.
    pub mirror_gm_id: f64,
    /// Id8 / Id5.
    pub reference_ratio: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            input_gm_id_max: 20.0,
            load_gm_id_initial: 10.0,
            load_check_max_rounds: 5,
            mirror_gm_id: 10.0,
            reference_ratio: 0.1,
        }
    }
}

impl SynthOptions {
    pub fn validate(&self) -> Result<()> {
        require_positive("input_gm_id_max", self.input_gm_id_max)?;
        require_positive("load_gm_id_initial", self.load_gm_id_initial)?;
        require_positive("mirror_gm_id", self.mirror_gm_id)?;
        require_positive("reference_ratio", self.reference_ratio)?;
        if self.load_check_max_rounds == 0 {
            return Err(Error::invalid("load_check_max_rounds must be >= 1"));
        }
        Ok(())
    }
}

/// Small-signal view of a sized device evaluated at its operating point.
fn conductance(lut: &DeviceLut, l: f64, vgs: f64, i_d: f64) -> Result<(f64, f64)> {
    let gm = lut.interp(l, vgs, Quantity::GmOverId)? * i_d;
    let gds = gm / lut.interp(l, vgs, Quantity::GmOverGds)?;
    Ok((gm, gds))
}

pub fn synthesize(
    spec: &AmpSpec,
    lut_n: &DeviceLut,
    lut_p: &DeviceLut,
    opts: &SynthOptions,
) -> Result<AmpDesign> {
    spec.validate()?;
    opts.validate()?;
    lut_n.expect_polarity(Polarity::N)?;
    lut_p.expect_polarity(Polarity::P)?;

    let gm12 = gm_from_noise(spec.noise_density, spec.temperature).at_stage(Stage::Noise)?;
    let c_c = compensation_cap(gm12, spec.gbw).at_stage(Stage::Compensation)?;
    let (_, i_d1_slew) = tail_currents(spec.slew_rate, c_c).at_stage(Stage::Slew)?;
    // slew gives the minimum current; more current only lowers gm/id
    let i_d1 = i_d1_slew.max(gm12 / opts.input_gm_id_max);
    let i_d5 = 2.0 * i_d1;

    // input pair M1/M2 (PMOS)
    let (gds12_max, gds34_max) =
        stage1_conductances(gm12, spec.av1_target).at_stage(Stage::InputPair)?;
    let m12 = size_device(lut_p, gm12, i_d1, gds12_max).at_stage(Stage::InputPair)?;
    let (_, gds12) = conductance(lut_p, m12.l, m12.vgs, i_d1).at_stage(Stage::InputPair)?;

    // active load M3/M4 (NMOS), iterated until the efficiency check accepts
    let mut assumed = opts.load_gm_id_initial;
    let mut rounds = 0;
    let (m34, vgs34) = loop {
        rounds += 1;
        let sized =
            size_device(lut_n, assumed * i_d1, i_d1, gds34_max).at_stage(Stage::ActiveLoad)?;
        // operating point of the snapped width carrying Id1
        let vgs = lut_n
            .invert(sized.l, Quantity::IdPerW, i_d1 / sized.w)
            .at_stage(Stage::ActiveLoad)?;
        match active_load_check(lut_n, vgs, sized.l, assumed).at_stage(Stage::ActiveLoad)? {
            LoadVerdict::Accept => break (sized, vgs),
            LoadVerdict::Reassess(actual) => {
                if rounds >= opts.load_check_max_rounds {
                    return Err(Error::Stage {
                        stage: Stage::ActiveLoad,
                        source: Box::new(Error::invalid(format!(
                            "load efficiency check did not settle in {rounds} rounds (last gm/id {actual})"
                        ))),
                    });
                }
                assumed = actual;
            }
        }
    };
    let (gm34, gds34) = conductance(lut_n, m34.l, vgs34, i_d1).at_stage(Stage::ActiveLoad)?;

    // second stage
    let i_d6 = second_stage_current(i_d1, c_c, spec.c_load).at_stage(Stage::SecondStageCurrent)?;
    let alpha =
        solve_alpha(spec.pm_target, i_d1, i_d6, spec.c_load, c_c).at_stage(Stage::PhaseMargin)?;
    if !(alpha > 0.0) {
        return Err(Error::Stage {
            stage: Stage::SecondStage,
            source: Box::new(Error::InfeasibleGain {
                required: f64::INFINITY,
                best: 0.0,
                best_l: 0.0,
            }),
        });
    }
    let gm6 = (gm12 / i_d1) * i_d6 / alpha;
    let gds_stage2_max = gm6 / (2.0 * spec.av2_target);
    let m6 = size_device(lut_n, gm6, i_d6, gds_stage2_max).at_stage(Stage::SecondStage)?;
    let (_, gds6) = conductance(lut_n, m6.l, m6.vgs, i_d6).at_stage(Stage::SecondStage)?;

    // tail M5 from CMRR, sized with the conductances actually realised above
    let gds5_max =
        tail_requirement(spec.cmrr_target, gm12, gds12, gds34, gm34).at_stage(Stage::TailSource)?;
    let g = opts.mirror_gm_id;
    let m5 = size_device(lut_p, g * i_d5, i_d5, gds5_max).at_stage(Stage::TailSource)?;
    let m7 = size_device(lut_p, g * i_d6, i_d6, gds_stage2_max).at_stage(Stage::Mirror)?;

    // M5, M7, M8 share a gate: one L, one Vsg
    let l_mirror = m5.l.max(m7.l);
    let m5 = size_at_length(lut_p, l_mirror, g, i_d5).at_stage(Stage::TailSource)?;
    let m7 = size_at_length(lut_p, l_mirror, g, i_d6).at_stage(Stage::Mirror)?;
    let i_d8 = opts.reference_ratio * i_d5;
    let w8 = round_width(mirror_width(m5.w, i_d8, i_d5).at_stage(Stage::Mirror)?);
    let (_, gds5) = conductance(lut_p, l_mirror, m5.vgs, i_d5).at_stage(Stage::TailSource)?;
    let (_, gds7) = conductance(lut_p, l_mirror, m7.vgs, i_d6).at_stage(Stage::Mirror)?;

    Ok(AmpDesign {
        m12: DeviceSize { w: m12.w, l: m12.l },
        m34: DeviceSize { w: m34.w, l: m34.l },
        m5: DeviceSize {
            w: m5.w,
            l: l_mirror,
        },
        m6: DeviceSize { w: m6.w, l: m6.l },
        m7: DeviceSize {
            w: m7.w,
            l: l_mirror,
        },
        m8: DeviceSize { w: w8, l: l_mirror },
        c_c,
        i_d1,
        i_d5,
        i_d6,
        i_d7: i_d6,
        i_d8,
        alpha,
        vgs1: m12.vgs,
        vgs34,
        vgs5: m5.vgs,
        vgs6: m6.vgs,
        gm12,
        gm34,
        gm6,
        gds12,
        gds34,
        gds5,
        gds6,
        gds7,
        id1_over_id6_bound: current_ratio_bound(c_c, spec.c_load),
        load_check_rounds: rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{generate_lut, DeviceParams, Sweep};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn noise_to_gm() {
        let gm = gm_from_noise(8e-9, 300.0).unwrap();
        assert!(rel(gm, 345.2e-6) < 1e-3, "{gm}");
        let gm2 = gm_from_noise(16e-9, 300.0).unwrap();
        assert!(rel(gm / gm2, 4.0) < 1e-12);
        assert!(gm_from_noise(8e-9, 1e-9).unwrap() < 1e-12);
        assert!(gm_from_noise(0.0, 300.0).is_err());
        assert!(gm_from_noise(8e-9, -1.0).is_err());
    }

    #[test]
    fn cc_from_gbw() {
        let cc = compensation_cap(345.2e-6, 60e6).unwrap();
        assert!(rel(cc, 0.916e-12) < 5e-3, "{cc}");
        assert!(rel(compensation_cap(2.0 * 345.2e-6, 60e6).unwrap(), 2.0 * cc) < 1e-12);
        assert!(rel(compensation_cap(2.0 * PI, 1.0).unwrap(), 1.0) < 1e-15);
        assert!(compensation_cap(1e-3, 0.0).is_err());
    }

    #[test]
    fn slew_currents() {
        let (i5, i1) = tail_currents(18e6, 0.916e-12).unwrap();
        assert!(rel(i5, 16.5e-6) < 5e-3);
        assert!(rel(i1, 8.24e-6) < 5e-3);
        assert_eq!(i1, i5 / 2.0);
        assert!(tail_currents(18e6, 0.0).is_err());
    }

    #[test]
    fn stage1_split() {
        let (a, b) = stage1_conductances(345.2e-6, 100.0).unwrap();
        assert_eq!(a, b);
        assert!(rel(a, 1.726e-6) < 1e-9);
        assert!(rel(345.2e-6 / (a + b), 100.0) < 1e-12);
        let (a, _) = stage1_conductances(3.0, 1.5).unwrap();
        assert_eq!(a, 1.0);
    }

    #[test]
    fn tail_requirement_inverts_cmrr() {
        let (gm12, gds12, gds34, gm34) = (345.2e-6, 1.726e-6, 1.726e-6, 82.4e-6);
        let cmrr = 10f64.powf(68.0 / 20.0);
        let g5 = tail_requirement(cmrr, gm12, gds12, gds34, gm34).unwrap();
        assert!(g5 > 0.0 && g5.is_finite());
        // independent evaluation of the CMRR expression
        let back = gm12 / (gds12 + gds34) * 2.0 * gm34 * (1.0 / g5);
        assert!(rel(back, cmrr) < 1e-12);
        let g5x2 = tail_requirement(2.0 * cmrr, gm12, gds12, gds34, gm34).unwrap();
        assert!(rel(g5x2, g5 / 2.0) < 1e-12);
    }

    #[test]
    fn second_stage_bound() {
        let (i1, cc, cl) = (8.24e-6, 0.916e-12, 4e-12);
        let bound = current_ratio_bound(cc, cl);
        assert!(rel(bound, 0.0931) < 1e-2);
        let i6 = second_stage_current(i1, cc, cl).unwrap();
        assert!(rel(i6, 88.5e-6) < 1e-2, "{i6}");
        assert!(rel(i1 / i6, bound) < 1e-12);
        assert_eq!(second_stage_current(i1, cc, 0.0).unwrap(), 2.0 * i1);
    }

    #[test]
    fn phase_margin_cases() {
        assert_eq!(phase_margin(0.0, 1.0, 10.0, 4.0, 1.0), 90.0);
        assert!(phase_margin(1.0, 1.0, 1.0, 1.0, 1.0).abs() < 1e-12);
        // ratio 0.0931, CL/Cc 4.368, alpha 1.05
        let pm = phase_margin(1.05, 0.0931, 1.0, 4.368, 1.0);
        let oracle = 90.0
            - (1.05f64 * 0.0931 * 4.368).atan() * 180.0 / PI
            - (1.05f64 * 0.0931).atan() * 180.0 / PI;
        assert!((pm - oracle).abs() < 1e-12);
        assert!((pm - 61.3).abs() < 0.2, "{pm}");
    }

    #[test]
    fn alpha_inverse() {
        let a = solve_alpha(61.3, 0.0931, 1.0, 4.368, 1.0).unwrap();
        assert!(rel(a, 1.05) < 1e-2, "{a}");
        assert!((phase_margin(a, 0.0931, 1.0, 4.368, 1.0) - 61.3).abs() < 0.01);
        assert!(phase_margin(a, 0.0931, 1.0, 4.368, 1.0) >= 61.3);
        let tiny = solve_alpha(90.0 - 1e-6, 0.0931, 1.0, 4.368, 1.0).unwrap();
        assert!(tiny < 1e-5, "{tiny}");
        assert!(matches!(
            solve_alpha(90.0, 0.0931, 1.0, 4.368, 1.0),
            Err(Error::InfeasiblePhaseMargin(_))
        ));
    }

    #[test]
    fn mirror_width_cases() {
        assert!(rel(mirror_width(450e-6, 1.0, 1.0).unwrap(), 300e-6) < 1e-12);
        let w = mirror_width(450e-6, 2.0, 1.0).unwrap();
        assert!(rel(w, 600e-6) < 1e-12);
        let ratio: f64 = 3.0 * 1.29 / (2.0 * 450.0);
        assert!((ratio - 0.0043).abs() < 1e-12);
        let w8 = mirror_width(450e-6, ratio * 16.5e-6, 16.5e-6).unwrap();
        assert!(rel(w8, 1.29e-6) < 1e-9);
    }

    #[test]
    fn width_rounding() {
        assert!(rel(round_width(1.234e-6), 1.24e-6) < 1e-12);
        assert!(rel(round_width(1.24e-6), 1.24e-6) < 1e-12);
        assert!(rel(round_width(1e-12), 10e-9) < 1e-12);
    }

    fn luts() -> (DeviceLut, DeviceLut) {
        (
            generate_lut(&DeviceParams::nmos(300.0), &Sweep::standard()).unwrap(),
            generate_lut(&DeviceParams::pmos(300.0), &Sweep::standard()).unwrap(),
        )
    }

    #[test]
    fn size_device_paths() {
        let (n, _) = luts();
        let d = size_device(&n, 100e-6, 10e-6, 1e9).unwrap();
        assert_eq!(d.l, 65e-9);
        // closure: evaluate the sized device back through the table
        let gm_id = n.interp(d.l, d.vgs, Quantity::GmOverId).unwrap();
        let i = d.w * n.interp(d.l, d.vgs, Quantity::IdPerW).unwrap();
        assert!(rel(gm_id * 10e-6, 100e-6) < 1e-6);
        assert!(i >= 10e-6 && i <= 10e-6 * (1.0 + WIDTH_GRID / d.w) * (1.0 + 1e-9));
        let err = size_device(&n, 30.0 * 10e-6, 10e-6, 1e9).unwrap_err();
        assert!(matches!(err, Error::InfeasibleTarget { .. }), "{err}");
    }

    #[test]
    fn load_check_verdicts() {
        let (n, _) = luts();
        let l = n.l_grid()[2];
        let vgs = 0.47;
        let actual = n.interp(l, vgs, Quantity::GmOverId).unwrap();
        assert_eq!(
            active_load_check(&n, vgs, l, actual).unwrap(),
            LoadVerdict::Accept
        );
        assert_eq!(
            active_load_check(&n, vgs, l, actual * 1.1).unwrap(),
            LoadVerdict::Accept
        );
        assert_eq!(
            active_load_check(&n, vgs, l, actual * 0.9).unwrap(),
            LoadVerdict::Reassess(actual)
        );
    }
}
