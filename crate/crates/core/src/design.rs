//! Sized amplifier and its flat key-value representation.

use crate::error::Result;
use crate::kv::{KvDocument, KvReader};

/// Width and length of one transistor (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceSize {
    pub w: f64,
    pub l: f64,
}

/// Two-stage Miller op-amp: PMOS input pair M1/M2 with NMOS mirror load
/// M3/M4, PMOS tail M5, NMOS common-source M6, PMOS current source M7 and
/// PMOS bias reference M8. M5, M7 and M8 share one gate.
#[derive(Debug, Clone, PartialEq)]
pub struct AmpDesign {
    pub m12: DeviceSize,
    pub m34: DeviceSize,
    pub m5: DeviceSize,
    pub m6: DeviceSize,
    pub m7: DeviceSize,
    pub m8: DeviceSize,
    /// F
    pub c_c: f64,
    /// A
    pub i_d1: f64,
    pub i_d5: f64,
    pub i_d6: f64,
    pub i_d7: f64,
    pub i_d8: f64,
    pub alpha: f64,
    /// Gate voltages (magnitudes, V). `vgs5` is shared by M5, M7, M8.
    pub vgs1: f64,
    pub vgs34: f64,
    pub vgs5: f64,
    pub vgs6: f64,
    /// S
    pub gm12: f64,
    pub gm34: f64,
    pub gm6: f64,
    pub gds12: f64,
    pub gds34: f64,
    pub gds5: f64,
    pub gds6: f64,
    pub gds7: f64,
    /// C_c / (2 (C_L + C_c))
    pub id1_over_id6_bound: f64,
    /// Rounds taken by the active-load check.
    pub load_check_rounds: usize,
}

impl AmpDesign {
    /// M1..M8 in order, with the matched pairs repeated.
    pub fn devices(&self) -> [(&'static str, DeviceSize); 8] {
        [
            ("M1", self.m12),
            ("M2", self.m12),
            ("M3", self.m34),
            ("M4", self.m34),
            ("M5", self.m5),
            ("M6", self.m6),
            ("M7", self.m7),
            ("M8", self.m8),
        ]
    }

    pub fn to_kv(&self) -> KvDocument {
        let mut doc = KvDocument::new();
        doc.push_comment("two-stage Miller op-amp design");
        doc.push_comment("device  W (um)  L (um)");
        for (name, d) in self.devices() {
            doc.push_comment(format!("{name}  {:.3}  {:.4}", d.w * 1e6, d.l * 1e6));
        }
        for (key, d) in self.size_keys() {
            doc.push(format!("{key}.w_m"), d.w);
            doc.push(format!("{key}.l_m"), d.l);
        }
        for (key, v) in self.scalars() {
            doc.push(key, v);
        }
        doc.push("load_check_rounds", self.load_check_rounds);
        doc
    }

    fn size_keys(&self) -> [(&'static str, DeviceSize); 6] {
        [
            ("m12", self.m12),
            ("m34", self.m34),
            ("m5", self.m5),
            ("m6", self.m6),
            ("m7", self.m7),
            ("m8", self.m8),
        ]
    }

    fn scalars(&self) -> [(&'static str, f64); 21] {
        [
            ("c_c_f", self.c_c),
            ("i_d1_a", self.i_d1),
            ("i_d5_a", self.i_d5),
            ("i_d6_a", self.i_d6),
            ("i_d7_a", self.i_d7),
            ("i_d8_a", self.i_d8),
            ("alpha", self.alpha),
            ("vgs1_v", self.vgs1),
            ("vgs34_v", self.vgs34),
            ("vgs5_v", self.vgs5),
            ("vgs6_v", self.vgs6),
            ("gm12_s", self.gm12),
            ("gm34_s", self.gm34),
            ("gm6_s", self.gm6),
            ("gds12_s", self.gds12),
            ("gds34_s", self.gds34),
            ("gds5_s", self.gds5),
            ("gds6_s", self.gds6),
            ("gds7_s", self.gds7),
            ("id1_over_id6_bound", self.id1_over_id6_bound),
            ("ratio_id1_id6", self.i_d1 / self.i_d6),
        ]
    }

    pub fn from_kv(doc: &KvDocument) -> Result<Self> {
        let r = KvReader::new(doc);
        let size = |key: &str| -> Result<DeviceSize> {
            Ok(DeviceSize {
                w: r.f64(&format!("{key}.w_m"))?,
                l: r.f64(&format!("{key}.l_m"))?,
            })
        };
        let rounds = r.str("load_check_rounds")?;
        let load_check_rounds = rounds.parse().map_err(|_| {
            crate::error::Error::parse(0, format!("load_check_rounds: bad integer {rounds:?}"))
        })?;
        Ok(AmpDesign {
            m12: size("m12")?,
            m34: size("m34")?,
            m5: size("m5")?,
            m6: size("m6")?,
            m7: size("m7")?,
            m8: size("m8")?,
            c_c: r.f64("c_c_f")?,
            i_d1: r.f64("i_d1_a")?,
            i_d5: r.f64("i_d5_a")?,
            i_d6: r.f64("i_d6_a")?,
            i_d7: r.f64("i_d7_a")?,
            i_d8: r.f64("i_d8_a")?,
            alpha: r.f64("alpha")?,
            vgs1: r.f64("vgs1_v")?,
            vgs34: r.f64("vgs34_v")?,
            vgs5: r.f64("vgs5_v")?,
            vgs6: r.f64("vgs6_v")?,
            gm12: r.f64("gm12_s")?,
            gm34: r.f64("gm34_s")?,
            gm6: r.f64("gm6_s")?,
            gds12: r.f64("gds12_s")?,
            gds34: r.f64("gds34_s")?,
            gds5: r.f64("gds5_s")?,
            gds6: r.f64("gds6_s")?,
            gds7: r.f64("gds7_s")?,
            id1_over_id6_bound: r.f64("id1_over_id6_bound")?,
            load_check_rounds,
        })
    }
}
