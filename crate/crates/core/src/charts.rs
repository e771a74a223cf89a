//! Sizing-chart series: the three panels read during hand sizing, one
//! curve per channel length.

use crate::lut::{DeviceLut, Quantity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Panel {
    /// gm/gds vs gm/id
    IntrinsicGain,
    /// id/W vs gm/id
    CurrentDensity,
    /// gm/id vs Vgs (Vsg for PMOS)
    Efficiency,
}

impl Panel {
    pub const ALL: [Panel; 3] = [
        Panel::IntrinsicGain,
        Panel::CurrentDensity,
        Panel::Efficiency,
    ];

    /// 1-based panel number used in file names.
    pub fn number(&self) -> usize {
        match self {
            Panel::IntrinsicGain => 1,
            Panel::CurrentDensity => 2,
            Panel::Efficiency => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Panel::IntrinsicGain => "gm_gds_vs_gm_id",
            Panel::CurrentDensity => "id_w_vs_gm_id",
            Panel::Efficiency => "gm_id_vs_vgs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSeries {
    pub panel: Panel,
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_name: String,
    pub y_name: String,
}

fn length_label(l: f64) -> String {
    format!("L={:.2}nm", l * 1e9)
}

/// Three panels, one series per grid length, points in ascending abscissa.
pub fn emit_charts(lut: &DeviceLut) -> Vec<ChartSeries> {
    let vgs_name = match lut.polarity() {
        crate::device::Polarity::N => "vgs_V",
        crate::device::Polarity::P => "vsg_V",
    };
    let nv = lut.vgs_grid().len();
    let mut out = Vec::with_capacity(3 * lut.l_grid().len());
    for panel in Panel::ALL {
        for (i, &l) in lut.l_grid().iter().enumerate() {
            let col = |q| (0..nv).map(|j| lut.value(i, j, q)).collect::<Vec<f64>>();
            let (x, y, x_name, y_name) = match panel {
                Panel::IntrinsicGain | Panel::CurrentDensity => {
                    let (q, y_name) = if panel == Panel::IntrinsicGain {
                        (Quantity::GmOverGds, "gm_over_gds")
                    } else {
                        (Quantity::IdPerW, "id_per_w_A_per_m")
                    };
                    // gm/id falls with vgs, so reverse for ascending x
                    let mut x = col(Quantity::GmOverId);
                    let mut y = col(q);
                    x.reverse();
                    y.reverse();
                    (x, y, "gm_over_id_perV", y_name)
                }
                Panel::Efficiency => (
                    lut.vgs_grid().to_vec(),
                    col(Quantity::GmOverId),
                    vgs_name,
                    "gm_over_id_perV",
                ),
            };
            out.push(ChartSeries {
                panel,
                label: length_label(l),
                x,
                y,
                x_name: x_name.to_string(),
                y_name: y_name.to_string(),
            });
        }
    }
    out
}

/// `panel,series_label,x,y` rows for one panel.
pub fn panel_csv(series: &[ChartSeries], panel: Panel) -> String {
    let mut out = String::from("panel,series_label,x,y\n");
    for s in series.iter().filter(|s| s.panel == panel) {
        for (x, y) in s.x.iter().zip(&s.y) {
            out.push_str(&format!("{},{},{},{}\n", panel.name(), s.label, x, y));
        }
    }
    out
}
