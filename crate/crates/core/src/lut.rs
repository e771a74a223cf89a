//! Sizing-chart tables and the read-off operations performed on them.
//!
//! A [`DeviceLut`] stores gm/id, gm/gds and id/W on an (L, Vgs) grid.
//! Lookups are bilinear; inversions bisect along a fixed-length column,
//! which is monotone by construction.

use crate::device::{DeviceMetrics, Polarity};
use crate::error::{Axis, Error, Result};

/// Tabulated quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    GmOverId,
    GmOverGds,
    IdPerW,
}

/// Bisection steps for column inversion. 60 halvings of a sub-volt span
/// reach the f64 resolution of the abscissa.
const BISECTION_STEPS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceLut {
    polarity: Polarity,
    l_grid: Vec<f64>,
    vgs_grid: Vec<f64>,
    // row-major: index = i_l * vgs_grid.len() + i_vgs
    gm_over_id: Vec<f64>,
    gm_over_gds: Vec<f64>,
    id_per_w: Vec<f64>,
    vds_char: f64,
    provenance: String,
}

fn strictly_ascending(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// Linear blend that returns the endpoint exactly at t = 0 or t = 1 and
/// never leaves [min(a, b), max(a, b)].
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else if t == 1.0 {
        b
    } else {
        (a + (b - a) * t).clamp(a.min(b), a.max(b))
    }
}

/// Index of the cell containing `x` and the fractional position within it.
fn locate(grid: &[f64], x: f64) -> (usize, f64) {
    let last = grid.len() - 1;
    if x == grid[last] {
        return (last - 1, 1.0);
    }
    // first index with grid[i] > x, minus one
    let i = grid.partition_point(|&g| g <= x) - 1;
    let i = i.min(last - 1);
    let t = (x - grid[i]) / (grid[i + 1] - grid[i]);
    (i, t)
}

impl DeviceLut {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        polarity: Polarity,
        l_grid: Vec<f64>,
        vgs_grid: Vec<f64>,
        gm_over_id: Vec<f64>,
        gm_over_gds: Vec<f64>,
        id_per_w: Vec<f64>,
        vds_char: f64,
        provenance: String,
    ) -> Result<Self> {
        if l_grid.len() < 2 || vgs_grid.len() < 2 {
            return Err(Error::invalid(
                "table grids need at least 2 points per axis",
            ));
        }
        if !strictly_ascending(&l_grid) || !l_grid.iter().all(|&l| l > 0.0 && l.is_finite()) {
            return Err(Error::invalid(
                "l grid must be positive and strictly ascending",
            ));
        }
        if !strictly_ascending(&vgs_grid) || !vgs_grid.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("vgs grid must be strictly ascending"));
        }
        let cells = l_grid.len() * vgs_grid.len();
        for (name, m) in [
            ("gm_over_id", &gm_over_id),
            ("gm_over_gds", &gm_over_gds),
            ("id_per_w", &id_per_w),
        ] {
            if m.len() != cells {
                return Err(Error::invalid(format!(
                    "{name} has {} entries, expected {}x{} = {cells}",
                    m.len(),
                    l_grid.len(),
                    vgs_grid.len()
                )));
            }
        }
        let nv = vgs_grid.len();
        for (i, &l) in l_grid.iter().enumerate() {
            let row = i * nv..(i + 1) * nv;
            if !gm_over_id[row.clone()].windows(2).all(|w| w[0] > w[1]) {
                return Err(Error::invalid(format!(
                    "gm_over_id must decrease strictly with vgs (l = {l})"
                )));
            }
            if !id_per_w[row.clone()].windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::invalid(format!(
                    "id_per_w must increase strictly with vgs (l = {l})"
                )));
            }
            if !gm_over_id[row.clone()]
                .iter()
                .all(|&v| v > 0.0 && v.is_finite())
                || !id_per_w[row.clone()]
                    .iter()
                    .all(|&v| v > 0.0 && v.is_finite())
                || !gm_over_gds[row].iter().all(|&v| v > 0.0)
            {
                return Err(Error::invalid(format!(
                    "table values must be positive (l = {l})"
                )));
            }
        }
        if !(vds_char > 0.0 && vds_char.is_finite()) {
            return Err(Error::invalid(format!(
                "vds_char must be > 0, got {vds_char}"
            )));
        }
        Ok(DeviceLut {
            polarity,
            l_grid,
            vgs_grid,
            gm_over_id,
            gm_over_gds,
            id_per_w,
            vds_char,
            provenance,
        })
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    /// Fails unless the table was characterized for `expected`.
    pub fn expect_polarity(&self, expected: Polarity) -> Result<()> {
        if self.polarity == expected {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "expected {expected}MOS table, got {}MOS",
                self.polarity
            )))
        }
    }

    pub fn l_grid(&self) -> &[f64] {
        &self.l_grid
    }

    pub fn vgs_grid(&self) -> &[f64] {
        &self.vgs_grid
    }

    pub fn vds_char(&self) -> f64 {
        self.vds_char
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn set_provenance(&mut self, provenance: impl Into<String>) {
        self.provenance = provenance.into();
    }

    fn matrix(&self, q: Quantity) -> &[f64] {
        match q {
            Quantity::GmOverId => &self.gm_over_id,
            Quantity::GmOverGds => &self.gm_over_gds,
            Quantity::IdPerW => &self.id_per_w,
        }
    }

    /// Stored value at grid node (`i_l`, `i_vgs`).
    pub fn value(&self, i_l: usize, i_vgs: usize, q: Quantity) -> f64 {
        self.matrix(q)[i_l * self.vgs_grid.len() + i_vgs]
    }

    pub fn node(&self, i_l: usize, i_vgs: usize) -> DeviceMetrics {
        DeviceMetrics {
            id_per_w: self.value(i_l, i_vgs, Quantity::IdPerW),
            gm_over_id: self.value(i_l, i_vgs, Quantity::GmOverId),
            gm_over_gds: self.value(i_l, i_vgs, Quantity::GmOverGds),
            vgs: self.vgs_grid[i_vgs],
            l: self.l_grid[i_l],
        }
    }

    fn check_range(grid: &[f64], axis: Axis, x: f64) -> Result<()> {
        let (min, max) = (grid[0], grid[grid.len() - 1]);
        if !(x >= min && x <= max) {
            return Err(Error::OutOfRange {
                axis,
                value: x,
                min,
                max,
            });
        }
        Ok(())
    }

    /// Bilinear lookup. Exact at grid nodes, never outside the range of the
    /// four surrounding nodes.
    pub fn interp(&self, l: f64, vgs: f64, q: Quantity) -> Result<f64> {
        Self::check_range(&self.l_grid, Axis::Length, l)?;
        Self::check_range(&self.vgs_grid, Axis::GateVoltage, vgs)?;
        let (i, tl) = locate(&self.l_grid, l);
        let (j, tv) = locate(&self.vgs_grid, vgs);
        let lo = lerp(self.value(i, j, q), self.value(i, j + 1, q), tv);
        let hi = lerp(self.value(i + 1, j, q), self.value(i + 1, j + 1, q), tv);
        Ok(lerp(lo, hi, tl))
    }

    /// All three quantities at one bias point.
    pub fn metrics(&self, l: f64, vgs: f64) -> Result<DeviceMetrics> {
        Ok(DeviceMetrics {
            id_per_w: self.interp(l, vgs, Quantity::IdPerW)?,
            gm_over_id: self.interp(l, vgs, Quantity::GmOverId)?,
            gm_over_gds: self.interp(l, vgs, Quantity::GmOverGds)?,
            vgs,
            l,
        })
    }

    /// Range of gm/id available along the column at length `l`, as (min, max).
    pub fn gm_id_range(&self, l: f64) -> Result<(f64, f64)> {
        let vmin = self.vgs_grid[0];
        let vmax = self.vgs_grid[self.vgs_grid.len() - 1];
        Ok((
            self.interp(l, vmax, Quantity::GmOverId)?,
            self.interp(l, vmin, Quantity::GmOverId)?,
        ))
    }

    /// Solves `interp(l, vgs, q) = target` for vgs along a monotone column.
    /// Defined for `GmOverId` (decreasing) and `IdPerW` (increasing).
    pub fn invert(&self, l: f64, q: Quantity, target: f64) -> Result<f64> {
        let decreasing = match q {
            Quantity::GmOverId => true,
            Quantity::IdPerW => false,
            Quantity::GmOverGds => {
                return Err(Error::invalid("gm/gds columns are not invertible in vgs"))
            }
        };
        let mut lo = self.vgs_grid[0];
        let mut hi = self.vgs_grid[self.vgs_grid.len() - 1];
        let f_lo = self.interp(l, lo, q)?;
        let f_hi = self.interp(l, hi, q)?;
        let (min, max) = if decreasing {
            (f_hi, f_lo)
        } else {
            (f_lo, f_hi)
        };
        if !(target >= min && target <= max) {
            return Err(Error::InfeasibleTarget {
                l,
                target,
                min,
                max,
            });
        }
        if target == f_lo {
            return Ok(lo);
        }
        if target == f_hi {
            return Ok(hi);
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f = self.interp(l, mid, q)?;
            if f == target {
                return Ok(mid);
            }
            // move the bound that sits on the same side of the target as f
            if (f > target) == decreasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Gate voltage at which the column at `l` reaches `target_gm_id`.
    pub fn invert_gmid(&self, l: f64, target_gm_id: f64) -> Result<f64> {
        self.invert(l, Quantity::GmOverId, target_gm_id)
    }

    /// Intrinsic gain of length `l` when biased at `gm_id`.
    pub fn gm_gds_at(&self, l: f64, gm_id: f64) -> Result<f64> {
        let vgs = self.invert_gmid(l, gm_id)?;
        self.interp(l, vgs, Quantity::GmOverGds)
    }

    /// Smallest grid length whose intrinsic gain at `gm_id` reaches
    /// `required_gm_gds`.
    pub fn select_length(&self, gm_id: f64, required_gm_gds: f64) -> Result<f64> {
        let mut best: Option<(f64, f64)> = None;
        let mut last_infeasible = None;
        for &l in &self.l_grid {
            let gain = match self.gm_gds_at(l, gm_id) {
                Ok(g) => g,
                Err(e @ Error::InfeasibleTarget { .. }) => {
                    last_infeasible = Some(e);
                    continue;
                }
                Err(e) => return Err(e),
            };
            if gain >= required_gm_gds {
                return Ok(l);
            }
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, l));
            }
        }
        match best {
            Some((best, best_l)) => Err(Error::InfeasibleGain {
                required: required_gm_gds,
                best,
                best_l,
            }),
            None => Err(last_infeasible.expect("grid has at least two lengths")),
        }
    }
}
