//! CSV persistence for [`DeviceLut`].
//!
//! ```text
//! polarity,vds_char_V
//! P,0.45
//! l_m,vgs_V,gm_over_id_perV,gm_over_gds,id_per_w_A_per_m
//! <one row per grid point, l-major>
//! ```
//!
//! Numbers are written with the shortest decimal representation that
//! round-trips, so a save/load cycle is lossless.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::device::Polarity;
use crate::error::{Error, Result};
use crate::lut::{DeviceLut, Quantity};

pub const META_HEADER: &str = "polarity,vds_char_V";
pub const COLUMNS: [&str; 5] = [
    "l_m",
    "vgs_V",
    "gm_over_id_perV",
    "gm_over_gds",
    "id_per_w_A_per_m",
];

pub fn to_csv_string(lut: &DeviceLut) -> String {
    let mut out = String::new();
    out.push_str(META_HEADER);
    out.push('\n');
    out.push_str(&format!("{},{}\n", lut.polarity(), lut.vds_char()));
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for (i, &l) in lut.l_grid().iter().enumerate() {
        for (j, &vgs) in lut.vgs_grid().iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                l,
                vgs,
                lut.value(i, j, Quantity::GmOverId),
                lut.value(i, j, Quantity::GmOverGds),
                lut.value(i, j, Quantity::IdPerW)
            ));
        }
    }
    out
}

fn parse_f64(field: &str, line: usize, column: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        Error::parse(
            line,
            format!("column {column}: cannot parse {field:?} as a number"),
        )
    })
}

pub fn from_csv_str(text: &str) -> Result<DeviceLut> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (n, meta_header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    if meta_header.trim() != META_HEADER {
        return Err(Error::parse(n, format!("expected header {META_HEADER:?}")));
    }
    let (n, meta) = lines
        .next()
        .ok_or_else(|| Error::parse(2, "missing polarity,vds_char_V row"))?;
    let meta: Vec<&str> = meta.split(',').collect();
    if meta.len() != 2 {
        return Err(Error::parse(n, "expected 2 fields: polarity,vds_char_V"));
    }
    let polarity: Polarity = meta[0]
        .trim()
        .parse()
        .map_err(|_| Error::parse(n, format!("unknown polarity {:?}", meta[0])))?;
    let vds_char = parse_f64(meta[1], n, "vds_char_V")?;

    let (n, header) = lines
        .next()
        .ok_or_else(|| Error::parse(3, "missing column header"))?;
    let header: Vec<&str> = header.split(',').map(str::trim).collect();
    let mut index = [0usize; 5];
    for (k, name) in COLUMNS.iter().enumerate() {
        index[k] = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(n, format!("missing column {name}")))?;
    }
    if header.len() != COLUMNS.len() {
        return Err(Error::parse(
            n,
            format!("expected {} columns, found {}", COLUMNS.len(), header.len()),
        ));
    }

    let mut l_grid: Vec<f64> = Vec::new();
    let mut vgs_grid: Vec<f64> = Vec::new();
    let mut current_vgs: Vec<f64> = Vec::new();
    let mut seen = HashSet::new();
    let (mut gm_id, mut gm_gds, mut id_w) = (Vec::new(), Vec::new(), Vec::new());
    let mut last_line = n;

    let close_block = |current: &mut Vec<f64>, grid: &mut Vec<f64>, line: usize| -> Result<()> {
        if grid.is_empty() {
            *grid = std::mem::take(current);
        } else if *current != *grid {
            return Err(Error::parse(
                line,
                "ragged table: vgs values differ between length blocks",
            ));
        } else {
            current.clear();
        }
        Ok(())
    };

    for (n, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        last_line = n;
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != COLUMNS.len() {
            return Err(Error::parse(
                n,
                format!("expected {} fields, found {}", COLUMNS.len(), fields.len()),
            ));
        }
        let get = |k: usize| parse_f64(fields[index[k]], n, COLUMNS[k]);
        let (l, vgs) = (get(0)?, get(1)?);
        if !seen.insert((l.to_bits(), vgs.to_bits())) {
            return Err(Error::parse(
                n,
                format!("duplicate key (l = {l}, vgs = {vgs})"),
            ));
        }
        match l_grid.last() {
            Some(&prev) if prev == l => {}
            Some(&prev) => {
                if l < prev {
                    return Err(Error::parse(
                        n,
                        format!("l grid not ascending: {l} after {prev}"),
                    ));
                }
                close_block(&mut current_vgs, &mut vgs_grid, n)?;
                l_grid.push(l);
            }
            None => l_grid.push(l),
        }
        if let Some(&prev) = current_vgs.last() {
            if vgs <= prev {
                return Err(Error::parse(
                    n,
                    format!("vgs grid not ascending: {vgs} after {prev}"),
                ));
            }
        }
        current_vgs.push(vgs);
        gm_id.push(get(2)?);
        gm_gds.push(get(3)?);
        id_w.push(get(4)?);
    }
    if l_grid.is_empty() {
        return Err(Error::parse(last_line, "no data rows"));
    }
    close_block(&mut current_vgs, &mut vgs_grid, last_line)?;

    DeviceLut::new(
        polarity,
        l_grid,
        vgs_grid,
        gm_id,
        gm_gds,
        id_w,
        vds_char,
        String::from("csv"),
    )
    .map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::parse(last_line, msg),
        other => other,
    })
}

pub fn save_lut(lut: &DeviceLut, path: &Path) -> Result<()> {
    fs::write(path, to_csv_string(lut))?;
    Ok(())
}

pub fn load_lut(path: &Path) -> Result<DeviceLut> {
    let text = fs::read_to_string(path)?;
    let mut lut = from_csv_str(&text)?;
    lut.set_provenance(format!("csv:{}", path.display()));
    Ok(lut)
}
