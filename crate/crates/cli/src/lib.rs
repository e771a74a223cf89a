//! File-based workflows: characterize devices, emit sizing charts, size the
//! amplifier and verify it.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use gmid_core::charts::{emit_charts, panel_csv, Panel};
use gmid_core::kv::KvDocument;
use gmid_core::lut_io::{from_csv_str, to_csv_string};
use gmid_core::verify::{bode, bode_csv, report, report_kv, verdicts_kv};
use gmid_core::{generate_lut, synthesize, AmpDesign, DeviceLut, Polarity};

pub mod config;

pub use config::ToolConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: gmid_core::Error,
    },

    #[error("{0}")]
    Core(#[from] gmid_core::Error),

    #[error("no output directory: pass --out or set output_dir in the config")]
    NoOutputDir,
}

impl CliError {
    /// 1 for infeasible targets, 2 for usage, parse and I/O problems.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_infeasible() => 1,
            _ => 2,
        }
    }
}

/// Result of a command that completed without error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Done(Vec<PathBuf>),
    /// Verification ran; `pass` is the overall verdict.
    Verified {
        files: Vec<PathBuf>,
        pass: bool,
    },
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match self {
            Outcome::Done(_) | Outcome::Verified { pass: true, .. } => 0,
            Outcome::Verified { pass: false, .. } => 1,
        }
    }

    pub fn files(&self) -> &[PathBuf] {
        match self {
            Outcome::Done(files) | Outcome::Verified { files, .. } => files,
        }
    }
}

/// Writes every file to a temporary sibling first and renames only after
/// all writes succeeded, so a failure leaves no output behind.
pub fn write_atomically(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(files.len());
    let cleanup = |staged: &[(PathBuf, PathBuf)]| {
        for (tmp, _) in staged {
            let _ = fs::remove_file(tmp);
        }
    };
    for (name, contents) in files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
        if let Err(source) = fs::write(&tmp, contents) {
            let _ = fs::remove_file(&tmp);
            cleanup(&staged);
            return Err(CliError::Io { path: tmp, source });
        }
        staged.push((tmp, target));
    }
    for (i, (tmp, target)) in staged.iter().enumerate() {
        if let Err(source) = fs::rename(tmp, target) {
            cleanup(&staged[i..]);
            return Err(CliError::Io {
                path: target.clone(),
                source,
            });
        }
    }
    Ok(staged.into_iter().map(|(_, target)| target).collect())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_lut(path: &Path) -> Result<DeviceLut, CliError> {
    let text = read_text(path)?;
    let mut lut = from_csv_str(&text).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })?;
    lut.set_provenance(format!("csv:{}", path.display()));
    Ok(lut)
}

fn read_lut_of(path: &Path, polarity: Polarity) -> Result<DeviceLut, CliError> {
    let lut = read_lut(path)?;
    lut.expect_polarity(polarity)
        .map_err(|source| CliError::Input {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(lut)
}

pub fn read_design(path: &Path) -> Result<AmpDesign, CliError> {
    let text = read_text(path)?;
    KvDocument::parse(&text)
        .and_then(|doc| AmpDesign::from_kv(&doc))
        .map_err(|source| CliError::Input {
            path: path.to_path_buf(),
            source,
        })
}

fn resolve_out(out: Option<&Path>, cfg: &ToolConfig) -> Result<PathBuf, CliError> {
    out.map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .ok_or(CliError::NoOutputDir)
}

/// Writes `nmos_lut.csv` and `pmos_lut.csv`.
pub fn characterize(config_path: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
    let cfg = ToolConfig::load(config_path)?;
    let out = resolve_out(out, &cfg)?;
    let sweep = cfg.sweep();
    let n = generate_lut(&cfg.nmos(), &sweep)?;
    let p = generate_lut(&cfg.pmos(), &sweep)?;
    let files = write_atomically(
        &out,
        &[
            ("nmos_lut.csv", to_csv_string(&n)),
            ("pmos_lut.csv", to_csv_string(&p)),
        ],
    )?;
    Ok(Outcome::Done(files))
}

/// Writes `<nmos|pmos>_panel{1,2,3}.csv`.
pub fn charts(lut_path: &Path, out: &Path) -> Result<Outcome, CliError> {
    let lut = read_lut(lut_path)?;
    let series = emit_charts(&lut);
    let prefix = lut.polarity().file_prefix();
    let names: Vec<String> = Panel::ALL
        .iter()
        .map(|p| format!("{prefix}_panel{}.csv", p.number()))
        .collect();
    let files: Vec<(&str, String)> = Panel::ALL
        .iter()
        .zip(&names)
        .map(|(panel, name)| (name.as_str(), panel_csv(&series, *panel)))
        .collect();
    Ok(Outcome::Done(write_atomically(out, &files)?))
}

/// Writes `design.kv`.
pub fn size(
    config_path: &Path,
    lut_n_path: &Path,
    lut_p_path: &Path,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let cfg = ToolConfig::load(config_path)?;
    let out = resolve_out(out, &cfg)?;
    let lut_n = read_lut_of(lut_n_path, Polarity::N)?;
    let lut_p = read_lut_of(lut_p_path, Polarity::P)?;
    let design = synthesize(&cfg.amp_spec(), &lut_n, &lut_p, &cfg.synth_options())?;
    let files = write_atomically(&out, &[("design.kv", design.to_kv().render())])?;
    Ok(Outcome::Done(files))
}

/// Writes `report.kv`, `bode.csv` and `verdicts.kv`.
pub fn verify(
    design_path: &Path,
    lut_n_path: &Path,
    lut_p_path: &Path,
    config_path: &Path,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let cfg = ToolConfig::load(config_path)?;
    let out = resolve_out(out, &cfg)?;
    let design = read_design(design_path)?;
    let lut_n = read_lut_of(lut_n_path, Polarity::N)?;
    let lut_p = read_lut_of(lut_p_path, Polarity::P)?;
    let spec = cfg.amp_spec();
    let rep = report(&design, &lut_n, &lut_p, &spec)?;
    let b = &cfg.bode;
    let points = bode(&rep, b.f_start_hz, b.f_stop_hz, b.points_per_decade)?;
    let files = write_atomically(
        &out,
        &[
            ("report.kv", report_kv(&rep, &spec).render()),
            ("bode.csv", bode_csv(&points)),
            ("verdicts.kv", verdicts_kv(&rep.pass_fail).render()),
        ],
    )?;
    Ok(Outcome::Verified {
        files,
        pass: rep.overall_pass(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_nothing_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        // a directory where a file should go makes the rename fail
        fs::create_dir(dir.path().join("b.txt")).unwrap();
        fs::write(dir.path().join("b.txt").join("x"), "x").unwrap();
        let err = write_atomically(dir.path(), &[("a.txt", "1".into()), ("b.txt", "2".into())]);
        assert!(err.is_err());
        let names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n.starts_with('.'))
            .collect();
        assert!(names.is_empty(), "{names:?}");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Outcome::Done(vec![]).exit_code(), 0);
        assert_eq!(
            Outcome::Verified {
                files: vec![],
                pass: false
            }
            .exit_code(),
            1
        );
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        let infeasible = gmid_core::Error::InfeasiblePhaseMargin(90.0);
        assert_eq!(CliError::Core(infeasible).exit_code(), 1);
    }
}
