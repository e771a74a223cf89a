#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn gmid(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmid"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn gmid")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Writes `config` as c.json and characterizes into `luts/`.
pub fn characterized(dir: &Path, config: &str) {
    std::fs::write(dir.join("c.json"), config).unwrap();
    let out = gmid(
        &["characterize", "--config", "c.json", "--out", "luts"],
        dir,
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

pub fn size_args(out: &str) -> Vec<String> {
    [
        "size",
        "--config",
        "c.json",
        "--lut-n",
        "luts/nmos_lut.csv",
        "--lut-p",
        "luts/pmos_lut.csv",
        "--out",
        out,
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

pub fn verify_args(design: &str, out: &str) -> Vec<String> {
    [
        "verify",
        "--design",
        design,
        "--lut-n",
        "luts/nmos_lut.csv",
        "--lut-p",
        "luts/pmos_lut.csv",
        "--config",
        "c.json",
        "--out",
        out,
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

pub fn run(args: &[String], cwd: &Path) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    gmid(&refs, cwd)
}
