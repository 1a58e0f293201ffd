//! Helpers for driving the `qsf` binary.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_qsf");

pub fn qsf(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("QSF_OUT")
        .output()
        .expect("qsf runs")
}

pub fn code(args: &[&str]) -> i32 {
    qsf(args).status.code().unwrap_or(-1)
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Runs and panics with stderr unless the exit code is 0.
pub fn ok(args: &[&str]) -> Output {
    let o = qsf(args);
    assert_eq!(o.status.code(), Some(0), "qsf {args:?} failed:\n{}", stderr(&o));
    o
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `synth` then `preprocess` into `dir`; returns `dir`.
pub fn synth_and_preprocess(dir: &Path, days: &str) -> PathBuf {
    let out = s(dir);
    ok(&["--out", out, "synth", "--days", days]);
    let raw = dir.join("synth.csv");
    ok(&["--out", out, "preprocess", "--input", s(&raw)]);
    dir.to_path_buf()
}

/// Header plus processed rows `first..first + n` (0-based data rows).
pub fn slice_rows(src: &Path, dest: &Path, first: usize, n: usize) {
    let text = fs::read_to_string(src).unwrap();
    let mut lines = text.lines();
    let mut out = String::new();
    out.push_str(lines.next().unwrap());
    out.push('\n');
    for l in lines.skip(first).take(n) {
        out.push_str(l);
        out.push('\n');
    }
    fs::write(dest, out).unwrap();
}

pub fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

/// Every regular file under `dir` with its bytes, sorted by path.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

/// Like [`qsf`] but with `dir` as the working directory.
pub fn qsf_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("QSF_OUT")
        .output()
        .expect("qsf runs")
}
