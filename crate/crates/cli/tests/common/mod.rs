//! Helpers for driving the `impactd` binary in tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub struct CmdResult {
    pub status: std::process::ExitStatus,
    pub stdout: String,
    pub stderr: String,
}

pub fn impactd(args: &[&str], dir: &Path) -> CmdResult {
    let output: Output = Command::new(env!("CARGO_BIN_EXE_impactd"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawning impactd");
    CmdResult {
        status: output.status,
        stdout: String::from_utf8(output.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(output.stderr).expect("utf-8 stderr"),
    }
}

pub fn ok(args: &[&str], dir: &Path) -> CmdResult {
    let result = impactd(args, dir);
    assert!(
        result.status.success(),
        "impactd {args:?} failed:\nstdout: {}\nstderr: {}",
        result.stdout,
        result.stderr
    );
    result
}

pub fn fails(args: &[&str], dir: &Path) -> CmdResult {
    let result = impactd(args, dir);
    assert!(
        !result.status.success(),
        "impactd {args:?} unexpectedly succeeded:\nstdout: {}",
        result.stdout
    );
    result
}

pub fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).expect("writing fixture");
    path
}

pub fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).expect("reading output")
}

pub fn read_bytes(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).expect("reading output")
}
