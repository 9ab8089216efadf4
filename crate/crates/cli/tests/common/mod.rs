//! Helpers for driving the `cfb` binary.

#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

pub fn cfb() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cfb"));
    cmd.env_remove("CFB_DATA_DIR")
        .env_remove("CFB_LEXICON")
        .env_remove("CFB_LISTEN")
        .env_remove("CFB_REMOTE_ENDPOINT")
        .env_remove("CFB_REMOTE_KEY")
        .env("RUST_LOG", "warn");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    cfb().args(args).output().expect("spawn cfb")
}

pub fn core_fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn lexicon() -> String {
    core_fixtures().join("lexicon.jsonl").display().to_string()
}

/// A running `cfb serve` on an ephemeral port.
pub struct Server {
    pub child: Child,
    pub base: String,
}

impl Server {
    pub fn start(data_dir: &Path, extra: &[&str]) -> Server {
        let mut child = cfb()
            .args(["serve", "--listen", "127.0.0.1:0", "--data-dir"])
            .arg(data_dir)
            .args(extra)
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .expect("spawn cfb serve");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut line = String::new();
        BufReader::new(stdout).read_line(&mut line).expect("read listen line");
        let base = line.trim().strip_prefix("listening on ").unwrap_or_else(|| panic!("unexpected: {line:?}")).to_string();
        Server { child, base }
    }

    /// SIGKILL: no graceful shutdown, no flushing.
    pub fn kill(mut self) {
        self.child.kill().expect("kill");
        self.child.wait().expect("wait");
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
