#![allow(dead_code)]

use std::path::PathBuf;

/// One fixture per subcommand. Set `UPDATE_GOLDEN=1` to rewrite them.
pub const CASES: &[(&str, &[&str])] = &[
    ("qfun.csv", &["qfun", "--q", "0.5,1,1.5", "--x", "0.25,2,3", "--y", "3"]),
    ("stirling.csv", &["stirling", "--q", "0.5,1,1.5", "--n", "10,100,1000"]),
    ("pmf.csv", &["pmf", "--q", "1,0.5,1.3", "--n", "10", "--r", "0.5", "--samples", "2000", "--seed", "7"]),
    ("divergence.csv", &["divergence", "--q", "0.5,1,1.5", "--alpha=-3,0,1", "--p", "0.5,0.5", "--r", "0.25,0.75"]),
    ("ldp.csv", &["ldp", "--q", "0.5,1,1.5", "--n", "100,1000", "--r", "0.5", "--x", "0.3"]),
    ("ldp.json", &["ldp", "--q", "0.7,1.3", "--n", "50", "--r", "0.6", "--x", "0.25", "--format", "json"]),
    ("pmf.record", &["pmf", "--q", "0.5", "--n", "10", "--r", "0.5", "--format", "record"]),
];

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

pub fn run(args: &[&str]) -> (i32, Vec<u8>, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = tsallis_ldp_cli::run(std::iter::once("tsallis-ldp").chain(args.iter().copied()), &mut out, &mut err);
    (code, out, err)
}
