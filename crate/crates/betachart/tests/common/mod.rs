#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

pub const TIRE_MEAN: &str = "x1,x2,x1*x2,x1*x4,x2*x5";
pub const TIRE_DISP: &str = "x1,x1*x2";

/// Path of the bundled tire fixture, after checking it against the
/// checked-in digest. A modified fixture stops the test.
pub fn tire_fixture() -> PathBuf {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let path = root.join(betachart::TIRE_FIXTURE);
    let expected = std::fs::read_to_string(root.join(betachart::TIRE_FIXTURE_DIGEST)).expect("digest file");
    let bytes = std::fs::read(&path).expect("fixture");
    let actual: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(actual, expected.trim(), "fixture {} does not match its digest; refusing to run", path.display());
    path
}

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_betachart"));
    c.env_remove("BETACHART_SEED");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn betachart")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}
