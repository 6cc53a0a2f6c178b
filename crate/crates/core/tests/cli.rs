use std::io::Write;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mirrorgeo"))
}

fn config(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn run_writes_versioned_csv() {
    let f = config(
        "[geometry]\nw = \"l2\"\nx = \"l2\"\n[regularizer]\ntype = \"euclidean\"\n[run]\nn_list = [16, 32]\ndims = [2]\n",
    );
    let out = bin().arg("run").arg(f.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# mirrorgeo-csv v1\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn bad_config_exits_with_two() {
    let f = config("[geometry]\nw = \"l2\"\nx = \"l2\"\nbogus = 1\n");
    let out = bin().arg("run").arg(f.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn value_bound_one_dimensional() {
    let out = bin().args(["value-bound", "--n", "2", "--dim", "1", "--wball", "linf", "--xball", "linf"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "value_lower=0.5 exhaustive=true");
}
