use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

fn run(out: &Path, extra: &[&str]) {
    for cmd in ["figures", "validate"] {
        let status = Command::new(env!("CARGO_BIN_EXE_covad"))
            .args([cmd, "--samples", "100000", "--seed", "3"])
            .args(extra)
            .arg("--out")
            .arg(out)
            .env_remove("COVAD_OUT_DIR")
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success(), "{cmd} {extra:?}");
    }
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect()
}

#[test]
fn outputs_are_byte_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    run(&a, &[]);
    run(&b, &[]);
    run(&c, &["--workers", "4"]);
    let d = dir.path().join("d");
    run(&d, &["--workers", "1"]);
    let reference = snapshot(&a);
    assert_eq!(reference.len(), 4);
    for other in [&b, &c, &d] {
        assert_eq!(reference, snapshot(other), "{}", other.display());
    }
}
