use std::path::Path;
use std::process::{Command, Output};

fn paircc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paircc")).current_dir(dir).args(args).output().unwrap()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

#[test]
fn compile_verify_and_corrupt() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("project.toml"), "curve = \"bn254\"\nseed = 11\n").unwrap();
    let o = paircc(d, &["--config", "project.toml", "compile", "--out", "a.bin"]);
    assert!(o.status.success(), "{}", text(&o));
    let out = text(&o);
    assert!(out.contains("init 76560") && out.contains("peak regs") && out.contains("binary"), "{out}");

    let o = paircc(d, &["--config", "project.toml", "compile", "--out", "b.bin"]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(d.join("a.bin")).unwrap(), std::fs::read(d.join("b.bin")).unwrap());

    let o = paircc(d, &["gen-vectors", "--curve", "bn254", "--trials", "2", "--out", "v.jsonl"]);
    assert!(o.status.success(), "{}", text(&o));
    assert_eq!(std::fs::read_to_string(d.join("v.jsonl")).unwrap().lines().count(), 2);

    let o = paircc(d, &["verify", "--curve", "bn254", "--bin", "a.bin", "--trials", "1", "--bilinear", "1", "--vectors", "v.jsonl"]);
    assert!(o.status.success(), "{}", text(&o));

    let o = paircc(d, &["verify", "--curve", "bn254", "--bin", "a.bin", "--trials", "0", "--bilinear", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text(&o).contains("warning"));

    let mut bytes = std::fs::read(d.join("a.bin")).unwrap();
    let at = bytes.len() - 8 * 20_000;
    bytes[at + 1] ^= 0x08;
    std::fs::write(d.join("bad.bin"), &bytes).unwrap();
    let o = paircc(d, &["verify", "--curve", "bn254", "--bin", "bad.bin", "--trials", "1", "--bilinear", "0"]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));

    let o = paircc(d, &["simulate", "--curve", "bn254", "--bin", "a.bin", "--window", "100:110", "--out", "w.csv"]);
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("cycles=62280"));
    assert_eq!(std::fs::read_to_string(d.join("w.csv")).unwrap().lines().count(), 11);
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("project.toml"), "curve = \"bn254\"\nsed = 11\n").unwrap();
    assert_eq!(paircc(d, &["--config", "project.toml", "compile"]).status.code(), Some(1));
    std::fs::write(d.join("hw.toml"), "width = 2\nlinear_alus = 1\nbanks = 1\nregs_per_bank = 64\nread_ports = 2\nwrite_ports = 1\nfifo = { present = false }\nlatency = { long = 38, short = 8 }\n").unwrap();
    let o = paircc(d, &["compile", "--curve", "bn254", "--hw", "hw.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("fifo"), "{}", text(&o));
    let o = paircc(d, &["compile", "--curve", "bn254", "--variants", "12:sqr=toom3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("sqr at the level of degree 12"), "{}", text(&o));
}
