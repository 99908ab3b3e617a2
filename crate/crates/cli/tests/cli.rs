use std::fs;
use std::process::Command;

fn quatmatch() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_quatmatch"));
    c.env_remove("QUATMATCH_CACHE_DIR");
    c
}

fn stdout_of(args: &[&str]) -> String {
    let out = quatmatch().args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn degree_subcommand() {
    let s = stdout_of(&["degree", "--D", "6", "--N", "1", "--m", "5"]);
    assert!(s.contains("deg T(5) = 6"), "{s}");
    assert!(s.contains("vol = -1/6"), "{s}");
    assert!(s.contains("r'(5) = -36"), "{s}");
}

#[test]
fn classset_subcommand() {
    let s = stdout_of(&["classset", "--D", "2", "--N", "3"]);
    assert!(s.contains("class number 1"), "{s}");
    assert!(s.contains("mass 1/3"), "{s}");
}

#[test]
fn oracle_and_local_subcommands() {
    let s = stdout_of(&["oracle", "--pattern", "split", "--p", "2", "--k", "1"]);
    assert!(s.contains("closed form 3, oracle 3: agree"), "{s}");
    let s = stdout_of(&["local", "--p", "2"]);
    assert!(s.contains("lattice matchings hold: true"), "{s}");
    assert!(s.contains("basis lemma holds: true"), "{s}");
}

#[test]
fn verify_writes_identical_reports_cold_and_warm() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache");
    let run = |out: &str| {
        let out_dir = tmp.path().join(out);
        let st = quatmatch()
            .args(["verify", "--theorem", "1.1", "--D", "1", "--p", "2", "--q", "3", "--m-max", "12", "--format", "json"])
            .arg("--cache-dir")
            .arg(&cache)
            .arg("--out-dir")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(st.status.success());
        let mut files: Vec<_> = fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|p| (p.file_name().unwrap().to_owned(), fs::read(p).unwrap())).collect::<Vec<_>>()
    };
    let cold = run("a");
    let warm = run("b");
    assert_eq!(cold, warm);
    assert_eq!(cold.len(), 2);
    let summary = String::from_utf8(cold.iter().find(|(n, _)| n == "summary.json").unwrap().1.clone()).unwrap();
    assert!(summary.contains("\"all_pass\": true"), "{summary}");
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    fs::write(&cfg, "theorem = 1.4\nD = 2\np = 3\nm-max = 3\nformat = csv\nindefinite-scale = 2\n").unwrap();
    let out = quatmatch().args(["verify", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let s = String::from_utf8(out.stdout).unwrap();
    assert_eq!(s.lines().count(), 4, "{s}");
    assert!(s.starts_with("m,lhs,rhs,pass\n1,-12/1,-12/1,true"), "{s}");
    // a flag overrides the file; scale 3 breaks the identity and names the row
    let out = quatmatch().args(["verify", "--indefinite-scale", "3", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("first failing row: m = 1"), "{err}");
}

#[test]
fn bad_config_field_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.conf");
    fs::write(&cfg, "theorem = 1.4\nm-max = many\n").unwrap();
    let out = quatmatch().args(["verify", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("m-max"));
}

#[test]
fn cache_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = quatmatch().env("QUATMATCH_CACHE_DIR", tmp.path()).args(["classset", "--D", "3"]).output().unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("classset_D3_N1.txt").exists());
}
