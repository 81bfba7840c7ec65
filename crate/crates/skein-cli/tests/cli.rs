use std::path::PathBuf;
use std::process::Command;

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn skein(args: &[&str], cache: Option<&std::path::Path>) -> (bool, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_skein"));
    cmd.args(args).env_remove("SKEIN_CACHE_DIR");
    if let Some(c) = cache {
        cmd.env("SKEIN_CACHE_DIR", c);
    }
    let out = cmd.output().unwrap();
    (out.status.success(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn ok(args: &[&str]) -> String {
    let (success, out, err) = skein(args, None);
    assert!(success, "{args:?}: {err}");
    out
}

#[test]
fn kh_examples() {
    assert!(ok(&["kh", example("unknot.tangle").to_str().unwrap()]).contains("i=0: q^{-1}+q\n"));
    assert!(ok(&["kh", example("empty.tangle").to_str().unwrap()]).ends_with("i=0: 1\n"));
    let trefoil = ok(&["kh", example("trefoil.tangle").to_str().unwrap()]);
    let terms: usize = trefoil.lines().filter(|l| l.starts_with("i=")).map(|l| l.matches('q').count()).sum();
    assert_eq!(terms, 4);
}

#[test]
fn kirby_examples() {
    for name in ["s4.kirby", "s1xs3.kirby", "s2xd2_cancel.kirby"] {
        let out = ok(&["pipeline", example(name).to_str().unwrap()]);
        assert!(out.ends_with("i\tj\tdim\tstable\n0\t0\t1\tyes\ni=0: 1\n"), "{name}:\n{out}");
    }
    let out = ok(&["cable-module", example("s2xd2.kirby").to_str().unwrap()]);
    assert!(out.ends_with("i=0: q^{-4}+q^{-2}+1\n"), "{out}");
    let out = ok(&["pipeline", example("s1xb3_two_point.kirby").to_str().unwrap()]);
    assert!(out.ends_with("i=0: 2+q^{2}\ni=1: q^{4}\n"), "{out}");
}

#[test]
fn onehandle_commands() {
    let out = ok(&["hh0", "--points", "1"]);
    assert!(out.starts_with("4 classes\n"));
    let out = ok(&["decompose", example("long_trefoil.tangle").to_str().unwrap()]);
    assert!(out.starts_with("C0 x1, C1 x1\n"));
    let out = ok(&["trace", example("hopf.tangle").to_str().unwrap(), "--movie", "identity"]);
    assert_eq!(out.trim().trim_start_matches('-'), "4");
    let out = ok(&["rw-probe", example("s1xb3_two_point.kirby").to_str().unwrap(), "--max-twists", "2"]);
    assert!(out.contains("n=2"));
}

#[test]
fn cache_hits_are_identical_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let file = example("trefoil.tangle");
    let args = ["kh", file.to_str().unwrap()];
    let plain = ok(&args);
    let (_, first, _) = skein(&args, Some(dir.path()));
    let (_, second, _) = skein(&args, Some(dir.path()));
    assert_eq!(plain, first);
    assert_eq!(plain, second);
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(entries.len(), 1);

    // a stored complex with a bogus differential entry must be rejected
    let text = std::fs::read_to_string(&entries[0]).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let sizes: Vec<usize> = v["objs"].as_array().unwrap().iter().map(|o| o.as_array().unwrap().len()).collect();
    let k = (0..sizes.len() - 1).find(|&k| sizes[k] > 0 && sizes[k + 1] > 0).unwrap();
    v["d"][k].as_array_mut().unwrap().push(serde_json::json!([0, 0, [[0, "1"]]]));
    std::fs::write(&entries[0], v.to_string()).unwrap();
    let (success, _, err) = skein(&args, Some(dir.path()));
    assert!(!success);
    assert!(err.contains("cache"), "{err}");

    let lasagna = example("s2xd2_cancel.kirby");
    let args = ["--format", "json", "pipeline", lasagna.to_str().unwrap()];
    let (_, a, _) = skein(&args, Some(dir.path()));
    let (_, b, _) = skein(&args, Some(dir.path()));
    assert_eq!(a, b);
    assert_eq!(a, ok(&args));
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.kirby");
    std::fs::write(&bad, "[handles]\nn = 1\np = 1\n[K]\nword = \"cup 0\\ncap 0\"\n[sigma.1]\ncounts = [[0, 2]]\n").unwrap();
    let (success, _, err) = skein(&["pipeline", bad.to_str().unwrap()], None);
    assert!(!success);
    assert!(err.contains("sigma.1"), "{err}");

    let word = dir.path().join("bad.tangle");
    std::fs::write(&word, "cup 0\nx+ 0\nx+ 7\n").unwrap();
    let (success, _, err) = skein(&["kh", word.to_str().unwrap()], None);
    assert!(!success);
    assert!(err.contains("line 3") || err.contains("generator 3"), "{err}");
}
