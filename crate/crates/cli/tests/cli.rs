use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_docpriv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &TempDir, name: &str, contents: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn obfuscate(dir: &TempDir, out_name: &str, seed: Option<&str>) -> (Output, String) {
    let embeddings = fixture("toy_2d.txt");
    let corpus = fixture("corpus.txt");
    let stop = fixture("stopwords.txt");
    let out = dir.path().join(out_name);
    let mut args = vec![
        "obfuscate",
        "--embeddings",
        path_str(&embeddings),
        "--epsilon",
        "2",
        "--length",
        "5",
        "--stopwords",
        path_str(&stop),
        "--input",
        path_str(&corpus),
        "--output",
        path_str(&out),
    ];
    if let Some(s) = seed {
        args.extend(["--seed", s]);
    }
    let o = run(&args);
    let text = fs::read_to_string(&out).unwrap_or_default();
    (o, text)
}

#[test]
fn obfuscation_is_reproducible_from_the_seed() {
    let dir = TempDir::new().unwrap();
    let (o1, a) = obfuscate(&dir, "a.txt", Some("42"));
    let (o2, b) = obfuscate(&dir, "b.txt", Some("42"));
    assert_eq!(code(&o1), 0, "{}", stderr(&o1));
    assert_eq!(code(&o2), 0);
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 3);
    for line in a.lines() {
        assert_eq!(line.split(' ').count(), 5);
    }
    let summary = stderr(&o1);
    assert!(summary.contains("seed: 42"), "{summary}");
    assert!(summary.contains("documents: 3"), "{summary}");
    // "around" is the only out-of-vocabulary token after stopword removal
    assert!(summary.contains("oov tokens skipped: 1"), "{summary}");
}

#[test]
fn default_seed_is_printed_and_replays() {
    let dir = TempDir::new().unwrap();
    let (o, first) = obfuscate(&dir, "a.txt", None);
    assert_eq!(code(&o), 0);
    let err = stderr(&o);
    let seed = err
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .expect("seed announced")
        .to_owned();
    let (_, again) = obfuscate(&dir, "b.txt", Some(&seed));
    assert_eq!(first, again);
}

#[test]
fn report_sidecar_has_one_json_record_per_document() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.jsonl");
    let o = run(&[
        "obfuscate",
        "--embeddings",
        path_str(&fixture("toy_2d.txt")),
        "--epsilon",
        "1",
        "--length",
        "4",
        "--seed",
        "7",
        "--input",
        path_str(&fixture("corpus.txt")),
        "--report",
        path_str(&report),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 3);
    let lines: Vec<serde_json::Value> = fs::read_to_string(&report)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    for (i, rec) in lines.iter().enumerate() {
        assert_eq!(rec["document"], i);
        assert_eq!(rec["seed"], 7 + i as u64);
        assert_eq!(rec["epsilon"], 1.0);
        assert_eq!(rec["output_length"], 4);
    }
    // no stopword list, so "the", "on", ... are all out of vocabulary
    assert!(rec_has_oov(&lines[0], "on"));
}

fn rec_has_oov(rec: &serde_json::Value, word: &str) -> bool {
    rec["oov"].as_array().unwrap().iter().any(|w| w == word)
}

#[test]
fn strict_oov_fails_with_data_error() {
    let o = run(&[
        "obfuscate",
        "--embeddings",
        path_str(&fixture("toy_2d.txt")),
        "--epsilon",
        "1",
        "--length",
        "4",
        "--seed",
        "1",
        "--strict-oov",
        "--stopwords",
        path_str(&fixture("stopwords.txt")),
        "--input",
        path_str(&fixture("corpus.txt")),
    ]);
    assert_eq!(code(&o), 3);
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("around"), "{err}");
}

#[test]
fn missing_embeddings_file_names_the_path() {
    let o = run(&[
        "obfuscate",
        "--embeddings",
        "/no/such/vectors.txt",
        "--epsilon",
        "1",
        "--length",
        "3",
        "--input",
        path_str(&fixture("corpus.txt")),
    ]);
    assert_eq!(code(&o), 3);
    assert!(
        stderr(&o).contains("/no/such/vectors.txt"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn invalid_epsilon_and_length_are_usage_errors() {
    let corpus = fixture("corpus.txt");
    let emb = fixture("toy_2d.txt");
    for (eps, len) in [("0", "3"), ("-1", "3"), ("1", "0")] {
        let o = run(&[
            "obfuscate",
            "--embeddings",
            path_str(&emb),
            "--epsilon",
            eps,
            "--length",
            len,
            "--input",
            path_str(&corpus),
        ]);
        assert_eq!(code(&o), 2, "eps {eps} len {len}: {}", stderr(&o));
    }
    assert_eq!(code(&run(&["obfuscate"])), 2);
}

fn plane(dir: &TempDir) -> String {
    write(dir, "plane.txt", "a 0 0\nb 3 4\nc 1 1\n")
}

#[test]
fn wmd_of_identical_documents_is_zero() {
    let dir = TempDir::new().unwrap();
    let emb = plane(&dir);
    let d = write(&dir, "d.txt", "a b c b\n");
    let o = run(&["wmd", "--embeddings", &emb, &d, &d]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "0.000000000\n");
}

#[test]
fn wmd_forced_split() {
    let dir = TempDir::new().unwrap();
    let emb = plane(&dir);
    let d1 = write(&dir, "d1.txt", "a");
    let d2 = write(&dir, "d2.txt", "a b");
    let o = run(&["wmd", "--embeddings", &emb, &d1, &d2, "--flow"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("2.500000000"));
    assert_eq!(lines.next(), Some("flow\ta\tb"));
    assert_eq!(lines.next(), Some("a\t0.500000000\t0.500000000"));
}

#[test]
fn wmd_solvers_agree_on_equal_lengths() {
    let dir = TempDir::new().unwrap();
    let emb = plane(&dir);
    let d1 = write(&dir, "d1.txt", "a a b c");
    let d2 = write(&dir, "d2.txt", "c b b a");
    let outputs: Vec<String> = ["auto", "lp", "assignment"]
        .iter()
        .map(|s| {
            stdout(&run(&[
                "wmd",
                "--embeddings",
                &emb,
                &d1,
                &d2,
                "--solver",
                s,
            ]))
        })
        .collect();
    assert!(!outputs[0].is_empty());
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn wmd_reports_oov_word_with_document_and_position() {
    let dir = TempDir::new().unwrap();
    let emb = plane(&dir);
    let d1 = write(&dir, "d1.txt", "a b");
    let d2 = write(&dir, "d2.txt", "b zebra a");
    let o = run(&["wmd", "--embeddings", &emb, &d1, &d2]);
    assert_eq!(code(&o), 3);
    let err = stderr(&o);
    assert!(
        err.contains("second document") && err.contains("word 2") && err.contains("zebra"),
        "{err}"
    );
}

#[test]
fn assignment_solver_rejects_unequal_lengths() {
    let dir = TempDir::new().unwrap();
    let emb = plane(&dir);
    let d1 = write(&dir, "d1.txt", "a");
    let d2 = write(&dir, "d2.txt", "a b");
    let o = run(&[
        "wmd",
        "--embeddings",
        &emb,
        &d1,
        &d2,
        "--solver",
        "assignment",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_toy_fixture_passes() {
    let emb = fixture("toy_1d.txt");
    let o = run(&[
        "verify",
        "--embeddings",
        path_str(&emb),
        "--epsilon",
        "1",
        "--length",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("word_result: PASS"), "{text}");
    assert!(text.contains("documents: 35"), "{text}");
    assert!(text.contains("pairs_checked: 1225"), "{text}");
    assert!(text.contains("\nresult: PASS"), "{text}");
}

#[test]
fn verify_document_list_passes() {
    let o = run(&[
        "verify",
        "--embeddings",
        path_str(&fixture("toy_1d.txt")),
        "--epsilon",
        "0.5",
        "--docs",
        path_str(&fixture("verify_docs.txt")),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("pairs_checked: 16"));
}

#[test]
fn verify_negative_control_fails() {
    let emb = fixture("toy_1d.txt");
    let o = run(&[
        "verify",
        "--embeddings",
        path_str(&emb),
        "--epsilon",
        "1",
        "--length",
        "2",
        "--bound-scale",
        "0.5",
    ]);
    assert_eq!(code(&o), 4);
    let text = stdout(&o);
    assert!(text.contains("\nresult: FAIL"), "{text}");
    let excess: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("max_log_ratio_excess: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(excess > 0.0);
}

#[test]
fn verify_rejects_two_dimensional_tables() {
    let o = run(&[
        "verify",
        "--embeddings",
        path_str(&fixture("toy_2d.txt")),
        "--epsilon",
        "1",
        "--length",
        "2",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("one-dimensional"), "{}", stderr(&o));
}

#[test]
fn verify_rejects_empty_inputs() {
    let dir = TempDir::new().unwrap();
    let emb = fixture("toy_1d.txt");
    let o = run(&[
        "verify",
        "--embeddings",
        path_str(&emb),
        "--epsilon",
        "1",
        "--length",
        "0",
    ]);
    assert_eq!(code(&o), 2);
    let empty = write(&dir, "empty.txt", "\n");
    let o = run(&[
        "verify",
        "--embeddings",
        path_str(&emb),
        "--epsilon",
        "1",
        "--docs",
        &empty,
    ]);
    assert_eq!(code(&o), 3);
    let o = run(&[
        "verify",
        "--embeddings",
        path_str(&emb),
        "--epsilon",
        "1",
        "--length",
        "5",
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn verify_monte_carlo_works_in_two_dimensions() {
    let o = run(&[
        "verify",
        "--embeddings",
        path_str(&fixture("toy_2d.txt")),
        "--epsilon",
        "1",
        "--monte-carlo",
        "2000",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("statistical"), "{text}");
    assert!(text.contains("word_pairs_checked: 81"), "{text}");
}

#[test]
fn sample_is_seeded_and_accepts_negative_centers() {
    let args = [
        "sample",
        "--epsilon",
        "2",
        "--center=-1,0.5,3",
        "--count",
        "4",
        "--seed",
        "9",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for l in lines {
        let v: Vec<f64> = l.split(' ').map(|x| x.parse().unwrap()).collect();
        assert_eq!(v.len(), 3);
    }
    assert_eq!(code(&run(&["sample", "--epsilon", "1"])), 2);
    assert_eq!(
        code(&run(&[
            "sample",
            "--epsilon",
            "1",
            "--dim",
            "2",
            "--center",
            "1,2,3"
        ])),
        2
    );
}

#[test]
fn nearest_snaps_vectors() {
    let dir = TempDir::new().unwrap();
    let emb = plane(&dir);
    let o = run(&["nearest", "--embeddings", &emb, "2.9", "3.8"]);
    assert_eq!(stdout(&o), "b\n");
    let o = run(&["nearest", "--embeddings", &emb, "-1,-2"]);
    assert_eq!(stdout(&o), "a\n");
    let o = run(&["nearest", "--embeddings", &emb, "1"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn thousand_documents_in_fifty_dimensions() {
    use std::fmt::Write;
    let dir = TempDir::new().unwrap();
    let mut table = String::new();
    for w in 0..2000 {
        write!(table, "w{w}").unwrap();
        for k in 0..50 {
            // deterministic pseudo-random components
            let x = ((w * 7919 + k * 104_729) % 2003) as f64 / 1001.5 - 1.0;
            write!(table, " {x}").unwrap();
        }
        table.push('\n');
    }
    let emb = write(&dir, "emb.txt", &table);
    let mut corpus = String::new();
    for d in 0..1000 {
        let words: Vec<String> = (0..30)
            .map(|j| format!("w{}", (d * 31 + j * 17) % 2000))
            .collect();
        corpus.push_str(&words.join(" "));
        corpus.push('\n');
    }
    let input = write(&dir, "corpus.txt", &corpus);
    let out = dir.path().join("out.txt");
    let start = Instant::now();
    let o = run(&[
        "obfuscate",
        "--embeddings",
        &emb,
        "--epsilon",
        "5",
        "--length",
        "30",
        "--seed",
        "11",
        "--input",
        &input,
        "--output",
        path_str(&out),
    ]);
    let took = start.elapsed();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1000);
    assert!(took < Duration::from_secs(60), "{took:?}");
}
