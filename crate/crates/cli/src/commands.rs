use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::anyhow;
use docpriv::verifier::{check_document_indistinguishability_scaled, PrivacyCheckResult};
use docpriv::{
    check_word_privacy, enumerate_documents, load_embeddings, load_stopwords, mc_word_distribution,
    obfuscate_corpus, sample_noise, seeded_rng, tokenize, wmd_assignment, wmd_lp, BowDocument,
    EmbeddingTable, Epsilon, OovPolicy, PreprocessConfig, WordVector,
};
use serde_json::json;

use crate::exit::{CliResult, Context, Failure, Status};
use crate::{NearestArgs, ObfuscateArgs, SampleArgs, Solver, VerifyArgs, WmdArgs};

fn open(path: &Path, what: &str) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::data(anyhow!("cannot open {what} {}: {e}", path.display())))
}

fn read_text(path: &Path, what: &str) -> CliResult<String> {
    let mut text = String::new();
    open(path, what)?
        .read_to_string(&mut text)
        .map_err(|e| Failure::data(anyhow!("cannot read {what} {}: {e}", path.display())))?;
    Ok(text)
}

fn load_table(path: &Path) -> CliResult<EmbeddingTable> {
    load_embeddings(open(path, "embeddings")?)
        .context_with(|| format!("invalid embeddings file {}", path.display()))
}

fn epsilon(value: f64) -> CliResult<Epsilon> {
    Ok(Epsilon::new(value)?)
}

fn create(path: &Path, what: &str) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::data(anyhow!("cannot create {what} {}: {e}", path.display())))
}

fn io_failure(e: io::Error) -> Failure {
    Failure::data(anyhow!("write failed: {e}"))
}

/// Uses the given seed or draws one; either way it is announced on stderr.
fn effective_seed(seed: Option<u64>) -> u64 {
    let seed = seed.unwrap_or_else(rand::random);
    eprintln!("seed: {seed}");
    seed
}

pub fn obfuscate(args: ObfuscateArgs) -> CliResult {
    let eps = epsilon(args.epsilon)?;
    let mut config = PreprocessConfig::new(args.length)?.with_lowercase(!args.no_lowercase);
    if args.strict_oov {
        config = config.with_oov_policy(OovPolicy::Strict);
    }
    if let Some(path) = &args.stopwords {
        let words = load_stopwords(open(path, "stopword list")?)
            .context_with(|| format!("invalid stopword list {}", path.display()))?;
        config = config.with_stopwords(words);
    }
    let table = load_table(&args.embeddings)?;

    let corpus = match &args.input {
        Some(path) => read_text(path, "corpus")?,
        None => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Failure::data(anyhow!("cannot read corpus from stdin: {e}")))?;
            text
        }
    };
    let docs: Vec<&str> = corpus.lines().collect();
    let seed = effective_seed(args.seed);

    let reports = obfuscate_corpus(&table, &docs, &config, eps, seed).map_err(|e| {
        let mut msg = format!("{} of {} documents failed", e.failures.len(), docs.len());
        for (i, err) in e.failures.iter().take(10) {
            msg.push_str(&format!("\n  line {}: {err}", i + 1));
        }
        if e.failures.len() > 10 {
            msg.push_str("\n  ...");
        }
        Failure::data(anyhow!(msg))
    })?;

    let mut out: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(create(path, "output")?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    for r in &reports {
        writeln!(out, "{}", r.output_words).map_err(io_failure)?;
    }
    out.flush().map_err(io_failure)?;

    if let Some(path) = &args.report {
        let mut sidecar = create(path, "report")?;
        for (i, r) in reports.iter().enumerate() {
            let line = json!({
                "document": i,
                "seed": r.seed,
                "epsilon": r.epsilon.value(),
                "input_length": r.input_length,
                "output_length": r.output_words.len(),
                "oov": r.oov_words,
            });
            writeln!(sidecar, "{line}").map_err(io_failure)?;
        }
        sidecar.flush().map_err(io_failure)?;
    }

    let oov: usize = reports.iter().map(|r| r.oov_words.len()).sum();
    eprintln!(
        "documents: {}, oov tokens skipped: {oov}, epsilon: {}, length: {}, seed: {seed}",
        reports.len(),
        eps,
        args.length
    );
    Ok(Status::Ok)
}

/// Reads a document, reporting the first out-of-vocabulary word by position.
fn read_document(
    table: &EmbeddingTable,
    path: &Path,
    which: &str,
    lowercase: bool,
) -> CliResult<BowDocument> {
    let tokens = tokenize(&read_text(path, "document")?, lowercase);
    if let Some((pos, word)) = tokens.iter().enumerate().find(|(_, w)| !table.contains(w)) {
        return Err(Failure::data(anyhow!(
            "{which} document {}: word {} ({word:?}) is out of vocabulary",
            path.display(),
            pos + 1
        )));
    }
    BowDocument::from_words(tokens).context_with(|| format!("{which} document {}", path.display()))
}

pub fn wmd(args: WmdArgs) -> CliResult {
    let table = load_table(&args.embeddings)?;
    let lowercase = !args.no_lowercase;
    let d1 = read_document(&table, &args.first, "first", lowercase)?;
    let d2 = read_document(&table, &args.second, "second", lowercase)?;
    let solution = match args.solver {
        Solver::Auto => docpriv::wmd(&table, &d1, &d2)?,
        Solver::Lp => wmd_lp(&table, &d1, &d2)?,
        Solver::Assignment => {
            let m = wmd_assignment(&table, &d1, &d2)?;
            docpriv::WmdSolution {
                distance: m.total_cost / d1.len() as f64,
                flow: m.flow(),
            }
        }
    };
    let mut out = io::stdout().lock();
    writeln!(out, "{:.9}", solution.distance).map_err(io_failure)?;
    if args.flow {
        let cols = d2.words();
        writeln!(out, "flow\t{}", cols.join("\t")).map_err(io_failure)?;
        for (i, w) in d1.words().into_iter().enumerate() {
            let row: Vec<String> = (0..cols.len())
                .map(|j| format!("{:.9}", solution.flow.get(i, j)))
                .collect();
            writeln!(out, "{w}\t{}", row.join("\t")).map_err(io_failure)?;
        }
    }
    Ok(Status::Ok)
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn sample(args: SampleArgs) -> CliResult {
    let eps = epsilon(args.epsilon)?;
    let center = match (args.center, args.dim) {
        (Some(c), Some(n)) if c.len() != n => {
            return Err(Failure::usage(anyhow!(
                "--center has {} components but --dim is {n}",
                c.len()
            )))
        }
        (Some(c), _) => c,
        (None, Some(n)) => vec![0.0; n],
        (None, None) => return Err(Failure::usage(anyhow!("give --dim or --center"))),
    };
    let center = WordVector::new(center)?;
    let mut rng = seeded_rng(effective_seed(args.seed));
    let mut out = BufWriter::new(io::stdout().lock());
    for _ in 0..args.count {
        let z = sample_noise(&center, eps, &mut rng)?;
        writeln!(out, "{}", join_floats(z.as_slice())).map_err(io_failure)?;
    }
    out.flush().map_err(io_failure)?;
    Ok(Status::Ok)
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn print_check(out: &mut impl Write, prefix: &str, r: &PrivacyCheckResult) -> io::Result<()> {
    writeln!(out, "{prefix}pairs_checked: {}", r.pairs_checked)?;
    writeln!(
        out,
        "{prefix}max_log_ratio_excess: {:e}",
        r.max_log_ratio_excess
    )?;
    writeln!(out, "{prefix}tolerance: {:e}", r.tolerance)?;
    if let Some(w) = &r.worst {
        writeln!(out, "{prefix}worst_input: {}", w.input)?;
        writeln!(out, "{prefix}worst_other: {}", w.other)?;
        writeln!(out, "{prefix}worst_output: {}", w.output)?;
    }
    writeln!(out, "{prefix}result: {}", verdict(r.passed))
}

fn read_verify_docs(table: &EmbeddingTable, path: &Path) -> CliResult<Vec<BowDocument>> {
    let mut docs = Vec::new();
    for (i, line) in open(path, "document list")?.lines().enumerate() {
        let line = line.map_err(|e| Failure::data(anyhow!("{}: {e}", path.display())))?;
        let tokens = tokenize(&line, true);
        if tokens.is_empty() {
            continue;
        }
        if let Some(w) = tokens.iter().find(|w| !table.contains(w)) {
            return Err(Failure::data(anyhow!(
                "{} line {}: word {w:?} is out of vocabulary",
                path.display(),
                i + 1
            )));
        }
        docs.push(BowDocument::from_words(tokens)?);
    }
    Ok(docs)
}

pub fn verify(args: VerifyArgs) -> CliResult {
    let eps = epsilon(args.epsilon)?;
    if !(args.bound_scale.is_finite() && args.bound_scale >= 0.0) {
        return Err(Failure::usage(anyhow!(
            "--bound-scale must be finite and non-negative"
        )));
    }
    let table = load_table(&args.embeddings)?;
    if let Some(trials) = args.monte_carlo {
        return verify_monte_carlo(&table, eps, trials, args.seed);
    }
    if table.dimension() != 1 {
        return Err(Failure::usage(anyhow!(
            "exact verification requires a one-dimensional embedding table, got dimension {}; \
             use --monte-carlo for a statistical estimate",
            table.dimension()
        )));
    }

    let words = check_word_privacy(&table, eps)?;
    let docs = match (&args.length, &args.docs) {
        (Some(0), _) => return Err(Failure::usage(anyhow!("--length must be at least 1"))),
        (Some(len), _) => {
            let vocab: Vec<&str> = table.words().collect();
            Some((enumerate_documents(&vocab, *len), *len))
        }
        (None, Some(path)) => {
            let docs = read_verify_docs(&table, path)?;
            if docs.is_empty() {
                return Err(Failure::data(anyhow!(
                    "{} contains no documents",
                    path.display()
                )));
            }
            let len = docs.first().map_or(0, BowDocument::len);
            Some((docs, len))
        }
        (None, None) => None,
    };
    let documents = match &docs {
        Some((docs, _)) => Some(check_document_indistinguishability_scaled(
            &table,
            docs,
            eps,
            args.bound_scale,
        )?),
        None => None,
    };

    let mut out = io::stdout().lock();
    let report = (|| -> io::Result<()> {
        writeln!(out, "mode: exact")?;
        writeln!(out, "vocabulary: {}", table.len())?;
        writeln!(out, "epsilon: {eps}")?;
        print_check(&mut out, "word_", &words)?;
        if let (Some((docs, len)), Some(r)) = (&docs, &documents) {
            writeln!(out, "documents: {}", docs.len())?;
            writeln!(out, "document_length: {len}")?;
            writeln!(out, "bound_scale: {}", args.bound_scale)?;
            print_check(&mut out, "", r)?;
            writeln!(
                out,
                "note: covers the per-word mechanism on equal-length documents; \
                 the fixed-length resampling step before it is outside this guarantee"
            )?;
        }
        Ok(())
    })();
    report.map_err(io_failure)?;

    let passed = words.passed && documents.as_ref().is_none_or(|r| r.passed);
    Ok(if passed {
        Status::Ok
    } else {
        Status::VerificationFailed
    })
}

fn verify_monte_carlo(
    table: &EmbeddingTable,
    eps: Epsilon,
    trials: usize,
    seed: Option<u64>,
) -> CliResult {
    if table.len() > docpriv::verifier::MAX_EXACT_VOCABULARY {
        return Err(Failure::usage(anyhow!(
            "vocabulary has {} words, limit is {}",
            table.len(),
            docpriv::verifier::MAX_EXACT_VOCABULARY
        )));
    }
    let seed = effective_seed(seed);
    let mut rng = seeded_rng(seed);
    let estimates = table
        .words()
        .map(|w| mc_word_distribution(table, w, eps, trials, &mut rng))
        .collect::<docpriv::Result<Vec<_>>>()?;

    let mut worst = f64::NEG_INFINITY;
    let mut at = None;
    let mut pairs = 0;
    for a in &estimates {
        for b in &estimates {
            let (wa, wb) = (&a.distribution.input_word, &b.distribution.input_word);
            let bound = eps.value() * table.word_distance(wa, wb)?;
            pairs += 1;
            // cells observed under both inputs only
            for (v, &p) in &a.distribution.probabilities {
                let q = b.distribution.probability(v);
                if q > 0.0 {
                    let excess = p.ln() - q.ln() - bound;
                    if excess > worst {
                        worst = excess;
                        at = Some((wa.clone(), wb.clone(), v.clone()));
                    }
                }
            }
        }
    }

    let mut out = io::stdout().lock();
    let report = (|| -> io::Result<()> {
        writeln!(out, "mode: monte-carlo (statistical estimate, not a proof)")?;
        writeln!(out, "dimension: {}", table.dimension())?;
        writeln!(out, "vocabulary: {}", table.len())?;
        writeln!(out, "epsilon: {eps}")?;
        writeln!(out, "trials_per_word: {trials}")?;
        writeln!(out, "seed: {seed}")?;
        writeln!(out, "word_pairs_checked: {pairs}")?;
        writeln!(out, "estimated_max_log_ratio_excess: {worst:e}")?;
        if let Some((a, b, v)) = at {
            writeln!(out, "worst_input: {a}")?;
            writeln!(out, "worst_other: {b}")?;
            writeln!(out, "worst_output: {v}")?;
        }
        writeln!(
            out,
            "note: ratios of rare outputs are noisy; compare against the sampling error before reading a positive value as a violation"
        )
    })();
    report.map_err(io_failure)?;
    Ok(Status::Ok)
}

pub fn nearest(args: NearestArgs) -> CliResult {
    let table = load_table(&args.embeddings)?;
    let word = table.nearest_word(&args.vector)?;
    println!("{word}");
    Ok(Status::Ok)
}
