//! Regenerates the desk-scale fixture under `fixtures/desk/`.
//!
//! ```text
//! cargo run --example desk_fixture [-- <out-dir>]
//! ```
//!
//! Twenty queries over five topics, 100 candidates each, 50-dimensional
//! synthetic embeddings. Every candidate contains each in-vocabulary query
//! term exactly once, so exact-match soft-TF is identical across candidates;
//! candidates differ in how many near synonyms (cosine 0.9 and 0.7) they
//! carry. Query `q05` holds an unjudged near-duplicate of its relevant
//! passage that the model ranks higher than the judged original.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rerank_explorer::tokenize::terms;
use rerank_explorer::{rerank, Candidate, EmbeddingTable, KernelBank};

const DIM: usize = 50;
const CANDIDATES: usize = 100;
const SEED: u64 = 2019;

pub const PLANTED_QUERY: &str = "q05";
pub const UNFOUND_QUERY: &str = "q14";
pub const OOV_QUERY: &str = "q20";

/// Per topic: (head term, cosine-0.9 neighbour, cosine-0.7 neighbour).
const TOPICS: [[(&str, &str, &str); 4]; 5] = [
    [("coral", "polyp", "anemone"), ("reef", "atoll", "shoal"), ("tide", "current", "surge"), ("plankton", "krill", "algae")],
    [("mortgage", "loan", "lender"), ("interest", "apr", "yield"), ("credit", "debit", "borrowing"), ("budget", "spending", "expenses")],
    [("vitamin", "nutrient", "mineral"), ("fever", "temperature", "chills"), ("diabetes", "insulin", "glucose"), ("allergy", "allergen", "pollen")],
    [("python", "script", "interpreter"), ("compiler", "linker", "bytecode"), ("database", "sql", "schema"), ("browser", "chrome", "firefox")],
    [("planet", "exoplanet", "orbit"), ("galaxy", "nebula", "quasar"), ("comet", "asteroid", "meteor"), ("telescope", "observatory", "lens")],
];

const QUERIES: [&str; 20] = [
    "What is a coral reef?",
    "How does the tide carry plankton",
    "coral reef plankton",
    "When is the tide at the reef",
    "What is mortgage interest?",
    "how to build credit",
    "monthly budget for a mortgage",
    "credit card interest",
    "vitamin for fever",
    "is diabetes an allergy",
    "fever and allergy symptoms",
    "vitamin D and diabetes",
    "python compiler",
    "python database tutorial",
    "browser database storage",
    "what compiler does the browser use",
    "planet in a galaxy",
    "comet seen through a telescope",
    "galaxy telescope images",
    "xyzzy plugh",
];

const FILLERS: [&str; 60] = [
    "system", "people", "year", "water", "report", "process", "large", "small", "common", "often",
    "found", "known", "example", "number", "several", "different", "important", "made", "part",
    "place", "world", "high", "low", "general", "result", "level", "form", "local", "early",
    "called", "long", "area", "group", "public", "based", "usually", "study", "information",
    "include", "method", "type", "case", "time", "work", "data", "order", "change", "point",
    "range", "rate", "effect", "factor", "model", "source", "service", "value", "name", "day",
    "side", "line",
];

const FUNCTION_WORDS: [&str; 12] = ["the", "a", "of", "and", "is", "in", "to", "it", "for", "on", "with", "as"];

const MODEL_TOML: &str = "\
# Hand-set weights for the standard 11-kernel bank.
bias = 0.5

[[kernels]]
mu = 1.0
sigma = 0.001
weight = 1.0

[[kernels]]
mu = 0.9
sigma = 0.1
weight = 2.0

[[kernels]]
mu = 0.7
sigma = 0.1
weight = 1.2

[[kernels]]
mu = 0.5
sigma = 0.1
weight = 0.6

[[kernels]]
mu = 0.3
sigma = 0.1
weight = 0.3

[[kernels]]
mu = 0.1
sigma = 0.1
weight = 0.1

[[kernels]]
mu = -0.1
sigma = 0.1
weight = 0.05

[[kernels]]
mu = -0.3
sigma = 0.1
weight = -0.1

[[kernels]]
mu = -0.5
sigma = 0.1
weight = -0.2

[[kernels]]
mu = -0.7
sigma = 0.1
weight = -0.3

[[kernels]]
mu = -0.9
sigma = 0.1
weight = -0.4
";

fn gaussian_unit(rng: &mut ChaCha8Rng) -> Vec<f64> {
    // Box-Muller; good enough for synthetic directions.
    let v: Vec<f64> = (0..DIM)
        .map(|_| {
            let u1: f64 = rng.random_range(f64::EPSILON..1.0);
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        })
        .collect();
    unit(v)
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / n).collect()
}

/// A unit vector with cosine exactly `cos` to `base` (before rounding).
fn neighbour(base: &[f64], cos: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let r = gaussian_unit(rng);
    let proj: f64 = r.iter().zip(base).map(|(a, b)| a * b).sum();
    let perp = unit(r.iter().zip(base).map(|(a, b)| a - proj * b).collect());
    let s = (1.0 - cos * cos).sqrt();
    base.iter().zip(&perp).map(|(b, p)| cos * b + s * p).collect()
}

struct Doc {
    id: String,
    text: String,
}

fn sentence_case(words: &[String]) -> String {
    let mut out = String::new();
    for (i, chunk) in words.chunks(9).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let mut sentence = chunk.join(" ");
        if let Some(first) = sentence.get(0..1) {
            sentence.replace_range(0..1, &first.to_uppercase());
        }
        out.push_str(&sentence);
        out.push('.');
    }
    out
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/desk"));
    std::fs::create_dir_all(&out_dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    // Embeddings: topic-flavoured heads, exact-cosine neighbours, random fillers.
    let mut vectors: Vec<(String, Vec<f64>)> = Vec::new();
    let mut neighbours: BTreeMap<&str, (&str, &str)> = BTreeMap::new();
    for topic in TOPICS {
        let direction = gaussian_unit(&mut rng);
        for (head, near, far) in topic {
            let own = gaussian_unit(&mut rng);
            let head_vec = unit(direction.iter().zip(&own).map(|(t, o)| 0.6 * t + 0.8 * o).collect());
            vectors.push((near.to_string(), neighbour(&head_vec, 0.9, &mut rng)));
            vectors.push((far.to_string(), neighbour(&head_vec, 0.7, &mut rng)));
            vectors.push((head.to_string(), head_vec));
            neighbours.insert(head, (near, far));
        }
    }
    for filler in FILLERS {
        vectors.push((filler.to_string(), gaussian_unit(&mut rng)));
    }
    let mut embeddings = format!("{} {DIM}\n", vectors.len());
    for (term, v) in &vectors {
        embeddings.push_str(term);
        for c in v {
            write!(embeddings, " {c:.6}")?;
        }
        embeddings.push('\n');
    }
    let table = EmbeddingTable::load_str(&embeddings)?;
    let bank = KernelBank::from_toml(MODEL_TOML)?;

    let mut queries_tsv = String::new();
    let mut docs_tsv = String::new();
    let mut run_txt = String::new();
    let mut qrels_txt = String::new();

    for (qi, text) in QUERIES.iter().enumerate() {
        let qid = format!("q{:02}", qi + 1);
        writeln!(queries_tsv, "{qid}\t{text}")?;
        let query_terms = terms(text);
        let heads: Vec<&str> = query_terms
            .iter()
            .filter(|t| neighbours.contains_key(t.as_str()))
            .map(|t| t.as_str())
            .collect();
        // OOV query words appear in documents too, as first-stage matches would.
        let anchors: Vec<&str> = if heads.is_empty() {
            query_terms.iter().map(String::as_str).collect()
        } else {
            heads.clone()
        };
        let oov_words: Vec<&str> = query_terms
            .iter()
            .filter(|t| !table.contains(t) && !FUNCTION_WORDS.contains(&t.as_str()))
            .map(String::as_str)
            .collect();

        let make_words = |rng: &mut ChaCha8Rng| -> Vec<String> {
            let mut words: Vec<String> = anchors.iter().map(|s| s.to_string()).collect();
            for head in &heads {
                let (near, far) = neighbours[head];
                for _ in 0..rng.random_range(0..=3) {
                    words.push(near.to_string());
                }
                for _ in 0..rng.random_range(0..=2) {
                    words.push(far.to_string());
                }
            }
            for oov in &oov_words {
                if rng.random_bool(0.5) && !anchors.contains(oov) {
                    words.push(oov.to_string());
                }
            }
            for _ in 0..rng.random_range(12..=30) {
                let w = if rng.random_bool(0.3) {
                    FUNCTION_WORDS[rng.random_range(0..FUNCTION_WORDS.len())]
                } else {
                    FILLERS[rng.random_range(0..FILLERS.len())]
                };
                words.push(w.to_string());
            }
            words.shuffle(rng);
            words
        };

        let mut docs: Vec<(Doc, Vec<String>)> = (0..CANDIDATES)
            .map(|j| {
                let words = make_words(&mut rng);
                let doc = Doc {
                    id: format!("D{:02}{:03}", qi + 1, j),
                    text: sentence_case(&words),
                };
                (doc, words)
            })
            .collect();

        let model_order = |docs: &[(Doc, Vec<String>)]| -> Vec<String> {
            let candidates: Vec<Candidate> = docs
                .iter()
                .enumerate()
                .map(|(j, (d, _))| Candidate {
                    doc_id: d.id.clone(),
                    terms: terms(&d.text),
                    baseline_rank: j as u32 + 1,
                })
                .collect();
            rerank(&query_terms, &candidates, &table, &bank)
                .expect("fixture candidates are valid")
                .into_iter()
                .map(|d| d.doc_id)
                .collect()
        };

        let mut order = model_order(&docs);
        let target = rng.random_range(1..=6usize);
        let relevant = order[target - 1].clone();
        let mut duplicate = None;

        if qid == PLANTED_QUERY {
            // Replace the weakest candidate with the relevant passage plus one extra near synonym.
            let pos = docs.iter().position(|(d, _)| d.id == relevant).unwrap();
            let mut words = docs[pos].1.clone();
            let (near, _) = neighbours[heads[0]];
            words.push(near.to_string());
            let weakest = order.last().unwrap().clone();
            let slot = docs.iter().position(|(d, _)| d.id == weakest).unwrap();
            let dup_id = format!("D{:02}{:03}", qi + 1, CANDIDATES);
            docs[slot] = (Doc { id: dup_id.clone(), text: sentence_case(&words) }, words);
            order = model_order(&docs);
            let dup_rank = order.iter().position(|d| *d == dup_id).unwrap();
            let rel_rank = order.iter().position(|d| *d == relevant).unwrap();
            assert!(dup_rank < rel_rank, "planted duplicate must outrank the judged passage");
            duplicate = Some(dup_id);
        }

        // First-stage scores: length-penalized with noise, unrelated to the synonyms.
        let mut baseline: Vec<(String, f64)> = docs
            .iter()
            .map(|(d, words)| {
                let score = 20.0 - 0.15 * words.len() as f64 + rng.random_range(0.0..4.0);
                (d.id.clone(), (score * 1e4).round() / 1e4)
            })
            .collect();
        baseline.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (rank, (doc_id, score)) in baseline.iter().enumerate() {
            writeln!(run_txt, "{qid} Q0 {doc_id} {} {score:.4} bm25", rank + 1)?;
        }
        for (d, _) in &docs {
            writeln!(docs_tsv, "{}\t{}", d.id, d.text)?;
        }

        // Judgments: everything the model ranks above the relevant passage is
        // judged non-relevant, except the planted duplicate.
        if qid == OOV_QUERY {
            continue;
        }
        if qid == UNFOUND_QUERY {
            writeln!(qrels_txt, "{qid} 0 D99001 1")?;
            for doc_id in order.iter().take(3) {
                writeln!(qrels_txt, "{qid} 0 {doc_id} 0")?;
            }
            continue;
        }
        let rel_pos = order.iter().position(|d| *d == relevant).unwrap();
        for doc_id in &order[..rel_pos] {
            if Some(doc_id) != duplicate.as_ref() {
                writeln!(qrels_txt, "{qid} 0 {doc_id} 0")?;
            }
        }
        let grade = if rng.random_bool(0.5) { 2 } else { 1 };
        writeln!(qrels_txt, "{qid} 0 {relevant} {grade}")?;
        let mut below: Vec<&String> = order[rel_pos + 1..].iter().collect();
        below.shuffle(&mut rng);
        for doc_id in below.into_iter().take(3) {
            writeln!(qrels_txt, "{qid} 0 {doc_id} 0")?;
        }
    }

    std::fs::write(out_dir.join("embeddings.txt"), embeddings)?;
    std::fs::write(out_dir.join("model.toml"), MODEL_TOML)?;
    std::fs::write(out_dir.join("queries.tsv"), queries_tsv)?;
    std::fs::write(out_dir.join("docs.tsv"), docs_tsv)?;
    std::fs::write(out_dir.join("run.txt"), run_txt)?;
    std::fs::write(out_dir.join("qrels.txt"), qrels_txt)?;
    println!("wrote desk fixture to {}", out_dir.display());
    Ok(())
}
