// Score one document with the standard eleven-kernel bank and show how the
// score splits across kernels.
//
//     cargo run --example kernel_scoring

use rerank_explorer::kernel::score_document;
use rerank_explorer::tokenize::terms;
use rerank_explorer::{EmbeddingTable, KernelBank, ScoreBreakdown};

const VECTORS: &str = "\
coral 1 0 0 0
polyp 0.9 0.43589 0 0
reef 0 1 0 0
atoll 0 0.9 0.43589 0
ocean 0.2 0.2 0.9 0.3
";

pub fn run_example() -> anyhow::Result<ScoreBreakdown> {
    let table = EmbeddingTable::load_str(VECTORS)?;
    let weights = [1.0, 2.0, 1.2, 0.6, 0.3, 0.1, 0.05, -0.1, -0.2, -0.3, -0.4];
    let bank = KernelBank::standard_with_weights(&weights, 0.5)?;

    let query = terms("coral reef");
    let doc = terms("A polyp colony builds the coral atoll; the ocean does the rest.");
    let (breakdown, matrix) = score_document(&query, &doc, &table, &bank)?;

    println!("query {:?}", matrix.query_terms);
    println!("doc   {:?} (oov: {:?})", matrix.doc_terms, matrix.doc_oov);
    println!("{:>6} {:>7} {:>10} {:>13}", "mu", "sigma", "phi", "contribution");
    for (kernel, part) in bank.kernels().iter().zip(&breakdown.per_kernel) {
        println!(
            "{:>6.1} {:>7.3} {:>10.4} {:>13.4}",
            kernel.mu, kernel.sigma, part.phi, part.contribution
        );
    }
    let sum: f64 = breakdown.contributions().sum();
    println!("bias {} + contributions {sum:.6} = overall {:.6}", breakdown.bias, breakdown.overall);
    Ok(breakdown)
}

fn main() -> anyhow::Result<()> {
    run_example()?;
    Ok(())
}
