// Load word vectors, compare terms, and round-trip the normalized table.
//
//     cargo run --example embeddings

use rerank_explorer::{cosine, EmbeddingTable};

const VECTORS: &str = "\
4 3
reef 3 4 0
atoll 2.7 3.9 1.2
mortgage 0 0.5 5
Reef 1 1 1
";

/// Returns (cosine(reef, atoll), cosine(reef, mortgage)).
pub fn run_example() -> anyhow::Result<(f64, f64)> {
    let table = EmbeddingTable::load_str(VECTORS)?;
    println!(
        "{} terms, dimension {}, {} duplicate line(s) ignored",
        table.len(),
        table.dimension(),
        table.duplicates()
    );

    let reef = table.lookup("reef").expect("in vocabulary");
    let atoll = table.lookup("atoll").expect("in vocabulary");
    let mortgage = table.lookup("mortgage").expect("in vocabulary");
    println!("reef stored as {:?} (norm of input {})", reef.vector, reef.norm);

    let near = cosine(reef, atoll)?;
    let far = cosine(reef, mortgage)?;
    println!("cos(reef, atoll)    = {near:.4}");
    println!("cos(reef, mortgage) = {far:.4}");
    println!("'kelp' in vocabulary: {}", table.contains("kelp"));

    let mut dumped = Vec::new();
    table.write_text(&mut dumped)?;
    let reloaded = EmbeddingTable::load(dumped.as_slice())?;
    assert_eq!(reloaded.lookup("atoll").map(|t| &t.vector), Some(&atoll.vector));
    println!("normalized table reloads unchanged");
    Ok((near, far))
}

fn main() -> anyhow::Result<()> {
    run_example()?;
    Ok(())
}
