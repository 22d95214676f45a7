//! Scores two hand-built utterances chunk by chunk.
//!
//! cargo run --example score_trials

use voxfuse::scoring::{cosine, mean_embedding, pairwise_score};
use voxfuse::{ChunkEmbeddings, Result};

fn main() -> Result<()> {
    let enroll = ChunkEmbeddings::from_chunks("enroll", &[vec![1.0, 0.0, 0.0], vec![0.8, 0.6, 0.0]])?;
    let test = ChunkEmbeddings::from_chunks(
        "test",
        &[vec![0.9, 0.1, 0.0], vec![0.0, 1.0, 0.0], vec![0.6, 0.0, 0.8]],
    )?;

    let s = pairwise_score(&enroll, &test)?;
    println!("mean over {} chunk pairs: {:.6}", s.n_pairs, s.value);
    for (i, e) in enroll.chunks().enumerate() {
        for (j, t) in test.chunks().enumerate() {
            println!("  enroll[{i}] x test[{j}] = {:+.4}", cosine(e, t)?);
        }
    }

    // Averaging embeddings first gives a different (usually higher) score.
    let avg = cosine(&mean_embedding(&enroll), &mean_embedding(&test))?;
    println!("cosine of mean embeddings: {avg:.6}");
    Ok(())
}
