//! Chunked cosine scoring.
//!
//! A trial score is the mean cosine similarity over the full cross product
//! of enrollment and test chunks (10 x 10 chunks give 100 pair scores).

use crate::dataio::ChunkEmbeddings;
use crate::error::{Error, Result};
use crate::numeric::{canonical_sum, dot, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseScore {
    pub value: f64,
    pub n_pairs: usize,
}

/// Cosine similarity clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Mean cosine over all enrollment x test chunk pairs.
///
/// The pair similarities are reduced with [`canonical_sum`], so the result
/// is bit-identical when the two sides are swapped.
pub fn pairwise_score(enroll: &ChunkEmbeddings, test: &ChunkEmbeddings) -> Result<PairwiseScore> {
    if enroll.dim() != test.dim() {
        return Err(Error::DimMismatch {
            expected: enroll.dim(),
            found: test.dim(),
        });
    }
    let mut sims = Vec::with_capacity(enroll.n_chunks() * test.n_chunks());
    for e in enroll.chunks() {
        for t in test.chunks() {
            sims.push(cosine(e, t)?);
        }
    }
    let n_pairs = sims.len();
    let value = (canonical_sum(&mut sims) / n_pairs as f64).clamp(-1.0, 1.0);
    Ok(PairwiseScore { value, n_pairs })
}

/// Component-wise mean of the chunks; not length-normalized.
pub fn mean_embedding(e: &ChunkEmbeddings) -> Vec<f64> {
    let n = e.n_chunks();
    if n == 1 {
        return e.chunk(0).to_vec();
    }
    let mut column = vec![0.0; n];
    (0..e.dim())
        .map(|d| {
            for (slot, chunk) in column.iter_mut().zip(e.chunks()) {
                *slot = chunk[d];
            }
            canonical_sum(&mut column) / n as f64
        })
        .collect()
}

/// Component-wise mean of equal-length vectors.
pub(crate) fn mean_of_vectors(rows: &[&[f64]]) -> Vec<f64> {
    let dim = rows.first().map_or(0, |r| r.len());
    (0..dim)
        .map(|d| {
            let mut acc = CompensatedSum::new();
            for r in rows {
                acc.add(r[d]);
            }
            acc.value() / rows.len() as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn emb(id: &str, chunks: &[Vec<f64>]) -> ChunkEmbeddings {
        ChunkEmbeddings::from_chunks(id, chunks).unwrap()
    }

    fn random_emb(rng: &mut Rng, id: &str, n: usize, dim: usize) -> ChunkEmbeddings {
        let chunks: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.normal()).collect()).collect();
        emb(id, &chunks)
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap(), 0.7071067811865475);
    }

    #[test]
    fn cosine_errors() {
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroNorm)));
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn cosine_clamped() {
        let u = [0.1, 0.2, 0.3];
        let v = [0.1 * 3.0, 0.2 * 3.0, 0.3 * 3.0];
        let c = cosine(&u, &v).unwrap();
        assert!(c <= 1.0 && c > 1.0 - 1e-15);
    }

    #[test]
    fn identical_copies_score_one_over_100_pairs() {
        let unit = vec![0.6, 0.8];
        let e = emb("e", &vec![unit.clone(); 10]);
        let t = emb("t", &vec![unit; 10]);
        let s = pairwise_score(&e, &t).unwrap();
        assert_eq!(s.n_pairs, 100);
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn single_chunks_reduce_to_cosine() {
        let e = emb("e", &[vec![1.0, 2.0, -1.0]]);
        let t = emb("t", &[vec![0.5, -1.0, 3.0]]);
        let s = pairwise_score(&e, &t).unwrap();
        assert_eq!(s.n_pairs, 1);
        assert_eq!(s.value, cosine(e.chunk(0), t.chunk(0)).unwrap());
    }

    #[test]
    fn matches_double_loop_and_is_symmetric() {
        let mut rng = Rng::new(11);
        for _ in 0..20 {
            let e = random_emb(&mut rng, "e", 10, 16);
            let t = random_emb(&mut rng, "t", 10, 16);
            let mut total = 0.0;
            for i in 0..10 {
                for j in 0..10 {
                    let (a, b) = (e.chunk(i), t.chunk(j));
                    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                    let aa: f64 = a.iter().map(|x| x * x).sum();
                    let bb: f64 = b.iter().map(|x| x * x).sum();
                    total += ab / (aa.sqrt() * bb.sqrt());
                }
            }
            let s = pairwise_score(&e, &t).unwrap();
            assert!((s.value - total / 100.0).abs() < 1e-12);
            assert_eq!(s.value.to_bits(), pairwise_score(&t, &e).unwrap().value.to_bits());
        }
    }

    #[test]
    fn mean_embedding_examples() {
        assert_eq!(mean_embedding(&emb("a", &[vec![1.0, 0.0], vec![0.0, 1.0]])), vec![0.5, 0.5]);
        assert_eq!(mean_embedding(&emb("a", &[vec![0.3, -7.0]])), vec![0.3, -7.0]);
    }

    #[test]
    fn mean_embedding_matches_compensated_oracle() {
        let mut rng = Rng::new(5);
        let e = random_emb(&mut rng, "e", 10, 32);
        let m = mean_embedding(&e);
        for d in 0..32 {
            // Kahan summation in natural order as an independent reference.
            let (mut s, mut c) = (0.0f64, 0.0f64);
            for i in 0..10 {
                let y = e.chunk(i)[d] - c;
                let t = s + y;
                c = (t - s) - y;
                s = t;
            }
            assert!((m[d] - s / 10.0).abs() < 1e-12);
        }
    }
}
