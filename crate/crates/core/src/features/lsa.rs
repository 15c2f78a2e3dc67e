//! Latent semantic space over the corpus: a truncated SVD of the
//! term(stem) × sentence matrix with log-tf × idf weighting.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{PreparedDocument, Sentence, TokenKind};
use crate::features::FeatureError;
use crate::features::PairScope;
use crate::rng::seeded;

/// Fitted semantic space. `left_vectors[j]` is the j-th left singular vector
/// over the vocabulary; singular values are non-increasing and positive.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LsaSpace {
    pub vocab: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    pub k: usize,
    pub singular_values: Vec<f64>,
    pub left_vectors: Vec<Vec<f64>>,
}

fn sentence_counts(s: &Sentence) -> BTreeMap<&str, usize> {
    let mut counts = BTreeMap::new();
    for t in &s.tokens {
        if t.kind == TokenKind::Word {
            *counts.entry(t.stem.as_str()).or_insert(0) += 1;
        }
    }
    counts
}

/// Fit the space on every sentence of the corpus. Weighting is
/// `ln(1 + tf) * ln(N / df)`. The truncated SVD is computed by seeded block
/// subspace iteration on the smaller Gram side; `k` silently truncates to the
/// numerical rank.
pub fn fit_lsa(corpus: &[PreparedDocument], k: usize, seed: u64) -> Result<LsaSpace, FeatureError> {
    let sentences: Vec<&Sentence> = corpus.iter().flat_map(|d| &d.sentences).collect();
    let n = sentences.len();
    if n < 2 {
        return Err(FeatureError::DegenerateCorpus(
            "need at least two sentences to fit a semantic space".into(),
        ));
    }

    let mut vocab: BTreeMap<String, usize> = BTreeMap::new();
    let mut df: Vec<usize> = Vec::new();
    let counts: Vec<BTreeMap<&str, usize>> = sentences.iter().map(|s| sentence_counts(s)).collect();
    for c in &counts {
        for stem in c.keys() {
            let next = vocab.len();
            let id = *vocab.entry((*stem).to_string()).or_insert(next);
            if id == df.len() {
                df.push(0);
            }
            df[id] += 1;
        }
    }
    let m = vocab.len();
    if m == 0 {
        return Err(FeatureError::DegenerateCorpus(
            "no word tokens in any sentence".into(),
        ));
    }

    let idf: Vec<f64> = df.iter().map(|&d| (n as f64 / d as f64).ln()).collect();
    // Sparse columns: (term index, weight) per sentence.
    let cols: Vec<Vec<(usize, f64)>> = counts
        .iter()
        .map(|c| {
            c.iter()
                .map(|(stem, &tf)| {
                    let id = vocab[*stem];
                    (id, (1.0 + tf as f64).ln() * idf[id])
                })
                .filter(|(_, w)| *w != 0.0)
                .collect()
        })
        .collect();

    let (values, left) = truncated_left_svd(&cols, m, n, k, seed);
    Ok(LsaSpace {
        vocab,
        idf,
        k: values.len(),
        singular_values: values,
        left_vectors: left,
    })
}

/// Top-k singular values and left singular vectors of the sparse m×n matrix
/// given as columns. Works on the smaller of A·Aᵀ (m×m) and Aᵀ·A (n×n).
fn truncated_left_svd(
    cols: &[Vec<(usize, f64)>],
    m: usize,
    n: usize,
    k: usize,
    seed: u64,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = m.min(n);
    let want = k.min(d);
    if want == 0 {
        return (Vec::new(), Vec::new());
    }

    let gram = if m <= n {
        gram_rows(cols, m)
    } else {
        gram_cols(cols, n)
    };
    let (eigvals, eigvecs) = top_eigenpairs(&gram, want, seed);

    let mut values = Vec::new();
    let mut left: Vec<Vec<f64>> = Vec::new();
    let max_ev = eigvals.first().copied().unwrap_or(0.0).max(0.0);
    let floor = max_ev.sqrt() * 1e-9;
    for (ev, vec) in eigvals.iter().zip(&eigvecs) {
        if values.len() == want {
            break;
        }
        let sigma = ev.max(0.0).sqrt();
        if sigma <= floor || sigma == 0.0 {
            break;
        }
        let u = if m <= n {
            vec.clone()
        } else {
            // vec is a right singular vector; u = A v / sigma.
            let mut u = vec![0.0; m];
            for (c, col) in cols.iter().enumerate() {
                let vc = vec[c];
                if vc != 0.0 {
                    for &(r, w) in col {
                        u[r] += w * vc;
                    }
                }
            }
            for x in &mut u {
                *x /= sigma;
            }
            u
        };
        values.push(sigma);
        left.push(canonical_sign(u));
    }
    (values, left)
}

/// Fix the sign so the entry of largest magnitude is positive; makes the
/// factorization reproducible across block sizes.
fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).copied().unwrap_or(0.0) < 0.0 {
        for x in &mut v {
            *x = -*x;
        }
    }
    v
}

/// Dense m×m Gram matrix A·Aᵀ accumulated column by column.
fn gram_rows(cols: &[Vec<(usize, f64)>], m: usize) -> Vec<Vec<f64>> {
    let mut g = vec![vec![0.0; m]; m];
    for col in cols {
        for &(i, vi) in col {
            for &(j, vj) in col {
                g[i][j] += vi * vj;
            }
        }
    }
    g
}

/// Dense n×n Gram matrix Aᵀ·A from sparse column dot products.
fn gram_cols(cols: &[Vec<(usize, f64)>], n: usize) -> Vec<Vec<f64>> {
    let maps: Vec<BTreeMap<usize, f64>> = cols
        .iter()
        .map(|c| c.iter().copied().collect())
        .collect();
    let mut g = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a..n {
            let mut dot = 0.0;
            for (&r, &v) in &maps[a] {
                if let Some(&w) = maps[b].get(&r) {
                    dot += v * w;
                }
            }
            g[a][b] = dot;
            g[b][a] = dot;
        }
    }
    g
}

fn mat_vec(g: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    g.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Modified Gram-Schmidt; a vector that collapses numerically is replaced by
/// a seeded random direction and re-orthogonalized.
fn orthonormalize(basis: &mut [Vec<f64>], rng: &mut impl Rng) {
    for i in 0..basis.len() {
        for _attempt in 0..3 {
            for j in 0..i {
                let proj: f64 = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
                let other = basis[j].clone();
                for (x, o) in basis[i].iter_mut().zip(other) {
                    *x -= proj * o;
                }
            }
            let norm: f64 = basis[i].iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                for x in &mut basis[i] {
                    *x /= norm;
                }
                break;
            }
            for x in &mut basis[i] {
                *x = rng.gen_range(-1.0..1.0);
            }
        }
    }
}

/// Top-`want` eigenpairs of a symmetric positive semidefinite matrix by block
/// subspace iteration with a Jacobi Rayleigh-Ritz step. Each iteration does a
/// single block multiply: the product feeds both the Ritz projection of the
/// current basis and the next power step.
fn top_eigenpairs(g: &[Vec<f64>], want: usize, seed: u64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = g.len();
    let block = (want + 10).min(d);
    let mut rng = seeded(seed);
    let mut basis: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut basis, &mut rng);

    let scale: f64 = g
        .iter()
        .enumerate()
        .map(|(i, row)| row[i].abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut prev: Vec<f64> = vec![f64::INFINITY; want];
    let mut ritz: (Vec<f64>, Vec<Vec<f64>>) = (vec![0.0; block], Vec::new());

    for sweep in 0..300 {
        let product: Vec<Vec<f64>> = basis.iter().map(|v| mat_vec(g, v)).collect();
        let h = projected(&basis, &product);
        let (evals, evecs) = jacobi_eigen(&h);
        ritz = (evals, rotate(&basis, &evecs));

        let current: Vec<f64> = ritz.0.iter().take(want).copied().collect();
        let converged = current
            .iter()
            .zip(&prev)
            .all(|(c, p)| (c - p).abs() <= 1e-13 * scale);
        prev = current;
        if converged && sweep >= 2 {
            break;
        }
        basis = product;
        orthonormalize(&mut basis, &mut rng);
    }

    let take = want.min(ritz.1.len());
    (ritz.0[..take].to_vec(), ritz.1[..take].to_vec())
}

/// H = Bᵀ G B given the rows of B and the precomputed rows of G·B.
fn projected(basis: &[Vec<f64>], product: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let b = basis.len();
    let mut h = vec![vec![0.0; b]; b];
    for i in 0..b {
        for j in i..b {
            let dot: f64 = basis[i].iter().zip(&product[j]).map(|(a, c)| a * c).sum();
            h[i][j] = dot;
            h[j][i] = dot;
        }
    }
    h
}

/// Rows of `out` are eigen-combinations of basis rows, eigenvalue-descending.
fn rotate(basis: &[Vec<f64>], evecs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = basis.first().map(|v| v.len()).unwrap_or(0);
    evecs
        .iter()
        .map(|combo| {
            let mut out = vec![0.0; d];
            for (w, row) in combo.iter().zip(basis) {
                if *w != 0.0 {
                    for (o, r) in out.iter_mut().zip(row) {
                        *o += w * r;
                    }
                }
            }
            out
        })
        .collect()
}

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix. Returns
/// eigenvalues descending with matching eigenvectors (rows).
pub(crate) fn jacobi_eigen(h: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = h.len();
    let mut a: Vec<Vec<f64>> = h.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        let scale: f64 = (0..n).map(|i| a[i][i].abs()).fold(f64::MIN_POSITIVE, f64::max);
        if off.sqrt() <= 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[p][i];
                    let viq = v[q][i];
                    v[p][i] = c * vip - s * viq;
                    v[q][i] = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let evals = order.iter().map(|&i| a[i][i]).collect();
    let evecs = order.iter().map(|&i| v[i].clone()).collect();
    (evals, evecs)
}

impl LsaSpace {
    /// Weighted bag-of-stems vector for a sentence, in term space.
    fn term_vector(&self, s: &Sentence) -> Vec<(usize, f64)> {
        sentence_counts(s)
            .into_iter()
            .filter_map(|(stem, tf)| {
                self.vocab
                    .get(stem)
                    .map(|&id| (id, (1.0 + tf as f64).ln() * self.idf[id]))
            })
            .filter(|(_, w)| *w != 0.0)
            .collect()
    }

    /// Fold a sentence into the space: `e = Σ⁻¹ Uᵀ q`. Out-of-vocabulary
    /// stems contribute nothing; a fully OOV sentence maps to the zero vector.
    pub fn sentence_embedding(&self, s: &Sentence) -> Vec<f64> {
        let q = self.term_vector(s);
        self.left_vectors
            .iter()
            .zip(&self.singular_values)
            .map(|(u, sigma)| q.iter().map(|&(i, w)| u[i] * w).sum::<f64>() / sigma)
            .collect()
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Mean pairwise embedding cosine, or `None` below two sentences.
pub fn lsa_overlap(doc: &PreparedDocument, space: &LsaSpace, scope: PairScope) -> Option<f64> {
    let n = doc.sentences.len();
    if n < 2 {
        return None;
    }
    let emb: Vec<Vec<f64>> = doc
        .sentences
        .iter()
        .map(|s| space.sentence_embedding(s))
        .collect();
    let mut total = 0.0;
    let mut pairs = 0usize;
    match scope {
        PairScope::Adjacent => {
            for w in emb.windows(2) {
                total += cosine(&w[0], &w[1]);
                pairs += 1;
            }
        }
        PairScope::All => {
            for i in 0..n {
                for j in i + 1..n {
                    total += cosine(&emb[i], &emb[j]);
                    pairs += 1;
                }
            }
        }
    }
    Some(total / pairs as f64)
}

/// Given/new decomposition: each sentence embedding splits into its
/// projection onto the span of earlier sentences (given) and the residual
/// (new); the score is `|given| / (|given| + |new|)`, averaged over
/// sentences 2..n. `None` when under two sentences or when every earlier
/// embedding is zero.
pub fn lsa_given_new(doc: &PreparedDocument, space: &LsaSpace) -> Option<f64> {
    let n = doc.sentences.len();
    if n < 2 {
        return None;
    }
    let emb: Vec<Vec<f64>> = doc
        .sentences
        .iter()
        .map(|s| space.sentence_embedding(s))
        .collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if emb[..n - 1].iter().all(|v| norm(v) == 0.0) {
        return None;
    }

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let push_span = |v: &[f64], basis: &mut Vec<Vec<f64>>| {
        let mut r = v.to_vec();
        for b in basis.iter() {
            let proj: f64 = r.iter().zip(b).map(|(a, c)| a * c).sum();
            for (x, c) in r.iter_mut().zip(b) {
                *x -= proj * c;
            }
        }
        let nr = norm(&r);
        if nr > 1e-12 {
            for x in &mut r {
                *x /= nr;
            }
            basis.push(r);
        }
    };

    push_span(&emb[0], &mut basis);
    let mut total = 0.0;
    for v in emb.iter().take(n).skip(1) {
        let nv = norm(v);
        let score = if nv == 0.0 {
            0.0
        } else {
            let mut g = vec![0.0; v.len()];
            for b in &basis {
                let proj: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
                for (gx, bx) in g.iter_mut().zip(b) {
                    *gx += proj * bx;
                }
            }
            let ng = norm(&g);
            let nn = norm(&v.iter().zip(&g).map(|(a, b)| a - b).collect::<Vec<_>>());
            if ng + nn == 0.0 {
                0.0
            } else {
                ng / (ng + nn)
            }
        };
        total += score;
        push_span(v, &mut basis);
    }
    Some(total / (n - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{annotate, prepare_document, CleanRuleSet, Label, RawDocument};
    use crate::lexicons::Lexicon;

    fn docs(texts: &[&str]) -> Vec<PreparedDocument> {
        let lex = Lexicon::parse_str(include_str!("../../assets/lexicon.tsv")).unwrap();
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let raw = RawDocument {
                    id: format!("d{i}"),
                    label: Label::High,
                    text: (*t).into(),
                    source_path: String::new(),
                };
                annotate(prepare_document(&raw, &CleanRuleSet::default_rules()), &lex).unwrap()
            })
            .collect()
    }

    #[test]
    fn orthogonal_single_term_sentences() {
        // Two sentences, one distinct term each: the term-sentence matrix is
        // diagonal with entries ln(2)·ln(2), so both singular values equal
        // ln(2)·ln(2) and the embeddings are orthogonal.
        let corpus = docs(&["virus", "mask"]);
        let space = fit_lsa(&corpus, 2, 7).unwrap();
        let w = (2.0f64).ln() * (2.0f64).ln();
        assert_eq!(space.singular_values.len(), 2);
        for sv in &space.singular_values {
            assert!((sv - w).abs() < 1e-10, "sv {sv} vs {w}");
        }
        let e1 = space.sentence_embedding(&corpus[0].sentences[0]);
        let e2 = space.sentence_embedding(&corpus[1].sentences[0]);
        assert!(cosine(&e1, &e2).abs() < 1e-10);
    }

    #[test]
    fn k_truncates_to_rank() {
        let corpus = docs(&["virus", "mask"]);
        let space = fit_lsa(&corpus, 10, 7).unwrap();
        assert!(space.k <= 2);
    }

    #[test]
    fn refitting_is_bit_identical() {
        let corpus = docs(&[
            "The virus spread in the city. Masks helped the people.",
            "The vaccine trial reported strong results. The cohort improved.",
        ]);
        let a = fit_lsa(&corpus, 5, 42).unwrap();
        let b = fit_lsa(&corpus, 5, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_corpus_is_an_error() {
        let corpus = docs(&["; ; . ,"]);
        assert!(fit_lsa(&corpus, 2, 7).is_err());
    }

    #[test]
    fn oov_sentence_embeds_to_zero() {
        let corpus = docs(&["virus spread", "mask policy"]);
        let space = fit_lsa(&corpus, 2, 7).unwrap();
        let other = docs(&["zebra quagga"]);
        let e = space.sentence_embedding(&other[0].sentences[0]);
        assert!(e.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn identical_stem_multisets_embed_identically() {
        let corpus = docs(&["virus spread city", "mask city"]);
        let space = fit_lsa(&corpus, 2, 7).unwrap();
        let pair = docs(&["City Virus spread", "spread virus city"]);
        let e1 = space.sentence_embedding(&pair[0].sentences[0]);
        let e2 = space.sentence_embedding(&pair[1].sentences[0]);
        for (a, b) in e1.iter().zip(&e2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_sentences_have_cosine_one() {
        let d = docs(&["The virus spread. The virus spread.", "Masks helped."]);
        let space = fit_lsa(&d, 5, 7).unwrap();
        let v = lsa_overlap(&d[0], &space, PairScope::Adjacent).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "cosine {v}");
    }

    #[test]
    fn single_sentence_doc_is_missing() {
        let d = docs(&["Just one sentence here.", "Another doc. With two."]);
        let space = fit_lsa(&d, 5, 7).unwrap();
        assert_eq!(lsa_overlap(&d[0], &space, PairScope::All), None);
        assert_eq!(lsa_given_new(&d[0], &space), None);
    }

    #[test]
    fn given_new_identical_second_sentence_scores_one() {
        let d = docs(&["The virus spread. The virus spread.", "Masks helped people."]);
        let space = fit_lsa(&d, 5, 7).unwrap();
        let v = lsa_given_new(&d[0], &space).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "given/new {v}");
    }

    #[test]
    fn given_new_oov_earlier_context_is_missing() {
        let corpus = docs(&["virus spread", "mask policy"]);
        let space = fit_lsa(&corpus, 2, 7).unwrap();
        let d = docs(&["zebra quagga. virus spread."]);
        assert_eq!(lsa_given_new(&d[0], &space), None);
    }

    #[test]
    fn mean_of_all_pair_cosines() {
        // Three sentences; ALL-scope mean must equal the arithmetic mean of
        // the three pair cosines.
        let d = docs(&[
            "The virus spread fast. Masks helped people. The virus mask worked.",
            "Another document with words. More words arrive.",
        ]);
        let space = fit_lsa(&d, 6, 7).unwrap();
        let emb: Vec<Vec<f64>> = d[0]
            .sentences
            .iter()
            .map(|s| space.sentence_embedding(s))
            .collect();
        let expect =
            (cosine(&emb[0], &emb[1]) + cosine(&emb[0], &emb[2]) + cosine(&emb[1], &emb[2])) / 3.0;
        let got = lsa_overlap(&d[0], &space, PairScope::All).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn jacobi_matches_hand_eigenvalues() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1.
        let (vals, vecs) = jacobi_eigen(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        let r = 1.0 / 2.0f64.sqrt();
        assert!((vecs[0][0].abs() - r).abs() < 1e-12);
    }
}
