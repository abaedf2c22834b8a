//! Measurement: phoneme edit distance, similarity-by-distance tables, MAP,
//! word difference vectors and a 2-D PCA projection.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::DtwOptions;
use crate::data::{fold_word, Dataset, SegmentRecord};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};
use crate::retrieval::{self, cosine_similarity, EmbeddingArchive, RankedResult, SegmentEncoder};

/// Levenshtein distance with unit costs.
pub fn phoneme_edit_distance<T: PartialEq>(p: &[T], q: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=q.len()).collect();
    let mut cur = vec![0; q.len() + 1];
    for (i, a) in p.iter().enumerate() {
        cur[0] = i + 1;
        for (j, b) in q.iter().enumerate() {
            let sub = prev[j] + usize::from(a != b);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[q.len()]
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketRow {
    pub label: String,
    pub pair_count: usize,
    /// `None` for an empty bucket.
    pub mean_cosine: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityByDistanceTable {
    pub rows: Vec<BucketRow>,
}

impl SimilarityByDistanceTable {
    /// CSV with header `edit_distance,pair_count,mean_cosine`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("edit_distance,pair_count,mean_cosine\n");
        for r in &self.rows {
            let mean = r.mean_cosine.map(|m| m.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", r.label, r.pair_count, mean));
        }
        out
    }

    pub fn total_pairs(&self) -> usize {
        self.rows.iter().map(|r| r.pair_count).sum()
    }
}

/// Mean cosine similarity of all unordered archive pairs, bucketed by the
/// phoneme edit distance of the two segments. Buckets are `0..top_bucket`
/// plus a final `"{top_bucket}+"` bucket.
pub fn similarity_table(archive: &EmbeddingArchive, dataset: &Dataset, top_bucket: usize) -> Result<SimilarityByDistanceTable> {
    if top_bucket == 0 {
        return Err(Error::Invalid("top bucket must be at least 1".into()));
    }
    let by_id: HashMap<&str, &SegmentRecord> = dataset.records().iter().map(|r| (r.id.as_str(), r)).collect();
    let phonemes: Vec<&[String]> = archive
        .entries()
        .iter()
        .map(|e| {
            let rec = by_id.get(e.id.as_str()).ok_or_else(|| Error::UnknownId(e.id.clone()))?;
            rec.phonemes
                .as_deref()
                .ok_or_else(|| Error::MissingPhonemes(e.id.clone()))
        })
        .collect::<Result<_>>()?;

    let entries = archive.entries();
    let n = entries.len();
    let nb = top_bucket + 1;
    let partials: Vec<(Vec<usize>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut counts = vec![0usize; nb];
            let mut sums = vec![0.0; nb];
            for j in i + 1..n {
                let b = phoneme_edit_distance(phonemes[i], phonemes[j]).min(top_bucket);
                let s = cosine_similarity(&entries[i].vector, &entries[j].vector).expect("archive widths agree");
                counts[b] += 1;
                sums[b] += s;
            }
            (counts, sums)
        })
        .collect();
    let mut counts = vec![0usize; nb];
    let mut sums = vec![0.0; nb];
    for (c, s) in partials {
        for b in 0..nb {
            counts[b] += c[b];
            sums[b] += s[b];
        }
    }
    let rows = (0..nb)
        .map(|b| BucketRow {
            label: if b == top_bucket { format!("{b}+") } else { b.to_string() },
            pair_count: counts[b],
            mean_cosine: (counts[b] > 0).then(|| sums[b] / counts[b] as f64),
        })
        .collect();
    Ok(SimilarityByDistanceTable { rows })
}

/// `(1/|R|) Σ_{k : item k relevant} precision@k`.
pub fn average_precision(ranked: &RankedResult, relevant: &HashSet<String>) -> Result<f64> {
    if relevant.is_empty() {
        return Err(Error::EmptyRelevantSet);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, item) in ranked.items.iter().enumerate() {
        if relevant.contains(&item.id) {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    Ok(sum / relevant.len() as f64)
}

/// How a retrieval run scores archive segments against a query.
pub enum RetrievalMethod<'a> {
    Embedding(&'a dyn SegmentEncoder),
    Dtw(DtwOptions),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryAp {
    pub query_id: String,
    pub word: String,
    pub num_relevant: usize,
    /// `None` when the query has no relevant counterpart.
    pub ap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapReport {
    /// `None` when no query had a relevant counterpart.
    pub map: Option<f64>,
    pub queries: Vec<QueryAp>,
}

impl MapReport {
    pub fn scored(&self) -> usize {
        self.queries.iter().filter(|q| q.ap.is_some()).count()
    }

    pub fn excluded(&self) -> usize {
        self.queries.len() - self.scored()
    }

    /// CSV with header `query_id,word,num_relevant,ap`; `ap` is blank for
    /// excluded queries.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("query_id,word,num_relevant,ap\n");
        for q in &self.queries {
            let ap = q.ap.map(|a| a.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", q.query_id, q.word, q.num_relevant, ap));
        }
        out
    }
}

/// Every record is used once as a query against all the others; relevance
/// is an identical case-folded word label.
pub fn mean_average_precision(method: &RetrievalMethod<'_>, records: &[&SegmentRecord]) -> Result<MapReport> {
    if records.is_empty() {
        return Err(Error::Invalid("evaluation split is empty".into()));
    }
    let archive = match method {
        RetrievalMethod::Embedding(enc) => Some(retrieval::build_archive(*enc, records.iter().copied())?),
        RetrievalMethod::Dtw(_) => None,
    };
    let folded: Vec<String> = records.iter().map(|r| fold_word(&r.word)).collect();
    let queries = (0..records.len())
        .into_par_iter()
        .map(|qi| {
            let q = records[qi];
            let relevant: HashSet<String> = records
                .iter()
                .zip(&folded)
                .filter(|(r, w)| r.id != q.id && **w == folded[qi])
                .map(|(r, _)| r.id.clone())
                .collect();
            let ap = if relevant.is_empty() {
                None
            } else {
                let ranked = match (method, &archive) {
                    (RetrievalMethod::Embedding(_), Some(arch)) => {
                        let v = &arch.entries()[qi].vector;
                        retrieval::rank(v, arch, Some(&q.id), None)?
                    }
                    (RetrievalMethod::Dtw(opts), _) => {
                        retrieval::rank_dtw(&q.features, records.iter().copied(), Some(&q.id), None, *opts)?
                    }
                    _ => unreachable!("archive exists for embedding methods"),
                };
                Some(average_precision(&ranked, &relevant)?)
            };
            Ok(QueryAp {
                query_id: q.id.clone(),
                word: q.word.clone(),
                num_relevant: relevant.len(),
                ap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let scored: Vec<f64> = queries.iter().filter_map(|q| q.ap).collect();
    let map = (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64);
    Ok(MapReport { map, queries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordMeanEmbedding {
    pub word: String,
    pub mean: Vec<f64>,
    pub count: usize,
}

/// Mean embedding per case-folded word, in order of first appearance.
pub fn word_means(archive: &EmbeddingArchive) -> Vec<WordMeanEmbedding> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut out: Vec<WordMeanEmbedding> = Vec::new();
    for e in archive.entries() {
        let key = fold_word(&e.word);
        let slot = *index.entry(key.clone()).or_insert_with(|| {
            out.push(WordMeanEmbedding {
                word: key,
                mean: vec![0.0; archive.dim()],
                count: 0,
            });
            out.len() - 1
        });
        let w = &mut out[slot];
        w.count += 1;
        for (m, v) in w.mean.iter_mut().zip(&e.vector) {
            *m += v;
        }
    }
    for w in &mut out {
        let n = w.count as f64;
        w.mean.iter_mut().for_each(|m| *m /= n);
    }
    out
}

/// `δ(w1) − δ(w2)` for every pair.
pub fn word_difference_vectors(archive: &EmbeddingArchive, pairs: &[(String, String)]) -> Result<Vec<Vec<f64>>> {
    let means = word_means(archive);
    let lookup = |w: &str| {
        let key = fold_word(w);
        means
            .iter()
            .find(|m| m.word == key)
            .map(|m| &m.mean)
            .ok_or_else(|| Error::UnknownWord(w.to_string()))
    };
    pairs
        .iter()
        .map(|(a, b)| {
            let (ma, mb) = (lookup(a)?, lookup(b)?);
            Ok(ma.iter().zip(mb).map(|(x, y)| x - y).collect())
        })
        .collect()
}

const PCA_MAX_ITERS: usize = 1000;
const PCA_TOL: f64 = 1e-10;
const PCA_SEED: u64 = 0x5eed;

/// Projects centred vectors onto their top two principal components, found
/// by power iteration with deflation. Each component is signed so that its
/// largest-magnitude loading is positive.
pub fn project_2d(vectors: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
    if vectors.len() < 2 {
        return Err(Error::Invalid(format!("need at least 2 vectors to project, got {}", vectors.len())));
    }
    let d = vectors[0].len();
    if let Some(v) = vectors.iter().find(|v| v.len() != d) {
        return Err(Error::dim("projected vector width", d, v.len()));
    }
    let n = vectors.len() as f64;
    let mut mean = vec![0.0; d];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let centred: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    let mut cov = Matrix::zeros(d, d);
    for v in &centred {
        cov.add_outer(v, v);
    }
    cov.as_mut_slice().iter_mut().for_each(|c| *c /= n);
    let trace: f64 = (0..d).map(|i| cov.get(i, i)).sum();

    let mut rng = ChaCha8Rng::seed_from_u64(PCA_SEED);
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(2);
    for _ in 0..2 {
        let comp = leading_component(&cov, &components, trace, &mut rng);
        if let Some(c) = &comp {
            let lambda = quad_form(&cov, c);
            cov.add_outer(&c.iter().map(|x| -lambda * x).collect::<Vec<_>>(), c);
        }
        components.push(comp.unwrap_or_else(|| vec![0.0; d]));
    }
    Ok(centred
        .iter()
        .map(|v| [dot(v, &components[0]), dot(v, &components[1])])
        .collect())
}

fn quad_form(m: &Matrix, v: &[f64]) -> f64 {
    let mut mv = vec![0.0; v.len()];
    m.mul_vec_add(v, &mut mv);
    dot(v, &mv)
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for a in against {
        let p = dot(v, a);
        for (x, y) in v.iter_mut().zip(a) {
            *x -= p * y;
        }
    }
}

fn leading_component(cov: &Matrix, found: &[Vec<f64>], trace: f64, rng: &mut impl Rng) -> Option<Vec<f64>> {
    let d = cov.rows();
    if trace <= 0.0 {
        return None;
    }
    let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    orthogonalize(&mut v, found);
    let nv = norm(&v);
    if nv == 0.0 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= nv);
    for _ in 0..PCA_MAX_ITERS {
        let mut w = vec![0.0; d];
        cov.mul_vec_add(&v, &mut w);
        orthogonalize(&mut w, found);
        let nw = norm(&w);
        if nw <= 1e-12 * trace {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        let delta = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if delta < PCA_TOL {
            break;
        }
    }
    let (imax, _) = v
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bv), (i, x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) });
    if v[imax] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Some(v)
}

/// CSV with header `pair,dx0,…,dx{d−1},proj_x,proj_y`. Pairs are written `w1:w2`.
pub fn difference_vectors_csv(pairs: &[(String, String)], diffs: &[Vec<f64>], proj: &[[f64; 2]]) -> String {
    let d = diffs.first().map_or(0, Vec::len);
    let mut out = String::from("pair");
    for k in 0..d {
        out.push_str(&format!(",dx{k}"));
    }
    out.push_str(",proj_x,proj_y\n");
    for (((a, b), v), p) in pairs.iter().zip(diffs).zip(proj) {
        out.push_str(&format!("{a}:{b}"));
        for x in v {
            out.push_str(&format!(",{x}"));
        }
        out.push_str(&format!(",{},{}\n", p[0], p[1]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureSequence, Split};
    use crate::retrieval::{ArchiveEntry, ScoredId};
    use proptest::prelude::*;

    fn ph(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn edit_distance_cases() {
        assert_eq!(phoneme_edit_distance(&ph("K AE T"), &ph("K AE T")), 0);
        assert_eq!(phoneme_edit_distance(&ph("AE T"), &ph("AE")), 1);
        assert_eq!(phoneme_edit_distance(&ph("K IH T AH N"), &ph("S IH T IH NG")), 3);
        assert_eq!(phoneme_edit_distance::<String>(&[], &ph("A B")), 2);
        assert_eq!(phoneme_edit_distance::<String>(&[], &[]), 0);
    }

    proptest! {
        #[test]
        fn edit_distance_is_a_metric(
            a in prop::collection::vec(0u8..4, 0..6),
            b in prop::collection::vec(0u8..4, 0..6),
            c in prop::collection::vec(0u8..4, 0..6),
        ) {
            let d = phoneme_edit_distance::<u8>;
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert_eq!(d(&a, &b) == 0, a == b);
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        }
    }

    fn ranked(ids: &[&str]) -> RankedResult {
        RankedResult {
            items: ids
                .iter()
                .enumerate()
                .map(|(i, id)| ScoredId { id: id.to_string(), score: -(i as f64) })
                .collect(),
        }
    }

    fn set(ids: &[&str]) -> HashSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ap_fixtures() {
        assert_eq!(average_precision(&ranked(&["a", "b", "c", "d"]), &set(&["a", "b"])).unwrap(), 1.0);
        let ap = average_precision(&ranked(&["a", "x", "b"]), &set(&["a", "b"])).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
        assert_eq!(average_precision(&ranked(&["x", "y", "z", "a"]), &set(&["a"])).unwrap(), 0.25);
        assert!(matches!(average_precision(&ranked(&["a"]), &set(&[])), Err(Error::EmptyRelevantSet)));
    }

    #[test]
    fn relevant_at_top_beats_relevant_at_bottom() {
        let rel = set(&["r1", "r2"]);
        let top = average_precision(&ranked(&["r1", "r2", "x", "y", "z"]), &rel).unwrap();
        let bottom = average_precision(&ranked(&["x", "y", "z", "r1", "r2"]), &rel).unwrap();
        assert!(bottom <= top);
        assert!((0.0..=1.0).contains(&bottom));
    }

    fn rec(id: &str, word: &str, phon: Option<&str>, rows: Vec<Vec<f64>>) -> SegmentRecord {
        SegmentRecord {
            id: id.into(),
            word: word.into(),
            phonemes: phon.map(ph),
            split: Split::Test,
            features: FeatureSequence::from_rows(&rows).unwrap(),
        }
    }

    fn archive(items: &[(&str, &str, Vec<f64>)]) -> EmbeddingArchive {
        let dim = items[0].2.len();
        EmbeddingArchive::new(
            items
                .iter()
                .map(|(id, w, v)| ArchiveEntry { id: id.to_string(), word: w.to_string(), vector: v.clone() })
                .collect(),
            dim,
        )
        .unwrap()
    }

    #[test]
    fn similarity_table_by_hand() {
        let ds = Dataset::new(vec![
            rec("a", "cat", Some("K AE T"), vec![vec![0.0]]),
            rec("b", "cap", Some("K AE P"), vec![vec![0.0]]),
            rec("c", "dog", Some("D AO G"), vec![vec![0.0]]),
        ])
        .unwrap();
        let arch = archive(&[("a", "cat", vec![1.0, 0.0]), ("b", "cap", vec![1.0, 1.0]), ("c", "dog", vec![0.0, 1.0])]);
        let t = similarity_table(&arch, &ds, 5).unwrap();
        // pairs: (a,b) d=1 cos=1/√2; (a,c) d=3 cos=0; (b,c) d=3 cos=1/√2
        let labels: Vec<&str> = t.rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, vec!["0", "1", "2", "3", "4", "5+"]);
        assert_eq!(t.rows[1].pair_count, 1);
        assert!((t.rows[1].mean_cosine.unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(t.rows[3].pair_count, 2);
        assert!((t.rows[3].mean_cosine.unwrap() - 0.5f64.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(t.rows[0].mean_cosine, None);
        assert_eq!(t.total_pairs(), 3);
        assert!(t.to_csv().starts_with("edit_distance,pair_count,mean_cosine\n0,0,\n1,1,"));
    }

    #[test]
    fn identical_vectors_give_unit_similarity() {
        let ds = Dataset::new(
            (0..5)
                .map(|i| rec(&format!("s{i}"), "w", Some(["A", "A B", "B C D", "A", "E E E E E E"][i]), vec![vec![0.0]]))
                .collect(),
        )
        .unwrap();
        let arch = archive(&(0..5).map(|i| (["s0", "s1", "s2", "s3", "s4"][i], "w", vec![0.3, 0.4])).collect::<Vec<_>>());
        let t = similarity_table(&arch, &ds, 3).unwrap();
        assert_eq!(t.total_pairs(), 10);
        for r in &t.rows {
            if let Some(m) = r.mean_cosine {
                assert!((m - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn similarity_table_requires_phonemes() {
        let ds = Dataset::new(vec![rec("a", "x", None, vec![vec![0.0]]), rec("b", "y", Some("A"), vec![vec![0.0]])]).unwrap();
        let arch = archive(&[("a", "x", vec![1.0]), ("b", "y", vec![1.0])]);
        assert!(matches!(similarity_table(&arch, &ds, 5), Err(Error::MissingPhonemes(id)) if id == "a"));
    }

    struct Lookup(HashMap<String, Vec<f64>>);

    impl SegmentEncoder for Lookup {
        fn width(&self) -> usize {
            2
        }
        fn encode(&self, x: &FeatureSequence) -> Result<Vec<f64>> {
            Ok(self.0[&x.frame(0)[0].to_string()].clone())
        }
    }

    #[test]
    fn map_hand_construction() {
        // features carry a key used by the lookup encoder
        let recs = [
            rec("a1", "Alpha", None, vec![vec![1.0]]),
            rec("a2", "alpha", None, vec![vec![2.0]]),
            rec("b1", "beta", None, vec![vec![3.0]]),
            rec("b2", "beta", None, vec![vec![4.0]]),
        ];
        let enc = Lookup(
            [("1", [1.0, 0.1]), ("2", [1.0, 0.0]), ("3", [0.0, 1.0]), ("4", [0.1, 1.0])]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_vec()))
                .collect(),
        );
        let refs: Vec<&SegmentRecord> = recs.iter().collect();
        let report = mean_average_precision(&RetrievalMethod::Embedding(&enc), &refs).unwrap();
        assert_eq!(report.map, Some(1.0));
        assert_eq!(report.excluded(), 0);

        // swap so each query's counterpart ranks second of three: AP = 1/2
        let swapped = Lookup(
            [("1", [1.0, 0.0]), ("2", [0.0, 1.0]), ("3", [1.0, 0.1]), ("4", [0.1, 1.0])]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_vec()))
                .collect(),
        );
        let r = mean_average_precision(&RetrievalMethod::Embedding(&swapped), &refs).unwrap();
        assert!(r.map.unwrap() < 1.0);
        assert_eq!(r, mean_average_precision(&RetrievalMethod::Embedding(&swapped), &refs).unwrap());
    }

    #[test]
    fn unique_words_have_no_scorable_queries() {
        let recs = [rec("a", "x", None, vec![vec![1.0]]), rec("b", "y", None, vec![vec![2.0]])];
        let refs: Vec<&SegmentRecord> = recs.iter().collect();
        let r = mean_average_precision(&RetrievalMethod::Dtw(DtwOptions::default()), &refs).unwrap();
        assert_eq!(r.map, None);
        assert_eq!(r.excluded(), 2);
        assert_eq!(r.to_csv(), "query_id,word,num_relevant,ap\na,x,0,\nb,y,0,\n");
    }

    #[test]
    fn difference_vectors() {
        let arch = archive(&[("1", "w1", vec![1.0, 0.0]), ("2", "W1", vec![3.0, 0.0]), ("3", "w2", vec![0.0, 1.0])]);
        let pairs = vec![("w1".to_string(), "w2".to_string()), ("w2".to_string(), "w2".to_string())];
        let d = word_difference_vectors(&arch, &pairs).unwrap();
        assert_eq!(d, vec![vec![2.0, -1.0], vec![0.0, 0.0]]);
        assert!(matches!(
            word_difference_vectors(&arch, &[("w1".into(), "nope".into())]),
            Err(Error::UnknownWord(w)) if w == "nope"
        ));
        let single = archive(&[("1", "a", vec![1.0, 2.0]), ("2", "b", vec![0.5, -1.0])]);
        assert_eq!(word_difference_vectors(&single, &[("a".into(), "b".into())]).unwrap(), vec![vec![0.5, 3.0]]);
    }

    #[test]
    fn pca_preserves_planar_distances() {
        let e1 = [0.6, 0.0, 0.8, 0.0];
        let e2 = [0.0, 1.0, 0.0, 0.0];
        let coords = [(3.0, 1.0), (-2.0, 0.5), (0.0, -1.5), (1.0, 2.0), (-4.0, -3.0)];
        let vecs: Vec<Vec<f64>> = coords
            .iter()
            .map(|(a, b)| (0..4).map(|k| 1.0 + a * e1[k] + b * e2[k]).collect())
            .collect();
        let p = project_2d(&vecs).unwrap();
        for i in 0..vecs.len() {
            for j in 0..vecs.len() {
                let orig = crate::linalg::euclidean(&vecs[i], &vecs[j]);
                let proj = ((p[i][0] - p[j][0]).powi(2) + (p[i][1] - p[j][1]).powi(2)).sqrt();
                assert!((orig - proj).abs() < 1e-8, "{i},{j}: {orig} vs {proj}");
            }
        }
        let var = |k: usize| p.iter().map(|q| q[k] * q[k]).sum::<f64>();
        assert!(var(0) >= var(1));
    }

    #[test]
    fn pca_identical_vectors_collapse() {
        let p = project_2d(&vec![vec![1.0, 2.0, 3.0]; 4]).unwrap();
        assert!(p.iter().all(|q| *q == [0.0, 0.0]));
        assert!(project_2d(&[vec![1.0]]).is_err());
    }

    #[test]
    fn diff_csv_layout() {
        let csv = difference_vectors_csv(&[("a".into(), "b".into())], &[vec![1.0, -2.0]], &[[0.5, 0.0]]);
        assert_eq!(csv, "pair,dx0,dx1,proj_x,proj_y\na:b,1,-2,0.5,0\n");
    }
}
