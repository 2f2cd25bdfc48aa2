//! Word n-gram features: tokenisation, vocabularies, sparse count vectors and TF-IDF.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::table::csv_field;

/// Lowercases, splits on Unicode whitespace and trims non-alphanumeric characters from
/// both ends of every token. Tokens left empty (punctuation only) are dropped; stop words
/// are kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|raw| raw.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// A contiguous run of 1 to 3 tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gram(Vec<String>);

impl Gram {
    pub fn new(tokens: Vec<String>) -> Self {
        Gram(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// Space-joined form; unambiguous because tokens never contain whitespace.
    pub fn key(&self) -> String {
        self.0.join(" ")
    }
}

impl fmt::Display for Gram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// All contiguous windows of `n` tokens, in order.
pub fn ngrams(tokens: &[String], n: usize) -> Result<Vec<Gram>> {
    if n == 0 {
        return Err(Error::Argument("n-gram order must be at least 1".into()));
    }
    Ok(tokens.windows(n).map(|w| Gram(w.to_vec())).collect())
}

fn gram_keys(tokens: &[String], range: NgramRange) -> impl Iterator<Item = String> + '_ {
    (range.low..=range.high).flat_map(move |n| tokens.windows(n).map(|w| w.join(" ")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(usize, usize)", into = "(usize, usize)")]
pub struct NgramRange {
    low: usize,
    high: usize,
}

impl NgramRange {
    pub const UNIGRAMS: NgramRange = NgramRange { low: 1, high: 1 };

    pub fn new(low: usize, high: usize) -> Result<Self> {
        if !(1..=3).contains(&low) || !(1..=3).contains(&high) || low > high {
            return Err(Error::Argument(format!(
                "n-gram range ({low}, {high}) must satisfy 1 <= low <= high <= 3"
            )));
        }
        Ok(NgramRange { low, high })
    }

    pub fn low(self) -> usize {
        self.low
    }

    pub fn high(self) -> usize {
        self.high
    }
}

impl Default for NgramRange {
    fn default() -> Self {
        Self::UNIGRAMS
    }
}

impl TryFrom<(usize, usize)> for NgramRange {
    type Error = Error;

    fn try_from((low, high): (usize, usize)) -> Result<Self> {
        NgramRange::new(low, high)
    }
}

impl From<NgramRange> for (usize, usize) {
    fn from(r: NgramRange) -> Self {
        (r.low, r.high)
    }
}

/// Feature extraction settings shared by training and prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureOptions {
    pub ngram_range: NgramRange,
    pub min_df: usize,
    pub tfidf: bool,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions {
            ngram_range: NgramRange::UNIGRAMS,
            min_df: 1,
            tfidf: false,
        }
    }
}

/// Gram → column map with document frequencies, ordered lexicographically by gram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    grams: Vec<Gram>,
    lookup: HashMap<String, usize>,
    document_frequency: Vec<usize>,
    ngram_range: NgramRange,
    corpus_size: usize,
}

impl Vocabulary {
    pub fn from_parts(
        entries: Vec<(Gram, usize)>,
        ngram_range: NgramRange,
        corpus_size: usize,
    ) -> Result<Self> {
        let mut entries = entries;
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut grams = Vec::with_capacity(entries.len());
        let mut document_frequency = Vec::with_capacity(entries.len());
        let mut lookup = HashMap::with_capacity(entries.len());
        for (gram, df) in entries {
            if df == 0 || df > corpus_size {
                return Err(Error::Validation(format!(
                    "gram {gram:?} has document frequency {df} outside 1..={corpus_size}"
                )));
            }
            if gram.order() < ngram_range.low || gram.order() > ngram_range.high {
                return Err(Error::Validation(format!(
                    "gram {gram:?} outside n-gram range ({}, {})",
                    ngram_range.low, ngram_range.high
                )));
            }
            if lookup.insert(gram.key(), grams.len()).is_some() {
                return Err(Error::Validation(format!("duplicate gram {gram:?}")));
            }
            grams.push(gram);
            document_frequency.push(df);
        }
        Ok(Vocabulary {
            grams,
            lookup,
            document_frequency,
            ngram_range,
            corpus_size,
        })
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn grams(&self) -> &[Gram] {
        &self.grams
    }

    pub fn index_of(&self, gram: &str) -> Option<usize> {
        self.lookup.get(gram).copied()
    }

    pub fn document_frequency(&self, index: usize) -> usize {
        self.document_frequency[index]
    }

    pub fn ngram_range(&self) -> NgramRange {
        self.ngram_range
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    /// `ln(N / df)` for the given column.
    pub fn idf(&self, index: usize) -> f64 {
        (self.corpus_size as f64 / self.document_frequency[index] as f64).ln()
    }

    /// `gram,index,df` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# ngram_range={} {} corpus_size={}\ngram,index,df\n",
            self.ngram_range.low, self.ngram_range.high, self.corpus_size
        );
        for (i, (g, df)) in self.grams.iter().zip(&self.document_frequency).enumerate() {
            let _ = writeln!(out, "{},{i},{df}", csv_field(&g.key()));
        }
        out
    }

    pub fn from_csv(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "empty vocabulary file"))?;
        let meta = parse_meta(header).ok_or_else(|| {
            Error::parse(origin, 1, "expected '# ngram_range=LO HI corpus_size=N'")
        })?;
        let body: String = lines.collect::<Vec<_>>().join("\n");
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let mut entries = Vec::new();
        for (idx, row) in rdr.records().enumerate() {
            let row = row.map_err(|e| Error::csv(origin, e))?;
            let line = idx + 3;
            let gram = row.get(0).unwrap_or("");
            let index: usize = row
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(origin, line, "bad index"))?;
            if index != idx {
                return Err(Error::parse(
                    origin,
                    line,
                    format!("index {index} out of order"),
                ));
            }
            let df: usize = row
                .get(2)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(origin, line, "bad df"))?;
            entries.push((Gram(gram.split(' ').map(str::to_owned).collect()), df));
        }
        let vocab = Vocabulary::from_parts(entries, meta.0, meta.1)?;
        Ok(vocab)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, path)
    }

    /// SHA-256 of the CSV dump, hex encoded.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv().as_bytes()))
    }
}

fn parse_meta(header: &str) -> Option<(NgramRange, usize)> {
    let rest = header.strip_prefix("# ngram_range=")?;
    let (range, size) = rest.split_once(" corpus_size=")?;
    let (lo, hi) = range.split_once(' ')?;
    let range = NgramRange::new(lo.parse().ok()?, hi.parse().ok()?).ok()?;
    Some((range, size.trim().parse().ok()?))
}

/// Vocabulary of every gram in `range` appearing in at least `min_df` texts.
pub fn build_vocabulary<S: AsRef<str>>(
    texts: &[S],
    range: NgramRange,
    min_df: usize,
) -> Result<Vocabulary> {
    if texts.is_empty() {
        return Err(Error::Validation(
            "cannot build a vocabulary from an empty corpus".into(),
        ));
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for text in texts {
        let tokens = tokenize(text.as_ref());
        let mut seen: Vec<String> = gram_keys(&tokens, range).collect();
        seen.sort_unstable();
        seen.dedup();
        for key in seen {
            *df.entry(key).or_default() += 1;
        }
    }
    let entries = df
        .into_iter()
        .filter(|&(_, c)| c >= min_df.max(1))
        .map(|(k, c)| (Gram(k.split(' ').map(str::to_owned).collect()), c))
        .collect();
    Vocabulary::from_parts(entries, range, texts.len())
}

/// Sparse row: `(column, value)` pairs in ascending column order, no stored zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn from_pairs(mut entries: Vec<(usize, f64)>) -> Self {
        entries.retain(|&(_, v)| v != 0.0);
        entries.sort_by_key(|&(i, _)| i);
        entries.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        SparseVector { entries }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        SparseVector {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, col: usize) -> f64 {
        self.entries
            .binary_search_by_key(&col, |&(i, _)| i)
            .map(|p| self.entries[p].1)
            .unwrap_or(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }

    pub fn to_dense(&self, cols: usize) -> Vec<f64> {
        let mut out = vec![0.0; cols];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    pub fn scaled(&self, factor: f64) -> SparseVector {
        SparseVector::from_pairs(self.entries.iter().map(|&(i, v)| (i, v * factor)).collect())
    }
}

/// Counts of in-vocabulary grams in `text`. Out-of-vocabulary grams are ignored.
pub fn vectorize(text: &str, vocab: &Vocabulary) -> SparseVector {
    let tokens = tokenize(text);
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for key in gram_keys(&tokens, vocab.ngram_range) {
        if let Some(i) = vocab.index_of(&key) {
            *counts.entry(i).or_default() += 1.0;
        }
    }
    SparseVector {
        entries: counts.into_iter().collect(),
    }
}

/// Document × gram matrix of raw counts or TF-IDF weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: Vec<SparseVector>,
    cols: usize,
    weighted: bool,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<SparseVector>, cols: usize, weighted: bool) -> Result<Self> {
        for (r, row) in rows.iter().enumerate() {
            if let Some((c, v)) = row
                .iter()
                .find(|&(c, v)| c >= cols || v < 0.0 || !v.is_finite())
            {
                return Err(Error::Validation(format!(
                    "row {r}: entry ({c}, {v}) invalid for {cols} columns"
                )));
            }
            if !weighted && row.iter().any(|(_, v)| v.fract() != 0.0) {
                return Err(Error::Validation(format!(
                    "row {r}: raw counts must be integers"
                )));
            }
        }
        Ok(FeatureMatrix {
            rows,
            cols,
            weighted,
        })
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &SparseVector {
        &self.rows[i]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }
}

pub fn vectorize_all<S: AsRef<str>>(texts: &[S], vocab: &Vocabulary) -> FeatureMatrix {
    FeatureMatrix {
        rows: texts.iter().map(|t| vectorize(t.as_ref(), vocab)).collect(),
        cols: vocab.len(),
        weighted: false,
    }
}

/// Replaces every count `tf` in column `i` by `tf * ln(N / df_i)`.
pub fn tfidf_transform(m: &FeatureMatrix, vocab: &Vocabulary) -> Result<FeatureMatrix> {
    if m.weighted {
        return Err(Error::State("matrix is already TF-IDF weighted".into()));
    }
    if m.cols != vocab.len() {
        return Err(Error::Argument(format!(
            "matrix has {} columns but vocabulary has {} grams",
            m.cols,
            vocab.len()
        )));
    }
    let idf: Vec<f64> = (0..vocab.len()).map(|i| vocab.idf(i)).collect();
    let rows = m
        .rows
        .iter()
        .map(|row| SparseVector::from_pairs(row.iter().map(|(i, tf)| (i, tf * idf[i])).collect()))
        .collect();
    Ok(FeatureMatrix {
        rows,
        cols: m.cols,
        weighted: true,
    })
}

/// Vectorises `texts` over `vocab`, applying TF-IDF when `options.tfidf` is set.
pub fn featurize<S: AsRef<str>>(
    texts: &[S],
    vocab: &Vocabulary,
    options: &FeatureOptions,
) -> Result<FeatureMatrix> {
    let counts = vectorize_all(texts, vocab);
    if options.tfidf {
        tfidf_transform(&counts, vocab)
    } else {
        Ok(counts)
    }
}

pub fn save_vocabulary(vocab: &Vocabulary, path: impl AsRef<Path>) -> Result<()> {
    use std::io::Write;
    let path = path.as_ref();
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(vocab.to_csv().as_bytes())
        .map_err(|e| Error::io(path, e))
}
