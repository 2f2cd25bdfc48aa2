//! Crowd annotations on a five-point scale and the label inference built on them.
//!
//! Ratings run from -2 (very negative) to +2 (very positive). Two inference schemes
//! are provided: a majority vote over ratings collapsed to {-1, 0, +1} and the sign of
//! the mean rating. Documents inferred neutral never enter a training set.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SUMMARY_LIMIT};
use crate::error::{Error, Result};
use crate::table::{align, csv_field, group_thousands};

/// Column headers for the five rating buckets, most negative first.
pub const BUCKET_HEADERS: [&str; 5] = ["- -", "-", "0", "+", "+ +"];

/// Worker-activity histogram bin width (annotations per worker).
pub const WORKER_BIN_WIDTH: usize = 20;

/// Binary training target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "positive" => Ok(Label::Positive),
            "negative" => Ok(Label::Negative),
            other => Err(Error::Argument(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

impl Sentiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "positive",
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
        }
    }

    /// The binary label, or `None` for neutral documents.
    pub fn label(self) -> Option<Label> {
        match self {
            Sentiment::Positive => Some(Label::Positive),
            Sentiment::Negative => Some(Label::Negative),
            Sentiment::Neutral => None,
        }
    }

    fn from_sign(sign: i32) -> Self {
        match sign.signum() {
            1 => Sentiment::Positive,
            -1 => Sentiment::Negative,
            _ => Sentiment::Neutral,
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sentiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "positive" => Ok(Sentiment::Positive),
            "negative" => Ok(Sentiment::Negative),
            "neutral" => Ok(Sentiment::Neutral),
            other => Err(Error::Argument(format!("unknown sentiment {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelMethod {
    Majority,
    #[default]
    Mean,
}

impl LabelMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelMethod::Majority => "majority",
            LabelMethod::Mean => "mean",
        }
    }
}

impl FromStr for LabelMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "majority" => Ok(LabelMethod::Majority),
            "mean" => Ok(LabelMethod::Mean),
            other => Err(Error::Argument(format!("unknown label method {other:?}"))),
        }
    }
}

/// All ratings collected for one document, with the worker that gave each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationSet {
    doc_id: String,
    ratings: Vec<i8>,
    worker_ids: Vec<String>,
}

impl AnnotationSet {
    pub fn new(
        doc_id: impl Into<String>,
        ratings: Vec<i8>,
        worker_ids: Vec<String>,
    ) -> Result<Self> {
        let doc_id = doc_id.into();
        if ratings.is_empty() {
            return Err(Error::Validation(format!(
                "document {doc_id:?} has no ratings"
            )));
        }
        if ratings.len() != worker_ids.len() {
            return Err(Error::Validation(format!(
                "document {doc_id:?}: {} ratings but {} worker ids",
                ratings.len(),
                worker_ids.len()
            )));
        }
        if let Some(r) = ratings.iter().find(|r| !(-2..=2).contains(*r)) {
            return Err(Error::Validation(format!(
                "document {doc_id:?}: rating {r} outside -2..=2"
            )));
        }
        Ok(AnnotationSet {
            doc_id,
            ratings,
            worker_ids,
        })
    }

    /// Convenience constructor assigning synthetic worker ids `w0, w1, ...`.
    pub fn anonymous(doc_id: impl Into<String>, ratings: Vec<i8>) -> Result<Self> {
        let workers = (0..ratings.len()).map(|i| format!("w{i}")).collect();
        Self::new(doc_id, ratings, workers)
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn ratings(&self) -> &[i8] {
        &self.ratings
    }

    pub fn worker_ids(&self) -> &[String] {
        &self.worker_ids
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferredLabel {
    pub doc_id: String,
    pub method: LabelMethod,
    pub value: Sentiment,
    pub mean_score: Option<f64>,
}

/// Mode of the ratings after merging ±2 into ±1. Ties resolve to neutral.
pub fn majority_vote(a: &AnnotationSet) -> InferredLabel {
    let mut counts = [0usize; 3];
    for &r in &a.ratings {
        counts[(r.signum() + 1) as usize] += 1;
    }
    let value = unique_argmax(&counts)
        .map(|i| Sentiment::from_sign(i as i32 - 1))
        .unwrap_or(Sentiment::Neutral);
    InferredLabel {
        doc_id: a.doc_id.clone(),
        method: LabelMethod::Majority,
        value,
        mean_score: None,
    }
}

/// Sign of the arithmetic mean of the raw ratings. A mean of exactly zero is neutral.
pub fn mean_label(a: &AnnotationSet) -> InferredLabel {
    let sum: i32 = a.ratings.iter().map(|&r| r as i32).sum();
    InferredLabel {
        doc_id: a.doc_id.clone(),
        method: LabelMethod::Mean,
        value: Sentiment::from_sign(sum),
        mean_score: Some(sum as f64 / a.ratings.len() as f64),
    }
}

pub fn infer(a: &AnnotationSet, method: LabelMethod) -> InferredLabel {
    match method {
        LabelMethod::Majority => majority_vote(a),
        LabelMethod::Mean => mean_label(a),
    }
}

/// Mode of the uncollapsed five-point ratings (ties resolve to 0), used for the
/// five-column majority-vote distribution table.
pub fn five_point_vote(a: &AnnotationSet) -> i8 {
    let mut counts = [0usize; 5];
    for &r in &a.ratings {
        counts[(r + 2) as usize] += 1;
    }
    unique_argmax(&counts).map(|i| i as i8 - 2).unwrap_or(0)
}

fn unique_argmax(counts: &[usize]) -> Option<usize> {
    let max = *counts.iter().max()?;
    let mut winners = counts.iter().enumerate().filter(|(_, &c)| c == max);
    let first = winners.next()?.0;
    winners.next().is_none().then_some(first)
}

/// Summary text paired with its binary label.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub doc_id: String,
    pub text: String,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub examples: Vec<TrainingExample>,
    pub neutral_dropped: usize,
}

impl TrainingSet {
    pub fn texts(&self) -> Vec<&str> {
        self.examples.iter().map(|e| e.text.as_str()).collect()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.examples.iter().map(|e| e.label).collect()
    }

    pub fn class_balance(&self) -> ClassBalance {
        let positive = self
            .examples
            .iter()
            .filter(|e| e.label == Label::Positive)
            .count();
        ClassBalance {
            positive,
            negative: self.examples.len() - positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassBalance {
    pub positive: usize,
    pub negative: usize,
}

impl ClassBalance {
    pub fn total(&self) -> usize {
        self.positive + self.negative
    }

    /// Percentages of (positive, negative); zeros for an empty set.
    pub fn percentages(&self) -> (f64, f64) {
        let total = self.total();
        if total == 0 {
            return (0.0, 0.0);
        }
        let p = 100.0 * self.positive as f64 / total as f64;
        (p, 100.0 - p)
    }
}

/// Pairs every annotated document's summary with its inferred label, dropping neutrals.
/// Examples follow corpus (timestamp) order.
pub fn build_training_set(
    corpus: &Corpus,
    annotations: &[AnnotationSet],
    method: LabelMethod,
) -> Result<TrainingSet> {
    let labels = infer_all(corpus, annotations, method)?;
    Ok(training_set_from_labels(corpus, &labels))
}

/// Infers labels for every annotation set after checking each resolves to a corpus document.
pub fn infer_all(
    corpus: &Corpus,
    annotations: &[AnnotationSet],
    method: LabelMethod,
) -> Result<Vec<InferredLabel>> {
    let known: HashMap<&str, ()> = corpus
        .documents()
        .iter()
        .map(|d| (d.id.as_str(), ()))
        .collect();
    let missing: Vec<&str> = annotations
        .iter()
        .map(|a| a.doc_id())
        .filter(|id| !known.contains_key(id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Validation(format!(
            "{} annotated document id(s) not found in the {} corpus: {}",
            missing.len(),
            corpus.channel(),
            missing.join(", ")
        )));
    }
    Ok(annotations.iter().map(|a| infer(a, method)).collect())
}

/// Joins already-inferred labels with corpus summaries. Labels for unknown ids are ignored.
pub fn training_set_from_labels(corpus: &Corpus, labels: &[InferredLabel]) -> TrainingSet {
    let by_id: HashMap<&str, &InferredLabel> =
        labels.iter().map(|l| (l.doc_id.as_str(), l)).collect();
    let mut examples = Vec::new();
    let mut neutral_dropped = 0;
    for doc in corpus.documents() {
        let Some(inferred) = by_id.get(doc.id.as_str()) else {
            continue;
        };
        match inferred.value.label() {
            Some(label) => examples.push(TrainingExample {
                doc_id: doc.id.clone(),
                text: doc.summary(SUMMARY_LIMIT),
                label,
            }),
            None => neutral_dropped += 1,
        }
    }
    TrainingSet {
        examples,
        neutral_dropped,
    }
}

/// Reads `doc_id,worker_id,rating` rows, grouping them per document in order of first appearance.
pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotationSet>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_annotations(file, path)
}

pub fn read_annotations(reader: impl std::io::Read, origin: &Path) -> Result<Vec<AnnotationSet>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::csv(origin, e))?.clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Schema(format!("{}: missing column {name:?}", origin.display())))
    };
    let (doc_col, worker_col, rating_col) = (col("doc_id")?, col("worker_id")?, col("rating")?);

    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, (Vec<i8>, Vec<String>)> = HashMap::new();
    for (idx, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::csv(origin, e))?;
        let line = idx + 2;
        let field = |i: usize| row.get(i).unwrap_or("");
        let doc_id = field(doc_col);
        if doc_id.is_empty() {
            return Err(Error::parse(origin, line, "empty doc_id"));
        }
        let rating: i8 = field(rating_col)
            .trim_start_matches('+')
            .parse()
            .ok()
            .filter(|r| (-2..=2).contains(r))
            .ok_or_else(|| {
                Error::parse(
                    origin,
                    line,
                    format!("rating {:?} not in -2..=2", field(rating_col)),
                )
            })?;
        let entry = grouped.entry(doc_id.to_owned()).or_insert_with(|| {
            order.push(doc_id.to_owned());
            (Vec::new(), Vec::new())
        });
        entry.0.push(rating);
        entry.1.push(field(worker_col).to_owned());
    }
    order
        .into_iter()
        .map(|id| {
            let (ratings, workers) = grouped.remove(&id).expect("grouped id");
            AnnotationSet::new(id, ratings, workers)
        })
        .collect()
}

/// Five-bucket counts for one row of a distribution table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketRow {
    pub name: String,
    pub counts: [usize; 5],
}

impl BucketRow {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBin {
    /// Inclusive lower bound, annotations per worker.
    pub low: usize,
    /// Inclusive upper bound.
    pub high: usize,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionReport {
    pub sources: Vec<BucketRow>,
    pub totals: [usize; 5],
    pub total: usize,
    pub percentages: [f64; 5],
    pub worker_histogram: Vec<HistogramBin>,
    pub workers: usize,
    pub mean_per_worker: f64,
    /// Population standard deviation of annotations per worker.
    pub std_per_worker: f64,
}

/// Per-source rating counts plus worker activity. Sources appear in sorted order;
/// documents missing from `source_of` are counted under "unknown".
pub fn distribution_report(
    annotations: &[AnnotationSet],
    source_of: &HashMap<String, String>,
) -> Result<DistributionReport> {
    if annotations.is_empty() {
        return Err(Error::Validation("no annotations".into()));
    }
    let mut per_source: BTreeMap<&str, [usize; 5]> = BTreeMap::new();
    let mut per_worker: BTreeMap<&str, usize> = BTreeMap::new();
    for a in annotations {
        let source = source_of
            .get(a.doc_id())
            .map(String::as_str)
            .unwrap_or("unknown");
        let row = per_source.entry(source).or_default();
        for (&r, w) in a.ratings.iter().zip(&a.worker_ids) {
            row[(r + 2) as usize] += 1;
            *per_worker.entry(w.as_str()).or_default() += 1;
        }
    }
    let sources: Vec<BucketRow> = per_source
        .into_iter()
        .map(|(name, counts)| BucketRow {
            name: name.to_owned(),
            counts,
        })
        .collect();
    let mut totals = [0usize; 5];
    for row in &sources {
        for (t, c) in totals.iter_mut().zip(row.counts) {
            *t += c;
        }
    }
    let total: usize = totals.iter().sum();
    let percentages = totals.map(|c| 100.0 * c as f64 / total as f64);

    let activity: Vec<usize> = per_worker.values().copied().collect();
    let workers = activity.len();
    let mean = total as f64 / workers as f64;
    let var = activity
        .iter()
        .map(|&c| (c as f64 - mean).powi(2))
        .sum::<f64>()
        / workers as f64;
    let max = activity.iter().copied().max().unwrap_or(0);
    let worker_histogram = (0..=max.saturating_sub(1) / WORKER_BIN_WIDTH)
        .map(|b| {
            let low = b * WORKER_BIN_WIDTH + 1;
            let high = (b + 1) * WORKER_BIN_WIDTH;
            HistogramBin {
                low,
                high,
                workers: activity.iter().filter(|&&c| c >= low && c <= high).count(),
            }
        })
        .collect();

    Ok(DistributionReport {
        sources,
        totals,
        total,
        percentages,
        worker_histogram,
        workers,
        mean_per_worker: mean,
        std_per_worker: var.sqrt(),
    })
}

impl DistributionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("source,- -,-,0,+,+ +,total\n");
        for row in &self.sources {
            let c = row.counts;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                csv_field(&row.name),
                c[0],
                c[1],
                c[2],
                c[3],
                c[4],
                row.total()
            );
        }
        let t = self.totals;
        let _ = writeln!(
            out,
            "Total,{},{},{},{},{},{}",
            t[0], t[1], t[2], t[3], t[4], self.total
        );
        let p = self.percentages;
        let _ = writeln!(
            out,
            "Percent,{:.1},{:.1},{:.1},{:.1},{:.1},100.0",
            p[0], p[1], p[2], p[3], p[4]
        );
        out
    }

    pub fn worker_histogram_csv(&self) -> String {
        let mut out = String::from("low,high,workers\n");
        for bin in &self.worker_histogram {
            let _ = writeln!(out, "{},{},{}", bin.low, bin.high, bin.workers);
        }
        out
    }

    /// Aligned table in the layout of the per-channel annotation distribution tables.
    pub fn render_text(&self, title: &str) -> String {
        let mut rows: Vec<Vec<String>> = vec![std::iter::once(String::new())
            .chain(BUCKET_HEADERS.iter().map(|h| h.to_string()))
            .collect()];
        for row in &self.sources {
            rows.push(
                std::iter::once(row.name.clone())
                    .chain(row.counts.iter().map(|c| group_thousands(*c)))
                    .collect(),
            );
        }
        rows.push(
            std::iter::once("Total".to_string())
                .chain(
                    self.totals
                        .iter()
                        .zip(self.percentages)
                        .map(|(c, p)| format!("{} ({p:.1}%)", group_thousands(*c))),
                )
                .collect(),
        );
        let mut out = format!("{title}\n");
        out.push_str(&align(&rows));
        let _ = writeln!(
            out,
            "\n{} workers, {} annotations, {:.1} per worker (std {:.2})",
            self.workers, self.total, self.mean_per_worker, self.std_per_worker
        );
        out
    }
}

/// Counts of five-point modal votes across documents.
pub fn majority_distribution(annotations: &[AnnotationSet]) -> [usize; 5] {
    let mut counts = [0usize; 5];
    for a in annotations {
        counts[(five_point_vote(a) + 2) as usize] += 1;
    }
    counts
}

pub fn render_majority_distribution(counts: &[usize; 5]) -> (String, String) {
    let total: usize = counts.iter().sum::<usize>().max(1);
    let cells: Vec<String> = counts
        .iter()
        .map(|&c| {
            format!(
                "{} ({:.1}%)",
                group_thousands(c),
                100.0 * c as f64 / total as f64
            )
        })
        .collect();
    let text = format!(
        "Majority vote label distribution\n{}",
        align(&[
            BUCKET_HEADERS.iter().map(|h| h.to_string()).collect(),
            cells
        ])
    );
    let csv = format!(
        "- -,-,0,+,+ +\n{},{},{},{},{}\n",
        counts[0], counts[1], counts[2], counts[3], counts[4]
    );
    (csv, text)
}

/// `doc_id,method,value,mean_score` rows.
pub fn labels_to_csv(labels: &[InferredLabel]) -> String {
    let mut out = String::from("doc_id,method,value,mean_score\n");
    for l in labels {
        let score = l.mean_score.map(|s| format!("{s}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            csv_field(&l.doc_id),
            l.method.as_str(),
            l.value.as_str(),
            score
        );
    }
    out
}

pub fn read_labels_csv(path: impl AsRef<Path>) -> Result<Vec<InferredLabel>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut labels = Vec::new();
    for (idx, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = idx + 2;
        let bad = |what: &str| Error::parse(path, line, format!("bad {what}"));
        let method: LabelMethod = row.get(1).ok_or_else(|| bad("method"))?.parse()?;
        let value: Sentiment = row.get(2).ok_or_else(|| bad("value"))?.parse()?;
        let mean_score = match row.get(3).unwrap_or("") {
            "" => None,
            s => Some(s.parse::<f64>().map_err(|_| bad("mean_score"))?),
        };
        labels.push(InferredLabel {
            doc_id: row.get(0).ok_or_else(|| bad("doc_id"))?.to_owned(),
            method,
            value,
            mean_score,
        });
    }
    Ok(labels)
}
