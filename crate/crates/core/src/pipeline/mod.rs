//! Staged command implementations behind the `discourse-signal` binary.
//!
//! Every stage reads the config, consumes the artifacts of earlier stages from
//! the output directory and writes its own under `out/<stage>/<channel>/`.
//! After each stage `out/manifest.json` is rewritten with the config hash, the
//! seed and a SHA-256 per output file.

mod config;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{
    AnalysisConfig, ChannelInput, CvConfig, LoadedConfig, ModelChoice, Overrides, PercentileFilter,
    RunConfig,
};

use crate::annotation::{
    distribution_report, infer_all, labels_to_csv, load_annotations, majority_distribution,
    read_labels_csv, render_majority_distribution, training_set_from_labels, Label,
};
use crate::classify::{
    comparison_csv, k_fold_cv, load_model, render_comparison, save_model, TextClassifier,
};
use crate::corpus::{filter_date_range, load_documents, Channel, Corpus, Document, SUMMARY_LIMIT};
use crate::econometrics::{
    daily_sentiment_series, granger_sweep, lagged_correlation, percentile_filter, SentimentSeries,
};
use crate::error::{Error, Result};
use crate::market::{load_market_csv, MarketSeries};
use crate::table::csv_field;

pub const MANIFEST: &str = "manifest.json";

fn write_artifact(out: &Path, rel: &str, contents: &str) -> Result<()> {
    let path = out.join(rel);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

fn read_artifact(path: &Path, stage: &str) -> Result<String> {
    if !path.is_file() {
        return Err(Error::State(format!(
            "{} is missing; run `{stage}` first",
            path.display()
        )));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_corpus(cfg: &LoadedConfig, input: &ChannelInput) -> Result<Corpus> {
    load_documents(cfg.resolve(&input.corpus), input.channel)
}

/// Infers labels from crowd ratings and writes the rating distribution tables.
pub fn cmd_aggregate(cfg: &LoadedConfig) -> Result<()> {
    let out = cfg.out_dir();
    for input in &cfg.config.channels {
        let ch = input.channel.as_str();
        let corpus = load_corpus(cfg, input)?;
        let annotations = load_annotations(cfg.resolve(&input.annotations))?;
        let labels = infer_all(&corpus, &annotations, cfg.config.label_method)?;
        let source_of: HashMap<String, String> = corpus
            .documents()
            .iter()
            .map(|d| (d.id.clone(), d.source.clone()))
            .collect();
        let report = distribution_report(&annotations, &source_of)?;
        let (majority_csv, majority_text) =
            render_majority_distribution(&majority_distribution(&annotations));
        let balance = training_set_from_labels(&corpus, &labels).class_balance();
        let (pos_pct, neg_pct) = balance.percentages();

        let dir = format!("aggregate/{ch}");
        write_artifact(&out, &format!("{dir}/labels.csv"), &labels_to_csv(&labels))?;
        write_artifact(&out, &format!("{dir}/distribution.csv"), &report.to_csv())?;
        let title = format!("{} rating distribution", input.channel.display_name());
        write_artifact(
            &out,
            &format!("{dir}/distribution.txt"),
            &report.render_text(&title),
        )?;
        write_artifact(
            &out,
            &format!("{dir}/worker_histogram.csv"),
            &report.worker_histogram_csv(),
        )?;
        write_artifact(
            &out,
            &format!("{dir}/majority_distribution.csv"),
            &majority_csv,
        )?;
        write_artifact(
            &out,
            &format!("{dir}/majority_distribution.txt"),
            &majority_text,
        )?;
        write_artifact(
            &out,
            &format!("{dir}/class_balance.csv"),
            &format!(
                "label,count,percent\npositive,{},{pos_pct}\nnegative,{},{neg_pct}\n",
                balance.positive, balance.negative
            ),
        )?;
        log::info!(
            "{ch}: {} annotated documents, {} positive / {} negative after dropping neutrals",
            labels.len(),
            balance.positive,
            balance.negative
        );
    }
    write_manifest(cfg)
}

fn model_path(out: &Path, channel: Channel, kind: &str) -> PathBuf {
    out.join("models")
        .join(format!("{}_{kind}.model", channel.as_str()))
}

/// Cross-validates every configured classifier per channel, then refits each on
/// all labelled data and saves the model.
pub fn cmd_train_eval(cfg: &LoadedConfig) -> Result<()> {
    let out = cfg.out_dir();
    let c = &cfg.config;
    for input in &c.channels {
        let ch = input.channel.as_str();
        let corpus = load_corpus(cfg, input)?;
        let labels_path = out.join(format!("aggregate/{ch}/labels.csv"));
        read_artifact(&labels_path, "aggregate")?;
        let labels = read_labels_csv(&labels_path)?;
        let training = training_set_from_labels(&corpus, &labels);
        let (texts, y) = (training.texts(), training.labels());

        let mut rows = Vec::new();
        let mut best: Option<(f64, &str)> = None;
        let dir = format!("train_eval/{ch}");
        for spec in &c.classifiers {
            let cv = k_fold_cv(&texts, &y, c.cv.folds, spec, &c.features, c.cv.seed)?;
            let kind = spec.kind();
            let acc = cv.mean_fold_accuracy();
            log::info!("{ch}/{kind}: mean fold accuracy {acc:.4}");
            if best.is_none_or(|(b, _)| acc > b) {
                best = Some((acc, kind));
            }
            let title = format!("{} {}", input.channel.display_name(), spec.display_name());
            write_artifact(
                &out,
                &format!("{dir}/confusion_{kind}.csv"),
                &cv.pooled.to_csv(),
            )?;
            write_artifact(
                &out,
                &format!("{dir}/confusion_{kind}.txt"),
                &cv.pooled.render_text(&title),
            )?;
            rows.push((spec.display_name().to_string(), cv.report));

            let model = TextClassifier::fit(&texts, &y, spec, &c.features)?;
            let path = model_path(&out, input.channel, kind);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            save_model(&model, &path)?;
        }
        let title = input.channel.display_name();
        write_artifact(
            &out,
            &format!("{dir}/comparison.csv"),
            &comparison_csv(&rows),
        )?;
        write_artifact(
            &out,
            &format!("{dir}/comparison.txt"),
            &render_comparison(title, &rows),
        )?;
        let (_, kind) = best.expect("at least one classifier is configured");
        write_artifact(
            &out,
            &format!("{dir}/best_classifier.txt"),
            &format!("{kind}\n"),
        )?;
    }
    write_manifest(cfg)
}

fn chosen_kind(cfg: &LoadedConfig, channel: Channel) -> Result<String> {
    match &cfg.config.analysis.classifier {
        ModelChoice::Kind(k) => Ok(k.clone()),
        ModelChoice::Best => {
            let path = cfg.out_dir().join(format!(
                "train_eval/{}/best_classifier.txt",
                channel.as_str()
            ));
            Ok(read_artifact(&path, "train-eval")?.trim().to_string())
        }
    }
}

fn analysis_range(cfg: &LoadedConfig, corpus: &Corpus) -> Result<(NaiveDate, NaiveDate)> {
    let span = corpus.date_span();
    let a = &cfg.config.analysis;
    match (a.start.or(span.map(|s| s.0)), a.end.or(span.map(|s| s.1))) {
        (Some(s), Some(e)) if s <= e => Ok((s, e)),
        (Some(s), Some(e)) => Err(Error::Validation(format!(
            "analysis end {e} precedes start {s}"
        ))),
        _ => Err(Error::Validation(format!(
            "{} corpus is empty",
            corpus.channel()
        ))),
    }
}

/// Labels every document in the analysis range with the chosen model and
/// writes per-document predictions and the daily sentiment series.
pub fn classify_channel(cfg: &LoadedConfig, input: &ChannelInput) -> Result<SentimentSeries> {
    let out = cfg.out_dir();
    let ch = input.channel.as_str();
    let kind = chosen_kind(cfg, input.channel)?;
    let path = model_path(&out, input.channel, &kind);
    read_artifact(&path, "train-eval")?;
    let model = load_model(&path)?;
    let corpus = load_corpus(cfg, input)?;
    let (start, end) = analysis_range(cfg, &corpus)?;
    let corpus = filter_date_range(&corpus, start, end)?;

    let texts: Vec<String> = corpus
        .documents()
        .iter()
        .map(|d| d.summary(SUMMARY_LIMIT))
        .collect();
    let predictions = model.predict_all(&texts);
    let mut csv = String::from("doc_id,date,label,positive_probability\n");
    let mut classified: Vec<(Document, Label)> = Vec::with_capacity(predictions.len());
    for (doc, p) in corpus.documents().iter().zip(&predictions) {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            csv_field(&doc.id),
            doc.timestamp,
            p.label,
            p.positive_probability
        );
        classified.push((doc.clone(), p.label));
    }
    let series = daily_sentiment_series(input.channel, &classified).with_range(start, end)?;
    let dir = format!("classify/{ch}");
    write_artifact(&out, &format!("{dir}/predictions.csv"), &csv)?;
    write_artifact(&out, &format!("{dir}/sentiment.csv"), &series.to_csv())?;
    write_artifact(&out, &format!("{dir}/model.txt"), &format!("{kind}\n"))?;
    log::info!(
        "{ch}: classified {} documents with {kind}",
        predictions.len()
    );
    Ok(series)
}

pub fn cmd_classify(cfg: &LoadedConfig) -> Result<()> {
    for input in &cfg.config.channels {
        classify_channel(cfg, input)?;
    }
    write_manifest(cfg)
}

/// The market series has to span the sentiment series; lagged changes past the
/// end are used when present.
fn check_coverage(s: &SentimentSeries, m: &MarketSeries) -> Result<()> {
    let (Some(ss), Some(se)) = (s.start(), s.end()) else {
        return Err(Error::Validation(format!(
            "{} sentiment series is empty",
            s.channel()
        )));
    };
    let (Some(ms), Some(me)) = (m.first_date(), m.last_date()) else {
        return Err(Error::Validation("market series is empty".into()));
    };
    if ms > ss || me < se {
        return Err(Error::Range(format!(
            "market data covers {ms}..={me} but {} sentiment covers {ss}..={se}",
            s.channel()
        )));
    }
    Ok(())
}

/// Classifies each channel, then writes the lagged correlation tables, the
/// Granger direction grid, the F/p tables and the ADF checks.
pub fn cmd_analyze(cfg: &LoadedConfig) -> Result<()> {
    let out = cfg.out_dir();
    let c = &cfg.config;
    let market = load_market_csv(cfg.resolve(&c.market), c.allow_gaps)?;
    for input in &c.channels {
        let ch = input.channel.as_str();
        let series = classify_channel(cfg, input)?;
        check_coverage(&series, &market)?;
        let dir = format!("analyze/{ch}");

        let table = lagged_correlation(&series, &market, &c.lags, None)?;
        write_artifact(&out, &format!("{dir}/correlation.csv"), &table.to_csv())?;
        write_artifact(
            &out,
            &format!("{dir}/correlation.txt"),
            &table.render_text(),
        )?;

        if let Some(pf) = c.analysis.percentile_filter {
            let mask = percentile_filter(&series, pf.hi, pf.lo)?;
            log::info!("{ch}: {} days pass the percentile filter", mask.len());
            let filtered = lagged_correlation(&series, &market, &c.lags, Some(&mask))?;
            let header = format!(
                "Days with positive count above the {}th and negative count below the {}th percentile ({} days)\n\n",
                pf.hi,
                pf.lo,
                mask.len()
            );
            write_artifact(
                &out,
                &format!("{dir}/correlation_filtered.csv"),
                &filtered.to_csv(),
            )?;
            write_artifact(
                &out,
                &format!("{dir}/correlation_filtered.txt"),
                &(header + &filtered.render_text()),
            )?;
        }

        let sweep = granger_sweep(&series, &market, &c.analysis.granger_metrics, &c.lags)?;
        write_artifact(
            &out,
            &format!("{dir}/granger_grid.csv"),
            &sweep.arrow_grid_csv(),
        )?;
        write_artifact(
            &out,
            &format!("{dir}/granger_grid.txt"),
            &sweep.arrow_grid_text(),
        )?;
        write_artifact(&out, &format!("{dir}/granger_f.csv"), &sweep.f_table_csv())?;
        write_artifact(&out, &format!("{dir}/granger_f.txt"), &sweep.f_table_text())?;
        write_artifact(
            &out,
            &format!("{dir}/stationarity.csv"),
            &sweep.stationarity_csv(),
        )?;
    }
    write_manifest(cfg)
}

const REPORT_SECTIONS: [(&str, &str); 10] = [
    ("aggregate", "majority_distribution.txt"),
    ("aggregate", "distribution.txt"),
    ("train_eval", "comparison.txt"),
    ("train_eval", "confusion_*.txt"),
    ("analyze", "correlation.txt"),
    ("analyze", "correlation_filtered.txt"),
    ("analyze", "granger_grid.txt"),
    ("analyze", "granger_f.txt"),
    ("analyze", "stationarity.csv"),
    ("classify", "model.txt"),
];

/// Concatenates the text tables already present under the output directory
/// into `report.txt`. Missing sections are skipped.
pub fn cmd_report(cfg: &LoadedConfig) -> Result<()> {
    let out = cfg.out_dir();
    let mut report = String::new();
    for input in &cfg.config.channels {
        let ch = input.channel.as_str();
        let _ = writeln!(report, "==== {} ====\n", input.channel.display_name());
        for (stage, name) in REPORT_SECTIONS {
            let dir = out.join(stage).join(ch);
            let files: Vec<PathBuf> = match name.strip_prefix("confusion_") {
                Some(_) => cfg
                    .config
                    .classifiers
                    .iter()
                    .map(|s| dir.join(format!("confusion_{}.txt", s.kind())))
                    .collect(),
                None => vec![dir.join(name)],
            };
            for f in files.iter().filter(|f| f.is_file()) {
                let text = fs::read_to_string(f).map_err(|e| Error::io(f, e))?;
                let _ = writeln!(
                    report,
                    "-- {stage}/{ch}/{} --",
                    f.file_name().unwrap().to_string_lossy()
                );
                report.push_str(text.trim_end());
                report.push_str("\n\n");
            }
        }
    }
    write_artifact(&out, "report.txt", &report)?;
    write_manifest(cfg)
}

/// All stages in order.
pub fn run_all(cfg: &LoadedConfig) -> Result<()> {
    cmd_aggregate(cfg)?;
    cmd_train_eval(cfg)?;
    cmd_analyze(cfg)?;
    cmd_report(cfg)
}

#[derive(Debug, Serialize)]
struct ManifestEntry {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    config_hash: String,
    seed: u64,
    files: Vec<ManifestEntry>,
}

fn collect_files(root: &Path, dir: &Path, acc: &mut Vec<String>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(root, &path, acc)?;
        } else {
            let rel = path.strip_prefix(root).expect("walk stays under root");
            let rel: Vec<String> = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect();
            acc.push(rel.join("/"));
        }
    }
    Ok(())
}

/// Rewrites `out/manifest.json` over every file currently in the output tree.
pub fn write_manifest(cfg: &LoadedConfig) -> Result<()> {
    let out = cfg.out_dir();
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let mut paths = Vec::new();
    collect_files(&out, &out, &mut paths)?;
    paths.retain(|p| p != MANIFEST);
    paths.sort();
    let mut files = Vec::with_capacity(paths.len());
    for rel in paths {
        let path = out.join(&rel);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        files.push(ManifestEntry {
            path: rel,
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
    }
    let manifest = Manifest {
        config_hash: cfg.config.hash(),
        seed: cfg.config.cv.seed,
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    write_artifact(&out, MANIFEST, &json)
}
