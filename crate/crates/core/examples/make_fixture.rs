//! Regenerates the synthetic fixture under `tests/fixtures/synthetic/`.
//!
//! A year of news documents with clearly worded positive and negative items,
//! five crowd ratings for a subset of them, and a market series whose daily
//! percentage price change is driven by the previous day's negative count:
//! `avg[t+1] / avg[t] - 1 = -0.008 (N[t] - 3) + 0.01 e`. Volume is independent
//! of sentiment.
//!
//! `cargo run --example make_fixture [-- OUT_DIR]`

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use chrono::{Duration, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const SEED: u64 = 20150101;
const DAYS: i64 = 365;
const EXTRA_MARKET_DAYS: i64 = 10;
const ANNOTATED_FRACTION: f64 = 0.35;

const POSITIVE: &[&str] = &[
    "surge",
    "rally",
    "gain",
    "bullish",
    "adoption",
    "growth",
    "optimistic",
    "record",
    "profit",
    "soar",
    "upgrade",
    "breakthrough",
    "partnership",
    "approval",
    "boom",
];
const NEGATIVE: &[&str] = &[
    "crash",
    "hack",
    "theft",
    "bearish",
    "fraud",
    "ban",
    "collapse",
    "loss",
    "plunge",
    "scam",
    "lawsuit",
    "bankruptcy",
    "selloff",
    "panic",
    "outage",
];
const FILLER: &[&str] = &[
    "bitcoin",
    "price",
    "market",
    "exchange",
    "today",
    "traders",
    "report",
    "week",
    "blockchain",
    "wallet",
    "miners",
    "network",
    "analysts",
    "investors",
    "the",
    "a",
    "of",
    "on",
    "after",
    "as",
];
const SOURCES: &[&str] = &["coindesk", "ccn", "bitcoinmagazine", "newsbtc"];

fn sentence(rng: &mut ChaCha8Rng, mood: &[&str], len: usize, mood_words: usize) -> String {
    let mut words: Vec<&str> = (0..len).map(|_| *FILLER.choose(rng).unwrap()).collect();
    for _ in 0..mood_words {
        let at = rng.random_range(0..words.len());
        words[at] = mood.choose(rng).unwrap();
    }
    words.join(" ")
}

fn main() {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic")
        });
    fs::create_dir_all(&out).expect("create fixture dir");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let start = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();

    let mut corpus = String::new();
    let mut ratings = String::from("doc_id,worker_id,rating\n");
    let mut negatives = Vec::with_capacity(DAYS as usize);
    let mut serial = 0;
    for day in 0..DAYS {
        let date = start + Duration::days(day);
        let n_pos = rng.random_range(1..=6usize);
        let n_neg = rng.random_range(0..=6usize);
        negatives.push(n_neg as f64);
        let mut moods: Vec<bool> = [vec![true; n_pos], vec![false; n_neg]].concat();
        // interleave so document order within a day carries no signal
        for i in (1..moods.len()).rev() {
            moods.swap(i, rng.random_range(0..=i));
        }
        for positive in moods {
            serial += 1;
            let id = format!("news-{serial:05}");
            let mood = if positive { POSITIVE } else { NEGATIVE };
            let title = sentence(&mut rng, mood, 5, 1);
            let (len, mood_words) = (rng.random_range(15..25), rng.random_range(2..5));
            let body = sentence(&mut rng, mood, len, mood_words);
            let (hour, minute) = (rng.random_range(0..24), rng.random_range(0..60));
            let record = serde_json::json!({
                "id": id,
                "channel": "news",
                "source": SOURCES.choose(&mut rng).unwrap(),
                "timestamp": format!("{date}T{hour:02}:{minute:02}:00"),
                "title": title,
                "body": body,
                "author": format!("author{}", rng.random_range(1..40)),
            });
            writeln!(corpus, "{record}").unwrap();

            if rng.random::<f64>() < ANNOTATED_FRACTION {
                let sign: i8 = if positive { 1 } else { -1 };
                for _ in 0..5 {
                    let worker = format!("W{:03}", rng.random_range(0..60));
                    let u: f64 = rng.random();
                    let rating = if u < 0.1 {
                        0
                    } else if u < 0.4 {
                        2 * sign
                    } else {
                        sign
                    };
                    writeln!(ratings, "{id},{worker},{rating}").unwrap();
                }
            }
        }
    }

    let mut market = String::from("Date,Average,Volume,Ask,Bid,Last\n");
    let mut price = 300.0_f64;
    for day in 0..DAYS + EXTRA_MARKET_DAYS {
        let date = start + Duration::days(day);
        let z: f64 = StandardNormal.sample(&mut rng);
        let v: f64 = StandardNormal.sample(&mut rng);
        let volume = 40_000.0 * (0.3 * v).exp();
        writeln!(
            market,
            "{date},{price:.4},{volume:.2},{:.4},{:.4},{:.4}",
            price * 1.001,
            price * 0.999,
            price
        )
        .unwrap();
        let driver = negatives
            .get(day as usize)
            .map_or(0.0, |n| -0.008 * (n - 3.0));
        price *= 1.0 + driver + 0.01 * z;
    }

    let config = serde_json::json!({
        "channels": [{"channel": "news", "corpus": "news.jsonl", "annotations": "annotations.csv"}],
        "market": "market.csv",
        "label_method": "mean",
        "features": {"ngram_range": [1, 2], "min_df": 1, "tfidf": false},
        "classifiers": [
            {"kind": "multinomial_nb", "alpha": 1.0},
            {"kind": "logistic_regression", "learning_rate": 0.5, "max_iter": 2000, "tol": 1e-6, "l2": 1e-3}
        ],
        "cv": {"folds": 10, "seed": 7},
        "lags": [1, 2, 3, 4, 5],
        "out": "out"
    });
    fs::write(out.join("news.jsonl"), corpus).unwrap();
    fs::write(out.join("annotations.csv"), ratings).unwrap();
    fs::write(out.join("market.csv"), market).unwrap();
    fs::write(
        out.join("run.json"),
        serde_json::to_string_pretty(&config).unwrap() + "\n",
    )
    .unwrap();
    println!("wrote fixture to {}", out.display());
}
