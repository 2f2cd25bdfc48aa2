//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails. Built with `harness = false`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use discourse_signal::annotation::{majority_vote, mean_label, AnnotationSet, Label, Sentiment};
use discourse_signal::classify::{
    lr_gradient, lr_objective, metrics, posterior, predict_lr, train_nb, ClassifierSpec,
    ConfusionMatrix, LrModel, LrOptions, Model, NbVariant, TextClassifier,
};
use discourse_signal::econometrics::{adf_test, granger_test, pearson};
use discourse_signal::features::{FeatureMatrix, FeatureOptions, SparseVector};
use discourse_signal::pipeline::{
    cmd_aggregate, cmd_analyze, cmd_train_eval, run_all, LoadedConfig, Overrides,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(
        elapsed < limit,
        format!("took {elapsed:?}, limit {limit:?}"),
    )
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn c1_metric_fidelity() -> Outcome {
    let c = ConfusionMatrix::new(422, 87, 127, 237);
    let start = Instant::now();
    let m = metrics(&c).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    for (name, got, want) in [
        ("precision", m.precision, 0.8290),
        ("recall", m.recall, 0.7686),
        ("f1", m.f1, 0.7976),
        ("accuracy", m.accuracy, 0.7549),
    ] {
        ensure((got - want).abs() < 1e-3, format!("{name} {got} vs {want}"))?;
    }
    let harmonic = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    ensure(
        (m.f1 - harmonic).abs() < 1e-12,
        format!("f1 {} vs harmonic {harmonic}", m.f1),
    )?;
    within_time(elapsed, Duration::from_millis(1))?;
    Ok(format!(
        "P {:.4} R {:.4} F1 {:.4} acc {:.4} in {elapsed:?}",
        m.precision, m.recall, m.f1, m.accuracy
    ))
}

fn c2_published_matrices() -> Outcome {
    // [[TP, FP], [FN, TN]] as printed (rows predicted, columns real) and the
    // comparison table's CV / Accuracy entry for the same classifier and channel
    let cases: [(&str, [u64; 4], f64); 8] = [
        ("LR news", [191, 114, 62, 453], 0.78),
        ("LR reddit", [208, 281, 112, 867], 0.73),
        ("LR forum", [391, 303, 209, 1048], 0.74),
        ("LR irc", [371, 318, 159, 692], 0.69),
        ("MNB news", [222, 83, 66, 449], 0.82),
        ("MNB reddit", [267, 222, 176, 803], 0.73),
        ("MNB forum", [405, 289, 287, 970], 0.71),
        ("MNB irc", [393, 296, 238, 613], 0.65),
    ];
    let mut parts = Vec::new();
    for (name, [tp, fp, fn_, tn], table) in cases {
        let acc = metrics(&ConfusionMatrix::new(tp, fp, fn_, tn))
            .map_err(|e| e.to_string())?
            .accuracy;
        ensure(
            (acc - table).abs() <= 0.01,
            format!("{name}: {acc:.4} vs {table}"),
        )?;
        parts.push(format!("{name} {acc:.4}"));
    }
    Ok(parts.join(", "))
}

fn c3_label_inference() -> Outcome {
    let a =
        AnnotationSet::anonymous("fixture", vec![-2, -1, 0, 0, 1]).map_err(|e| e.to_string())?;
    let majority = majority_vote(&a);
    let mean = mean_label(&a);
    ensure(
        majority.value == Sentiment::Neutral,
        format!("majority gave {}", majority.value),
    )?;
    ensure(
        mean.value == Sentiment::Negative,
        format!("mean gave {}", mean.value),
    )?;
    ensure(
        mean.mean_score == Some(-0.4),
        format!("mean score {:?}", mean.mean_score),
    )?;
    Ok("majority neutral, mean negative at -0.4".into())
}

/// Posterior by direct products of Laplace-smoothed probabilities.
fn nb_oracle(docs: &[Vec<u32>], labels: &[Label], x: &[u32], alpha: f64) -> [f64; 2] {
    let v = x.len();
    let mut joint = [0.0; 2];
    for (c, class) in [Label::Positive, Label::Negative].into_iter().enumerate() {
        let members: Vec<&Vec<u32>> = docs
            .iter()
            .zip(labels)
            .filter(|(_, l)| **l == class)
            .map(|(d, _)| d)
            .collect();
        let prior = members.len() as f64 / docs.len() as f64;
        let per_word: Vec<f64> = (0..v)
            .map(|w| members.iter().map(|d| d[w] as f64).sum())
            .collect();
        let total: f64 = per_word.iter().sum();
        let mut p = prior;
        for w in 0..v {
            p *= ((per_word[w] + alpha) / (total + alpha * v as f64)).powi(x[w] as i32);
        }
        joint[c] = p;
    }
    let z = joint[0] + joint[1];
    [joint[0] / z, joint[1] / z]
}

fn c4_nb_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(2..=10);
        let v = rng.random_range(1..=6);
        let docs: Vec<Vec<u32>> = (0..n)
            .map(|_| (0..v).map(|_| rng.random_range(0..=5)).collect())
            .collect();
        let mut labels: Vec<Label> = (0..n)
            .map(|_| {
                if rng.random_bool(0.5) {
                    Label::Positive
                } else {
                    Label::Negative
                }
            })
            .collect();
        labels[0] = Label::Positive;
        labels[1] = Label::Negative;
        let rows = docs
            .iter()
            .map(|d| SparseVector::from_dense(&d.iter().map(|&c| c as f64).collect::<Vec<_>>()))
            .collect();
        let x = FeatureMatrix::new(rows, v, false).map_err(|e| e.to_string())?;
        let model =
            train_nb(&x, &labels, NbVariant::Multinomial, 1.0).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let probe: Vec<u32> = (0..v).map(|_| rng.random_range(0..=5)).collect();
            let sv = SparseVector::from_dense(&probe.iter().map(|&c| c as f64).collect::<Vec<_>>());
            let got = posterior(model.log_scores(&sv));
            let want = nb_oracle(&docs, &labels, &probe, 1.0);
            worst = worst
                .max((got[0] - want[0]).abs())
                .max((got[1] - want[1]).abs());
        }
    }
    ensure(worst < 1e-9, format!("max posterior deviation {worst:e}"))?;

    let texts = ["good good", "bad"];
    let labels = [Label::Positive, Label::Negative];
    let clf = TextClassifier::fit(
        &texts,
        &labels,
        &ClassifierSpec::MultinomialNb { alpha: 1.0 },
        &FeatureOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let Model::NaiveBayes(m) = &clf.model else {
        return Err("expected a Naive Bayes model".into());
    };
    let good = clf
        .vocabulary
        .index_of("good")
        .ok_or("no 'good' in vocabulary")?;
    ensure(
        m.feature_log_prob[0][good] == 0.75f64.ln(),
        "P(good|pos) is not 3/4",
    )?;
    ensure(
        m.feature_log_prob[1][good] == (1.0f64 / 3.0).ln(),
        "P(good|neg) is not 1/3",
    )?;
    ensure(
        clf.predict_text("good").label == Label::Positive,
        "'good' not classified positive",
    )?;
    let elapsed = start.elapsed();
    within_time(elapsed, Duration::from_secs(10))?;
    Ok(format!(
        "max deviation {worst:.1e} over 1000 probes, P(good|pos) = 3/4, in {elapsed:.2?}"
    ))
}

fn c5_lr_gradient() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..20);
        let d = rng.random_range(1..6);
        let rows = (0..n)
            .map(|_| {
                SparseVector::from_dense(
                    &(0..d)
                        .map(|_| rng.random_range(0.0..3.0))
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        let x = FeatureMatrix::new(rows, d, true).map_err(|e| e.to_string())?;
        let y: Vec<Label> = (0..n)
            .map(|_| {
                if rng.random_bool(0.5) {
                    Label::Positive
                } else {
                    Label::Negative
                }
            })
            .collect();
        let b = normal(&mut rng);
        let w: Vec<f64> = (0..d).map(|_| normal(&mut rng)).collect();
        let l2 = rng.random_range(0.0..0.1);
        let (g0, g) = lr_gradient(&x, &y, b, &w, l2);

        let h = 1e-5;
        let f = |b: f64, w: &[f64]| lr_objective(&x, &y, b, w, l2);
        let mut numeric = vec![(f(b + h, &w) - f(b - h, &w)) / (2.0 * h)];
        for i in 0..d {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[i] += h;
            down[i] -= h;
            numeric.push((f(b, &up) - f(b, &down)) / (2.0 * h));
        }
        let analytic: Vec<f64> = std::iter::once(g0).chain(g).collect();
        let diff = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, n)| (a - n).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = analytic
            .iter()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
            .max(numeric.iter().map(|a| a * a).sum::<f64>().sqrt())
            .max(1e-8);
        worst = worst.max(diff / scale);
    }
    ensure(worst < 1e-4, format!("relative error {worst:e}"))?;
    let zero = LrModel::zeros(3, LrOptions::default());
    let (_, p) = predict_lr(&zero, &SparseVector::from_dense(&[1.0, 0.0, 2.5]));
    ensure(p == 0.5, format!("zero model gave {p}"))?;
    Ok(format!(
        "max relative error {worst:.1e} over 100 draws, zero model 0.5"
    ))
}

fn c6_pearson() -> Outcome {
    let p = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).map_err(|e| e.to_string())?;
    ensure(
        (p.r - 0.8).abs() <= 1e-4 && (p.p - 0.2).abs() <= 1e-4,
        format!("r {} p {}", p.r, p.p),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(5..200);
        let x: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 * v + normal(&mut rng)).collect();
        let a = rng.random_range(0.1..10.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let b = rng.random_range(-100.0..100.0);
        let c = rng.random_range(0.1..10.0);
        let d = rng.random_range(-100.0..100.0);
        let base = pearson(&x, &y).map_err(|e| e.to_string())?.r;
        let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let cy: Vec<f64> = y.iter().map(|v| c * v + d).collect();
        let moved = pearson(&ax, &cy).map_err(|e| e.to_string())?.r;
        worst = worst.max((moved - a.signum() * base).abs());
    }
    ensure(worst < 1e-10, format!("affine deviation {worst:e}"))?;
    Ok(format!(
        "r {:.4} p {:.4}, affine deviation {worst:.1e}",
        p.r, p.p
    ))
}

fn random_walk(seed: u64, t: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = 0.0;
    (0..t)
        .map(|_| {
            level += normal(&mut rng);
            level
        })
        .collect()
}

fn ar1(seed: u64, t: usize, phi: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prev = 0.0;
    (0..t)
        .map(|_| {
            prev = phi * prev + normal(&mut rng);
            prev
        })
        .collect()
}

fn rejection_rate(series: impl Fn(u64) -> Vec<f64> + Sync, count: u64) -> Result<f64, String> {
    let rejected: Vec<bool> = (0..count)
        .into_par_iter()
        .map(|i| {
            adf_test(&series(i), None)
                .map(|r| r.stationary_at_5pct)
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    Ok(rejected.iter().filter(|r| **r).count() as f64 / count as f64)
}

fn c7_adf() -> Outcome {
    let start = Instant::now();
    let walk = rejection_rate(|i| random_walk(70_000 + i, 365), 1000)?;
    let ar = rejection_rate(|i| ar1(71_000 + i, 365, 0.5), 1000)?;
    let elapsed = start.elapsed();
    ensure(
        (0.02..=0.08).contains(&walk),
        format!("random walk rejection {walk:.3}"),
    )?;
    ensure(ar > 0.90, format!("AR(0.5) rejection {ar:.3}"))?;
    within_time(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "random walk {:.1}%, AR(0.5) {:.1}%, in {elapsed:.2?}",
        100.0 * walk,
        100.0 * ar
    ))
}

/// Solves `A b = c` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut c: Vec<f64>) -> Vec<f64> {
    let k = c.len();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        c.swap(col, pivot);
        for row in col + 1..k {
            let factor = a[row][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (v, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *v -= factor * p;
            }
            c[row] -= factor * c[col];
        }
    }
    let mut b = vec![0.0; k];
    for row in (0..k).rev() {
        let s: f64 = (row + 1..k).map(|j| a[row][j] * b[j]).sum();
        b[row] = (c[row] - s) / a[row][row];
    }
    b
}

fn normal_equations_rss(design: &[Vec<f64>], y: &[f64]) -> f64 {
    let k = design[0].len();
    let xtx: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| design.iter().map(|r| r[i] * r[j]).sum())
                .collect()
        })
        .collect();
    let xty: Vec<f64> = (0..k)
        .map(|i| design.iter().zip(y).map(|(r, v)| r[i] * v).sum())
        .collect();
    let beta = solve(xtx, xty);
    design
        .iter()
        .zip(y)
        .map(|(r, v)| {
            let fit: f64 = r.iter().zip(&beta).map(|(a, b)| a * b).sum();
            (v - fit).powi(2)
        })
        .sum()
}

fn oracle_f(x: &[f64], y: &[f64], lag: usize) -> f64 {
    let rows: Vec<usize> = (lag..y.len()).collect();
    let restricted: Vec<Vec<f64>> = rows
        .iter()
        .map(|&t| {
            std::iter::once(1.0)
                .chain((1..=lag).map(|l| y[t - l]))
                .collect()
        })
        .collect();
    let full: Vec<Vec<f64>> = rows
        .iter()
        .zip(&restricted)
        .map(|(&t, r)| {
            r.iter()
                .copied()
                .chain((1..=lag).map(|l| x[t - l]))
                .collect()
        })
        .collect();
    let target: Vec<f64> = rows.iter().map(|&t| y[t]).collect();
    let (rr, ru) = (
        normal_equations_rss(&restricted, &target),
        normal_equations_rss(&full, &target),
    );
    let df = (rows.len() - 2 * lag - 1) as f64;
    ((rr - ru) / lag as f64) / (ru / df)
}

fn white_pair(seed: u64, t: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..t).map(|_| normal(&mut rng)).collect();
    let y = (0..t).map(|_| normal(&mut rng)).collect();
    (x, y)
}

fn c8_granger() -> Outcome {
    let start = Instant::now();
    let null: Vec<bool> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let (x, y) = white_pair(80_000 + i, 300);
            let lag = 1 + (i as usize % 5);
            granger_test(&x, &y, lag)
                .map(|(xy, _)| xy.p < 0.05)
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    let type_one = null.iter().filter(|r| **r).count() as f64 / 500.0;

    let planted: Vec<(bool, bool)> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let (x, e) = white_pair(81_000 + i, 300);
            let y: Vec<f64> = (0..300)
                .map(|t| if t == 0 { e[0] } else { 0.9 * x[t - 1] + e[t] })
                .collect();
            granger_test(&x, &y, 1)
                .map(|(xy, yx)| (xy.p < 0.01, yx.p < 0.05))
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    let power = planted.iter().filter(|r| r.0).count() as f64 / 500.0;
    let reverse = planted.iter().filter(|r| r.1).count() as f64 / 500.0;

    let mut rng = ChaCha8Rng::seed_from_u64(82);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let t = rng.random_range(40..250);
        let lag = rng.random_range(1..=5);
        let x: Vec<f64> = (0..t).map(|_| normal(&mut rng)).collect();
        let mut y = vec![0.0; t];
        for i in 1..t {
            y[i] = 0.4 * y[i - 1] + 0.5 * x[i - 1] + normal(&mut rng);
        }
        let (xy, _) = granger_test(&x, &y, lag).map_err(|e| e.to_string())?;
        let want = oracle_f(&x, &y, lag);
        worst = worst.max((xy.f_statistic - want).abs() / want.abs().max(1.0));
    }
    let elapsed = start.elapsed();
    ensure(
        (0.02..=0.08).contains(&type_one),
        format!("type-I rate {type_one:.3}"),
    )?;
    ensure(power >= 0.95, format!("power {power:.3}"))?;
    ensure(reverse <= 0.10, format!("reverse rejection {reverse:.3}"))?;
    ensure(worst < 1e-6, format!("F deviation from oracle {worst:e}"))?;
    within_time(elapsed, Duration::from_secs(120))?;
    Ok(format!(
        "type-I {:.1}%, power {:.1}%, reverse {:.1}%, F deviation {worst:.1e}, in {elapsed:.2?}",
        100.0 * type_one,
        100.0 * power,
        100.0 * reverse
    ))
}

fn fixture_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic/run.json")
}

fn load_fixture(out: &Path) -> Result<LoadedConfig, String> {
    let overrides = Overrides {
        out: Some(out.to_path_buf()),
        ..Overrides::default()
    };
    LoadedConfig::load(&fixture_config(), &overrides).map_err(|e| e.to_string())
}

/// Parses every `r = <num>, p = <num>` cell on a line.
fn cells(line: &str) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut rest = line;
    while let Some(i) = rest.find("r = ") {
        rest = &rest[i + 4..];
        let Some((r, tail)) = rest.split_once(", p = ") else {
            break;
        };
        let p_end = tail.find(|c: char| c.is_whitespace()).unwrap_or(tail.len());
        if let (Ok(r), Ok(p)) = (r.parse(), tail[..p_end].parse()) {
            out.push((r, p));
        }
        rest = &tail[p_end..];
    }
    out
}

fn c9_layout() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = load_fixture(tmp.path())?;
    cmd_aggregate(&cfg).map_err(|e| e.to_string())?;
    cmd_train_eval(&cfg).map_err(|e| e.to_string())?;
    cmd_analyze(&cfg).map_err(|e| e.to_string())?;
    let dir = tmp.path().join("analyze/news");
    let read = |name: &str| fs::read_to_string(dir.join(name)).map_err(|e| format!("{name}: {e}"));

    let csv = read("correlation.csv")?;
    let mut keys = std::collections::BTreeSet::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        ensure(
            f.len() == 8 && f[5].parse::<f64>().is_ok() && f[6].parse::<f64>().is_ok(),
            format!("bad row {line}"),
        )?;
        keys.insert((f[1].to_string(), f[2].to_string(), f[3].to_string()));
    }
    ensure(
        keys.len() == 60 && csv.lines().count() == 61,
        format!("{} correlation cells", keys.len()),
    )?;

    let text = read("correlation.txt")?;
    let blocks: Vec<&str> = text.split("\n\n").collect();
    ensure(
        blocks.len() == 3,
        format!("{} correlation blocks", blocks.len()),
    )?;
    for block in &blocks {
        let lines: Vec<&str> = block.lines().collect();
        ensure(lines.len() == 6, format!("block has {} lines", lines.len()))?;
        ensure(
            lines[0].starts_with("Correlation of "),
            "block title missing",
        )?;
        let header_ok = (1..=5).all(|l| lines[1].contains(&format!("t + {l}")));
        ensure(header_ok, format!("lag header {:?}", lines[1]))?;
        for row in &lines[2..] {
            let c = cells(row);
            ensure(c.len() == 5, format!("row has {} cells: {row}", c.len()))?;
            ensure(
                c.iter()
                    .all(|(r, p)| r.abs() <= 1.0 && (0.0..=1.0).contains(p)),
                "cell out of range",
            )?;
        }
    }

    let grid = read("granger_grid.csv")?;
    let rows: BTreeMap<(String, String), Vec<String>> = grid
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<String> = l.split(',').map(str::to_string).collect();
            ((f[0].clone(), f[1].clone()), f[2..].to_vec())
        })
        .collect();
    ensure(
        grid.lines().next() == Some("x,y,lag_1,lag_2,lag_3,lag_4,lag_5"),
        "grid header",
    )?;
    ensure(rows.len() == 6, format!("{} grid rows", rows.len()))?;
    let planted = rows
        .get(&("Negative News".to_string(), "% price change".to_string()))
        .ok_or("planted row missing")?;
    ensure(
        planted[0] == "→",
        format!("planted lag 1 shows {:?}", planted[0]),
    )?;
    let grid_text = read("granger_grid.txt")?;
    ensure(
        grid_text.contains("Lag 1") && grid_text.contains('→'),
        "grid text",
    )?;
    ensure(
        read("granger_f.txt")?.contains("NEGATIVESENT does not Granger Cause PERCCHANGEAVG"),
        "F table",
    )?;
    Ok("3 x 4 x 5 correlation cells, 6-row arrow grid, planted lag-1 arrow present".into())
}

fn tree(root: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.insert(rel, fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(out)
}

fn c10_determinism() -> Outcome {
    let (a, b) = (
        tempfile::tempdir().map_err(|e| e.to_string())?,
        tempfile::tempdir().map_err(|e| e.to_string())?,
    );
    run_all(&load_fixture(a.path())?).map_err(|e| e.to_string())?;
    run_all(&load_fixture(b.path())?).map_err(|e| e.to_string())?;
    let (ta, tb) = (tree(a.path())?, tree(b.path())?);
    ensure(ta.keys().eq(tb.keys()), "file sets differ")?;
    for (name, bytes) in &ta {
        ensure(&tb[name] == bytes, format!("{name} differs"))?;
    }
    let total: usize = ta.values().map(Vec::len).sum();
    Ok(format!("{} files, {total} bytes identical", ta.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("metric fidelity", c1_metric_fidelity),
        ("published confusion matrices", c2_published_matrices),
        ("label inference", c3_label_inference),
        ("naive Bayes oracle", c4_nb_oracle),
        ("logistic gradient", c5_lr_gradient),
        ("pearson", c6_pearson),
        ("ADF calibration", c7_adf),
        ("Granger calibration", c8_granger),
        ("table layout", c9_layout),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
