//! Sentiment signals from Bitcoin discourse and their lagged relation to market movements.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`corpus`] loads scraped documents and builds the short summaries that get labelled.
//! 2. [`annotation`] turns five-point crowd ratings into binary training labels.
//! 3. [`features`] tokenises summaries into n-gram count vectors (optionally TF-IDF weighted).
//! 4. [`classify`] trains and cross-validates Naive Bayes and logistic regression models.
//! 5. [`market`] derives price and volume changes over 1 to 5 day horizons.
//! 6. [`econometrics`] builds daily sentiment series and runs correlation, ADF and Granger tests.
//! 7. [`pipeline`] wires the stages together behind the `discourse-signal` command line tool.

pub mod annotation;
pub mod classify;
pub mod corpus;
pub mod econometrics;
pub mod error;
pub mod features;
pub mod market;
pub mod pipeline;
pub mod table;

pub use error::{Error, Result};
