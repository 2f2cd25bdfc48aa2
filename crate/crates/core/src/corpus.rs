//! Discourse dumps: one JSON object per line, one line per document.
//!
//! ```text
//! {"id":"n-1","channel":"news","source":"Reuters","timestamp":"2015-03-02","title":"...","body":"...","author":null}
//! ```

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default summary length, in characters of body text.
pub const SUMMARY_LIMIT: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    News,
    Forum,
    Reddit,
    Irc,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::News, Channel::Forum, Channel::Reddit, Channel::Irc];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::News => "news",
            Channel::Forum => "forum",
            Channel::Reddit => "reddit",
            Channel::Irc => "irc",
        }
    }

    /// Capitalised name used in rendered tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Channel::News => "News",
            Channel::Forum => "Forum",
            Channel::Reddit => "Reddit",
            Channel::Irc => "IRC",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "news" => Ok(Channel::News),
            "forum" => Ok(Channel::Forum),
            "reddit" => Ok(Channel::Reddit),
            "irc" => Ok(Channel::Irc),
            other => Err(Error::Argument(format!(
                "unknown channel {other:?} (expected news, forum, reddit or irc)"
            ))),
        }
    }
}

/// A single scraped text item. IRC messages carry an empty title.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub channel: Channel,
    pub source: String,
    pub timestamp: NaiveDate,
    pub title: String,
    pub body: String,
    pub author: Option<String>,
}

impl Document {
    /// Title, one space, then at most `limit` characters of body.
    pub fn summary(&self, limit: usize) -> String {
        summarize(self, limit)
    }
}

/// Documents of one channel in ascending timestamp order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    channel: Channel,
    documents: Vec<Document>,
}

impl Corpus {
    /// Builds a corpus, sorting by timestamp (stable) and checking channel and id uniqueness.
    pub fn new(channel: Channel, mut documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if doc.channel != channel {
                return Err(Error::Validation(format!(
                    "document {:?} has channel {} in a {} corpus",
                    doc.id, doc.channel, channel
                )));
            }
            if doc.title.is_empty() && doc.body.is_empty() {
                return Err(Error::Validation(format!(
                    "document {:?} has neither title nor body",
                    doc.id
                )));
            }
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate document id {:?}",
                    doc.id
                )));
            }
        }
        documents.sort_by_key(|d| d.timestamp);
        Ok(Corpus { channel, documents })
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    /// First and last document dates, if any.
    pub fn date_span(&self) -> Option<(NaiveDate, NaiveDate)> {
        Some((
            self.documents.first()?.timestamp,
            self.documents.last()?.timestamp,
        ))
    }
}

#[derive(Deserialize)]
struct Record {
    id: Option<String>,
    channel: Option<Channel>,
    #[serde(default)]
    source: String,
    timestamp: Option<String>,
    #[serde(default)]
    title: String,
    #[serde(default)]
    body: String,
    #[serde(default)]
    author: Option<String>,
}

/// Reads a JSONL dump. Blank lines are skipped.
pub fn load_documents(path: impl AsRef<Path>, channel: Channel) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_documents(BufReader::new(file), channel, path)
}

pub fn read_documents(reader: impl BufRead, channel: Channel, origin: &Path) -> Result<Corpus> {
    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record =
            serde_json::from_str(&line).map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
        let id = record
            .id
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::parse(origin, lineno, "missing id"))?;
        let raw_ts = record
            .timestamp
            .ok_or_else(|| Error::parse(origin, lineno, "missing timestamp"))?;
        let timestamp = parse_date(&raw_ts)
            .ok_or_else(|| Error::parse(origin, lineno, format!("bad timestamp {raw_ts:?}")))?;
        if let Some(c) = record.channel {
            if c != channel {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("record channel {c} does not match requested channel {channel}"),
                ));
            }
        }
        if record.title.is_empty() && record.body.is_empty() {
            return Err(Error::parse(
                origin,
                lineno,
                "record has neither title nor body",
            ));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::Validation(format!(
                "{}:{lineno}: duplicate document id {id:?}",
                origin.display()
            )));
        }
        documents.push(Document {
            id,
            channel,
            source: record.source,
            timestamp,
            title: record.title,
            body: record.body,
            author: record.author,
        });
    }
    Corpus::new(channel, documents)
}

/// Accepts `YYYY-MM-DD`, optionally followed by a time part (`T...` or ` ...`).
pub(crate) fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    let day = s.get(..10)?;
    if s.len() > 10 && !matches!(s.as_bytes()[10], b'T' | b' ') {
        return None;
    }
    NaiveDate::parse_from_str(day, "%Y-%m-%d").ok()
}

/// Writes a corpus in the same JSONL layout `load_documents` reads.
pub fn write_documents(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for doc in corpus.documents() {
        let line = serde_json::to_string(doc).expect("document serialisation is infallible");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Title, a single space, then the first `limit` characters (Unicode scalar values) of the body.
/// Either part is used alone when the other is empty.
pub fn summarize(doc: &Document, limit: usize) -> String {
    let body: String = match doc.body.char_indices().nth(limit) {
        Some((cut, _)) => doc.body[..cut].to_owned(),
        None => doc.body.clone(),
    };
    match (doc.title.is_empty(), body.is_empty()) {
        (_, true) => doc.title.clone(),
        (true, false) => body,
        (false, false) => format!("{} {}", doc.title, body),
    }
}

/// Keeps documents dated within `start..=end`.
pub fn filter_date_range(corpus: &Corpus, start: NaiveDate, end: NaiveDate) -> Result<Corpus> {
    if start > end {
        return Err(Error::Argument(format!("start {start} is after end {end}")));
    }
    let documents = corpus
        .documents
        .iter()
        .filter(|d| d.timestamp >= start && d.timestamp <= end)
        .cloned()
        .collect();
    Ok(Corpus {
        channel: corpus.channel,
        documents,
    })
}
