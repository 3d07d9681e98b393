//! Tokenization, document frequencies, and ASSIN-format corpora.
//!
//! An ASSIN corpus is an XML file with root `entailment-corpus` whose `pair`
//! children carry an `id`, an optional gold `similarity` in `[1, 5]`, an
//! optional gold `entailment` class, and the two sentences as `t` and `h`
//! child elements. Blind test sets simply omit the gold attributes.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed XML at {pos}: {detail}")]
    Xml { pos: String, detail: String },
    #[error("root element is <{found}>, expected <entailment-corpus>")]
    WrongRoot { found: String },
    #[error("pair at position {index} has no id attribute")]
    MissingId { index: usize },
    #[error("duplicate pair id {id:?}")]
    DuplicateId { id: String },
    #[error("pair {id:?} is missing its <{element}> sentence")]
    MissingSentence { id: String, element: String },
    #[error("pair {id:?}: cannot parse similarity {value:?} as a number")]
    BadSimilarity { id: String, value: String },
    #[error("pair {id:?}: similarity {value} is outside [1, 5]")]
    SimilarityOutOfRange { id: String, value: f64 },
    #[error("pair {id:?}: unknown entailment class {value:?}")]
    UnknownEntailment { id: String, value: String },
    #[error("cannot build an IDF model from an empty document collection")]
    EmptyDocumentCollection,
}

/// The three entailment classes, stored canonically regardless of source
/// casing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntailmentLabel {
    None,
    Entailment,
    Paraphrase,
}

impl EntailmentLabel {
    /// Class order used everywhere a deterministic ordering is needed
    /// (reports, one-vs-one machines, tie-breaking).
    pub const ALL: [EntailmentLabel; 3] = [
        EntailmentLabel::None,
        EntailmentLabel::Entailment,
        EntailmentLabel::Paraphrase,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EntailmentLabel::None => "None",
            EntailmentLabel::Entailment => "Entailment",
            EntailmentLabel::Paraphrase => "Paraphrase",
        }
    }

    /// Index into [`EntailmentLabel::ALL`].
    pub fn index(&self) -> usize {
        match self {
            EntailmentLabel::None => 0,
            EntailmentLabel::Entailment => 1,
            EntailmentLabel::Paraphrase => 2,
        }
    }
}

impl fmt::Display for EntailmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntailmentLabel {
    type Err = ();

    /// Case-insensitive match against the three class names.
    fn from_str(s: &str) -> Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(EntailmentLabel::None),
            "entailment" => Ok(EntailmentLabel::Entailment),
            "paraphrase" => Ok(EntailmentLabel::Paraphrase),
            _ => Err(()),
        }
    }
}

/// One corpus pair: two raw sentences plus optional gold labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SentencePair {
    pub id: String,
    /// First sentence (the `t`ext of the entailment task).
    pub text_t: String,
    /// Second sentence (the `h`ypothesis).
    pub text_h: String,
    /// Gold similarity in `[1, 5]`, absent on blind test sets.
    pub similarity: Option<f64>,
    /// Gold entailment class, absent on blind test sets.
    pub entailment: Option<EntailmentLabel>,
}

/// An ordered collection of pairs with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub pairs: Vec<SentencePair>,
    /// Free-form provenance tag, e.g. the source file stem.
    pub variant_tag: String,
}

impl Dataset {
    /// Wraps pairs into a dataset, enforcing id uniqueness.
    pub fn new(
        pairs: Vec<SentencePair>,
        variant_tag: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for pair in &pairs {
            if !seen.insert(pair.id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    id: pair.id.clone(),
                });
            }
        }
        Ok(Dataset {
            pairs,
            variant_tag: variant_tag.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// All sentences of the dataset (each `t` and each `h`), in document
    /// order. This is the default IDF corpus: one sentence, one document.
    pub fn sentences(&self) -> impl Iterator<Item = &str> {
        self.pairs
            .iter()
            .flat_map(|p| [p.text_t.as_str(), p.text_h.as_str()])
    }
}

/// Lowercases, splits on whitespace, and strips leading/trailing
/// non-alphanumeric characters from each token. Accented letters, digits,
/// and internal hyphens survive; tokens that strip to nothing are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .map(|raw| raw.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Document frequencies over a corpus of N documents.
///
/// The IDF weight is the smoothed `ln((N + 1) / (df + 1)) + 1`, strictly
/// positive for every token including unseen ones (`df = 0`). Positivity
/// matters: these weights carry the mass of the saliency-weighted histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfModel {
    doc_count: usize,
    doc_freq: BTreeMap<String, usize>,
}

impl IdfModel {
    /// Counts, for every token, the number of documents containing it at
    /// least once. Errors on an empty collection.
    pub fn fit<D, S>(documents: &[D]) -> Result<Self, CorpusError>
    where
        D: AsRef<[S]>,
        S: AsRef<str>,
    {
        if documents.is_empty() {
            return Err(CorpusError::EmptyDocumentCollection);
        }
        let mut doc_freq = BTreeMap::new();
        for document in documents {
            let mut seen = HashSet::new();
            for token in document.as_ref() {
                let token = token.as_ref();
                if seen.insert(token) {
                    *doc_freq.entry(token.to_string()).or_insert(0) += 1;
                }
            }
        }
        Ok(IdfModel {
            doc_count: documents.len(),
            doc_freq,
        })
    }

    /// Tokenizes every sentence of the datasets and fits document
    /// frequencies with one sentence per document.
    pub fn fit_from_datasets<'a>(
        datasets: impl IntoIterator<Item = &'a Dataset>,
    ) -> Result<Self, CorpusError> {
        let documents: Vec<Vec<String>> = datasets
            .into_iter()
            .flat_map(|ds| ds.sentences())
            .map(tokenize)
            .collect();
        IdfModel::fit(&documents)
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    /// Document frequency of a token; 0 when unseen.
    pub fn doc_freq(&self, token: &str) -> usize {
        self.doc_freq.get(token).copied().unwrap_or(0)
    }

    /// Smoothed inverse document frequency, strictly positive and
    /// monotonically decreasing in the document frequency.
    pub fn idf(&self, token: &str) -> f64 {
        let df = self.doc_freq(token);
        ((self.doc_count as f64 + 1.0) / (df as f64 + 1.0)).ln() + 1.0
    }

    pub fn vocabulary_len(&self) -> usize {
        self.doc_freq.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.doc_freq.iter().map(|(t, &df)| (t.as_str(), df))
    }
}

/// Parses an ASSIN XML corpus from a file. The dataset's `variant_tag` is
/// the file stem.
pub fn parse_assin_xml(path: impl AsRef<Path>) -> Result<Dataset, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let tag = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_assin_xml_str(&text, tag)
}

/// Parses an ASSIN XML corpus from a string.
pub fn parse_assin_xml_str(
    text: &str,
    variant_tag: impl Into<String>,
) -> Result<Dataset, CorpusError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| CorpusError::Xml {
        pos: e.pos().to_string(),
        detail: e.to_string(),
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "entailment-corpus" {
        return Err(CorpusError::WrongRoot {
            found: root.tag_name().name().to_string(),
        });
    }
    let mut pairs = Vec::new();
    for (index, node) in root
        .children()
        .filter(|n| n.is_element() && n.tag_name().name() == "pair")
        .enumerate()
    {
        let id = node
            .attribute("id")
            .ok_or(CorpusError::MissingId { index })?
            .to_string();
        let sentence = |element: &str| -> Result<String, CorpusError> {
            node.children()
                .find(|n| n.is_element() && n.tag_name().name() == element)
                .and_then(|n| n.text())
                .map(str::to_string)
                .filter(|t| !t.is_empty())
                .ok_or_else(|| CorpusError::MissingSentence {
                    id: id.clone(),
                    element: element.to_string(),
                })
        };
        let text_t = sentence("t")?;
        let text_h = sentence("h")?;
        let similarity = node
            .attribute("similarity")
            .map(|raw| {
                let value = raw.parse::<f64>().map_err(|_| CorpusError::BadSimilarity {
                    id: id.clone(),
                    value: raw.to_string(),
                })?;
                if !(1.0..=5.0).contains(&value) {
                    return Err(CorpusError::SimilarityOutOfRange {
                        id: id.clone(),
                        value,
                    });
                }
                Ok(value)
            })
            .transpose()?;
        let entailment = node
            .attribute("entailment")
            .map(|raw| {
                raw.parse::<EntailmentLabel>()
                    .map_err(|_| CorpusError::UnknownEntailment {
                        id: id.clone(),
                        value: raw.to_string(),
                    })
            })
            .transpose()?;
        pairs.push(SentencePair {
            id,
            text_t,
            text_h,
            similarity,
            entailment,
        });
    }
    Dataset::new(pairs, variant_tag)
}

/// Serializes a dataset back to ASSIN XML.
///
/// Gold similarity values are printed with the shortest decimal form that
/// parses back to the same `f64`, so serialize-then-parse is the identity.
/// Carriage returns in sentences are not representable (XML parsers
/// normalize them away) and are rejected upstream by corpus construction
/// from files, which never produces them.
pub fn write_assin_xml(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| CorpusError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    write_assin_xml_to(dataset, &mut writer)?;
    writer.flush()?;
    Ok(())
}

/// Serializes a dataset as ASSIN XML to any writer.
pub fn write_assin_xml_to<W: Write>(dataset: &Dataset, writer: &mut W) -> io::Result<()> {
    writeln!(writer, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>")?;
    writeln!(writer, "<entailment-corpus>")?;
    for pair in &dataset.pairs {
        write!(writer, "  <pair id=\"{}\"", escape_xml(&pair.id))?;
        if let Some(entailment) = pair.entailment {
            write!(writer, " entailment=\"{entailment}\"")?;
        }
        if let Some(similarity) = pair.similarity {
            write!(writer, " similarity=\"{similarity}\"")?;
        }
        writeln!(writer, ">")?;
        writeln!(writer, "    <t>{}</t>", escape_xml(&pair.text_t))?;
        writeln!(writer, "    <h>{}</h>", escape_xml(&pair.text_h))?;
        writeln!(writer, "  </pair>")?;
    }
    writeln!(writer, "</entailment-corpus>")?;
    Ok(())
}

fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}
