//! CoNLL-style IOB2 corpora and lossless tag/span conversion.
//!
//! Input files are UTF-8 TSV: one `token<TAB>tag` pair per line, blank line
//! between sentences. Verb-conditioned tasks carry a third column `V` on
//! exactly one token per sentence.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("line {line}: expected `token<TAB>tag` (verb column only under verb-conditioned schemes), got {columns} column(s)")]
    MalformedLine { line: usize, columns: usize },
    #[error("line {line}: tag `{tag}` is not O/B-/I- over a known class")]
    UnknownTag { line: usize, tag: String },
    #[error("line {line}: I-{class} continues nothing (IOB2 violation)")]
    IobViolation { line: usize, class: String },
    #[error("sentence ending at line {line}: verb-conditioned scheme but no `V` column")]
    MissingVerb { line: usize },
    #[error("line {line}: more than one `V` column in a sentence")]
    DuplicateVerb { line: usize },
    #[error("invalid label scheme: {0}")]
    InvalidScheme(String),
    #[error("spans overlap at token {0}")]
    OverlapError(usize),
    #[error("span [{start}, {end}) out of bounds for sentence of length {len}")]
    OutOfBounds { start: usize, end: usize, len: usize },
}

/// Whether responses are conditioned on a per-sentence verb (as in semantic
/// role labeling) or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Plain,
    VerbConditioned,
}

/// Ordered class list plus task kind; the alphabet of the response grammar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelScheme {
    classes: Vec<String>,
    task_kind: TaskKind,
}

impl LabelScheme {
    /// Build a scheme, validating that class names are non-empty, unique and
    /// free of `:` and `;` (both are separators in the response grammar).
    pub fn new<S: Into<String>>(
        classes: impl IntoIterator<Item = S>,
        task_kind: TaskKind,
    ) -> Result<Self, CorpusError> {
        let classes: Vec<String> = classes.into_iter().map(Into::into).collect();
        if classes.is_empty() {
            return Err(CorpusError::InvalidScheme("no classes".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &classes {
            if c.is_empty() {
                return Err(CorpusError::InvalidScheme("empty class name".into()));
            }
            if c.contains(':') || c.contains(';') {
                return Err(CorpusError::InvalidScheme(format!(
                    "class `{c}` contains a reserved separator"
                )));
            }
            if !seen.insert(c.clone()) {
                return Err(CorpusError::InvalidScheme(format!("duplicate class `{c}`")));
            }
        }
        Ok(Self { classes, task_kind })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn task_kind(&self) -> TaskKind {
        self.task_kind
    }

    pub fn contains(&self, class: &str) -> bool {
        self.classes.iter().any(|c| c == class)
    }
}

/// One annotated sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<String>,
    pub tags: Vec<String>,
    /// Token index of the conditioning verb; required iff the scheme is
    /// verb-conditioned.
    pub verb_index: Option<usize>,
}

impl Sentence {
    /// Space-joined surface text, the form used in prompts.
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn spans(&self) -> Result<Vec<SpanAnnotation>, CorpusError> {
        tags_to_spans(&self.tags)
    }
}

/// A maximal labeled token run: `start` inclusive, `end` exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanAnnotation {
    pub start: usize,
    pub end: usize,
    pub class_name: String,
}

/// A scheme plus its train/valid/test splits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub scheme: LabelScheme,
    pub train: Vec<Sentence>,
    pub valid: Vec<Sentence>,
    pub test: Vec<Sentence>,
}

/// Parse one split of CoNLL-style TSV. Sentence ids are `<split>-<ordinal>`
/// with 0-based ordinals.
pub fn parse_conll(
    text: &str,
    scheme: &LabelScheme,
    split: &str,
) -> Result<Vec<Sentence>, CorpusError> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut tags: Vec<String> = Vec::new();
    let mut verb_index: Option<usize> = None;

    let mut flush = |tokens: &mut Vec<String>,
                     tags: &mut Vec<String>,
                     verb_index: &mut Option<usize>,
                     line: usize,
                     sentences: &mut Vec<Sentence>|
     -> Result<(), CorpusError> {
        if tokens.is_empty() {
            return Ok(());
        }
        if scheme.task_kind() == TaskKind::VerbConditioned && verb_index.is_none() {
            return Err(CorpusError::MissingVerb { line });
        }
        sentences.push(Sentence {
            id: format!("{split}-{}", sentences.len()),
            tokens: std::mem::take(tokens),
            tags: std::mem::take(tags),
            verb_index: verb_index.take(),
        });
        Ok(())
    };

    let mut line_no = 0;
    for raw in text.lines() {
        line_no += 1;
        if raw.trim().is_empty() {
            flush(&mut tokens, &mut tags, &mut verb_index, line_no - 1, &mut sentences)?;
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        let (token, tag) = match cols.as_slice() {
            [token, tag] => (*token, *tag),
            [token, tag, "V"] if scheme.task_kind() == TaskKind::VerbConditioned => {
                if verb_index.is_some() {
                    return Err(CorpusError::DuplicateVerb { line: line_no });
                }
                verb_index = Some(tokens.len());
                (*token, *tag)
            }
            cols => {
                return Err(CorpusError::MalformedLine {
                    line: line_no,
                    columns: cols.len(),
                })
            }
        };
        if token.is_empty() {
            return Err(CorpusError::MalformedLine {
                line: line_no,
                columns: cols.len(),
            });
        }
        check_tag(tag, tags.last().map(String::as_str), scheme, line_no)?;
        tokens.push(token.to_string());
        tags.push(tag.to_string());
    }
    flush(&mut tokens, &mut tags, &mut verb_index, line_no, &mut sentences)?;
    Ok(sentences)
}

fn check_tag(
    tag: &str,
    prev: Option<&str>,
    scheme: &LabelScheme,
    line: usize,
) -> Result<(), CorpusError> {
    if tag == "O" {
        return Ok(());
    }
    let (kind, class) = tag
        .split_once('-')
        .ok_or_else(|| CorpusError::UnknownTag { line, tag: tag.to_string() })?;
    if kind != "B" && kind != "I" {
        return Err(CorpusError::UnknownTag { line, tag: tag.to_string() });
    }
    if !scheme.contains(class) {
        return Err(CorpusError::UnknownTag { line, tag: tag.to_string() });
    }
    if kind == "I" {
        let continues = match prev {
            Some(p) => p == format!("B-{class}") || p == format!("I-{class}"),
            None => false,
        };
        if !continues {
            return Err(CorpusError::IobViolation { line, class: class.to_string() });
        }
    }
    Ok(())
}

/// Re-serialize sentences to the TSV format accepted by [`parse_conll`].
pub fn to_conll_string(sentences: &[Sentence], scheme: &LabelScheme) -> String {
    let mut out = String::new();
    for (i, s) in sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (j, (token, tag)) in s.tokens.iter().zip(&s.tags).enumerate() {
            out.push_str(token);
            out.push('\t');
            out.push_str(tag);
            if scheme.task_kind() == TaskKind::VerbConditioned && s.verb_index == Some(j) {
                out.push_str("\tV");
            }
            out.push('\n');
        }
    }
    out
}

/// Decode an IOB2 tag sequence into sorted, non-overlapping spans.
pub fn tags_to_spans(tags: &[String]) -> Result<Vec<SpanAnnotation>, CorpusError> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, String)> = None;
    for (i, tag) in tags.iter().enumerate() {
        if tag == "O" {
            if let Some((start, class)) = open.take() {
                spans.push(SpanAnnotation { start, end: i, class_name: class });
            }
            continue;
        }
        let (kind, class) = tag
            .split_once('-')
            .ok_or_else(|| CorpusError::UnknownTag { line: i, tag: tag.clone() })?;
        match kind {
            "B" => {
                if let Some((start, c)) = open.take() {
                    spans.push(SpanAnnotation { start, end: i, class_name: c });
                }
                open = Some((i, class.to_string()));
            }
            "I" => match &open {
                Some((_, c)) if c == class => {}
                _ => {
                    return Err(CorpusError::IobViolation { line: i, class: class.to_string() })
                }
            },
            _ => return Err(CorpusError::UnknownTag { line: i, tag: tag.clone() }),
        }
    }
    if let Some((start, class)) = open {
        spans.push(SpanAnnotation { start, end: tags.len(), class_name: class });
    }
    Ok(spans)
}

/// Encode spans back into an IOB2 tag sequence; exact inverse of
/// [`tags_to_spans`] on well-formed input.
pub fn spans_to_tags(
    spans: &[SpanAnnotation],
    sentence_len: usize,
) -> Result<Vec<String>, CorpusError> {
    let mut tags = vec!["O".to_string(); sentence_len];
    let mut last_end = 0;
    for span in spans {
        if span.start >= span.end || span.end > sentence_len {
            return Err(CorpusError::OutOfBounds {
                start: span.start,
                end: span.end,
                len: sentence_len,
            });
        }
        if span.start < last_end {
            return Err(CorpusError::OverlapError(span.start));
        }
        tags[span.start] = format!("B-{}", span.class_name);
        for t in tags.iter_mut().take(span.end).skip(span.start + 1) {
            *t = format!("I-{}", span.class_name);
        }
        last_end = span.end;
    }
    Ok(tags)
}
