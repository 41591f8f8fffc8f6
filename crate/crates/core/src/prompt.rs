//! Prompt rendering with exact segment bookkeeping.
//!
//! A prompt is an optional instruction block, `n` demonstrations, and a
//! final query, each built from `### Instruction:` / `### Options:` /
//! `### Sentence:` / `### Verb:` / `### Response:` markers separated by one
//! blank line. Byte offsets of every variable part are recorded so the loss
//! masks can be derived downstream without re-parsing the text.

use crate::corpus::{LabelScheme, Sentence, SpanAnnotation, TaskKind};
use crate::rng::Pcg;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The instruction used by the bundled CoNLL03-style NER configuration.
pub const CONLL03_INSTRUCTION: &str = "extract named entities and their type from the input sentence, all entity types are in options\nif there are no named entities in the sentence the output should just be 'NA'\nif there are multiple extractions from the sentence, the extraction format should be entity_1_span:entity_1_class;entity_2_span:entity_2_class;...";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("span text `{0}` contains a reserved separator and cannot be serialized")]
    GrammarViolation(String),
    #[error("requested {requested} demonstrations but only {available} candidates in the pool")]
    InsufficientPool { requested: usize, available: usize },
    #[error("training prompts require gold query spans")]
    MissingGold,
    #[error("sentence `{0}` lacks a verb index under a verb-conditioned scheme")]
    VerbRequired(String),
    #[error("instruction text is empty")]
    EmptyInstruction,
    #[error("span [{start}, {end}) invalid for sentence `{id}`")]
    InvalidSpan { id: String, start: usize, end: usize },
}

/// Half-open byte range into a prompt's text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ByteSpan {
    pub start: usize,
    pub end: usize,
}

impl ByteSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

/// Which instruction (if any) heads the prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstructionVariant {
    /// The task instruction verbatim.
    Vanilla,
    /// Whitespace tokens of the instruction shuffled under a fixed seed.
    Permuted { permutation_seed: u64 },
    /// A task-unrelated snippet in place of the instruction.
    Nonsense { text: String },
    /// No instruction block at all.
    None,
}

impl InstructionVariant {
    pub fn name(&self) -> &'static str {
        match self {
            InstructionVariant::Vanilla => "vanilla",
            InstructionVariant::Permuted { .. } => "permuted",
            InstructionVariant::Nonsense { .. } => "nonsense",
            InstructionVariant::None => "none",
        }
    }
}

/// Resolve the instruction text for a variant. `Ok(None)` means the prompt
/// carries no instruction block.
pub fn make_instruction(
    base_instruction: &str,
    variant: &InstructionVariant,
) -> Result<Option<String>, PromptError> {
    match variant {
        InstructionVariant::Vanilla => {
            if base_instruction.trim().is_empty() {
                return Err(PromptError::EmptyInstruction);
            }
            Ok(Some(base_instruction.to_string()))
        }
        InstructionVariant::Permuted { permutation_seed } => {
            if base_instruction.trim().is_empty() {
                return Err(PromptError::EmptyInstruction);
            }
            let mut words: Vec<&str> = base_instruction.split_whitespace().collect();
            Pcg::new(*permutation_seed).shuffle(&mut words);
            Ok(Some(words.join(" ")))
        }
        InstructionVariant::Nonsense { text } => Ok(Some(text.clone())),
        InstructionVariant::None => Ok(None),
    }
}

/// A labeled in-context example: the sentence plus its serialized gold
/// response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demonstration {
    pub sentence: Sentence,
    pub response_text: String,
}

/// Byte ranges of one demonstration's variable parts. For verb-conditioned
/// schemes `example` runs from the sentence text through the verb text
/// (covering the `### Verb:` block in between).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoSegments<S> {
    pub example: S,
    pub response: S,
}

/// Segment offsets for a rendered prompt. The `instruction` range covers the
/// whole instruction block (markers, instruction text, and options list);
/// `example` and `response` ranges cover content only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segments<S> {
    pub instruction: Option<S>,
    pub demonstrations: Vec<DemoSegments<S>>,
    pub query_example: S,
    pub query_response: Option<S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    Train,
    Eval,
}

impl PromptMode {
    pub fn name(&self) -> &'static str {
        match self {
            PromptMode::Train => "train",
            PromptMode::Eval => "eval",
        }
    }
}

/// A prompt's text plus the byte offsets of its variable parts.
///
/// `has_eos` marks prompts that receive the tokenizer's EOS when tokenized
/// (training prompts only); the text itself never contains an EOS literal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub segments: Segments<ByteSpan>,
    pub has_eos: bool,
}

/// Serialize gold extractions: `NA` when there are none, otherwise
/// `span text:class` pairs joined by `;`, in span order.
pub fn render_response(
    sentence: &Sentence,
    spans: &[SpanAnnotation],
) -> Result<String, PromptError> {
    if spans.is_empty() {
        return Ok("NA".to_string());
    }
    let mut pieces = Vec::with_capacity(spans.len());
    for span in spans {
        let tokens = sentence.tokens.get(span.start..span.end).ok_or_else(|| {
            PromptError::InvalidSpan {
                id: sentence.id.clone(),
                start: span.start,
                end: span.end,
            }
        })?;
        if tokens.is_empty() {
            return Err(PromptError::InvalidSpan {
                id: sentence.id.clone(),
                start: span.start,
                end: span.end,
            });
        }
        let text = tokens.join(" ");
        if text.contains(':') || text.contains(';') {
            return Err(PromptError::GrammarViolation(text));
        }
        pieces.push(format!("{text}:{}", span.class_name));
    }
    Ok(pieces.join(";"))
}

/// Draw `n_shots` distinct demonstrations for a query, deterministically in
/// `(seed, query_id)`. The query itself is excluded from the pool.
pub fn sample_demonstrations(
    train_split: &[Sentence],
    query_id: &str,
    n_shots: usize,
    seed: u64,
) -> Result<Vec<Demonstration>, PromptError> {
    let pool: Vec<&Sentence> = train_split.iter().filter(|s| s.id != query_id).collect();
    if pool.len() < n_shots {
        return Err(PromptError::InsufficientPool {
            requested: n_shots,
            available: pool.len(),
        });
    }
    let mut rng = Pcg::with_key(seed, query_id);
    let picks = rng.sample_indices(pool.len(), n_shots);
    picks
        .into_iter()
        .map(|i| {
            let sentence = pool[i].clone();
            let spans = sentence
                .spans()
                .map_err(|_| PromptError::InvalidSpan { id: sentence.id.clone(), start: 0, end: 0 })?;
            let response_text = render_response(&sentence, &spans)?;
            Ok(Demonstration { sentence, response_text })
        })
        .collect()
}

struct TemplateWriter {
    text: String,
}

impl TemplateWriter {
    fn new() -> Self {
        Self { text: String::new() }
    }

    fn marker(&mut self, m: &str) {
        self.text.push_str(m);
        self.text.push_str("\n\n");
    }

    /// Append content followed by a blank-line separator; returns the
    /// content's byte range.
    fn content(&mut self, c: &str) -> ByteSpan {
        let span = self.content_unterminated(c);
        self.text.push_str("\n\n");
        span
    }

    /// Append content with no trailing separator (end of prompt).
    fn content_unterminated(&mut self, c: &str) -> ByteSpan {
        let start = self.text.len();
        self.text.push_str(c);
        ByteSpan { start, end: self.text.len() }
    }

    fn here(&self) -> usize {
        self.text.len()
    }
}

fn verb_text(sentence: &Sentence) -> Result<&str, PromptError> {
    let idx = sentence
        .verb_index
        .ok_or_else(|| PromptError::VerbRequired(sentence.id.clone()))?;
    sentence
        .tokens
        .get(idx)
        .map(String::as_str)
        .ok_or_else(|| PromptError::VerbRequired(sentence.id.clone()))
}

/// Write one `### Sentence:` block (plus `### Verb:` when conditioned) and
/// the `### Response:` marker; returns the example byte range.
fn write_example_block(
    w: &mut TemplateWriter,
    scheme: &LabelScheme,
    sentence: &Sentence,
) -> Result<ByteSpan, PromptError> {
    w.marker("### Sentence:");
    let sent_span = w.content(&sentence.text());
    let example = if scheme.task_kind() == TaskKind::VerbConditioned {
        let verb = verb_text(sentence)?.to_string();
        w.marker("### Verb:");
        let verb_span = w.content(&verb);
        ByteSpan { start: sent_span.start, end: verb_span.end }
    } else {
        sent_span
    };
    w.marker("### Response:");
    Ok(example)
}

/// Render a full prompt. `instruction` is the resolved text from
/// [`make_instruction`]; `gold_query_spans` is required in train mode and
/// ignored in eval mode.
pub fn build_prompt(
    scheme: &LabelScheme,
    instruction: Option<&str>,
    demonstrations: &[Demonstration],
    query: &Sentence,
    mode: PromptMode,
    gold_query_spans: Option<&[SpanAnnotation]>,
) -> Result<RenderedPrompt, PromptError> {
    let mut w = TemplateWriter::new();

    let instruction_span = match instruction {
        Some(instr) => {
            let start = w.here();
            w.marker("### Instruction:");
            w.content(instr);
            w.marker("### Options:");
            let opts = w.content(&scheme.classes().join(", "));
            Some(ByteSpan { start, end: opts.end })
        }
        None => None,
    };

    let mut demo_segments = Vec::with_capacity(demonstrations.len());
    for demo in demonstrations {
        let example = write_example_block(&mut w, scheme, &demo.sentence)?;
        let response = w.content(&demo.response_text);
        demo_segments.push(DemoSegments { example, response });
    }

    let query_example = write_example_block(&mut w, scheme, query)?;
    let query_response = match mode {
        PromptMode::Train => {
            let spans = gold_query_spans.ok_or(PromptError::MissingGold)?;
            let response = render_response(query, spans)?;
            Some(w.content_unterminated(&response))
        }
        PromptMode::Eval => None,
    };

    Ok(RenderedPrompt {
        text: w.text,
        segments: Segments {
            instruction: instruction_span,
            demonstrations: demo_segments,
            query_example,
            query_response,
        },
        has_eos: mode == PromptMode::Train,
    })
}

/// One line of the prompts JSONL artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptRecord {
    pub id: String,
    pub text: String,
    pub segments: Segments<ByteSpan>,
    pub n_shots: usize,
    pub variant: String,
    pub mode: String,
}

impl PromptRecord {
    pub fn new(
        id: &str,
        prompt: &RenderedPrompt,
        n_shots: usize,
        variant: &InstructionVariant,
        mode: PromptMode,
    ) -> Self {
        Self {
            id: id.to_string(),
            text: prompt.text.clone(),
            segments: prompt.segments.clone(),
            n_shots,
            variant: variant.name().to_string(),
            mode: mode.name().to_string(),
        }
    }
}
