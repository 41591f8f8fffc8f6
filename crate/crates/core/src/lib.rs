//! Supervised in-context fine-tuning (SIFT) for generative sequence labeling.
//!
//! The crate covers the full loop at desk scale: CoNLL-style corpus ingestion
//! ([`corpus`]), prompt construction with in-context demonstrations
//! ([`prompt`]), segment-aware tokenization and the vanilla/SRC/MRC loss
//! masks ([`tokenizer`], [`lossmask`]), regex-constrained generation driven
//! by a finite-state index over the vocabulary ([`grammar`]), a small
//! trainable next-token model with hand-derived gradients ([`toylm`]), and
//! strict entity-level micro-F1 scoring ([`parse_eval`]).

pub mod corpus;
pub mod grammar;
pub mod lossmask;
pub mod parse_eval;
pub mod prompt;
pub mod rng;
pub mod synth;
pub mod tokenizer;
pub mod toylm;

pub use corpus::{Dataset, LabelScheme, Sentence, SpanAnnotation, TaskKind};
pub use grammar::{DecodeConfig, Dfa, ResponseRegex, TokenFsmIndex};
pub use lossmask::{LossMask, Strategy, TokenizedPrompt};
pub use parse_eval::{EvalReport, ParsedResponse, RunAggregate};
pub use prompt::{Demonstration, InstructionVariant, PromptMode, RenderedPrompt};
pub use tokenizer::TokenizerSpec;
pub use toylm::{ModelParams, TrainConfig};
