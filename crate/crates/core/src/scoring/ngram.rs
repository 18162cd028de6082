//! Interpolated add-k n-gram language model.
//!
//! `P(w | h)` is the uniform mixture over orders `1..=order` of add-k
//! estimates `(c(h_n, w) + k) / (c(h_n) + k * |V|)`, where `h_n` is the last
//! `n - 1` context tokens. Sentences are padded with `order - 1` `<s>` markers
//! and closed with `</s>`; unseen words map to `<unk>`.
//!
//! # Artifact format (text, version 1)
//!
//! ```text
//! #ngram-lm v1
//! order <n>
//! k <add-k constant>
//! vocab <V>
//! <token id 0>
//! ...
//! <token id V-1>
//! ngrams <order> <entries>
//! <count> <id> ... <id>
//! ...
//! ```
//!
//! One `ngrams` section per order from 1 upwards, entries sorted by id
//! sequence. Ids 0, 1, 2 are always `<s>`, `</s>`, `<unk>`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use super::{ScoreError, Scorer, ScorerOutput};
use crate::edits::{LabelVector, TokenSeq};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";
const BOS_ID: u32 = 0;
const EOS_ID: u32 = 1;
const UNK_ID: u32 = 2;
const MAGIC: &str = "#ngram-lm v1";

/// Anything that assigns per-token log-probabilities to a sentence.
pub trait LanguageModel: Send + Sync {
    /// Natural-log probabilities of each token and of the end-of-sentence
    /// marker, `len + 1` values in total.
    fn sentence_log_probs(&self, tokens: &TokenSeq) -> Vec<f64>;

    /// `exp(-mean log-prob)` over the values of [`Self::sentence_log_probs`].
    fn perplexity(&self, tokens: &TokenSeq) -> f64 {
        let lp = self.sentence_log_probs(tokens);
        let mean = lp.iter().sum::<f64>() / lp.len() as f64;
        (-mean).exp()
    }
}

#[derive(Debug, Error)]
pub enum LmError {
    #[error("language model format error at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("order must be at least 1")]
    BadOrder,
    #[error("add-k constant must be positive")]
    BadK,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NgramLm {
    order: usize,
    k: f64,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    /// `counts[n - 1]` maps n-grams to their counts.
    counts: Vec<HashMap<Vec<u32>, u64>>,
    /// `contexts[n - 1]` maps (n-1)-gram contexts to summed n-gram counts.
    contexts: Vec<HashMap<Vec<u32>, u64>>,
}

impl NgramLm {
    pub fn train<'a, I>(sentences: I, order: usize, k: f64) -> Result<Self, LmError>
    where
        I: IntoIterator<Item = &'a TokenSeq>,
    {
        if order == 0 {
            return Err(LmError::BadOrder);
        }
        if !(k > 0.0) {
            return Err(LmError::BadK);
        }
        let mut lm = Self::empty(order, k);
        let sentences: Vec<&TokenSeq> = sentences.into_iter().collect();
        for s in &sentences {
            for t in s.iter() {
                lm.intern(t);
            }
        }
        for s in sentences {
            let ids = lm.padded_ids(s);
            for end in (order - 1)..ids.len() {
                for n in 1..=order {
                    let gram = ids[end + 1 - n..=end].to_vec();
                    *lm.counts[n - 1].entry(gram).or_insert(0) += 1;
                }
            }
        }
        lm.rebuild_contexts();
        Ok(lm)
    }

    fn empty(order: usize, k: f64) -> Self {
        let mut lm = Self {
            order,
            k,
            vocab: Vec::new(),
            index: HashMap::new(),
            counts: vec![HashMap::new(); order],
            contexts: vec![HashMap::new(); order],
        };
        for special in [BOS, EOS, UNK] {
            lm.intern(special);
        }
        lm
    }

    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.vocab.len() as u32;
        self.vocab.push(token.to_owned());
        self.index.insert(token.to_owned(), id);
        id
    }

    fn rebuild_contexts(&mut self) {
        for n in 1..=self.order {
            let mut ctx: HashMap<Vec<u32>, u64> = HashMap::new();
            for (gram, &c) in &self.counts[n - 1] {
                *ctx.entry(gram[..n - 1].to_vec()).or_insert(0) += c;
            }
            self.contexts[n - 1] = ctx;
        }
    }

    fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    fn padded_ids(&self, tokens: &TokenSeq) -> Vec<u32> {
        let mut ids = vec![BOS_ID; self.order - 1];
        ids.extend(tokens.iter().map(|t| self.id(t)));
        ids.push(EOS_ID);
        ids
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Predictable vocabulary size: every type except `<s>`.
    pub fn vocab_size(&self) -> usize {
        self.vocab.len() - 1
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Unigram count of `token` in the training data (0 if unseen).
    pub fn count(&self, token: &str) -> u64 {
        self.index
            .get(token)
            .and_then(|&id| self.counts[0].get(&vec![id]))
            .copied()
            .unwrap_or(0)
    }

    /// `P(word | history)` interpolated over orders `1..=max_order`.
    /// `history` holds the preceding ids, most recent last.
    fn prob_ids(&self, history: &[u32], word: u32, max_order: usize) -> f64 {
        let v = self.vocab_size() as f64;
        let max_order = max_order.min(self.order).min(history.len() + 1);
        let mut total = 0.0;
        let mut gram: Vec<u32> = Vec::with_capacity(max_order);
        for n in 1..=max_order {
            let ctx = &history[history.len() + 1 - n..];
            gram.clear();
            gram.extend_from_slice(ctx);
            gram.push(word);
            let c = self.counts[n - 1].get(&gram).copied().unwrap_or(0) as f64;
            let cc = self.contexts[n - 1].get(ctx).copied().unwrap_or(0) as f64;
            total += (c + self.k) / (cc + self.k * v);
        }
        total / max_order as f64
    }

    /// Probability of each token given its full-order history, followed by
    /// the end-of-sentence probability.
    pub fn token_probs(&self, tokens: &TokenSeq) -> Vec<f64> {
        let ids = self.padded_ids(tokens);
        ((self.order - 1)..ids.len())
            .map(|t| self.prob_ids(&ids[..t], ids[t], self.order))
            .collect()
    }

    /// Bigram-level continuation probabilities across each of the `m + 1`
    /// gaps: `P(next | previous)` with `<s>` and `</s>` at the edges.
    pub fn gap_probs(&self, tokens: &TokenSeq) -> Vec<f64> {
        let mut ids = vec![BOS_ID];
        ids.extend(tokens.iter().map(|t| self.id(t)));
        ids.push(EOS_ID);
        (1..ids.len()).map(|t| self.prob_ids(&ids[t - 1..t], ids[t], 2)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "order {}", self.order);
        let _ = writeln!(out, "k {}", self.k);
        let _ = writeln!(out, "vocab {}", self.vocab.len());
        for t in &self.vocab {
            let _ = writeln!(out, "{t}");
        }
        for n in 1..=self.order {
            let mut entries: Vec<(&Vec<u32>, &u64)> = self.counts[n - 1].iter().collect();
            entries.sort();
            let _ = writeln!(out, "ngrams {n} {}", entries.len());
            for (gram, c) in entries {
                let _ = write!(out, "{c}");
                for id in gram {
                    let _ = write!(out, " {id}");
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, LmError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| LmError::Format {
                line: 0,
                message: format!("unexpected end of file, expected {what}"),
            })
        };
        let ferr = |line: usize, message: String| LmError::Format { line, message };

        let (ln, magic) = next("header")?;
        if magic != MAGIC {
            return Err(ferr(ln, format!("expected {MAGIC:?}, found {magic:?}")));
        }
        let header = |(ln, l): (usize, &str), key: &str| -> Result<String, LmError> {
            l.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_owned)
                .ok_or_else(|| ferr(ln, format!("expected '{key} <value>'")))
        };
        let l = next("order")?;
        let order: usize = header(l, "order")?.parse().map_err(|_| ferr(l.0, "bad order".into()))?;
        let l = next("k")?;
        let k: f64 = header(l, "k")?.parse().map_err(|_| ferr(l.0, "bad k".into()))?;
        if order == 0 {
            return Err(LmError::BadOrder);
        }
        if !(k > 0.0) {
            return Err(LmError::BadK);
        }
        let l = next("vocab")?;
        let vsize: usize = header(l, "vocab")?.parse().map_err(|_| ferr(l.0, "bad vocab size".into()))?;
        let mut lm = Self::empty(order, k);
        lm.vocab.clear();
        lm.index.clear();
        for _ in 0..vsize {
            let (ln, tok) = next("vocabulary entry")?;
            if tok.is_empty() || tok.chars().any(char::is_whitespace) || lm.index.contains_key(tok) {
                return Err(ferr(ln, format!("bad vocabulary entry {tok:?}")));
            }
            lm.intern(tok);
        }
        if lm.vocab.get(..3) != Some(&[BOS.to_owned(), EOS.to_owned(), UNK.to_owned()][..]) {
            return Err(ferr(0, "vocabulary must start with <s> </s> <unk>".into()));
        }
        for n in 1..=order {
            let (ln, l) = next("ngrams section")?;
            let rest = header((ln, l), "ngrams")?;
            let mut parts = rest.split(' ');
            let got_n: usize = parts.next().and_then(|p| p.parse().ok()).ok_or_else(|| ferr(ln, "bad order".into()))?;
            let entries: usize = parts.next().and_then(|p| p.parse().ok()).ok_or_else(|| ferr(ln, "bad entry count".into()))?;
            if got_n != n {
                return Err(ferr(ln, format!("expected order {n} section, found {got_n}")));
            }
            for _ in 0..entries {
                let (ln, l) = next("n-gram entry")?;
                let mut fields = l.split(' ');
                let c: u64 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(|| ferr(ln, "bad count".into()))?;
                let gram: Vec<u32> = fields
                    .map(|f| f.parse::<u32>().ok().filter(|&id| (id as usize) < vsize))
                    .collect::<Option<_>>()
                    .ok_or_else(|| ferr(ln, "bad token id".into()))?;
                if gram.len() != n {
                    return Err(ferr(ln, format!("expected {n} ids, found {}", gram.len())));
                }
                lm.counts[n - 1].insert(gram, c);
            }
        }
        lm.rebuild_contexts();
        Ok(lm)
    }
}

impl LanguageModel for NgramLm {
    fn sentence_log_probs(&self, tokens: &TokenSeq) -> Vec<f64> {
        self.token_probs(tokens).into_iter().map(f64::ln).collect()
    }
}

/// Token-level scorer backed by an n-gram model: word `i` gets
/// `P(h_i | history)`, gap `j` the bigram continuation probability across it.
#[derive(Clone, Debug)]
pub struct NgramScorer {
    lm: Arc<NgramLm>,
}

impl NgramScorer {
    pub fn new(lm: Arc<NgramLm>) -> Self {
        Self { lm }
    }

    pub fn lm(&self) -> &NgramLm {
        &self.lm
    }
}

impl Scorer for NgramScorer {
    fn name(&self) -> &str {
        "ngram"
    }

    fn score(&self, _source: &TokenSeq, hypothesis: &TokenSeq) -> Result<ScorerOutput, ScoreError> {
        let mut word = self.lm.token_probs(hypothesis);
        word.pop();
        let gap = self.lm.gap_probs(hypothesis);
        let labels = LabelVector::new(word, gap).map_err(|e| ScoreError::Protocol(e.to_string()))?;
        Ok(ScorerOutput::Labels(labels))
    }
}
