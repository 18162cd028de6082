//! Seeded synthetic benchmark: a small agreement grammar, error injection
//! into clean references, and simulated base systems with complementary
//! per-error-type recall.
//!
//! Each sentence carries the source, the clean reference, the gold edits
//! and one hypothesis per simulated system. Errors and spurious system
//! edits are placed at least two tokens apart so extraction never merges
//! them.

use std::collections::BTreeMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::edits::{apply_edits, extract_edits, Category, Edit, EditUnion, Operation, TokenSeq};
use crate::scoring::{ScoreError, Scorer, ScorerOutput};

const DETS_SG: &[&str] = &["the", "a", "this", "my"];
const DETS_PL: &[&str] = &["the", "my", "these", "some"];
const ADJS: &[&str] = &["big", "small", "old", "young", "happy", "quiet", "red", "clever"];
const NOUNS: &[(&str, &str)] = &[
    ("cat", "cats"),
    ("dog", "dogs"),
    ("teacher", "teachers"),
    ("student", "students"),
    ("child", "children"),
    ("farmer", "farmers"),
    ("doctor", "doctors"),
    ("bird", "birds"),
];
const VERBS: &[(&str, &str)] = &[
    ("eats", "eat"),
    ("sees", "see"),
    ("likes", "like"),
    ("finds", "find"),
    ("helps", "help"),
    ("visits", "visit"),
    ("watches", "watch"),
    ("follows", "follow"),
];
const ADVERBIALS: &[&[&str]] = &[
    &["in", "the", "park"],
    &["at", "home"],
    &["every", "day"],
    &["on", "the", "hill"],
    &["after", "school"],
];
const FILLERS: &[&str] = &["very", "the", "of", "it", "so"];

/// Kinds of injected errors, one per simulated system specialty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorKind {
    Agreement,
    MissingDeterminer,
    SpuriousWord,
    Punctuation,
    Case,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 5] = [
        ErrorKind::Agreement,
        ErrorKind::MissingDeterminer,
        ErrorKind::SpuriousWord,
        ErrorKind::Punctuation,
        ErrorKind::Case,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Best-effort kind of a gold edit on `source`.
    pub fn of(edit: &Edit, source: &TokenSeq) -> ErrorKind {
        let t = edit.edit_type(source);
        match (t.category, t.op) {
            (Category::Punct, _) => ErrorKind::Punctuation,
            (Category::Case, _) => ErrorKind::Case,
            (_, Operation::Insertion) => ErrorKind::MissingDeterminer,
            (_, Operation::Deletion) => ErrorKind::SpuriousWord,
            (_, Operation::Substitution) => ErrorKind::Agreement,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub sentences: usize,
    pub seed: u64,
    /// Expected injected errors per sentence.
    pub errors_per_sentence: f64,
    /// `recall[system][kind]`: chance that a system fixes an error of a kind.
    pub recall: Vec<[f64; 5]>,
    /// Expected spurious edits per sentence for each system.
    pub noise: Vec<f64>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let mut recall = Vec::new();
        for s in 0..5 {
            let mut r = [0.3; 5];
            r[s] = 0.85;
            r[(s + 1) % 5] = 0.6;
            recall.push(r);
        }
        Self { sentences: 400, seed: 0, errors_per_sentence: 1.6, recall, noise: vec![0.35, 0.45, 0.3, 0.5, 0.4] }
    }
}

impl SynthConfig {
    pub fn system_count(&self) -> usize {
        self.recall.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSentence {
    pub source: TokenSeq,
    pub reference: TokenSeq,
    pub gold: Vec<Edit>,
    /// One hypothesis per system, in roster order.
    pub hypotheses: Vec<TokenSeq>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthCorpus {
    pub systems: Vec<String>,
    pub sentences: Vec<SynthSentence>,
}

fn clause(rng: &mut ChaCha8Rng, out: &mut Vec<String>) {
    let plural = rng.random_bool(0.5);
    let (sg, pl) = *NOUNS.choose(rng).unwrap();
    let det = if plural { DETS_PL } else { DETS_SG };
    out.push(det.choose(rng).unwrap().to_string());
    if rng.random_bool(0.4) {
        out.push(ADJS.choose(rng).unwrap().to_string());
    }
    out.push(if plural { pl } else { sg }.to_string());
    let (v_sg, v_pl) = *VERBS.choose(rng).unwrap();
    out.push(if plural { v_pl } else { v_sg }.to_string());
    let obj_plural = rng.random_bool(0.5);
    let (o_sg, o_pl) = *NOUNS.choose(rng).unwrap();
    let det = if obj_plural { DETS_PL } else { DETS_SG };
    out.push(det.choose(rng).unwrap().to_string());
    if rng.random_bool(0.3) {
        out.push(ADJS.choose(rng).unwrap().to_string());
    }
    out.push(if obj_plural { o_pl } else { o_sg }.to_string());
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

fn lowercase_first(w: &str) -> String {
    let mut c = w.chars();
    c.next().map(|f| f.to_lowercase().chain(c).collect()).unwrap_or_default()
}

/// A clean sentence of the synthetic language.
pub fn clean_sentence(rng: &mut ChaCha8Rng) -> TokenSeq {
    let mut toks = Vec::new();
    clause(rng, &mut toks);
    match rng.random_range(0..4) {
        0 => {
            toks.push(",".into());
            toks.push("and".into());
            clause(rng, &mut toks);
        }
        1 => {
            toks.push("because".into());
            clause(rng, &mut toks);
        }
        _ => {}
    }
    if rng.random_bool(0.5) {
        toks.extend(ADVERBIALS.choose(rng).unwrap().iter().map(|s| s.to_string()));
    }
    toks.push(".".into());
    toks[0] = capitalize(&toks[0]);
    TokenSeq::from_tokens(toks).expect("grammar emits valid tokens")
}

/// `n` clean sentences, e.g. for language-model training.
pub fn clean_corpus(n: usize, seed: u64) -> Vec<TokenSeq> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| clean_sentence(&mut rng)).collect()
}

fn verb_flip(w: &str) -> Option<&'static str> {
    VERBS.iter().find_map(|&(s, p)| if w == s { Some(p) } else if w == p { Some(s) } else { None })
}

fn is_det(w: &str) -> bool {
    DETS_SG.contains(&w) || DETS_PL.contains(&w)
}

fn far_from(pos: usize, taken: &[usize]) -> bool {
    taken.iter().all(|&t| pos.abs_diff(t) >= 2)
}

/// Injects errors into `reference` and returns the erroneous source.
fn corrupt(rng: &mut ChaCha8Rng, reference: &[String], expected: f64) -> Vec<String> {
    let n = reference.len();
    let mut sites: Vec<(usize, ErrorKind)> = Vec::new();
    for i in 0..n {
        let w = reference[i].as_str();
        if verb_flip(w).is_some() {
            sites.push((i, ErrorKind::Agreement));
        }
        if i > 0 && is_det(w) {
            sites.push((i, ErrorKind::MissingDeterminer));
        }
        if i > 0 && i + 1 < n && w != "," {
            sites.push((i, ErrorKind::SpuriousWord));
        }
        if w == "." && i + 1 == n || w == "," {
            sites.push((i, ErrorKind::Punctuation));
        }
    }
    sites.push((0, ErrorKind::Case));
    sites.shuffle(rng);
    let mut k = 0;
    let p = (expected / 3.0).clamp(0.0, 1.0);
    for _ in 0..3 {
        k += usize::from(rng.random_bool(p));
    }
    let mut chosen: Vec<(usize, ErrorKind)> = Vec::new();
    for (pos, kind) in sites {
        if chosen.len() == k {
            break;
        }
        let taken: Vec<usize> = chosen.iter().map(|c| c.0).collect();
        if far_from(pos, &taken) {
            chosen.push((pos, kind));
        }
    }
    let mut out = Vec::with_capacity(n + 1);
    for (i, w) in reference.iter().enumerate() {
        match chosen.iter().find(|c| c.0 == i).map(|c| c.1) {
            Some(ErrorKind::Agreement) => out.push(verb_flip(w).unwrap().to_string()),
            Some(ErrorKind::MissingDeterminer) | Some(ErrorKind::Punctuation) => {}
            Some(ErrorKind::SpuriousWord) => {
                out.push(FILLERS.choose(rng).unwrap().to_string());
                out.push(w.clone());
            }
            Some(ErrorKind::Case) => out.push(lowercase_first(w)),
            None => out.push(w.clone()),
        }
    }
    out
}

/// Replacement for `w` of the same word class and number, if it has one.
fn same_class_swap(rng: &mut ChaCha8Rng, w: &str) -> Option<String> {
    let pick = |rng: &mut ChaCha8Rng, pool: &[&str]| {
        let others: Vec<&str> = pool.iter().copied().filter(|x| *x != w).collect();
        others.choose(rng).map(|x| x.to_string())
    };
    if ADJS.contains(&w) {
        return pick(rng, ADJS);
    }
    if DETS_SG.contains(&w) && !DETS_PL.contains(&w) {
        return pick(rng, DETS_SG);
    }
    if let Some(&(sg, _)) = NOUNS.iter().find(|(sg, pl)| *sg == w || *pl == w) {
        let pool: Vec<&str> = NOUNS.iter().map(|&(a, b)| if sg == w { a } else { b }).collect();
        return pick(rng, &pool);
    }
    None
}

/// A wrong edit on `source` away from `taken` positions. Half are
/// ungrammatical; half are fluent rewrites (a different noun, adjective or
/// determiner) that a language model cannot tell from a real fix.
fn spurious_edit(rng: &mut ChaCha8Rng, source: &TokenSeq, taken: &[usize]) -> Option<Edit> {
    let n = source.len();
    for _ in 0..20 {
        let i = rng.random_range(0..n);
        if !far_from(i, taken) {
            continue;
        }
        let w = source.tokens()[i].as_str();
        let rep: Vec<String> = match rng.random_range(0..8) {
            0 => match verb_flip(w) {
                Some(v) => vec![v.to_string()],
                None => continue,
            },
            1 => vec![],
            2 => {
                let e = Edit::new(i, i, TokenSeq::from_tokens([*FILLERS.choose(rng).unwrap()]).ok()?).ok()?;
                return Some(e);
            }
            3 => vec![capitalize(w)],
            _ => match same_class_swap(rng, w) {
                Some(r) => vec![r],
                None => continue,
            },
        };
        if i == n - 1 && rep.is_empty() {
            continue;
        }
        let rep = TokenSeq::from_tokens(rep).ok()?;
        if let Ok(e) = Edit::for_source(source, i, i + 1, rep) {
            return Some(e);
        }
    }
    None
}

impl SynthCorpus {
    pub fn generate(config: &SynthConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let systems: Vec<String> = (0..config.system_count()).map(|i| format!("sys{}", i + 1)).collect();
        let mut sentences = Vec::with_capacity(config.sentences);
        for _ in 0..config.sentences {
            let reference = clean_sentence(&mut rng);
            let source = TokenSeq::from_tokens(corrupt(&mut rng, reference.tokens(), config.errors_per_sentence))
                .expect("corruption keeps tokens valid");
            let gold = extract_edits(&source, &reference);
            let gold_positions: Vec<usize> = gold.iter().flat_map(|e| [e.start(), e.end()]).collect();
            let mut hypotheses = Vec::with_capacity(systems.len());
            for (s, recall) in config.recall.iter().enumerate() {
                let mut edits: Vec<Edit> = gold
                    .iter()
                    .filter(|e| rng.random_bool(recall[ErrorKind::of(e, &source).index()]))
                    .cloned()
                    .collect();
                let mut taken = gold_positions.clone();
                let expected = config.noise[s];
                let tries = expected.ceil() as usize + 1;
                let p = (expected / tries as f64).clamp(0.0, 1.0);
                for _ in 0..tries {
                    if rng.random_bool(p) {
                        if let Some(e) = spurious_edit(&mut rng, &source, &taken) {
                            taken.extend([e.start(), e.end()]);
                            edits.push(e);
                        }
                    }
                }
                hypotheses.push(apply_edits(&source, &edits).expect("edits are spaced apart"));
            }
            sentences.push(SynthSentence { source, reference, gold, hypotheses });
        }
        Self { systems, sentences }
    }

    /// Edit unions over the first `k` systems.
    pub fn unions_of_first(&self, k: usize) -> Vec<EditUnion> {
        self.sentences
            .iter()
            .map(|s| {
                let hyps: Vec<(&str, TokenSeq)> = self.systems[..k]
                    .iter()
                    .zip(&s.hypotheses)
                    .map(|(n, h)| (n.as_str(), h.clone()))
                    .collect();
                EditUnion::from_hypotheses(s.source.clone(), &hyps)
            })
            .collect()
    }

    pub fn unions(&self) -> Vec<EditUnion> {
        self.unions_of_first(self.systems.len())
    }

    /// Per-sentence edits of system `i`.
    pub fn system_edits(&self, i: usize) -> Vec<Vec<Edit>> {
        self.sentences.iter().map(|s| extract_edits(&s.source, &s.hypotheses[i])).collect()
    }

    /// Single-annotator gold in the shape the evaluator expects.
    pub fn gold_maps(&self) -> Vec<BTreeMap<u32, Vec<Edit>>> {
        self.sentences.iter().map(|s| BTreeMap::from([(0, s.gold.clone())])).collect()
    }

    pub fn sources(&self) -> Vec<TokenSeq> {
        self.sentences.iter().map(|s| s.source.clone()).collect()
    }
}

/// Random edit union with `edits` distinct, possibly conflicting edits over
/// a random source, proposed by random subsets of `systems` systems, each
/// carrying a random edit-classifier probability.
pub fn random_union(rng: &mut ChaCha8Rng, edits: usize, systems: usize) -> EditUnion {
    const VOCAB: &[&str] = &["a", "b", "c", "d", "e", "f", ","];
    let len = rng.random_range(6..12);
    let source = TokenSeq::from_tokens((0..len).map(|_| (*VOCAB.choose(rng).unwrap()).to_owned()).collect::<Vec<_>>())
        .expect("vocabulary tokens are valid");
    let mut chosen: Vec<Edit> = Vec::new();
    while chosen.len() < edits {
        let start = rng.random_range(0..=len);
        let end = (start + rng.random_range(0..3)).min(len);
        let rep: Vec<String> =
            (0..rng.random_range(0..3)).map(|_| (*VOCAB.choose(rng).unwrap()).to_owned()).collect();
        let rep = TokenSeq::from_tokens(rep).expect("vocabulary tokens are valid");
        if let Ok(e) = Edit::for_source(&source, start, end, rep) {
            if !chosen.contains(&e) {
                chosen.push(e);
            }
        }
    }
    let names: Vec<String> = (0..systems).map(|i| format!("sys{}", i + 1)).collect();
    let mut per_system: Vec<(String, Vec<Edit>)> = names.iter().map(|n| (n.clone(), Vec::new())).collect();
    for e in &chosen {
        let first = rng.random_range(0..systems);
        for (i, (_, list)) in per_system.iter_mut().enumerate() {
            if i == first || rng.random_bool(0.3) {
                list.push(e.clone());
            }
        }
    }
    let mut union = EditUnion::new(source, &per_system).expect("edits were validated");
    let probs: Vec<f64> = (0..union.len()).map(|_| rng.random_range(0.01..0.99)).collect();
    union.set_probabilities(&probs);
    union
}

/// Sentence-level scorer assigning each `(source, hypothesis)` pair a fixed
/// pseudo-random quality in `(0, 1)` keyed by `seed`.
#[derive(Clone, Copy, Debug)]
pub struct RandomScorer {
    pub seed: u64,
}

impl Scorer for RandomScorer {
    fn name(&self) -> &str {
        "random"
    }

    fn score(&self, source: &TokenSeq, hypothesis: &TokenSeq) -> Result<ScorerOutput, ScoreError> {
        let mut h = DefaultHasher::new();
        (self.seed, source.to_string(), hypothesis.to_string()).hash(&mut h);
        let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
        Ok(ScorerOutput::Sentence(rng.random_range(0.001..1.0)))
    }
}
