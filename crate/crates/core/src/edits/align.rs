//! Token-level edit extraction.
//!
//! Sequences are aligned with Levenshtein distance (match 0, substitution,
//! insertion and deletion 1). Among minimum-distance alignments the one with
//! the most matched tokens wins; remaining ties are broken locally during the
//! traceback in the order match, substitution, deletion, insertion. Maximal
//! runs of adjacent non-match operations are then merged into single edits.

use super::{Edit, TokenSeq};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum AlignOp {
    Match,
    Substitute,
    Delete,
    Insert,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Cost {
    distance: u32,
    // Negated match count, so that the derived ordering prefers more matches.
    neg_matches: i32,
}

impl Cost {
    fn step(self, op: AlignOp) -> Self {
        match op {
            AlignOp::Match => Cost { distance: self.distance, neg_matches: self.neg_matches - 1 },
            _ => Cost { distance: self.distance + 1, neg_matches: self.neg_matches },
        }
    }
}

/// Returns the operation sequence (source to hypothesis order).
pub(crate) fn align(source: &[String], hyp: &[String]) -> Vec<AlignOp> {
    let (n, m) = (source.len(), hyp.len());
    let w = m + 1;
    let mut table = vec![Cost { distance: 0, neg_matches: 0 }; (n + 1) * w];
    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best: Option<Cost> = None;
            let mut consider = |c: Cost| {
                best = Some(match best {
                    Some(b) if b <= c => b,
                    _ => c,
                });
            };
            if i > 0 && j > 0 {
                let diag = table[(i - 1) * w + j - 1];
                if source[i - 1] == hyp[j - 1] {
                    consider(diag.step(AlignOp::Match));
                } else {
                    consider(diag.step(AlignOp::Substitute));
                }
            }
            if i > 0 {
                consider(table[(i - 1) * w + j].step(AlignOp::Delete));
            }
            if j > 0 {
                consider(table[i * w + j - 1].step(AlignOp::Insert));
            }
            table[i * w + j] = best.expect("cell has a predecessor");
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = table[i * w + j];
        let op = if i > 0 && j > 0 && source[i - 1] == hyp[j - 1]
            && table[(i - 1) * w + j - 1].step(AlignOp::Match) == here
        {
            AlignOp::Match
        } else if i > 0 && j > 0 && source[i - 1] != hyp[j - 1]
            && table[(i - 1) * w + j - 1].step(AlignOp::Substitute) == here
        {
            AlignOp::Substitute
        } else if i > 0 && table[(i - 1) * w + j].step(AlignOp::Delete) == here {
            AlignOp::Delete
        } else {
            debug_assert!(j > 0 && table[i * w + j - 1].step(AlignOp::Insert) == here);
            AlignOp::Insert
        };
        match op {
            AlignOp::Match | AlignOp::Substitute => {
                i -= 1;
                j -= 1;
            }
            AlignOp::Delete => i -= 1,
            AlignOp::Insert => j -= 1,
        }
        ops.push(op);
    }
    ops.reverse();
    ops
}

/// Extracts the edits that turn `source` into `hypothesis`.
///
/// The result is sorted, pairwise non-conflicting and satisfies
/// `apply_edits(source, extract_edits(source, hypothesis)) == hypothesis`.
pub fn extract_edits(source: &TokenSeq, hypothesis: &TokenSeq) -> Vec<Edit> {
    let (src, hyp) = (source.tokens(), hypothesis.tokens());
    let ops = align(src, hyp);
    let mut edits = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    let mut run: Option<(usize, Vec<String>)> = None;
    for op in ops {
        if op == AlignOp::Match {
            if let Some((start, repl)) = run.take() {
                edits.push(Edit::new_unchecked(start, i, TokenSeq::from_vec_unchecked(repl)));
            }
            i += 1;
            j += 1;
            continue;
        }
        let (_, repl) = run.get_or_insert_with(|| (i, Vec::new()));
        match op {
            AlignOp::Substitute => {
                repl.push(hyp[j].clone());
                i += 1;
                j += 1;
            }
            AlignOp::Delete => i += 1,
            AlignOp::Insert => {
                repl.push(hyp[j].clone());
                j += 1;
            }
            AlignOp::Match => unreachable!(),
        }
    }
    if let Some((start, repl)) = run.take() {
        edits.push(Edit::new_unchecked(start, i, TokenSeq::from_vec_unchecked(repl)));
    }
    edits
}
