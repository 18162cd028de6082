use std::fmt;

use super::EditError;

/// A whitespace-tokenized sentence.
///
/// Tokens are never empty and never contain whitespace, so joining with a
/// single space and re-tokenizing always reproduces the sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenSeq(Vec<String>);

/// Splits `text` on runs of whitespace.
pub fn tokenize(text: &str) -> TokenSeq {
    TokenSeq(text.split_whitespace().map(str::to_owned).collect())
}

impl TokenSeq {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a sequence from already-split tokens, rejecting empty tokens
    /// and tokens with embedded whitespace.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self, EditError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        for t in &tokens {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(EditError::InvalidToken(t.clone()));
            }
        }
        Ok(Self(tokens))
    }

    pub(crate) fn from_vec_unchecked(tokens: Vec<String>) -> Self {
        Self(tokens)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<&str> {
        self.0.get(i).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.iter().map(String::as_str)
    }

    pub fn into_vec(self) -> Vec<String> {
        self.0
    }

    /// Sub-sequence `[start, end)`.
    pub fn span(&self, start: usize, end: usize) -> &[String] {
        &self.0[start..end]
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(t)?;
        }
        Ok(())
    }
}

impl From<&str> for TokenSeq {
    fn from(text: &str) -> Self {
        tokenize(text)
    }
}

impl AsRef<[String]> for TokenSeq {
    fn as_ref(&self) -> &[String] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whitespace_split() {
        assert_eq!(tokenize("To sum it up").tokens(), ["To", "sum", "it", "up"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \t ").is_empty());
        assert_eq!(tokenize("a  b").tokens(), ["a", "b"]);
    }

    #[test]
    fn rejects_bad_tokens() {
        assert!(TokenSeq::from_tokens(["a", ""]).is_err());
        assert!(TokenSeq::from_tokens(["a b"]).is_err());
        assert!(TokenSeq::from_tokens(["a", "b"]).is_ok());
    }

    #[test]
    fn display_round_trip() {
        let s = tokenize(" x  y z ");
        assert_eq!(s.to_string(), "x y z");
        assert_eq!(tokenize(&s.to_string()), s);
    }
}
