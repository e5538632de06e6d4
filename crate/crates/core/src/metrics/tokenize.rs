use std::ops::Deref;

/// Normalized word tokens. Never contains empty strings or whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    /// Builds a sequence from already-normalized tokens, dropping any that
    /// would violate the no-whitespace/no-empty invariant.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(
            tokens
                .into_iter()
                .map(Into::into)
                .filter(|t: &String| !t.is_empty() && !t.chars().any(char::is_whitespace))
                .collect(),
        )
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

/// Lowercases with Turkish casing: `İ` → `i` and `I` → `ı`; every other
/// character uses the default Unicode mapping.
pub fn turkish_lowercase(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            'İ' => out.push('i'),
            'I' => out.push('ı'),
            _ => out.extend(c.to_lowercase()),
        }
    }
    out
}

/// Casefolds, splits on whitespace and trims non-alphanumeric characters from
/// both ends of each token.
pub fn tokenize(text: &str) -> TokenSequence {
    let lowered = turkish_lowercase(text);
    TokenSequence(
        lowered
            .split_whitespace()
            .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect(),
    )
}
