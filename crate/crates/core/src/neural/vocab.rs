use std::collections::HashMap;

use super::NeuralError;

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
pub const PAD_TOKEN: &str = "[PAD]";
pub const UNK_TOKEN: &str = "[UNK]";

/// Token list where the line number (id) is the position. Ids 0 and 1 are
/// always padding and unknown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self, NeuralError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if tokens.len() < 2 || tokens[0] != PAD_TOKEN || tokens[1] != UNK_TOKEN {
            return Err(NeuralError::Vocab(format!("ids 0 and 1 must be {PAD_TOKEN} and {UNK_TOKEN}")));
        }
        if tokens.len() > u32::MAX as usize {
            return Err(NeuralError::Vocab("too many tokens".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(NeuralError::Vocab(format!("token {i} is empty or contains whitespace")));
            }
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(NeuralError::Vocab(format!("token {t:?} appears twice")));
            }
        }
        Ok(Vocab { tokens, index })
    }

    /// Most frequent whitespace tokens first (ties alphabetical), keeping at
    /// most `max_size` entries including the two reserved ones.
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>, max_size: usize, min_count: usize) -> Self {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for text in texts {
            for tok in text.split_whitespace() {
                *counts.entry(tok).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|(t, c)| *c >= min_count.max(1) && *t != PAD_TOKEN && *t != UNK_TOKEN)
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let keep = max_size.saturating_sub(2);
        let tokens = [PAD_TOKEN, UNK_TOKEN].into_iter().chain(ranked.into_iter().take(keep).map(|(t, _)| t));
        Vocab::from_tokens(tokens).expect("built vocabularies are well formed")
    }

    /// One token per line.
    pub fn parse(input: &str) -> Result<Self, NeuralError> {
        Vocab::from_tokens(input.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)))
    }

    pub fn to_file_string(&self) -> String {
        let mut s = self.tokens.join("\n");
        s.push('\n');
        s
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }
}

/// Fixed-length token ids, padded with [`PAD_ID`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub ids: Vec<u32>,
}

impl TokenSequence {
    pub fn non_pad(&self) -> impl Iterator<Item = u32> + '_ {
        self.ids.iter().copied().filter(|&i| i != PAD_ID)
    }
}

pub fn tokenize(text: &str, vocab: &Vocab, max_len: usize) -> TokenSequence {
    let mut ids: Vec<u32> = text.split_whitespace().take(max_len).map(|t| vocab.id(t).unwrap_or(UNK_ID)).collect();
    ids.resize(max_len, PAD_ID);
    TokenSequence { ids }
}
