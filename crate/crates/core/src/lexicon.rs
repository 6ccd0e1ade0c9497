//! Stopword and verb lists used to pick content words out of prose.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

const STOPWORDS: &str = include_str!("../data/stopwords.txt");
const VERBS: &str = include_str!("../data/verbs.txt");

/// Environment variable naming a directory with `stopwords.txt` and
/// `verbs.txt` that replace the built-in lists.
pub const LEXICON_ENV: &str = "REBUG_LEXICON_DIR";

#[derive(Debug, Clone)]
pub struct Lexicon {
    stopwords: HashSet<String>,
    verbs: HashSet<String>,
}

fn parse_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Lexicon {
    pub fn builtin() -> Self {
        Lexicon { stopwords: parse_list(STOPWORDS), verbs: parse_list(VERBS) }
    }

    pub fn from_dir(dir: &Path) -> std::io::Result<Self> {
        Ok(Lexicon {
            stopwords: parse_list(&fs::read_to_string(dir.join("stopwords.txt"))?),
            verbs: parse_list(&fs::read_to_string(dir.join("verbs.txt"))?),
        })
    }

    /// Built-in lists unless [`LEXICON_ENV`] points somewhere.
    pub fn from_env() -> std::io::Result<Self> {
        match std::env::var_os(LEXICON_ENV) {
            Some(dir) if !dir.is_empty() => Self::from_dir(Path::new(&dir)),
            _ => Ok(Self::builtin()),
        }
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(&word.to_lowercase())
    }

    pub fn is_verb(&self, word: &str) -> bool {
        self.verbs.contains(&word.to_lowercase())
    }

    /// Content word: neither a stopword nor a verb.
    pub fn is_content(&self, word: &str) -> bool {
        !self.is_stopword(word) && !self.is_verb(word)
    }
}
