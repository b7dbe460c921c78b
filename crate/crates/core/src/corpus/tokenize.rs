use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenizer {
    /// Overlapping character pairs of the text with whitespace removed.
    #[default]
    CharBigram,
    Whitespace,
}

pub fn tokenize(text: &str, tokenizer: Tokenizer) -> Vec<String> {
    match tokenizer {
        Tokenizer::Whitespace => text.split_whitespace().map(str::to_owned).collect(),
        Tokenizer::CharBigram => {
            let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
            match chars.len() {
                0 => Vec::new(),
                1 => vec![chars[0].to_string()],
                _ => chars.windows(2).map(|w| w.iter().collect()).collect(),
            }
        }
    }
}
