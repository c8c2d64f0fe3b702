use unicode_general_category::{get_general_category, GeneralCategory};

use super::{Document, TokenizedDoc};

fn is_token_char(c: char) -> bool {
    c == '-' || c.is_alphabetic() || get_general_category(c) == GeneralCategory::DecimalNumber
}

/// Lowercases, replaces every character that is not a letter, decimal digit
/// or hyphen by a space, splits on whitespace and trims hyphens from token
/// ends. Empty tokens are dropped.
pub fn tokenize_text(text: &str) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| if is_token_char(c) { c } else { ' ' })
        .collect();
    cleaned
        .split_whitespace()
        .map(|t| t.trim_matches('-'))
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

pub fn normalize_tokenize(doc: &Document) -> TokenizedDoc {
    TokenizedDoc {
        id: doc.id.clone(),
        year: doc.year,
        tokens: tokenize_text(&doc.text),
    }
}

/// True if `token` could have been produced by [`tokenize_text`].
pub fn is_normalized_token(token: &str) -> bool {
    !token.is_empty()
        && !token.starts_with('-')
        && !token.ends_with('-')
        && token
            .chars()
            .all(|c| is_token_char(c) && c.to_lowercase().eq(std::iter::once(c)))
}
