//! Word tokenization used for length filtering and pair statistics.
//!
//! Tokens are maximal runs of letters and digits, optionally glued by
//! internal apostrophes or hyphens, plus single punctuation characters.
//! Counting is over ALL tokens, punctuation included.

/// True for characters that may join two alphanumeric runs into one token
/// ("state-of-the-art", "don't").
fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '\u{2019}')
}

/// Split `text` into word and punctuation tokens. Whitespace is the only
/// information lost: concatenating the tokens reproduces the input with
/// whitespace removed.
pub fn tokenize_words(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_alphanumeric() {
            let mut tok = String::new();
            tok.push(c);
            i += 1;
            while i < chars.len() {
                let c = chars[i];
                if c.is_alphanumeric() {
                    tok.push(c);
                    i += 1;
                } else if is_joiner(c) && i + 1 < chars.len() && chars[i + 1].is_alphanumeric() {
                    tok.push(c);
                    tok.push(chars[i + 1]);
                    i += 2;
                } else {
                    break;
                }
            }
            tokens.push(tok);
        } else {
            tokens.push(c.to_string());
            i += 1;
        }
    }
    tokens
}

/// Number of tokens in `text`.
pub fn count_words(text: &str) -> usize {
    tokenize_words(text).len()
}
