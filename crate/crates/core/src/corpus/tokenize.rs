use std::ops::Range;

/// A lowercased token together with the byte span it occupies in the source
/// text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Range<usize>,
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Split `text` on non-alphanumeric boundaries.
///
/// Apostrophes survive only between two alphanumeric characters, so
/// "Hermione's" stays one token; a trailing possessive `'s` is then stripped
/// from the normalized form (the span still covers it).
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = chars[i].0;
        let mut j = i;
        while j < chars.len() {
            let c = chars[j].1;
            if c.is_alphanumeric() {
                j += 1;
            } else if is_apostrophe(c)
                && j + 1 < chars.len()
                && chars[j + 1].1.is_alphanumeric()
            {
                j += 1;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
        tokens.push(Token {
            text: normalize_token(&text[start..end]),
            span: start..end,
        });
        i = j;
    }
    tokens
}

/// Lowercase, unify apostrophes, and drop a possessive `'s`.
pub fn normalize_token(raw: &str) -> String {
    let mut s: String = raw
        .chars()
        .map(|c| if is_apostrophe(c) { '\'' } else { c })
        .flat_map(char::to_lowercase)
        .collect();
    if s.len() > 2 && s.ends_with("'s") {
        s.truncate(s.len() - 2);
    }
    s
}

/// Normalized token strings only.
pub fn token_strings(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_punctuation_and_lowercases() {
        assert_eq!(
            token_strings("Moony laughed; Lupin waved."),
            vec!["moony", "laughed", "lupin", "waved"]
        );
    }

    #[test]
    fn possessive_is_stripped_but_span_kept() {
        let toks = tokenize("Hermione's wand");
        assert_eq!(toks[0].text, "hermione");
        assert_eq!(toks[0].span, 0..10);
        assert_eq!(toks[1].text, "wand");
    }

    #[test]
    fn curly_apostrophe_and_edges() {
        assert_eq!(token_strings("Ron\u{2019}s 'quote'"), vec!["ron", "quote"]);
        assert_eq!(token_strings("don't"), vec!["don't"]);
    }

    #[test]
    fn unicode_letters_are_token_chars() {
        assert_eq!(token_strings("Fleur Delacour—très"), vec!["fleur", "delacour", "très"]);
    }
}
