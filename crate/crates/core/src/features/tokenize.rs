use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Punct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub kind: TokenKind,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '\u{2019}'
}

/// Splits text into word and punctuation tokens.
///
/// Words are maximal runs of letters, digits and apostrophes; a run made only
/// of apostrophes is treated as punctuation. Every other non-whitespace
/// character is a one-character punctuation token.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        if !is_word_char(c) {
            tokens.push(Token {
                text: &text[start..start + c.len_utf8()],
                kind: TokenKind::Punct,
            });
            continue;
        }
        let mut end = start + c.len_utf8();
        let mut has_alnum = c.is_alphanumeric();
        while let Some(&(i, next)) = chars.peek() {
            if !is_word_char(next) {
                break;
            }
            has_alnum |= next.is_alphanumeric();
            end = i + next.len_utf8();
            chars.next();
        }
        let run = &text[start..end];
        if has_alnum {
            tokens.push(Token {
                text: run,
                kind: TokenKind::Word,
            });
        } else {
            tokens.extend(run.char_indices().map(|(i, ch)| Token {
                text: &run[i..i + ch.len_utf8()],
                kind: TokenKind::Punct,
            }));
        }
    }
    tokens
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Byte ranges of the sentences in `text`, trimmed of surrounding whitespace.
///
/// A sentence ends at `.`, `!` or `?` followed by whitespace or the end of the
/// text. Trailing text without a terminator forms the last sentence.
pub fn split_sentences(text: &str) -> Vec<Range<usize>> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if !is_terminator(c) {
            continue;
        }
        let at_boundary = match chars.peek() {
            None => true,
            Some(&(_, next)) => next.is_whitespace(),
        };
        if at_boundary {
            let end = i + c.len_utf8();
            push_trimmed(text, start..end, &mut sentences);
            start = end;
        }
    }
    push_trimmed(text, start..text.len(), &mut sentences);
    sentences
}

fn push_trimmed(text: &str, range: Range<usize>, out: &mut Vec<Range<usize>>) {
    let slice = &text[range.clone()];
    let leading = slice.len() - slice.trim_start().len();
    let trimmed = slice.trim();
    if !trimmed.is_empty() {
        let start = range.start + leading;
        out.push(start..start + trimmed.len());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(input: &str) -> Vec<&str> {
        tokenize(input).into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn punctuation_becomes_single_tokens() {
        assert_eq!(texts("Hello, world!"), ["Hello", ",", "world", "!"]);
        let kinds: Vec<_> = tokenize("Hello, world!").into_iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            [TokenKind::Word, TokenKind::Punct, TokenKind::Word, TokenKind::Punct]
        );
    }

    #[test]
    fn empty_text_has_no_tokens() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \n\t").is_empty());
    }

    #[test]
    fn apostrophes_stay_inside_words() {
        assert_eq!(texts("don't stop"), ["don't", "stop"]);
        assert_eq!(texts("do n't"), ["do", "n't"]);
        assert_eq!(texts("'' x"), ["'", "'", "x"]);
    }

    #[test]
    fn hyphens_and_quotes_split_words() {
        assert_eq!(texts("well-known \"x\""), ["well", "-", "known", "\"", "x", "\""]);
    }

    #[test]
    fn sentence_examples() {
        assert_eq!(split_sentences("A. B!").len(), 2);
        assert_eq!(split_sentences("no terminator").len(), 1);
        assert!(split_sentences("").is_empty());
        assert_eq!(split_sentences("Why? Why? Why?").len(), 3);
    }

    #[test]
    fn decimal_points_and_ellipses_do_not_split() {
        let text = "It costs 3.5 dollars... really? Yes";
        let spans: Vec<_> = split_sentences(text)
            .into_iter()
            .map(|r| &text[r])
            .collect();
        assert_eq!(spans, ["It costs 3.5 dollars...", "really?", "Yes"]);
    }
}
