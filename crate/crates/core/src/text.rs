//! Surface-form normalization and word segmentation.

use alloc::string::String;
use alloc::vec::Vec;

/// Punctuation removed from the end of a surface form.
const TRAILING_PUNCT: &[char] = &['.', ',', ';', ':', '\'', '\u{2019}'];

/// Canonical lookup key for a surface form.
///
/// Lowercases, collapses whitespace runs to one space, trims, then strips
/// trailing `.` `,` `;` `:` `'` and a possessive `'s` until none remain.
/// Total: every input has a key, possibly empty.
pub fn normalize_surface(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    loop {
        let trimmed_len = out.trim_end().len();
        out.truncate(trimmed_len);
        if out.ends_with("'s") || out.ends_with("\u{2019}s") {
            out.pop();
            out.pop();
        } else if out.ends_with(TRAILING_PUNCT) {
            out.pop();
        } else {
            break;
        }
    }
    out
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Byte spans of maximal alphanumeric runs, in text order.
pub fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (is_word_char(c), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// Last word of a phrase, used as the default head word.
pub fn last_word(s: &str) -> &str {
    word_spans(s).last().map(|&(a, b)| &s[a..b]).unwrap_or(s)
}

/// Byte offset `chars` characters before `idx`, clamped to the start.
pub(crate) fn back_chars(text: &str, idx: usize, chars: usize) -> usize {
    if chars == 0 {
        return idx;
    }
    text[..idx].char_indices().rev().nth(chars - 1).map_or(0, |(i, _)| i)
}

/// Byte offset `chars` characters after `idx`, clamped to the end.
pub(crate) fn forward_chars(text: &str, idx: usize, chars: usize) -> usize {
    text[idx..]
        .char_indices()
        .nth(chars)
        .map_or(text.len(), |(i, _)| idx + i)
}
