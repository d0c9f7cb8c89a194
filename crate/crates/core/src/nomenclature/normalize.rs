//! Canonical text form for names.
//!
//! Names arrive with Unicode Greek letters, sub/superscript digits, typographic
//! dashes and primes, or as ASCII transliterations ("mu4", "eta5"). Everything
//! downstream works on the single form produced here.

/// Lowercases `name` and folds the notational variants of bridging and hapticity
/// descriptors into ASCII (`μ₄` -> `mu4`, `η⁵` -> `eta5`). Whitespace runs collapse
/// to one space and stray spaces around descriptors (`μ -2,5`) are removed.
///
/// The function is idempotent.
pub fn normalize(name: &str) -> String {
    let mut mapped = String::with_capacity(name.len() + 8);
    for c in name.chars().flat_map(char::to_lowercase) {
        match c {
            'μ' | 'µ' => mapped.push_str("mu"),
            'η' => mapped.push_str("eta"),
            '₀'..='₉' => mapped.push(char::from(b'0' + (c as u32 - '₀' as u32) as u8)),
            '⁰' => mapped.push('0'),
            '¹' => mapped.push('1'),
            '²' => mapped.push('2'),
            '³' => mapped.push('3'),
            '⁴'..='⁹' => mapped.push(char::from(b'4' + (c as u32 - '⁴' as u32) as u8)),
            '\u{2010}'..='\u{2015}' | '\u{2212}' | '\u{207B}' | '\u{208B}' | '\u{FE63}'
            | '\u{FF0D}' => mapped.push('-'),
            '\u{2032}' | '\u{2019}' | '\u{2018}' | '\u{02B9}' | '\u{00B4}' | '`' => {
                mapped.push('\'')
            }
            '\u{2033}' => mapped.push_str("''"),
            '\u{2034}' => mapped.push_str("'''"),
            c if c.is_whitespace() => mapped.push(' '),
            c => mapped.push(c),
        }
    }

    let collapsed = collapse_whitespace(&mapped);
    tidy_descriptors(&collapsed)
}

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split(' ').filter(|w| !w.is_empty()) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

/// Length in chars of a `mu`/`eta` descriptor starting at `i`, including a
/// `_` or `^` joiner before its digits. Returns `(len, joiner_offset)`.
fn descriptor_at(chars: &[char], i: usize) -> Option<(usize, Option<usize>)> {
    if i > 0 && is_word_char(chars[i - 1]) {
        return None;
    }
    let starts = |w: &str| {
        w.chars()
            .enumerate()
            .all(|(k, c)| chars.get(i + k) == Some(&c))
    };
    let head = if starts("mu") {
        2
    } else if starts("eta") {
        3
    } else {
        return None;
    };
    let mut j = i + head;
    let mut joiner = None;
    if matches!(chars.get(j), Some('_' | '^'))
        && chars.get(j + 1).is_some_and(|c| c.is_ascii_digit())
    {
        joiner = Some(j - i);
        j += 1;
    }
    let digits_start = j;
    while chars.get(j).is_some_and(|c| c.is_ascii_digit()) {
        j += 1;
    }
    // "eta" needs a number, and neither may run into a longer word.
    if head == 3 && j == digits_start {
        return None;
    }
    if chars.get(j).is_some_and(|c| c.is_alphanumeric()) {
        return None;
    }
    Some((j - i, joiner))
}

fn tidy_descriptors(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out: Vec<char> = Vec::with_capacity(chars.len());
    let mut i = 0;
    // true while the last thing written was a descriptor
    let mut after_descriptor = false;
    while i < chars.len() {
        if let Some((len, joiner)) = descriptor_at(&chars, i) {
            for (k, c) in chars[i..i + len].iter().enumerate() {
                if Some(k) != joiner {
                    out.push(*c);
                }
            }
            i += len;
            after_descriptor = true;
            continue;
        }
        let c = chars[i];
        if c == ' ' {
            let next = chars.get(i + 1).copied();
            let drop_after_descriptor = after_descriptor && matches!(next, Some('-' | ','));
            let drop_before_descriptor = matches!(out.last(), Some(',') | Some('-'))
                && out.len() >= 2
                && descriptor_follows_separator(&out)
                && descriptor_at(&chars, i + 1).is_some();
            if drop_after_descriptor || drop_before_descriptor {
                i += 1;
                continue;
            }
        }
        after_descriptor = false;
        out.push(c);
        i += 1;
    }
    out.into_iter().collect()
}

/// The separator at the end of `out` directly follows a descriptor
/// ("eta2, eta2" -> "eta2,eta2"), so the space after it can go.
fn descriptor_follows_separator(out: &[char]) -> bool {
    let body = &out[..out.len() - 1];
    (0..body.len()).rev().take(8).any(|start| {
        descriptor_at(body, start).is_some_and(|(len, joiner)| {
            joiner.is_none() && start + len == body.len()
        })
    })
}
