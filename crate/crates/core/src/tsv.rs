//! Small helpers shared by the TSV readers and writers.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Iterates `(1-based line number, line)` with trailing `\r` removed.
pub(crate) fn numbered_lines<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = io::Result<(usize, String)>> {
    reader.lines().enumerate().map(|(i, line)| {
        line.map(|mut l| {
            if l.ends_with('\r') {
                l.pop();
            }
            (i + 1, l)
        })
    })
}

pub(crate) fn open(path: &Path) -> io::Result<BufReader<File>> {
    File::open(path).map(BufReader::new)
}

pub(crate) fn create(path: &Path) -> io::Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    File::create(path).map(BufWriter::new)
}

/// Escapes backslash, tab, newline and carriage return so a field stays on one line.
pub(crate) fn escape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for c in field.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub(crate) fn unescape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

pub(crate) fn write_line<W: Write>(w: &mut W, fields: &[&str]) -> io::Result<()> {
    writeln!(w, "{}", fields.join("\t"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn escape_round_trips(s in ".*") {
            let escaped = escape(&s);
            prop_assert!(!escaped.contains('\t') && !escaped.contains('\n'));
            prop_assert_eq!(unescape(&escaped), s);
        }
    }
}
