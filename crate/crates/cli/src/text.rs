//! Shared pieces of the line-oriented file formats.

use gwflop::rational::parse_rational;
use gwflop::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

pub fn fail<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

/// Non-blank lines with comments stripped, numbered from 1.
pub fn lines(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let content = raw.split('#').next().unwrap_or("").trim();
            (!content.is_empty()).then(|| (i + 1, content.split_whitespace().collect()))
        })
        .collect()
}

/// Checks the version header and returns the remaining lines.
pub fn body<'a>(text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>, ParseError> {
    let mut all = lines(text);
    if all.is_empty() {
        return fail(1, format!("empty file, expected `{header}`"));
    }
    let (line, first) = all.remove(0);
    if first.join(" ") != header {
        return fail(line, format!("expected header `{header}`, found `{}`", first.join(" ")));
    }
    Ok(all)
}

pub fn coords(line: usize, text: &str) -> Result<Vec<i64>, ParseError> {
    text.split(',')
        .map(|c| c.trim().parse::<i64>().or_else(|_| fail(line, format!("bad integer `{c}` in `{text}`"))))
        .collect()
}

pub fn show_coords(c: &[i64]) -> String {
    c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn rational(line: usize, text: &str) -> Result<Rational, ParseError> {
    parse_rational(text).or_else(|e| fail(line, e.to_string()))
}

pub fn int<T: std::str::FromStr>(line: usize, text: &str) -> Result<T, ParseError> {
    text.parse().or_else(|_| fail(line, format!("bad number `{text}`")))
}

pub fn arity(line: usize, words: &[&str], n: usize) -> Result<(), ParseError> {
    if words.len() != n {
        return fail(line, format!("`{}` takes {} field(s)", words[0], n - 1));
    }
    Ok(())
}

/// Labels joined by commas, `-` for none.
pub fn labels(text: &str) -> Vec<String> {
    if text == "-" {
        Vec::new()
    } else {
        text.split(',').map(str::to_string).collect()
    }
}

pub fn show_labels(labels: &[String]) -> String {
    if labels.is_empty() {
        "-".into()
    } else {
        labels.join(",")
    }
}
