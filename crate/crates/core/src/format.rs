//! Line-oriented presentation files (`.dsp`).
//!
//! ```text
//! # comment
//! vars x y z w
//! type 2 3 2
//! (w^3) (y) (x)
//! (z) (w) (y^3)
//! label optional free text
//! ```

use std::path::Path;

use thiserror::Error;

use crate::detvar::{DetPresentation, PolyMatrix};
use crate::poly::{parse_poly, PolyError, Polynomial, VarSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("t = {t} is out of range for a {m}x{n} matrix")]
    Range { t: usize, m: usize, n: usize },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Splits `(e1) (e2) ...` into the inner texts with their 1-based start
/// columns (of the text after the opening parenthesis).
pub(crate) fn paren_groups(
    text: &str,
    line: usize,
    offset: usize,
) -> Result<Vec<(String, usize)>, FormatError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        if chars[i] != '(' {
            return Err(syntax(
                line,
                offset + i + 1,
                "expected '(' to start a matrix entry",
            ));
        }
        let start = i + 1;
        let mut depth = 1;
        i += 1;
        while i < chars.len() && depth > 0 {
            match chars[i] {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
            i += 1;
        }
        if depth != 0 {
            return Err(syntax(line, offset + start, "unbalanced parenthesis"));
        }
        out.push((chars[start..i - 1].iter().collect(), offset + start + 1));
    }
    Ok(out)
}

/// Parses an expression, translating error columns to the file position.
pub(crate) fn parse_at(
    text: &str,
    vars: &std::sync::Arc<VarSet>,
    line: usize,
    column: usize,
) -> Result<Polynomial, FormatError> {
    parse_poly(text, vars).map_err(|e| match e {
        PolyError::Syntax { column: c, message } => syntax(line, column + c - 1, message),
        PolyError::UnknownVariable { name, column: c } => {
            syntax(line, column + c - 1, format!("unknown variable `{name}`"))
        }
        other => syntax(line, column, other.to_string()),
    })
}

/// `(keyword, rest, column of rest)` for a trimmed line.
pub(crate) fn split_key(raw: &str) -> (&str, &str, usize) {
    let lead = raw.len() - raw.trim_start().len();
    let body = raw.trim();
    match body.find(char::is_whitespace) {
        Some(k) => {
            let rest = body[k..].trim_start();
            let col = lead + body.len() - rest.len() + 1;
            (&body[..k], rest, col)
        }
        None => (body, "", lead + body.len() + 1),
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

pub fn parse_presentation(text: &str) -> Result<DetPresentation, FormatError> {
    let mut vars = None;
    let mut shape: Option<(usize, usize, usize, usize)> = None;
    let mut label = String::new();
    let mut entries: Vec<Polynomial> = Vec::new();
    let mut rows = 0;
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            continue;
        }
        if body.trim_start().starts_with('(') {
            let Some(v) = &vars else {
                return Err(syntax(line, 1, "matrix row before `vars`"));
            };
            let Some((m, n, _, _)) = shape else {
                return Err(syntax(line, 1, "matrix row before `type`"));
            };
            if rows == m {
                return Err(syntax(line, 1, format!("more than {m} matrix rows")));
            }
            let groups = paren_groups(body, line, 0)?;
            if groups.len() != n {
                return Err(syntax(
                    line,
                    1,
                    format!("expected {n} entries, found {}", groups.len()),
                ));
            }
            for (g, col) in groups {
                entries.push(parse_at(&g, v, line, col)?);
            }
            rows += 1;
            continue;
        }
        let (key, rest, col) = split_key(body);
        match key {
            "vars" => {
                if vars.is_some() {
                    return Err(syntax(line, 1, "duplicate `vars` line"));
                }
                let names: Vec<&str> = rest.split_whitespace().collect();
                if names.is_empty() {
                    return Err(syntax(line, col, "empty variable list"));
                }
                vars = Some(VarSet::new(names).map_err(|e| syntax(line, col, e.to_string()))?);
            }
            "type" => {
                if shape.is_some() {
                    return Err(syntax(line, 1, "duplicate `type` line"));
                }
                let nums: Vec<usize> = rest
                    .split_whitespace()
                    .map(|s| s.parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| {
                        syntax(line, col, "`type` expects three positive integers m n t")
                    })?;
                let [m, n, t] = nums[..] else {
                    return Err(syntax(
                        line,
                        col,
                        "`type` expects three positive integers m n t",
                    ));
                };
                if m == 0 || n == 0 {
                    return Err(syntax(line, col, "matrix dimensions must be positive"));
                }
                if t == 0 || t > m.min(n) {
                    return Err(FormatError::Range { t, m, n });
                }
                shape = Some((m, n, t, line));
            }
            "label" => label = rest.to_string(),
            other => return Err(syntax(line, 1, format!("unknown keyword `{other}`"))),
        }
    }
    let Some(vars) = vars else {
        return Err(syntax(last_line.max(1), 1, "missing `vars` line"));
    };
    let Some((m, n, t, _)) = shape else {
        return Err(syntax(last_line.max(1), 1, "missing `type` line"));
    };
    if rows != m {
        return Err(syntax(
            last_line.max(1),
            1,
            format!("expected {m} matrix rows, found {rows}"),
        ));
    }
    let matrix =
        PolyMatrix::new(&vars, m, n, entries).map_err(|e| syntax(last_line, 1, e.to_string()))?;
    DetPresentation::new(matrix, t, label).map_err(|_| FormatError::Range { t, m, n })
}

pub fn parse_presentation_file(path: impl AsRef<Path>) -> Result<DetPresentation, FormatError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_presentation(&text)
}

/// Inverse of [`parse_presentation`].
pub fn write_presentation(p: &DetPresentation) -> String {
    let mut out = format!("vars {}\ntype {} {} {}\n", p.vars(), p.m(), p.n(), p.t());
    out.push_str(&p.matrix().to_string());
    if !p.label().is_empty() {
        out.push_str(&format!("label {}\n", p.label()));
    }
    out
}
