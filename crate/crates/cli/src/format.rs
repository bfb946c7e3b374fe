//! Plain-text instance files.
//!
//! ```text
//! m n sigma
//! a_11 a_12 ... a_1n
//! ...
//! a_m1 a_m2 ... a_mn
//! ```
//!
//! Column `j` of the matrix is the `j`-th value across the rows. Lines
//! starting with `#` and blank lines are skipped.

use std::fmt;
use std::fmt::Write as _;

use catclust::{Alphabet, CategoricalMatrix, Symbol};

/// A parse failure, located by 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// A parsed instance file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFile {
    pub matrix: CategoricalMatrix,
    pub alphabet: Alphabet,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens of a line with their 1-based columns.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.char_indices()
        .filter(|&(i, c)| !c.is_whitespace() && (i == 0 || line[..i].ends_with(char::is_whitespace)))
        .map(move |(i, _)| {
            let rest = &line[i..];
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            (i + 1, &rest[..end])
        })
}

fn number<T: std::str::FromStr>(tok: &str, line: usize, column: usize, what: &str) -> Result<T, ParseError> {
    tok.parse().map_err(|_| {
        err(
            line,
            column,
            format!("expected a nonnegative integer for {what}, found {tok:?}"),
        )
    })
}

pub fn parse_instance(text: &str) -> Result<InstanceFile, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    let (hl, header) = lines
        .next()
        .ok_or_else(|| err(1, 1, "missing header line \"m n sigma\""))?;
    let head: Vec<(usize, &str)> = tokens(header).collect();
    if head.len() != 3 {
        let col = head.get(3).map_or(header.len() + 1, |t| t.0);
        return Err(err(
            hl,
            col,
            format!("header needs exactly 3 values \"m n sigma\", found {}", head.len()),
        ));
    }
    let m: usize = number(head[0].1, hl, head[0].0, "m")?;
    let n: usize = number(head[1].1, hl, head[1].0, "n")?;
    let sigma: u32 = number(head[2].1, hl, head[2].0, "sigma")?;
    if m == 0 || n == 0 {
        return Err(err(hl, head[0].0, "m and n must be positive"));
    }
    if sigma == 0 {
        return Err(err(hl, head[2].0, "sigma must be positive"));
    }

    let mut rows: Vec<Vec<Symbol>> = Vec::with_capacity(m);
    let mut last_line = hl;
    for (ln, line) in lines {
        if rows.len() == m {
            return Err(err(ln, 1, format!("expected {m} rows, found more")));
        }
        last_line = ln;
        let row: Vec<(usize, &str)> = tokens(line).collect();
        if row.len() != n {
            let col = row.get(n).map_or(line.len() + 1, |t| t.0);
            return Err(err(ln, col, format!("expected {n} values, found {}", row.len())));
        }
        let mut values = Vec::with_capacity(n);
        for (col, tok) in row {
            let v: Symbol = number(tok, ln, col, "a symbol")?;
            if v >= sigma {
                return Err(err(ln, col, format!("symbol {v} is outside the alphabet 0..{sigma}")));
            }
            values.push(v);
        }
        rows.push(values);
    }
    if rows.len() < m {
        return Err(err(
            last_line + 1,
            1,
            format!("expected {m} rows, found {}", rows.len()),
        ));
    }
    let matrix = CategoricalMatrix::from_rows(&rows).map_err(|e| err(hl, 1, e.to_string()))?;
    let alphabet = Alphabet::new(sigma).map_err(|e| err(hl, head[2].0, e.to_string()))?;
    Ok(InstanceFile { matrix, alphabet })
}

pub fn write_instance(matrix: &CategoricalMatrix, sigma: u32) -> String {
    let mut out = String::new();
    writeln!(out, "{} {} {}", matrix.rows(), matrix.cols(), sigma).unwrap();
    for i in 0..matrix.rows() {
        let row: Vec<String> = matrix.row(i).iter().map(u32::to_string).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}
