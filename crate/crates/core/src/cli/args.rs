//! Parsers for the textual box, list and matrix arguments.

use crate::domain::Hyperbox;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

fn number(text: &str) -> Result<f64> {
    let t = text.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("`{t}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::InvalidArgument(format!("`{t}` is not finite")));
    }
    Ok(v)
}

/// Comma-separated numbers, e.g. `0.5, 0.25`.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Err(Error::InvalidArgument("empty number list".into()));
    }
    text.split(',').map(number).collect()
}

/// Semicolon-separated groups of comma-separated numbers, e.g. `0,1;0,0.5,1`.
pub fn parse_groups(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';').map(parse_list).collect()
}

/// Box spec `lo,hi;lo,hi;...`, one group per axis.
pub fn parse_box(text: &str) -> Result<Hyperbox> {
    let axes = parse_groups(text)?;
    let bounds = axes
        .iter()
        .enumerate()
        .map(|(i, g)| match g.as_slice() {
            [lo, hi] => Ok((*lo, *hi)),
            _ => Err(Error::InvalidArgument(format!(
                "axis {} of box `{text}` needs exactly `lo,hi`",
                i + 1
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    Hyperbox::from_bounds(&bounds)
}

/// Row-major entry list for a `rows x rows` matrix. Semicolons between rows
/// are accepted as well as commas.
pub fn parse_matrix(text: &str, rows: usize) -> Result<SquareMatrix> {
    let entries: Vec<f64> = parse_groups(text)?.into_iter().flatten().collect();
    SquareMatrix::new(rows, entries)
}
