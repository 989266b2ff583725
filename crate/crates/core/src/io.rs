//! Plain-text and image serialization.
//!
//! CSV output uses Rust's shortest round-trip float formatting, so
//! `read_csv(write_csv(x)) == x` bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, ImageGrid};

/// One line per array row, comma separated.
pub fn to_csv<F: Field>(field: &F) -> String {
    let (rows, cols) = field.shape();
    let mut out = String::with_capacity(rows * cols * 20);
    for row in field.values().chunks(cols) {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn write_csv<F: Field>(field: &F, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_csv(field))?;
    Ok(())
}

pub fn parse_csv<F: Field>(text: &str) -> Result<F> {
    let mut values = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for cell in line.split(',') {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {cell:?}: {e}", lineno + 1)))?;
            values.push(v);
        }
        let n = values.len() - before;
        match cols {
            None => cols = Some(n),
            Some(c) if c != n => {
                return Err(Error::Parse(format!(
                    "line {}: expected {c} columns, found {n}",
                    lineno + 1
                )))
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::Parse("empty csv".into()))?;
    F::from_vec((rows, cols), values)
}

pub fn read_csv<F: Field>(path: impl AsRef<Path>) -> Result<F> {
    parse_csv(&fs::read_to_string(path)?)
}

/// Binary PGM (`P5`, maxval 255). Values are clamped to `[0, 1]` and
/// mapped linearly onto `0..=255`.
pub fn to_pgm(image: &ImageGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(
        image
            .values()
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

pub fn write_pgm(image: &ImageGrid, path: impl AsRef<Path>) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&to_pgm(image))?;
    Ok(())
}
