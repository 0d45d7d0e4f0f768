//! Line-oriented text form for complexes.
//!
//! One simplex per line as `dim v0 v1 ... vdim`, emitted in ascending
//! dimension and lexicographic vertex order, so equal complexes serialize to
//! identical bytes. `#` starts a comment; blank lines are ignored.

use std::fmt::Write;

use super::{ComplexError, Simplex, SimplicialComplex};

impl SimplicialComplex {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for k in 0..=self.max_dim() {
            for s in self.simplices(k) {
                write!(out, "{}", k).unwrap();
                for v in s.vertices() {
                    write!(out, " {}", v).unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(input: &str) -> Result<Self, ComplexError> {
        let mut generators = Vec::new();
        for (idx, raw) in input.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut numbers = content.split_whitespace().map(|tok| {
                tok.parse::<usize>().map_err(|_| ComplexError::Parse {
                    line,
                    msg: format!("invalid integer {tok:?}"),
                })
            });
            let dim = numbers.next().expect("non-empty line has a first token")?;
            let vertices: Vec<usize> = numbers.collect::<Result<_, _>>()?;
            if vertices.len() != dim + 1 {
                return Err(ComplexError::Parse {
                    line,
                    msg: format!(
                        "dimension {} needs {} vertices, found {}",
                        dim,
                        dim + 1,
                        vertices.len()
                    ),
                });
            }
            generators.push(Simplex::new(vertices).map_err(|e| ComplexError::Parse {
                line,
                msg: e.to_string(),
            })?);
        }
        Ok(Self::from_simplices(generators))
    }
}
