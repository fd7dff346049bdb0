//! `.dict.json` dictionary files.
//!
//! ```text
//! {"m": 3, "N": 12, "Na": 3, "entries": [[re, im], ...]}
//! ```
//!
//! `entries` is row-major; every number is written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex;
use serde::Deserialize;

use crate::dictionary::PartitionedDictionary;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::Real;

pub const DICT_EXTENSION: &str = "dict.json";

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Rescale columns to unit norm instead of rejecting them.
    pub renormalize: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DictFile {
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "Na")]
    na: usize,
    entries: Vec<[f64; 2]>,
}

pub fn to_json_string<T: Real>(d: &PartitionedDictionary<T>) -> String {
    let mut out = String::new();
    let _ = write!(out, "{{\"m\": {}, \"N\": {}, \"Na\": {}, \"entries\": [", d.m(), d.n(), d.na());
    for (k, z) in d.matrix().to_row_major().into_iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "[{:.16e}, {:.16e}]", z.re.as_f64(), z.im.as_f64());
    }
    out.push_str("]}\n");
    out
}

pub fn from_json_str<T: Real>(text: &str, opts: LoadOptions) -> Result<PartitionedDictionary<T>> {
    let file: DictFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if file.m == 0 || file.n == 0 {
        return Err(Error::Format(format!("empty dictionary (m = {}, N = {})", file.m, file.n)));
    }
    if file.na > file.n {
        return Err(Error::Format(format!("Na = {} exceeds N = {}", file.na, file.n)));
    }
    if file.entries.len() != file.m * file.n {
        return Err(Error::Format(format!(
            "expected m * N = {} entries, found {}",
            file.m * file.n,
            file.entries.len()
        )));
    }
    let entries: Vec<Complex<T>> = file.entries.iter().map(|[re, im]| Complex::new(T::lit(*re), T::lit(*im))).collect();
    let mut matrix =
        ComplexMatrix::from_row_major(file.m, file.n, entries).map_err(|e| Error::Format(e.to_string()))?;

    if opts.renormalize {
        let mut raw = matrix.into_dmatrix();
        for c in 0..raw.ncols() {
            let norm = raw.column(c).norm();
            if norm <= T::load_tol() {
                return Err(Error::NonUnitColumn { index: c, norm: norm.as_f64() });
            }
            raw.column_mut(c).unscale_mut(norm);
        }
        matrix = ComplexMatrix::from_dmatrix(raw)?;
    }
    PartitionedDictionary::with_tolerance(matrix, file.na, T::load_tol())
}

pub fn save_dictionary<T: Real>(d: &PartitionedDictionary<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json_string(d))?;
    Ok(())
}

pub fn load_dictionary<T: Real>(path: impl AsRef<Path>) -> Result<PartitionedDictionary<T>> {
    load_dictionary_with(path, LoadOptions::default())
}

pub fn load_dictionary_with<T: Real>(path: impl AsRef<Path>, opts: LoadOptions) -> Result<PartitionedDictionary<T>> {
    let text = std::fs::read_to_string(path)?;
    from_json_str(&text, opts)
}
