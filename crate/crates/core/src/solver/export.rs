//! Plain-text state and report export.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::FsiState;
use crate::error::{FsiError, Result};

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> FsiError + '_ {
    move |source| FsiError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// CSV with header `field,dof,value` and one row per coefficient of `u`,
/// `w`, `z` and, when present, `pi`.
pub fn write_state_csv(state: &FsiState, path: &Path) -> Result<()> {
    let err = io_err(path);
    let mut f = BufWriter::new(File::create(path).map_err(&err)?);
    writeln!(f, "field,dof,value").map_err(&err)?;
    let mut fields: Vec<(&str, &[f64])> = vec![("u", &state.u), ("w", &state.w), ("z", &state.z)];
    if let Some(pi) = &state.pi {
        fields.push(("pi", pi));
    }
    for (name, v) in fields {
        for (i, x) in v.iter().enumerate() {
            writeln!(f, "{name},{i},{x:?}").map_err(&err)?;
        }
    }
    f.flush().map_err(&err)
}

/// Pretty-printed JSON.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let err = io_err(path);
    let text = serde_json::to_string_pretty(value).map_err(|e| FsiError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    std::fs::write(path, text + "\n").map_err(&err)
}
