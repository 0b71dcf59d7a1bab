//! Shared container for model checkpoints.
//!
//! Layout: an ASCII magic line (`ENVSYNTH-GAN 1\n`), one line of JSON
//! metadata which includes a `tensor_lengths` array, then the tensors as
//! consecutive little-endian IEEE-754 doubles in the listed order.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Envelope<M> {
    tensor_lengths: Vec<usize>,
    #[serde(flatten)]
    meta: M,
}

pub(crate) fn write<M: Serialize>(
    path: &Path,
    magic: &str,
    version: u32,
    meta: &M,
    tensors: &[&[f64]],
) -> Result<()> {
    let env = Envelope {
        tensor_lengths: tensors.iter().map(|t| t.len()).collect(),
        meta,
    };
    let mut buf = Vec::new();
    writeln!(buf, "{magic} {version}").expect("vec write");
    buf.extend(serde_json::to_vec(&env).map_err(|e| Error::Internal(e.to_string()))?);
    buf.push(b'\n');
    for t in tensors {
        for v in t.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub(crate) fn read<M: DeserializeOwned>(
    path: &Path,
    magic: &str,
    version: u32,
) -> Result<(M, Vec<Vec<f64>>)> {
    let bad = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(f);
    let mut head = String::new();
    r.read_line(&mut head).map_err(|e| Error::io(path, e))?;
    let expected = format!("{magic} {version}");
    if head.trim_end() != expected {
        return Err(bad(1, format!("expected header {expected:?}, found {:?}", head.trim_end())));
    }
    let mut meta_line = String::new();
    r.read_line(&mut meta_line).map_err(|e| Error::io(path, e))?;
    let env: Envelope<M> =
        serde_json::from_str(meta_line.trim_end()).map_err(|e| bad(2, e.to_string()))?;
    let mut tensors = Vec::with_capacity(env.tensor_lengths.len());
    let mut bytes = [0u8; 8];
    for &n in &env.tensor_lengths {
        let mut t = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut bytes)
                .map_err(|_| bad(3, "truncated tensor data".into()))?;
            t.push(f64::from_le_bytes(bytes));
        }
        tensors.push(t);
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(|e| Error::io(path, e))?;
    if !rest.is_empty() {
        return Err(bad(3, format!("{} trailing bytes", rest.len())));
    }
    Ok((env.meta, tensors))
}
