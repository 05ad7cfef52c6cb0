//! Versioned text checkpoints for trained networks.
//!
//! Parameters are written with Rust's shortest round-trip float formatting,
//! so save/load reproduces every f64 bit-exactly.

use std::fmt::Write as _;

use thiserror::Error;

use super::net::{Layer, Mlp};

const MAGIC: &str = "qtopo-checkpoint v1";

#[derive(Debug, Error, PartialEq)]
pub enum CheckpointError {
    #[error("bad checkpoint header, expected `{MAGIC}`")]
    BadHeader,
    #[error("malformed checkpoint at line {0}: {1}")]
    Malformed(usize, String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config_hash: String,
    pub policy: Mlp,
    pub value: Mlp,
}

fn write_net(out: &mut String, label: &str, net: &Mlp) {
    let _ = writeln!(out, "{label} {}", net.layers().len());
    for l in net.layers() {
        let _ = writeln!(out, "layer {} {}", l.rows, l.cols);
        let fmt = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "w {}", fmt(&l.w));
        let _ = writeln!(out, "b {}", fmt(&l.b));
    }
}

pub fn save_checkpoint(ckpt: &Checkpoint) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "config_hash {}", ckpt.config_hash);
    write_net(&mut out, "policy", &ckpt.policy);
    write_net(&mut out, "value", &ckpt.value);
    out
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Result<(usize, &'a str), CheckpointError> {
        self.lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| CheckpointError::Malformed(0, "unexpected end of file".into()))
    }

    fn read_net(&mut self, label: &str) -> Result<Mlp, CheckpointError> {
        let (ln, header) = self.next()?;
        let count: usize = header
            .strip_prefix(label)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| CheckpointError::Malformed(ln, format!("expected `{label} N`")))?;
        let mut layers = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, shape) = self.next()?;
            let dims: Vec<usize> = shape
                .strip_prefix("layer")
                .map(|s| {
                    s.split_whitespace()
                        .filter_map(|t| t.parse().ok())
                        .collect()
                })
                .unwrap_or_default();
            let [rows, cols] = dims[..] else {
                return Err(CheckpointError::Malformed(
                    ln,
                    "expected `layer R C`".into(),
                ));
            };
            let mut read_vec = |prefix: &str, len: usize| -> Result<Vec<f64>, CheckpointError> {
                let (ln, line) = self.next()?;
                let vals: Vec<f64> = line
                    .strip_prefix(prefix)
                    .map(|s| {
                        s.split_whitespace()
                            .filter_map(|t| t.parse().ok())
                            .collect()
                    })
                    .unwrap_or_default();
                if vals.len() != len {
                    return Err(CheckpointError::Malformed(
                        ln,
                        format!("expected {len} values after `{prefix}`"),
                    ));
                }
                Ok(vals)
            };
            let w = read_vec("w ", rows * cols)?;
            let b = read_vec("b ", rows)?;
            layers.push(Layer { rows, cols, w, b });
        }
        Ok(Mlp::from_layers(layers))
    }
}

pub fn load_checkpoint(text: &str) -> Result<Checkpoint, CheckpointError> {
    let mut reader = Reader {
        lines: text.lines().enumerate(),
    };
    let (_, magic) = reader.next()?;
    if magic.trim() != MAGIC {
        return Err(CheckpointError::BadHeader);
    }
    let (ln, hash_line) = reader.next()?;
    let config_hash = hash_line
        .strip_prefix("config_hash ")
        .ok_or_else(|| CheckpointError::Malformed(ln, "expected `config_hash ...`".into()))?
        .to_string();
    let policy = reader.read_net("policy")?;
    let value = reader.read_net("value")?;
    Ok(Checkpoint {
        config_hash,
        policy,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_bit_exactly() {
        let ckpt = Checkpoint {
            config_hash: "deadbeef".into(),
            policy: Mlp::new(&[3, 5, 4], 1, 0.01),
            value: Mlp::new(&[3, 5, 1], 2, 1.0),
        };
        let text = save_checkpoint(&ckpt);
        let back = load_checkpoint(&text).unwrap();
        assert_eq!(back, ckpt);
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(load_checkpoint("nope"), Err(CheckpointError::BadHeader));
        let ckpt = Checkpoint {
            config_hash: "x".into(),
            policy: Mlp::new(&[2, 2], 1, 1.0),
            value: Mlp::new(&[2, 1], 2, 1.0),
        };
        let text = save_checkpoint(&ckpt).replace("b 0.0 0.0", "b 0.0");
        assert!(matches!(
            load_checkpoint(&text),
            Err(CheckpointError::Malformed(_, _))
        ));
    }
}
