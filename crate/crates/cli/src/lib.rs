//! Command implementations behind the `qtopo` binary, exposed as a library
//! so integration tests drive them directly.

pub mod commands;
pub mod config;

use std::fmt;
use std::path::Path;

use qtopo_core::circuit::{generate_random_circuit, parse_qasm, Circuit};
use qtopo_core::topology::{make_grid, make_line, TopologyGraph};

/// Errors carry the process exit code of their class: parse failures 2,
/// routing 3, training 4, I/O 5.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Route(String),
    Train(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Route(_) => 3,
            CliError::Train(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Route(m) => write!(f, "routing error: {m}"),
            CliError::Train(m) => write!(f, "training error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Load a circuit from a QASM file path or an inline generator spec of the
/// form `gen:QxF[@SEED]` (Q qubits, F gate factor).
pub fn load_circuit(source: &str, default_seed: u64) -> Result<Circuit, CliError> {
    if let Some(spec) = source.strip_prefix("gen:") {
        let (dims, seed) = match spec.split_once('@') {
            Some((d, s)) => {
                let seed = s
                    .parse()
                    .map_err(|_| CliError::Parse(format!("bad generator seed in `{source}`")))?;
                (d, seed)
            }
            None => (spec, default_seed),
        };
        let (q, f) = dims
            .split_once('x')
            .ok_or_else(|| CliError::Parse(format!("expected gen:QxF, got `{source}`")))?;
        let qubits: usize = q
            .parse()
            .map_err(|_| CliError::Parse(format!("bad qubit count in `{source}`")))?;
        let factor: f64 = f
            .parse()
            .map_err(|_| CliError::Parse(format!("bad gate factor in `{source}`")))?;
        if qubits < 2 || factor <= 0.0 {
            return Err(CliError::Parse(format!(
                "generator spec needs qubits >= 2 and factor > 0: `{source}`"
            )));
        }
        return Ok(generate_random_circuit(qubits, factor, seed));
    }
    let text = std::fs::read_to_string(source)
        .map_err(|e| CliError::Io(format!("cannot read {source}: {e}")))?;
    let name = Path::new(source)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "circuit".into());
    let circuit = parse_qasm(&text).map_err(|e| CliError::Parse(format!("{source}: {e}")))?;
    Circuit::new(circuit.num_qubits(), circuit.gates().to_vec(), name)
        .map_err(|e| CliError::Parse(e.to_string()))
}

/// Resolve a topology spec: `grid:RxC`, `line:N`, or `file:PATH` (edge-list
/// format, degree-checked on load).
pub fn load_topology(spec: &str, max_degree: usize) -> Result<(TopologyGraph, String), CliError> {
    if let Some(dims) = spec.strip_prefix("grid:") {
        let (r, c) = dims
            .split_once('x')
            .ok_or_else(|| CliError::Parse(format!("expected grid:RxC, got `{spec}`")))?;
        let rows: usize = r
            .parse()
            .map_err(|_| CliError::Parse(format!("bad grid rows in `{spec}`")))?;
        let cols: usize = c
            .parse()
            .map_err(|_| CliError::Parse(format!("bad grid cols in `{spec}`")))?;
        if rows == 0 || cols == 0 {
            return Err(CliError::Parse("grid dimensions must be positive".into()));
        }
        return Ok((make_grid(rows, cols), format!("grid:{rows}x{cols}")));
    }
    if let Some(n) = spec.strip_prefix("line:") {
        let n: usize = n
            .parse()
            .map_err(|_| CliError::Parse(format!("bad line length in `{spec}`")))?;
        if n == 0 {
            return Err(CliError::Parse("line length must be positive".into()));
        }
        return Ok((make_line(n), format!("line:{n}")));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?;
        let g = TopologyGraph::from_edge_list(&text, max_degree)
            .map_err(|e| CliError::Parse(format!("{path}: {e}")))?;
        return Ok((g, format!("file:{path}")));
    }
    Err(CliError::Parse(format!(
        "unknown topology spec `{spec}` (expected grid:RxC, line:N, or file:PATH)"
    )))
}

/// Smallest square grid holding at least `n` qubits.
pub fn baseline_grid(n: usize) -> (TopologyGraph, String) {
    let side = (1..).find(|s| s * s >= n).expect("side exists");
    (make_grid(side, side), format!("grid:{side}x{side}"))
}

/// Short content hash of a topology's canonical edge-list form.
pub fn topology_hash(g: &TopologyGraph) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(g.to_edge_list().as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    hex[..16].to_string()
}

/// Write the reproducibility snapshot: resolved settings plus their hash and
/// the toolkit version. No timestamps, so reruns are byte-identical.
pub fn write_snapshot(dir: &Path, settings: &str) -> Result<(), CliError> {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(settings.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let body = format!(
        "version = {}\nconfig_hash = {}\n\n{}",
        env!("CARGO_PKG_VERSION"),
        hex,
        settings
    );
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config_snapshot.txt"), body)?;
    Ok(())
}

pub fn config_hash(settings: &str) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(settings.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
