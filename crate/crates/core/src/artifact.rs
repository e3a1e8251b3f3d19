//! Canonical serialization of the shared recurrent cell.
//!
//! Layout (UTF-8, `\n` line endings):
//!
//! ```text
//! ukadf-artifact
//! format_version=1
//! embed_dim=<K>
//! hidden_dim=<m>
//! meta.source_mode=<label>
//! meta.created=<label>
//! meta.config.<key>=<value>        zero or more, in insertion order
//! tensor W_i <m> <K>
//! <row of K values>                m rows
//! ...                              W_f W_o W_theta, U_i..U_theta (m x m), b_i..b_theta (m x 1)
//! checksum=<sha256 hex of every preceding byte>
//! ```
//!
//! Values are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite `f64` exactly. Only the cell is written: no
//! encoder, predictor or decoder weights and no demand values.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::models::PretrainNet;
use crate::nn::{LstmCellParams, Matrix, GATES};

pub const FORMAT_VERSION: u32 = 1;
pub const MAGIC: &str = "ukadf-artifact";
pub const FILE_EXTENSION: &str = "ukadf";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArtifactMetadata {
    pub source_mode: String,
    pub created: String,
    /// Training configuration echo.
    pub config: Vec<(String, String)>,
}

impl ArtifactMetadata {
    pub fn new(source_mode: impl Into<String>, created: impl Into<String>) -> Self {
        ArtifactMetadata {
            source_mode: source_mode.into(),
            created: created.into(),
            config: Vec::new(),
        }
    }

    pub fn with_config(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.config.push((key.into(), value.to_string()));
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |s: &str| s.contains(['\n', '\r']);
        if bad(&self.source_mode) || bad(&self.created) {
            return Err(Error::RefuseToSave("metadata values must be single-line".into()));
        }
        for (k, v) in &self.config {
            if bad(k) || bad(v) || k.contains('=') || k.is_empty() {
                return Err(Error::RefuseToSave(format!("invalid metadata entry '{k}'")));
            }
        }
        Ok(())
    }
}

/// The shareable pretrained cell with its checksum.
#[derive(Debug, Clone, PartialEq)]
pub struct PretrainedArtifact {
    format_version: u32,
    cell: LstmCellParams,
    metadata: ArtifactMetadata,
    checksum: [u8; 32],
}

impl PretrainedArtifact {
    /// Extracts the recurrent cell of a trained pre-training network.
    pub fn from_net(net: &PretrainNet, metadata: ArtifactMetadata) -> Result<Self> {
        Self::from_cell(net.lstm().to_params(), metadata)
    }

    pub fn from_cell(cell: LstmCellParams, metadata: ArtifactMetadata) -> Result<Self> {
        cell.validate()?;
        if !cell.is_finite() {
            return Err(Error::RefuseToSave("cell contains non-finite weights".into()));
        }
        metadata.validate()?;
        let mut a = PretrainedArtifact {
            format_version: FORMAT_VERSION,
            cell,
            metadata,
            checksum: [0; 32],
        };
        a.checksum = Sha256::digest(a.body().as_bytes()).into();
        Ok(a)
    }

    pub fn format_version(&self) -> u32 {
        self.format_version
    }

    pub fn embed_dim(&self) -> usize {
        self.cell.input_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.cell.hidden_dim()
    }

    pub fn cell(&self) -> &LstmCellParams {
        &self.cell
    }

    pub fn metadata(&self) -> &ArtifactMetadata {
        &self.metadata
    }

    pub fn checksum(&self) -> [u8; 32] {
        self.checksum
    }

    pub fn checksum_hex(&self) -> String {
        hex(&self.checksum)
    }

    /// Everything before the checksum line.
    fn body(&self) -> String {
        let mut s = String::new();
        let (k, m) = (self.embed_dim(), self.hidden_dim());
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "format_version={}", self.format_version);
        let _ = writeln!(s, "embed_dim={k}");
        let _ = writeln!(s, "hidden_dim={m}");
        let _ = writeln!(s, "meta.source_mode={}", self.metadata.source_mode);
        let _ = writeln!(s, "meta.created={}", self.metadata.created);
        for (key, v) in &self.metadata.config {
            let _ = writeln!(s, "meta.config.{key}={v}");
        }
        for g in 0..4 {
            write_tensor(&mut s, &format!("W_{}", GATES[g]), &self.cell.w[g]);
        }
        for g in 0..4 {
            write_tensor(&mut s, &format!("U_{}", GATES[g]), &self.cell.u[g]);
        }
        for g in 0..4 {
            write_tensor(&mut s, &format!("b_{}", GATES[g]), &Matrix::column(&self.cell.b[g]));
        }
        s
    }

    /// Canonical file bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut s = self.body();
        let _ = writeln!(s, "checksum={}", self.checksum_hex());
        s.into_bytes()
    }

    /// Parses and verifies canonical bytes.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let text = core::str::from_utf8(bytes)
            .map_err(|_| Error::MalformedArtifact("not valid UTF-8".into()))?;
        let mut lines = text.split_inclusive('\n');
        let magic = lines.next().unwrap_or("");
        if magic.trim_end() != MAGIC {
            return Err(Error::MalformedArtifact("missing header line".into()));
        }
        let version_line = lines.next().unwrap_or("").trim_end();
        let version: u32 = version_line
            .strip_prefix("format_version=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::MalformedArtifact("missing format_version".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::Version(version));
        }

        let body_end = text
            .rfind("\nchecksum=")
            .map(|p| p + 1)
            .ok_or_else(|| Error::MalformedArtifact("missing checksum line".into()))?;
        let stored = text[body_end + "checksum=".len()..].trim_end();
        if text[body_end..].lines().count() != 1 || !text.ends_with('\n') {
            return Err(Error::MalformedArtifact("trailing data after checksum".into()));
        }
        let computed = hex(&Sha256::digest(&bytes[..body_end]));
        if stored != computed {
            return Err(Error::Corruption {
                stored: stored.into(),
                computed,
            });
        }

        let mut body = text[..body_end].lines().skip(2).peekable();
        let mut field = |name: &str| -> Result<usize> {
            body.next()
                .and_then(|l| l.strip_prefix(name))
                .and_then(|l| l.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::MalformedArtifact(format!("missing {name}")))
        };
        let k = field("embed_dim")?;
        let m = field("hidden_dim")?;
        let mut metadata = ArtifactMetadata::default();
        let mut seen_mode = false;
        let mut seen_created = false;
        while let Some(line) = body.peek() {
            let Some(rest) = line.strip_prefix("meta.") else {
                break;
            };
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| Error::MalformedArtifact(format!("bad metadata line '{line}'")))?;
            match key {
                "source_mode" => {
                    metadata.source_mode = value.into();
                    seen_mode = true;
                }
                "created" => {
                    metadata.created = value.into();
                    seen_created = true;
                }
                _ => {
                    let key = key.strip_prefix("config.").ok_or_else(|| {
                        Error::MalformedArtifact(format!("unknown metadata key '{key}'"))
                    })?;
                    metadata.config.push((key.into(), value.into()));
                }
            }
            body.next();
        }
        if !(seen_mode && seen_created) {
            return Err(Error::MalformedArtifact("incomplete metadata".into()));
        }
        let mut read = |name: String, rows: usize, cols: usize| read_tensor(&mut body, &name, rows, cols);
        let mut cell = LstmCellParams::zeros(k, m);
        for g in 0..4 {
            cell.w[g] = read(format!("W_{}", GATES[g]), m, k)?;
        }
        for g in 0..4 {
            cell.u[g] = read(format!("U_{}", GATES[g]), m, m)?;
        }
        for g in 0..4 {
            cell.b[g] = read(format!("b_{}", GATES[g]), m, 1)?.into_vec();
        }
        if body.next().is_some() {
            return Err(Error::MalformedArtifact("unexpected lines after tensors".into()));
        }
        if !cell.is_finite() {
            return Err(Error::MalformedArtifact("non-finite weight".into()));
        }
        let artifact = PretrainedArtifact::from_cell(cell, metadata)?;
        debug_assert_eq!(artifact.checksum_hex(), computed);
        Ok(artifact)
    }
}

fn write_tensor(s: &mut String, name: &str, m: &Matrix) {
    let _ = writeln!(s, "tensor {name} {} {}", m.rows(), m.cols());
    for r in 0..m.rows() {
        for (c, v) in m.row(r).iter().enumerate() {
            if c > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{v:.16e}");
        }
        s.push('\n');
    }
}

fn read_tensor<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    name: &str,
    rows: usize,
    cols: usize,
) -> Result<Matrix> {
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedArtifact(format!("missing tensor {name}")))?;
    let expected = format!("tensor {name} {rows} {cols}");
    if header != expected {
        return Err(Error::MalformedArtifact(format!(
            "expected '{expected}', found '{header}'"
        )));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::MalformedArtifact(format!("{name} is missing row {r}")))?;
        let before = data.len();
        for tok in line.split(' ') {
            data.push(tok.parse::<f64>().map_err(|_| {
                Error::MalformedArtifact(format!("{name} row {r}: bad value '{tok}'"))
            })?);
        }
        if data.len() - before != cols {
            return Err(Error::MalformedArtifact(format!(
                "{name} row {r} has {} values, expected {cols}",
                data.len() - before
            )));
        }
    }
    Matrix::from_vec(rows, cols, data)
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}
