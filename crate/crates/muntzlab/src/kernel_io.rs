//! Kernel sources: built-in names, small expressions over built-ins, and
//! JSON documents.
//!
//! ```text
//! {"name": "bump"}
//! {"name": "tent", "pieces": [{"from": 0, "to": 1, "coeffs": [1, -1]}]}
//! ```

use std::path::{Path, PathBuf};

use muntzlab_core::kernels::Piece;
use muntzlab_core::poly::Polynomial;
use muntzlab_core::PiecewiseKernel;
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse kernel document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("malformed kernel: {0}")]
    Schema(String),
    #[error("kernel {name:?} rejected: {reason}")]
    Validation { name: String, reason: String },
    #[error("cannot parse kernel expression {expr:?}: {reason}")]
    Expression { expr: String, reason: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelDocument {
    name: String,
    #[serde(default)]
    pieces: Option<Vec<PieceDocument>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceDocument {
    from: f64,
    to: f64,
    coeffs: Vec<f64>,
}

/// Parses a kernel document; a document without `pieces` names a built-in.
pub fn parse_kernel_document(json: &str) -> Result<PiecewiseKernel, LoadError> {
    let doc: KernelDocument = serde_json::from_str(json)?;
    match doc.pieces {
        None => builtin(&doc.name),
        Some(pieces) => {
            let pieces = pieces
                .into_iter()
                .map(|p| Piece { from: p.from, to: p.to, poly: Polynomial::new(p.coeffs) })
                .collect();
            PiecewiseKernel::new(doc.name, pieces).map_err(|e| LoadError::Schema(e.to_string()))
        }
    }
}

pub fn load_kernel_file(path: &Path) -> Result<PiecewiseKernel, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.into(), source })?;
    parse_kernel_document(&text)
}

/// The document form of a kernel, loadable by [`parse_kernel_document`].
pub fn kernel_to_json(k: &PiecewiseKernel) -> String {
    serde_json::to_string_pretty(k).expect("kernels serialize")
}

fn builtin(name: &str) -> Result<PiecewiseKernel, LoadError> {
    PiecewiseKernel::builtin(name).ok_or_else(|| {
        LoadError::Schema(format!(
            "unknown built-in kernel {name:?} (known: {})",
            PiecewiseKernel::BUILTIN_NAMES.join(", ")
        ))
    })
}

/// Resolves `--kernel`: an existing file or a `.json` path is loaded as a
/// document, anything else is read as an expression.
pub fn resolve_kernel(source: &str) -> Result<PiecewiseKernel, LoadError> {
    let path = Path::new(source);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        load_kernel_file(path)
    } else {
        parse_expression(source)
    }
}

/// Sums of terms `[c*]name[@λ]`, e.g. `bump - 1.68*bump@2`, where `name@λ`
/// is `t ↦ name(λt)`.
pub fn parse_expression(expr: &str) -> Result<PiecewiseKernel, LoadError> {
    let err = |reason: String| LoadError::Expression { expr: expr.into(), reason };
    let terms = split_terms(expr);
    let mut total: Option<PiecewiseKernel> = None;
    for &(sign, term) in &terms {
        let term = term.trim();
        if term.is_empty() {
            return Err(err("empty term".into()));
        }
        let (coeff, rest) = match term.split_once('*') {
            Some((c, rest)) => (c.trim().parse::<f64>().map_err(|_| err(format!("bad coefficient {c:?}")))?, rest),
            None => (1.0, term),
        };
        let (name, lambda) = match rest.split_once('@') {
            Some((n, l)) => (n.trim(), Some(l.trim().parse::<f64>().map_err(|_| err(format!("bad dilation {l:?}")))?)),
            None => (rest.trim(), None),
        };
        let mut k = builtin(name)?;
        if terms.len() == 1 && sign * coeff == 1.0 && lambda.is_none() {
            return Ok(k);
        }
        if let Some(l) = lambda {
            k = k.dilate(l).map_err(|e| err(e.to_string()))?;
        }
        let k = k.scale(sign * coeff);
        total = Some(match total {
            None => k,
            Some(t) => t.add(&k),
        });
    }
    let k = total.ok_or_else(|| err("no terms".into()))?;
    Ok(k.with_name(expr.trim()))
}

/// Splits at top-level `+`/`-`, leaving exponent signs such as `1e-3` alone.
fn split_terms(expr: &str) -> Vec<(f64, &str)> {
    let bytes = expr.as_bytes();
    let mut out = Vec::new();
    let mut sign = 1.0;
    let mut start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if b != b'+' && b != b'-' {
            continue;
        }
        let exponent = i >= 2 && matches!(bytes[i - 1], b'e' | b'E') && bytes[i - 2].is_ascii_digit();
        let hyphen = b == b'-'
            && i >= 1
            && bytes[i - 1].is_ascii_alphabetic()
            && bytes.get(i + 1).is_some_and(u8::is_ascii_alphabetic);
        if exponent || hyphen {
            continue;
        }
        let head = expr[start..i].trim();
        if head.is_empty() {
            // unary sign
            sign = if b == b'-' { -sign } else { sign };
            start = i + 1;
            continue;
        }
        out.push((sign, &expr[start..i]));
        sign = if b == b'-' { -1.0 } else { 1.0 };
        start = i + 1;
    }
    out.push((sign, &expr[start..]));
    out
}

/// Commands that need a good kernel call this before doing any work.
pub fn require_good(k: &PiecewiseKernel) -> Result<(), LoadError> {
    let report = k.validate();
    if report.is_good {
        Ok(())
    } else {
        Err(LoadError::Validation { name: k.name().into(), reason: format!("not a good kernel; {}", report.notes) })
    }
}
