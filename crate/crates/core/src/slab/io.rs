//! Line-oriented text serialization for trained models.
//!
//! Layout (UTF-8, `\n` line ends):
//!
//! ```text
//! OCSSVM-MODEL v1
//! kernel rbf gamma 0.5
//! params nu1 0.1 nu2 0.01 epsilon 0.6666666666666666
//! offsets rho1 <r1> rho2 <r2>
//! m <m> dim <d>
//! sv <alpha> <alpha_bar> <f1> ... <fd>     (m lines)
//! end <fnv1a-64 of every preceding byte, lowercase hex>
//! ```
//!
//! The baseline variant starts with `OCSVM-MODEL v1` and carries
//! `params nu <..>`, `offsets rho <..>`, and one dual per `sv` line.
//! Floats use shortest round-trip formatting, so a load reproduces every
//! score to the last bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::features::FeatureMatrix;
use crate::kernels::{KernelFamily, KernelSpec};

use super::{OcsvmModel, SlabModel, SlabTrainConfig};

const SLAB_HEADER: &str = "OCSSVM-MODEL v1";
const OCSVM_HEADER: &str = "OCSVM-MODEL v1";

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("unsupported model version: {found:?}")]
    VersionMismatch { found: String },
    #[error("checksum mismatch: file says {stated}, contents hash to {computed}")]
    ChecksumMismatch { stated: String, computed: String },
}

/// Either kind of trained model, as found in a file.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Slab(SlabModel),
    Ocsvm(OcsvmModel),
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn kernel_line(spec: &KernelSpec) -> String {
    match spec.gamma() {
        Some(g) => format!("kernel {} gamma {}", spec.family().name(), g),
        None => format!("kernel {}", spec.family().name()),
    }
}

pub fn save_slab_model(model: &SlabModel, path: &Path) -> Result<(), ModelIoError> {
    let mut out = String::new();
    let _ = writeln!(out, "{SLAB_HEADER}");
    let _ = writeln!(out, "{}", kernel_line(&model.kernel));
    let _ = writeln!(
        out,
        "params nu1 {} nu2 {} epsilon {}",
        model.nu1, model.nu2, model.epsilon
    );
    let _ = writeln!(out, "offsets rho1 {} rho2 {}", model.rho1, model.rho2);
    let _ = writeln!(out, "m {} dim {}", model.m(), model.dim());
    for i in 0..model.m() {
        let _ = write!(out, "sv {} {}", model.alpha[i], model.alpha_bar[i]);
        for &f in model.samples.row(i) {
            let _ = write!(out, " {f}");
        }
        out.push('\n');
    }
    let checksum = fnv1a(out.as_bytes());
    let _ = writeln!(out, "end {checksum:x}");
    fs::write(path, out)?;
    Ok(())
}

pub fn save_ocsvm_model(model: &OcsvmModel, path: &Path) -> Result<(), ModelIoError> {
    let mut out = String::new();
    let _ = writeln!(out, "{OCSVM_HEADER}");
    let _ = writeln!(out, "{}", kernel_line(&model.kernel));
    let _ = writeln!(out, "params nu {}", model.nu);
    let _ = writeln!(out, "offsets rho {}", model.rho);
    let _ = writeln!(out, "m {} dim {}", model.m(), model.dim());
    for i in 0..model.m() {
        let _ = write!(out, "sv {}", model.alpha[i]);
        for &f in model.samples.row(i) {
            let _ = write!(out, " {f}");
        }
        out.push('\n');
    }
    let checksum = fnv1a(out.as_bytes());
    let _ = writeln!(out, "end {checksum:x}");
    fs::write(path, out)?;
    Ok(())
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str), ModelIoError> {
        match self.iter.next() {
            Some((i, line)) => Ok((i + 1, line)),
            None => Err(ModelIoError::Malformed {
                line: 0,
                message: format!("file ends before {what}"),
            }),
        }
    }
}

fn malformed(line: usize, message: impl Into<String>) -> ModelIoError {
    ModelIoError::Malformed {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, token: &str, name: &str) -> Result<f64, ModelIoError> {
    f64::from_str(token).map_err(|_| malformed(line, format!("bad {name}: {token:?}")))
}

fn parse_usize(line: usize, token: &str, name: &str) -> Result<usize, ModelIoError> {
    usize::from_str(token).map_err(|_| malformed(line, format!("bad {name}: {token:?}")))
}

/// Consumes one `key v key v ...` line, checking the literal key tokens.
fn keyed_floats(
    line_no: usize,
    line: &str,
    prefix: &str,
    keys: &[&str],
) -> Result<Vec<f64>, ModelIoError> {
    let mut tokens = line.split_ascii_whitespace();
    if tokens.next() != Some(prefix) {
        return Err(malformed(line_no, format!("expected {prefix:?} line")));
    }
    let mut values = Vec::with_capacity(keys.len());
    for key in keys {
        if tokens.next() != Some(*key) {
            return Err(malformed(line_no, format!("expected field {key:?}")));
        }
        let tok = tokens
            .next()
            .ok_or_else(|| malformed(line_no, format!("missing value for {key:?}")))?;
        values.push(parse_f64(line_no, tok, key)?);
    }
    if tokens.next().is_some() {
        return Err(malformed(line_no, "trailing tokens"));
    }
    Ok(values)
}

fn parse_kernel(line_no: usize, line: &str) -> Result<KernelSpec, ModelIoError> {
    let mut tokens = line.split_ascii_whitespace();
    if tokens.next() != Some("kernel") {
        return Err(malformed(line_no, "expected kernel line"));
    }
    let family_tok = tokens
        .next()
        .ok_or_else(|| malformed(line_no, "missing kernel family"))?;
    let family = KernelFamily::from_str(family_tok)
        .map_err(|_| malformed(line_no, format!("unknown kernel family {family_tok:?}")))?;
    let gamma = match tokens.next() {
        None => None,
        Some("gamma") => {
            let tok = tokens
                .next()
                .ok_or_else(|| malformed(line_no, "missing gamma value"))?;
            Some(parse_f64(line_no, tok, "gamma")?)
        }
        Some(other) => {
            return Err(malformed(line_no, format!("unexpected token {other:?}")));
        }
    };
    if tokens.next().is_some() {
        return Err(malformed(line_no, "trailing tokens"));
    }
    KernelSpec::new(family, gamma).map_err(|e| malformed(line_no, e.to_string()))
}

fn parse_shape(line_no: usize, line: &str) -> Result<(usize, usize), ModelIoError> {
    let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
    match tokens.as_slice() {
        ["m", m, "dim", d] => Ok((
            parse_usize(line_no, m, "m")?,
            parse_usize(line_no, d, "dim")?,
        )),
        _ => Err(malformed(line_no, "expected `m <..> dim <..>` line")),
    }
}

/// Splits the trailing `end <hex>` line off and verifies the checksum of
/// everything before it.
fn verify_checksum(contents: &str) -> Result<&str, ModelIoError> {
    let trimmed = contents.strip_suffix('\n').unwrap_or(contents);
    let (body_end, last) = match trimmed.rfind('\n') {
        Some(pos) => (pos + 1, &trimmed[pos + 1..]),
        None => (0, trimmed),
    };
    let stated = last
        .strip_prefix("end ")
        .ok_or_else(|| malformed(0, "missing `end <checksum>` line"))?
        .trim();
    let computed = fnv1a(&contents.as_bytes()[..body_end]);
    let computed_hex = format!("{computed:x}");
    if stated != computed_hex {
        return Err(ModelIoError::ChecksumMismatch {
            stated: stated.to_string(),
            computed: computed_hex,
        });
    }
    Ok(&contents[..body_end])
}

fn parse_sv_line(
    line_no: usize,
    line: &str,
    duals: usize,
    dim: usize,
) -> Result<Vec<f64>, ModelIoError> {
    let mut tokens = line.split_ascii_whitespace();
    if tokens.next() != Some("sv") {
        return Err(malformed(line_no, "expected sv line"));
    }
    let mut values = Vec::with_capacity(duals + dim);
    for tok in tokens {
        values.push(parse_f64(line_no, tok, "sv value")?);
    }
    if values.len() != duals + dim {
        return Err(malformed(
            line_no,
            format!(
                "sv line has {} values, expected {}",
                values.len(),
                duals + dim
            ),
        ));
    }
    Ok(values)
}

pub fn load_model(path: &Path) -> Result<AnyModel, ModelIoError> {
    let contents = fs::read_to_string(path)?;
    let body = verify_checksum(&contents)?;
    let mut lines = Lines {
        iter: body.lines().enumerate(),
    };
    let (line_no, header) = lines.next("header")?;
    match header {
        SLAB_HEADER => load_slab_body(lines).map(AnyModel::Slab),
        OCSVM_HEADER => load_ocsvm_body(lines).map(AnyModel::Ocsvm),
        other => {
            let _ = line_no;
            Err(ModelIoError::VersionMismatch {
                found: other.to_string(),
            })
        }
    }
}

pub fn load_slab_model(path: &Path) -> Result<SlabModel, ModelIoError> {
    match load_model(path)? {
        AnyModel::Slab(m) => Ok(m),
        AnyModel::Ocsvm(_) => Err(ModelIoError::VersionMismatch {
            found: OCSVM_HEADER.to_string(),
        }),
    }
}

pub fn load_ocsvm_model(path: &Path) -> Result<OcsvmModel, ModelIoError> {
    match load_model(path)? {
        AnyModel::Ocsvm(m) => Ok(m),
        AnyModel::Slab(_) => Err(ModelIoError::VersionMismatch {
            found: SLAB_HEADER.to_string(),
        }),
    }
}

fn load_slab_body(mut lines: Lines) -> Result<SlabModel, ModelIoError> {
    let (no, line) = lines.next("kernel line")?;
    let kernel = parse_kernel(no, line)?;
    let (no, line) = lines.next("params line")?;
    let params = keyed_floats(no, line, "params", &["nu1", "nu2", "epsilon"])?;
    let (no, line) = lines.next("offsets line")?;
    let offsets = keyed_floats(no, line, "offsets", &["rho1", "rho2"])?;
    let (no, line) = lines.next("shape line")?;
    let (m, dim) = parse_shape(no, line)?;

    let mut alpha = Vec::with_capacity(m);
    let mut alpha_bar = Vec::with_capacity(m);
    let mut flat = Vec::with_capacity(m * dim);
    for _ in 0..m {
        let (no, line) = lines.next("sv line")?;
        let values = parse_sv_line(no, line, 2, dim)?;
        alpha.push(values[0]);
        alpha_bar.push(values[1]);
        flat.extend_from_slice(&values[2..]);
    }
    if let Some((i, extra)) = lines.iter.next() {
        return Err(malformed(i + 1, format!("unexpected line {extra:?}")));
    }
    let samples = FeatureMatrix::from_flat(flat, dim)
        .map_err(|e| malformed(0, format!("bad sample block: {e}")))?;

    // Counts and flags are derived quantities; recompute them so a loaded
    // model behaves identically to the one that was saved.
    let config = SlabTrainConfig {
        nu1: params[0],
        nu2: params[1],
        epsilon: params[2],
        kernel,
        solver: crate::qp::SolverConfig::default(),
        sv_bound_tolerance: 1e-6,
    };
    config
        .validate()
        .map_err(|e| malformed(0, format!("bad params: {e}")))?;
    let cap1 = 1.0 / (config.nu1 * m as f64);
    let cap2 = config.epsilon / (config.nu2 * m as f64);
    let band1 = config.sv_bound_tolerance * cap1;
    let band2 = config.sv_bound_tolerance * cap2;
    let n_sv1 = (0..m)
        .filter(|&i| alpha[i] > band1 && alpha[i] < cap1 - band1)
        .count();
    let n_sv2 = (0..m)
        .filter(|&i| alpha_bar[i] > band2 && alpha_bar[i] < cap2 - band2)
        .count();
    let (retained, retained_coeffs) = super::retained_set(&alpha, &alpha_bar);
    let rho1 = offsets[0];
    let rho2 = offsets[1];
    Ok(SlabModel {
        kernel,
        nu1: params[0],
        nu2: params[1],
        epsilon: params[2],
        sv_bound_tolerance: config.sv_bound_tolerance,
        samples,
        alpha,
        alpha_bar,
        rho1,
        rho2,
        n_sv1,
        n_sv2,
        retained,
        retained_coeffs,
        converged: true,
        offset_fallback: n_sv1 == 0 || n_sv2 == 0,
        degenerate: rho2 - rho1 <= super::DEGENERACY_TOLERANCE,
        solver_iterations: 0,
    })
}

fn load_ocsvm_body(mut lines: Lines) -> Result<OcsvmModel, ModelIoError> {
    let (no, line) = lines.next("kernel line")?;
    let kernel = parse_kernel(no, line)?;
    let (no, line) = lines.next("params line")?;
    let params = keyed_floats(no, line, "params", &["nu"])?;
    let (no, line) = lines.next("offsets line")?;
    let offsets = keyed_floats(no, line, "offsets", &["rho"])?;
    let (no, line) = lines.next("shape line")?;
    let (m, dim) = parse_shape(no, line)?;

    let mut alpha = Vec::with_capacity(m);
    let mut flat = Vec::with_capacity(m * dim);
    for _ in 0..m {
        let (no, line) = lines.next("sv line")?;
        let values = parse_sv_line(no, line, 1, dim)?;
        alpha.push(values[0]);
        flat.extend_from_slice(&values[1..]);
    }
    if let Some((i, extra)) = lines.iter.next() {
        return Err(malformed(i + 1, format!("unexpected line {extra:?}")));
    }
    let samples = FeatureMatrix::from_flat(flat, dim)
        .map_err(|e| malformed(0, format!("bad sample block: {e}")))?;

    let nu = params[0];
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(malformed(0, format!("nu = {nu} out of range")));
    }
    let cap = 1.0 / (nu * m as f64);
    let band = 1e-6 * cap;
    let n_sv = (0..m)
        .filter(|&i| alpha[i] > band && alpha[i] < cap - band)
        .count();
    let mut retained = Vec::new();
    let mut retained_coeffs = Vec::new();
    for (i, &a) in alpha.iter().enumerate() {
        if a > super::PRUNE_TOLERANCE {
            retained.push(i);
            retained_coeffs.push(a);
        }
    }
    Ok(OcsvmModel {
        kernel,
        nu,
        samples,
        alpha,
        rho: offsets[0],
        n_sv,
        retained,
        retained_coeffs,
        converged: true,
        offset_fallback: n_sv == 0,
        solver_iterations: 0,
    })
}
