//! The versioned JSON schema (`"version": "1"`).
//!
//! - Complex numbers are `[re, im]`; matrices are row-major nested arrays.
//! - Algebras are `{"factors": [...]}`.
//! - Channels carry explicit Choi blocks `{"i", "j", "matrix"}`.
//! - Pure states are `{"h1", "h2", "omega"}`, mixed ones `{"h1", "h2", "components": [{"weight", "omega"}]}`.
//!
//! Unknown fields are rejected and every error carries a JSON pointer.
//!
//! ```
//! use entverify::format::{parse_state, state_to_json, ParseOptions};
//! use entverify::algebra::ResourceState;
//! let w = ResourceState::max_entangled(2);
//! let text = state_to_json(&w);
//! assert_eq!(parse_state(&text, &ParseOptions::default()).unwrap(), w);
//! ```

use crate::algebra::{MultimatrixAlgebra, ResourceState, StateKind};
use crate::channel::{Channel, Dilation, TraceConvention};
use crate::diagram::{keys, BlockMap, Chain, OneMorphism};
use crate::linalg::{hermitian_part, min_eig, op_norm, zeros, CMat, C64};
use crate::ueb::UnitaryErrorBasis;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";

/// Negative Choi eigenvalues below this are rejected on parse.
pub const PARSE_PSD_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("{pointer}: {message}")]
    Json { pointer: String, message: String },
    #[error("/version: unsupported schema version {0:?} (expected \"1\")")]
    Version(String),
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("{pointer}: Choi block ({i}, {j}) has eigenvalue {min_eig:e}")]
    NotPositive { pointer: String, i: usize, j: usize, min_eig: f64 },
    #[error("{pointer}: state norm is {value} (use --renormalize to rescale)")]
    NotNormalized { pointer: String, value: f64 },
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Schema { pointer: pointer.into(), message: message.into() }
}

/// Switches for parsing.
#[derive(Clone, Copy, Debug)]
pub struct ParseOptions {
    /// Reject Choi blocks with eigenvalues below `-PARSE_PSD_TOL`.
    pub check_psd: bool,
    /// Rescale states instead of rejecting them.
    pub renormalize: bool,
    /// Tolerance for state normalization and UEB axioms.
    pub tol: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { check_psd: true, renormalize: false, tol: 1e-9 }
    }
}

impl ParseOptions {
    /// No positivity check, so `check-cp` can report on invalid input.
    pub fn lenient() -> Self {
        ParseOptions { check_psd: false, ..Default::default() }
    }
}

type Mat = Vec<Vec<[f64; 2]>>;

fn mat_to_json(m: &CMat) -> Mat {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|s| [m[(r, s)].re, m[(r, s)].im]).collect()).collect()
}

fn mat_from_json(m: &Mat, pointer: &str) -> Result<CMat, FormatError> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if let Some(k) = m.iter().position(|r| r.len() != cols) {
        return Err(schema(format!("{pointer}/{k}"), format!("ragged matrix: row has {} entries, expected {cols}", m[k].len())));
    }
    Ok(CMat::from_fn(rows, cols, |r, s| C64::new(m[r][s][0], m[r][s][1])))
}

/// Empty JSON matrices carry no column count; give them the expected shape.
fn fit_empty(m: CMat, rows: usize, cols: usize) -> CMat {
    if m.is_empty() && rows * cols == 0 {
        zeros(rows, cols)
    } else {
        m
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

fn from_str<T: DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        FormatError::Json { pointer, message: e.into_inner().to_string() }
    })
}

fn check_version(v: &str) -> Result<(), FormatError> {
    if v != SCHEMA_VERSION {
        return Err(FormatError::Version(v.to_string()));
    }
    Ok(())
}

fn to_string<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraBody {
    pub factors: Vec<usize>,
}

fn algebra_from(body: &AlgebraBody, pointer: &str) -> Result<MultimatrixAlgebra, FormatError> {
    MultimatrixAlgebra::new(body.factors.clone()).map_err(|e| schema(format!("{pointer}/factors"), e.to_string()))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraDoc {
    version: String,
    factors: Vec<usize>,
}

pub fn algebra_to_json(a: &MultimatrixAlgebra) -> String {
    to_string(&AlgebraDoc { version: SCHEMA_VERSION.into(), factors: a.factors().to_vec() })
}

pub fn parse_algebra(text: &str) -> Result<MultimatrixAlgebra, FormatError> {
    let doc: AlgebraDoc = from_str(text)?;
    check_version(&doc.version)?;
    algebra_from(&AlgebraBody { factors: doc.factors }, "")
}

// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockEntry {
    i: usize,
    j: usize,
    matrix: Mat,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelDoc {
    version: String,
    source: AlgebraBody,
    target: AlgebraBody,
    aux_dim: usize,
    trace_convention: TraceConvention,
    choi_blocks: Vec<BlockEntry>,
}

fn blocks_to_json(blocks: &[CMat], n: usize) -> Vec<BlockEntry> {
    blocks.iter().enumerate().map(|(k, b)| BlockEntry { i: k / n, j: k % n, matrix: mat_to_json(b) }).collect()
}

/// Collect `{"i", "j", "matrix"}` entries into row-major order, each pair exactly once.
fn blocks_from_json(entries: &[BlockEntry], m: usize, n: usize, field: &str) -> Result<Vec<CMat>, FormatError> {
    let mut out: Vec<Option<CMat>> = vec![None; m * n];
    for (k, e) in entries.iter().enumerate() {
        let p = format!("/{field}/{k}");
        if e.i >= m || e.j >= n {
            return Err(schema(p, format!("block ({}, {}) is out of range for {m}×{n} factors", e.i, e.j)));
        }
        if out[e.i * n + e.j].is_some() {
            return Err(schema(p, format!("block ({}, {}) appears twice", e.i, e.j)));
        }
        out[e.i * n + e.j] = Some(mat_from_json(&e.matrix, &format!("{p}/matrix"))?);
    }
    out.into_iter()
        .enumerate()
        .map(|(k, b)| b.ok_or_else(|| schema(format!("/{field}"), format!("block ({}, {}) is missing", k / n, k % n))))
        .collect()
}

pub fn channel_to_value(ch: &Channel) -> serde_json::Value {
    serde_json::to_value(ChannelDoc {
        version: SCHEMA_VERSION.into(),
        source: AlgebraBody { factors: ch.source().factors().to_vec() },
        target: AlgebraBody { factors: ch.target().factors().to_vec() },
        aux_dim: ch.aux_dim(),
        trace_convention: ch.convention(),
        choi_blocks: blocks_to_json(ch.choi_blocks(), ch.target().num_factors()),
    })
    .expect("serializable")
}

pub fn channel_to_json(ch: &Channel) -> String {
    to_string(&channel_to_value(ch))
}

pub fn parse_channel(text: &str, opts: &ParseOptions) -> Result<Channel, FormatError> {
    let doc: ChannelDoc = from_str(text)?;
    check_version(&doc.version)?;
    let source = algebra_from(&doc.source, "/source")?;
    let target = algebra_from(&doc.target, "/target")?;
    let (m, n) = (source.num_factors(), target.num_factors());
    let blocks = blocks_from_json(&doc.choi_blocks, m, n, "choi_blocks")?;
    let h = doc.aux_dim.max(1);
    for (k, b) in blocks.iter().enumerate() {
        let (i, j) = (k / n, k % n);
        let want = h * source.factors()[i] * target.factors()[j];
        if b.nrows() != want || b.ncols() != want {
            let pos = doc.choi_blocks.iter().position(|e| e.i == i && e.j == j).unwrap_or(k);
            return Err(schema(
                format!("/choi_blocks/{pos}/matrix"),
                format!("Choi block ({i}, {j}) has shape {}×{}, expected {want}×{want}", b.nrows(), b.ncols()),
            ));
        }
    }
    if opts.check_psd {
        for (k, b) in blocks.iter().enumerate() {
            let (i, j) = (k / n, k % n);
            let pointer = format!(
                "/choi_blocks/{}/matrix",
                doc.choi_blocks.iter().position(|e| e.i == i && e.j == j).unwrap_or(k)
            );
            if b.nrows() == b.ncols() && b.nrows() > 0 {
                let asym = op_norm(&(b - b.adjoint()));
                if asym > PARSE_PSD_TOL * op_norm(b).max(1.0) {
                    return Err(schema(pointer, format!("Choi block ({i}, {j}) is not Hermitian (‖C − C†‖ = {asym:e})")));
                }
                let e = min_eig(&hermitian_part(b));
                if e < -PARSE_PSD_TOL {
                    return Err(FormatError::NotPositive { pointer, i, j, min_eig: e });
                }
            }
        }
    }
    Channel::from_choi(source, target, doc.aux_dim, doc.trace_convention, blocks)
        .map_err(|e| schema("/choi_blocks", e.to_string()))
}

// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    weight: f64,
    omega: Mat,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    version: String,
    h1: usize,
    h2: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega: Option<Mat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    components: Option<Vec<ComponentDoc>>,
}

pub fn state_to_value(w: &ResourceState) -> serde_json::Value {
    let (omega, components) = match w.kind() {
        StateKind::Pure(o) => (Some(mat_to_json(o)), None),
        StateKind::Mixed(cs) => {
            (None, Some(cs.iter().map(|(p, o)| ComponentDoc { weight: *p, omega: mat_to_json(o) }).collect()))
        }
    };
    serde_json::to_value(StateDoc { version: SCHEMA_VERSION.into(), h1: w.h1(), h2: w.h2(), omega, components })
        .expect("serializable")
}

pub fn state_to_json(w: &ResourceState) -> String {
    to_string(&state_to_value(w))
}

fn check_omega_shape(o: &CMat, h1: usize, h2: usize, pointer: &str) -> Result<(), FormatError> {
    if o.nrows() != h2 || o.ncols() != h1 {
        return Err(schema(pointer, format!("ω is {}×{}, expected h2×h1 = {h2}×{h1}", o.nrows(), o.ncols())));
    }
    Ok(())
}

fn omega_norm(o: &CMat, h1: usize, h2: usize) -> f64 {
    ((h1 * h2) as f64).sqrt() * o.iter().map(|x| x.norm_sqr()).sum::<f64>()
}

pub fn parse_state(text: &str, opts: &ParseOptions) -> Result<ResourceState, FormatError> {
    let doc: StateDoc = from_str(text)?;
    check_version(&doc.version)?;
    let (h1, h2) = (doc.h1, doc.h2);
    if h1 == 0 || h2 == 0 {
        return Err(schema("/h1", "h1 and h2 must be positive"));
    }
    match (&doc.omega, &doc.components) {
        (Some(o), None) => {
            let o = mat_from_json(o, "/omega")?;
            check_omega_shape(&o, h1, h2, "/omega")?;
            let n = omega_norm(&o, h1, h2);
            if (n - 1.0).abs() > opts.tol && !opts.renormalize {
                return Err(FormatError::NotNormalized { pointer: "/omega".into(), value: n });
            }
            ResourceState::pure_normalized(o).map_err(|e| schema("/omega", e.to_string()))
        }
        (None, Some(cs)) => {
            if cs.is_empty() {
                return Err(schema("/components", "at least one component is needed"));
            }
            let mut comps = vec![];
            for (k, cdoc) in cs.iter().enumerate() {
                let p = format!("/components/{k}");
                let o = mat_from_json(&cdoc.omega, &format!("{p}/omega"))?;
                check_omega_shape(&o, h1, h2, &format!("{p}/omega"))?;
                if !(cdoc.weight > 0.0) {
                    return Err(schema(format!("{p}/weight"), "weights must be positive"));
                }
                let n = omega_norm(&o, h1, h2);
                if n == 0.0 {
                    return Err(schema(format!("{p}/omega"), "zero component"));
                }
                if (n - 1.0).abs() > opts.tol && !opts.renormalize {
                    return Err(FormatError::NotNormalized { pointer: format!("{p}/omega"), value: n });
                }
                comps.push((cdoc.weight, o / crate::linalg::c(n.sqrt())));
            }
            let total: f64 = comps.iter().map(|(p, _)| p).sum();
            if (total - 1.0).abs() > opts.tol {
                if !opts.renormalize {
                    return Err(FormatError::NotNormalized { pointer: "/components".into(), value: total });
                }
                for comp in comps.iter_mut() {
                    comp.0 /= total;
                }
            }
            ResourceState::mixed(h1, h2, comps, 1e-9).map_err(|e| schema("/components", e.to_string()))
        }
        _ => Err(schema("", "exactly one of \"omega\" and \"components\" is required")),
    }
}

// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DilationDoc {
    version: String,
    source: AlgebraBody,
    target: AlgebraBody,
    aux_dim: usize,
    /// `env_dims[j][i]`.
    env_dims: Vec<Vec<usize>>,
    tau_blocks: Vec<BlockEntry>,
}

pub fn dilation_to_value(d: &Dilation) -> serde_json::Value {
    let (m, n) = (d.source().num_factors(), d.target().num_factors());
    let blocks: Vec<CMat> = (0..m * n).map(|k| d.tau_block(k / n, k % n).clone()).collect();
    serde_json::to_value(DilationDoc {
        version: SCHEMA_VERSION.into(),
        source: AlgebraBody { factors: d.source().factors().to_vec() },
        target: AlgebraBody { factors: d.target().factors().to_vec() },
        aux_dim: d.aux_dim(),
        env_dims: d.env_dims().to_vec(),
        tau_blocks: blocks_to_json(&blocks, n),
    })
    .expect("serializable")
}

pub fn dilation_to_json(d: &Dilation) -> String {
    to_string(&dilation_to_value(d))
}

pub fn parse_dilation(text: &str) -> Result<Dilation, FormatError> {
    let doc: DilationDoc = from_str(text)?;
    check_version(&doc.version)?;
    let source = algebra_from(&doc.source, "/source")?;
    let target = algebra_from(&doc.target, "/target")?;
    let (m, n) = (source.num_factors(), target.num_factors());
    let blocks = blocks_from_json(&doc.tau_blocks, m, n, "tau_blocks")?;
    let h = doc.aux_dim.max(1);
    let blocks = blocks
        .into_iter()
        .enumerate()
        .map(|(k, b)| {
            let (i, j) = (k / n, k % n);
            let r = doc.env_dims.get(j).and_then(|row| row.get(i)).copied().unwrap_or(0);
            fit_empty(b, target.factors()[j] * r, h * source.factors()[i])
        })
        .collect();
    Dilation::from_blocks(source, target, doc.aux_dim, doc.env_dims, blocks).map_err(|e| schema("/tau_blocks", e.to_string()))
}

// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireDoc {
    dims: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainDoc {
    start: usize,
    wires: Vec<WireDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyedBlock {
    source_key: Vec<usize>,
    target_key: Vec<usize>,
    matrix: Mat,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockMapDoc {
    version: String,
    source: ChainDoc,
    target: ChainDoc,
    blocks: Vec<KeyedBlock>,
}

fn chain_to_doc(ch: &Chain) -> ChainDoc {
    ChainDoc { start: ch.start(), wires: ch.wires().iter().map(|w| WireDoc { dims: w.dims().to_vec() }).collect() }
}

fn chain_from_doc(doc: &ChainDoc, pointer: &str) -> Result<Chain, FormatError> {
    if doc.wires.is_empty() {
        return Ok(Chain::empty(doc.start));
    }
    let mut wires = vec![];
    for (k, w) in doc.wires.iter().enumerate() {
        wires.push(OneMorphism::new(w.dims.clone()).map_err(|e| schema(format!("{pointer}/wires/{k}"), e.to_string()))?);
    }
    let ch = Chain::new(wires).map_err(|e| schema(format!("{pointer}/wires"), e.to_string()))?;
    if ch.start() != doc.start {
        return Err(schema(format!("{pointer}/start"), format!("first wire starts at a region of size {}", ch.start())));
    }
    Ok(ch)
}

pub fn blockmap_to_value(b: &BlockMap) -> serde_json::Value {
    let blocks = b
        .keys()
        .into_iter()
        .zip(b.blocks())
        .map(|((s, t), m)| KeyedBlock { source_key: s, target_key: t, matrix: mat_to_json(m) })
        .collect();
    serde_json::to_value(BlockMapDoc {
        version: SCHEMA_VERSION.into(),
        source: chain_to_doc(b.source()),
        target: chain_to_doc(b.target()),
        blocks,
    })
    .expect("serializable")
}

pub fn blockmap_to_json(b: &BlockMap) -> String {
    to_string(&blockmap_to_value(b))
}

pub fn parse_blockmap(text: &str) -> Result<BlockMap, FormatError> {
    let doc: BlockMapDoc = from_str(text)?;
    check_version(&doc.version)?;
    let source = chain_from_doc(&doc.source, "/source")?;
    let target = chain_from_doc(&doc.target, "/target")?;
    let ks = keys(&source, &target);
    if ks.len() != doc.blocks.len() {
        return Err(schema("/blocks", format!("expected {} blocks, got {}", ks.len(), doc.blocks.len())));
    }
    let mut mats = vec![];
    for (k, ((s, t), blk)) in ks.iter().zip(&doc.blocks).enumerate() {
        if *s != blk.source_key || *t != blk.target_key {
            return Err(schema(format!("/blocks/{k}"), format!("expected key ({s:?}, {t:?}) in canonical order")));
        }
        let mat = mat_from_json(&blk.matrix, &format!("/blocks/{k}/matrix"))?;
        mats.push(fit_empty(mat, target.total_dim(t), source.total_dim(s)));
    }
    BlockMap::new(source, target, mats).map_err(|e| schema("/blocks", e.to_string()))
}

// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UebDoc {
    version: String,
    d: usize,
    elements: Vec<Mat>,
}

pub fn ueb_to_value(u: &UnitaryErrorBasis) -> serde_json::Value {
    serde_json::to_value(UebDoc {
        version: SCHEMA_VERSION.into(),
        d: u.d(),
        elements: u.elements().iter().map(mat_to_json).collect(),
    })
    .expect("serializable")
}

pub fn ueb_to_json(u: &UnitaryErrorBasis) -> String {
    to_string(&ueb_to_value(u))
}

/// Raw matrices of a UEB file, either `{"version", "d", "elements"}` or a bare array.
pub fn parse_matrices(text: &str) -> Result<Vec<CMat>, FormatError> {
    let bare = text.trim_start().starts_with('[');
    let (mats, prefix) = if bare {
        (from_str::<Vec<Mat>>(text)?, String::new())
    } else {
        let doc: UebDoc = from_str(text)?;
        check_version(&doc.version)?;
        if doc.elements.iter().any(|m| m.len() != doc.d) {
            return Err(schema("/elements", format!("every element must be {0}×{0}", doc.d)));
        }
        (doc.elements, "/elements".to_string())
    };
    mats.iter().enumerate().map(|(k, m)| mat_from_json(m, &format!("{prefix}/{k}"))).collect()
}

pub fn parse_ueb(text: &str, opts: &ParseOptions) -> Result<UnitaryErrorBasis, FormatError> {
    let mats = parse_matrices(text)?;
    UnitaryErrorBasis::new(mats, opts.tol).map_err(|e| schema("", e.to_string()))
}

// ---------------------------------------------------------------------------

/// The output of every command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub version: String,
    pub command: String,
    /// `None` for constructions.
    pub verdict: Option<bool>,
    pub residuals: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub certificates: BTreeMap<String, serde_json::Value>,
    pub tolerances: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            version: SCHEMA_VERSION.into(),
            command: command.into(),
            verdict: None,
            residuals: BTreeMap::new(),
            certificates: BTreeMap::new(),
            tolerances: BTreeMap::new(),
        }
    }

    /// Record a residual; negative zero and tiny negatives from round-off
    /// become 0, and non-finite values become `f64::MAX` so the JSON stays valid.
    pub fn residual(&mut self, name: &str, value: f64) -> &mut Self {
        let v = if value.is_finite() { value.max(0.0) } else { f64::MAX };
        self.residuals.insert(name.into(), v);
        self
    }

    pub fn tolerance(&mut self, name: &str, value: f64) -> &mut Self {
        self.tolerances.insert(name.into(), value);
        self
    }

    pub fn certificate(&mut self, name: &str, value: serde_json::Value) -> &mut Self {
        self.certificates.insert(name.into(), value);
        self
    }

    pub fn to_json(&self) -> String {
        to_string(self)
    }
}

pub fn parse_report(text: &str) -> Result<Report, FormatError> {
    let r: Report = from_str(text)?;
    check_version(&r.version)?;
    Ok(r)
}
