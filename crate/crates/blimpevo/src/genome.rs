//! Evolvable controller parameter sets and their flat text serialization.
//!
//! Each parameter belongs to a class that fixes its domain and the uniform
//! range used for additive mutation perturbations:
//!
//! | class     | domain   | perturbation |
//! |-----------|----------|--------------|
//! | weight    | [-5, 5]  | U(-2.5, 2.5) |
//! | threshold | [0, 1]   | U(-0.5, 0.5) |
//! | scale     | [0, 2]   | U(-1.0, 1.0) |
//! | decay     | [0, 1]   | U(-0.5, 0.5) |
//!
//! Biases share the weight class. Perturbed values are clamped back into
//! the domain.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controllers::{AltitudeController, AnnController, ControlLimits, SnnController};

pub const SNN_PARAM_COUNT: usize = 80;
pub const ANN_PARAM_COUNT: usize = 17;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamClass {
    Weight,
    Threshold,
    Scale,
    Decay,
}

impl ParamClass {
    pub fn domain(self) -> (f64, f64) {
        match self {
            ParamClass::Weight => (-5.0, 5.0),
            ParamClass::Threshold => (0.0, 1.0),
            ParamClass::Scale => (0.0, 2.0),
            ParamClass::Decay => (0.0, 1.0),
        }
    }
}

/// Half-widths of the uniform mutation perturbation per parameter class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationRanges {
    pub weight: f64,
    pub threshold: f64,
    pub scale: f64,
    pub decay: f64,
}

impl Default for MutationRanges {
    fn default() -> Self {
        Self {
            weight: 2.5,
            threshold: 0.5,
            scale: 1.0,
            decay: 0.5,
        }
    }
}

impl MutationRanges {
    pub fn half_width(&self, class: ParamClass) -> f64 {
        match class {
            ParamClass::Weight => self.weight,
            ParamClass::Threshold => self.threshold,
            ParamClass::Scale => self.scale,
            ParamClass::Decay => self.decay,
        }
    }
}

/// Spiking controller parameters: 10x5 input weights, 5 output weights,
/// and per-neuron threshold, membrane scale/decay, and trace scale/decay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnnGenome {
    /// `w_hidden[i][j]` weights input neuron j into hidden neuron i.
    pub w_hidden: [[f64; 10]; 5],
    pub w_out: [f64; 5],
    pub theta: [f64; 5],
    pub alpha_v: [f64; 5],
    pub tau_v: [f64; 5],
    pub alpha_t: [f64; 5],
    pub tau_t: [f64; 5],
}

impl SnnGenome {
    pub fn zeroed() -> Self {
        Self {
            w_hidden: [[0.0; 10]; 5],
            w_out: [0.0; 5],
            theta: [0.0; 5],
            alpha_v: [0.0; 5],
            tau_v: [0.0; 5],
            alpha_t: [0.0; 5],
            tau_t: [0.0; 5],
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut g = Self::zeroed();
        g.for_each_param(|p, class| {
            let (lo, hi) = class.domain();
            *p = rng.gen_range(lo..=hi);
        });
        g
    }

    /// Visit every parameter in canonical order: hidden weights row-major,
    /// output weights, thresholds, membrane scales, membrane decays, trace
    /// scales, trace decays.
    pub fn for_each_param(&mut self, mut f: impl FnMut(&mut f64, ParamClass)) {
        for row in &mut self.w_hidden {
            for w in row {
                f(w, ParamClass::Weight);
            }
        }
        for w in &mut self.w_out {
            f(w, ParamClass::Weight);
        }
        for t in &mut self.theta {
            f(t, ParamClass::Threshold);
        }
        for a in &mut self.alpha_v {
            f(a, ParamClass::Scale);
        }
        for t in &mut self.tau_v {
            f(t, ParamClass::Decay);
        }
        for a in &mut self.alpha_t {
            f(a, ParamClass::Scale);
        }
        for t in &mut self.tau_t {
            f(t, ParamClass::Decay);
        }
    }
}

/// Feedforward 1-3-2-1 network parameters. The first two stages apply tanh
/// to an affine map; the output stage is affine only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnGenome {
    pub w1: [f64; 3],
    pub b1: [f64; 3],
    pub w2: [[f64; 3]; 2],
    pub b2: [f64; 2],
    pub w3: [f64; 2],
    pub b3: f64,
}

impl AnnGenome {
    pub fn zeroed() -> Self {
        Self {
            w1: [0.0; 3],
            b1: [0.0; 3],
            w2: [[0.0; 3]; 2],
            b2: [0.0; 2],
            w3: [0.0; 2],
            b3: 0.0,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut g = Self::zeroed();
        g.for_each_param(|p, class| {
            let (lo, hi) = class.domain();
            *p = rng.gen_range(lo..=hi);
        });
        g
    }

    /// Canonical order: w1, b1, w2 row-major, b2, w3, b3.
    pub fn for_each_param(&mut self, mut f: impl FnMut(&mut f64, ParamClass)) {
        for w in &mut self.w1 {
            f(w, ParamClass::Weight);
        }
        for b in &mut self.b1 {
            f(b, ParamClass::Weight);
        }
        for row in &mut self.w2 {
            for w in row {
                f(w, ParamClass::Weight);
            }
        }
        for b in &mut self.b2 {
            f(b, ParamClass::Weight);
        }
        for w in &mut self.w3 {
            f(w, ParamClass::Weight);
        }
        f(&mut self.b3, ParamClass::Weight);
    }
}

/// Genome of either controller family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NetGenome {
    Snn(SnnGenome),
    Ann(AnnGenome),
}

/// Controller family selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenomeKind {
    Snn,
    Ann,
}

impl std::fmt::Display for GenomeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GenomeKind::Snn => "snn",
            GenomeKind::Ann => "ann",
        })
    }
}

impl std::str::FromStr for GenomeKind {
    type Err = GenomeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "snn" => Ok(GenomeKind::Snn),
            "ann" => Ok(GenomeKind::Ann),
            other => Err(GenomeParseError::UnknownKind(other.to_string())),
        }
    }
}

impl NetGenome {
    pub fn kind(&self) -> GenomeKind {
        match self {
            NetGenome::Snn(_) => GenomeKind::Snn,
            NetGenome::Ann(_) => GenomeKind::Ann,
        }
    }

    pub fn random<R: Rng + ?Sized>(kind: GenomeKind, rng: &mut R) -> Self {
        match kind {
            GenomeKind::Snn => NetGenome::Snn(SnnGenome::random(rng)),
            GenomeKind::Ann => NetGenome::Ann(AnnGenome::random(rng)),
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            NetGenome::Snn(_) => SNN_PARAM_COUNT,
            NetGenome::Ann(_) => ANN_PARAM_COUNT,
        }
    }

    pub fn for_each_param(&mut self, f: impl FnMut(&mut f64, ParamClass)) {
        match self {
            NetGenome::Snn(g) => g.for_each_param(f),
            NetGenome::Ann(g) => g.for_each_param(f),
        }
    }

    /// Collect (value, class) pairs without mutating; test and audit helper.
    pub fn params(&self) -> Vec<(f64, ParamClass)> {
        let mut out = Vec::with_capacity(self.param_count());
        let mut clone = self.clone();
        clone.for_each_param(|p, class| out.push((*p, class)));
        out
    }

    /// True when every parameter lies inside its class domain.
    pub fn in_domain(&self) -> bool {
        self.params().iter().all(|(v, class)| {
            let (lo, hi) = class.domain();
            *v >= lo && *v <= hi
        })
    }

    pub fn build_controller(&self, limits: ControlLimits) -> Box<dyn AltitudeController + Send> {
        match self {
            NetGenome::Snn(g) => Box::new(SnnController::new(g.clone(), limits)),
            NetGenome::Ann(g) => Box::new(AnnController::new(g.clone(), limits)),
        }
    }
}

#[derive(Debug, Error)]
pub enum GenomeParseError {
    #[error("unknown genome kind '{0}'")]
    UnknownKind(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing field '{0}'")]
    MissingField(&'static str),
    #[error("field '{field}' has shape {got_rows}x{got_cols}, expected {rows}x{cols}")]
    ShapeMismatch {
        field: String,
        rows: usize,
        cols: usize,
        got_rows: usize,
        got_cols: usize,
    },
}

/// Flat text form: a `kind` line, then one `<name> <rows> <cols>` header per
/// field followed by its rows of whitespace-separated values. Values are
/// printed with shortest round-trip formatting so read(write(g)) == g
/// bit-exactly. Lines starting with `#` are comments.
pub fn write_genome_text(genome: &NetGenome) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind {}", genome.kind());
    match genome {
        NetGenome::Snn(g) => {
            push_matrix(
                &mut out,
                "w_hidden",
                g.w_hidden.iter().map(|r| r.as_slice()),
            );
            push_vector(&mut out, "w_out", &g.w_out);
            push_vector(&mut out, "theta", &g.theta);
            push_vector(&mut out, "alpha_v", &g.alpha_v);
            push_vector(&mut out, "tau_v", &g.tau_v);
            push_vector(&mut out, "alpha_t", &g.alpha_t);
            push_vector(&mut out, "tau_t", &g.tau_t);
        }
        NetGenome::Ann(g) => {
            push_vector(&mut out, "w1", &g.w1);
            push_vector(&mut out, "b1", &g.b1);
            push_matrix(&mut out, "w2", g.w2.iter().map(|r| r.as_slice()));
            push_vector(&mut out, "b2", &g.b2);
            push_vector(&mut out, "w3", &g.w3);
            push_vector(&mut out, "b3", std::slice::from_ref(&g.b3));
        }
    }
    out
}

fn push_vector(out: &mut String, name: &str, values: &[f64]) {
    let _ = writeln!(out, "{} 1 {}", name, values.len());
    let _ = writeln!(out, "{}", join_values(values));
}

fn push_matrix<'a>(out: &mut String, name: &str, rows: impl ExactSizeIterator<Item = &'a [f64]>) {
    let n = rows.len();
    let mut first = true;
    let mut body = String::new();
    let mut cols = 0;
    for row in rows {
        if first {
            cols = row.len();
            first = false;
        }
        let _ = writeln!(body, "{}", join_values(row));
    }
    let _ = writeln!(out, "{name} {n} {cols}");
    out.push_str(&body);
}

fn join_values(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

struct Block {
    name: String,
    rows: Vec<Vec<f64>>,
    line: usize,
}

pub fn parse_genome_text(text: &str) -> Result<NetGenome, GenomeParseError> {
    let mut kind: Option<GenomeKind> = None;
    let mut blocks: Vec<Block> = Vec::new();

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    while let Some((lineno, line)) = lines.next() {
        let mut parts = line.split_whitespace();
        let head = parts.next().expect("non-empty line");
        if head == "kind" {
            let value = parts.next().ok_or(GenomeParseError::Malformed {
                line: lineno,
                message: "kind line needs a value".into(),
            })?;
            kind = Some(value.parse()?);
            continue;
        }
        let dims: Vec<usize> = parts
            .map(|p| {
                p.parse().map_err(|_| GenomeParseError::Malformed {
                    line: lineno,
                    message: format!("bad shape in field header '{line}'"),
                })
            })
            .collect::<Result<_, _>>()?;
        if dims.len() != 2 {
            return Err(GenomeParseError::Malformed {
                line: lineno,
                message: format!("field header '{line}' must be '<name> <rows> <cols>'"),
            });
        }
        let (rows, cols) = (dims[0], dims[1]);
        let mut data = Vec::with_capacity(rows);
        for _ in 0..rows {
            let (rowno, row_line) = lines.next().ok_or(GenomeParseError::Malformed {
                line: lineno,
                message: format!("field '{head}' is missing rows"),
            })?;
            let row: Vec<f64> = row_line
                .split_whitespace()
                .map(|tok| {
                    tok.parse().map_err(|_| GenomeParseError::Malformed {
                        line: rowno,
                        message: format!("bad number '{tok}'"),
                    })
                })
                .collect::<Result<_, _>>()?;
            if row.len() != cols {
                return Err(GenomeParseError::ShapeMismatch {
                    field: head.to_string(),
                    rows,
                    cols,
                    got_rows: rows,
                    got_cols: row.len(),
                });
            }
            data.push(row);
        }
        blocks.push(Block {
            name: head.to_string(),
            rows: data,
            line: lineno,
        });
    }

    match kind.ok_or(GenomeParseError::MissingField("kind"))? {
        GenomeKind::Snn => {
            let mut g = SnnGenome::zeroed();
            take_matrix(&blocks, "w_hidden", &mut g.w_hidden)?;
            take_vector(&blocks, "w_out", &mut g.w_out)?;
            take_vector(&blocks, "theta", &mut g.theta)?;
            take_vector(&blocks, "alpha_v", &mut g.alpha_v)?;
            take_vector(&blocks, "tau_v", &mut g.tau_v)?;
            take_vector(&blocks, "alpha_t", &mut g.alpha_t)?;
            take_vector(&blocks, "tau_t", &mut g.tau_t)?;
            Ok(NetGenome::Snn(g))
        }
        GenomeKind::Ann => {
            let mut g = AnnGenome::zeroed();
            take_vector(&blocks, "w1", &mut g.w1)?;
            take_vector(&blocks, "b1", &mut g.b1)?;
            take_matrix(&blocks, "w2", &mut g.w2)?;
            take_vector(&blocks, "b2", &mut g.b2)?;
            take_vector(&blocks, "w3", &mut g.w3)?;
            let mut b3 = [0.0];
            take_vector(&blocks, "b3", &mut b3)?;
            g.b3 = b3[0];
            Ok(NetGenome::Ann(g))
        }
    }
}

fn find<'a>(blocks: &'a [Block], name: &'static str) -> Result<&'a Block, GenomeParseError> {
    blocks
        .iter()
        .find(|b| b.name == name)
        .ok_or(GenomeParseError::MissingField(name))
}

fn take_vector<const N: usize>(
    blocks: &[Block],
    name: &'static str,
    dst: &mut [f64; N],
) -> Result<(), GenomeParseError> {
    let block = find(blocks, name)?;
    if block.rows.len() != 1 || block.rows[0].len() != N {
        return Err(GenomeParseError::ShapeMismatch {
            field: name.to_string(),
            rows: 1,
            cols: N,
            got_rows: block.rows.len(),
            got_cols: block.rows.first().map_or(0, Vec::len),
        });
    }
    dst.copy_from_slice(&block.rows[0]);
    let _ = block.line;
    Ok(())
}

fn take_matrix<const R: usize, const C: usize>(
    blocks: &[Block],
    name: &'static str,
    dst: &mut [[f64; C]; R],
) -> Result<(), GenomeParseError> {
    let block = find(blocks, name)?;
    if block.rows.len() != R || block.rows.iter().any(|r| r.len() != C) {
        return Err(GenomeParseError::ShapeMismatch {
            field: name.to_string(),
            rows: R,
            cols: C,
            got_rows: block.rows.len(),
            got_cols: block.rows.first().map_or(0, Vec::len),
        });
    }
    for (row, src) in dst.iter_mut().zip(&block.rows) {
        row.copy_from_slice(src);
    }
    Ok(())
}
