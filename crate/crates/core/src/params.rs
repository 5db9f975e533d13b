//! Instance parameters for the regular sunflower graph family.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A single violated constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    EvenDegree,
    DegreeTooSmall,
    EvenHeight,
    HeightTooSmall,
    TreeCountNotMultipleOf4,
    TooLarge,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Violation::EvenDegree => "degree d must be odd",
            Violation::DegreeTooSmall => "degree d must be at least 3",
            Violation::EvenHeight => "tree height m must be odd",
            Violation::HeightTooSmall => "tree height m must be at least 3",
            Violation::TreeCountNotMultipleOf4 => "tree count n must be a positive multiple of 4",
            Violation::TooLarge => "vertex count does not fit in 62-bit labels",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid parameters: {}", list(.0))]
pub struct ParamError(pub Vec<Violation>);

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Unvalidated parameter tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawParams {
    pub d: u64,
    pub m: u64,
    pub n: u64,
    pub n_aux: u64,
    pub seed: u64,
}

/// Validated instance: `d` odd ≥ 3, `m` odd ≥ 3, `n` a positive multiple of 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphParams {
    d: usize,
    m: usize,
    n: usize,
    n_aux: u64,
    seed: u64,
}

impl<'de> Deserialize<'de> for GraphParams {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = RawParams::deserialize(de)?;
        validate_params(raw).map_err(serde::de::Error::custom)
    }
}

/// Labels must leave room for the sentinel range `k + 2^bits`.
const MAX_LABEL_BITS: u32 = 62;

pub fn validate_params(raw: RawParams) -> Result<GraphParams, ParamError> {
    let mut v = Vec::new();
    if raw.d.is_multiple_of(2) {
        v.push(Violation::EvenDegree);
    }
    if raw.d < 3 {
        v.push(Violation::DegreeTooSmall);
    }
    if raw.m.is_multiple_of(2) {
        v.push(Violation::EvenHeight);
    }
    if raw.m < 3 {
        v.push(Violation::HeightTooSmall);
    }
    if raw.n == 0 || !raw.n.is_multiple_of(4) {
        v.push(Violation::TreeCountNotMultipleOf4);
    }
    if v.is_empty() {
        let fits = graph_size_checked(raw.d, raw.m, raw.n)
            .and_then(|g| g.checked_add(raw.n_aux))
            .map(|tot| label_bits(tot) <= MAX_LABEL_BITS)
            .unwrap_or(false);
        if !fits {
            v.push(Violation::TooLarge);
        }
    }
    if !v.is_empty() {
        return Err(ParamError(v));
    }
    Ok(GraphParams {
        d: raw.d as usize,
        m: raw.m as usize,
        n: raw.n as usize,
        n_aux: raw.n_aux,
        seed: raw.seed,
    })
}

fn graph_size_checked(d: u64, m: u64, n: u64) -> Option<u64> {
    let mut acc = n;
    for _ in 0..(m - 1) {
        acc = acc.checked_mul(d - 1)?;
    }
    Some(acc)
}

/// ⌈log₂ total⌉, with at least one bit.
pub fn label_bits(total: u64) -> u32 {
    if total <= 2 {
        1
    } else {
        64 - (total - 1).leading_zeros()
    }
}

impl GraphParams {
    pub fn new(d: u64, m: u64, n: u64, n_aux: u64, seed: u64) -> Result<Self, ParamError> {
        validate_params(RawParams { d, m, n, n_aux, seed })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn n_aux(&self) -> u64 {
        self.n_aux
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            d: self.d as u64,
            m: self.m as u64,
            n: self.n as u64,
            n_aux: self.n_aux,
            seed: self.seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        GraphParams { seed, ..self }
    }

    /// Aux count is not constrained, so this cannot fail unless the labels overflow.
    pub fn with_n_aux(self, n_aux: u64) -> Result<Self, ParamError> {
        validate_params(RawParams { n_aux, ..self.raw() })
    }

    /// Number of matchings joining adjacent leaf layers.
    pub fn matchings(&self) -> usize {
        (self.d - 1) / 2
    }

    /// s_j for 0-based layer j.
    pub fn layer_size(&self, j: usize) -> u64 {
        if j == 0 {
            1
        } else {
            (self.d as u64 - 2) * (self.d as u64 - 1).pow(j as u32 - 1)
        }
    }

    pub fn leaves_per_tree(&self) -> u64 {
        self.layer_size(self.m - 1)
    }

    pub fn tree_size(&self) -> u64 {
        (0..self.m).map(|j| self.layer_size(j)).sum()
    }

    /// N_G = n (d−1)^{m−1}.
    pub fn graph_vertices(&self) -> u64 {
        self.n as u64 * (self.d as u64 - 1).pow(self.m as u32 - 1)
    }

    pub fn total_vertices(&self) -> u64 {
        self.graph_vertices() + self.n_aux
    }

    /// Label width 𝗇.
    pub fn label_bits(&self) -> u32 {
        label_bits(self.total_vertices())
    }

    pub fn dim(&self) -> usize {
        self.m * self.n
    }

    /// Mild-expander guarantee is only proven for d ≥ 7.
    pub fn expansion_guaranteed(&self) -> bool {
        self.d >= 7
    }
}
