//! Union of D perfect matchings between two N-sets.
//!
//! Left vertex i is 0..N, right vertex j is N+j when a subset spans both sides.
//! Thresholds come in two conventions: `floor` compares against
//! ⌊δ|S|⌋ (integer rounding of the δ-term), `strict` against the real value.

use super::ExpansionError;
use crate::graph::permute::derive_key;
use crate::stats::{wilson, Z95};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

const TAG_BIPARTITE: u64 = 0x4249_5041;

/// Largest N for which subsets of one side are enumerated.
pub const EXHAUSTIVE_MAX: usize = 20;

pub const CHI: f64 = 2.0 / 3.0;

/// δ = 1/(2 log₂ N).
pub fn bipartite_delta(n: usize) -> f64 {
    1.0 / (2.0 * (n as f64).log2())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    n: usize,
    /// matchings[r][i] = right partner of left i.
    matchings: Vec<Vec<u32>>,
}

impl BipartiteGraph {
    pub fn from_matchings(n: usize, matchings: Vec<Vec<u32>>) -> Result<Self, ExpansionError> {
        for mt in &matchings {
            let mut seen = vec![false; n];
            if mt.len() != n {
                return Err(ExpansionError::InvalidInput("matching has wrong length".into()));
            }
            for &j in mt {
                if j as usize >= n || std::mem::replace(&mut seen[j as usize], true) {
                    return Err(ExpansionError::InvalidInput("matching is not a bijection".into()));
                }
            }
        }
        Ok(BipartiteGraph { n, matchings })
    }

    /// D independent uniform perfect matchings.
    pub fn random<R: Rng>(n: usize, d: usize, rng: &mut R) -> Self {
        let matchings = (0..d)
            .map(|_| {
                let mut p: Vec<u32> = (0..n as u32).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        BipartiteGraph { n, matchings }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.matchings.len()
    }

    /// Neighbors of vertex v in the 2N-vertex numbering, with multiplicity.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        if v < self.n {
            self.matchings.iter().map(|mt| self.n + mt[v] as usize).collect()
        } else {
            let j = (v - self.n) as u32;
            self.matchings.iter().map(|mt| mt.iter().position(|&x| x == j).unwrap()).collect()
        }
    }

    /// Γ(L′) as a right-side bitmask, for N ≤ 64.
    fn left_masks(&self) -> Vec<u64> {
        (0..self.n).map(|i| self.matchings.iter().fold(0u64, |acc, mt| acc | 1 << mt[i])).collect()
    }

    /// Γ(v) as a bitmask over all 2N vertices, for 2N ≤ 64.
    #[cfg(test)]
    fn vertex_masks(&self) -> Vec<u64> {
        (0..2 * self.n).map(|v| self.neighbors(v).iter().fold(0u64, |acc, &w| acc | 1 << w)).collect()
    }

    /// |Γ(L′)| for a set of left vertices.
    pub fn left_neighborhood(&self, left: &[usize]) -> usize {
        let mut hit = vec![false; self.n];
        for &i in left {
            for mt in &self.matchings {
                hit[mt[i] as usize] = true;
            }
        }
        hit.iter().filter(|&&h| h).count()
    }

    /// |Γ(T)\T| for T over all 2N vertices.
    pub fn boundary(&self, t: &[usize]) -> usize {
        let mut inside = vec![false; 2 * self.n];
        t.iter().for_each(|&v| inside[v] = true);
        let mut hit = vec![false; 2 * self.n];
        for &v in t {
            for w in self.neighbors(v) {
                if !inside[w] {
                    hit[w] = true;
                }
            }
        }
        hit.iter().filter(|&&h| h).count()
    }

    fn components(&self) -> Vec<usize> {
        let total = 2 * self.n;
        let mut comp = vec![usize::MAX; total];
        let mut sizes = vec![];
        for s in 0..total {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut stack = vec![s];
            comp[s] = id;
            let mut size = 0;
            while let Some(v) = stack.pop() {
                size += 1;
                for w in self.neighbors(v) {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            sizes.push(size);
        }
        sizes
    }
}

/// Condition (i) threshold for |L′| = s.
pub fn cond_i_holds(gamma: usize, s: usize, delta: f64, strict: bool) -> bool {
    if strict {
        gamma as f64 >= (1.0 + delta) * s as f64
    } else {
        gamma >= s + (delta * s as f64).floor() as usize
    }
}

/// Condition (ii) threshold for |T| = s.
pub fn cond_ii_holds(boundary: usize, s: usize, delta: f64, strict: bool) -> bool {
    if strict {
        boundary as f64 >= delta / 2.0 * s as f64
    } else {
        boundary >= (delta / 2.0 * s as f64).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawVerdict {
    pub i_floor: bool,
    pub i_strict: bool,
    pub ii_floor: Option<bool>,
    pub ii_strict: Option<bool>,
}

/// Exact (i) over every L′ with |L′| ≤ χN.
fn exhaustive_i(g: &BipartiteGraph, delta: f64) -> (bool, bool) {
    let n = g.n;
    let limit = (CHI * n as f64).floor() as u32;
    let masks = g.left_masks();
    let mut union = vec![0u64; 1 << n];
    let mut strict = true;
    for set in 1usize..(1 << n) {
        let s = set.count_ones();
        if s > limit {
            continue;
        }
        let low = set.trailing_zeros() as usize;
        let u = union[set & (set - 1)] | masks[low];
        union[set] = u;
        let gamma = u.count_ones() as usize;
        if !cond_i_holds(gamma, s as usize, delta, false) {
            return (false, false);
        }
        strict &= cond_i_holds(gamma, s as usize, delta, true);
    }
    (true, strict)
}

/// Exact (ii) over every T with |T| ≤ N when no size needs a boundary above 1, else `None`.
fn exhaustive_ii(g: &BipartiteGraph, delta: f64, strict: bool) -> Option<bool> {
    let n = g.n;
    let need = |s: usize| -> usize {
        let x = delta / 2.0 * s as f64;
        if strict {
            x.ceil() as usize
        } else {
            x.floor() as usize
        }
    };
    if (1..=n).all(|s| need(s) <= 1) {
        // Boundary 0 exactly on unions of components.
        let mut reach = vec![false; n + 1];
        reach[0] = true;
        for c in g.components() {
            for s in (c..=n).rev() {
                reach[s] |= reach[s - c];
            }
        }
        return Some((1..=n).all(|s| !reach[s] || need(s) == 0));
    }
    None
}

pub fn check_exhaustive(g: &BipartiteGraph) -> Result<DrawVerdict, ExpansionError> {
    if g.n > EXHAUSTIVE_MAX {
        return Err(ExpansionError::ExhaustiveTooLarge { n: g.n, max: EXHAUSTIVE_MAX });
    }
    let delta = bipartite_delta(g.n);
    let (i_floor, i_strict) = exhaustive_i(g, delta);
    Ok(DrawVerdict {
        i_floor,
        i_strict,
        ii_floor: exhaustive_ii(g, delta, false),
        ii_strict: exhaustive_ii(g, delta, true),
    })
}

/// Sampled subsets; can only miss failures, never invent them.
pub fn check_monte_carlo<R: Rng>(g: &BipartiteGraph, samples: usize, rng: &mut R) -> DrawVerdict {
    let n = g.n;
    let delta = bipartite_delta(n);
    let limit = ((CHI * n as f64).floor() as usize).max(1);
    let mut v = DrawVerdict { i_floor: true, i_strict: true, ii_floor: Some(true), ii_strict: Some(true) };
    for _ in 0..samples {
        let s = rng.random_range(1..=limit);
        let left = index::sample(rng, n, s).into_vec();
        let gamma = g.left_neighborhood(&left);
        v.i_floor &= cond_i_holds(gamma, s, delta, false);
        v.i_strict &= cond_i_holds(gamma, s, delta, true);
    }
    for k in 0..samples {
        let s = rng.random_range(1..=n);
        // Alternate uniform subsets with connected ones; the latter have small boundaries.
        let t = if k % 2 == 0 { index::sample(rng, 2 * n, s).into_vec() } else { grow_connected(g, s, rng) };
        let b = g.boundary(&t);
        v.ii_floor = Some(v.ii_floor.unwrap() && cond_ii_holds(b, t.len(), delta, false));
        v.ii_strict = Some(v.ii_strict.unwrap() && cond_ii_holds(b, t.len(), delta, true));
    }
    v
}

fn grow_connected<R: Rng>(g: &BipartiteGraph, size: usize, rng: &mut R) -> Vec<usize> {
    let total = 2 * g.n;
    let mut inside = vec![false; total];
    let start = rng.random_range(0..total);
    inside[start] = true;
    let mut t = vec![start];
    let mut frontier: Vec<usize> = g.neighbors(start);
    while t.len() < size && !frontier.is_empty() {
        let w = frontier.swap_remove(rng.random_range(0..frontier.len()));
        if !inside[w] {
            inside[w] = true;
            t.push(w);
            frontier.extend(g.neighbors(w).into_iter().filter(|&x| !inside[x]));
        }
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    Exhaustive,
    MonteCarlo { samples: usize },
}

impl FromStr for CheckMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(CheckMode::Exhaustive),
            "monte-carlo" => Ok(CheckMode::MonteCarlo { samples: 20_000 }),
            other => Err(format!("unknown check mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BipartiteSummary {
    pub n: usize,
    pub d: usize,
    pub draws: u64,
    pub mode: CheckMode,
    pub chi: f64,
    pub delta: f64,
    pub pass_fraction_i: f64,
    pub wilson_i: (f64, f64),
    pub pass_fraction_i_strict: f64,
    pub pass_fraction_ii: Option<f64>,
    pub pass_fraction_ii_strict: Option<f64>,
    #[serde(skip)]
    pub verdicts: Vec<DrawVerdict>,
}

pub fn draw_graph(n: usize, d: usize, seed: u64, draw: u64) -> BipartiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_key(seed, &[TAG_BIPARTITE, n as u64, d as u64]));
    rng.set_stream(draw);
    BipartiteGraph::random(n, d, &mut rng)
}

/// Pass fractions over `draws` independent graphs; draw k is identical in both modes.
pub fn bipartite_check(n: usize, d: usize, draws: u64, mode: CheckMode, seed: u64) -> Result<BipartiteSummary, ExpansionError> {
    if n < 2 || d == 0 || draws == 0 {
        return Err(ExpansionError::InvalidInput(format!("need N ≥ 2, D ≥ 1, draws ≥ 1 (got {n}, {d}, {draws})")));
    }
    if mode == CheckMode::Exhaustive && n > EXHAUSTIVE_MAX {
        return Err(ExpansionError::ExhaustiveTooLarge { n, max: EXHAUSTIVE_MAX });
    }
    if n > 64 {
        return Err(ExpansionError::InvalidInput("N above 64 is not supported".into()));
    }
    let verdicts: Vec<DrawVerdict> = (0..draws)
        .into_par_iter()
        .map(|k| {
            let g = draw_graph(n, d, seed, k);
            match mode {
                CheckMode::Exhaustive => check_exhaustive(&g).expect("size checked above"),
                CheckMode::MonteCarlo { samples } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_key(seed, &[TAG_BIPARTITE, n as u64, d as u64, 1]));
                    rng.set_stream(k);
                    check_monte_carlo(&g, samples, &mut rng)
                }
            }
        })
        .collect();
    let frac = |f: &dyn Fn(&DrawVerdict) -> bool| verdicts.iter().filter(|v| f(v)).count() as f64 / draws as f64;
    let opt_frac = |f: &dyn Fn(&DrawVerdict) -> Option<bool>| -> Option<f64> {
        let vals: Option<Vec<bool>> = verdicts.iter().map(f).collect();
        vals.map(|v| v.iter().filter(|&&b| b).count() as f64 / draws as f64)
    };
    let passes_i = verdicts.iter().filter(|v| v.i_floor).count() as u64;
    Ok(BipartiteSummary {
        n,
        d,
        draws,
        mode,
        chi: CHI,
        delta: bipartite_delta(n),
        pass_fraction_i: frac(&|v| v.i_floor),
        wilson_i: wilson(passes_i, draws, Z95),
        pass_fraction_i_strict: frac(&|v| v.i_strict),
        pass_fraction_ii: opt_frac(&|v| v.ii_floor),
        pass_fraction_ii_strict: opt_frac(&|v| v.ii_strict),
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shifts(n: usize, d: usize) -> BipartiteGraph {
        let m = (0..d).map(|r| (0..n).map(|i| ((i + r) % n) as u32).collect()).collect();
        BipartiteGraph::from_matchings(n, m).unwrap()
    }

    #[test]
    fn complete_bipartite_always_passes() {
        for n in [4, 8, 12] {
            let v = check_exhaustive(&shifts(n, n)).unwrap();
            assert!(v.i_floor && v.i_strict);
            assert_eq!(v.ii_floor, Some(true));
            assert_eq!(v.ii_strict, Some(true));
        }
    }

    #[test]
    fn single_matching_fails_on_whole_side() {
        let g = shifts(8, 1);
        let all: Vec<usize> = (0..8).collect();
        let delta = bipartite_delta(8);
        assert!(!cond_i_holds(g.left_neighborhood(&all), 8, delta, true));
        assert!(!cond_i_holds(g.left_neighborhood(&all), 8, delta, false));
        // Disconnected into N edges: T = one edge has empty boundary.
        assert_eq!(check_exhaustive(&g).unwrap().ii_strict, Some(false));
    }

    #[test]
    fn exhaustive_rejects_large() {
        let g = shifts(21, 3);
        assert!(matches!(check_exhaustive(&g), Err(ExpansionError::ExhaustiveTooLarge { n: 21, .. })));
        assert!(matches!(
            bipartite_check(21, 3, 1, CheckMode::Exhaustive, 0),
            Err(ExpansionError::ExhaustiveTooLarge { .. })
        ));
    }

    #[test]
    fn matchings_validated() {
        assert!(BipartiteGraph::from_matchings(3, vec![vec![0, 0, 1]]).is_err());
        assert!(BipartiteGraph::from_matchings(3, vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn mask_routes_agree_with_sets() {
        let g = draw_graph(10, 3, 4, 0);
        let masks = g.left_masks();
        for set in [0b1u64, 0b1011, 0b11_0000_0001] {
            let left: Vec<usize> = (0..10).filter(|i| set >> i & 1 == 1).collect();
            let u = left.iter().fold(0u64, |a, &i| a | masks[i]);
            assert_eq!(u.count_ones() as usize, g.left_neighborhood(&left));
        }
    }

    #[test]
    fn component_route_matches_enumeration() {
        // N = 8: both routes for (ii) are available; compare them directly.
        for k in 0..40 {
            let g = draw_graph(8, 2, 11, k);
            let delta = bipartite_delta(8);
            for strict in [false, true] {
                let fast = exhaustive_ii(&g, delta, strict).unwrap();
                let masks = g.vertex_masks();
                let brute = (1u64..1 << 16).filter(|s| s.count_ones() <= 8).all(|set| {
                    let u = (0..16).filter(|v| set >> v & 1 == 1).fold(0u64, |a, v| a | masks[v]);
                    cond_ii_holds((u & !set).count_ones() as usize, set.count_ones() as usize, delta, strict)
                });
                assert_eq!(fast, brute);
            }
        }
    }

    #[test]
    fn monte_carlo_agrees_with_exhaustive() {
        for n in [8, 10, 12] {
            let ex = bipartite_check(n, 3, 16, CheckMode::Exhaustive, 5).unwrap();
            let mc = bipartite_check(n, 3, 16, CheckMode::MonteCarlo { samples: 50_000 }, 5).unwrap();
            for (a, b) in ex.verdicts.iter().zip(&mc.verdicts) {
                assert_eq!(a.i_floor, b.i_floor);
                assert_eq!(a.i_strict, b.i_strict);
                // Sampling never reports a failure that enumeration does not see.
                if b.ii_floor == Some(false) {
                    assert_eq!(a.ii_floor, Some(false));
                }
            }
        }
    }
}
