//! Set systems with bounded pairwise intersections.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Random subsets tried for each new set before the greedy search gives up.
pub const GREEDY_ATTEMPTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinatorialDesign {
    pub universe: usize,
    pub sets: Vec<Vec<usize>>,
    pub set_size: usize,
    pub intersection_bound: usize,
    pub strategy: DesignStrategy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignStrategy {
    /// Graphs of polynomial maps over a prime field.
    ReedSolomon { q: usize },
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub sets: Vec<Vec<usize>>,
}

impl CombinatorialDesign {
    /// Exhaustive check of the size and intersection contracts.
    pub fn verify(&self) -> Result<()> {
        for (i, s) in self.sets.iter().enumerate() {
            let mut sorted = s.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != self.set_size || s.len() != self.set_size {
                return Err(Error::InvalidInput(format!("set {i} has {} distinct elements, expected {}", sorted.len(), self.set_size)));
            }
            if let Some(&x) = s.iter().find(|&&x| x >= self.universe) {
                return Err(Error::InvalidInput(format!("set {i} contains {x}, outside a universe of {}", self.universe)));
            }
        }
        for i in 0..self.sets.len() {
            for j in i + 1..self.sets.len() {
                let common = intersection_size(&self.sets[i], &self.sets[j]);
                if common > self.intersection_bound {
                    return Err(Error::InvalidInput(format!(
                        "sets {i} and {j} share {common} elements, bound is {}",
                        self.intersection_bound
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> DesignJson {
        DesignJson { n: self.universe, sets: self.sets.clone() }
    }

    /// Reads a design and infers its set size; the bound is the largest
    /// intersection present.
    pub fn from_json(j: &DesignJson) -> Result<Self> {
        let set_size = j.sets.first().map_or(0, Vec::len);
        let mut bound = 0;
        for i in 0..j.sets.len() {
            for k in i + 1..j.sets.len() {
                bound = bound.max(intersection_size(&j.sets[i], &j.sets[k]));
            }
        }
        let d = CombinatorialDesign {
            universe: j.n,
            sets: j.sets.clone(),
            set_size,
            intersection_bound: bound,
            strategy: DesignStrategy::Greedy,
        };
        d.verify()?;
        Ok(d)
    }
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    a.iter().filter(|x| b.contains(x)).count()
}

fn is_prime(q: usize) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

/// `count` sets of `set_size` elements from `0..universe`, pairwise sharing
/// at most `intersection_bound` elements.
pub fn nw_design<R: Rng + ?Sized>(
    universe: usize,
    set_size: usize,
    count: usize,
    intersection_bound: usize,
    rng: &mut R,
) -> Result<CombinatorialDesign> {
    if set_size > universe {
        return Err(Error::InvalidInput(format!("sets of size {set_size} do not fit in a universe of {universe}")));
    }
    let design = match reed_solomon(universe, set_size, count, intersection_bound) {
        Some(d) => d,
        None => greedy(universe, set_size, count, intersection_bound, rng)?,
    };
    design.verify()?;
    Ok(design)
}

/// Sets `{(x, phi(x)) : x < set_size}` for polynomials `phi` of degree at
/// most `bound` over `Z/q`, with `(x, y)` encoded as `x q + y`.
fn reed_solomon(universe: usize, set_size: usize, count: usize, bound: usize) -> Option<CombinatorialDesign> {
    let q = (set_size.max(2)..).take_while(|q| q * q <= universe).find(|&q| is_prime(q))?;
    let capacity = (q as u128).checked_pow(bound as u32 + 1).unwrap_or(u128::MAX);
    if count as u128 > capacity {
        return None;
    }
    let sets = (0..count)
        .map(|idx| {
            // Base-q digits of idx are the coefficients of phi.
            let mut digits = Vec::with_capacity(bound + 1);
            let mut r = idx;
            for _ in 0..=bound {
                digits.push(r % q);
                r /= q;
            }
            (0..set_size)
                .map(|x| {
                    let y = digits.iter().rev().fold(0, |acc, &c| (acc * x + c) % q);
                    x * q + y
                })
                .collect()
        })
        .collect();
    Some(CombinatorialDesign {
        universe,
        sets,
        set_size,
        intersection_bound: bound,
        strategy: DesignStrategy::ReedSolomon { q },
    })
}

fn greedy<R: Rng + ?Sized>(universe: usize, set_size: usize, count: usize, bound: usize, rng: &mut R) -> Result<CombinatorialDesign> {
    let mut sets: Vec<Vec<usize>> = Vec::with_capacity(count);
    for i in 0..count {
        let found = (0..GREEDY_ATTEMPTS).find_map(|_| {
            let mut cand = sample(rng, universe, set_size).into_vec();
            cand.sort_unstable();
            sets.iter().all(|s| intersection_size(s, &cand) <= bound).then_some(cand)
        });
        match found {
            Some(s) => sets.push(s),
            None => {
                return Err(Error::InvalidInput(format!(
                    "no design with {count} sets of size {set_size} in {universe} points with intersections <= {bound}: \
                     greedy search stalled at set {i}"
                )))
            }
        }
    }
    Ok(CombinatorialDesign { universe, sets, set_size, intersection_bound: bound, strategy: DesignStrategy::Greedy })
}
