//! Reordering a zero-sum tuple of complex numbers so every prefix sum stays
//! small, with a certificate of the bound achieved.
//!
//! For zero-sum tuples in the plane the optimal ordering keeps all prefix
//! sums within √5/2 of the largest modulus (Banaszczyk's value of the planar
//! Steinitz constant); 2 is the older Grinberg–Sevastyanov bound. Both proofs
//! are non-constructive, so this module searches: branch-and-bound for small
//! tuples, randomized greedy beyond.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Longest tuple the exhaustive search accepts.
pub const EXHAUSTIVE_CAP: usize = 10;

/// Randomized greedy restarts before falling back.
pub const GREEDY_RESTARTS: usize = 32;

/// Relative slack allowed when deciding a tuple sums to zero.
pub const ZERO_SUM_REL: f64 = 1e-12;

/// Absolute slack folded into the bound-class thresholds.
pub const CLASS_SLACK: f64 = 1e-12;

/// √5/2, the planar Steinitz constant.
pub fn banaszczyk_constant() -> f64 {
    5.0_f64.sqrt() / 2.0
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SteinitzError {
    #[error("tuple length {len} exceeds the exhaustive cap {cap}")]
    CapExceeded { len: usize, cap: usize },
    #[error("tuple sum modulus {sum_norm:.3e} exceeds the zero-sum bound {bound:.3e}")]
    SumNotZero { sum_norm: f64, bound: f64 },
    #[error("permutation is not a bijection on the index set")]
    InvalidPermutation,
    #[error("stored prefix_max {stored} disagrees with recomputed {recomputed}")]
    SelfCheckFailed { stored: f64, recomputed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundClass {
    /// prefix_max ≤ (√5/2)·max_modulus + slack
    Banaszczyk,
    /// prefix_max ≤ 2·max_modulus + slack
    GrinbergSevastyanov,
    Unbounded,
}

/// A permutation of a zero-sum tuple together with the prefix bound it
/// achieves. `permutation[j]` is the original index placed at position `j`.
#[derive(Debug, Clone, Serialize)]
pub struct RearrangementCertificate {
    pub permutation: Vec<usize>,
    pub prefix_max: f64,
    pub max_modulus: f64,
    pub bound_class: BoundClass,
}

impl RearrangementCertificate {
    fn new(permutation: Vec<usize>, prefix_max: f64, max_modulus: f64) -> Self {
        let bound_class = classify(prefix_max, max_modulus);
        Self { permutation, prefix_max, max_modulus, bound_class }
    }

    /// Reorders `values` by the stored permutation.
    pub fn apply(&self, values: &[C64]) -> Vec<C64> {
        self.permutation.iter().map(|&i| values[i]).collect()
    }

    /// Recomputes `prefix_max` from the original tuple (re-centered by the
    /// canonical rule) and checks it against the stored value.
    pub fn validate(&self, values: &[C64]) -> Result<(), SteinitzError> {
        let centered = center_zero_sum(values)?;
        let recomputed = prefix_max(&centered, &self.permutation)?;
        if (recomputed - self.prefix_max).abs() > 1e-14 {
            return Err(SteinitzError::SelfCheckFailed {
                stored: self.prefix_max,
                recomputed,
            });
        }
        Ok(())
    }
}

fn classify(prefix_max: f64, max_modulus: f64) -> BoundClass {
    if prefix_max <= banaszczyk_constant() * max_modulus + CLASS_SLACK {
        BoundClass::Banaszczyk
    } else if prefix_max <= 2.0 * max_modulus + CLASS_SLACK {
        BoundClass::GrinbergSevastyanov
    } else {
        BoundClass::Unbounded
    }
}

pub fn max_modulus(values: &[C64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Canonical zero-sum enforcement: subtract the mean when the sum modulus is
/// within `1e-12 · n · max|λ|`, reject otherwise. The second pass mops up the
/// rounding of the first so downstream prefix sums close exactly.
pub fn center_zero_sum(values: &[C64]) -> Result<Vec<C64>, SteinitzError> {
    if values.is_empty() {
        return Ok(vec![]);
    }
    let sum: C64 = values.iter().sum();
    let bound = ZERO_SUM_REL * values.len() as f64 * max_modulus(values);
    if sum.norm() > bound {
        return Err(SteinitzError::SumNotZero { sum_norm: sum.norm(), bound });
    }
    let mut out = values.to_vec();
    for _ in 0..2 {
        let mean = out.iter().sum::<C64>() / out.len() as f64;
        for v in out.iter_mut() {
            *v -= mean;
        }
    }
    Ok(out)
}

fn check_bijection(n: usize, perm: &[usize]) -> Result<(), SteinitzError> {
    if perm.len() != n {
        return Err(SteinitzError::InvalidPermutation);
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(SteinitzError::InvalidPermutation);
        }
        seen[p] = true;
    }
    Ok(())
}

/// `max_{1 ≤ k ≤ n} |Σ_{j ≤ k} values[perm[j]]|`. The k = n prefix is
/// included; it vanishes for zero-sum input.
pub fn prefix_max(values: &[C64], perm: &[usize]) -> Result<f64, SteinitzError> {
    check_bijection(values.len(), perm)?;
    let mut acc = C64::new(0.0, 0.0);
    let mut worst = 0.0f64;
    for &i in perm {
        acc += values[i];
        worst = worst.max(acc.norm());
    }
    Ok(worst)
}

/// Globally optimal prefix bound by branch-and-bound over permutations.
///
/// Depth-first in index order with strict-improvement pruning, so the
/// returned permutation is the lexicographically first optimal one. A branch
/// dies as soon as its running prefix maximum reaches the incumbent; equal
/// values at the same depth are tried once.
pub fn exhaustive_best_order(values: &[C64]) -> Result<RearrangementCertificate, SteinitzError> {
    let n = values.len();
    if n > EXHAUSTIVE_CAP {
        return Err(SteinitzError::CapExceeded { len: n, cap: EXHAUSTIVE_CAP });
    }
    let centered = center_zero_sum(values)?;
    if n == 0 {
        return Ok(RearrangementCertificate::new(vec![], 0.0, 0.0));
    }

    struct Search<'a> {
        values: &'a [C64],
        used: Vec<bool>,
        path: Vec<usize>,
        best: f64,
        best_path: Vec<usize>,
    }

    impl Search<'_> {
        fn dfs(&mut self, depth: usize, prefix: C64, running_max: f64) {
            let n = self.values.len();
            if depth == n {
                // running_max < self.best is guaranteed by pruning
                self.best = running_max;
                self.best_path = self.path.clone();
                return;
            }
            let mut tried: Vec<C64> = Vec::new();
            for i in 0..n {
                if self.used[i] || tried.contains(&self.values[i]) {
                    continue;
                }
                tried.push(self.values[i]);
                let next = prefix + self.values[i];
                let m = running_max.max(next.norm());
                if m < self.best {
                    self.used[i] = true;
                    self.path.push(i);
                    self.dfs(depth + 1, next, m);
                    self.path.pop();
                    self.used[i] = false;
                }
            }
        }
    }

    let mut search = Search {
        values: &centered,
        used: vec![false; n],
        path: Vec::with_capacity(n),
        best: f64::INFINITY,
        best_path: (0..n).collect(),
    };
    search.dfs(0, C64::new(0.0, 0.0), 0.0);

    let prefix = prefix_max(&centered, &search.best_path)?;
    Ok(RearrangementCertificate::new(search.best_path, prefix, max_modulus(&centered)))
}

/// One greedy pass: repeatedly append the unused value minimizing the modulus
/// of the new prefix. `jitter` (0 disables) lets a seeded rng pick among
/// near-minimal candidates for the randomized restarts.
fn greedy_pass(values: &[C64], jitter: f64, rng: Option<&mut ChaCha8Rng>) -> (Vec<usize>, f64) {
    let n = values.len();
    let mut rng = rng;
    let mut used = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let mut prefix = C64::new(0.0, 0.0);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let mut best_norm = f64::INFINITY;
        for i in 0..n {
            if !used[i] {
                best_norm = best_norm.min((prefix + values[i]).norm());
            }
        }
        let pick = if jitter > 0.0 {
            let slack = jitter * max_modulus(values) + best_norm * jitter;
            let candidates: Vec<usize> = (0..n)
                .filter(|&i| !used[i] && (prefix + values[i]).norm() <= best_norm + slack)
                .collect();
            let r = rng.as_deref_mut().expect("jittered pass needs an rng");
            candidates[r.gen_range(0..candidates.len())]
        } else {
            // ties broken by lowest original index
            (0..n)
                .find(|&i| !used[i] && (prefix + values[i]).norm() <= best_norm)
                .expect("some candidate attains the minimum")
        };
        used[pick] = true;
        perm.push(pick);
        prefix += values[pick];
        worst = worst.max(prefix.norm());
    }
    (perm, worst)
}

/// Greedy rearrangement with randomized restarts and an exhaustive fallback.
///
/// The deterministic pass appends whichever unused value minimizes the new
/// prefix modulus (ties to the lowest index). If the achieved ratio exceeds
/// 2, up to [`GREEDY_RESTARTS`] seeded randomized passes run, the minimum
/// taken with the lowest restart index winning ties; if the ratio still
/// exceeds 2 and the tuple fits the cap, the exhaustive search decides.
/// Always returns a certificate for zero-sum input.
pub fn greedy_order(values: &[C64]) -> Result<RearrangementCertificate, SteinitzError> {
    let centered = center_zero_sum(values)?;
    let n = centered.len();
    if n == 0 {
        return Ok(RearrangementCertificate::new(vec![], 0.0, 0.0));
    }
    let maxmod = max_modulus(&centered);

    let (mut best_perm, mut best_val) = greedy_pass(&centered, 0.0, None);
    if best_val > 2.0 * maxmod + CLASS_SLACK {
        for restart in 0..GREEDY_RESTARTS {
            let mut rng = ChaCha8Rng::seed_from_u64(0xc0ffee ^ restart as u64);
            let (perm, val) = greedy_pass(&centered, 0.05, Some(&mut rng));
            if val < best_val {
                best_val = val;
                best_perm = perm;
            }
            if best_val <= 2.0 * maxmod + CLASS_SLACK {
                break;
            }
        }
    }
    if best_val > 2.0 * maxmod + CLASS_SLACK && n <= EXHAUSTIVE_CAP {
        return exhaustive_best_order(&centered);
    }

    let prefix = prefix_max(&centered, &best_perm)?;
    Ok(RearrangementCertificate::new(best_perm, prefix, maxmod))
}
