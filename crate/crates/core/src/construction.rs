//! Refutation sequences.
//!
//! If `f` does not tend to `L` at the center, there is an `epsilon` such that
//! every punctured ball around the center contains a point where
//! `|f - L| >= epsilon`. [`ViolationSearch`] looks for such points on halving
//! radii; [`bisect_angles`] then extracts a subsequence whose polar angles
//! converge, using nested dyadic angle intervals. [`bw_subsequence`] does the
//! same for arbitrary bounded coordinates (finite Bolzano–Weierstrass).

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::expr::{EvalResult, Expression};
use crate::geometry::{direction, direction_grid, to_polar, Center, PolarOffset};

/// Deepest angle interval: width pi / 2^39.
pub const MAX_DEPTH: u32 = 40;

/// Number of angle strata used per shell.
pub const STRATA: usize = 64;

/// Coordinates whose range exceeds this are treated as unbounded.
pub const BW_MAX_RANGE: f64 = 1e12;

const GRID_FRACTIONS: [f64; 3] = [0.99, 0.75, 0.51];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarSample {
    pub index: usize,
    pub point: Vec<f64>,
    pub offset: PolarOffset,
    pub value: f64,
}

/// Dyadic sub-interval `[lo * pi / 2^e, (lo + 1) * pi / 2^e]` of `[0, 2pi]`,
/// with `depth = e + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AngleInterval {
    pub lo: u64,
    pub width_exponent: u32,
    pub depth: u32,
}

impl AngleInterval {
    pub fn new(lo: u64, width_exponent: u32) -> Result<Self> {
        let iv = Self {
            lo,
            width_exponent,
            depth: width_exponent + 1,
        };
        iv.validate()?;
        Ok(iv)
    }

    /// `[0, pi]` and `[pi, 2pi]`.
    pub fn roots() -> [AngleInterval; 2] {
        [
            AngleInterval { lo: 0, width_exponent: 0, depth: 1 },
            AngleInterval { lo: 1, width_exponent: 0, depth: 1 },
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.width_exponent >= MAX_DEPTH {
            return Err(Error::usage(format!(
                "interval exponent {} exceeds the depth cap",
                self.width_exponent
            )));
        }
        if self.depth != self.width_exponent + 1 {
            return Err(Error::usage("interval depth must equal width_exponent + 1"));
        }
        if self.lo >= 2u64 << self.width_exponent {
            return Err(Error::usage("interval lies outside [0, 2pi]"));
        }
        Ok(())
    }

    pub fn halves(&self) -> [AngleInterval; 2] {
        let e = self.width_exponent + 1;
        [
            AngleInterval { lo: 2 * self.lo, width_exponent: e, depth: e + 1 },
            AngleInterval { lo: 2 * self.lo + 1, width_exponent: e, depth: e + 1 },
        ]
    }

    /// True when `self` is one of the two halves of `parent`, checked on the integers.
    pub fn is_half_of(&self, parent: &AngleInterval) -> bool {
        self.width_exponent == parent.width_exponent + 1 && self.lo >> 1 == parent.lo
    }

    fn unit(&self) -> f64 {
        PI / (1u64 << self.width_exponent) as f64
    }

    pub fn width(&self) -> f64 {
        self.unit()
    }

    pub fn bounds(&self) -> (f64, f64) {
        let u = self.unit();
        (self.lo as f64 * u, (self.lo + 1) as f64 * u)
    }

    pub fn midpoint(&self) -> f64 {
        (2 * self.lo + 1) as f64 * (self.unit() / 2.0)
    }

    pub fn contains(&self, phi: f64) -> bool {
        let (a, b) = self.bounds();
        a <= phi && phi <= b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionWitness {
    pub intervals: Vec<AngleInterval>,
    pub picked: Vec<PolarSample>,
    pub phi0: f64,
}

impl BisectionWitness {
    pub fn depth(&self) -> usize {
        self.intervals.len()
    }
}

/// Outcome of a violation search. Failing to find points is evidence, not an error.
#[derive(Debug, Clone, PartialEq)]
pub enum ViolationOutcome {
    Found(Vec<PolarSample>),
    NotFound {
        /// 1-based shell whose budget ran out.
        shell: usize,
        partial: Vec<PolarSample>,
        evaluations: usize,
    },
}

/// Search for `count` points with `|f - target| >= epsilon` on halving radii.
///
/// Sample `k` lies strictly inside half the radius of sample `k - 1` (and
/// `r_1 <= r1`), so `r_k <= r1 / 2^(k-1)` and consecutive radius ratios
/// exceed 2. Each shell spends at most `budget` evaluations: a fixed grid of
/// directions first, then stratified random draws over [`STRATA`] angle
/// strata.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationSearch {
    pub target: f64,
    pub epsilon: f64,
    pub r1: f64,
    pub count: usize,
    pub budget: usize,
    pub seed: u64,
}

impl ViolationSearch {
    pub fn run(&self, f: &Expression, center: &Center) -> Result<ViolationOutcome> {
        check_dim(center.dim(), f.arity())?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::usage("epsilon must be positive"));
        }
        if !(self.r1 > 0.0 && self.r1.is_finite()) {
            return Err(Error::usage("r1 must be positive"));
        }
        if !self.target.is_finite() {
            return Err(Error::usage("target limit must be finite"));
        }
        if self.count == 0 || self.budget == 0 {
            return Err(Error::usage("count and budget must be positive"));
        }

        let dim = center.dim();
        let grid: Vec<Vec<f64>> = direction_grid(dim, STRATA)
            .iter()
            .map(|a| direction(a))
            .collect();
        let mut samples: Vec<PolarSample> = Vec::with_capacity(self.count);
        let mut evaluations = 0;

        for shell in 1..=self.count {
            let halving = self.r1 * 0.5f64.powi(shell as i32 - 1);
            // strict bound for shells after the first
            let (max_r, strict) = match samples.last() {
                None => (self.r1, false),
                Some(prev) => (prev.offset.r / 2.0, true),
            };
            let accept = |r: f64| r > 0.0 && r <= halving && if strict { r < max_r } else { r <= max_r };

            let mut found = None;
            let mut spent = 0;
            let try_point = |dir: &[f64], r: f64, spent: &mut usize| -> Option<PolarSample> {
                *spent += 1;
                let point: Vec<f64> = center
                    .coords()
                    .iter()
                    .zip(dir)
                    .map(|(c, d)| c + r * d)
                    .collect();
                let offset = to_polar(center, &point).ok()?;
                if !accept(offset.r) {
                    return None;
                }
                match f.eval_point(&point) {
                    EvalResult::Defined(v) if (v - self.target).abs() >= self.epsilon => {
                        Some(PolarSample { index: shell, point, offset, value: v })
                    }
                    _ => None,
                }
            };

            'grid: for frac in GRID_FRACTIONS {
                for dir in &grid {
                    if spent >= self.budget {
                        break 'grid;
                    }
                    if let Some(s) = try_point(dir, max_r * frac, &mut spent) {
                        found = Some(s);
                        break 'grid;
                    }
                }
            }

            if found.is_none() {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(shell as u64);
                'random: while spent < self.budget {
                    for stratum in 0..STRATA {
                        if spent >= self.budget {
                            break 'random;
                        }
                        let dir = stratified_direction(&mut rng, dim, stratum);
                        let v: f64 = rng.random();
                        let r = max_r * (0.995 - 0.49 * v);
                        if let Some(s) = try_point(&dir, r, &mut spent) {
                            found = Some(s);
                            break 'random;
                        }
                    }
                }
            }

            evaluations += spent;
            match found {
                Some(s) => samples.push(s),
                None => {
                    return Ok(ViolationOutcome::NotFound {
                        shell,
                        partial: samples,
                        evaluations,
                    })
                }
            }
        }
        Ok(ViolationOutcome::Found(samples))
    }
}

/// Uniform direction on the sphere whose last hyperspherical angle lies in the given stratum.
fn stratified_direction(rng: &mut ChaCha8Rng, dim: usize, stratum: usize) -> Vec<f64> {
    let u: f64 = rng.random();
    let theta = TAU * (stratum as f64 + u) / STRATA as f64;
    if dim == 2 {
        return vec![theta.cos(), theta.sin()];
    }
    loop {
        let mut g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        // the last pair is rotation invariant, so only its angle is replaced
        let rho = g[dim - 2].hypot(g[dim - 1]);
        g[dim - 2] = rho * theta.cos();
        g[dim - 1] = rho * theta.sin();
        let norm = g.iter().fold(0.0_f64, |a, x| a.hypot(*x));
        if norm > 0.0 {
            return g.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Nested dyadic angle intervals with a picked sample in each.
///
/// Level 1 chooses between `[0, pi]` and `[pi, 2pi]`; each later level halves
/// the kept interval. The half holding more samples with index above the last
/// pick is kept (ties keep the lower half), and its smallest such index is
/// picked. Stops early when neither half holds an eligible sample. The angle
/// used is the polar angle in 2-D and the last hyperspherical angle otherwise.
pub fn bisect_angles(samples: &[PolarSample], depth: usize) -> Result<BisectionWitness> {
    if samples.is_empty() {
        return Err(Error::usage("bisect_angles needs at least one sample"));
    }
    if depth == 0 || depth > MAX_DEPTH as usize {
        return Err(Error::usage(format!("depth must be in 1..={MAX_DEPTH}")));
    }
    if samples.windows(2).any(|w| w[0].index >= w[1].index) {
        return Err(Error::usage("samples must be sorted by strictly increasing index"));
    }

    let mut intervals: Vec<AngleInterval> = Vec::with_capacity(depth);
    let mut picked: Vec<PolarSample> = Vec::with_capacity(depth);
    let mut last_index = 0;

    for _ in 0..depth {
        let [lower, upper] = match intervals.last() {
            None => AngleInterval::roots(),
            Some(p) => p.halves(),
        };
        let eligible = || samples.iter().filter(|s| s.index > last_index);
        let count_in = |iv: &AngleInterval| eligible().filter(|s| iv.contains(s.offset.phi())).count();
        let (n_lower, n_upper) = (count_in(&lower), count_in(&upper));
        if n_lower == 0 && n_upper == 0 {
            break;
        }
        let keep = if n_upper > n_lower { upper } else { lower };
        let pick = eligible()
            .find(|s| keep.contains(s.offset.phi()))
            .expect("kept half has an eligible sample")
            .clone();
        last_index = pick.index;
        intervals.push(keep);
        picked.push(pick);
    }

    let phi0 = intervals.last().expect("level 1 always picks").midpoint();
    Ok(BisectionWitness { intervals, picked, phi0 })
}

/// Result of [`bw_subsequence`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BwSelection {
    /// 1-based, strictly increasing.
    pub indices: Vec<usize>,
    /// Successful bisections per tracked coordinate.
    pub passes: Vec<usize>,
    pub initial_ranges: Vec<f64>,
}

/// Finite Bolzano–Weierstrass extraction.
///
/// Coordinates (0-based positions in each vector) are bisected in turn: the
/// range of the surviving entries is split at its midpoint and the closed
/// half with more survivors is kept, ties going to the lower half. A split
/// is only taken if at least `target_length` entries survive it. The first
/// `target_length` survivors are returned.
pub fn bw_subsequence(
    values: &[Vec<f64>],
    coordinates: &[usize],
    target_length: usize,
) -> Result<BwSelection> {
    if target_length == 0 {
        return Err(Error::usage("target length must be positive"));
    }
    if values.len() < target_length {
        return Err(Error::usage(format!(
            "sequence has {} entries, fewer than the target {target_length}",
            values.len()
        )));
    }
    let mut initial_ranges = Vec::with_capacity(coordinates.len());
    for &c in coordinates {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (m, v) in values.iter().enumerate() {
            let x = *v.get(c).ok_or_else(|| {
                Error::usage(format!("entry {} has no coordinate {c}", m + 1))
            })?;
            if !x.is_finite() {
                return Err(Error::usage(format!("coordinate {c} of entry {} is not finite", m + 1)));
            }
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if hi - lo > BW_MAX_RANGE {
            return Err(Error::usage(format!("coordinate {c} is unbounded (range {})", hi - lo)));
        }
        initial_ranges.push(hi - lo);
    }

    let mut survivors: Vec<usize> = (0..values.len()).collect();
    let mut passes = vec![0; coordinates.len()];
    loop {
        let mut progressed = false;
        for (slot, &c) in coordinates.iter().enumerate() {
            let (lo, hi) = survivors.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &m| {
                (a.min(values[m][c]), b.max(values[m][c]))
            });
            if hi <= lo {
                continue;
            }
            let mid = lo + (hi - lo) / 2.0;
            let lower: Vec<usize> = survivors.iter().copied().filter(|&m| values[m][c] <= mid).collect();
            let upper: Vec<usize> = survivors.iter().copied().filter(|&m| values[m][c] >= mid).collect();
            let keep = if upper.len() > lower.len() { upper } else { lower };
            if keep.len() < target_length || keep.len() == survivors.len() {
                continue;
            }
            survivors = keep;
            passes[slot] += 1;
            progressed = true;
        }
        if !progressed {
            break;
        }
    }

    survivors.truncate(target_length);
    Ok(BwSelection {
        indices: survivors.into_iter().map(|m| m + 1).collect(),
        passes,
        initial_ranges,
    })
}
