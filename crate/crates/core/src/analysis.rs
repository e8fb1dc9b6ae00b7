//! Empirical constants for the kernel size and smoothness bounds, discrete
//! Muckenhoupt constants, weighted norms, and maximal-inequality experiments.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi::{CoefficientTable, JacobiParams};
use crate::kernel::{heat_kernel_block, KernelBlock, DEFAULT_KERNEL_TOL};
use crate::semigroup::{default_truncation, poisson_kernel_block, Subordination, TimeGrid};
use crate::sequence::FiniteSequence;

/// How a weight sequence was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    Unit,
    /// `w(n) = (n + 1)^γ`.
    Power {
        gamma: f64,
    },
    Custom,
}

/// Strictly positive weight `w(0), ..., w(N)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSeq {
    kind: WeightKind,
    values: Vec<f64>,
}

impl WeightSeq {
    pub fn unit(last: usize) -> Self {
        Self {
            kind: WeightKind::Unit,
            values: vec![1.0; last + 1],
        }
    }

    pub fn power(gamma: f64, last: usize) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::invalid(format!(
                "power exponent {gamma} must be finite"
            )));
        }
        Ok(Self {
            kind: WeightKind::Power { gamma },
            values: (0..=last).map(|n| ((n + 1) as f64).powf(gamma)).collect(),
        })
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("weight sequence is empty"));
        }
        if let Some((n, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
        {
            return Err(Error::invalid(format!(
                "weight w({n}) = {v} must be positive and finite"
            )));
        }
        Ok(Self {
            kind: WeightKind::Custom,
            values,
        })
    }

    /// Same kind on `0..=last` (custom weights cannot be regenerated).
    pub fn regenerate(&self, last: usize) -> Result<Self> {
        match self.kind {
            WeightKind::Unit => Ok(Self::unit(last)),
            WeightKind::Power { gamma } => Self::power(gamma, last),
            WeightKind::Custom => Err(Error::invalid("a custom weight cannot be extended")),
        }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn covers(&self, f: &FiniteSequence) -> Result<()> {
        if f.support() >= self.values.len() {
            return Err(Error::invalid(format!(
                "weight of length {} does not cover support {}",
                self.values.len(),
                f.support()
            )));
        }
        Ok(())
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::invalid(format!(
            "exponent p = {p} must be finite and at least 1"
        )));
    }
    Ok(())
}

/// The discrete `A_p` expression maximized over all `0 ≤ n ≤ m ≤ last`:
/// `(Σw / L) (Σ w^{-1/(p-1)} / L)^{p-1}` for `p > 1` and
/// `(Σw / L) max w^{-1}` for `p = 1`, with `L = m - n + 1`.
pub fn ap_constant(w: &WeightSeq, p: f64, last: usize) -> Result<f64> {
    check_exponent(p)?;
    if last >= w.len() {
        return Err(Error::invalid(format!(
            "last index {last} beyond the weight of length {}",
            w.len()
        )));
    }
    let values = &w.values[..=last];
    let mut direct = vec![0.0; last + 2];
    for (k, v) in values.iter().enumerate() {
        direct[k + 1] = direct[k] + v;
    }
    let value = if p > 1.0 {
        let exponent = -1.0 / (p - 1.0);
        let mut dual = vec![0.0; last + 2];
        for (k, v) in values.iter().enumerate() {
            dual[k + 1] = dual[k] + v.powf(exponent);
        }
        (0..=last)
            .into_par_iter()
            .map(|n| {
                (n..=last)
                    .map(|m| {
                        let len = (m - n + 1) as f64;
                        let first = (direct[m + 1] - direct[n]) / len;
                        let second = (dual[m + 1] - dual[n]) / len;
                        first * second.powf(p - 1.0)
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    } else {
        (0..=last)
            .into_par_iter()
            .map(|n| {
                let mut largest_inverse = 0.0f64;
                (n..=last)
                    .map(|m| {
                        largest_inverse = largest_inverse.max(values[m].recip());
                        let len = (m - n + 1) as f64;
                        (direct[m + 1] - direct[n]) / len * largest_inverse
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    };
    Ok(value)
}

/// `A_p(2N) / A_p(N)`; values near 1 indicate a constant that stabilizes.
pub fn ap_growth_ratio(w: &WeightSeq, p: f64, last: usize) -> Result<f64> {
    let doubled = w.regenerate(2 * last)?;
    Ok(ap_constant(&doubled, p, 2 * last)? / ap_constant(&doubled, p, last)?)
}

/// `(Σ |f(n)|^p w(n))^{1/p}`.
pub fn weighted_lp_norm(f: &FiniteSequence, w: &WeightSeq, p: f64) -> Result<f64> {
    check_exponent(p)?;
    w.covers(f)?;
    let sum: f64 = f
        .values()
        .iter()
        .zip(&w.values)
        .map(|(v, wt)| v.abs().powf(p) * wt)
        .sum();
    Ok(sum.powf(p.recip()))
}

/// `sup_{s>0} s Σ_{|f(m)| > s} w(m)`, attained as `s` rises to a value of `|f|`.
pub fn weak_l1_norm(f: &FiniteSequence, w: &WeightSeq) -> Result<f64> {
    w.covers(f)?;
    let mut pairs: Vec<(f64, f64)> = f
        .values()
        .iter()
        .zip(&w.values)
        .map(|(v, wt)| (v.abs(), *wt))
        .filter(|(v, _)| *v > 0.0)
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0f64;
    let mut mass = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let level = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == level {
            mass += pairs[i].1;
            i += 1;
        }
        best = best.max(level * mass);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `|K_t(m,n)| |m-n|² / √t`
    Lemma31,
    /// `|K_t(n,m)| |n-m|`
    Lemma41,
    /// `sup_t |K_t(n+1,m) - K_t(n,m)| |n-m|²` on `m/2 ≤ n ≤ 3m/2`
    Lemma42,
    /// `sup_t |K_t(n,m) - K_t(l,m)| |n-m|² / |n-l|` on the local region
    CzB1,
    /// `sup_t |K_t(m,n) - K_t(m,l)| |n-m|² / |n-l|` on the local region
    CzB2,
    /// `|p_n(x)| (1-x)^{α/2+1/4} (1+x)^{β/2+1/4}`
    UnifPn,
}

impl BoundKind {
    pub const ALL: [BoundKind; 6] = [
        BoundKind::Lemma31,
        BoundKind::Lemma41,
        BoundKind::Lemma42,
        BoundKind::CzB1,
        BoundKind::CzB2,
        BoundKind::UnifPn,
    ];
}

/// Inclusive index range `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexRange {
    pub lo: usize,
    pub hi: usize,
}

impl IndexRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(Error::invalid(format!("empty index range {lo}..={hi}")));
        }
        Ok(Self { lo, hi })
    }

    /// `lo..=2 hi`.
    pub fn doubled(&self) -> Self {
        Self {
            lo: self.lo,
            hi: 2 * self.hi,
        }
    }

    fn iter(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

/// Where the supremum was attained.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Argmax {
    /// `(n, m)` for kernel bounds, `(n, l, m)` for the smoothness conditions,
    /// `(n)` for the polynomial bound.
    pub indices: Vec<usize>,
    pub t: Option<f64>,
    pub x: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchRanges {
    pub indices: IndexRange,
    pub times: Option<Vec<f64>>,
    pub x_points: Option<usize>,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_kind: BoundKind,
    pub params: JacobiParams,
    pub estimated_constant: f64,
    pub argmax: Argmax,
    pub ranges: SearchRanges,
    /// For the smoothness conditions: the same ratio with the difference
    /// replaced by the sum of unit-step differences between `n` and `l`.
    pub telescoped_constant: Option<f64>,
}

impl BoundReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `m/2 ≤ n ≤ 3m/2` in exact integer arithmetic.
fn local(n: usize, m: usize) -> bool {
    2 * n >= m && 2 * n <= 3 * m
}

struct Best {
    value: f64,
    argmax: Argmax,
}

impl Best {
    fn none() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            argmax: Argmax::default(),
        }
    }

    fn offer(&mut self, value: f64, argmax: impl FnOnce() -> Argmax) {
        if value > self.value {
            self.value = value;
            self.argmax = argmax();
        }
    }

    fn merge(self, other: Best) -> Best {
        // ties keep the earlier candidate so reports are deterministic
        if other.value > self.value {
            other
        } else {
            self
        }
    }
}

fn params_check(params: JacobiParams) -> Result<()> {
    if !params.standard_range() {
        return Err(Error::invalid(format!(
            "bounds need alpha, beta >= -1/2, got ({}, {})",
            params.alpha(),
            params.beta()
        )));
    }
    Ok(())
}

fn finish(
    kind: BoundKind,
    params: JacobiParams,
    best: Best,
    ranges: SearchRanges,
    telescoped: Option<f64>,
) -> Result<BoundReport> {
    if ranges.candidates == 0 {
        return Err(Error::EmptyAdmissibleSet(format!(
            "{kind:?}: no index pair in {}..={} passes the admissibility filter",
            ranges.indices.lo, ranges.indices.hi
        )));
    }
    if !best.value.is_finite() {
        return Err(Error::NonFinite(format!(
            "{kind:?} supremum is {}",
            best.value
        )));
    }
    Ok(BoundReport {
        bound_kind: kind,
        params,
        estimated_constant: best.value.max(0.0),
        argmax: best.argmax,
        ranges,
        telescoped_constant: telescoped,
    })
}

/// Grid supremum of the ratio that defines `kind`. Kernel values come from
/// one converged block per grid time covering indices `0..=hi+1`.
pub fn estimate_bound_constant(
    kind: BoundKind,
    params: JacobiParams,
    range: IndexRange,
    grid: &TimeGrid,
) -> Result<BoundReport> {
    params_check(params)?;
    if kind == BoundKind::UnifPn {
        return uniform_pn_bound_constant(params, range, &XGrid::default());
    }
    let size = range.hi + 2;
    let times: Vec<f64> = grid
        .times()
        .iter()
        .copied()
        .filter(|&t| kind != BoundKind::Lemma31 || t > 0.0)
        .collect();
    if times.is_empty() {
        return Err(Error::invalid(
            "Lemma31 ratio needs at least one positive time",
        ));
    }
    let blocks = times
        .par_iter()
        .map(|&t| heat_kernel_block(params, t, size, size, DEFAULT_KERNEL_TOL))
        .collect::<Result<Vec<_>>>()?;
    let ranges = |candidates| SearchRanges {
        indices: range,
        times: Some(times.clone()),
        x_points: None,
        candidates,
    };
    match kind {
        BoundKind::Lemma31 | BoundKind::Lemma41 => {
            let pairs: Vec<(usize, usize)> = range
                .iter()
                .flat_map(|n| range.iter().map(move |m| (n, m)))
                .filter(|(n, m)| n != m)
                .collect();
            let best = pairs
                .par_iter()
                .map(|&(n, m)| {
                    let d = n.abs_diff(m) as f64;
                    let mut best = Best::none();
                    for (block, &t) in blocks.iter().zip(&times) {
                        let k = block.get(n, m).abs();
                        let ratio = if kind == BoundKind::Lemma31 {
                            k * d * d / t.sqrt()
                        } else {
                            k * d
                        };
                        best.offer(ratio, || Argmax {
                            indices: vec![n, m],
                            t: Some(t),
                            x: None,
                        });
                    }
                    best
                })
                .reduce(Best::none, Best::merge);
            finish(kind, params, best, ranges(pairs.len()), None)
        }
        BoundKind::Lemma42 => {
            let pairs: Vec<(usize, usize)> = range
                .iter()
                .flat_map(|n| range.iter().map(move |m| (n, m)))
                .filter(|&(n, m)| n != m && local(n, m))
                .collect();
            let best = pairs
                .par_iter()
                .map(|&(n, m)| {
                    let d = n.abs_diff(m) as f64;
                    let (sup, t) = sup_step(&blocks, &times, n, m);
                    let mut best = Best::none();
                    best.offer(sup * d * d, || Argmax {
                        indices: vec![n, m],
                        t: Some(t),
                        x: None,
                    });
                    best
                })
                .reduce(Best::none, Best::merge);
            finish(kind, params, best, ranges(pairs.len()), None)
        }
        BoundKind::CzB1 | BoundKind::CzB2 => {
            let triples: Vec<(usize, usize, usize)> = range
                .iter()
                .flat_map(|m| {
                    range
                        .iter()
                        .flat_map(move |n| range.iter().map(move |l| (n, l, m)))
                })
                .filter(|&(n, l, m)| {
                    n != l && n.abs_diff(m) > 2 * n.abs_diff(l) && local(n, m) && local(l, m)
                })
                .collect();
            let second = kind == BoundKind::CzB2;
            // unit-step suprema along the first (b1) or second (b2) index
            let steps: Vec<Vec<f64>> = range
                .iter()
                .map(|m| {
                    (0..=range.hi)
                        .map(|i| {
                            if second {
                                sup_step_second(&blocks, m, i)
                            } else {
                                sup_step(&blocks, &times, i, m).0
                            }
                        })
                        .collect()
                })
                .collect();
            let (best, telescoped) = triples
                .par_iter()
                .map(|&(n, l, m)| {
                    let d = n.abs_diff(m) as f64;
                    let gap = n.abs_diff(l) as f64;
                    let mut best = Best::none();
                    for (block, &t) in blocks.iter().zip(&times) {
                        let diff = if second {
                            (block.get(m, n) - block.get(m, l)).abs()
                        } else {
                            (block.get(n, m) - block.get(l, m)).abs()
                        };
                        best.offer(diff * d * d / gap, || Argmax {
                            indices: vec![n, l, m],
                            t: Some(t),
                            x: None,
                        });
                    }
                    let row = &steps[m - range.lo];
                    let chain: f64 = (n.min(l)..n.max(l)).map(|i| row[i]).sum();
                    (best, chain * d * d / gap)
                })
                .reduce(
                    || (Best::none(), 0.0f64),
                    |a, b| (a.0.merge(b.0), a.1.max(b.1)),
                );
            finish(kind, params, best, ranges(triples.len()), Some(telescoped))
        }
        BoundKind::UnifPn => unreachable!("handled above"),
    }
}

/// `sup_t |K_t(n+1, m) - K_t(n, m)|` and the time attaining it.
fn sup_step(blocks: &[KernelBlock], times: &[f64], n: usize, m: usize) -> (f64, f64) {
    blocks
        .iter()
        .zip(times)
        .map(|(b, &t)| ((b.get(n + 1, m) - b.get(n, m)).abs(), t))
        .fold(
            (f64::NEG_INFINITY, f64::NAN),
            |a, b| if b.0 > a.0 { b } else { a },
        )
}

/// `sup_t |K_t(m, i+1) - K_t(m, i)|`.
fn sup_step_second(blocks: &[KernelBlock], m: usize, i: usize) -> f64 {
    blocks
        .iter()
        .map(|b| (b.get(m, i + 1) - b.get(m, i)).abs())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Evaluation points in `(-1, 1)`: `x = cos θ` on a uniform `θ` grid of
/// `interior` midpoints, plus `±(1 - 2^{-k})` for `k = 1..=depth`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XGrid {
    points: Vec<f64>,
}

impl XGrid {
    pub fn new(interior: usize, depth: u32) -> Result<Self> {
        if interior == 0 || depth > 52 {
            return Err(Error::invalid(format!(
                "x grid needs interior points and depth <= 52, got {interior}, {depth}"
            )));
        }
        let mut points: Vec<f64> = (0..interior)
            .map(|i| (std::f64::consts::PI * (i as f64 + 0.5) / interior as f64).cos())
            .collect();
        for k in 1..=depth {
            let edge = 1.0 - (2.0f64).powi(-(k as i32));
            points.push(edge);
            points.push(-edge);
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

impl Default for XGrid {
    fn default() -> Self {
        Self::new(4000, 30).expect("default x grid is valid")
    }
}

/// Grid supremum of `|p_n(x)| (1-x)^{α/2+1/4} (1+x)^{β/2+1/4}` over `n` in
/// `range`.
pub fn uniform_pn_bound_constant(
    params: JacobiParams,
    range: IndexRange,
    grid: &XGrid,
) -> Result<BoundReport> {
    params_check(params)?;
    let table = CoefficientTable::new(params, range.hi + 1);
    let (ea, eb) = (params.alpha() / 2.0 + 0.25, params.beta() / 2.0 + 0.25);
    let best = grid
        .points
        .par_iter()
        .map(|&x| {
            let mut values = vec![0.0; range.hi + 1];
            table.eval_all_into(x, &mut values);
            let factor = (1.0 - x).powf(ea) * (1.0 + x).powf(eb);
            let mut best = Best::none();
            for n in range.iter() {
                best.offer(values[n].abs() * factor, || Argmax {
                    indices: vec![n],
                    t: None,
                    x: Some(x),
                });
            }
            best
        })
        .reduce(Best::none, Best::merge);
    let ranges = SearchRanges {
        indices: range,
        times: None,
        x_points: Some(grid.points.len()),
        candidates: range.hi - range.lo + 1,
    };
    finish(BoundKind::UnifPn, params, best, ranges, None)
}

/// Ratio statistics of one maximal experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximalReport {
    pub params: JacobiParams,
    pub p: f64,
    pub weight: WeightKind,
    pub truncation: usize,
    pub times: Vec<f64>,
    /// `‖W_* f‖ / ‖f‖` per test case; `None` for the zero sequence.
    pub heat_ratios: Vec<Option<f64>>,
    pub poisson_ratios: Vec<Option<f64>>,
    pub heat_max_ratio: f64,
    pub poisson_max_ratio: f64,
    /// `max_{f, n} (P_* f(n) - W_* f(n))`; non-positive when Poisson is dominated.
    pub domination_gap: f64,
}

impl MaximalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Maximal functions on `0..=truncation` for every test sequence, sharing the
/// kernel blocks between sequences. The supremum also covers `t → 0⁺`.
fn maximal_profiles(
    params: JacobiParams,
    tests: &[FiniteSequence],
    grid: &TimeGrid,
    truncation: usize,
    rule: Option<Subordination>,
) -> Result<Vec<FiniteSequence>> {
    let rows = tests.iter().map(FiniteSequence::support).max().unwrap_or(0) + 1;
    let mut maxima: Vec<Vec<f64>> = tests
        .iter()
        .map(|f| (0..=truncation).map(|n| f.get(n).abs()).collect())
        .collect();
    let l1_bound = tests
        .iter()
        .map(|f| f.values().iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    for &t in grid.times() {
        if t == 0.0 {
            continue;
        }
        let block = match rule {
            None => heat_kernel_block(params, t, rows, truncation + 1, DEFAULT_KERNEL_TOL)?,
            Some(r) => poisson_kernel_block(params, t, rows, truncation + 1, r, l1_bound)?,
        };
        let kernel = &block.values;
        let cols = truncation + 1;
        maxima.par_iter_mut().zip(tests).for_each(|(maxima, f)| {
            for (n, slot) in maxima.iter_mut().enumerate() {
                let value: f64 = (0..=f.support())
                    .map(|m| f.get(m) * kernel[m * cols + n])
                    .sum();
                *slot = slot.max(value.abs());
            }
        });
    }
    Ok(maxima.into_iter().map(FiniteSequence::new).collect())
}

/// `max_f ‖W_* f‖_{ℓ^p(w)} / ‖f‖_{ℓ^p(w)}` (`p > 1`) or
/// `max_f ‖W_* f‖_{ℓ^{1,∞}(w)} / ‖f‖_{ℓ^1(w)}` (`p = 1`), and the same for
/// `P_*`, with maximal functions on `0..=truncation`.
pub fn maximal_inequality_experiment(
    params: JacobiParams,
    w: &WeightSeq,
    p: f64,
    tests: &[FiniteSequence],
    grid: &TimeGrid,
    truncation: Option<usize>,
    rule: Subordination,
) -> Result<MaximalReport> {
    check_exponent(p)?;
    if tests.is_empty() {
        return Err(Error::invalid("empty test set"));
    }
    let support = tests.iter().map(FiniteSequence::support).max().unwrap();
    let truncation = truncation.unwrap_or_else(|| default_truncation(support, grid.max()));
    if truncation < support || truncation >= w.len() {
        return Err(Error::invalid(format!(
            "truncation {truncation} must cover the supports ({support}) and lie within the weight (length {})",
            w.len()
        )));
    }
    let heat = maximal_profiles(params, tests, grid, truncation, None)?;
    let poisson = maximal_profiles(params, tests, grid, truncation, Some(rule))?;
    let ratio = |maximal: &FiniteSequence, f: &FiniteSequence| -> Result<Option<f64>> {
        if f.is_zero() {
            return Ok(None);
        }
        let (num, den) = if p > 1.0 {
            (weighted_lp_norm(maximal, w, p)?, weighted_lp_norm(f, w, p)?)
        } else {
            (weak_l1_norm(maximal, w)?, weighted_lp_norm(f, w, 1.0)?)
        };
        Ok(Some(num / den))
    };
    let heat_ratios = heat
        .iter()
        .zip(tests)
        .map(|(m, f)| ratio(m, f))
        .collect::<Result<Vec<_>>>()?;
    let poisson_ratios = poisson
        .iter()
        .zip(tests)
        .map(|(m, f)| ratio(m, f))
        .collect::<Result<Vec<_>>>()?;
    let top = |r: &[Option<f64>]| r.iter().flatten().copied().fold(0.0, f64::max);
    let domination_gap = heat
        .iter()
        .zip(&poisson)
        .flat_map(|(h, q)| (0..=truncation).map(move |n| q.get(n) - h.get(n)))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(MaximalReport {
        params,
        p,
        weight: w.kind(),
        truncation,
        times: grid.times().to_vec(),
        heat_max_ratio: top(&heat_ratios),
        poisson_max_ratio: top(&poisson_ratios),
        heat_ratios,
        poisson_ratios,
        domination_gap,
    })
}
