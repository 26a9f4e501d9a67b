//! Minimal δ-covers and the box-counting style dimension estimate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::setcover::min_set_cover;
use super::{rational_ln, Ball, BallCover, HausdorffError};
use crate::qspace::{ExtRational, FiniteQSpace, PointSet};

/// Largest candidate count solved exactly.
pub const DEFAULT_EXACT_THRESHOLD: usize = 20;

fn ser_rational<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// A minimum-cardinality cover found at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct MinCover {
    pub cover: BallCover,
    /// False when the greedy fallback was used.
    pub exact: bool,
}

/// Covers `A \ {∞}` by balls of radius `δ` centered at ordinary points of
/// the space, using as few balls as the solver finds.
pub fn min_delta_cover(space: &FiniteQSpace, a: &PointSet, delta: &BigRational) -> Result<MinCover, HausdorffError> {
    min_delta_cover_with(space, a, delta, DEFAULT_EXACT_THRESHOLD)
}

pub fn min_delta_cover_with(
    space: &FiniteQSpace,
    a: &PointSet,
    delta: &BigRational,
    exact_threshold: usize,
) -> Result<MinCover, HausdorffError> {
    if !delta.is_positive() {
        return Err(HausdorffError::NonPositiveScale(delta.to_string()));
    }
    let mut target = a.clone();
    target.grow(space.len());
    if let Some(w) = space.infinity() {
        target.set(w, false);
    }
    let radius = ExtRational::from(delta.clone());
    let centers: Vec<usize> = space.ordinary().collect();
    let candidates: Vec<PointSet> = centers
        .iter()
        .map(|&c| {
            let mut b = space.ball(c, &radius);
            b.intersect_with(&target);
            b
        })
        .collect();
    let sol = min_set_cover(&target, &candidates, exact_threshold)
        .expect("every ordinary point centers a ball containing itself");
    let balls = sol
        .chosen
        .iter()
        .map(|&i| Ball { center: space.label(centers[i]).to_string(), radius: radius.clone() })
        .collect();
    Ok(MinCover { cover: BallCover { scale: radius, balls }, exact: sol.exact })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleResult {
    #[serde(serialize_with = "ser_rational")]
    pub delta: BigRational,
    pub delta_f64: f64,
    /// Number of balls in the cover found.
    pub count: usize,
    /// `count · δ^s` for the exponent of the surrounding report.
    pub cost: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub s: f64,
    pub scales: Vec<ScaleResult>,
    /// Indices `k` with `count[k] < count[k-1]` although `δ` shrank.
    pub monotonicity_violations: Vec<usize>,
    pub note: &'static str,
}

const RESOLUTION_NOTE: &str =
    "finite-sample estimate: scales are floored at the smallest positive distance of the sample";

fn check_schedule(space: &FiniteQSpace, schedule: &[BigRational]) -> Result<(), HausdorffError> {
    for d in schedule {
        if !d.is_positive() {
            return Err(HausdorffError::NonPositiveScale(d.to_string()));
        }
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(HausdorffError::NotDecreasing);
    }
    if let (Some(floor), Some(last)) = (space.min_positive_distance(), schedule.last()) {
        if last < &floor {
            return Err(HausdorffError::BelowResolution { delta: last.to_string(), floor: floor.to_string() });
        }
    }
    Ok(())
}

fn run_schedule(
    space: &FiniteQSpace,
    a: &PointSet,
    schedule: &[BigRational],
    exact_threshold: usize,
) -> Result<Vec<(BigRational, MinCover)>, HausdorffError> {
    schedule
        .par_iter()
        .map(|d| Ok((d.clone(), min_delta_cover_with(space, a, d, exact_threshold)?)))
        .collect()
}

fn violations(scales: &[ScaleResult]) -> Vec<usize> {
    (1..scales.len()).filter(|&k| scales[k].count < scales[k - 1].count).collect()
}

/// Cover costs `N(δ) δ^s` of `A` along a strictly decreasing schedule.
pub fn measure_estimate(
    space: &FiniteQSpace,
    a: &PointSet,
    s: f64,
    schedule: &[BigRational],
    exact_threshold: usize,
) -> Result<MeasureEstimate, HausdorffError> {
    check_schedule(space, schedule)?;
    let scales: Vec<ScaleResult> = run_schedule(space, a, schedule, exact_threshold)?
        .into_iter()
        .map(|(delta, mc)| {
            let delta_f64 = delta.to_f64().unwrap_or(f64::NAN);
            ScaleResult {
                count: mc.cover.len(),
                cost: super::cover_cost(&mc.cover, s),
                exact: mc.exact,
                delta,
                delta_f64,
            }
        })
        .collect();
    Ok(MeasureEstimate { s, monotonicity_violations: violations(&scales), scales, note: RESOLUTION_NOTE })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DimConfig {
    /// Smallest scale; defaults to twice the smallest positive distance.
    pub dmin: Option<BigRational>,
    /// Largest scale; defaults to half the diameter.
    pub dmax: Option<BigRational>,
    /// Number of geometrically spaced scales. Without it the scales halve
    /// from `dmax` while they stay at or above `dmin`.
    pub grid: Option<usize>,
    pub exact_threshold: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimEstimate {
    /// Least-squares slope of `ln N(δ)` against `ln(1/δ)`.
    pub dimension: f64,
    /// Root mean square residual of the fit.
    pub residual: f64,
    /// Costs are `N(δ) δ^dimension`.
    pub scales: Vec<ScaleResult>,
    pub exact_flags: Vec<bool>,
    pub monotonicity_violations: Vec<usize>,
    pub note: &'static str,
}

/// The scales `dmax, dmax/2, dmax/4, ...` down to `dmin`.
pub fn default_schedule(dmax: &BigRational, dmin: &BigRational) -> Vec<BigRational> {
    let mut out = Vec::new();
    let mut d = dmax.clone();
    let two = BigInt::from(2);
    while &d >= dmin && d.is_positive() {
        out.push(d.clone());
        d /= &two;
    }
    out
}

fn grid_schedule(dmax: &BigRational, dmin: &BigRational, g: usize) -> Vec<BigRational> {
    if g == 0 || dmax < dmin {
        return Vec::new();
    }
    if g == 1 {
        return vec![dmax.clone()];
    }
    let (hi, lo) = (rational_ln(dmax), rational_ln(dmin));
    let mut out: Vec<BigRational> = (0..g)
        .map(|k| {
            if k == 0 {
                dmax.clone()
            } else if k == g - 1 {
                dmin.clone()
            } else {
                let v = (hi + (lo - hi) * k as f64 / (g - 1) as f64).exp();
                BigRational::from_f64(v).expect("finite scale")
            }
        })
        .collect();
    out.dedup();
    out.retain(|d| d >= dmin && d <= dmax);
    out
}

/// Estimates the critical exponent from minimal cover cardinalities.
pub fn hausdorff_dim_estimate(space: &FiniteQSpace, config: &DimConfig) -> Result<DimEstimate, HausdorffError> {
    let a = space.ordinary_set();
    if a.count_ones(..) < 2 {
        return Err(HausdorffError::TooFewPoints);
    }
    let floor = space.min_positive_distance().expect("two ordinary points");
    let two = BigRational::from_integer(BigInt::from(2));
    let dmin = config.dmin.clone().unwrap_or_else(|| &floor * &two);
    let dmax = config.dmax.clone().unwrap_or_else(|| space.finite_diameter() / &two);
    let schedule = match config.grid {
        Some(g) => grid_schedule(&dmax, &dmin, g),
        None => default_schedule(&dmax, &dmin),
    };
    if schedule.len() < 3 {
        return Err(HausdorffError::TooFewScales(schedule.len()));
    }
    check_schedule(space, &schedule)?;
    let threshold = config.exact_threshold.unwrap_or(DEFAULT_EXACT_THRESHOLD);
    let results = run_schedule(space, &a, &schedule, threshold)?;
    let xs: Vec<f64> = results.iter().map(|(d, _)| -rational_ln(d)).collect();
    let ys: Vec<f64> = results.iter().map(|(_, mc)| (mc.cover.len() as f64).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    let scales: Vec<ScaleResult> = results
        .into_iter()
        .map(|(delta, mc)| {
            let delta_f64 = delta.to_f64().unwrap_or(f64::NAN);
            ScaleResult {
                count: mc.cover.len(),
                cost: mc.cover.len() as f64 * delta_f64.powf(slope),
                exact: mc.exact,
                delta,
                delta_f64,
            }
        })
        .collect();
    Ok(DimEstimate {
        dimension: slope,
        residual,
        exact_flags: scales.iter().map(|s| s.exact).collect(),
        monotonicity_violations: violations(&scales),
        scales,
        note: RESOLUTION_NOTE,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}
