//! Ball covers, cover costs and finite-sample Hausdorff dimension
//! estimates.
//!
//! A `δ`-cover of `A \ {∞}` is a family of closed balls of radius at most
//! `δ` centered at ordinary points. Its cost at exponent `s` is
//! `Σ r_i^s` with `0^0 = 1`.

mod estimate;
mod setcover;
mod transport;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qspace::{ExtRational, FiniteQSpace, PointSet, QSpaceError};

pub use estimate::{
    default_schedule, hausdorff_dim_estimate, measure_estimate, min_delta_cover, min_delta_cover_with,
    DimConfig, DimEstimate, MeasureEstimate, MinCover, ScaleResult, DEFAULT_EXACT_THRESHOLD,
};
pub use setcover::{min_set_cover, reduce_candidates, SetCoverSolution};
pub use transport::{transport_cover_involution, TransportedCover};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HausdorffError {
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(String),
    #[error("scale {delta} is below the resolution floor {floor} (smallest positive distance)")]
    BelowResolution { delta: String, floor: String },
    #[error("scale schedule must be strictly decreasing")]
    NotDecreasing,
    #[error("only {0} usable scales; at least 3 are needed for a slope")]
    TooFewScales(usize),
    #[error("space needs at least two ordinary points")]
    TooFewPoints,
    #[error("transport needs delta < eps / K^2 = {bound}, got delta = {delta}")]
    Hypothesis { delta: String, bound: String },
    #[error("input is not a valid cover: {0}")]
    InvalidCover(String),
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error(transparent)]
    Space(#[from] QSpaceError),
}

/// A closed ball given by the label of its center.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ball {
    pub center: String,
    pub radius: ExtRational,
}

/// A family of balls with the scale `δ` bounding their radii.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallCover {
    pub scale: ExtRational,
    pub balls: Vec<Ball>,
}

impl BallCover {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("cover serialization");
        s.push('\n');
        s
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    /// Points of `space` covered by the balls.
    pub fn union(&self, space: &FiniteQSpace) -> Result<PointSet, QSpaceError> {
        let mut out = space.empty_set();
        for b in &self.balls {
            out.union_with(&space.ball(space.index_of(&b.center)?, &b.radius));
        }
        Ok(out)
    }
}

/// `Σ r_i^s` in floating point, `0^0 = 1`.
pub fn cover_cost(cover: &BallCover, s: f64) -> f64 {
    cover.balls.iter().map(|b| b.radius.to_f64().powf(s)).sum()
}

/// `Σ r_i^s` exactly for an integer exponent. `None` if a radius is
/// infinite.
pub fn cover_cost_exact(cover: &BallCover, s: u32) -> Option<BigRational> {
    cover
        .balls
        .iter()
        .map(|b| b.radius.as_finite().map(|r| Pow::pow(r, s)))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverCheck {
    pub ok: bool,
    /// Domain points outside every ball.
    pub uncovered: Vec<String>,
    /// Balls with radius above the scale.
    pub oversized: Vec<String>,
    /// Centers that are the point at infinity or unknown.
    pub bad_centers: Vec<String>,
}

/// Independent check that `cover` covers `domain` with radii at most its
/// scale and ordinary centers. Membership is tested point by point from
/// the distance matrix.
pub fn verify_ball_cover(space: &FiniteQSpace, cover: &BallCover, domain: &PointSet) -> CoverCheck {
    let mut bad_centers = Vec::new();
    let mut oversized = Vec::new();
    let mut centers = Vec::new();
    for b in &cover.balls {
        match space.index_of(&b.center) {
            Ok(c) if space.is_ordinary(c) => centers.push((c, &b.radius)),
            _ => bad_centers.push(b.center.clone()),
        }
        if b.radius > cover.scale {
            oversized.push(b.center.clone());
        }
    }
    let uncovered: Vec<String> = domain
        .ones()
        .filter(|&p| !centers.iter().any(|(c, r)| space.dist(*c, p) <= *r))
        .map(|p| space.label(p).to_string())
        .collect();
    CoverCheck {
        ok: uncovered.is_empty() && oversized.is_empty() && bad_centers.is_empty(),
        uncovered,
        oversized,
        bad_centers,
    }
}

pub(crate) fn rational_ln(r: &BigRational) -> f64 {
    let ln_int = |v: &BigInt| {
        let bits = v.bits();
        if bits < 1000 {
            v.to_f64().expect("finite").ln()
        } else {
            let shift = bits - 64;
            (v >> shift).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
        }
    };
    ln_int(r.numer()) - ln_int(r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspace::{line_space, parse_rational};

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn cover(scale: &str, balls: &[(&str, &str)]) -> BallCover {
        BallCover {
            scale: scale.parse().unwrap(),
            balls: balls
                .iter()
                .map(|(c, rad)| Ball { center: c.to_string(), radius: rad.parse().unwrap() })
                .collect(),
        }
    }

    #[test]
    fn costs() {
        let c = cover("1", &[("1", "1"), ("4", "1")]);
        assert_eq!(cover_cost(&c, 1.0), 2.0);
        assert_eq!(cover_cost(&c, 0.0), 2.0);
        let c = cover("1/2", &[("1", "1/2"), ("4", "1/2"), ("2", "1/2")]);
        assert!((cover_cost(&c, 1.5) - 3.0 * 0.5f64.powf(1.5)).abs() < 1e-15);
        assert_eq!(cover_cost_exact(&c, 2), Some(r("3/4")));
        assert_eq!(cover_cost_exact(&c, 0), Some(r("3")));
        let zero = cover("1", &[("1", "0")]);
        assert_eq!(cover_cost(&zero, 0.0), 1.0);
    }

    #[test]
    fn verifier() {
        let s = line_space(&[r("0"), r("1"), r("2"), r("4")]).unwrap();
        let all = s.ordinary_set();
        let good = cover("1", &[("1", "1"), ("4", "1")]);
        assert!(verify_ball_cover(&s, &good, &all).ok);
        let short = cover("1", &[("1", "1")]);
        assert_eq!(verify_ball_cover(&s, &short, &all).uncovered, vec!["4"]);
        let big = cover("1", &[("1", "3")]);
        assert_eq!(verify_ball_cover(&s, &big, &all).oversized, vec!["1"]);
        let e = s.extend_with_infinity().unwrap();
        let at_inf = cover("1", &[("inf", "1")]);
        assert_eq!(verify_ball_cover(&e, &at_inf, &e.empty_set()).bad_centers, vec!["inf"]);
    }

    #[test]
    fn cover_json_round_trip() {
        let c = cover("1/2", &[("a", "1/2")]);
        let text = c.to_json();
        assert_eq!(BallCover::from_json(&text).unwrap(), c);
    }
}
