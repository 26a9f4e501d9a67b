//! Moving a δ-cover to the involuted space.
//!
//! Balls of `d` whose center is farther than `ε/K` from `o` are reissued
//! in `d_o` with radii multiplied by `K³/ε²`. For `δ < ε/K²` the result
//! covers everything outside `{∞} ∪ B_ε(o)`.

use num_rational::BigRational;
use num_traits::{Pow, Signed};
use serde::Serialize;

use super::{verify_ball_cover, Ball, BallCover, CoverCheck, HausdorffError};
use crate::qspace::{ExtRational, FiniteQSpace};

#[derive(Debug, Clone, Serialize)]
pub struct TransportedCover {
    /// The cover in the involuted space, with scale `K³δ/ε²`.
    pub cover: BallCover,
    /// Centers of the dropped balls.
    pub dropped: Vec<String>,
    /// The quasi-constant `K` used.
    pub k: String,
    /// Result of checking the cover on `X \ ({∞} ∪ B_ε(o))` under `d_o`.
    pub check: CoverCheck,
    #[serde(skip)]
    pub involuted: FiniteQSpace,
}

/// Transports `cover` (a δ-cover of the ordinary points) to
/// `involute(space, o)`.
pub fn transport_cover_involution(
    space: &FiniteQSpace,
    cover: &BallCover,
    o: usize,
    eps: &BigRational,
) -> Result<TransportedCover, HausdorffError> {
    if !eps.is_positive() {
        return Err(HausdorffError::NonPositiveEpsilon);
    }
    let delta = cover
        .scale
        .as_finite()
        .ok_or_else(|| HausdorffError::InvalidCover("infinite scale".into()))?;
    let k = space.quasi_constant().clone();
    let k2 = &k * &k;
    let bound = eps / &k2;
    if delta >= &bound {
        return Err(HausdorffError::Hypothesis { delta: delta.to_string(), bound: bound.to_string() });
    }
    let input = verify_ball_cover(space, cover, &space.ordinary_set());
    if !input.ok {
        return Err(HausdorffError::InvalidCover(format!(
            "uncovered {:?}, oversized {:?}, bad centers {:?}",
            input.uncovered, input.oversized, input.bad_centers
        )));
    }
    let involuted = space.involute(o)?;
    let far = ExtRational::from(eps / &k);
    let factor: BigRational = Pow::pow(&k, 3u32) / (eps * eps);
    let mut balls = Vec::new();
    let mut dropped = Vec::new();
    for b in &cover.balls {
        let c = space.index_of(&b.center)?;
        if space.dist(c, o) > &far {
            balls.push(Ball { center: b.center.clone(), radius: b.radius.scale(&factor) });
        } else {
            dropped.push(b.center.clone());
        }
    }
    let out = BallCover { scale: ExtRational::from(delta * &factor), balls };
    // the domain X \ ({∞} ∪ B_ε(o)) in terms of the original distance
    let near = space.ball(o, &ExtRational::from(eps.clone()));
    let mut domain = space.ordinary_set();
    domain.difference_with(&near);
    let check = verify_ball_cover(&involuted, &out, &domain);
    Ok(TransportedCover { cover: out, dropped, k: k.to_string(), check, involuted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hausdorff::min_delta_cover;
    use crate::qspace::{line_space, parse_rational};

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn grid(n: i64) -> FiniteQSpace {
        line_space(&(0..n).map(|i| BigRational::from_integer(i.into())).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn transported_cover_passes_check() {
        let s = grid(12);
        // K = 2, eps = 8 allows delta < 2
        let delta = r("1");
        let cover = min_delta_cover(&s, &s.ordinary_set(), &delta).unwrap().cover;
        let t = transport_cover_involution(&s, &cover, 0, &r("8")).unwrap();
        assert!(t.check.ok, "{:?}", t.check);
        assert_eq!(t.cover.scale, ExtRational::ratio(1, 8));
        assert_eq!(t.involuted.infinity(), Some(0));
    }

    #[test]
    fn far_centers_are_all_kept() {
        let s = line_space(&[r("0"), r("100"), r("101"), r("102")]).unwrap();
        let cover = min_delta_cover(&s, &s.ordinary_set(), &r("1")).unwrap().cover;
        let kept: Vec<_> = cover.balls.iter().filter(|b| b.center != "0").cloned().collect();
        let t = transport_cover_involution(&s, &cover, 0, &r("8")).unwrap();
        assert_eq!(t.cover.balls.len(), kept.len());
        for (a, b) in t.cover.balls.iter().zip(&kept) {
            assert_eq!(a.radius, b.radius.scale(&r("1/8")));
        }
        assert!(t.check.ok);
    }

    #[test]
    fn single_ball_at_o_is_dropped() {
        let s = line_space(&[r("0"), r("1/4"), r("1/2")]).unwrap();
        let cover = BallCover {
            scale: "1/2".parse().unwrap(),
            balls: vec![Ball { center: "0".into(), radius: "1/2".parse().unwrap() }],
        };
        let t = transport_cover_involution(&s, &cover, 0, &r("4")).unwrap();
        assert!(t.cover.balls.is_empty());
        // everything lies within eps of o, so the empty family suffices
        assert!(t.check.ok);
    }

    #[test]
    fn hypothesis_is_enforced() {
        let s = grid(6);
        let cover = min_delta_cover(&s, &s.ordinary_set(), &r("2")).unwrap().cover;
        assert!(matches!(
            transport_cover_involution(&s, &cover, 0, &r("8")),
            Err(HausdorffError::Hypothesis { .. })
        ));
        let partial = BallCover { scale: "1".parse().unwrap(), balls: vec![] };
        assert!(matches!(
            transport_cover_involution(&s, &partial, 0, &r("8")),
            Err(HausdorffError::InvalidCover(_))
        ));
    }
}
