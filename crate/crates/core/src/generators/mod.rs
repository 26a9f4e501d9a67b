//! Seeded constructions of test spaces.
//!
//! Every generator is a pure function of its [`GeneratorSpec`], and every
//! output is a validated [`FiniteQSpace`].

mod corpus;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qspace::{line_space, parse_rational, ExtRational, FiniteQSpace, QSpaceError};

pub use corpus::{corpus, corpus_manifest, CorpusEntry};

/// Largest space most generators produce.
pub const MAX_POINTS: usize = 512;
pub const MAX_CANTOR_DEPTH: u32 = 10;
/// Irrational snowflake powers are rounded down to multiples of `10^-40`.
pub const SNOWFLAKE_DIGITS: u32 = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("{what} would produce {points} points, above the cap of {cap}")]
    TooLarge { what: &'static str, points: usize, cap: usize },
    #[error("parameter `{name}` out of range: {detail}")]
    Parameter { name: &'static str, detail: String },
    #[error("snowflake base is not a metric space")]
    NotMetric,
    #[error(transparent)]
    Space(#[from] QSpaceError),
}

fn param(name: &'static str, detail: impl Into<String>) -> GeneratorError {
    GeneratorError::Parameter { name, detail: detail.into() }
}

/// A generator invocation. Rational parameters are strings `p` or `p/q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// `n` equally spaced points `0, step, 2 step, ...` on the line.
    LineGrid {
        n: usize,
        #[serde(default = "default_step")]
        step: String,
    },
    /// Explicit points on the line.
    LinePoints { points: Vec<String> },
    /// Left endpoints of the level-`depth` middle-thirds intervals.
    Cantor { depth: u32 },
    /// Leaves of a rooted tree of height `depth` where each inner node has
    /// a seeded number of children in `2..=branching`; `d(x,y) = 2^-l`
    /// with `l` the level of the lowest common ancestor.
    TreeUltrametric { depth: u32, branching: u32, seed: u64 },
    /// `d^epsilon` for a metric base and `0 < epsilon <= 2`.
    Snowflake { base: Box<GeneratorSpec>, epsilon: String },
    /// The involution of the base at the point labeled `o`.
    Involuted { base: Box<GeneratorSpec>, o: String },
    /// `d(x,y) (1 + eta u_xy)` with `u_xy` uniform in `[-1, 1]` (multiples
    /// of 1/1000), `0 <= eta < 1`.
    RandomPerturbed { base: Box<GeneratorSpec>, seed: u64, eta: String },
    /// The base with a point at infinity added.
    Extended { base: Box<GeneratorSpec> },
}

fn default_step() -> String {
    "1".to_string()
}

/// A generated space. `exact` is false when some distance was rounded.
#[derive(Debug, Clone)]
pub struct Generated {
    pub space: FiniteQSpace,
    pub exact: bool,
}

fn rat(name: &'static str, s: &str) -> Result<BigRational, GeneratorError> {
    parse_rational(s).map_err(|e| param(name, e.to_string()))
}

fn check_cap(what: &'static str, points: usize) -> Result<(), GeneratorError> {
    if points > MAX_POINTS {
        Err(GeneratorError::TooLarge { what, points, cap: MAX_POINTS })
    } else {
        Ok(())
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated, GeneratorError> {
    let exact = |space| Generated { space, exact: true };
    match spec {
        GeneratorSpec::LineGrid { n, step } => {
            let step = rat("step", step)?;
            Ok(exact(gen_line_grid(*n, &step)?))
        }
        GeneratorSpec::LinePoints { points } => {
            let pts = points.iter().map(|p| rat("points", p)).collect::<Result<Vec<_>, _>>()?;
            check_cap("line-points", pts.len())?;
            Ok(exact(line_space(&pts)?))
        }
        GeneratorSpec::Cantor { depth } => Ok(exact(gen_cantor(*depth)?)),
        GeneratorSpec::TreeUltrametric { depth, branching, seed } => {
            Ok(exact(gen_tree_ultrametric(*depth, *branching, *seed)?))
        }
        GeneratorSpec::Snowflake { base, epsilon } => {
            let base = generate(base)?;
            let out = gen_snowflake(&base.space, &rat("epsilon", epsilon)?)?;
            Ok(Generated { space: out.space, exact: out.exact && base.exact })
        }
        GeneratorSpec::Involuted { base, o } => {
            let base = generate(base)?;
            Ok(Generated { space: gen_involuted(&base.space, o)?, exact: base.exact })
        }
        GeneratorSpec::RandomPerturbed { base, seed, eta } => {
            let base = generate(base)?;
            let space = gen_random_perturbed(&base.space, *seed, &rat("eta", eta)?)?;
            Ok(Generated { space, exact: base.exact })
        }
        GeneratorSpec::Extended { base } => {
            let base = generate(base)?;
            Ok(Generated { space: base.space.extend_with_infinity()?, exact: base.exact })
        }
    }
}

/// Points `0, step, ..., (n-1) step`.
pub fn gen_line_grid(n: usize, step: &BigRational) -> Result<FiniteQSpace, GeneratorError> {
    check_cap("line-grid", n)?;
    if n == 0 {
        return Err(param("n", "must be at least 1"));
    }
    if !step.is_positive() {
        return Err(param("step", "must be positive"));
    }
    let pts: Vec<BigRational> = (0..n).map(|i| step * BigInt::from(i)).collect();
    Ok(line_space(&pts)?)
}

/// The `2^depth` left endpoints of the middle-thirds construction in
/// `[0, 1]`, in increasing order.
pub fn cantor_points(depth: u32) -> Result<Vec<BigRational>, GeneratorError> {
    if depth == 0 || depth > MAX_CANTOR_DEPTH {
        return Err(param("depth", format!("{depth} not in 1..={MAX_CANTOR_DEPTH}")));
    }
    let mut pts = vec![BigRational::zero()];
    let mut len = BigRational::one();
    for _ in 0..depth {
        len /= BigInt::from(3);
        let shift = &len * BigInt::from(2);
        pts = pts.into_iter().flat_map(|a| [a.clone(), a + &shift]).collect();
    }
    Ok(pts)
}

pub fn gen_cantor(depth: u32) -> Result<FiniteQSpace, GeneratorError> {
    Ok(line_space(&cantor_points(depth)?)?)
}

pub fn gen_tree_ultrametric(depth: u32, branching: u32, seed: u64) -> Result<FiniteQSpace, GeneratorError> {
    if depth == 0 {
        return Err(param("depth", "must be at least 1"));
    }
    if branching < 2 {
        return Err(param("branching", "must be at least 2"));
    }
    let bound = (branching as u128).checked_pow(depth).unwrap_or(u128::MAX);
    if bound > MAX_POINTS as u128 {
        let points = usize::try_from(bound).unwrap_or(usize::MAX);
        return Err(GeneratorError::TooLarge { what: "tree-ultrametric", points, cap: MAX_POINTS });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // leaves as root-to-leaf child index paths
    let mut paths: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for p in paths {
            let k = rng.gen_range(2..=branching);
            for c in 0..k {
                let mut q = p.clone();
                q.push(c);
                next.push(q);
            }
        }
        paths = next;
    }
    let labels = paths
        .iter()
        .map(|p| p.iter().map(u32::to_string).collect::<Vec<_>>().join("."))
        .collect();
    let space = FiniteQSpace::from_fn(labels, None, |i, j| {
        let level = paths[i].iter().zip(&paths[j]).take_while(|(a, b)| a == b).count();
        ExtRational::from(BigRational::new(BigInt::one(), BigInt::one() << level))
    })?;
    Ok(space)
}

/// `d^epsilon` of a metric space, with an exactness flag.
pub fn gen_snowflake(space: &FiniteQSpace, epsilon: &BigRational) -> Result<Generated, GeneratorError> {
    if !epsilon.is_positive() || epsilon > &BigRational::from_integer(2.into()) {
        return Err(param("epsilon", format!("{epsilon} not in (0, 2]")));
    }
    if !space.is_metric() {
        return Err(GeneratorError::NotMetric);
    }
    let mut exact = true;
    let out = FiniteQSpace::from_fn(space.labels().to_vec(), space.infinity(), |i, j| {
        match space.dist(i, j).as_finite() {
            None => ExtRational::INF,
            Some(d) => {
                let (v, e) = rational_power(d, epsilon);
                exact &= e;
                ExtRational::from(v)
            }
        }
    })?;
    Ok(Generated { space: out, exact })
}

/// `d^(p/q)`: exact when the `q`-th roots of numerator and denominator of
/// `d^p` are integers, otherwise rounded down to a multiple of
/// `10^-SNOWFLAKE_DIGITS`.
fn rational_power(d: &BigRational, epsilon: &BigRational) -> (BigRational, bool) {
    let p = epsilon.numer().to_u32().expect("epsilon <= 2 has a small numerator");
    let q = epsilon.denom().to_u32().expect("epsilon denominator fits in u32");
    let dp: BigRational = Pow::pow(d, p);
    let (num, den) = (dp.numer(), dp.denom());
    let (rn, rd) = (num.nth_root(q), den.nth_root(q));
    if Pow::pow(&rn, q) == *num && Pow::pow(&rd, q) == *den {
        return (BigRational::new(rn, rd), true);
    }
    let scale: BigInt = Pow::pow(BigInt::from(10), SNOWFLAKE_DIGITS);
    let scaled = num * Pow::pow(&scale, q) / den;
    (BigRational::new(scaled.nth_root(q), scale), false)
}

/// The involution at the point labeled `o`.
pub fn gen_involuted(space: &FiniteQSpace, o: &str) -> Result<FiniteQSpace, GeneratorError> {
    Ok(space.involute_at(o)?)
}

/// Multiplies each distance by a symmetric factor `1 + eta u`.
pub fn gen_random_perturbed(space: &FiniteQSpace, seed: u64, eta: &BigRational) -> Result<FiniteQSpace, GeneratorError> {
    if eta.is_negative() || eta >= &BigRational::one() {
        return Err(param("eta", format!("{eta} not in [0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = FiniteQSpace::from_fn(space.labels().to_vec(), space.infinity(), |i, j| {
        let u = BigRational::new(BigInt::from(rng.gen_range(-1000i32..=1000)), BigInt::from(1000));
        let factor = BigRational::one() + eta * u;
        space.dist(i, j).scale(&factor)
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn cantor_small_depths() {
        let pts = cantor_points(1).unwrap();
        assert_eq!(pts, vec![r("0"), r("2/3")]);
        let s = gen_cantor(3).unwrap();
        assert_eq!(s.len(), 8);
        // adjacent left endpoints at depth 3 are 2/27 apart
        assert_eq!(s.min_positive_distance().unwrap(), r("2/27"));
        assert!(gen_cantor(0).is_err());
        assert!(gen_cantor(11).is_err());
    }

    #[test]
    fn cantor_quasi_constants() {
        let expected = ["1", "3/2", "9/5", "27/14", "81/41"];
        for (depth, k) in (1..=5).zip(expected) {
            assert_eq!(gen_cantor(depth).unwrap().quasi_constant(), &r(k), "depth {depth}");
        }
    }

    #[test]
    fn tree_depth_two_branching_two() {
        let s = gen_tree_ultrametric(2, 2, 7).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.quasi_constant(), &BigRational::one());
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let d = s.fdist(i, j);
                    assert!(d == &r("1") || d == &r("1/2"));
                }
            }
        }
        assert!(gen_tree_ultrametric(10, 3, 0).is_err());
    }

    #[test]
    fn tree_is_reproducible() {
        let a = gen_tree_ultrametric(3, 3, 11).unwrap();
        let b = gen_tree_ultrametric(3, 3, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn snowflake_square_of_line_sample() {
        let s = line_space(&[r("0"), r("1"), r("2"), r("4")]).unwrap();
        let g = gen_snowflake(&s, &r("2")).unwrap();
        assert!(g.exact);
        assert_eq!(g.space.fdist(1, 2), &r("1"));
        assert_eq!(g.space.fdist(0, 3), &r("16"));
        assert_eq!(g.space.quasi_constant(), &r("4"));
        assert_eq!(gen_snowflake(&s, &r("1")).unwrap().space, s);
        assert!(gen_snowflake(&s, &r("3")).is_err());
        assert!(matches!(gen_snowflake(&g.space, &r("1")), Err(GeneratorError::NotMetric)));
    }

    #[test]
    fn irrational_snowflake_is_flagged() {
        let s = gen_line_grid(4, &r("1")).unwrap();
        let g = gen_snowflake(&s, &r("1/2")).unwrap();
        assert!(!g.exact);
        let v = g.space.fdist(0, 2);
        assert!((num_traits::ToPrimitive::to_f64(v).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        // perfect squares stay exact
        assert_eq!(g.space.fdist(0, 1), &r("1"));
    }

    #[test]
    fn involuted_grid_moves_infinity() {
        let s = gen_line_grid(5, &r("1")).unwrap();
        let t = gen_involuted(&s, "2").unwrap();
        assert_eq!(t.infinity(), Some(2));
        assert!(crate::qspace::validate(&t.to_data()).ok);
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let s = gen_line_grid(6, &r("1/2")).unwrap();
        assert_eq!(gen_random_perturbed(&s, 3, &r("0")).unwrap(), s);
        let p = gen_random_perturbed(&s, 3, &r("1/10")).unwrap();
        assert_ne!(p, s);
        assert_eq!(p, gen_random_perturbed(&s, 3, &r("1/10")).unwrap());
        assert!(gen_random_perturbed(&s, 3, &r("1")).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let spec = GeneratorSpec::Snowflake {
            base: Box::new(GeneratorSpec::LineGrid { n: 4, step: "1".into() }),
            epsilon: "2".into(),
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"kind\":\"snowflake\""));
        assert_eq!(serde_json::from_str::<GeneratorSpec>(&text).unwrap(), spec);
        assert!(gen_line_grid(513, &r("1")).is_err());
    }
}
