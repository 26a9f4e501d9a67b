//! Permutations of quadruple positions and the induced action on the three
//! pair-partitions `{01|23}`, `{02|13}`, `{03|12}`.

use std::fmt;

/// A permutation of `{0,1,2,3}` stored as its image list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct S4Perm(pub [u8; 4]);

/// A permutation of the three cross-ratio components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct S3Perm(pub [u8; 3]);

impl S4Perm {
    pub const IDENTITY: S4Perm = S4Perm([0, 1, 2, 3]);

    /// Returns `None` unless `images` is a permutation of `0..4`.
    pub fn new(images: [u8; 4]) -> Option<Self> {
        let mut seen = [false; 4];
        for &i in &images {
            if i > 3 || seen[i as usize] {
                return None;
            }
            seen[i as usize] = true;
        }
        Some(S4Perm(images))
    }

    /// The transposition of positions `a` and `b`.
    pub fn transposition(a: u8, b: u8) -> Self {
        let mut p = [0, 1, 2, 3];
        p.swap(a as usize, b as usize);
        S4Perm(p)
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &S4Perm) -> S4Perm {
        S4Perm(other.0.map(|i| self.0[i as usize]))
    }

    pub fn inverse(&self) -> S4Perm {
        let mut inv = [0u8; 4];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p as usize] = i as u8;
        }
        S4Perm(inv)
    }

    /// `+1` or `-1`.
    pub fn sign(&self) -> i8 {
        let mut inversions = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if self.0[i] > self.0[j] {
                    inversions += 1;
                }
            }
        }
        if inversions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Moves the entry at position `i` to position `self(i)`.
    pub fn act<T: Copy>(&self, quad: [T; 4]) -> [T; 4] {
        let mut out = quad;
        for (i, &v) in quad.iter().enumerate() {
            out[self.apply(i)] = v;
        }
        out
    }

    /// All 24 permutations in lexicographic order of their image lists.
    pub fn all() -> Vec<S4Perm> {
        let mut out = Vec::with_capacity(24);
        for a in 0..4u8 {
            for b in 0..4u8 {
                for c in 0..4u8 {
                    for d in 0..4u8 {
                        if let Some(p) = S4Perm::new([a, b, c, d]) {
                            out.push(p);
                        }
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for S4Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {} {} {}]", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

impl S3Perm {
    pub const IDENTITY: S3Perm = S3Perm([0, 1, 2]);

    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn compose(&self, other: &S3Perm) -> S3Perm {
        S3Perm(other.0.map(|i| self.0[i as usize]))
    }

    pub fn sign(&self) -> i8 {
        let mut inversions = 0;
        for i in 0..3 {
            for j in i + 1..3 {
                if self.0[i] > self.0[j] {
                    inversions += 1;
                }
            }
        }
        if inversions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Moves component `t` to position `self(t)`.
    pub fn act<T: Clone>(&self, triple: &[T; 3]) -> [T; 3] {
        let mut out = triple.clone();
        for (t, v) in triple.iter().enumerate() {
            out[self.apply(t)] = v.clone();
        }
        out
    }
}

/// Index of the pair-partition containing the pair `{a, b}` of distinct
/// positions: `{0,1}` and `{2,3}` give 0, `{0,2}` and `{1,3}` give 1,
/// `{0,3}` and `{1,2}` give 2.
pub fn partition_of(a: usize, b: usize) -> usize {
    debug_assert!(a != b && a < 4 && b < 4);
    if a == 0 || b == 0 {
        a + b - 1
    } else {
        // the complementary pair contains 0 and the remaining position
        6 - a - b - 1
    }
}

/// The homomorphism `S4 -> S3` recording how `sigma` permutes the three
/// pair-partitions: partition `t` is sent to partition `phi(sigma)(t)`.
pub fn phi(sigma: &S4Perm) -> S3Perm {
    let mut out = [0u8; 3];
    for (t, slot) in out.iter_mut().enumerate() {
        let (a, b) = (sigma.apply(0), sigma.apply(t + 1));
        *slot = partition_of(a, b) as u8;
    }
    S3Perm(out)
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct PhiTableReport {
    pub products_checked: usize,
    pub homomorphism_failures: usize,
    pub surjective: bool,
    pub kernel: Vec<[u8; 4]>,
    pub kernel_is_klein: bool,
}

impl PhiTableReport {
    pub fn ok(&self) -> bool {
        self.homomorphism_failures == 0 && self.surjective && self.kernel_is_klein
    }
}

/// Exhaustively checks `phi(στ) = phi(σ)phi(τ)` on all 576 pairs, that
/// `phi` is onto and that its kernel is `{e, (01)(23), (02)(13), (03)(12)}`.
pub fn verify_phi_table() -> PhiTableReport {
    let all = S4Perm::all();
    let mut failures = 0;
    let mut checked = 0;
    for s in &all {
        for t in &all {
            checked += 1;
            if phi(&s.compose(t)) != phi(s).compose(&phi(t)) {
                failures += 1;
            }
        }
    }
    let mut image: Vec<S3Perm> = all.iter().map(phi).collect();
    image.sort();
    image.dedup();
    let kernel: Vec<[u8; 4]> =
        all.iter().filter(|p| phi(p) == S3Perm::IDENTITY).map(|p| p.0).collect();
    let klein = vec![[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]];
    let mut sorted = kernel.clone();
    sorted.sort();
    PhiTableReport {
        products_checked: checked,
        homomorphism_failures: failures,
        surjective: image.len() == 6,
        kernel_is_klein: sorted == klein,
        kernel,
    }
}
