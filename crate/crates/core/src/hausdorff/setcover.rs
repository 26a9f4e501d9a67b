//! Minimum-cardinality set cover over bitsets.

use fixedbitset::FixedBitSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetCoverSolution {
    /// Indices into the candidate list.
    pub chosen: Vec<usize>,
    /// Whether the solution is provably minimal.
    pub exact: bool,
}

/// Drops duplicate candidates and candidates contained in another one.
/// Returns the indices of the kept candidates.
pub fn reduce_candidates(candidates: &[FixedBitSet]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    // larger sets first so that dominated ones are seen after their dominators
    order.sort_by_key(|&i| std::cmp::Reverse(candidates[i].count_ones(..)));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if candidates[i].is_clear() {
            continue;
        }
        if kept.iter().any(|&k| candidates[i].is_subset(&candidates[k])) {
            continue;
        }
        kept.push(i);
    }
    kept.sort_unstable();
    kept
}

/// Covers `universe` with as few candidates as possible. Exact
/// branch-and-bound when at most `exact_threshold` candidates survive
/// [`reduce_candidates`], greedy with redundancy removal otherwise.
/// Returns `None` if the candidates do not cover `universe`.
pub fn min_set_cover(
    universe: &FixedBitSet,
    candidates: &[FixedBitSet],
    exact_threshold: usize,
) -> Option<SetCoverSolution> {
    let mut union = FixedBitSet::with_capacity(universe.len());
    for c in candidates {
        union.union_with(c);
    }
    if !universe.is_subset(&union) {
        return None;
    }
    if universe.is_clear() {
        return Some(SetCoverSolution { chosen: Vec::new(), exact: true });
    }
    let restricted: Vec<FixedBitSet> = candidates
        .iter()
        .map(|c| {
            let mut r = c.clone();
            r.intersect_with(universe);
            r
        })
        .collect();
    let kept = reduce_candidates(&restricted);
    let sets: Vec<FixedBitSet> = kept.iter().map(|&i| restricted[i].clone()).collect();
    let local = if sets.len() <= exact_threshold {
        let greedy = greedy_cover(universe, &sets);
        let mut best = greedy.clone();
        let mut current = Vec::new();
        branch(universe.clone(), &sets, &mut current, &mut best);
        SetCoverSolution { chosen: best, exact: true }
    } else {
        SetCoverSolution { chosen: greedy_cover(universe, &sets), exact: false }
    };
    let mut chosen: Vec<usize> = local.chosen.iter().map(|&i| kept[i]).collect();
    chosen.sort_unstable();
    Some(SetCoverSolution { chosen, exact: local.exact })
}

fn greedy_cover(universe: &FixedBitSet, sets: &[FixedBitSet]) -> Vec<usize> {
    let mut uncovered = universe.clone();
    let mut chosen = Vec::new();
    while !uncovered.is_clear() {
        let (best, _) = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.intersection(&uncovered).count()))
            .max_by_key(|&(i, c)| (c, std::cmp::Reverse(i)))
            .expect("universe is covered by the candidates");
        uncovered.difference_with(&sets[best]);
        chosen.push(best);
    }
    // drop sets made redundant by later picks
    let mut i = 0;
    while i < chosen.len() {
        let mut rest = FixedBitSet::with_capacity(universe.len());
        for (j, &c) in chosen.iter().enumerate() {
            if j != i {
                rest.union_with(&sets[c]);
            }
        }
        if universe.is_subset(&rest) {
            chosen.remove(i);
        } else {
            i += 1;
        }
    }
    chosen
}

fn branch(uncovered: FixedBitSet, sets: &[FixedBitSet], current: &mut Vec<usize>, best: &mut Vec<usize>) {
    if uncovered.is_clear() {
        if current.len() < best.len() {
            *best = current.clone();
        }
        return;
    }
    let remaining = uncovered.count_ones(..);
    let largest = sets.iter().map(|s| s.intersection(&uncovered).count()).max().unwrap_or(0);
    if largest == 0 {
        return;
    }
    let lower = current.len() + remaining.div_ceil(largest);
    if lower >= best.len() {
        return;
    }
    // branch on the uncovered element with the fewest covering sets
    let (pivot, _) = uncovered
        .ones()
        .map(|e| (e, sets.iter().filter(|s| s.contains(e)).count()))
        .min_by_key(|&(_, c)| c)
        .expect("nonempty");
    let mut options: Vec<usize> = (0..sets.len()).filter(|&i| sets[i].contains(pivot)).collect();
    options.sort_by_key(|&i| std::cmp::Reverse(sets[i].intersection(&uncovered).count()));
    for i in options {
        let mut next = uncovered.clone();
        next.difference_with(&sets[i]);
        current.push(i);
        branch(next, sets, current, best);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize, items: &[usize]) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(n);
        for &i in items {
            s.insert(i);
        }
        s
    }

    #[test]
    fn exact_beats_greedy_trap() {
        // greedy takes the big middle set first and needs three sets
        let n = 6;
        let universe = set(n, &[0, 1, 2, 3, 4, 5]);
        let cands = vec![set(n, &[0, 1, 2]), set(n, &[3, 4, 5]), set(n, &[1, 2, 3, 4])];
        let exact = min_set_cover(&universe, &cands, 20).unwrap();
        assert!(exact.exact);
        assert_eq!(exact.chosen, vec![0, 1]);
    }

    #[test]
    fn reduction_removes_dominated() {
        let n = 4;
        let cands = vec![set(n, &[0]), set(n, &[0, 1]), set(n, &[0, 1]), set(n, &[2, 3])];
        assert_eq!(reduce_candidates(&cands), vec![1, 3]);
    }

    #[test]
    fn uncoverable_universe() {
        let universe = set(3, &[0, 1, 2]);
        assert!(min_set_cover(&universe, &[set(3, &[0, 1])], 20).is_none());
    }

    #[test]
    fn greedy_mode_is_flagged() {
        let n = 30;
        let universe = set(n, &(0..n).collect::<Vec<_>>());
        let cands: Vec<_> = (0..n).map(|i| set(n, &[i, (i + 1) % n])).collect();
        let sol = min_set_cover(&universe, &cands, 5).unwrap();
        assert!(!sol.exact);
        assert_eq!(sol.chosen.len(), 15);
        let sol = min_set_cover(&universe, &cands, 40).unwrap();
        assert!(sol.exact);
        assert_eq!(sol.chosen.len(), 15);
    }
}
