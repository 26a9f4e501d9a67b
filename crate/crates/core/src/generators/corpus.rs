//! The shared corpus of generated spaces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate, Generated, GeneratorError, GeneratorSpec};

const MANIFEST: &str = include_str!("../../corpus/manifest.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub name: String,
    pub spec: GeneratorSpec,
}

pub fn corpus_manifest() -> Vec<CorpusEntry> {
    serde_json::from_str(MANIFEST).expect("checked-in corpus manifest parses")
}

/// Generates every manifest entry, in manifest order.
pub fn corpus() -> Result<Vec<(CorpusEntry, Generated)>, GeneratorError> {
    corpus_manifest()
        .into_par_iter()
        .map(|entry| {
            let g = generate(&entry.spec)?;
            Ok((entry, g))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use std::collections::HashSet;

    #[test]
    fn manifest_names_are_unique() {
        let m = corpus_manifest();
        assert!(m.len() >= 60);
        let names: HashSet<_> = m.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names.len(), m.len());
    }

    #[test]
    fn corpus_covers_required_shapes() {
        let all = corpus().unwrap();
        let ks: HashSet<String> = all.iter().map(|(_, g)| g.space.quasi_constant().to_string()).collect();
        for k in ["1", "2", "4"] {
            assert!(ks.contains(k), "no corpus space with K = {k}");
        }
        assert!(all.iter().any(|(_, g)| g.space.infinity().is_some()));
        assert!(all.iter().any(|(_, g)| g.space.infinity().is_none()));
        assert!(all.iter().any(|(_, g)| !g.exact));
        assert!(all.iter().all(|(_, g)| g.space.len() >= 3 && g.space.len() <= 128));
        assert!(all
            .iter()
            .any(|(_, g)| g.space.quasi_constant() > &BigRational::from_integer(2.into())
                && g.space.infinity().is_some()));
    }
}
