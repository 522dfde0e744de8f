//! The desk-scale corpus of groups and subgroups, and random generating multisets.

use rand::Rng;

use crate::error::{Error, Result};
use crate::families::family;
use crate::group_core::{all_subgroups, is_generating, subgroup_class_representatives, GroupTable, SubgroupData};

/// Families whose every subgroup is part of the corpus.
pub const FULL_FAMILIES: &[&str] = &[
    "cyclic:6",
    "cyclic:12",
    "symmetric:3",
    "symmetric:4",
    "alternating:4",
    "dihedral:4",
    "dihedral:5",
    "dihedral:6",
    "dihedral:7",
    "dihedral:8",
    "quaternion:8",
    "elementary:2^4",
    "elementary:3^2",
    "frobenius:20",
    "frobenius:21",
];

/// Families represented by one subgroup per conjugacy class.
pub const CLASS_FAMILIES: &[&str] = &["alternating:5"];

pub struct CorpusGroup {
    pub name: String,
    pub group: GroupTable,
    pub subgroups: Vec<SubgroupData>,
}

pub fn corpus() -> Vec<CorpusGroup> {
    let mut out = Vec::new();
    for &name in FULL_FAMILIES {
        let group = family(name).expect("corpus families build");
        let subgroups = all_subgroups(&group);
        out.push(CorpusGroup { name: name.to_string(), group, subgroups });
    }
    for &name in CLASS_FAMILIES {
        let group = family(name).expect("corpus families build");
        let subgroups = subgroup_class_representatives(&group);
        out.push(CorpusGroup { name: name.to_string(), group, subgroups });
    }
    out
}

const GENERATING_ATTEMPTS: usize = 10_000;

/// A uniformly random `k`-multiset that generates `g`, by rejection sampling.
pub fn random_generating<R: Rng>(g: &GroupTable, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    for _ in 0..GENERATING_ATTEMPTS {
        let s: Vec<usize> = (0..k).map(|_| rng.gen_range(0..g.order())).collect();
        if is_generating(g, &s) {
            return Ok(s);
        }
    }
    Err(Error::Resource { what: format!("attempts to draw a generating {k}-multiset"), limit: GENERATING_ATTEMPTS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_multisets_generate() {
        let g = family("symmetric:4").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let s = random_generating(&g, 3, &mut rng).unwrap();
            assert_eq!(s.len(), 3);
            assert!(is_generating(&g, &s));
        }
        let c = family("elementary:2^4").unwrap();
        assert!(random_generating(&c, 3, &mut rng).is_err());
    }

    #[test]
    fn corpus_is_complete() {
        let c = corpus();
        assert_eq!(c.len(), FULL_FAMILIES.len() + CLASS_FAMILIES.len());
        let s4 = c.iter().find(|x| x.name == "symmetric:4").unwrap();
        assert_eq!(s4.subgroups.len(), 30);
    }
}
