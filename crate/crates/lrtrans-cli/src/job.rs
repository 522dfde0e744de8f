//! Job specifications: where the group comes from, the subgroup, the multiset and the solver choice.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lrtrans::corpus::random_generating;
use lrtrans::families::family;
use lrtrans::group_core::{group_from_generators, subgroup_generate, GroupTable};
use lrtrans::nielsen_engine::{GenMultiset, Setting};
use lrtrans::perm;
use lrtrans::solvers::Strategy;
use lrtrans::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSource {
    Family(String),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MultisetSpec {
    Explicit(Vec<String>),
    RandomGenerating(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobSpec {
    pub group: GroupSource,
    /// `None` takes the subgroup generators from the group file.
    pub subgroup: Option<Vec<String>>,
    pub multiset: Option<MultisetSpec>,
    pub seed: u64,
    /// `None` runs the full strategy ladder.
    pub strategy: Option<Strategy>,
    pub via_core: bool,
}

/// Splits a `;`-separated list, dropping blank items.
pub fn split_list(text: &str) -> Vec<String> {
    text.split(';').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect()
}

impl MultisetSpec {
    pub fn parse(text: &str) -> std::result::Result<MultisetSpec, String> {
        match text.trim().strip_prefix("random-generating:") {
            Some(k) => k.trim().parse().map(MultisetSpec::RandomGenerating).map_err(|_| format!("bad size in {text:?}")),
            None => Ok(MultisetSpec::Explicit(split_list(text))),
        }
    }
}

impl fmt::Display for MultisetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultisetSpec::Explicit(xs) => f.write_str(&xs.join(";")),
            MultisetSpec::RandomGenerating(k) => write!(f, "random-generating:{k}"),
        }
    }
}

pub fn parse_strategy(text: &str) -> std::result::Result<Option<Strategy>, String> {
    match text.trim() {
        "auto" => Ok(None),
        t => t.parse().map(Some),
    }
}

impl JobSpec {
    /// Canonical text form, one `key value` pair per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.group {
            GroupSource::Family(name) => out.push_str(&format!("family {name}\n")),
            GroupSource::File(path) => out.push_str(&format!("group-file {}\n", path.display())),
        }
        if let Some(sub) = &self.subgroup {
            out.push_str(&format!("subgroup {}\n", sub.join(";")));
        }
        if let Some(m) = &self.multiset {
            out.push_str(&format!("multiset {m}\n"));
        }
        out.push_str(&format!("seed {}\n", self.seed));
        out.push_str(&format!("strategy {}\n", self.strategy.map_or("auto", |s| s.tag())));
        out.push_str(&format!("via-core {}\n", self.via_core));
        out
    }

    pub fn from_text(text: &str) -> Result<JobSpec> {
        let mut group = None;
        let mut job = JobSpec {
            group: GroupSource::Family(String::new()),
            subgroup: None,
            multiset: None,
            seed: 0,
            strategy: None,
            via_core: false,
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let (key, value) = line.split_once(' ').map_or((line, ""), |(k, v)| (k, v.trim()));
            match key {
                "family" => group = Some(GroupSource::Family(value.to_string())),
                "group-file" => group = Some(GroupSource::File(PathBuf::from(value))),
                "subgroup" => job.subgroup = Some(split_list(value)),
                "multiset" => job.multiset = Some(MultisetSpec::parse(value).map_err(err)?),
                "seed" => job.seed = value.parse().map_err(|_| err(format!("bad seed {value:?}")))?,
                "strategy" => job.strategy = parse_strategy(value).map_err(err)?,
                "via-core" => job.via_core = value.parse().map_err(|_| err(format!("bad flag {value:?}")))?,
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        job.group = group.ok_or(Error::Parse { line: 0, msg: "missing family or group-file".into() })?;
        Ok(job)
    }
}

/// A loaded group with the subgroup generators it was declared with.
pub struct LoadedGroup {
    pub group: GroupTable,
    pub subgroup: Vec<String>,
}

/// Reads a group file: permutation generators one per line, a blank line, then subgroup
/// generators. A first line `table` switches to a Cayley table of integer labels with the
/// identity at label 0.
pub fn parse_group_file(text: &str) -> Result<LoadedGroup> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .collect();
    let first = lines.iter().position(|(_, l)| !l.is_empty()).ok_or(Error::Parse { line: 0, msg: "empty group file".into() })?;
    let body = &lines[first..];
    let split = body.iter().position(|(_, l)| l.is_empty()).unwrap_or(body.len());
    let (head, tail) = body.split_at(split);
    let subgroup: Vec<String> = tail.iter().filter(|(_, l)| !l.is_empty()).map(|(_, l)| l.to_string()).collect();
    if head[0].1 == "table" {
        let mut table = Vec::new();
        for &(ln, l) in &head[1..] {
            let row: std::result::Result<Vec<usize>, _> = l.split_whitespace().map(str::parse).collect();
            table.push(row.map_err(|_| Error::Parse { line: ln, msg: format!("bad table row {l:?}") })?);
        }
        let group = GroupTable::from_table(table, None).map_err(|e| Error::Parse { line: head[0].0, msg: e.to_string() })?;
        return Ok(LoadedGroup { group, subgroup });
    }
    let mut cycles = Vec::new();
    for &(ln, l) in head {
        cycles.push((ln, perm::parse_cycles(l).map_err(|msg| Error::Parse { line: ln, msg })?));
    }
    let degree = cycles.iter().map(|(_, c)| perm::max_point(c)).max().unwrap_or(0).max(1);
    let mut gens = Vec::new();
    for (ln, c) in &cycles {
        gens.push(perm::from_cycles(degree, c).map_err(|e| Error::Parse { line: *ln, msg: e.to_string() })?);
    }
    let group = group_from_generators(degree, &gens)?;
    Ok(LoadedGroup { group, subgroup })
}

pub fn load_group(source: &GroupSource) -> Result<LoadedGroup> {
    match source {
        GroupSource::Family(name) => Ok(LoadedGroup { group: family(name)?, subgroup: Vec::new() }),
        GroupSource::File(path) => parse_group_file(&read(path)?),
    }
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_elements(g: &GroupTable, names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| g.parse_element(n).ok_or_else(|| Error::Precondition(format!("{n:?} is not an element of the group"))))
        .collect()
}

impl JobSpec {
    pub fn setting(&self) -> Result<Arc<Setting>> {
        let loaded = load_group(&self.group)?;
        let names = self.subgroup.clone().unwrap_or(loaded.subgroup);
        let gens = parse_elements(&loaded.group, &names)?;
        let h = subgroup_generate(&loaded.group, &gens)?;
        Ok(Setting::new(loaded.group, h))
    }

    pub fn multiset(&self, st: &Arc<Setting>) -> Result<Option<GenMultiset>> {
        let values = match &self.multiset {
            None => return Ok(None),
            Some(MultisetSpec::Explicit(names)) => parse_elements(&st.group, names)?,
            Some(MultisetSpec::RandomGenerating(k)) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                random_generating(&st.group, *k, &mut rng)?
            }
        };
        GenMultiset::new(st.clone(), &values).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lrtrans::solvers::{Strategy as Tag, LADDER};
    use proptest::prelude::*;
    use proptest::strategy::Strategy as _;

    fn strategies() -> impl proptest::strategy::Strategy<Value = Option<Tag>> {
        prop_oneof![Just(None), proptest::sample::select(LADDER.to_vec()).prop_map(Some)]
    }

    prop_compose! {
        fn jobs()(
            fam in proptest::sample::select(vec!["symmetric:3", "dihedral:5", "frobenius:21"]),
            file in any::<bool>(),
            sub in proptest::option::of(proptest::collection::vec("\\(1 [2-5]\\)", 0..3)),
            explicit in proptest::collection::vec("\\([1-3] [4-6]\\)|\\(\\)", 1..4),
            k in proptest::option::of(1usize..6),
            seed in any::<u64>(),
            strategy in strategies(),
            via_core in any::<bool>(),
        ) -> JobSpec {
            let group = if file { GroupSource::File(PathBuf::from(format!("groups/{fam}.txt"))) } else { GroupSource::Family(fam.to_string()) };
            let multiset = Some(k.map_or(MultisetSpec::Explicit(explicit), MultisetSpec::RandomGenerating));
            JobSpec { group, subgroup: sub, multiset, seed, strategy, via_core }
        }
    }

    proptest! {
        #[test]
        fn canonical_text_round_trips(job in jobs()) {
            let text = job.to_text();
            let back = JobSpec::from_text(&text).unwrap();
            prop_assert_eq!(&back, &job);
            prop_assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn group_files() {
        let g = parse_group_file("# S3\n(1 2)\n(1 2 3)\n\n(1 2)\n").unwrap();
        assert_eq!(g.group.order(), 6);
        assert_eq!(g.subgroup, vec!["(1 2)".to_string()]);
        let t = parse_group_file("table\n0 1 2\n1 2 0\n2 0 1\n").unwrap();
        assert_eq!(t.group.order(), 3);
        assert!(t.subgroup.is_empty());
        match parse_group_file("(1 2)\n(1 x)\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {:?}", other.map(|g| g.group.order())),
        }
        match parse_group_file("table\n0 1\n1 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected a parse error, got {:?}", other.map(|g| g.group.order())),
        }
    }

    #[test]
    fn unknown_keys_are_reported_with_lines() {
        match JobSpec::from_text("family cyclic:6\n\nflavour sour\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
