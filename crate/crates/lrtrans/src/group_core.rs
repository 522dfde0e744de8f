//! Finite groups as dense multiplication tables, with subgroups, cores,
//! quotients and the small predicates the solvers rely on.

use std::collections::{BTreeSet, HashMap, VecDeque};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::perm::{self, Perm};

pub const DEFAULT_ORDER_CAP: usize = 5040;
pub const DEFAULT_RANK_CAP: usize = 64;
const ASSOC_EXHAUSTIVE_LIMIT: usize = 256;
const ASSOC_SPOT_CHECKS: usize = 200_000;

/// A finite group on indices `0..order`; index 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTable {
    order: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    element_names: Option<Vec<String>>,
    degree: usize,
    perms: Option<Vec<Perm>>,
}

impl GroupTable {
    /// Builds a group from a full Cayley table. Row/column 0 must be the identity.
    pub fn from_table(table: Vec<Vec<usize>>, element_names: Option<Vec<String>>) -> Result<Self> {
        let order = table.len();
        if order == 0 {
            return precondition("empty multiplication table");
        }
        let mut mul = Vec::with_capacity(order * order);
        for (a, row) in table.iter().enumerate() {
            if row.len() != order {
                return precondition(format!("row {a} has length {} instead of {order}", row.len()));
            }
            for &x in row {
                if x >= order {
                    return precondition(format!("entry {x} out of range in row {a}"));
                }
                mul.push(x as u32);
            }
        }
        if let Some(n) = &element_names {
            if n.len() != order {
                return precondition("element name count differs from order");
            }
        }
        let mut inv = vec![u32::MAX; order];
        for a in 0..order {
            for b in 0..order {
                if mul[a * order + b] == 0 {
                    inv[a] = b as u32;
                    break;
                }
            }
        }
        let g = GroupTable { order, mul, inv, element_names, degree: 0, perms: None };
        g.check_axioms()?;
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    /// Product of a sequence of elements, left to right.
    pub fn product(&self, xs: &[usize]) -> usize {
        xs.iter().fold(0, |acc, &x| self.mul(acc, x))
    }

    pub fn pow(&self, x: usize, n: i64) -> usize {
        let base = if n < 0 { self.inv(x) } else { x };
        let mut out = 0;
        for _ in 0..n.unsigned_abs() {
            out = self.mul(out, base);
        }
        out
    }

    /// `x^sign` for `sign` in `{+1, -1}`.
    pub fn signed(&self, x: usize, sign: i8) -> usize {
        if sign < 0 {
            self.inv(x)
        } else {
            x
        }
    }

    pub fn conj(&self, x: usize, y: usize) -> usize {
        self.mul(self.mul(x, y), self.inv(x))
    }

    pub fn element_order(&self, x: usize) -> usize {
        let mut y = x;
        let mut n = 1;
        while y != 0 {
            y = self.mul(y, x);
            n += 1;
        }
        n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn permutation(&self, x: usize) -> Option<&Perm> {
        self.perms.as_ref().map(|p| &p[x])
    }

    pub fn element_names(&self) -> Option<&[String]> {
        self.element_names.as_deref()
    }

    pub fn name(&self, x: usize) -> String {
        match &self.element_names {
            Some(n) => n[x].clone(),
            None => x.to_string(),
        }
    }

    /// Parses an element in cycle notation (permutation groups) or as a name or integer label.
    pub fn parse_element(&self, text: &str) -> Option<usize> {
        let t = text.trim();
        if let Some(names) = &self.element_names {
            if let Some(i) = names.iter().position(|n| n == t) {
                return Some(i);
            }
        }
        if let Some(perms) = &self.perms {
            let cycles = perm::parse_cycles(t).ok()?;
            if perm::max_point(&cycles) > self.degree {
                return None;
            }
            let p = perm::from_cycles(self.degree, &cycles).ok()?;
            return perms.iter().position(|q| *q == p);
        }
        if t == "e" {
            return Some(0);
        }
        t.parse::<usize>().ok().filter(|&i| i < self.order)
    }

    /// Verifies identity, inverse and associativity laws.
    pub fn check_axioms(&self) -> Result<()> {
        let n = self.order;
        for x in 0..n {
            if self.mul(0, x) != x || self.mul(x, 0) != x {
                return Err(Error::Precondition(format!("index 0 is not an identity (fails at {x})")));
            }
            if self.inv[x] == u32::MAX || self.mul(x, self.inv(x)) != 0 || self.mul(self.inv(x), x) != 0 {
                return Err(Error::Precondition(format!("element {x} has no two-sided inverse")));
            }
        }
        let assoc = |a: usize, b: usize, c: usize| self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c));
        if n <= ASSOC_EXHAUSTIVE_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if !assoc(a, b, c) {
                            return Err(Error::Precondition(format!("not associative at ({a},{b},{c})")));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..ASSOC_SPOT_CHECKS {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if !assoc(a, b, c) {
                    return Err(Error::Precondition(format!("not associative at ({a},{b},{c})")));
                }
            }
        }
        Ok(())
    }

    /// Membership mask of the subgroup generated by `gens`.
    pub fn closure_mask(&self, gens: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.order];
        mask[0] = true;
        let mut queue = VecDeque::from([0usize]);
        let gens: Vec<usize> = gens.iter().copied().filter(|&g| g != 0).collect();
        while let Some(x) = queue.pop_front() {
            for &g in &gens {
                let y = self.mul(x, g);
                if !mask[y] {
                    mask[y] = true;
                    queue.push_back(y);
                }
            }
        }
        mask
    }

    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        mask_to_members(&self.closure_mask(gens))
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (a + 1..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }
}

fn mask_to_members(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
}

/// Closure of permutation generators, enumerated breadth-first from the identity.
pub fn group_from_generators(degree: usize, generators: &[Perm]) -> Result<GroupTable> {
    group_from_generators_capped(degree, generators, DEFAULT_ORDER_CAP)
}

pub fn group_from_generators_capped(degree: usize, generators: &[Perm], cap: usize) -> Result<GroupTable> {
    for (i, g) in generators.iter().enumerate() {
        if g.len() != degree || !perm::is_bijection(g) {
            return precondition(format!("generator {i} is not a permutation of 1..{degree}"));
        }
    }
    let mut elems: Vec<Perm> = vec![perm::identity(degree)];
    let mut index: HashMap<Perm, u32> = HashMap::new();
    index.insert(elems[0].clone(), 0);
    // parent[b] = (a, k) with b = a * gen_k
    let mut parent: Vec<(u32, u32)> = vec![(0, 0)];
    let mut right_gen: Vec<u32> = Vec::new();
    let k = generators.len();
    let mut i = 0;
    while i < elems.len() {
        for (gi, g) in generators.iter().enumerate() {
            let y = perm::compose(&elems[i], g);
            let id = match index.get(&y) {
                Some(&id) => id,
                None => {
                    let id = elems.len() as u32;
                    if elems.len() >= cap {
                        return Err(Error::Resource { what: "group order".into(), limit: cap });
                    }
                    index.insert(y.clone(), id);
                    elems.push(y);
                    parent.push((i as u32, gi as u32));
                    id
                }
            };
            right_gen.push(id);
        }
        i += 1;
    }
    let order = elems.len();
    let mut mul = vec![0u32; order * order];
    for a in 0..order {
        mul[a * order] = a as u32;
        for b in 1..order {
            let (c, gi) = parent[b];
            let ac = mul[a * order + c as usize] as usize;
            mul[a * order + b] = right_gen[ac * k + gi as usize];
        }
    }
    let inv: Vec<u32> = elems.iter().map(|p| index[&perm::inverse(p)]).collect();
    let names = elems.iter().map(|p| perm::to_cycles_string(p)).collect();
    Ok(GroupTable { order, mul, inv, element_names: Some(names), degree, perms: Some(elems) })
}

/// A subgroup given by its sorted member list and a generating list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupData {
    pub parent_order: usize,
    pub members: Vec<usize>,
    pub generators: Vec<usize>,
    mask: Vec<bool>,
}

impl SubgroupData {
    pub fn contains(&self, x: usize) -> bool {
        self.mask[x]
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn index(&self) -> usize {
        self.parent_order / self.members.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_subset_of(&self, other: &SubgroupData) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }
}

pub fn subgroup_generate(g: &GroupTable, gens: &[usize]) -> Result<SubgroupData> {
    if let Some(&bad) = gens.iter().find(|&&x| x >= g.order()) {
        return precondition(format!("element index {bad} out of range"));
    }
    let mask = g.closure_mask(gens);
    Ok(SubgroupData { parent_order: g.order(), members: mask_to_members(&mask), generators: gens.to_vec(), mask })
}

/// Wraps an explicit member set, checking closure.
pub fn subgroup_from_members(g: &GroupTable, members: &[usize]) -> Result<SubgroupData> {
    let mut mask = vec![false; g.order()];
    for &x in members {
        if x >= g.order() {
            return precondition(format!("element index {x} out of range"));
        }
        mask[x] = true;
    }
    let sorted = mask_to_members(&mask);
    if !mask[0] || sorted.iter().any(|&a| sorted.iter().any(|&b| !mask[g.mul(a, g.inv(b))])) {
        return precondition("member set is not a subgroup");
    }
    let generators = small_generating_list(g, &sorted);
    Ok(SubgroupData { parent_order: g.order(), members: sorted, generators, mask })
}

/// Greedy generating list: each member not yet in the running closure is added.
fn small_generating_list(g: &GroupTable, members: &[usize]) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut mask = g.closure_mask(&[]);
    for &x in members {
        if !mask[x] {
            gens.push(x);
            mask = g.closure_mask(&gens);
        }
    }
    gens
}

pub fn is_normal(g: &GroupTable, h: &SubgroupData) -> bool {
    h.generators.iter().all(|&x| (0..g.order()).all(|y| h.contains(g.conj(y, x))))
        && h.members.iter().all(|&x| (0..g.order()).all(|y| h.contains(g.conj(y, x))))
}

/// The intersection of all conjugates of `h`.
pub fn core_subgroup(g: &GroupTable, h: &SubgroupData) -> SubgroupData {
    let members: Vec<usize> =
        h.members.iter().copied().filter(|&x| (0..g.order()).all(|y| h.contains(g.conj(y, x)))).collect();
    subgroup_from_members(g, &members).expect("intersection of subgroups is a subgroup")
}

/// Smallest `e >= 1` with `x^e` in `h`.
pub fn h_exponent(g: &GroupTable, h: &SubgroupData, x: usize) -> usize {
    let mut y = x;
    let mut e = 1;
    while !h.contains(y) {
        y = g.mul(y, x);
        e += 1;
    }
    e
}

/// The natural projection onto `G/N` with a minimal-index section.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuotientMap {
    pub source_order: usize,
    pub target: GroupTable,
    pub projection: Vec<usize>,
    pub section: Vec<usize>,
}

impl QuotientMap {
    pub fn project(&self, x: usize) -> usize {
        self.projection[x]
    }

    pub fn lift(&self, y: usize) -> usize {
        self.section[y]
    }
}

pub fn quotient_by_normal(g: &GroupTable, n: &SubgroupData) -> Result<QuotientMap> {
    if !is_normal(g, n) {
        return precondition("subgroup is not normal");
    }
    let mut projection = vec![usize::MAX; g.order()];
    let mut section = Vec::new();
    for x in 0..g.order() {
        if projection[x] != usize::MAX {
            continue;
        }
        let id = section.len();
        section.push(x);
        for &m in &n.members {
            projection[g.mul(x, m)] = id;
        }
    }
    let q = section.len();
    let table: Vec<Vec<usize>> =
        (0..q).map(|a| (0..q).map(|b| projection[g.mul(section[a], section[b])]).collect()).collect();
    let names = section.iter().map(|&x| format!("[{}]", g.name(x))).collect();
    let target = GroupTable::from_table(table, Some(names))?;
    Ok(QuotientMap { source_order: g.order(), target, projection, section })
}

pub fn is_generating(g: &GroupTable, s: &[usize]) -> bool {
    g.closure_mask(s).iter().all(|&m| m)
}

pub fn rank_bruteforce(g: &GroupTable) -> Result<usize> {
    rank_bruteforce_capped(g, DEFAULT_RANK_CAP)
}

pub fn rank_bruteforce_capped(g: &GroupTable, cap: usize) -> Result<usize> {
    if g.order() > cap {
        return Err(Error::Resource { what: "rank search group order".into(), limit: cap });
    }
    if g.order() == 1 {
        return Ok(0);
    }
    let candidates: Vec<usize> = (1..g.order()).collect();
    for k in 1..=g.order() {
        if candidates.iter().copied().combinations(k).any(|c| is_generating(g, &c)) {
            return Ok(k);
        }
    }
    unreachable!("the whole group generates itself")
}

/// True iff `xHx^{-1} ∩ H` is trivial for every `x` outside `H`.
pub fn is_malnormal(g: &GroupTable, h: &SubgroupData) -> bool {
    (0..g.order())
        .filter(|&x| !h.contains(x))
        .all(|x| h.members.iter().all(|&y| y == 0 || !h.contains(g.conj(x, y))))
}

/// `|H : xHx^{-1} ∩ H|`.
pub fn conjugate_intersection_index(g: &GroupTable, h: &SubgroupData, x: usize) -> usize {
    let inside = h.members.iter().filter(|&&y| h.contains(g.conj(x, y))).count();
    h.order() / inside
}

pub fn is_cyclic(g: &GroupTable, h: &SubgroupData) -> bool {
    h.members.iter().any(|&x| g.element_order(x) == h.order())
}

/// Some generator of a cyclic subgroup (smallest index), if cyclic.
pub fn cyclic_generator(g: &GroupTable, h: &SubgroupData) -> Option<usize> {
    h.members.iter().copied().find(|&x| g.element_order(x) == h.order())
}

/// Every subgroup of `g`, sorted by order then member list.
pub fn all_subgroups(g: &GroupTable) -> Vec<SubgroupData> {
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut cyclic: Vec<usize> = Vec::new();
    for x in 0..g.order() {
        if found.insert(g.closure(&[x])) {
            cyclic.push(x);
        }
    }
    let mut frontier: Vec<Vec<usize>> = found.iter().cloned().collect();
    while let Some(members) = frontier.pop() {
        let gens = small_generating_list(g, &members);
        for &y in &cyclic {
            if members.binary_search(&y).is_ok() {
                continue;
            }
            let mut gs = gens.clone();
            gs.push(y);
            let joined = g.closure(&gs);
            if found.insert(joined.clone()) {
                frontier.push(joined);
            }
        }
    }
    let mut out: Vec<SubgroupData> =
        found.into_iter().map(|m| subgroup_from_members(g, &m).expect("closure is a subgroup")).collect();
    out.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.members.cmp(&b.members)));
    out
}

/// One subgroup per conjugacy class (the first in `all_subgroups` order).
pub fn subgroup_class_representatives(g: &GroupTable) -> Vec<SubgroupData> {
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut reps = Vec::new();
    for h in all_subgroups(g) {
        if seen.contains(&h.members) {
            continue;
        }
        for x in 0..g.order() {
            let mut conj: Vec<usize> = h.members.iter().map(|&y| g.conj(x, y)).collect();
            conj.sort_unstable();
            seen.insert(conj);
        }
        reps.push(h);
    }
    reps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::family;

    fn perm(degree: usize, text: &str) -> Perm {
        perm::from_cycles(degree, &perm::parse_cycles(text).unwrap()).unwrap()
    }

    /// Independent closure oracle: saturate a set of permutations under composition.
    fn naive_closure(degree: usize, gens: &[Perm]) -> BTreeSet<Perm> {
        let mut set: BTreeSet<Perm> = BTreeSet::from([perm::identity(degree)]);
        loop {
            let snapshot: Vec<Perm> = set.iter().cloned().collect();
            let before = set.len();
            for a in &snapshot {
                for g in gens {
                    set.insert(perm::compose(a, g));
                }
            }
            if set.len() == before {
                return set;
            }
        }
    }

    #[test]
    fn closure_orders_match_oracle() {
        let cases: Vec<(usize, Vec<&str>)> = vec![
            (3, vec!["(1 2)", "(1 2 3)"]),
            (1, vec![]),
            (4, vec!["(1 2)", "(3 4)"]),
            (4, vec!["(1 2 3 4)", "(1 3)"]),
            (5, vec!["(1 2 3)", "(3 4 5)"]),
        ];
        for (degree, gens) in cases {
            let ps: Vec<Perm> = gens.iter().map(|t| perm(degree, t)).collect();
            let g = group_from_generators(degree, &ps).unwrap();
            assert_eq!(g.order(), naive_closure(degree, &ps).len());
        }
        let s3 = group_from_generators(3, &[perm(3, "(1 2)"), perm(3, "(1 2 3)")]).unwrap();
        assert_eq!(s3.order(), 6);
        let k4 = group_from_generators(4, &[perm(4, "(1 2)"), perm(4, "(3 4)")]).unwrap();
        assert_eq!(k4.order(), 4);
        assert_eq!(group_from_generators(1, &[]).unwrap().order(), 1);
    }

    #[test]
    fn table_agrees_with_composition() {
        let g = family("symmetric:4").unwrap();
        for a in 0..g.order() {
            for b in 0..g.order() {
                let p = perm::compose(g.permutation(a).unwrap(), g.permutation(b).unwrap());
                assert_eq!(g.permutation(g.mul(a, b)).unwrap(), &p);
            }
        }
        g.check_axioms().unwrap();
    }

    #[test]
    fn size_cap_is_enforced() {
        let gens = vec![perm(5, "(1 2)"), perm(5, "(1 2 3 4 5)")];
        let err = group_from_generators_capped(5, &gens, 100).unwrap_err();
        assert!(matches!(err, Error::Resource { limit: 100, .. }));
    }

    #[test]
    fn subgroups_and_cores() {
        let s3 = family("symmetric:3").unwrap();
        let t = s3.parse_element("(1 2)").unwrap();
        let c = s3.parse_element("(1 2 3)").unwrap();
        assert_eq!(subgroup_generate(&s3, &[t]).unwrap().order(), 2);
        assert_eq!(subgroup_generate(&s3, &[]).unwrap().order(), 1);
        assert_eq!(subgroup_generate(&s3, &[c]).unwrap().order(), 3);
        let h = subgroup_generate(&s3, &[t]).unwrap();
        assert!(core_subgroup(&s3, &h).is_trivial());
        let a3 = subgroup_generate(&s3, &[c]).unwrap();
        assert_eq!(core_subgroup(&s3, &a3).members, a3.members);

        let d4 = family("dihedral:4").unwrap();
        let s = d4.parse_element("(2 4)").unwrap();
        let hs = subgroup_generate(&d4, &[s]).unwrap();
        assert!(core_subgroup(&d4, &hs).is_trivial());
        assert!(!is_malnormal(&d4, &hs));
        assert!(is_malnormal(&s3, &h));
        assert!(!is_malnormal(&s3, &a3));
    }

    #[test]
    fn exponents() {
        let c6 = family("cyclic:6").unwrap();
        let one = c6.parse_element("(1 2 3 4 5 6)").unwrap();
        let three = c6.pow(one, 3);
        let h = subgroup_generate(&c6, &[three]).unwrap();
        assert_eq!(h_exponent(&c6, &h, one), 3);
        assert_eq!(h_exponent(&c6, &h, three), 1);
        let s3 = family("symmetric:3").unwrap();
        let h = subgroup_generate(&s3, &[s3.parse_element("(1 2)").unwrap()]).unwrap();
        assert_eq!(h_exponent(&s3, &h, s3.parse_element("(1 2 3)").unwrap()), 3);
    }

    #[test]
    fn quotients() {
        let c6 = family("cyclic:6").unwrap();
        let one = c6.parse_element("(1 2 3 4 5 6)").unwrap();
        let n = subgroup_generate(&c6, &[c6.pow(one, 3)]).unwrap();
        let q = quotient_by_normal(&c6, &n).unwrap();
        assert_eq!(q.target.order(), 3);
        let trivial = subgroup_generate(&c6, &[]).unwrap();
        let q = quotient_by_normal(&c6, &trivial).unwrap();
        assert_eq!(q.target.order(), 6);
        let s3 = family("symmetric:3").unwrap();
        let a3 = subgroup_generate(&s3, &[s3.parse_element("(1 2 3)").unwrap()]).unwrap();
        let q = quotient_by_normal(&s3, &a3).unwrap();
        assert_eq!(q.target.order(), 2);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(q.project(s3.mul(a, b)), q.target.mul(q.project(a), q.project(b)));
            }
        }
        for y in 0..2 {
            assert_eq!(q.project(q.lift(y)), y);
        }
        let h = subgroup_generate(&s3, &[s3.parse_element("(1 2)").unwrap()]).unwrap();
        assert!(quotient_by_normal(&s3, &h).is_err());
    }

    #[test]
    fn generation_and_rank() {
        let s3 = family("symmetric:3").unwrap();
        let t = s3.parse_element("(1 2)").unwrap();
        let c = s3.parse_element("(1 2 3)").unwrap();
        assert!(is_generating(&s3, &[t, c]));
        assert!(!is_generating(&s3, &[]));
        assert!(!is_generating(&s3, &[c]));
        assert_eq!(rank_bruteforce(&group_from_generators(1, &[]).unwrap()).unwrap(), 0);
        assert_eq!(rank_bruteforce(&s3).unwrap(), 2);
        assert_eq!(rank_bruteforce(&family("elementary:2^4").unwrap()).unwrap(), 4);
        assert!(rank_bruteforce(&family("symmetric:5").unwrap()).is_err());
    }

    #[test]
    fn subgroup_counts() {
        // Known subgroup counts.
        assert_eq!(all_subgroups(&family("symmetric:3").unwrap()).len(), 6);
        assert_eq!(all_subgroups(&family("symmetric:4").unwrap()).len(), 30);
        assert_eq!(all_subgroups(&family("alternating:4").unwrap()).len(), 10);
        assert_eq!(all_subgroups(&family("dihedral:4").unwrap()).len(), 10);
        assert_eq!(all_subgroups(&family("quaternion:8").unwrap()).len(), 6);
        assert_eq!(all_subgroups(&family("cyclic:12").unwrap()).len(), 6);
        assert_eq!(all_subgroups(&family("alternating:5").unwrap()).len(), 59);
        assert_eq!(subgroup_class_representatives(&family("alternating:5").unwrap()).len(), 9);
        assert_eq!(subgroup_class_representatives(&family("symmetric:4").unwrap()).len(), 11);
    }

    #[test]
    fn from_table_checks_axioms() {
        let z3 = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]];
        assert_eq!(GroupTable::from_table(z3, None).unwrap().order(), 3);
        let bad = vec![vec![0, 1, 2], vec![1, 0, 0], vec![2, 0, 1]];
        assert!(GroupTable::from_table(bad, None).is_err());
    }
}
