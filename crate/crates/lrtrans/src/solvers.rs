//! End-to-end drivers that chain cleaning, extraction, configurations and inverse-dual graphs
//! into left-right transversals, with the core reduction and the malnormal rank bound.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::configurations::{config_normal_form, fold_inverse, is_solvable, section, sigma_graph, solve_board_pair};
use crate::coset_geometry::{build_atlas, is_left_transversal, is_right_transversal, Side};
use crate::error::{not_applicable, precondition, violation, Error, Result};
use crate::group_core::{
    conjugate_intersection_index, core_subgroup, cyclic_generator, is_malnormal, quotient_by_normal, rank_bruteforce,
    subgroup_from_members, GroupTable, SubgroupData,
};
use crate::inverse_dual::{odd_octopus_algorithm, theta_graph, theta_normal_form, ThetaNormalForm};
use crate::nielsen_engine::{
    bfs_oracle_capped, clean_rec, diagonal_power_at, diagonal_power_rec, extend_to_transversal, extraction_lemma_at,
    two_sided_sparse, Entry, GenMultiset, Recorder, Setting, Transcript,
};

/// Depth cap of the breadth-first fallback.
pub const BFS_DEPTH: usize = 8;
/// Largest group order the breadth-first fallback accepts.
pub const BFS_GROUP_CAP: usize = 24;
/// Visited-state cap of the breadth-first fallback.
pub const BFS_STATE_CAP: usize = 400_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "already-diagonal")]
    AlreadyDiagonal,
    #[serde(rename = "cyclic")]
    Cyclic,
    #[serde(rename = "cpxcp")]
    CpxCp,
    #[serde(rename = "almost-normal")]
    AlmostNormal,
    #[serde(rename = "malnormal")]
    Malnormal,
    #[serde(rename = "divisor")]
    Divisor,
    #[serde(rename = "rank-4")]
    Rank4,
    #[serde(rename = "configuration")]
    Configuration,
    #[serde(rename = "bfs")]
    Bfs,
}

/// Cheapest preconditions first.
pub const LADDER: [Strategy; 9] = [
    Strategy::AlreadyDiagonal,
    Strategy::Cyclic,
    Strategy::CpxCp,
    Strategy::AlmostNormal,
    Strategy::Malnormal,
    Strategy::Divisor,
    Strategy::Rank4,
    Strategy::Configuration,
    Strategy::Bfs,
];

impl Strategy {
    pub fn tag(self) -> &'static str {
        match self {
            Strategy::AlreadyDiagonal => "already-diagonal",
            Strategy::Cyclic => "cyclic",
            Strategy::CpxCp => "cpxcp",
            Strategy::AlmostNormal => "almost-normal",
            Strategy::Malnormal => "malnormal",
            Strategy::Divisor => "divisor",
            Strategy::Rank4 => "rank-4",
            Strategy::Configuration => "configuration",
            Strategy::Bfs => "bfs",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Strategy, String> {
        LADDER.iter().copied().find(|x| x.tag() == s).ok_or_else(|| {
            let tags: Vec<&str> = LADDER.iter().map(|x| x.tag()).collect();
            format!("unknown strategy {s:?}; expected one of {}", tags.join(", "))
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub left: bool,
    pub right: bool,
    pub generating: bool,
}

impl Verification {
    pub fn all(&self) -> bool {
        self.left && self.right && self.generating
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub strategy: Strategy,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub theorem_used: Option<Strategy>,
    pub transcript: Transcript,
    /// Sorted left-right transversal containing the final values; empty on failure.
    pub transversal: Vec<usize>,
    pub verification: Verification,
    pub failure_reason: Option<Vec<Rejection>>,
    /// Order of `G / core(H)` when the solve ran in the quotient.
    pub quotient_order: Option<usize>,
}

impl SolveReport {
    pub fn success(&self) -> bool {
        self.theorem_used.is_some() && self.failure_reason.is_none() && self.verification.all()
    }

    pub fn failure(s: &GenMultiset, rejections: Vec<Rejection>) -> SolveReport {
        SolveReport {
            theorem_used: None,
            transcript: Transcript::empty(s),
            transversal: Vec::new(),
            verification: Verification::default(),
            failure_reason: Some(rejections),
            quotient_order: None,
        }
    }
}

fn check_input(s: &GenMultiset) -> Result<()> {
    let idx = s.setting().index();
    if s.len() > idx {
        return precondition(format!("multiset size {} exceeds index {idx}", s.len()));
    }
    if !s.generates() {
        return precondition("multiset does not generate the group");
    }
    Ok(())
}

/// Replays, checks diagonality and completes to a verified transversal.
fn conclude(s: &GenMultiset, strategy: Strategy, t: Transcript) -> Result<SolveReport> {
    let st = s.setting();
    let out = t.replay(st).map_err(|(i, e)| Error::InvariantViolation(format!("transcript fails at move {i}: {e}")))?;
    if !out.is_diagonal() {
        return violation(format!("{strategy} finished with a multiset that is not diagonal"));
    }
    let mut transversal = extend_to_transversal(&out)?;
    transversal.sort_unstable();
    let verification = Verification {
        left: is_left_transversal(&st.atlas.cosets, &transversal),
        right: is_right_transversal(&st.atlas.cosets, &transversal),
        generating: out.generates(),
    };
    if !verification.all() {
        return violation(format!("{strategy} produced a report that fails verification"));
    }
    Ok(SolveReport { theorem_used: Some(strategy), transcript: t, transversal, verification, failure_reason: None, quotient_order: None })
}

fn cleaned(s: &GenMultiset) -> Result<Recorder> {
    check_input(s)?;
    let mut rec = Recorder::new(s);
    clean_rec(&mut rec)?;
    Ok(rec)
}

/// Turns a not-applicable answer inside a proven branch into an invariant violation.
fn proven<T>(r: Result<T>, what: &str) -> Result<T> {
    r.map_err(|e| match e {
        Error::NotApplicable(m) => Error::InvariantViolation(format!("{what}: {m}")),
        other => other,
    })
}

fn ensure_extracted(rec: &Recorder, before: usize, what: &str) -> Result<()> {
    let ms = rec.ms();
    if ms.count_in_h() + 1 != before || !(ms.is_left_right_clean() || ms.is_diagonal()) {
        return violation(format!("{what} did not extract exactly one element cleanly"));
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Step {
    Right(usize, i8),
    Left(usize, i8),
}

/// Moves occurrence `t` by multiplications with the other occurrences to the nearest value
/// satisfying `goal`; returns `false` when no such value is reachable.
fn walk_occurrence(rec: &mut Recorder, t: usize, goal: impl Fn(&GenMultiset, usize) -> bool) -> Result<bool> {
    let st = rec.setting();
    let g = &st.group;
    let start = rec.ms().value(t)?;
    if goal(rec.ms(), start) {
        return Ok(true);
    }
    let mut others: Vec<(usize, usize)> = rec.ms().entries().iter().filter(|e| e.occ != t).map(|e| (e.occ, e.value)).collect();
    others.sort_unstable();
    let mut steps = Vec::new();
    for &(o, v) in &others {
        for sign in [1i8, -1] {
            steps.push((Step::Right(o, sign), g.signed(v, sign)));
            steps.push((Step::Left(o, sign), g.signed(v, sign)));
        }
    }
    let mut parent: HashMap<usize, (usize, Step)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    let mut seen = vec![false; g.order()];
    seen[start] = true;
    let mut found = None;
    'search: while let Some(x) = queue.pop_front() {
        for &(step, v) in &steps {
            let y = match step {
                Step::Right(..) => g.mul(x, v),
                Step::Left(..) => g.mul(v, x),
            };
            if seen[y] {
                continue;
            }
            seen[y] = true;
            parent.insert(y, (x, step));
            if goal(rec.ms(), y) {
                found = Some(y);
                break 'search;
            }
            queue.push_back(y);
        }
    }
    let Some(mut y) = found else { return Ok(false) };
    let mut path = Vec::new();
    while y != start {
        let (x, step) = parent[&y];
        path.push(step);
        y = x;
    }
    for step in path.into_iter().rev() {
        match step {
            Step::Right(o, sign) => rec.rmul(t, o, sign)?,
            Step::Left(o, sign) => rec.lmul(t, o, sign)?,
        }
    }
    Ok(true)
}

/// A value outside `H` sharing no row or column with the multiset.
fn free_diagonal(ms: &GenMultiset, x: usize) -> bool {
    !ms.setting().in_h(x) && ms.is_diagonal_to(x)
}

pub fn solve_already_diagonal(s: &GenMultiset) -> Result<SolveReport> {
    let rec = cleaned(s)?;
    if !rec.ms().is_diagonal() {
        return not_applicable(format!("{} occurrences remain in H after cleaning", rec.ms().count_in_h()));
    }
    conclude(s, Strategy::AlreadyDiagonal, rec.finish())
}

fn smallest_divisor(m: usize) -> Option<usize> {
    (2..=m).find(|d| m.is_multiple_of(*d))
}

/// Applicable when the least non-trivial divisor `d` of `[G : core(H)]` satisfies `d >= 2r - 1`.
pub fn divisor_condition(s: &GenMultiset) -> bool {
    let st = s.setting();
    let m = st.group.order() / core_subgroup(&st.group, &st.subgroup).order();
    smallest_divisor(m).is_none_or(|d| d + 1 >= 2 * s.len())
}

pub fn solve_divisor(s: &GenMultiset) -> Result<SolveReport> {
    check_input(s)?;
    if !divisor_condition(s) {
        return not_applicable("least non-trivial divisor of the core index is below 2r - 1");
    }
    let mut rec = cleaned(s)?;
    while rec.ms().count_in_h() >= 2 {
        proven(diagonal_power_rec(&mut rec), "divisor extraction")?;
    }
    conclude(s, Strategy::Divisor, rec.finish())
}

/// Euclid on two occurrences of a cyclic subgroup; returns the occurrence made trivial.
fn euclid_rec(rec: &mut Recorder, hgroup: &SubgroupData, x: usize, y: usize) -> Result<usize> {
    let st = rec.setting();
    let g = &st.group;
    let gen = cyclic_generator(g, hgroup).ok_or_else(|| Error::NotApplicable("subgroup is not cyclic".into()))?;
    let mut log: HashMap<usize, usize> = HashMap::new();
    let mut p = g.identity();
    for k in 0..hgroup.order() {
        log.insert(p, k);
        p = g.mul(p, gen);
    }
    let exp = |rec: &Recorder, o: usize| -> Result<usize> {
        log.get(&rec.val(o)).copied().ok_or_else(|| Error::Precondition(format!("occurrence {o} is not in the cyclic subgroup")))
    };
    loop {
        let (a, b) = (exp(rec, x)?, exp(rec, y)?);
        if a == 0 {
            return Ok(x);
        }
        if b == 0 {
            return Ok(y);
        }
        let (big, small, q) = if a >= b { (x, y, a / b) } else { (y, x, b / a) };
        rec.right_power(big, small, -(q as i64))?;
    }
}

/// Nielsen moves taking two occurrences of a cyclic subgroup to `{g^gcd, e}`.
pub fn euclid_pair(s: &GenMultiset, hgroup: &SubgroupData, x_occ: usize, y_occ: usize) -> Result<Transcript> {
    if x_occ == y_occ {
        return precondition("euclid needs two distinct occurrences");
    }
    let mut rec = Recorder::new(s);
    euclid_rec(&mut rec, hgroup, x_occ, y_occ)?;
    Ok(rec.finish())
}

fn walk_identity_out(rec: &mut Recorder, e: usize) -> Result<()> {
    let before = rec.ms().count_in_h();
    if !walk_occurrence(rec, e, free_diagonal)? {
        return violation("no free diagonal element is reachable");
    }
    ensure_extracted(rec, before, "identity walk")
}

pub fn solve_cyclic(s: &GenMultiset) -> Result<SolveReport> {
    check_input(s)?;
    let st = s.setting().clone();
    if cyclic_generator(&st.group, &st.subgroup).is_none() {
        return not_applicable("H is not cyclic");
    }
    let mut rec = cleaned(s)?;
    while rec.ms().count_in_h() >= 2 {
        let hs = rec.ms().in_h_occs();
        let e = euclid_rec(&mut rec, &st.subgroup, hs[0], hs[1])?;
        walk_identity_out(&mut rec, e)?;
    }
    conclude(s, Strategy::Cyclic, rec.finish())
}

/// The prime `p` when `H` has order `p^2` and exponent `p`.
pub fn cpxcp_prime(g: &GroupTable, h: &SubgroupData) -> Option<usize> {
    let n = h.order();
    let p = (2..n).find(|p| p * p == n)?;
    if (2..p).any(|d| p % d == 0) {
        return None;
    }
    h.members.iter().all(|&x| x == g.identity() || g.element_order(x) == p).then_some(p)
}

pub fn solve_cpxcp(s: &GenMultiset) -> Result<SolveReport> {
    check_input(s)?;
    let st = s.setting().clone();
    let g = &st.group;
    let Some(p) = cpxcp_prime(g, &st.subgroup) else {
        return not_applicable("H is not a product of two cyclic groups of the same prime order");
    };
    let mut rec = cleaned(s)?;
    while rec.ms().count_in_h() >= 2 {
        let before = rec.ms().count_in_h();
        let hs = rec.ms().in_h_occs();
        let (x, y) = (hs[0], hs[1]);
        let (vx, vy) = (rec.val(x), rec.val(y));
        if g.closure(&[vx, vy]).len() < p * p {
            let identity = if vx == g.identity() {
                x
            } else if vy == g.identity() {
                y
            } else if let Some(k) = (1..p).find(|&k| g.pow(vy, k as i64) == vx) {
                rec.right_power(x, y, -(k as i64))?;
                x
            } else if let Some(k) = (1..p).find(|&k| g.pow(vx, k as i64) == vy) {
                rec.right_power(y, x, -(k as i64))?;
                y
            } else {
                return violation("two elements of a proper subgroup are not powers of each other");
            };
            walk_identity_out(&mut rec, identity)?;
            continue;
        }
        if let Some(&g1) = two_sided_sparse(rec.ms()).first() {
            proven(extraction_lemma_at(&mut rec, g1), "transitive extraction")?;
            continue;
        }
        let mut moved = false;
        for h in hs {
            if walk_occurrence(&mut rec, h, free_diagonal)? {
                moved = true;
                break;
            }
        }
        if !moved {
            return violation("no element of H reaches an empty board");
        }
        ensure_extracted(&rec, before, "empty-board extraction")?;
    }
    conclude(s, Strategy::CpxCp, rec.finish())
}

/// Left cleaning then extraction into empty columns, until one occurrence remains in `H`.
fn left_transversal_rec(rec: &mut Recorder) -> Result<()> {
    clean_rec(rec)?;
    while rec.ms().count_in_h() >= 2 {
        let mut moved = false;
        for h in rec.ms().in_h_occs() {
            let free_column = |ms: &GenMultiset, x: usize| {
                let st = ms.setting();
                !st.in_h(x) && ms.occupants(st.left_of(x), Side::Left).is_empty()
            };
            if walk_occurrence(rec, h, free_column)? {
                moved = true;
                break;
            }
        }
        if !moved {
            return violation("no element of H reaches an empty column");
        }
    }
    Ok(())
}

fn require_full_size(s: &GenMultiset) -> Result<()> {
    let idx = s.setting().index();
    if s.len() != idx {
        return precondition(format!("multiset size {} differs from index {idx}", s.len()));
    }
    Ok(())
}

/// Board-by-board solving of a left transversal: inverse pairs through folded configurations,
/// self-inverse boards through the odd-octopus algorithm.
fn board_pipeline(rec: &mut Recorder) -> Result<()> {
    let st = rec.setting();
    let atlas = &st.atlas;
    let hs = rec.ms().in_h_occs();
    let [mut h] = hs[..] else { return violation("a left transversal has exactly one occurrence in H") };
    for (b, board) in atlas.boards.iter().enumerate() {
        if b == atlas.h_board() || board.dim() == 1 {
            continue;
        }
        if board.self_inverse {
            if section(rec.ms(), b)?.multiset().is_diagonal() {
                continue;
            }
            let run = odd_octopus_algorithm(rec.ms(), b, h)?;
            rec.append(&run.transcript)?;
            h = run.h_occ;
        } else if b < board.inverse_board {
            let t = solve_board_pair(rec.ms(), b)?;
            rec.append(&t)?;
        }
    }
    Ok(())
}

/// Square components on every inverse pair and octopuses or equal sweets on self-inverse boards.
pub fn solve_configuration(s: &GenMultiset) -> Result<SolveReport> {
    check_input(s)?;
    if s.len() != s.setting().index() {
        return not_applicable("configuration pipeline needs a multiset of size equal to the index");
    }
    let mut rec = Recorder::new(s);
    left_transversal_rec(&mut rec)?;
    board_pipeline(&mut rec)?;
    conclude(s, Strategy::Configuration, rec.finish())
}

/// `[H : xHx^{-1} ∩ H] <= 2` for every `x`.
pub fn is_almost_normal(g: &GroupTable, h: &SubgroupData) -> bool {
    (0..g.order()).all(|x| conjugate_intersection_index(g, h, x) <= 2)
}

pub fn solve_almost_normal(s: &GenMultiset) -> Result<SolveReport> {
    let st = s.setting().clone();
    if !is_almost_normal(&st.group, &st.subgroup) {
        return not_applicable("some conjugate meets H with index above 2");
    }
    check_input(s)?;
    require_full_size(s)?;
    let mut rec = Recorder::new(s);
    left_transversal_rec(&mut rec)?;
    proven(board_pipeline(&mut rec), "almost-normal boards")?;
    conclude(s, Strategy::AlmostNormal, rec.finish())
}

/// The element of `board` in the given row (right coset) and column (left coset).
fn element_at(st: &Setting, board: usize, row: usize, col: usize) -> Result<usize> {
    let atlas = &st.atlas;
    let b = &atlas.boards[board];
    if atlas.board_of_right[row] != board || atlas.board_of_left[col] != board {
        return violation("row and column lie on different boards");
    }
    Ok(b.box_members(atlas.row_pos[row], atlas.col_pos[col])[0])
}

/// Joins components of a folded inverse pair by minting `e` from a doubled corner and walking
/// it to a box shared by two components.
fn merge_components(rec: &mut Recorder, board: usize) -> Result<()> {
    let st = rec.setting();
    let inverse = st.atlas.boards[board].inverse_board;
    loop {
        let (t, fold) = fold_inverse(&section(rec.ms(), board)?, &section(rec.ms(), inverse)?)?;
        if is_solvable(&t) {
            return Ok(());
        }
        for m in fold {
            rec.apply(m)?;
        }
        let (_, moves, _) = config_normal_form(&section(rec.ms(), board)?)?;
        for m in moves {
            rec.apply(m)?;
        }
        let comps = sigma_graph(&section(rec.ms(), board)?).components;
        if comps.len() < 2 {
            return violation("a single folded component is not square");
        }
        let (a, b) = (&comps[0], &comps[1]);
        let doubled = a.occs.iter().enumerate().find_map(|(i, &x)| {
            a.occs[i + 1..].iter().copied().find(|&y| rec.val(x) == rec.val(y)).map(|y| (x, y))
        });
        let (x, y) = doubled.ok_or_else(|| Error::InvariantViolation("normal form has no doubled box".into()))?;
        rec.rmul(y, x, -1)?;
        let z = element_at(&st, board, a.rows[0], b.cols[0])?;
        if !walk_occurrence(rec, y, |_, v| v == z)? {
            return violation("the identity cannot reach the joining box");
        }
    }
}

/// Replaces each unequal sweet by an octopus: one core edge becomes `e`, then a loop at a base.
fn sweets_to_octopuses(rec: &mut Recorder, board: usize) -> Result<()> {
    let st = rec.setting();
    loop {
        let g = theta_graph(&section(rec.ms(), board)?)?;
        let (_, forms, moves) = theta_normal_form(&g)?;
        for m in moves {
            rec.apply(m)?;
        }
        let target = forms.iter().find_map(|f| match f.form {
            ThetaNormalForm::Sweet { bases, left_sticks, right_sticks, .. } if left_sticks != right_sticks => Some(bases),
            _ => None,
        });
        let Some((p, q)) = target else { return Ok(()) };
        let g = theta_graph(&section(rec.ms(), board)?)?;
        let core: Vec<_> = g.edges().iter().filter(|e| e.other(p) == Some(q)).copied().collect();
        if core.len() < 2 {
            return violation("sweet core has fewer than two edges");
        }
        let (e1, e2) = (core[0], core[1]);
        if (e1.from, e1.to) != (e2.from, e2.to) {
            rec.inv(e2.occ)?;
        }
        if rec.val(e1.occ) != rec.val(e2.occ) {
            return violation("core edges share a box but not a value");
        }
        rec.rmul(e2.occ, e1.occ, -1)?;
        let z = st.atlas.boards[board].box_members(p, p)[0];
        if !walk_occurrence(rec, e2.occ, |_, v| v == z)? {
            return violation("the identity cannot reach the diagonal box");
        }
    }
}

pub fn solve_malnormal(s: &GenMultiset) -> Result<SolveReport> {
    let st = s.setting().clone();
    if !is_malnormal(&st.group, &st.subgroup) {
        return not_applicable("H is not malnormal");
    }
    check_input(s)?;
    require_full_size(s)?;
    let mut rec = Recorder::new(s);
    left_transversal_rec(&mut rec)?;
    for (b, board) in st.atlas.boards.iter().enumerate() {
        if b == st.atlas.h_board() || board.dim() == 1 {
            continue;
        }
        if board.self_inverse {
            sweets_to_octopuses(&mut rec, b)?;
        } else if b < board.inverse_board {
            merge_components(&mut rec, b)?;
        }
    }
    proven(board_pipeline(&mut rec), "malnormal boards")?;
    conclude(s, Strategy::Malnormal, rec.finish())
}

/// `[G:H] - #(non-self-inverse boards) / 2` for malnormal `H` with `rank(G) <= [G:H]`.
pub fn malnormal_rank_bound(g: &GroupTable, h: &SubgroupData) -> Result<usize> {
    if !is_malnormal(g, h) {
        return precondition("H is not malnormal");
    }
    let rank = rank_bruteforce(g)?;
    if rank > h.index() {
        return precondition(format!("rank {rank} exceeds the index {}", h.index()));
    }
    let atlas = build_atlas(g, h);
    Ok(h.index() - atlas.non_self_inverse_count() / 2)
}

fn rank4_extract(rec: &mut Recorder, depth: usize) -> Result<()> {
    if depth > 4 {
        return violation("rank-4 case analysis did not settle");
    }
    let st = rec.setting();
    let hs = rec.ms().in_h_occs();
    let gs = rec.ms().outside_occs();
    match (hs.len(), gs.len()) {
        (_, 1) => {
            let x = gs[0];
            if st.h_exponent(rec.val(x)) >= 3 {
                proven(diagonal_power_at(rec, x, 2), "single outside element, square")
            } else {
                proven(extraction_lemma_at(rec, x), "single outside element of exponent two")
            }
        }
        (2, 2) => rank4_two_two(rec, depth),
        (a, b) => violation(format!("unexpected split of {a} inside and {b} outside H")),
    }
}

fn rank4_two_two(rec: &mut Recorder, depth: usize) -> Result<()> {
    let st = rec.setting();
    let mut gs = rec.ms().outside_occs();
    gs.sort_by_key(|&o| (st.h_exponent(rec.val(o)), o));
    let (g1, g2) = (gs[0], gs[1]);
    let (e1, e2) = (st.h_exponent(rec.val(g1)), st.h_exponent(rec.val(g2)));
    if e2 >= 4 {
        case_large_exponent(rec, g1, g2)
    } else if e1 == 2 && e2 > 2 {
        proven(diagonal_power_at(rec, g2, e2 as i64 - 1), "inverse of the larger exponent")
    } else if e1 == 3 {
        case_both_three(rec, g1, g2, depth)
    } else {
        case_both_two(rec, g1, g2, depth)
    }
}

fn case_large_exponent(rec: &mut Recorder, g1: usize, g2: usize) -> Result<()> {
    let st = rec.setting();
    let g = &st.group;
    let x2 = rec.val(g2);
    for n in [2, 3] {
        if rec.ms().is_diagonal_to(g.pow(x2, n)) {
            return proven(diagonal_power_at(rec, g2, n), "diagonal power");
        }
    }
    let col1 = st.left_of(rec.val(g1));
    let i = [2i64, 3]
        .into_iter()
        .find(|&n| st.left_of(g.pow(x2, n)) == col1)
        .ok_or_else(|| Error::InvariantViolation("no power shares the column of the smaller element".into()))?;
    rec.left_power(g1, g2, -i)?;
    if !st.in_h(rec.val(g1)) {
        return violation("power division did not land in H");
    }
    let sq = g.pow(x2, 2);
    let blocked = [st.left_of(x2), st.left_of(g.pow(x2, 3))];
    let hs = rec.ms().in_h_occs();
    if let Some(&h) = hs.iter().find(|&&h| !blocked.contains(&st.left_of(g.mul(rec.val(h), sq)))) {
        rec.right_power(h, g2, 2)?;
        return proven(diagonal_power_at(rec, g2, 3), "cube after square extraction");
    }
    for &a in &hs {
        for &b in &hs {
            if a != b && st.left_of(g.mul(rec.val(a), sq)) == st.left_of(g.mul(rec.val(b), sq)) {
                rec.lmul(b, a, -1)?;
                rec.right_power(b, g2, 2)?;
                return proven(diagonal_power_at(rec, g2, 3), "cube after pigeonhole extraction");
            }
        }
    }
    violation("pigeonhole found no shared column")
}

/// `(g, h, sign)` with `H g h^sign` empty, in ascending order.
fn right_witness(rec: &Recorder, gs: &[usize], hs: &[usize]) -> Option<(usize, usize, i8)> {
    let st = rec.setting();
    let g = &st.group;
    for &x in gs {
        for &h in hs {
            for sign in [1i8, -1] {
                let y = g.mul(rec.val(x), g.signed(rec.val(h), sign));
                if rec.ms().occupants(st.right_of(y), Side::Right).is_empty() {
                    return Some((x, h, sign));
                }
            }
        }
    }
    None
}

/// `(h, sign, g)` with `h^sign g H` empty, in ascending order.
fn left_witness(rec: &Recorder, gs: &[usize], hs: &[usize]) -> Option<(usize, i8, usize)> {
    let st = rec.setting();
    let g = &st.group;
    for &x in gs {
        for &h in hs {
            for sign in [1i8, -1] {
                let y = g.mul(g.signed(rec.val(h), sign), rec.val(x));
                if rec.ms().occupants(st.left_of(y), Side::Left).is_empty() {
                    return Some((h, sign, x));
                }
            }
        }
    }
    None
}

fn case_both_three(rec: &mut Recorder, g1: usize, g2: usize, depth: usize) -> Result<()> {
    let st = rec.setting();
    let g = &st.group;
    for x in [g1, g2] {
        if rec.ms().is_diagonal_to(g.pow(rec.val(x), 2)) {
            return proven(diagonal_power_at(rec, x, 2), "inverse diagonal");
        }
    }
    let inv1 = g.inv(rec.val(g1));
    let x2 = rec.val(g2);
    let same_col = st.left_of(inv1) == st.left_of(x2);
    let same_row = st.right_of(inv1) == st.right_of(x2);
    if same_col && same_row {
        return case_swapped_boxes(rec, g1, g2);
    }
    let (a, b) = if same_row { (g1, g2) } else { (g2, g1) };
    let inva = g.inv(rec.val(a));
    if st.right_of(inva) != st.right_of(rec.val(b)) || st.left_of(inva) == st.left_of(rec.val(b)) {
        return violation("inverse lies in neither the row nor the column of the other element");
    }
    let y = g.mul(rec.val(b), inva);
    if st.left_of(y) != st.left_of(rec.val(a)) {
        rec.inv(a)?;
        rec.lmul(a, b, 1)?;
        proven(diagonal_power_at(rec, b, 2), "inverse after quotient move")
    } else {
        rec.inv(b)?;
        rec.lmul(b, a, 1)?;
        rank4_extract(rec, depth + 1)
    }
}

fn case_swapped_boxes(rec: &mut Recorder, g1: usize, g2: usize) -> Result<()> {
    if let Some(&x) = two_sided_sparse(rec.ms()).first() {
        return proven(extraction_lemma_at(rec, x), "two-sided sparse element");
    }
    let hs = rec.ms().in_h_occs();
    let st = rec.setting();
    let g = &st.group;
    let (gi, _, _) = right_witness(rec, &[g1, g2], &hs).ok_or_else(|| Error::InvariantViolation("no empty row next to the outside elements".into()))?;
    let (hk, delta, gj) = left_witness(rec, &[g1, g2], &hs).ok_or_else(|| Error::InvariantViolation("no empty column next to the outside elements".into()))?;
    if gi == gj {
        return violation("an element with sparse orbits on both sides was missed");
    }
    let x = g.mul(g.mul(rec.val(gi), g.signed(rec.val(hk), delta)), rec.val(gj));
    if !free_diagonal(rec.ms(), x) {
        return violation("both outside elements share an orbit but neither is two-sided sparse");
    }
    let before = rec.ms().count_in_h();
    if delta < 0 {
        rec.inv(hk)?;
    }
    rec.lmul(hk, gi, 1)?;
    rec.rmul(hk, gj, 1)?;
    ensure_extracted(rec, before, "swapped-box extraction")
}

fn case_both_two(rec: &mut Recorder, g1: usize, g2: usize, depth: usize) -> Result<()> {
    if let Some(&x) = two_sided_sparse(rec.ms()).first() {
        return proven(extraction_lemma_at(rec, x), "sparse element of exponent two");
    }
    let st = rec.setting();
    let g = &st.group;
    let mut found = None;
    'search: for (a, b) in [(g1, g2), (g2, g1)] {
        for sign in [1i8, -1] {
            let y = g.mul(rec.val(a), g.signed(rec.val(b), sign));
            if rec.ms().occupants(st.right_of(y), Side::Right).is_empty() {
                found = Some((a, b, sign));
                break 'search;
            }
        }
    }
    let (a, b, sign) = found.ok_or_else(|| Error::InvariantViolation("no empty row of the form H g_i g_j".into()))?;
    if sign < 0 {
        rec.inv(b)?;
    }
    let h1 = rec.ms().in_h_occs()[0];
    let prod = g.mul(rec.val(a), rec.val(b));
    if rec.ms().occupants(st.left_of(prod), Side::Left).is_empty() {
        let z = g.mul(prod, rec.val(h1));
        if !free_diagonal(rec.ms(), z) {
            return violation("row orbit of an empty row meets an occupied row");
        }
        let before = rec.ms().count_in_h();
        rec.lmul(h1, b, 1)?;
        rec.lmul(h1, a, 1)?;
        return ensure_extracted(rec, before, "product extraction");
    }
    rec.lmul(b, a, 1)?;
    rank4_extract(rec, depth + 1)
}

/// Case analysis for generating multisets of at most four elements.
pub fn solve_rank4(s: &GenMultiset) -> Result<SolveReport> {
    check_input(s)?;
    if s.len() > 4 {
        return precondition(format!("rank-4 solver takes at most four elements, got {}", s.len()));
    }
    if s.setting().index() < 4 {
        return precondition(format!("rank-4 solver needs index at least 4, got {}", s.setting().index()));
    }
    let mut rec = cleaned(s)?;
    while rec.ms().count_in_h() >= 2 {
        let before = rec.ms().count_in_h();
        rank4_extract(&mut rec, 0)?;
        if rec.ms().count_in_h() + 1 != before {
            return violation("rank-4 step did not extract exactly one element");
        }
    }
    conclude(s, Strategy::Rank4, rec.finish())
}

pub fn solve_bfs(s: &GenMultiset) -> Result<SolveReport> {
    check_input(s)?;
    match bfs_oracle_capped(s, BFS_DEPTH, BFS_GROUP_CAP, BFS_STATE_CAP)? {
        Some(t) => conclude(s, Strategy::Bfs, t),
        None => not_applicable(format!("no diagonal multiset within {BFS_DEPTH} moves")),
    }
}

pub fn solve_with(strategy: Strategy, s: &GenMultiset) -> Result<SolveReport> {
    match strategy {
        Strategy::AlreadyDiagonal => solve_already_diagonal(s),
        Strategy::Cyclic => solve_cyclic(s),
        Strategy::CpxCp => solve_cpxcp(s),
        Strategy::AlmostNormal => solve_almost_normal(s),
        Strategy::Malnormal => solve_malnormal(s),
        Strategy::Divisor => solve_divisor(s),
        Strategy::Rank4 => solve_rank4(s),
        Strategy::Configuration => solve_configuration(s),
        Strategy::Bfs => solve_bfs(s),
    }
}

/// First strategy of the ladder that succeeds; a failure report lists every rejection.
pub fn solve_general(s: &GenMultiset) -> Result<SolveReport> {
    check_input(s)?;
    let mut rejections = Vec::new();
    for strategy in LADDER {
        match solve_with(strategy, s) {
            Ok(report) => return Ok(report),
            Err(e @ (Error::NotApplicable(_) | Error::Resource { .. } | Error::Precondition(_))) => {
                rejections.push(Rejection { strategy, reason: e.to_string() })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SolveReport::failure(s, rejections))
}

/// Solves in `G / core(H)` and replays the same moves on the original representatives.
pub fn reduce_via_core(s: &GenMultiset) -> Result<SolveReport> {
    check_input(s)?;
    let st = s.setting();
    let core = core_subgroup(&st.group, &st.subgroup);
    if core.is_trivial() {
        return solve_general(s);
    }
    let q = quotient_by_normal(&st.group, &core)?;
    let hbar: BTreeSet<usize> = st.subgroup.members.iter().map(|&x| q.project(x)).collect();
    let hbar = subgroup_from_members(&q.target, &hbar.into_iter().collect::<Vec<_>>())?;
    let qst = Setting::new(q.target.clone(), hbar);
    let entries = s.entries().iter().map(|e| Entry { occ: e.occ, value: q.project(e.value) }).collect();
    let sbar = GenMultiset::from_entries(qst.clone(), entries)?;
    let inner = solve_general(&sbar)?;
    let Some(strategy) = inner.theorem_used else {
        let mut report = SolveReport::failure(s, inner.failure_reason.unwrap_or_default());
        report.quotient_order = Some(q.target.order());
        return Ok(report);
    };
    let mut rec = Recorder::new(s);
    for m in &inner.transcript.moves {
        rec.apply(*m)?;
    }
    let lifted = rec.finish();
    let pattern = |ms_values: &[(usize, usize)], left: &dyn Fn(usize) -> usize, right: &dyn Fn(usize) -> usize| {
        ms_values.iter().map(|&(o, v)| (o, left(v), right(v))).collect::<Vec<_>>()
    };
    let up: Vec<(usize, usize)> = lifted.final_.iter().map(|e| (e.occ, e.value)).collect();
    let down: Vec<(usize, usize)> = inner.transcript.final_.iter().map(|e| (e.occ, e.value)).collect();
    let pu = pattern(&up, &|v| st.left_of(v), &|v| st.right_of(v));
    let pd = pattern(&down, &|v| qst.left_of(v), &|v| qst.right_of(v));
    let same = |a: &[(usize, usize, usize)], b: &[(usize, usize, usize)], pick: fn(&(usize, usize, usize)) -> usize| {
        a.iter().zip(b).all(|(x, y)| a.iter().zip(b).all(|(u, w)| (pick(x) == pick(u)) == (pick(y) == pick(w))))
    };
    if up.iter().zip(&down).any(|(a, b)| a.0 != b.0 || q.project(a.1) != b.1) || !same(&pu, &pd, |t| t.1) || !same(&pu, &pd, |t| t.2) {
        return violation("lifted coset pattern differs from the quotient solution");
    }
    let mut report = conclude(s, strategy, lifted)?;
    report.quotient_order = Some(q.target.order());
    Ok(report)
}

/// Solves every instance with the general driver, in parallel when the `parallel` feature is on.
pub fn solve_batch(instances: &[GenMultiset]) -> Vec<Result<SolveReport>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        instances.par_iter().map(solve_general).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        solve_batch_sequential(instances)
    }
}

pub fn solve_batch_sequential(instances: &[GenMultiset]) -> Vec<Result<SolveReport>> {
    instances.iter().map(solve_general).collect()
}

/// Settings shared by many multisets over one `(G, H)`.
pub fn multiset(setting: &Arc<Setting>, values: &[usize]) -> Result<GenMultiset> {
    GenMultiset::new(setting.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coset_geometry::is_left_right_transversal;
    use crate::corpus::random_generating;
    use crate::families::family;
    use crate::group_core::subgroup_generate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setting(fam: &str, gens: &[&str]) -> Arc<Setting> {
        let g = family(fam).unwrap();
        let gs: Vec<usize> = gens.iter().map(|t| g.parse_element(t).unwrap()).collect();
        let h = subgroup_generate(&g, &gs).unwrap();
        Setting::new(g, h)
    }

    fn ms(st: &Arc<Setting>, vals: &[&str]) -> GenMultiset {
        let v: Vec<usize> = vals.iter().map(|t| st.group.parse_element(t).unwrap()).collect();
        GenMultiset::new(st.clone(), &v).unwrap()
    }

    fn random(st: &Arc<Setting>, k: usize, rng: &mut ChaCha8Rng) -> GenMultiset {
        let v = random_generating(&st.group, k, rng).unwrap();
        GenMultiset::new(st.clone(), &v).unwrap()
    }

    fn check(report: &SolveReport, s: &GenMultiset) {
        assert!(report.success());
        let out = report.transcript.replay(s.setting()).unwrap();
        assert!(out.generates());
        assert!(is_left_right_transversal(&s.setting().atlas.cosets, &report.transversal));
        for v in out.values() {
            assert!(report.transversal.contains(&v));
        }
    }

    #[test]
    fn strategy_tags_round_trip() {
        for s in LADDER {
            assert_eq!(s.tag().parse::<Strategy>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.tag()));
        }
        assert!("bogus".parse::<Strategy>().is_err());
    }

    #[test]
    fn divisor_examples() {
        let st = setting("frobenius:21", &["(2 3 5)(4 7 6)"]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let s = random(&st, 2, &mut rng);
            let r = solve_divisor(&s).unwrap();
            check(&r, &s);
            assert_eq!(r.transversal.len(), 7);
        }
        let st = setting("alternating:4", &["(1 2 3)"]);
        let s = ms(&st, &["(1 2 3)", "(1 2)(3 4)"]);
        assert!(matches!(solve_divisor(&s), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn divisor_condition_matches_arithmetic() {
        for (fam, gens, r, expected) in [
            ("frobenius:21", &["(2 3 5)(4 7 6)"][..], 2, true),
            ("frobenius:21", &["(2 3 5)(4 7 6)"][..], 3, false),
            ("alternating:4", &["(1 2 3)"][..], 2, false),
            ("cyclic:6", &["(1 2 3 4 5 6)"][..], 1, true),
        ] {
            let st = setting(fam, gens);
            let g = st.group.identity();
            let s = GenMultiset::new(st.clone(), &vec![g; r]).unwrap();
            assert_eq!(divisor_condition(&s), expected, "{fam} r={r}");
        }
    }

    fn exponent_of(g: &GroupTable, gen: usize, x: usize) -> usize {
        (0..g.order()).find(|&k| g.pow(gen, k as i64) == x).unwrap()
    }

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 { a } else { gcd(b, a % b) }
    }

    #[test]
    fn euclid_examples() {
        let st = setting("cyclic:6", &["(1 2 3 4 5 6)"]);
        let g = &st.group;
        let gen = g.parse_element("(1 2 3 4 5 6)").unwrap();
        for (a, b, want) in [(3, 5, 1), (4, 2, 2), (2, 0, 2), (0, 5, 5)] {
            let s = GenMultiset::new(st.clone(), &[g.pow(gen, a), g.pow(gen, b)]).unwrap();
            let out = euclid_pair(&s, &st.subgroup, 0, 1).unwrap().replay(&st).unwrap();
            let mut v = out.values();
            v.sort_unstable();
            assert_eq!(v, vec![g.identity(), g.pow(gen, want)], "{a} {b}");
        }
        let s = GenMultiset::new(st.clone(), &[gen, g.identity()]).unwrap();
        assert!(euclid_pair(&s, &st.subgroup, 0, 1).unwrap().moves.is_empty());
    }

    #[test]
    fn euclid_reaches_gcd_on_small_cyclic_groups() {
        for n in 2..=12 {
            let st = setting(&format!("cyclic:{n}"), &[]);
            let g = &st.group;
            let gen = g.parse_element(&format!("({})", (1..=n).map(|i| i.to_string()).collect::<Vec<_>>().join(" "))).unwrap();
            let full = subgroup_generate(g, &[gen]).unwrap();
            for a in 0..n {
                for b in 0..n {
                    let s = GenMultiset::new(st.clone(), &[g.pow(gen, a as i64), g.pow(gen, b as i64)]).unwrap();
                    let out = euclid_pair(&s, &full, 0, 1).unwrap().replay(&st).unwrap();
                    let exps: BTreeSet<usize> = out.values().iter().map(|&x| exponent_of(g, gen, x)).collect();
                    let d = gcd(gcd(a, b), n) % n;
                    let mut want = BTreeSet::from([0]);
                    let got_nonzero: Vec<usize> = exps.iter().copied().filter(|&e| e != 0).collect();
                    match got_nonzero[..] {
                        [] => assert_eq!(d, 0),
                        [e] => {
                            assert_eq!(gcd(e, n), d, "C{n} {a} {b}");
                            want.insert(e);
                        }
                        _ => panic!("C{n} {a} {b}: no identity"),
                    }
                    assert_eq!(exps, want);
                }
            }
        }
    }

    #[test]
    fn cyclic_examples() {
        let st = setting("dihedral:5", &["(2 5)(3 4)"]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let s = random(&st, 5, &mut rng);
            check(&solve_cyclic(&s).unwrap(), &s);
        }
        let st = setting("symmetric:3", &["(1 2 3)"]);
        let s = ms(&st, &["(1 2)", "(1 2 3)"]);
        check(&solve_cyclic(&s).unwrap(), &s);
        let st = setting("alternating:4", &["(1 2)(3 4)", "(1 3)(2 4)"]);
        let s = ms(&st, &["(1 2 3)", "(1 2)(3 4)"]);
        assert!(matches!(solve_cyclic(&s), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn cpxcp_examples() {
        let st = setting("alternating:4", &["(1 2)(3 4)", "(1 3)(2 4)"]);
        assert_eq!(cpxcp_prime(&st.group, &st.subgroup), Some(2));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for k in 2..=3 {
            for _ in 0..20 {
                let s = random(&st, k, &mut rng);
                check(&solve_cpxcp(&s).unwrap(), &s);
            }
        }
        let c9 = setting("cyclic:9", &["(1 2 3 4 5 6 7 8 9)"]);
        assert_eq!(cpxcp_prime(&c9.group, &c9.subgroup), None);
        let e = setting("elementary:3^2", &["(1 2 3)", "(4 5 6)"]);
        let s = ms(&e, &["(1 2 3)", "(4 5 6)"]);
        assert!(matches!(solve_cpxcp(&s), Err(Error::Precondition(_))));
        let e = setting("elementary:3^2", &["(1 2 3)(4 5 6)"]);
        assert_eq!(cpxcp_prime(&e.group, &e.subgroup), None);
    }

    #[test]
    fn almost_normal_examples() {
        let st = setting("dihedral:4", &["(2 4)"]);
        assert!(is_almost_normal(&st.group, &st.subgroup));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let s = random(&st, 4, &mut rng);
            check(&solve_almost_normal(&s).unwrap(), &s);
        }
        let st = setting("symmetric:4", &["(1 2 3)"]);
        assert!(!is_almost_normal(&st.group, &st.subgroup));
        let s = random(&st, 8, &mut rng);
        assert!(matches!(solve_almost_normal(&s), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn malnormal_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (fam, gens) in [("symmetric:3", "(1 2)"), ("frobenius:21", "(2 3 5)(4 7 6)"), ("frobenius:20", "(2 3 5 4)")] {
            let st = setting(fam, &[gens]);
            for _ in 0..20 {
                let s = random(&st, st.index(), &mut rng);
                check(&solve_malnormal(&s).unwrap(), &s);
            }
        }
        let st = setting("dihedral:4", &["(2 4)"]);
        let s = random(&st, 4, &mut rng);
        assert!(matches!(solve_malnormal(&s), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn malnormal_rank_bounds() {
        let st = setting("frobenius:21", &["(2 3 5)(4 7 6)"]);
        assert_eq!(malnormal_rank_bound(&st.group, &st.subgroup).unwrap(), 6);
        let st = setting("symmetric:3", &["(1 2)"]);
        assert_eq!(malnormal_rank_bound(&st.group, &st.subgroup).unwrap(), 3);
        let st = setting("frobenius:20", &["(2 3 5 4)"]);
        let bound = malnormal_rank_bound(&st.group, &st.subgroup).unwrap();
        assert!(rank_bruteforce(&st.group).unwrap() <= bound);
        let st = setting("dihedral:4", &["(2 4)"]);
        assert!(matches!(malnormal_rank_bound(&st.group, &st.subgroup), Err(Error::Precondition(_))));
    }

    #[test]
    fn rank4_examples() {
        let st = setting("elementary:2^4", &["(1 2)"]);
        let s = ms(&st, &["(1 2)", "(3 4)", "(5 6)", "(7 8)"]);
        check(&solve_rank4(&s).unwrap(), &s);
        let st = setting("symmetric:4", &["(1 2)"]);
        let s = ms(&st, &["(1 2)", "(1 2)", "(1 2 3 4)", "(3 4)"]);
        let r = solve_rank4(&s).unwrap();
        check(&r, &s);
        assert!(!r.transcript.moves.is_empty());
        let s = random(&st, 5, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(matches!(solve_rank4(&s), Err(Error::Precondition(_))));
        let st = setting("symmetric:3", &["(1 2)"]);
        let s = ms(&st, &["(1 2)", "(1 2 3)"]);
        assert!(matches!(solve_rank4(&s), Err(Error::Precondition(_))));
    }

    #[test]
    fn already_diagonal_is_immediate() {
        let st = setting("symmetric:3", &["(1 2)"]);
        let s = ms(&st, &["(1 2)", "(1 3)", "(2 3)"]);
        let r = solve_general(&s).unwrap();
        check(&r, &s);
        assert_eq!(r.theorem_used, Some(Strategy::AlreadyDiagonal));
        assert!(r.transcript.moves.is_empty());
    }

    #[test]
    fn ladder_tags() {
        let st = setting("dihedral:5", &["(2 5)(3 4)"]);
        let s = ms(&st, &["(2 5)(3 4)", "(2 5)(3 4)", "(1 2 3 4 5)"]);
        let r = solve_general(&s).unwrap();
        check(&r, &s);
        assert!(matches!(r.theorem_used, Some(Strategy::AlreadyDiagonal | Strategy::Cyclic)));
        let st = setting("symmetric:4", &["(1 2)", "(3 4)"]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut seen = BTreeSet::new();
        for _ in 0..40 {
            let s = random(&st, 4, &mut rng);
            let r = solve_general(&s).unwrap();
            check(&r, &s);
            seen.insert(r.theorem_used.unwrap());
        }
        assert!(seen.contains(&Strategy::Rank4) || seen.contains(&Strategy::CpxCp));
    }

    #[test]
    fn honest_failure_lists_every_strategy() {
        let st = setting("alternating:5", &["(1 2 3)", "(1 2)(4 5)"]);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut found = false;
        for _ in 0..200 {
            let s = random(&st, 7, &mut rng);
            let r = solve_general(&s).unwrap();
            if !r.success() {
                let tags: Vec<Strategy> = r.failure_reason.unwrap().iter().map(|x| x.strategy).collect();
                assert_eq!(tags, LADDER.to_vec());
                assert!(r.transversal.is_empty());
                found = true;
                break;
            }
            check(&r, &s);
        }
        assert!(found);
    }

    #[test]
    fn core_reduction() {
        let st = setting("cyclic:6", &["(1 4)(2 5)(3 6)"]);
        let s = ms(&st, &["(1 3 5)(2 4 6)", "(1 4)(2 5)(3 6)"]);
        let r = reduce_via_core(&s).unwrap();
        check(&r, &s);
        assert_eq!(r.quotient_order, Some(3));
        let st = setting("symmetric:3", &["(1 2)"]);
        let s = ms(&st, &["(1 2)", "(1 2 3)"]);
        let r = reduce_via_core(&s).unwrap();
        check(&r, &s);
        assert_eq!(r.quotient_order, None);
        let st = setting("dihedral:4", &["(1 3)(2 4)"]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let s = random(&st, 4, &mut rng);
            check(&reduce_via_core(&s).unwrap(), &s);
        }
    }

    #[test]
    fn input_checks() {
        let st = setting("symmetric:3", &["(1 2)"]);
        let s = ms(&st, &["(1 2)", "(1 2)"]);
        assert!(matches!(solve_general(&s), Err(Error::Precondition(_))));
        let s = ms(&st, &["(1 2)", "(1 2 3)", "()", "()"]);
        assert!(matches!(solve_general(&s), Err(Error::Precondition(_))));
    }

    #[test]
    fn batch_matches_sequential() {
        let st = setting("dihedral:6", &["(2 6)(3 5)"]);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let xs: Vec<GenMultiset> = (0..16).map(|_| random(&st, 4, &mut rng)).collect();
        let a = solve_batch(&xs);
        let b = solve_batch_sequential(&xs);
        for (x, y) in a.iter().zip(&b) {
            let (x, y) = (x.as_ref().unwrap(), y.as_ref().unwrap());
            assert_eq!(serde_json::to_string(x).unwrap(), serde_json::to_string(y).unwrap());
        }
    }
}
