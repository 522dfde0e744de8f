//! Occurrence-indexed generating multisets, Nielsen moves, replayable
//! transcripts, cleaning and extraction.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coset_geometry::{build_atlas, Cell, ChessboardAtlas, Side};
use crate::error::{not_applicable, precondition, violation, Error, Result};
use crate::group_core::{h_exponent, is_generating, GroupTable, SubgroupData};

pub const DEFAULT_BFS_SIZE_CAP: usize = 24;
pub const DEFAULT_BFS_STATE_CAP: usize = 2_000_000;

/// A group, a subgroup and its chessboard atlas, shared by every multiset over them.
#[derive(Debug)]
pub struct Setting {
    pub group: GroupTable,
    pub subgroup: SubgroupData,
    pub atlas: ChessboardAtlas,
}

impl Setting {
    pub fn new(group: GroupTable, subgroup: SubgroupData) -> Arc<Setting> {
        let atlas = build_atlas(&group, &subgroup);
        Arc::new(Setting { group, subgroup, atlas })
    }

    pub fn in_h(&self, x: usize) -> bool {
        self.subgroup.contains(x)
    }

    pub fn index(&self) -> usize {
        self.atlas.index()
    }

    pub fn cell(&self, x: usize) -> Cell {
        self.atlas.cell(x)
    }

    pub fn left_of(&self, x: usize) -> usize {
        self.atlas.left_of(x)
    }

    pub fn right_of(&self, x: usize) -> usize {
        self.atlas.right_of(x)
    }

    pub fn coset_of(&self, x: usize, side: Side) -> usize {
        self.atlas.cosets.coset_of(x, side)
    }

    pub fn h_exponent(&self, x: usize) -> usize {
        h_exponent(&self.group, &self.subgroup, x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entry {
    pub occ: usize,
    pub value: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NielsenMove {
    Invert { target: usize },
    /// `target -> by * target`
    LeftMul { target: usize, by: usize },
    /// `target -> target * by`
    RightMul { target: usize, by: usize },
}

impl NielsenMove {
    pub fn target(&self) -> usize {
        match *self {
            NielsenMove::Invert { target }
            | NielsenMove::LeftMul { target, .. }
            | NielsenMove::RightMul { target, .. } => target,
        }
    }

    pub fn to_line(&self) -> String {
        match *self {
            NielsenMove::Invert { target } => format!("INV {target}"),
            NielsenMove::LeftMul { target, by } => format!("LMUL {target} {by}"),
            NielsenMove::RightMul { target, by } => format!("RMUL {target} {by}"),
        }
    }

    pub fn parse_line(line: &str) -> std::result::Result<NielsenMove, String> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let num = |i: usize| -> std::result::Result<usize, String> {
            toks.get(i).ok_or_else(|| format!("missing operand in {line:?}"))?.parse().map_err(|_| format!("bad operand in {line:?}"))
        };
        match toks.first().copied() {
            Some("INV") if toks.len() == 2 => Ok(NielsenMove::Invert { target: num(1)? }),
            Some("LMUL") if toks.len() == 3 => Ok(NielsenMove::LeftMul { target: num(1)?, by: num(2)? }),
            Some("RMUL") if toks.len() == 3 => Ok(NielsenMove::RightMul { target: num(1)?, by: num(2)? }),
            _ => Err(format!("unrecognised move {line:?}")),
        }
    }
}

/// A letter `h^sign` of a word over occurrences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub occ: usize,
    pub sign: i8,
}

/// An occurrence-indexed multiset of group elements.
#[derive(Clone, Debug)]
pub struct GenMultiset {
    setting: Arc<Setting>,
    entries: Vec<Entry>,
}

/// Placement of one occurrence in the atlas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccPlacement {
    pub occ: usize,
    pub board: usize,
    pub row: usize,
    pub col: usize,
    pub left_coset: usize,
    pub right_coset: usize,
    pub in_h: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub occurrences: Vec<OccPlacement>,
    pub in_h: usize,
    pub left_clean: bool,
    pub right_clean: bool,
    pub diagonal: bool,
}

impl GenMultiset {
    /// Occurrence ids are assigned `0..values.len()`.
    pub fn new(setting: Arc<Setting>, values: &[usize]) -> Result<GenMultiset> {
        let n = setting.group.order();
        if let Some(&bad) = values.iter().find(|&&v| v >= n) {
            return precondition(format!("element index {bad} out of range"));
        }
        let entries = values.iter().enumerate().map(|(occ, &value)| Entry { occ, value }).collect();
        Ok(GenMultiset { setting, entries })
    }

    pub fn from_entries(setting: Arc<Setting>, entries: Vec<Entry>) -> Result<GenMultiset> {
        let ids: BTreeSet<usize> = entries.iter().map(|e| e.occ).collect();
        if ids.len() != entries.len() {
            return precondition("occurrence ids must be unique");
        }
        if entries.iter().any(|e| e.value >= setting.group.order()) {
            return precondition("element index out of range");
        }
        Ok(GenMultiset { setting, entries })
    }

    pub fn setting(&self) -> &Arc<Setting> {
        &self.setting
    }

    pub fn group(&self) -> &GroupTable {
        &self.setting.group
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn sorted_values(&self) -> Vec<usize> {
        let mut v = self.values();
        v.sort_unstable();
        v
    }

    pub fn position(&self, occ: usize) -> Result<usize> {
        self.entries.iter().position(|e| e.occ == occ).ok_or(Error::UnknownOccurrence(occ))
    }

    pub fn value(&self, occ: usize) -> Result<usize> {
        Ok(self.entries[self.position(occ)?].value)
    }

    /// Value of an occurrence known to exist.
    pub fn val(&self, occ: usize) -> usize {
        self.value(occ).expect("occurrence exists")
    }

    pub fn occs(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.occ).collect()
    }

    pub fn in_h_occs(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.entries.iter().filter(|e| self.setting.in_h(e.value)).map(|e| e.occ).collect();
        v.sort_unstable();
        v
    }

    pub fn outside_occs(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.entries.iter().filter(|e| !self.setting.in_h(e.value)).map(|e| e.occ).collect();
        v.sort_unstable();
        v
    }

    pub fn count_in_h(&self) -> usize {
        self.entries.iter().filter(|e| self.setting.in_h(e.value)).count()
    }

    pub fn generates(&self) -> bool {
        is_generating(&self.setting.group, &self.values())
    }

    pub fn apply_move(&self, m: &NielsenMove) -> Result<GenMultiset> {
        let mut out = self.clone();
        out.apply_in_place(m)?;
        Ok(out)
    }

    pub fn apply_in_place(&mut self, m: &NielsenMove) -> Result<()> {
        let g = &self.setting.group;
        match *m {
            NielsenMove::Invert { target } => {
                let p = self.position(target)?;
                self.entries[p].value = g.inv(self.entries[p].value);
            }
            NielsenMove::LeftMul { target, by } | NielsenMove::RightMul { target, by } => {
                if target == by {
                    return Err(Error::InvalidMove(format!("occurrence {target} cannot act on itself")));
                }
                let p = self.position(target)?;
                let b = self.value(by)?;
                let t = self.entries[p].value;
                self.entries[p].value = if matches!(m, NielsenMove::LeftMul { .. }) { g.mul(b, t) } else { g.mul(t, b) };
            }
        }
        Ok(())
    }

    /// Occurrences (sorted by id) whose value lies in the given coset.
    pub fn occupants(&self, coset: usize, side: Side) -> Vec<usize> {
        let mut v: Vec<usize> =
            self.entries.iter().filter(|e| self.setting.coset_of(e.value, side) == coset).map(|e| e.occ).collect();
        v.sort_unstable();
        v
    }

    pub fn coset_occupied(&self, coset: usize, side: Side) -> bool {
        self.entries.iter().any(|e| self.setting.coset_of(e.value, side) == coset)
    }

    pub fn occupancy(&self, side: Side) -> Vec<usize> {
        let mut counts = vec![0; self.setting.index()];
        for e in &self.entries {
            counts[self.setting.coset_of(e.value, side)] += 1;
        }
        counts
    }

    fn side_clean(&self, side: Side) -> bool {
        let outside: Vec<usize> =
            self.entries.iter().filter(|e| !self.setting.in_h(e.value)).map(|e| self.setting.coset_of(e.value, side)).collect();
        let distinct: BTreeSet<usize> = outside.iter().copied().collect();
        !outside.is_empty() && distinct.len() == outside.len()
    }

    pub fn is_left_clean(&self) -> bool {
        self.side_clean(Side::Left)
    }

    pub fn is_right_clean(&self) -> bool {
        self.side_clean(Side::Right)
    }

    pub fn is_left_right_clean(&self) -> bool {
        self.is_left_clean() && self.is_right_clean()
    }

    /// No two occurrences share a left coset or a right coset.
    pub fn is_diagonal(&self) -> bool {
        self.occupancy(Side::Left).iter().all(|&c| c <= 1) && self.occupancy(Side::Right).iter().all(|&c| c <= 1)
    }

    /// Whether `x` shares no row and no column with any occurrence.
    pub fn is_diagonal_to(&self, x: usize) -> bool {
        let l = self.setting.left_of(x);
        let r = self.setting.right_of(x);
        self.entries.iter().all(|e| self.setting.left_of(e.value) != l && self.setting.right_of(e.value) != r)
    }

    pub fn placement(&self) -> Placement {
        let occurrences = self
            .entries
            .iter()
            .map(|e| {
                let c = self.setting.cell(e.value);
                OccPlacement {
                    occ: e.occ,
                    board: c.board,
                    row: c.row,
                    col: c.col,
                    left_coset: self.setting.left_of(e.value),
                    right_coset: self.setting.right_of(e.value),
                    in_h: self.setting.in_h(e.value),
                }
            })
            .collect();
        Placement {
            occurrences,
            in_h: self.count_in_h(),
            left_clean: self.is_left_clean(),
            right_clean: self.is_right_clean(),
            diagonal: self.is_diagonal(),
        }
    }

    fn letters_in_h(&self) -> Vec<Letter> {
        self.in_h_occs().into_iter().flat_map(|occ| [Letter { occ, sign: 1 }, Letter { occ, sign: -1 }]).collect()
    }

    /// Value of a word read left to right.
    pub fn word_value(&self, word: &[Letter]) -> usize {
        let g = self.group();
        word.iter().fold(0, |acc, l| g.mul(acc, g.signed(self.val(l.occ), l.sign)))
    }
}

/// A witness that the orbit of a coset under `<S ∩ H>` reaches an empty coset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseWitness {
    /// Written word `w`; the empty coset is `w·gH` (left) or `Hg·w` (right).
    pub word: Vec<Letter>,
    pub reached: usize,
}

/// Shortest, then lexicographically least, word over `S ∩ H` moving the coset to an empty one.
pub fn sparse_orbit(s: &GenMultiset, target_coset: usize, side: Side) -> Option<SparseWitness> {
    let st = s.setting();
    let g = &st.group;
    let idx = st.index();
    let reps: Vec<usize> = st.atlas.cosets.cosets(side).iter().map(|c| c.rep).collect();
    let letters = s.letters_in_h();
    let lv: Vec<usize> = letters.iter().map(|l| g.signed(s.val(l.occ), l.sign)).collect();
    let empty: Vec<bool> = {
        let occ = s.occupancy(side);
        occ.iter().map(|&c| c == 0).collect()
    };
    // act(k, c): the coset k·c (left) or c·k (right)
    let act = |k: usize, c: usize| -> usize {
        match side {
            Side::Left => st.left_of(g.mul(k, reps[c])),
            Side::Right => st.right_of(g.mul(reps[c], k)),
        }
    };
    // distance from the target under single-letter steps
    let mut dist = vec![usize::MAX; idx];
    dist[target_coset] = 0;
    let mut queue = VecDeque::from([target_coset]);
    while let Some(c) = queue.pop_front() {
        for &k in &lv {
            let d = act(k, c);
            if dist[d] == usize::MAX {
                dist[d] = dist[c] + 1;
                queue.push_back(d);
            }
        }
    }
    let n = (0..idx).filter(|&c| empty[c] && dist[c] != usize::MAX).map(|c| dist[c]).min()?;
    match side {
        Side::Right => {
            // written order is application order: greedy from the start
            let dist_goal = {
                let mut dg = vec![usize::MAX; idx];
                let mut q = VecDeque::new();
                for c in 0..idx {
                    if empty[c] {
                        dg[c] = 0;
                        q.push_back(c);
                    }
                }
                let inv_lv: Vec<usize> = lv.iter().map(|&k| g.inv(k)).collect();
                while let Some(c) = q.pop_front() {
                    for &k in &inv_lv {
                        let d = act(k, c);
                        if dg[d] == usize::MAX {
                            dg[d] = dg[c] + 1;
                            q.push_back(d);
                        }
                    }
                }
                dg
            };
            let mut cur = target_coset;
            let mut word = Vec::with_capacity(n);
            for _ in 0..n {
                let (i, next) = lv
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| (i, act(k, cur)))
                    .find(|&(_, d)| dist_goal[d] != usize::MAX && dist_goal[d] + 1 == dist_goal[cur])
                    .expect("a shortest path continues");
                word.push(letters[i]);
                cur = next;
            }
            Some(SparseWitness { word, reached: cur })
        }
        Side::Left => {
            // the first written letter is applied last: greedy from the goal end
            let mut frontier: BTreeSet<usize> = (0..idx).filter(|&c| empty[c] && dist[c] == n).collect();
            let mut word = Vec::with_capacity(n);
            for step in 1..=n {
                let want = n - step;
                let (i, next) = lv
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| {
                        let back: BTreeSet<usize> =
                            frontier.iter().map(|&c| act(g.inv(k), c)).filter(|&c| dist[c] == want).collect();
                        (i, back)
                    })
                    .find(|(_, b)| !b.is_empty())
                    .expect("a shortest path exists");
                word.push(letters[i]);
                frontier = next;
            }
            let mut cur = target_coset;
            for l in word.iter().rev() {
                cur = act(g.signed(s.val(l.occ), l.sign), cur);
            }
            debug_assert!(empty[cur]);
            Some(SparseWitness { word, reached: cur })
        }
    }
}

/// Initial snapshot, move list and final snapshot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub initial: Vec<Entry>,
    pub moves: Vec<NielsenMove>,
    #[serde(rename = "final")]
    pub final_: Vec<Entry>,
}

impl Transcript {
    pub fn empty(s: &GenMultiset) -> Transcript {
        Transcript { initial: s.entries().to_vec(), moves: Vec::new(), final_: s.entries().to_vec() }
    }

    /// Replays the moves; on mismatch reports the index of the first failing move
    /// (or `moves.len()` when only the final snapshot differs).
    pub fn replay(&self, setting: &Arc<Setting>) -> std::result::Result<GenMultiset, (usize, Error)> {
        let mut ms = GenMultiset::from_entries(setting.clone(), self.initial.clone()).map_err(|e| (0, e))?;
        for (i, m) in self.moves.iter().enumerate() {
            ms.apply_in_place(m).map_err(|e| (i, e))?;
        }
        if ms.entries() != self.final_.as_slice() {
            return Err((self.moves.len(), Error::InvariantViolation("final snapshot differs from replay".into())));
        }
        Ok(ms)
    }

    pub fn verify_replay(&self, setting: &Arc<Setting>) -> bool {
        self.replay(setting).is_ok()
    }

    /// Appends `next`, which must start where `self` ends.
    pub fn then(mut self, next: Transcript) -> Result<Transcript> {
        if next.initial != self.final_ {
            return violation("transcripts do not chain");
        }
        self.moves.extend(next.moves);
        self.final_ = next.final_;
        Ok(self)
    }

    pub fn to_text(&self, g: &GroupTable) -> String {
        let mut out = String::new();
        let snapshot = |out: &mut String, tag: &str, es: &[Entry]| {
            let _ = writeln!(out, "{tag} {}", es.len());
            for e in es {
                let _ = writeln!(out, "{} {}", e.occ, g.name(e.value));
            }
        };
        snapshot(&mut out, "INITIAL", &self.initial);
        let _ = writeln!(out, "MOVES {}", self.moves.len());
        for m in &self.moves {
            let _ = writeln!(out, "{}", m.to_line());
        }
        snapshot(&mut out, "FINAL", &self.final_);
        out
    }

    pub fn from_text(text: &str, g: &GroupTable) -> Result<Transcript> {
        let lines: Vec<(usize, &str)> =
            text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty()).collect();
        let mut pos = 0;
        let header = |tag: &str, pos: &mut usize| -> Result<usize> {
            let (ln, l) = *lines.get(*pos).ok_or(Error::Parse { line: 0, msg: format!("missing {tag} header") })?;
            *pos += 1;
            let rest = l.strip_prefix(tag).ok_or(Error::Parse { line: ln, msg: format!("expected {tag}") })?;
            rest.trim().parse().map_err(|_| Error::Parse { line: ln, msg: "bad count".into() })
        };
        let read_snapshot = |tag: &str, pos: &mut usize| -> Result<Vec<Entry>> {
            let n = header(tag, pos)?;
            let mut es = Vec::with_capacity(n);
            for _ in 0..n {
                let (ln, l) = *lines.get(*pos).ok_or(Error::Parse { line: 0, msg: "truncated snapshot".into() })?;
                *pos += 1;
                let (occ, name) = l.split_once(' ').ok_or(Error::Parse { line: ln, msg: "expected '<occ> <element>'".into() })?;
                let occ = occ.parse().map_err(|_| Error::Parse { line: ln, msg: "bad occurrence id".into() })?;
                let value = g.parse_element(name).ok_or(Error::Parse { line: ln, msg: format!("unknown element {name:?}") })?;
                es.push(Entry { occ, value });
            }
            Ok(es)
        };
        let initial = read_snapshot("INITIAL", &mut pos)?;
        let (ln, l) = *lines.get(pos).ok_or(Error::Parse { line: 0, msg: "missing MOVES header".into() })?;
        pos += 1;
        let count: usize = l
            .strip_prefix("MOVES")
            .and_then(|r| r.trim().parse().ok())
            .ok_or(Error::Parse { line: ln, msg: "expected MOVES <count>".into() })?;
        let mut moves = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, l) = *lines.get(pos).ok_or(Error::Parse { line: 0, msg: "truncated move list".into() })?;
            pos += 1;
            moves.push(NielsenMove::parse_line(l).map_err(|msg| Error::Parse { line: ln, msg })?);
        }
        let final_ = read_snapshot("FINAL", &mut pos)?;
        Ok(Transcript { initial, moves, final_ })
    }
}

/// Mutable working multiset that records every move it makes.
#[derive(Clone, Debug)]
pub struct Recorder {
    ms: GenMultiset,
    initial: Vec<Entry>,
    moves: Vec<NielsenMove>,
}

impl Recorder {
    pub fn new(ms: &GenMultiset) -> Recorder {
        Recorder { ms: ms.clone(), initial: ms.entries().to_vec(), moves: Vec::new() }
    }

    pub fn ms(&self) -> &GenMultiset {
        &self.ms
    }

    pub fn setting(&self) -> Arc<Setting> {
        self.ms.setting().clone()
    }

    pub fn val(&self, occ: usize) -> usize {
        self.ms.val(occ)
    }

    pub fn moves_len(&self) -> usize {
        self.moves.len()
    }

    pub fn apply(&mut self, m: NielsenMove) -> Result<()> {
        self.ms.apply_in_place(&m)?;
        self.moves.push(m);
        Ok(())
    }

    pub fn append(&mut self, t: &Transcript) -> Result<()> {
        if t.initial != self.ms.entries() {
            return violation("appended transcript does not start at the current multiset");
        }
        for m in &t.moves {
            self.apply(*m)?;
        }
        Ok(())
    }

    pub fn inv(&mut self, t: usize) -> Result<()> {
        self.apply(NielsenMove::Invert { target: t })
    }

    /// `t -> by^sign * t`
    pub fn lmul(&mut self, t: usize, by: usize, sign: i8) -> Result<()> {
        if t == by {
            return Err(Error::InvalidMove(format!("occurrence {t} cannot act on itself")));
        }
        if sign < 0 {
            self.inv(by)?;
            self.apply(NielsenMove::LeftMul { target: t, by })?;
            self.inv(by)
        } else {
            self.apply(NielsenMove::LeftMul { target: t, by })
        }
    }

    /// `t -> t * by^sign`
    pub fn rmul(&mut self, t: usize, by: usize, sign: i8) -> Result<()> {
        if t == by {
            return Err(Error::InvalidMove(format!("occurrence {t} cannot act on itself")));
        }
        if sign < 0 {
            self.inv(by)?;
            self.apply(NielsenMove::RightMul { target: t, by })?;
            self.inv(by)
        } else {
            self.apply(NielsenMove::RightMul { target: t, by })
        }
    }

    /// `t -> w * t`
    pub fn left_word(&mut self, t: usize, word: &[Letter]) -> Result<()> {
        for l in word.iter().rev() {
            self.lmul(t, l.occ, l.sign)?;
        }
        Ok(())
    }

    /// `t -> t * w`
    pub fn right_word(&mut self, t: usize, word: &[Letter]) -> Result<()> {
        for l in word {
            self.rmul(t, l.occ, l.sign)?;
        }
        Ok(())
    }

    /// `t -> by^n * t` (negative `n` uses the inverse).
    pub fn left_power(&mut self, t: usize, by: usize, n: i64) -> Result<()> {
        let sign = if n < 0 { -1 } else { 1 };
        self.left_word(t, &vec![Letter { occ: by, sign }; n.unsigned_abs() as usize])
    }

    /// `t -> t * by^n`
    pub fn right_power(&mut self, t: usize, by: usize, n: i64) -> Result<()> {
        let sign = if n < 0 { -1 } else { 1 };
        self.right_word(t, &vec![Letter { occ: by, sign }; n.unsigned_abs() as usize])
    }

    pub fn finish(self) -> Transcript {
        let mut moves: Vec<NielsenMove> = Vec::with_capacity(self.moves.len());
        for m in self.moves {
            if let (NielsenMove::Invert { target: a }, Some(NielsenMove::Invert { target: b })) = (m, moves.last()) {
                if a == *b {
                    moves.pop();
                    continue;
                }
            }
            moves.push(m);
        }
        Transcript { initial: self.initial, moves, final_: self.ms.entries().to_vec() }
    }
}

fn check_sizes(s: &GenMultiset) -> Result<()> {
    if s.len() > s.setting().index() {
        return precondition(format!("multiset size {} exceeds index {}", s.len(), s.setting().index()));
    }
    if !s.generates() {
        return precondition("multiset does not generate the group");
    }
    Ok(())
}

/// Alternating left and right cleaning until no two occurrences outside `H` share a row or column.
pub fn left_right_clean(s: &GenMultiset) -> Result<Transcript> {
    check_sizes(s)?;
    let mut rec = Recorder::new(s);
    clean_rec(&mut rec)?;
    Ok(rec.finish())
}

pub(crate) fn clean_rec(rec: &mut Recorder) -> Result<()> {
    loop {
        let mut changed = false;
        for side in [Side::Left, Side::Right] {
            while let Some((a, b)) = shared_pair(rec.ms(), side) {
                // b -> a^{-1} b on the left, b -> b a^{-1} on the right
                match side {
                    Side::Left => rec.lmul(b, a, -1)?,
                    Side::Right => rec.rmul(b, a, -1)?,
                }
                changed = true;
            }
        }
        if !changed {
            return Ok(());
        }
    }
}

fn shared_pair(s: &GenMultiset, side: Side) -> Option<(usize, usize)> {
    let outside = s.outside_occs();
    let st = s.setting();
    for (i, &a) in outside.iter().enumerate() {
        let ca = st.coset_of(s.val(a), side);
        if let Some(&b) = outside[i + 1..].iter().find(|&&b| st.coset_of(s.val(b), side) == ca) {
            return Some((a, b));
        }
    }
    None
}

fn require_clean_for_extraction(s: &GenMultiset) -> Result<()> {
    if !s.is_left_right_clean() {
        return not_applicable("multiset is not left-right clean");
    }
    if s.count_in_h() < 2 {
        return not_applicable("fewer than two occurrences in H");
    }
    if s.len() > s.setting().index() {
        return not_applicable("multiset larger than the index");
    }
    Ok(())
}

fn check_extracted(before: usize, rec: &Recorder, what: &str) -> Result<()> {
    let ms = rec.ms();
    if ms.count_in_h() + 1 != before || !ms.is_left_right_clean() {
        return violation(format!("{what} did not produce a clean extraction"));
    }
    Ok(())
}

/// Occurrences outside `H` whose column and row both have sparse `<S ∩ H>`-orbits.
pub fn two_sided_sparse(s: &GenMultiset) -> Vec<usize> {
    let st = s.setting();
    s.outside_occs()
        .into_iter()
        .filter(|&o| {
            let x = s.val(o);
            sparse_orbit(s, st.left_of(x), Side::Left).is_some() && sparse_orbit(s, st.right_of(x), Side::Right).is_some()
        })
        .collect()
}

pub fn extraction_lemma(s: &GenMultiset) -> Result<Transcript> {
    let mut rec = Recorder::new(s);
    extraction_lemma_rec(&mut rec)?;
    Ok(rec.finish())
}

/// Extracts one element of `S ∩ H` using an occurrence with two-sided sparse orbits.
pub(crate) fn extraction_lemma_rec(rec: &mut Recorder) -> Result<()> {
    require_clean_for_extraction(rec.ms())?;
    let candidates = two_sided_sparse(rec.ms());
    let Some(&g1) = candidates.first() else {
        return not_applicable("no occurrence has sparse orbits on both sides");
    };
    extraction_lemma_at(rec, g1)
}

pub(crate) fn extraction_lemma_at(rec: &mut Recorder, g1: usize) -> Result<()> {
    require_clean_for_extraction(rec.ms())?;
    let before = rec.ms().count_in_h();
    let st = rec.setting();
    let g = &st.group;

    // row stage: shortest right word reaching an empty row
    let x = rec.val(g1);
    let right = sparse_orbit(rec.ms(), st.right_of(x), Side::Right)
        .ok_or_else(|| Error::NotApplicable("row orbit is not sparse".into()))?;
    let n = right.word.len();
    if n == 0 {
        return violation("occupied row reported empty");
    }
    let last = right.word[n - 1];
    if n > 1 {
        let prefix = &right.word[..n - 1];
        let w = rec.ms().word_value(prefix);
        let row = st.right_of(g.mul(x, w));
        let gj = *rec
            .ms()
            .occupants(row, Side::Right)
            .iter()
            .find(|&&o| o != g1)
            .ok_or_else(|| Error::InvariantViolation("minimal row word stopped at an empty row".into()))?;
        let inv_prefix: Vec<Letter> = prefix.iter().rev().map(|l| Letter { occ: l.occ, sign: -l.sign }).collect();
        rec.right_word(g1, prefix)?;
        rec.right_word(gj, &inv_prefix)?;
    }

    // column stage: shortest left word reaching an empty column
    let x = rec.val(g1);
    let left = sparse_orbit(rec.ms(), st.left_of(x), Side::Left)
        .ok_or_else(|| Error::InvariantViolation("column orbit lost sparseness after row swap".into()))?;
    let m = left.word.len();
    if m == 0 {
        return violation("occupied column reported empty");
    }
    let first = left.word[0];
    if m > 1 {
        let suffix = &left.word[1..];
        let v = rec.ms().word_value(suffix);
        let col = st.left_of(g.mul(v, x));
        let gk = *rec
            .ms()
            .occupants(col, Side::Left)
            .iter()
            .find(|&&o| o != g1)
            .ok_or_else(|| Error::InvariantViolation("minimal column word stopped at an empty column".into()))?;
        let inv_suffix: Vec<Letter> = suffix.iter().rev().map(|l| Letter { occ: l.occ, sign: -l.sign }).collect();
        rec.left_word(g1, suffix)?;
        rec.left_word(gk, &inv_suffix)?;
    }

    let (delta, eps) = (first.sign, last.sign);
    if first.occ != last.occ {
        // h_j -> h_j^δ g1 h_i^ε lies in an empty row and column
        let hj = first.occ;
        if delta < 0 {
            rec.inv(hj)?;
        }
        rec.rmul(hj, g1, 1)?;
        rec.rmul(hj, last.occ, eps)?;
    } else {
        let h1 = first.occ;
        let h2 = *rec
            .ms()
            .in_h_occs()
            .iter()
            .find(|&&o| o != h1)
            .ok_or_else(|| Error::InvariantViolation("second element of S ∩ H vanished".into()))?;
        let y = g.mul(rec.val(h2), rec.val(g1));
        let col = st.left_of(y);
        let occupants = rec.ms().occupants(col, Side::Left);
        match occupants.first() {
            None => {
                rec.rmul(h2, g1, 1)?;
                rec.rmul(h2, h1, eps)?;
            }
            Some(&r) if r == g1 => {
                rec.rmul(h2, g1, 1)?;
                rec.rmul(h2, h1, eps)?;
                rec.lmul(g1, h1, delta)?;
            }
            Some(&r) => {
                rec.lmul(r, h2, -1)?;
                rec.lmul(r, h1, delta)?;
                rec.rmul(h2, g1, 1)?;
                rec.rmul(h2, h1, eps)?;
            }
        }
    }
    check_extracted(before, rec, "extraction lemma")
}

pub fn diagonal_power_extract(s: &GenMultiset) -> Result<Transcript> {
    let mut rec = Recorder::new(s);
    diagonal_power_rec(&mut rec)?;
    Ok(rec.finish())
}

/// Finds the first `(occurrence, n)` with `s^n` diagonal to the multiset, `2 <= n < e`.
pub fn find_diagonal_power(s: &GenMultiset) -> Option<(usize, i64)> {
    let st = s.setting();
    let g = &st.group;
    for o in s.occs_sorted() {
        let x = s.val(o);
        if st.in_h(x) {
            continue;
        }
        let e = st.h_exponent(x);
        for n in 2..e {
            if s.is_diagonal_to(g.pow(x, n as i64)) {
                return Some((o, n as i64));
            }
        }
    }
    None
}

impl GenMultiset {
    pub fn occs_sorted(&self) -> Vec<usize> {
        let mut v = self.occs();
        v.sort_unstable();
        v
    }
}

pub(crate) fn diagonal_power_rec(rec: &mut Recorder) -> Result<()> {
    require_clean_for_extraction(rec.ms())?;
    let Some((s, n)) = find_diagonal_power(rec.ms()) else {
        return not_applicable("no power of an element is diagonal to the multiset");
    };
    diagonal_power_at(rec, s, n)
}

/// Extraction through a known diagonal power `s^n`.
pub(crate) fn diagonal_power_at(rec: &mut Recorder, s: usize, n: i64) -> Result<()> {
    require_clean_for_extraction(rec.ms())?;
    let st = rec.setting();
    let g = &st.group;
    let sn = g.pow(rec.val(s), n);
    if !rec.ms().is_diagonal_to(sn) {
        return not_applicable("the given power is not diagonal to the multiset");
    }
    let before = rec.ms().count_in_h();
    let h = rec.ms().in_h_occs()[0];
    let hv = rec.val(h);

    let col = st.left_of(g.mul(hv, sn));
    match rec.ms().occupants(col, Side::Left).first().copied() {
        None => rec.right_power(h, s, n)?,
        Some(gc) if gc != s => {
            rec.lmul(gc, h, -1)?;
            rec.right_power(h, s, n)?;
        }
        Some(_) => {
            let row = st.right_of(g.mul(sn, hv));
            match rec.ms().occupants(row, Side::Right).first().copied() {
                None => rec.left_power(h, s, n)?,
                Some(gr) if gr != s => {
                    rec.rmul(gr, h, -1)?;
                    rec.left_power(h, s, n)?;
                }
                Some(_) => return extraction_lemma_at(rec, s),
            }
        }
    }
    check_extracted(before, rec, "diagonal power extraction")
}

/// Completes a diagonal multiset to a left-right transversal, board by board.
pub fn extend_to_transversal(s: &GenMultiset) -> Result<Vec<usize>> {
    if !s.is_diagonal() {
        return precondition("multiset is not diagonal");
    }
    let st = s.setting();
    let atlas = &st.atlas;
    let mut used_col = vec![false; atlas.index()];
    let mut used_row = vec![false; atlas.index()];
    for e in s.entries() {
        used_col[st.left_of(e.value)] = true;
        used_row[st.right_of(e.value)] = true;
    }
    let mut out = s.values();
    for b in &atlas.boards {
        let cols: Vec<usize> = (0..b.dim()).filter(|&p| !used_col[b.columns[p]]).collect();
        let rows: Vec<usize> = (0..b.dim()).filter(|&p| !used_row[b.rows[p]]).collect();
        if cols.len() != rows.len() {
            return violation("board has unequal numbers of free rows and columns");
        }
        for (&c, &r) in cols.iter().zip(&rows) {
            out.push(b.box_members(r, c)[0]);
        }
    }
    Ok(out)
}

/// Breadth-first search over Nielsen moves for a shortest route to a diagonal multiset.
pub fn bfs_oracle(s: &GenMultiset, depth_cap: usize, size_cap: usize) -> Result<Option<Transcript>> {
    bfs_oracle_capped(s, depth_cap, size_cap, DEFAULT_BFS_STATE_CAP)
}

pub fn bfs_oracle_capped(s: &GenMultiset, depth_cap: usize, size_cap: usize, state_cap: usize) -> Result<Option<Transcript>> {
    let g = s.group();
    if g.order() > size_cap {
        return Err(Error::Resource { what: "oracle group order".into(), limit: size_cap });
    }
    if s.is_diagonal() {
        return Ok(Some(Transcript::empty(s)));
    }
    let occs = s.occs();
    let mut moves = Vec::new();
    for (i, &t) in occs.iter().enumerate() {
        moves.push((i, NielsenMove::Invert { target: t }));
        for &b in &occs {
            if b != t {
                moves.push((i, NielsenMove::LeftMul { target: t, by: b }));
                moves.push((i, NielsenMove::RightMul { target: t, by: b }));
            }
        }
    }
    let pos_of: HashMap<usize, usize> = occs.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let mut states: Vec<Vec<usize>> = vec![s.values()];
    let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX)];
    let mut seen: HashSet<Vec<usize>> = HashSet::from([s.sorted_values()]);
    let st = s.setting();
    let is_diag = |v: &[usize]| {
        let mut l = vec![false; st.index()];
        let mut r = vec![false; st.index()];
        v.iter().all(|&x| {
            let (a, b) = (st.left_of(x), st.right_of(x));
            let ok = !l[a] && !r[b];
            l[a] = true;
            r[b] = true;
            ok
        })
    };
    let mut layer_start = 0;
    for _depth in 0..depth_cap {
        let layer_end = states.len();
        if layer_start == layer_end {
            break;
        }
        for si in layer_start..layer_end {
            for (mi, (pi, m)) in moves.iter().enumerate() {
                let cur = &states[si];
                let t = cur[*pi];
                let nv = match *m {
                    NielsenMove::Invert { .. } => g.inv(t),
                    NielsenMove::LeftMul { by, .. } => g.mul(cur[pos_of[&by]], t),
                    NielsenMove::RightMul { by, .. } => g.mul(t, cur[pos_of[&by]]),
                };
                let mut next = cur.clone();
                next[*pi] = nv;
                let mut key = next.clone();
                key.sort_unstable();
                if !seen.insert(key) {
                    continue;
                }
                states.push(next);
                parent.push((si, mi));
                if states.len() > state_cap {
                    return Err(Error::Resource { what: "oracle states".into(), limit: state_cap });
                }
                if is_diag(states.last().expect("just pushed")) {
                    let mut path = Vec::new();
                    let mut cur = states.len() - 1;
                    while parent[cur].0 != usize::MAX {
                        path.push(moves[parent[cur].1].1);
                        cur = parent[cur].0;
                    }
                    path.reverse();
                    let final_ = occs.iter().zip(states.last().expect("just pushed")).map(|(&occ, &value)| Entry { occ, value }).collect();
                    return Ok(Some(Transcript { initial: s.entries().to_vec(), moves: path, final_ }));
                }
            }
        }
        layer_start = layer_end;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coset_geometry::is_left_right_transversal;
    use crate::families::family;
    use crate::group_core::subgroup_generate;

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

    #[test]
    fn moves() {
        let st = setting("symmetric:3", &["(1 2)"]);
        let s = ms(&st, &["(1 2)", "(1 2 3)"]);
        let once = s.apply_move(&NielsenMove::Invert { target: 1 }).unwrap();
        let twice = once.apply_move(&NielsenMove::Invert { target: 1 }).unwrap();
        assert_eq!(twice.values(), s.values());
        let l = s.apply_move(&NielsenMove::LeftMul { target: 1, by: 0 }).unwrap();
        assert_eq!(l.val(1), st.group.mul(s.val(0), s.val(1)));
        assert!(matches!(s.apply_move(&NielsenMove::LeftMul { target: 1, by: 1 }), Err(Error::InvalidMove(_))));
        assert!(matches!(s.apply_move(&NielsenMove::Invert { target: 7 }), Err(Error::UnknownOccurrence(7))));
    }

    #[test]
    fn cleaning_examples() {
        let st = setting("symmetric:3", &["(1 2)"]);
        let s = ms(&st, &["(1 2)", "(1 3)", "(2 3)"]);
        assert!(left_right_clean(&s).unwrap().moves.is_empty());

        let s = ms(&st, &["(1 3)", "(1 2 3)", "()"]);
        let t = left_right_clean(&s).unwrap();
        assert!(!t.moves.is_empty());
        let fin = t.replay(&st).unwrap();
        assert_eq!(fin.count_in_h(), 2);
        assert!(fin.is_left_right_clean());
        assert!(fin.generates());

        let st = setting("symmetric:3", &["(1 2)", "(1 2 3)"]);
        let s = ms(&st, &["(1 2)"]);
        assert!(left_right_clean(&s).is_err());
    }

    #[test]
    fn sparse_orbit_examples() {
        let st = setting("symmetric:3", &["(1 2)"]);
        let s = ms(&st, &["(1 2)", "(1 2)", "(1 3)"]);
        let x = st.group.parse_element("(1 3)").unwrap();
        let w = sparse_orbit(&s, st.left_of(x), Side::Left).unwrap();
        assert_eq!(w.word.len(), 1);
        assert_eq!(w.word[0], Letter { occ: 0, sign: 1 });
        let y = st.group.parse_element("(2 3)").unwrap();
        assert_eq!(w.reached, st.left_of(y));
        // trivial <S ∩ H>: sparse iff the coset itself is empty
        let s = ms(&st, &["()", "(1 3)"]);
        assert!(sparse_orbit(&s, st.left_of(x), Side::Left).is_none());
        let w = sparse_orbit(&s, st.left_of(y), Side::Left).unwrap();
        assert!(w.word.is_empty());
    }

    /// Independent check: enumerate every word up to the found length.
    #[test]
    fn sparse_orbit_words_are_shortest_and_least() {
        let st = setting("symmetric:4", &["(1 2)", "(3 4)"]);
        let g = &st.group;
        let s = ms(&st, &["(1 2)", "(3 4)", "(1 3)", "(1 2)(3 4)"]);
        for side in [Side::Left, Side::Right] {
            for c in 0..st.index() {
                let got = sparse_orbit(&s, c, side);
                let letters = s.letters_in_h();
                let rep = st.atlas.cosets.cosets(side)[c].rep;
                let occupied = s.occupancy(side);
                let lands = |word: &[Letter]| {
                    let w = s.word_value(word);
                    let x = match side {
                        Side::Left => g.mul(w, rep),
                        Side::Right => g.mul(rep, w),
                    };
                    occupied[st.coset_of(x, side)] == 0
                };
                let mut expected = None;
                'len: for len in 0..=4 {
                    let mut words: Vec<Vec<Letter>> = vec![vec![]];
                    for _ in 0..len {
                        words = words.into_iter().flat_map(|w| letters.iter().map(move |&l| [w.clone(), vec![l]].concat())).collect();
                    }
                    words.sort_by_key(|w| w.iter().map(|l| (l.occ, -l.sign)).collect::<Vec<_>>());
                    for w in words {
                        if lands(&w) {
                            expected = Some(w);
                            break 'len;
                        }
                    }
                }
                assert_eq!(got.map(|w| w.word), expected, "{side:?} coset {c}");
            }
        }
    }

    #[test]
    fn extraction_example() {
        let st = setting("symmetric:3", &["(1 2)"]);
        let s = ms(&st, &["(1 2)", "(1 2)", "(1 3)"]);
        let t = extraction_lemma(&s).unwrap();
        let fin = t.replay(&st).unwrap();
        assert_eq!(fin.count_in_h(), 1);
        assert!(fin.is_diagonal());
        assert!(fin.generates());
        let ext = extend_to_transversal(&fin).unwrap();
        assert!(is_left_right_transversal(&st.atlas.cosets, &ext));

        let s = ms(&st, &["(1 2)", "(1 3)", "(2 3)"]);
        assert!(extraction_lemma(&s).unwrap_err().is_not_applicable());
    }

    #[test]
    fn diagonal_power_examples() {
        // D5 with H = <s>, S = {s, s, r}
        let st = setting("dihedral:5", &["(2 5)(3 4)"]);
        let s = ms(&st, &["(2 5)(3 4)", "(2 5)(3 4)", "(1 2 3 4 5)"]);
        let (o, n) = find_diagonal_power(&s).unwrap();
        assert_eq!((o, n), (2, 2));
        let r2 = st.group.pow(s.val(2), 2);
        assert_ne!(st.atlas.board_of(r2), st.atlas.board_of(s.val(2)));
        let fin = diagonal_power_extract(&s).unwrap().replay(&st).unwrap();
        assert_eq!(fin.count_in_h(), 1);
        assert!(fin.is_left_right_clean());

        // D4 with H = <s>, S = {s, s, rs}: rs has H-exponent 2
        let st = setting("dihedral:4", &["(2 4)"]);
        let g = &st.group;
        let r = g.parse_element("(1 2 3 4)").unwrap();
        let sv = g.parse_element("(2 4)").unwrap();
        let s = GenMultiset::new(st.clone(), &[sv, sv, g.mul(r, sv)]).unwrap();
        assert!(find_diagonal_power(&s).is_none());
        assert!(diagonal_power_extract(&s).unwrap_err().is_not_applicable());
    }

    #[test]
    fn completion() {
        let st = setting("symmetric:3", &["(1 2)"]);
        let s = ms(&st, &["(1 2)", "(1 3)"]);
        let t = extend_to_transversal(&s).unwrap();
        let names: BTreeSet<String> = t.iter().map(|&x| st.group.name(x)).collect();
        assert_eq!(names, ["(1 2)", "(1 3)", "(2 3)"].iter().map(|s| s.to_string()).collect());
        let s = ms(&st, &["()"]);
        assert_eq!(extend_to_transversal(&s).unwrap().len(), 3);
        let s = ms(&st, &["(1 2)", "()"]);
        assert!(extend_to_transversal(&s).is_err());
    }

    #[test]
    fn oracle_examples() {
        let st = setting("symmetric:3", &["(1 2)"]);
        let s = ms(&st, &["(1 2)", "(1 2)", "(1 3)"]);
        let t = bfs_oracle(&s, 8, 24).unwrap().unwrap();
        assert!(t.moves.len() >= 2);
        assert!(t.replay(&st).unwrap().is_diagonal());
        assert!(bfs_oracle(&s, 0, 24).unwrap().is_none());
        let d = ms(&st, &["(1 3)", "(2 3)"]);
        assert!(bfs_oracle(&d, 3, 24).unwrap().unwrap().moves.is_empty());
        let big = setting("alternating:5", &["(1 2 3)"]);
        let b = GenMultiset::new(big.clone(), &[1, 2]).unwrap();
        assert!(bfs_oracle(&b, 3, 24).is_err());
    }

    #[test]
    fn transcript_text_round_trip() {
        let st = setting("symmetric:3", &["(1 2)"]);
        let s = ms(&st, &["(1 2)", "(1 2)", "(1 3)"]);
        let t = extraction_lemma(&s).unwrap();
        let text = t.to_text(&st.group);
        assert_eq!(Transcript::from_text(&text, &st.group).unwrap(), t);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<Transcript>(&json).unwrap(), t);
    }
}
