//! Configurations of occurrences inside one chessboard, the graph of shared
//! rows and columns, L-spins, normal forms and solvability of board pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coset_geometry::escape;
use crate::error::{not_applicable, precondition, violation, Error, Result};
use crate::nielsen_engine::{Entry, GenMultiset, NielsenMove, Recorder, Setting, Transcript};

/// Occurrences of one chessboard laid out on chosen rows (right cosets) and columns (left cosets).
#[derive(Clone, Debug)]
pub struct Configuration {
    setting: Arc<Setting>,
    board: usize,
    row_labels: Vec<usize>,
    col_labels: Vec<usize>,
    entries: Vec<Entry>,
    folded: BTreeSet<usize>,
}

impl Configuration {
    /// Configuration on the occupied rows and columns, in board order.
    pub fn new(setting: Arc<Setting>, board: usize, entries: Vec<Entry>) -> Result<Configuration> {
        Self::with_labels(setting, board, entries, &[], &[])
    }

    /// Configuration on the occupied rows and columns plus the requested ones, in board order.
    pub fn with_labels(
        setting: Arc<Setting>,
        board: usize,
        entries: Vec<Entry>,
        rows: &[usize],
        cols: &[usize],
    ) -> Result<Configuration> {
        let atlas = &setting.atlas;
        if board >= atlas.boards.len() {
            return precondition(format!("board {board} does not exist"));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= atlas.index() || atlas.board_of_right[r] != board) {
            return precondition(format!("right coset {r} is not a row of board {board}"));
        }
        if let Some(&l) = cols.iter().find(|&&l| l >= atlas.index() || atlas.board_of_left[l] != board) {
            return precondition(format!("left coset {l} is not a column of board {board}"));
        }
        if let Some(e) = entries.iter().find(|e| e.value >= setting.group.order() || atlas.board_of(e.value) != board) {
            return precondition(format!("occurrence {} does not lie in board {board}", e.occ));
        }
        let mut row_set: BTreeSet<usize> = rows.iter().copied().collect();
        let mut col_set: BTreeSet<usize> = cols.iter().copied().collect();
        for e in &entries {
            row_set.insert(atlas.right_of(e.value));
            col_set.insert(atlas.left_of(e.value));
        }
        let mut row_labels: Vec<usize> = row_set.into_iter().collect();
        let mut col_labels: Vec<usize> = col_set.into_iter().collect();
        row_labels.sort_by_key(|&r| atlas.row_pos[r]);
        col_labels.sort_by_key(|&l| atlas.col_pos[l]);
        Self::build(setting, board, row_labels, col_labels, entries, BTreeSet::new())
    }

    fn build(
        setting: Arc<Setting>,
        board: usize,
        row_labels: Vec<usize>,
        col_labels: Vec<usize>,
        mut entries: Vec<Entry>,
        folded: BTreeSet<usize>,
    ) -> Result<Configuration> {
        let ids: BTreeSet<usize> = entries.iter().map(|e| e.occ).collect();
        if ids.len() != entries.len() {
            return precondition("occurrence ids must be unique");
        }
        entries.sort_by_key(|e| e.occ);
        let c = Configuration { setting, board, row_labels, col_labels, entries, folded };
        for e in &c.entries {
            c.locate(e.value)?;
        }
        Ok(c)
    }

    fn with_entries(&self, entries: Vec<Entry>) -> Result<Configuration> {
        Self::build(
            self.setting.clone(),
            self.board,
            self.row_labels.clone(),
            self.col_labels.clone(),
            entries,
            self.folded.clone(),
        )
    }

    pub fn setting(&self) -> &Arc<Setting> {
        &self.setting
    }

    pub fn board(&self) -> usize {
        self.board
    }

    pub fn row_labels(&self) -> &[usize] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[usize] {
        &self.col_labels
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

    pub fn occs(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.occ).collect()
    }

    /// Occurrences that entered through inversion of the inverse board.
    pub fn folded(&self) -> &BTreeSet<usize> {
        &self.folded
    }

    pub fn value(&self, occ: usize) -> Result<usize> {
        self.entries
            .iter()
            .find(|e| e.occ == occ)
            .map(|e| e.value)
            .ok_or(Error::UnknownOccurrence(occ))
    }

    fn locate(&self, value: usize) -> Result<(usize, usize)> {
        let atlas = &self.setting.atlas;
        let r = atlas.right_of(value);
        let l = atlas.left_of(value);
        match (self.row_labels.iter().position(|&x| x == r), self.col_labels.iter().position(|&x| x == l)) {
            (Some(row), Some(col)) => Ok((row, col)),
            _ => violation(format!("element {value} lies outside the configuration labels")),
        }
    }

    /// `(row, col)` of an occurrence within the configuration.
    pub fn position(&self, occ: usize) -> Result<(usize, usize)> {
        self.locate(self.value(occ)?)
    }

    /// Occupants indexed `[row][col]`, each sorted.
    pub fn occupancy(&self) -> Vec<Vec<Vec<usize>>> {
        let mut out = vec![vec![Vec::new(); self.col_labels.len()]; self.row_labels.len()];
        for e in &self.entries {
            let (r, c) = self.locate(e.value).expect("entries lie on the labels");
            out[r][c].push(e.occ);
        }
        out
    }

    pub fn row_counts(&self) -> Vec<usize> {
        self.occupancy().iter().map(|row| row.iter().map(Vec::len).sum()).collect()
    }

    pub fn col_counts(&self) -> Vec<usize> {
        let occ = self.occupancy();
        (0..self.col_labels.len()).map(|c| occ.iter().map(|row| row[c].len()).sum()).collect()
    }

    /// True when every labelled row and column holds exactly two occurrences.
    pub fn two_per_line(&self) -> bool {
        self.row_counts().iter().chain(self.col_counts().iter()).all(|&n| n == 2)
    }

    /// True when every labelled row and column holds exactly one occurrence.
    pub fn one_per_line(&self) -> bool {
        self.row_counts().iter().chain(self.col_counts().iter()).all(|&n| n == 1)
    }

    pub fn multiset(&self) -> GenMultiset {
        GenMultiset::from_entries(self.setting.clone(), self.entries.clone()).expect("configuration entries are valid")
    }
}

/// The part of `s` lying in one board.
pub fn section(s: &GenMultiset, board: usize) -> Result<Configuration> {
    let setting = s.setting().clone();
    let entries = s.entries().iter().copied().filter(|e| setting.atlas.board_of(e.value) == board).collect();
    Configuration::new(setting, board, entries)
}

/// Moves the occurrences of the inverse board into `sg`'s board by inverting each of them.
pub fn fold_inverse(sg: &Configuration, sginv: &Configuration) -> Result<(Configuration, Vec<NielsenMove>)> {
    if !Arc::ptr_eq(&sg.setting, &sginv.setting) {
        return precondition("configurations belong to different settings");
    }
    let atlas = &sg.setting.atlas;
    let b = &atlas.boards[sg.board];
    if b.self_inverse || b.inverse_board != sginv.board {
        return precondition(format!("boards {} and {} are not a distinct inverse pair", sg.board, sginv.board));
    }
    let g = &sg.setting.group;
    let mut entries = sg.entries.clone();
    let mut folded = sg.folded.clone();
    let mut moves = Vec::new();
    for e in &sginv.entries {
        entries.push(Entry { occ: e.occ, value: g.inv(e.value) });
        folded.insert(e.occ);
        moves.push(NielsenMove::Invert { target: e.occ });
    }
    let mut rows: BTreeSet<usize> = sg.row_labels.iter().copied().collect();
    let mut cols: BTreeSet<usize> = sg.col_labels.iter().copied().collect();
    rows.extend(sginv.col_labels.iter().map(|&l| atlas.left_to_right[l]));
    cols.extend(sginv.row_labels.iter().map(|&r| atlas.right_to_left[r]));
    let mut rows: Vec<usize> = rows.into_iter().collect();
    let mut cols: Vec<usize> = cols.into_iter().collect();
    rows.sort_by_key(|&r| atlas.row_pos[r]);
    cols.sort_by_key(|&l| atlas.col_pos[l]);
    let out = Configuration::build(sg.setting.clone(), sg.board, rows, cols, entries, folded)?;
    Ok((out, moves))
}

/// One connected component of the graph of shared rows and columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigComponent {
    pub occs: Vec<usize>,
    /// Right coset ids of the component's rows.
    pub rows: Vec<usize>,
    /// Left coset ids of the component's columns.
    pub cols: Vec<usize>,
}

impl ConfigComponent {
    pub fn n(&self) -> usize {
        self.occs.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows.len() == self.cols.len() && self.occs.len() == 2 * self.rows.len()
    }
}

/// Occurrences joined by an edge for every shared row (horizontal) and every shared column (vertical).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigGraph {
    pub vertices: Vec<usize>,
    pub horizontal_edges: Vec<(usize, usize)>,
    pub vertical_edges: Vec<(usize, usize)>,
    pub components: Vec<ConfigComponent>,
}

impl ConfigGraph {
    /// True when every vertex meets exactly one horizontal and one vertical edge.
    pub fn is_union_of_even_cycles(&self) -> bool {
        let mut h: BTreeMap<usize, usize> = BTreeMap::new();
        let mut v: BTreeMap<usize, usize> = BTreeMap::new();
        for &(a, b) in &self.horizontal_edges {
            *h.entry(a).or_default() += 1;
            *h.entry(b).or_default() += 1;
        }
        for &(a, b) in &self.vertical_edges {
            *v.entry(a).or_default() += 1;
            *v.entry(b).or_default() += 1;
        }
        self.vertices.iter().all(|x| h.get(x) == Some(&1) && v.get(x) == Some(&1))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph sigma {\n");
        for v in &self.vertices {
            let _ = writeln!(out, "  v{v} [label=\"{v}\"];");
        }
        for &(a, b) in &self.horizontal_edges {
            let _ = writeln!(out, "  v{a} -- v{b} [style=solid];");
        }
        for &(a, b) in &self.vertical_edges {
            let _ = writeln!(out, "  v{a} -- v{b} [style=dashed];");
        }
        out.push_str("}\n");
        out
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

pub fn sigma_graph(c: &Configuration) -> ConfigGraph {
    let atlas = &c.setting.atlas;
    let occs = c.occs();
    let mut by_row: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut by_col: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, e) in c.entries.iter().enumerate() {
        by_row.entry(atlas.right_of(e.value)).or_default().push(i);
        by_col.entry(atlas.left_of(e.value)).or_default().push(i);
    }
    let mut parent: Vec<usize> = (0..occs.len()).collect();
    let mut edges = |groups: &BTreeMap<usize, Vec<usize>>| {
        let mut out = Vec::new();
        for members in groups.values() {
            for (k, &i) in members.iter().enumerate() {
                for &j in &members[k + 1..] {
                    out.push((occs[i], occs[j]));
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        out.sort_unstable();
        out
    };
    let horizontal_edges = edges(&by_row);
    let vertical_edges = edges(&by_col);
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..occs.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut components: Vec<ConfigComponent> = groups
        .into_values()
        .map(|idx| {
            let rows: BTreeSet<usize> = idx.iter().map(|&i| atlas.right_of(c.entries[i].value)).collect();
            let cols: BTreeSet<usize> = idx.iter().map(|&i| atlas.left_of(c.entries[i].value)).collect();
            ConfigComponent {
                occs: idx.iter().map(|&i| occs[i]).collect(),
                rows: rows.into_iter().collect(),
                cols: cols.into_iter().collect(),
            }
        })
        .collect();
    components.sort_by_key(|k| k.occs[0]);
    ConfigGraph { vertices: occs, horizontal_edges, vertical_edges, components }
}

/// Which occurrence of an L-spin triple receives the value `a b^-1 c`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Replace {
    A,
    B,
    #[default]
    C,
}

fn check_spin(setting: &Setting, va: usize, vb: usize, vc: usize, ids: [usize; 3]) -> Result<()> {
    if ids[0] == ids[1] || ids[1] == ids[2] || ids[0] == ids[2] {
        return precondition("L-spin needs three distinct occurrences");
    }
    if setting.right_of(va) != setting.right_of(vb) {
        return precondition(format!("occurrences {} and {} do not share a row", ids[0], ids[1]));
    }
    if setting.left_of(vb) != setting.left_of(vc) {
        return precondition(format!("occurrences {} and {} do not share a column", ids[1], ids[2]));
    }
    Ok(())
}

pub(crate) fn spin_rec(rec: &mut Recorder, a: usize, b: usize, c: usize, replace: Replace) -> Result<()> {
    let setting = rec.setting();
    let (va, vb, vc) = (rec.ms().value(a)?, rec.ms().value(b)?, rec.ms().value(c)?);
    check_spin(&setting, va, vb, vc, [a, b, c])?;
    let g = &setting.group;
    let want = g.product(&[va, g.inv(vb), vc]);
    let target = match replace {
        Replace::A => {
            rec.rmul(a, b, -1)?;
            rec.rmul(a, c, 1)?;
            a
        }
        Replace::B => {
            rec.inv(b)?;
            rec.lmul(b, a, 1)?;
            rec.rmul(b, c, 1)?;
            b
        }
        Replace::C => {
            rec.lmul(c, b, -1)?;
            rec.lmul(c, a, 1)?;
            c
        }
    };
    if rec.val(target) != want {
        return violation("L-spin did not produce a b^-1 c");
    }
    Ok(())
}

/// Replaces one of `a`, `b`, `c` (with `a`, `b` in one row and `b`, `c` in one column) by `a b^-1 c`.
pub fn l_spin(
    cfg: &Configuration,
    a: usize,
    b: usize,
    c: usize,
    replace: Replace,
) -> Result<(Configuration, Vec<NielsenMove>)> {
    let mut rec = Recorder::new(&cfg.multiset());
    spin_rec(&mut rec, a, b, c, replace)?;
    let t = rec.finish();
    Ok((cfg.with_entries(t.final_)?, t.moves))
}

/// Shape of one component: element count, row count, column count and corner multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ComponentShape {
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub corner: usize,
}

/// Sorted component shapes; equal for L-spin equivalent configurations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalFormDescriptor {
    pub components: Vec<ComponentShape>,
}

pub fn descriptor(c: &Configuration) -> NormalFormDescriptor {
    let mut components: Vec<ComponentShape> = sigma_graph(c)
        .components
        .iter()
        .map(|k| ComponentShape {
            n: k.n(),
            rows: k.rows.len(),
            cols: k.cols.len(),
            corner: k.n() + 2 - k.rows.len() - k.cols.len(),
        })
        .collect();
    components.sort_unstable();
    NormalFormDescriptor { components }
}

fn cell_of(rec: &Recorder, occ: usize) -> (usize, usize) {
    let s = rec.setting();
    let v = rec.val(occ);
    (s.right_of(v), s.left_of(v))
}

fn is_normal_at(rec: &Recorder, occs: &[usize], corner: (usize, usize)) -> bool {
    let mut boxes: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &o in occs {
        let (r, l) = cell_of(rec, o);
        if r != corner.0 && l != corner.1 {
            return false;
        }
        *boxes.entry((r, l)).or_default() += 1;
    }
    boxes.contains_key(&corner) && boxes.iter().all(|(&k, &n)| k == corner || n == 1)
}

/// Brings one component into normal form; returns its corner `(row coset, column coset)`.
fn normalize_component(rec: &mut Recorder, occs: &[usize]) -> Result<(usize, usize)> {
    let mut boxes: Vec<(usize, usize)> = occs.iter().map(|&o| cell_of(rec, o)).collect();
    let home = boxes[0];
    boxes.sort_unstable();
    boxes.dedup();
    if is_normal_at(rec, occs, home) {
        return Ok(home);
    }
    if let Some(&corner) = boxes.iter().find(|&&b| is_normal_at(rec, occs, b)) {
        return Ok(corner);
    }
    let s = occs[0];
    let (r0, c0) = home;
    loop {
        let outside: Vec<usize> = occs
            .iter()
            .copied()
            .filter(|&o| {
                let (r, l) = cell_of(rec, o);
                r != r0 && l != c0
            })
            .collect();
        if outside.is_empty() {
            break;
        }
        let mut moved = false;
        for x in outside {
            let (rx, cx) = cell_of(rec, x);
            if let Some(&y) = occs.iter().find(|&&y| cell_of(rec, y) == (r0, cx)) {
                spin_rec(rec, s, y, x, Replace::C)?;
                moved = true;
                break;
            }
            if let Some(&y) = occs.iter().find(|&&y| cell_of(rec, y) == (rx, c0)) {
                spin_rec(rec, x, y, s, Replace::A)?;
                moved = true;
                break;
            }
        }
        if !moved {
            return violation("component is not connected");
        }
    }
    let mut by_box: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for &o in occs {
        by_box.entry(cell_of(rec, o)).or_default().push(o);
    }
    for ((r, l), members) in by_box {
        if (r, l) == (r0, c0) {
            continue;
        }
        let keep = members[0];
        for &extra in &members[1..] {
            if r == r0 {
                spin_rec(rec, s, keep, extra, Replace::C)?;
            } else {
                spin_rec(rec, extra, keep, s, Replace::A)?;
            }
        }
    }
    if !is_normal_at(rec, occs, home) {
        return violation("normal form procedure left a component out of shape");
    }
    Ok(home)
}

fn normalize_rec(rec: &mut Recorder, cfg: &Configuration) -> Result<Vec<(ConfigComponent, (usize, usize))>> {
    let graph = sigma_graph(cfg);
    let mut out = Vec::with_capacity(graph.components.len());
    for comp in graph.components {
        let corner = normalize_component(rec, &comp.occs)?;
        out.push((comp, corner));
    }
    Ok(out)
}

fn block_labels(cfg: &Configuration, comps: &[(ConfigComponent, (usize, usize))]) -> (Vec<usize>, Vec<usize>) {
    let atlas = &cfg.setting.atlas;
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for (comp, (r0, c0)) in comps {
        let mut rs: Vec<usize> = comp.rows.iter().copied().filter(|r| r != r0).collect();
        let mut cs: Vec<usize> = comp.cols.iter().copied().filter(|l| l != c0).collect();
        rs.sort_by_key(|&r| atlas.row_pos[r]);
        cs.sort_by_key(|&l| atlas.col_pos[l]);
        rows.push(*r0);
        rows.extend(rs);
        cols.push(*c0);
        cols.extend(cs);
    }
    let used_rows: BTreeSet<usize> = rows.iter().copied().collect();
    let used_cols: BTreeSet<usize> = cols.iter().copied().collect();
    rows.extend(cfg.row_labels.iter().copied().filter(|r| !used_rows.contains(r)));
    cols.extend(cfg.col_labels.iter().copied().filter(|l| !used_cols.contains(l)));
    (rows, cols)
}

/// L-spins every component into normal form and lays the components out block-diagonally,
/// each with its corner box first.
pub fn config_normal_form(cfg: &Configuration) -> Result<(Configuration, Vec<NielsenMove>, NormalFormDescriptor)> {
    let mut rec = Recorder::new(&cfg.multiset());
    let comps = normalize_rec(&mut rec, cfg)?;
    let (rows, cols) = block_labels(cfg, &comps);
    let t = rec.finish();
    let out = Configuration::build(cfg.setting.clone(), cfg.board, rows, cols, t.final_, cfg.folded.clone())?;
    let d = descriptor(&out);
    if d != descriptor(cfg) {
        return violation("normal form changed the component shapes");
    }
    Ok((out, t.moves, d))
}

/// True when every component has `2n` elements on exactly `n` rows and `n` columns.
pub fn is_solvable(cfg: &Configuration) -> bool {
    sigma_graph(cfg).components.iter().all(ConfigComponent::is_square)
}

fn sweep_component(rec: &mut Recorder, occs: &[usize], rows: &[usize], cols: &[usize]) -> Result<()> {
    let k = rows.len();
    let at = |rec: &Recorder, i: usize, j: usize| -> Result<Vec<usize>> {
        let found: Vec<usize> = occs.iter().copied().filter(|&o| cell_of(rec, o) == (rows[i], cols[j])).collect();
        if found.is_empty() {
            return violation(format!("sweep expected an occupant at ({i}, {j})"));
        }
        Ok(found)
    };
    if k < 2 {
        return Ok(());
    }
    let corner = at(rec, 0, 0)?;
    let b = *corner.last().expect("corner is occupied");
    let a = at(rec, 0, 1)?[0];
    let c = at(rec, 1, 0)?[0];
    spin_rec(rec, a, b, c, Replace::B)?;
    for stage in 2..k {
        for t in 1..=stage {
            let (i, j) = (t - 1, stage - t);
            let b = at(rec, i, j)?[0];
            let a = at(rec, i, j + 1)?[0];
            let c = at(rec, i + 1, j)?[0];
            spin_rec(rec, a, b, c, Replace::B)?;
        }
    }
    Ok(())
}

/// Normal form followed by the staged sweep that leaves two occurrences in every row and column.
pub fn solve_square(cfg: &Configuration) -> Result<(Configuration, Vec<NielsenMove>)> {
    if !is_solvable(cfg) {
        return precondition("configuration has a component that is not square");
    }
    let mut rec = Recorder::new(&cfg.multiset());
    let comps = normalize_rec(&mut rec, cfg)?;
    for (comp, (r0, c0)) in &comps {
        let (rows, cols) = {
            let mut rs: Vec<usize> = comp.rows.iter().copied().filter(|r| r != r0).collect();
            let mut cs: Vec<usize> = comp.cols.iter().copied().filter(|l| l != c0).collect();
            let atlas = &cfg.setting.atlas;
            rs.sort_by_key(|&r| atlas.row_pos[r]);
            cs.sort_by_key(|&l| atlas.col_pos[l]);
            rs.insert(0, *r0);
            cs.insert(0, *c0);
            (rs, cs)
        };
        sweep_component(&mut rec, &comp.occs, &rows, &cols)?;
    }
    let t = rec.finish();
    let out = cfg.with_entries(t.final_)?;
    let graph = sigma_graph(&out);
    let occupied_ok = graph.components.iter().all(|k| {
        let mut rc: BTreeMap<usize, usize> = BTreeMap::new();
        let mut cc: BTreeMap<usize, usize> = BTreeMap::new();
        for &o in &k.occs {
            let v = out.value(o).expect("component occurrence");
            *rc.entry(cfg.setting.right_of(v)).or_default() += 1;
            *cc.entry(cfg.setting.left_of(v)).or_default() += 1;
        }
        rc.values().chain(cc.values()).all(|&n| n == 2)
    });
    if !occupied_ok {
        return violation("sweep did not leave two occurrences per row and column");
    }
    Ok((out, t.moves))
}

/// Splits a two-per-row-and-column configuration on a non-self-inverse board into the two
/// colour classes of its alternating cycles.
pub fn partition_bipartite(cfg: &Configuration) -> Result<(Vec<usize>, Vec<usize>)> {
    if cfg.setting.atlas.boards[cfg.board].self_inverse {
        return precondition(format!("board {} is self-inverse", cfg.board));
    }
    if !cfg.two_per_line() {
        return precondition("every row and column must hold exactly two occurrences");
    }
    let occ = cfg.occupancy();
    let pos: BTreeMap<usize, (usize, usize)> =
        cfg.entries.iter().map(|e| (e.occ, cfg.locate(e.value).expect("entries lie on the labels"))).collect();
    let row_mate = |o: usize| -> usize {
        let (r, _) = pos[&o];
        occ[r].iter().flatten().copied().find(|&x| x != o).expect("two per row")
    };
    let col_mate = |o: usize| -> usize {
        let (_, c) = pos[&o];
        occ.iter().flat_map(|row| row[c].iter().copied()).find(|&x| x != o).expect("two per column")
    };
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for start in cfg.occs() {
        if seen.contains(&start) {
            continue;
        }
        let mut x = start;
        loop {
            seen.insert(x);
            a.push(x);
            let y = row_mate(x);
            seen.insert(y);
            b.push(y);
            x = col_mate(y);
            if x == start {
                break;
            }
        }
    }
    a.sort_unstable();
    b.sort_unstable();
    let part = |ids: &[usize]| -> Result<Configuration> {
        cfg.with_entries(ids.iter().map(|&o| Entry { occ: o, value: cfg.value(o).expect("known occurrence") }).collect())
    };
    if !part(&a)?.one_per_line() || !part(&b)?.one_per_line() {
        return violation("colour classes are not one per row and column");
    }
    Ok((a, b))
}

/// Makes the occurrences in a non-self-inverse board and its inverse left-right diagonal.
pub fn solve_board_pair(s: &GenMultiset, board: usize) -> Result<Transcript> {
    let setting = s.setting().clone();
    let atlas = &setting.atlas;
    if board >= atlas.boards.len() {
        return precondition(format!("board {board} does not exist"));
    }
    let b = &atlas.boards[board];
    if b.self_inverse {
        return precondition(format!("board {board} is self-inverse"));
    }
    let sg = section(s, board)?;
    let sginv = section(s, b.inverse_board)?;
    let mut rec = Recorder::new(s);
    if sg.is_empty() && sginv.is_empty() {
        return Ok(rec.finish());
    }
    let (t, fold_moves) = fold_inverse(&sg, &sginv)?;
    if !is_solvable(&t) {
        return not_applicable(format!("folded configuration of board {board} has a component that is not square"));
    }
    for m in fold_moves {
        rec.apply(m)?;
    }
    let (solved, moves) = solve_square(&t)?;
    for m in moves {
        rec.apply(m)?;
    }
    let (_, bs) = partition_bipartite(&solved)?;
    for o in bs {
        rec.inv(o)?;
    }
    let pair: Vec<usize> = rec
        .ms()
        .entries()
        .iter()
        .filter(|e| {
            let k = atlas.board_of(e.value);
            k == board || k == b.inverse_board
        })
        .map(|e| e.value)
        .collect();
    let lefts: BTreeSet<usize> = pair.iter().map(|&v| atlas.left_of(v)).collect();
    let rights: BTreeSet<usize> = pair.iter().map(|&v| atlas.right_of(v)).collect();
    if lefts.len() != pair.len() || rights.len() != pair.len() {
        return violation("board pair is not diagonal after solving");
    }
    Ok(rec.finish())
}

fn label_names(cfg: &Configuration) -> (Vec<String>, Vec<String>) {
    let g = &cfg.setting.group;
    let cosets = &cfg.setting.atlas.cosets;
    let rows = cfg.row_labels.iter().map(|&r| format!("H{}", g.name(cosets.right_cosets[r].rep))).collect();
    let cols = cfg.col_labels.iter().map(|&l| format!("{}H", g.name(cosets.left_cosets[l].rep))).collect();
    (rows, cols)
}

/// ASCII grid with `*` per occurrence, `o` per folded occurrence and `.` for an empty box.
pub fn render_config_ascii(cfg: &Configuration) -> String {
    let (row_names, col_names) = label_names(cfg);
    let occ = cfg.occupancy();
    let cells: Vec<Vec<String>> = occ
        .iter()
        .map(|row| {
            row.iter()
                .map(|ids| {
                    if ids.is_empty() {
                        ".".to_string()
                    } else {
                        ids.iter().map(|o| if cfg.folded.contains(o) { 'o' } else { '*' }).collect()
                    }
                })
                .collect()
        })
        .collect();
    let lw = row_names.iter().map(String::len).max().unwrap_or(0);
    let cw = col_names.iter().chain(cells.iter().flatten()).map(String::len).max().unwrap_or(1).max(1);
    let mut out = String::new();
    let _ = writeln!(out, "configuration on board {} ({}x{})", cfg.board, row_names.len(), col_names.len());
    let _ = write!(out, "{:lw$}", "");
    for l in &col_names {
        let _ = write!(out, "  {l:cw$}");
    }
    out.push('\n');
    for (name, row) in row_names.iter().zip(&cells) {
        let _ = write!(out, "{name:lw$}");
        for cell in row {
            let _ = write!(out, "  {cell:cw$}");
        }
        out.push('\n');
    }
    out
}

/// DOT table with a filled dot per occurrence and a hollow dot per folded occurrence.
pub fn render_config_dot(cfg: &Configuration) -> String {
    let (row_names, col_names) = label_names(cfg);
    let occ = cfg.occupancy();
    let mut out = format!(
        "digraph config{} {{\n  node [shape=plaintext];\n  grid [label=<\n<TABLE BORDER=\"0\" CELLBORDER=\"1\" CELLSPACING=\"0\">\n<TR><TD></TD>",
        cfg.board
    );
    for l in &col_names {
        let _ = write!(out, "<TD>{}</TD>", escape(l));
    }
    out.push_str("</TR>\n");
    for (name, row) in row_names.iter().zip(&occ) {
        let _ = write!(out, "<TR><TD>{}</TD>", escape(name));
        for ids in row {
            let dots: String =
                ids.iter().map(|o| if cfg.folded.contains(o) { "&#9675;" } else { "&#9679;" }).collect();
            let _ = write!(out, "<TD>{dots}</TD>");
        }
        out.push_str("</TR>\n");
    }
    out.push_str("</TABLE>>];\n}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::family;
    use crate::group_core::{subgroup_generate, GroupTable};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setting(fam: &str, gens: &[&str]) -> Arc<Setting> {
        let g = family(fam).unwrap();
        let hs: Vec<usize> = gens.iter().map(|t| g.parse_element(t).unwrap()).collect();
        let h = subgroup_generate(&g, &hs).unwrap();
        Setting::new(g, h)
    }

    fn el(g: &GroupTable, t: &str) -> usize {
        g.parse_element(t).unwrap()
    }

    /// Board of dimension at least `dim` with singleton boxes.
    fn big_board(st: &Setting, dim: usize) -> usize {
        st.atlas.boards.iter().position(|b| b.dim() >= dim && b.size() == b.dim() * b.dim()).unwrap()
    }

    fn at(st: &Setting, board: usize, r: usize, c: usize) -> usize {
        st.atlas.boards[board].box_members(r, c)[0]
    }

    fn cfg_from(st: &Arc<Setting>, board: usize, cells: &[(usize, usize)]) -> Configuration {
        let entries = cells.iter().enumerate().map(|(occ, &(r, c))| Entry { occ, value: at(st, board, r, c) }).collect();
        Configuration::new(st.clone(), board, entries).unwrap()
    }

    fn boxes(c: &Configuration) -> Vec<Vec<usize>> {
        c.occupancy().iter().map(|row| row.iter().map(Vec::len).collect()).collect()
    }

    fn random_spin(c: &Configuration, rng: &mut ChaCha8Rng) -> Option<(Configuration, Vec<NielsenMove>)> {
        let occs = c.occs();
        let pos: Vec<(usize, usize)> = occs.iter().map(|&o| c.position(o).unwrap()).collect();
        let mut triples = Vec::new();
        for (ia, &a) in occs.iter().enumerate() {
            for (ib, &b) in occs.iter().enumerate() {
                if a == b || pos[ia].0 != pos[ib].0 {
                    continue;
                }
                for (ic, &cc) in occs.iter().enumerate() {
                    if cc != a && cc != b && pos[ib].1 == pos[ic].1 {
                        triples.push((a, b, cc));
                    }
                }
            }
        }
        if triples.is_empty() {
            return None;
        }
        let (a, b, cc) = triples[rng.gen_range(0..triples.len())];
        let replace = [Replace::A, Replace::B, Replace::C][rng.gen_range(0..3)];
        Some(l_spin(c, a, b, cc, replace).unwrap())
    }

    #[test]
    fn sections() {
        let st = setting("symmetric:3", &["(1,2)"]);
        let g = &st.group;
        let s = GenMultiset::new(st.clone(), &[el(g, "(1,2)"), el(g, "()"), el(g, "(1,3)")]).unwrap();
        let h = section(&s, 0).unwrap();
        assert_eq!(boxes(&h), vec![vec![2]]);

        let s = GenMultiset::new(st.clone(), &[el(g, "(1,2)"), el(g, "(1,3)"), el(g, "(2,3)")]).unwrap();
        let big = section(&s, 1).unwrap();
        assert_eq!(big.len(), 2);
        // independent check: distinct left and right cosets by direct multiplication
        let hset = [el(g, "()"), el(g, "(1,2)")];
        let left = |x: usize| -> BTreeSet<usize> { hset.iter().map(|&h| g.mul(x, h)).collect() };
        let right = |x: usize| -> BTreeSet<usize> { hset.iter().map(|&h| g.mul(h, x)).collect() };
        let (x, y) = (el(g, "(1,3)"), el(g, "(2,3)"));
        assert_ne!(left(x), left(y));
        assert_ne!(right(x), right(y));
        assert_eq!(boxes(&big), vec![vec![1, 0], vec![0, 1]]);

        let s = GenMultiset::new(st.clone(), &[el(g, "(1,2)")]).unwrap();
        assert!(section(&s, 1).unwrap().is_empty());
    }

    #[test]
    fn sigma_graph_matches_drawn_pattern() {
        let st = setting("alternating:5", &["(1,2,3,4,5)"]);
        let board = big_board(&st, 5);
        let c = cfg_from(&st, board, &[(0, 0), (0, 1), (1, 1), (3, 1), (1, 2), (2, 3), (2, 3)]);
        let gr = sigma_graph(&c);
        assert_eq!(gr.horizontal_edges, vec![(0, 1), (2, 4), (5, 6)]);
        assert_eq!(gr.vertical_edges, vec![(1, 2), (1, 3), (2, 3), (5, 6)]);
        let comps: Vec<Vec<usize>> = gr.components.iter().map(|k| k.occs.clone()).collect();
        assert_eq!(comps, vec![vec![0, 1, 2, 3, 4], vec![5, 6]]);
        assert_eq!((gr.components[0].rows.len(), gr.components[0].cols.len()), (3, 3));

        let diag = cfg_from(&st, board, &[(0, 0), (1, 1), (2, 2)]);
        let gd = sigma_graph(&diag);
        assert!(gd.horizontal_edges.is_empty() && gd.vertical_edges.is_empty());
        assert_eq!(gd.components.len(), 3);

        let two = cfg_from(&st, board, &[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0), (3, 3), (3, 3)]);
        assert!(sigma_graph(&two).is_union_of_even_cycles());
        assert!(gr.to_dot().contains("style=dashed"));
    }

    #[test]
    fn l_spin_shapes() {
        let st = setting("alternating:5", &["(1,2,3,4,5)"]);
        let board = big_board(&st, 5);
        let g = &st.group;
        // b top-left, a top-right, c bottom-left
        let c = cfg_from(&st, board, &[(0, 1), (0, 0), (1, 0)]);
        for replace in [Replace::A, Replace::B, Replace::C] {
            let (out, moves) = l_spin(&c, 0, 1, 2, replace).unwrap();
            let target = match replace {
                Replace::A => 0,
                Replace::B => 1,
                Replace::C => 2,
            };
            let want = g.product(&[c.value(0).unwrap(), g.inv(c.value(1).unwrap()), c.value(2).unwrap()]);
            assert_eq!(out.value(target).unwrap(), want);
            assert_eq!(out.position(target).unwrap(), (1, 1));
            let mut ms = c.multiset();
            for m in &moves {
                ms.apply_in_place(m).unwrap();
            }
            assert_eq!(ms.entries(), out.entries());
        }
        let (out, _) = l_spin(&c, 0, 1, 2, Replace::default()).unwrap();
        assert_eq!(boxes(&out), vec![vec![1, 1], vec![0, 1]]);

        // a and b share a box: a moves down the column to c's box
        let d = cfg_from(&st, board, &[(0, 0), (0, 0), (1, 0)]);
        let (out, _) = l_spin(&d, 0, 1, 2, Replace::A).unwrap();
        assert_eq!(out.position(0).unwrap(), (1, 0));
        // b and c share a box: c moves along the row to a's column
        let e = cfg_from(&st, board, &[(0, 1), (0, 0), (0, 0)]);
        let (out, _) = l_spin(&e, 0, 1, 2, Replace::C).unwrap();
        assert_eq!(out.position(2).unwrap(), (0, 1));

        assert!(l_spin(&c, 0, 0, 2, Replace::C).is_err());
        assert!(l_spin(&c, 2, 1, 0, Replace::C).is_err());
    }

    #[test]
    fn normal_forms() {
        let st = setting("alternating:5", &["(1,2,3,4,5)"]);
        let board = big_board(&st, 5);
        // six elements on two rows and three columns
        let c = cfg_from(&st, board, &[(0, 0), (0, 1), (1, 1), (1, 2), (0, 2), (1, 0)]);
        let (nf, _, d) = config_normal_form(&c).unwrap();
        assert_eq!(d.components, vec![ComponentShape { n: 6, rows: 2, cols: 3, corner: 3 }]);
        assert_eq!(boxes(&nf), vec![vec![3, 1, 1], vec![1, 0, 0]]);

        let c = cfg_from(&st, board, &[(0, 0), (0, 1), (1, 1), (1, 2)]);
        let (_, _, d) = config_normal_form(&c).unwrap();
        assert_eq!(d.components, vec![ComponentShape { n: 4, rows: 2, cols: 3, corner: 1 }]);

        let already = cfg_from(&st, board, &[(1, 1), (1, 1), (1, 2), (2, 1), (3, 1)]);
        let (nf, moves, _) = config_normal_form(&already).unwrap();
        assert!(moves.is_empty());
        assert_eq!(nf.entries(), already.entries());

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let k = rng.gen_range(1..10);
            let cells: Vec<(usize, usize)> = (0..k).map(|_| (rng.gen_range(0..5), rng.gen_range(0..5))).collect();
            let c = cfg_from(&st, board, &cells);
            let (nf, moves, d) = config_normal_form(&c).unwrap();
            assert_eq!(d, descriptor(&c));
            let mut ms = c.multiset();
            for m in &moves {
                ms.apply_in_place(m).unwrap();
            }
            assert_eq!(ms.entries(), nf.entries());
            let mut walked = c.clone();
            for _ in 0..rng.gen_range(0..30) {
                if let Some((next, _)) = random_spin(&walked, &mut rng) {
                    walked = next;
                }
            }
            assert_eq!(config_normal_form(&walked).unwrap().2, d);
        }
    }

    #[test]
    fn solvability_and_sweep() {
        let st = setting("alternating:5", &["(1,2,3,4,5)"]);
        let board = big_board(&st, 5);
        assert!(is_solvable(&cfg_from(&st, board, &[(0, 0), (0, 1), (1, 1), (1, 0)])));
        assert!(!is_solvable(&cfg_from(&st, board, &[(0, 0), (0, 1), (0, 2), (0, 2)])));
        assert!(is_solvable(&cfg_from(&st, board, &[(0, 0), (0, 0), (1, 1), (1, 2), (2, 1), (2, 2)])));
        assert!(solve_square(&cfg_from(&st, board, &[(0, 0), (0, 1), (0, 2), (0, 2)])).is_err());

        let one = cfg_from(&st, board, &[(2, 2), (2, 2)]);
        let (out, moves) = solve_square(&one).unwrap();
        assert!(moves.is_empty() && out.two_per_line());

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for k in 1..=5 {
            let mut cells = vec![(0, 0), (0, 0)];
            cells.extend((1..k).map(|j| (0, j)));
            cells.extend((1..k).map(|i| (i, 0)));
            let nf = cfg_from(&st, board, &cells);
            let (out, moves) = solve_square(&nf).unwrap();
            assert!(out.two_per_line(), "k = {k}");
            assert_eq!(moves.is_empty(), k == 1);
            for _ in 0..20 {
                let mut walked = nf.clone();
                for _ in 0..15 {
                    if let Some((next, _)) = random_spin(&walked, &mut rng) {
                        walked = next;
                    }
                }
                let (out, moves) = solve_square(&walked).unwrap();
                assert!(out.two_per_line());
                let mut ms = walked.multiset();
                for m in &moves {
                    ms.apply_in_place(m).unwrap();
                }
                assert_eq!(ms.entries(), out.entries());
            }
        }
    }

    fn pair_setting() -> (Arc<Setting>, usize) {
        let st = setting("frobenius:21", &["(2,3,5)(4,7,6)"]);
        let board = st.atlas.boards.iter().position(|b| !b.self_inverse).unwrap();
        (st, board)
    }

    #[test]
    fn bipartition() {
        let (st, board) = pair_setting();
        let full = cfg_from(&st, board, &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let (a, b) = partition_bipartite(&full).unwrap();
        assert_eq!(a, vec![0, 3]);
        assert_eq!(b, vec![1, 2]);
        let pair = cfg_from(&st, board, &[(1, 2), (1, 2)]);
        assert_eq!(partition_bipartite(&pair).unwrap(), (vec![0], vec![1]));
        let three = cfg_from(&st, board, &[(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]);
        assert!(partition_bipartite(&three).is_err());
        let st3 = setting("symmetric:3", &["(1,2)"]);
        let self_inv = cfg_from(&st3, 1, &[(0, 0), (0, 0)]);
        assert!(partition_bipartite(&self_inv).is_err());
    }

    #[test]
    fn folding() {
        let (st, board) = pair_setting();
        let inv = st.atlas.boards[board].inverse_board;
        let g = &st.group;
        let sg = cfg_from(&st, board, &[(0, 0)]);
        let empty = Configuration::new(st.clone(), inv, vec![]).unwrap();
        let (t, moves) = fold_inverse(&sg, &empty).unwrap();
        assert!(moves.is_empty());
        assert_eq!(t.entries(), sg.entries());

        // a left-diagonal section of the inverse board folds to one per row
        let entries: Vec<Entry> = (0..3).map(|j| Entry { occ: 10 + j, value: at(&st, inv, 0, j) }).collect();
        let sginv = Configuration::new(st.clone(), inv, entries).unwrap();
        let (t, moves) = fold_inverse(&sg, &sginv).unwrap();
        assert_eq!(moves.len(), 3);
        assert_eq!(t.folded().len(), 3);
        for e in sginv.entries() {
            assert_eq!(t.value(e.occ).unwrap(), g.inv(e.value));
        }
        let folded_only = Configuration::new(st.clone(), board, t.entries()[1..].to_vec()).unwrap();
        assert_eq!(folded_only.row_counts(), vec![1, 1, 1]);
        assert!(render_config_ascii(&t).contains('o'));
        assert!(render_config_dot(&t).contains("&#9675;"));
        assert!(fold_inverse(&sg, &sg).is_err());
    }

    #[test]
    fn board_pairs_of_left_transversals() {
        let (st, board) = pair_setting();
        let g = &st.group;
        let inv = st.atlas.boards[board].inverse_board;
        let left = &st.atlas.cosets.left_cosets;
        let hset: Vec<usize> = st.subgroup.members.clone();
        let mut solved = 0;
        let mut refused = 0;
        let total: usize = left.iter().map(|c| c.members.len()).product();
        for code in 0..total {
            let mut rest = code;
            let values: Vec<usize> = left
                .iter()
                .map(|c| {
                    let v = c.members[rest % c.members.len()];
                    rest /= c.members.len();
                    v
                })
                .collect();
            let s = GenMultiset::new(st.clone(), &values).unwrap();
            // independent oracle: rows and columns by direct multiplication, components by flood fill
            let pair_vals: Vec<usize> = values
                .iter()
                .map(|&v| if st.atlas.board_of(v) == inv { g.inv(v) } else { v })
                .filter(|&v| st.atlas.board_of(v) == board)
                .collect();
            let coset = |v: usize, right: bool| -> Vec<usize> {
                let mut c: Vec<usize> = hset.iter().map(|&h| if right { g.mul(h, v) } else { g.mul(v, h) }).collect();
                c.sort_unstable();
                c
            };
            let edges: Vec<(Vec<usize>, Vec<usize>)> = pair_vals.iter().map(|&v| (coset(v, true), coset(v, false))).collect();
            let mut unseen: Vec<usize> = (0..edges.len()).collect();
            let mut square = true;
            while let Some(first) = unseen.pop() {
                let mut comp = vec![first];
                let mut i = 0;
                while i < comp.len() {
                    let (r, c) = edges[comp[i]].clone();
                    let (near, far): (Vec<usize>, Vec<usize>) =
                        unseen.iter().partition(|&&j| edges[j].0 == r || edges[j].1 == c);
                    comp.extend(near);
                    unseen = far;
                    i += 1;
                }
                let rs: BTreeSet<&Vec<usize>> = comp.iter().map(|&j| &edges[j].0).collect();
                let cs: BTreeSet<&Vec<usize>> = comp.iter().map(|&j| &edges[j].1).collect();
                square &= rs.len() == cs.len() && comp.len() == 2 * rs.len();
            }
            match solve_board_pair(&s, board) {
                Ok(t) => {
                    assert!(t.verify_replay(&st));
                    let out = t.replay(&st).unwrap();
                    let diag: Vec<usize> = out
                        .values()
                        .into_iter()
                        .filter(|&v| [board, inv].contains(&st.atlas.board_of(v)))
                        .collect();
                    assert_eq!(diag.len(), 6);
                    let in_board = diag.iter().filter(|&&v| st.atlas.board_of(v) == board).count();
                    assert_eq!(in_board, 3);
                    assert!(square);
                    solved += 1;
                }
                Err(e) => {
                    assert!(e.is_not_applicable());
                    assert!(!square);
                    refused += 1;
                }
            }
        }
        assert_eq!(solved + refused, total);
        assert!(solved > 0 && refused > 0);
    }
}
