//! Cosets, double-coset chessboards, the inversion involution and the
//! coset intersection graph.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::group_core::{GroupTable, SubgroupData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coset {
    /// Minimal element index of the coset.
    pub rep: usize,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CosetSpace {
    pub left_cosets: Vec<Coset>,
    pub right_cosets: Vec<Coset>,
    pub left_of: Vec<usize>,
    pub right_of: Vec<usize>,
}

impl CosetSpace {
    pub fn index(&self) -> usize {
        self.left_cosets.len()
    }

    pub fn coset_of(&self, x: usize, side: Side) -> usize {
        match side {
            Side::Left => self.left_of[x],
            Side::Right => self.right_of[x],
        }
    }

    pub fn cosets(&self, side: Side) -> &[Coset] {
        match side {
            Side::Left => &self.left_cosets,
            Side::Right => &self.right_cosets,
        }
    }
}

/// Left and right cosets of `h`, ids ordered by minimal representative.
pub fn enumerate_cosets(g: &GroupTable, h: &SubgroupData) -> CosetSpace {
    let n = g.order();
    let mut left_of = vec![usize::MAX; n];
    let mut right_of = vec![usize::MAX; n];
    let mut left_cosets = Vec::new();
    let mut right_cosets = Vec::new();
    for x in 0..n {
        if left_of[x] == usize::MAX {
            let id = left_cosets.len();
            let mut members: Vec<usize> = h.members.iter().map(|&y| g.mul(x, y)).collect();
            members.sort_unstable();
            for &m in &members {
                left_of[m] = id;
            }
            left_cosets.push(Coset { rep: x, members });
        }
        if right_of[x] == usize::MAX {
            let id = right_cosets.len();
            let mut members: Vec<usize> = h.members.iter().map(|&y| g.mul(y, x)).collect();
            members.sort_unstable();
            for &m in &members {
                right_of[m] = id;
            }
            right_cosets.push(Coset { rep: x, members });
        }
    }
    CosetSpace { left_cosets, right_cosets, left_of, right_of }
}

/// One double coset `HgH` drawn as a square grid: columns are left cosets, rows right cosets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Chessboard {
    pub board_id: usize,
    pub columns: Vec<usize>,
    pub rows: Vec<usize>,
    /// Row-major box contents, each sorted.
    boxes: Vec<Vec<usize>>,
    pub self_inverse: bool,
    pub inverse_board: usize,
    pub min_element: usize,
}

impl Chessboard {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn box_members(&self, row_pos: usize, col_pos: usize) -> &[usize] {
        &self.boxes[row_pos * self.dim() + col_pos]
    }

    pub fn size(&self) -> usize {
        self.boxes.iter().map(Vec::len).sum()
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.boxes.iter().flatten().copied()
    }
}

/// Where an element sits in the atlas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub board: usize,
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChessboardAtlas {
    pub cosets: CosetSpace,
    pub boards: Vec<Chessboard>,
    pub board_of_left: Vec<usize>,
    pub board_of_right: Vec<usize>,
    /// Position of a left coset among its board's columns.
    pub col_pos: Vec<usize>,
    /// Position of a right coset among its board's rows.
    pub row_pos: Vec<usize>,
    /// Inversion on cosets: left id -> right id of the inverse representative.
    pub left_to_right: Vec<usize>,
    /// Inversion on cosets: right id -> left id.
    pub right_to_left: Vec<usize>,
}

impl ChessboardAtlas {
    pub fn index(&self) -> usize {
        self.cosets.index()
    }

    pub fn cell(&self, x: usize) -> Cell {
        let l = self.cosets.left_of[x];
        let r = self.cosets.right_of[x];
        Cell { board: self.board_of_left[l], row: self.row_pos[r], col: self.col_pos[l] }
    }

    pub fn board_of(&self, x: usize) -> usize {
        self.board_of_left[self.cosets.left_of[x]]
    }

    pub fn left_of(&self, x: usize) -> usize {
        self.cosets.left_of[x]
    }

    pub fn right_of(&self, x: usize) -> usize {
        self.cosets.right_of[x]
    }

    /// Board containing `H` itself; always board 0.
    pub fn h_board(&self) -> usize {
        0
    }

    pub fn non_self_inverse_count(&self) -> usize {
        self.boards.iter().filter(|b| !b.self_inverse).count()
    }

    /// `gH -> Hg^{-1}` and `Hg -> g^{-1}H`.
    pub fn invert_coset(&self, coset_id: usize, side: Side) -> usize {
        match side {
            Side::Left => self.left_to_right[coset_id],
            Side::Right => self.right_to_left[coset_id],
        }
    }

    /// Left coset of the board's column `pos`.
    pub fn column(&self, board: usize, pos: usize) -> usize {
        self.boards[board].columns[pos]
    }

    pub fn row(&self, board: usize, pos: usize) -> usize {
        self.boards[board].rows[pos]
    }
}

/// All double cosets of `h` as chessboards, ordered by minimal element.
pub fn build_atlas(g: &GroupTable, h: &SubgroupData) -> ChessboardAtlas {
    let cosets = enumerate_cosets(g, h);
    let idx = cosets.index();
    let n = g.order();
    let mut board_of_elem = vec![usize::MAX; n];
    let mut mins = Vec::new();
    for x in 0..n {
        if board_of_elem[x] != usize::MAX {
            continue;
        }
        let id = mins.len();
        mins.push(x);
        for &a in &h.members {
            let ax = g.mul(a, x);
            for &b in &h.members {
                board_of_elem[g.mul(ax, b)] = id;
            }
        }
    }
    let left_to_right: Vec<usize> =
        cosets.left_cosets.iter().map(|c| cosets.right_of[g.inv(c.rep)]).collect();
    let right_to_left: Vec<usize> =
        cosets.right_cosets.iter().map(|c| cosets.left_of[g.inv(c.rep)]).collect();
    let board_of_left: Vec<usize> = cosets.left_cosets.iter().map(|c| board_of_elem[c.rep]).collect();
    let board_of_right: Vec<usize> = cosets.right_cosets.iter().map(|c| board_of_elem[c.rep]).collect();
    let mut col_pos = vec![0; idx];
    let mut row_pos = vec![0; idx];
    let mut boards = Vec::with_capacity(mins.len());
    for (id, &min_element) in mins.iter().enumerate() {
        let columns: Vec<usize> = (0..idx).filter(|&l| board_of_left[l] == id).collect();
        let inverse_board = board_of_elem[g.inv(min_element)];
        let self_inverse = inverse_board == id;
        let rows: Vec<usize> = if self_inverse {
            columns.iter().map(|&l| left_to_right[l]).collect()
        } else {
            (0..idx).filter(|&r| board_of_right[r] == id).collect()
        };
        for (p, &l) in columns.iter().enumerate() {
            col_pos[l] = p;
        }
        for (p, &r) in rows.iter().enumerate() {
            row_pos[r] = p;
        }
        let d = columns.len();
        let mut boxes = vec![Vec::new(); d * rows.len()];
        for x in 0..n {
            if board_of_elem[x] == id {
                let r = row_pos[cosets.right_of[x]];
                let c = col_pos[cosets.left_of[x]];
                boxes[r * d + c].push(x);
            }
        }
        boards.push(Chessboard { board_id: id, columns, rows, boxes, self_inverse, inverse_board, min_element });
    }
    ChessboardAtlas { cosets, boards, board_of_left, board_of_right, col_pos, row_pos, left_to_right, right_to_left }
}

/// One element per diagonal box of every board, the minimal one.
pub fn diagonal_transversal(atlas: &ChessboardAtlas) -> Vec<usize> {
    let mut out: Vec<usize> =
        atlas.boards.iter().flat_map(|b| (0..b.dim()).map(move |i| b.box_members(i, i)[0])).collect();
    out.sort_unstable();
    out
}

fn hits_each_once(ids: impl Iterator<Item = usize>, count: usize) -> bool {
    let mut seen = vec![false; count];
    let mut total = 0;
    for id in ids {
        if seen[id] {
            return false;
        }
        seen[id] = true;
        total += 1;
    }
    total == count
}

pub fn is_left_transversal(cosets: &CosetSpace, s: &[usize]) -> bool {
    hits_each_once(s.iter().map(|&x| cosets.left_of[x]), cosets.index())
}

pub fn is_right_transversal(cosets: &CosetSpace, s: &[usize]) -> bool {
    hits_each_once(s.iter().map(|&x| cosets.right_of[x]), cosets.index())
}

pub fn is_left_right_transversal(cosets: &CosetSpace, s: &[usize]) -> bool {
    is_left_transversal(cosets, s) && is_right_transversal(cosets, s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaComponent {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub edge_count: usize,
}

impl GammaComponent {
    pub fn is_complete(&self) -> bool {
        self.edge_count == self.left.len() * self.right.len()
    }
}

/// Bipartite graph on left cosets of `H` and right cosets of `K`, joined when they meet.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CosetIntersectionGraph {
    pub left_vertices: Vec<usize>,
    pub right_vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub components: Vec<GammaComponent>,
}

impl CosetIntersectionGraph {
    pub fn component_sizes(&self) -> Vec<(usize, usize)> {
        self.components.iter().map(|c| (c.left.len(), c.right.len())).collect()
    }

    pub fn all_complete(&self) -> bool {
        self.components.iter().all(GammaComponent::is_complete)
    }

    /// Whether `t_i / s_i` is the same for every component.
    pub fn ratio_constant(&self) -> bool {
        let sizes = self.component_sizes();
        sizes.windows(2).all(|w| w[0].1 * w[1].0 == w[1].1 * w[0].0)
    }

    pub fn to_dot(&self, g: &GroupTable, h_name: &str, k_name: &str) -> String {
        let mut out = String::from("graph gamma {\n  rankdir=LR;\n");
        for (i, &rep) in self.left_vertices.iter().enumerate() {
            let _ = writeln!(out, "  l{i} [label=\"{}{h_name}\", shape=box];", g.name(rep));
        }
        for (j, &rep) in self.right_vertices.iter().enumerate() {
            let _ = writeln!(out, "  r{j} [label=\"{k_name}{}\", shape=ellipse];", g.name(rep));
        }
        for &(i, j) in &self.edges {
            let _ = writeln!(out, "  l{i} -- r{j};");
        }
        out.push_str("}\n");
        out
    }
}

pub fn coset_intersection_graph(g: &GroupTable, h: &SubgroupData, k: &SubgroupData) -> CosetIntersectionGraph {
    let ch = enumerate_cosets(g, h);
    let ck = enumerate_cosets(g, k);
    let nl = ch.left_cosets.len();
    let nr = ck.right_cosets.len();
    let edge_set: BTreeSet<(usize, usize)> = (0..g.order()).map(|x| (ch.left_of[x], ck.right_of[x])).collect();
    let edges: Vec<(usize, usize)> = edge_set.into_iter().collect();
    let mut parent: Vec<usize> = (0..nl + nr).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for &(i, j) in &edges {
        let a = find(&mut parent, i);
        let b = find(&mut parent, nl + j);
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut comp_of = vec![0; nl + nr];
    for (v, slot) in comp_of.iter_mut().enumerate() {
        let r = find(&mut parent, v);
        let c = match roots.iter().position(|&x| x == r) {
            Some(c) => c,
            None => {
                roots.push(r);
                roots.len() - 1
            }
        };
        *slot = c;
    }
    let mut components = vec![GammaComponent { left: vec![], right: vec![], edge_count: 0 }; roots.len()];
    for i in 0..nl {
        components[comp_of[i]].left.push(i);
    }
    for j in 0..nr {
        components[comp_of[nl + j]].right.push(j);
    }
    for &(i, _) in &edges {
        components[comp_of[i]].edge_count += 1;
    }
    CosetIntersectionGraph {
        left_vertices: ch.left_cosets.iter().map(|c| c.rep).collect(),
        right_vertices: ck.right_cosets.iter().map(|c| c.rep).collect(),
        edges,
        components,
    }
}

/// ASCII grid of one board: `*` per occupant, `o` per hollow (non-member) marker, `.` for an empty box.
pub fn render_board_ascii(g: &GroupTable, atlas: &ChessboardAtlas, board: usize, filled: &[usize], hollow: &[usize]) -> String {
    let b = &atlas.boards[board];
    let d = b.dim();
    let mut cells = vec![String::new(); d * d];
    for (marks, ch) in [(filled, '*'), (hollow, 'o')] {
        for &x in marks {
            let c = atlas.cell(x);
            if c.board == board {
                cells[c.row * d + c.col].push(ch);
            }
        }
    }
    let col_labels: Vec<String> =
        b.columns.iter().map(|&l| format!("{}H", g.name(atlas.cosets.left_cosets[l].rep))).collect();
    let row_labels: Vec<String> =
        b.rows.iter().map(|&r| format!("H{}", g.name(atlas.cosets.right_cosets[r].rep))).collect();
    let lw = row_labels.iter().map(String::len).max().unwrap_or(0);
    let cw = col_labels.iter().map(String::len).chain(cells.iter().map(String::len)).max().unwrap_or(1).max(1);
    let mut out = String::new();
    let kind = if b.self_inverse { "self-inverse".to_string() } else { format!("inverse of board {}", b.inverse_board) };
    let _ = writeln!(out, "board {} ({d}x{d}, {kind})", b.board_id);
    let _ = write!(out, "{:lw$}", "");
    for l in &col_labels {
        let _ = write!(out, "  {l:cw$}");
    }
    out.push('\n');
    for (r, label) in row_labels.iter().enumerate() {
        let _ = write!(out, "{label:lw$}");
        for c in 0..d {
            let cell = &cells[r * d + c];
            let shown = if cell.is_empty() { "." } else { cell.as_str() };
            let _ = write!(out, "  {shown:cw$}");
        }
        out.push('\n');
    }
    out
}

/// DOT table rendering of one board with filled and hollow dots.
pub fn render_board_dot(g: &GroupTable, atlas: &ChessboardAtlas, board: usize, filled: &[usize], hollow: &[usize]) -> String {
    let b = &atlas.boards[board];
    let d = b.dim();
    let mut filled_n = vec![0usize; d * d];
    let mut hollow_n = vec![0usize; d * d];
    for (marks, counts) in [(filled, &mut filled_n), (hollow, &mut hollow_n)] {
        for &x in marks {
            let c = atlas.cell(x);
            if c.board == board {
                counts[c.row * d + c.col] += 1;
            }
        }
    }
    let mut out = format!("digraph board{} {{\n  node [shape=plaintext];\n  grid [label=<\n<TABLE BORDER=\"0\" CELLBORDER=\"1\" CELLSPACING=\"0\">\n<TR><TD></TD>", b.board_id);
    for &l in &b.columns {
        let _ = write!(out, "<TD>{}H</TD>", escape(&g.name(atlas.cosets.left_cosets[l].rep)));
    }
    out.push_str("</TR>\n");
    for r in 0..d {
        let _ = write!(out, "<TR><TD>H{}</TD>", escape(&g.name(atlas.cosets.right_cosets[b.rows[r]].rep)));
        for c in 0..d {
            let dots = "&#9679;".repeat(filled_n[r * d + c]) + &"&#9675;".repeat(hollow_n[r * d + c]);
            let _ = write!(out, "<TD>{dots}</TD>");
        }
        out.push_str("</TR>\n");
    }
    out.push_str("</TABLE>>];\n}\n");
    out
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
