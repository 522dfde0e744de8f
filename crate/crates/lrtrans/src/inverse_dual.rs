//! Inverse-dual graphs of configurations in self-inverse chessboards, simple moves,
//! octopus and sweet normal forms, cycle solving and the odd-octopus algorithm.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::configurations::{section, Configuration, Replace};
use crate::error::{not_applicable, precondition, violation, Error, Result};
use crate::nielsen_engine::{GenMultiset, NielsenMove, Recorder, Transcript};

/// One occurrence drawn as a directed edge from its row vertex to its column vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThetaEdge {
    pub occ: usize,
    pub from: usize,
    pub to: usize,
}

impl ThetaEdge {
    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }

    pub fn touches(&self, v: usize) -> bool {
        self.from == v || self.to == v
    }

    /// The endpoint opposite `v`, or `None` when `v` is not an endpoint.
    pub fn other(&self, v: usize) -> Option<usize> {
        if self.from == v {
            Some(self.to)
        } else if self.to == v {
            Some(self.from)
        } else {
            None
        }
    }
}

/// Vertices are board positions; a self-inverse board is indexed so that row `i` inverts column `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InverseDualGraph {
    pub board: usize,
    pub vertex_count: usize,
    edges: Vec<ThetaEdge>,
}

/// Touched vertices and edges of one connected component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaComponent {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl InverseDualGraph {
    pub fn new(board: usize, vertex_count: usize, mut edges: Vec<ThetaEdge>) -> Result<InverseDualGraph> {
        edges.sort_by_key(|e| e.occ);
        if edges.windows(2).any(|w| w[0].occ == w[1].occ) {
            return precondition("occurrence ids must be unique");
        }
        if let Some(e) = edges.iter().find(|e| e.from >= vertex_count || e.to >= vertex_count) {
            return precondition(format!("edge {} leaves the vertex range", e.occ));
        }
        Ok(InverseDualGraph { board, vertex_count, edges })
    }

    pub fn edges(&self) -> &[ThetaEdge] {
        &self.edges
    }

    pub fn edge(&self, occ: usize) -> Result<ThetaEdge> {
        self.edges.iter().find(|e| e.occ == occ).copied().ok_or(Error::UnknownOccurrence(occ))
    }

    fn edge_mut(&mut self, occ: usize) -> Result<&mut ThetaEdge> {
        self.edges.iter_mut().find(|e| e.occ == occ).ok_or(Error::UnknownOccurrence(occ))
    }

    /// Edge ends at `v`; a loop counts twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|e| usize::from(e.from == v) + usize::from(e.to == v)).sum()
    }

    /// Incident edges as `(occ, far end)`, loops listed once.
    fn incident(&self, v: usize) -> Vec<(usize, usize)> {
        self.edges.iter().filter_map(|e| e.other(v).map(|w| (e.occ, w))).collect()
    }

    fn loops_at(&self, v: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.is_loop() && e.from == v).map(|e| e.occ).collect()
    }

    fn edges_between(&self, p: usize, q: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.other(p) == Some(q)).map(|e| e.occ).collect()
    }

    /// Components over vertices that carry at least one edge, ordered by least vertex.
    pub fn components(&self) -> Vec<ThetaComponent> {
        let mut parent: Vec<usize> = (0..self.vertex_count).collect();
        fn root(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            parent[x] = r;
            r
        }
        for e in &self.edges {
            let (a, b) = (root(&mut parent, e.from), root(&mut parent, e.to));
            parent[a.max(b)] = a.min(b);
        }
        let mut groups: BTreeMap<usize, ThetaComponent> = BTreeMap::new();
        let touched: BTreeSet<usize> = self.edges.iter().flat_map(|e| [e.from, e.to]).collect();
        for v in touched {
            let r = root(&mut parent, v);
            groups.entry(r).or_insert_with(|| ThetaComponent { vertices: vec![], edges: vec![] }).vertices.push(v);
        }
        for e in &self.edges {
            let r = root(&mut parent, e.from);
            groups.get_mut(&r).expect("edge component exists").edges.push(e.occ);
        }
        groups.into_values().collect()
    }

    /// Two colour classes of a component, or `None` when it has an odd cycle.
    pub fn bipartition(&self, comp: &ThetaComponent) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut colour: BTreeMap<usize, bool> = BTreeMap::new();
        let start = *comp.vertices.first()?;
        colour.insert(start, false);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let cv = colour[&v];
            for (_, w) in self.incident(v) {
                match colour.get(&w) {
                    Some(&cw) if cw == cv => return None,
                    Some(_) => {}
                    None => {
                        colour.insert(w, !cv);
                        queue.push_back(w);
                    }
                }
            }
        }
        let a = colour.iter().filter(|(_, &c)| !c).map(|(&v, _)| v).collect();
        let b = colour.iter().filter(|(_, &c)| c).map(|(&v, _)| v).collect();
        Some((a, b))
    }

    /// Every touched vertex has exactly one incoming and one outgoing edge.
    pub fn is_cycle_cover(&self) -> bool {
        let mut outs: BTreeMap<usize, usize> = BTreeMap::new();
        let mut ins: BTreeMap<usize, usize> = BTreeMap::new();
        for e in &self.edges {
            *outs.entry(e.from).or_default() += 1;
            *ins.entry(e.to).or_default() += 1;
        }
        outs.keys().chain(ins.keys()).all(|v| outs.get(v) == Some(&1) && ins.get(v) == Some(&1))
    }

    /// DOT export; loops are drawn bold and parallel edges dashed.
    pub fn to_dot(&self) -> String {
        let mut out = format!("digraph theta{} {{\n", self.board);
        for v in 0..self.vertex_count {
            let _ = writeln!(out, "  v{v} [label=\"v{}\"];", v + 1);
        }
        let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for e in &self.edges {
            let key = (e.from.min(e.to), e.from.max(e.to));
            let n = seen.entry(key).or_default();
            let style = if e.is_loop() {
                "bold"
            } else if *n > 0 {
                "dashed"
            } else {
                "solid"
            };
            *n += 1;
            let _ = writeln!(out, "  v{} -> v{} [label=\"{}\", style={style}];", e.from, e.to, e.occ);
        }
        out.push_str("}\n");
        out
    }

    fn invert(&mut self, occ: usize) -> Result<Vec<NielsenMove>> {
        let e = self.edge_mut(occ)?;
        std::mem::swap(&mut e.from, &mut e.to);
        Ok(vec![NielsenMove::Invert { target: occ }])
    }

    /// L-spin on occurrences with `a`, `b` in one row and `b`, `c` in one column.
    fn spin(&mut self, a: usize, b: usize, c: usize, replace: Replace) -> Result<Vec<NielsenMove>> {
        if a == b || b == c || a == c {
            return precondition("L-spin needs three distinct occurrences");
        }
        let (ea, eb, ec) = (self.edge(a)?, self.edge(b)?, self.edge(c)?);
        if ea.from != eb.from || eb.to != ec.to {
            return precondition("edges do not form an L-spin walk");
        }
        let lmul_inv = |t: usize, by: usize| {
            [NielsenMove::Invert { target: by }, NielsenMove::LeftMul { target: t, by }, NielsenMove::Invert { target: by }]
        };
        let rmul_inv = |t: usize, by: usize| {
            [NielsenMove::Invert { target: by }, NielsenMove::RightMul { target: t, by }, NielsenMove::Invert { target: by }]
        };
        let (target, moves): (usize, Vec<NielsenMove>) = match replace {
            Replace::A => {
                let mut m = rmul_inv(a, b).to_vec();
                m.push(NielsenMove::RightMul { target: a, by: c });
                (a, m)
            }
            Replace::B => (
                b,
                vec![
                    NielsenMove::Invert { target: b },
                    NielsenMove::LeftMul { target: b, by: a },
                    NielsenMove::RightMul { target: b, by: c },
                ],
            ),
            Replace::C => {
                let mut m = lmul_inv(c, b).to_vec();
                m.push(NielsenMove::LeftMul { target: c, by: a });
                (c, m)
            }
        };
        let t = self.edge_mut(target)?;
        t.from = ec.from;
        t.to = ea.to;
        Ok(moves)
    }

    /// L-spin along the undirected walk `start -e1- y -e2- z -e3- w`, orienting edges as needed;
    /// the edge at `which` (0, 1 or 2) becomes `start - w`.
    fn walk_spin(&mut self, start: usize, walk: [usize; 3], which: usize) -> Result<Vec<NielsenMove>> {
        let [e1, e2, e3] = walk;
        let y = self.edge(e1)?.other(start).ok_or_else(|| Error::Precondition(format!("edge {e1} misses vertex {start}")))?;
        let z = self.edge(e2)?.other(y).ok_or_else(|| Error::Precondition(format!("edge {e2} misses vertex {y}")))?;
        let w = self.edge(e3)?.other(z).ok_or_else(|| Error::Precondition(format!("edge {e3} misses vertex {z}")))?;
        if e1 == e2 || e2 == e3 || e1 == e3 {
            return precondition("walk edges must be distinct");
        }
        let mut moves = Vec::new();
        for (occ, from, to) in [(e1, start, y), (e2, z, y), (e3, z, w)] {
            let e = self.edge(occ)?;
            if (e.from, e.to) != (from, to) {
                moves.extend(self.invert(occ)?);
            }
        }
        let replace = match which {
            0 => Replace::C,
            1 => Replace::B,
            2 => Replace::A,
            _ => return precondition("walk position must be 0, 1 or 2"),
        };
        moves.extend(self.spin(e3, e2, e1, replace)?);
        Ok(moves)
    }

    /// Moves the loop `l` across the incident edge `e` to its other endpoint.
    fn shift_loop(&mut self, l: usize, e: usize) -> Result<Vec<NielsenMove>> {
        if l == e {
            return precondition("loop shift needs two distinct occurrences");
        }
        let el = self.edge(l)?;
        if !el.is_loop() {
            return precondition(format!("occurrence {l} is not a loop"));
        }
        let v = el.from;
        let ee = self.edge(e)?;
        let far = ee.other(v).ok_or_else(|| Error::Precondition(format!("edge {e} is not incident to the loop")))?;
        let mut moves = Vec::new();
        if ee.to != v {
            moves.extend(self.invert(e)?);
        }
        moves.extend([
            NielsenMove::RightMul { target: l, by: e },
            NielsenMove::Invert { target: e },
            NielsenMove::LeftMul { target: l, by: e },
            NielsenMove::Invert { target: e },
        ]);
        let t = self.edge_mut(l)?;
        t.from = far;
        t.to = far;
        Ok(moves)
    }
}

/// The inverse-dual graph of a configuration on a self-inverse board other than `H`.
pub fn theta_graph(c: &Configuration) -> Result<InverseDualGraph> {
    let st = c.setting();
    let board = c.board();
    if board == st.atlas.h_board() {
        return precondition("the board of H is handled by extraction, not by inverse-dual graphs");
    }
    let b = &st.atlas.boards[board];
    if !b.self_inverse {
        return precondition(format!("board {board} is not self-inverse"));
    }
    let edges = c
        .entries()
        .iter()
        .map(|e| {
            let cell = st.atlas.cell(e.value);
            ThetaEdge { occ: e.occ, from: cell.row, to: cell.col }
        })
        .collect();
    InverseDualGraph::new(board, b.dim(), edges)
}

pub fn edge_invert(g: &InverseDualGraph, occ: usize) -> Result<InverseDualGraph> {
    let mut out = g.clone();
    out.invert(occ)?;
    Ok(out)
}

/// L-spin on three edges forming a walk in the given order; `replace` picks the first (`A`),
/// second (`B`) or third (`C`) edge to become the edge joining the walk's ends.
pub fn theta_l_spin(
    g: &InverseDualGraph,
    e1: usize,
    e2: usize,
    e3: usize,
    replace: Replace,
) -> Result<(InverseDualGraph, Vec<NielsenMove>)> {
    let which = match replace {
        Replace::A => 0,
        Replace::B => 1,
        Replace::C => 2,
    };
    let first = g.edge(e1)?;
    let mut last_err = None;
    for start in [first.from, first.to] {
        let mut out = g.clone();
        match out.walk_spin(start, [e1, e2, e3], which) {
            Ok(moves) => return Ok((out, moves)),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one start was tried"))
}

pub fn loop_shift(g: &InverseDualGraph, loop_occ: usize, edge_occ: usize) -> Result<(InverseDualGraph, Vec<NielsenMove>)> {
    let mut out = g.clone();
    let moves = out.shift_loop(loop_occ, edge_occ)?;
    Ok((out, moves))
}

/// Normal form of one component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaNormalForm {
    Octopus { base: usize, legs: usize, heads: usize },
    /// Reported with `left_sticks <= right_sticks`; `bases.0` carries the left sticks.
    Sweet { bases: (usize, usize), core: usize, left_sticks: usize, right_sticks: usize },
}

impl ThetaNormalForm {
    pub fn is_odd_octopus(&self) -> bool {
        matches!(*self, ThetaNormalForm::Octopus { legs, heads: 1, .. } if legs % 2 == 1)
    }

    /// The form without base labels, for comparing components up to relabelling.
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        match *self {
            ThetaNormalForm::Octopus { legs, heads, .. } => (0, legs, heads, 0),
            ThetaNormalForm::Sweet { core, left_sticks, right_sticks, .. } => (1, core, left_sticks, right_sticks),
        }
    }
}

impl fmt::Display for ThetaNormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ThetaNormalForm::Octopus { legs, heads, .. } => write!(f, "octopus(legs={legs}, heads={heads})"),
            ThetaNormalForm::Sweet { core, left_sticks, right_sticks, .. } => {
                write!(f, "sweet(core={core}, sticks={left_sticks}/{right_sticks})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentForm {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub form: ThetaNormalForm,
}

/// An even octopus with one head, or a sweet with a two-edge core and equal sides.
pub fn is_theta_solvable(nf: &ThetaNormalForm) -> bool {
    match *nf {
        ThetaNormalForm::Octopus { legs, heads, .. } => legs % 2 == 0 && heads == 1,
        ThetaNormalForm::Sweet { core, left_sticks, right_sticks, .. } => core == 2 && left_sticks == right_sticks,
    }
}

fn bfs_from(g: &InverseDualGraph, sources: &[usize]) -> BTreeMap<usize, (usize, Option<(usize, usize)>)> {
    let mut dist: BTreeMap<usize, (usize, Option<(usize, usize)>)> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for &s in sources {
        dist.insert(s, (0, None));
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[&v].0;
        let mut inc = g.incident(v);
        inc.sort_by_key(|&(occ, w)| (w, occ));
        for (occ, w) in inc {
            dist.entry(w).or_insert_with(|| {
                queue.push_back(w);
                (d + 1, Some((v, occ)))
            });
        }
    }
    dist
}

/// Shortest odd cycle without loops: vertices `v_0..v_2n` and edges `e_i = v_i v_{i+1}`.
fn shortest_odd_cycle(g: &InverseDualGraph, comp: &ThetaComponent) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut best: Option<(usize, usize, usize, usize, usize)> = None;
    for &r in &comp.vertices {
        let dist = bfs_from(g, &[r]);
        for &occ in &comp.edges {
            let e = g.edge(occ).expect("component edge");
            if e.is_loop() {
                continue;
            }
            let (du, dw) = (dist[&e.from].0, dist[&e.to].0);
            if du == dw {
                let len = 2 * du + 1;
                if best.is_none_or(|b| len < b.0) {
                    best = Some((len, r, e.from, e.to, occ));
                }
            }
        }
    }
    let (_, r, u, w, closing) = best?;
    let dist = bfs_from(g, &[r]);
    let path = |mut v: usize| {
        let mut verts = vec![v];
        let mut edges = Vec::new();
        while let Some((p, occ)) = dist[&v].1 {
            edges.push(occ);
            verts.push(p);
            v = p;
        }
        verts.reverse();
        edges.reverse();
        (verts, edges)
    };
    let (mut verts, mut edges) = path(u);
    let (wv, we) = path(w);
    edges.push(closing);
    verts.extend(wv.iter().rev().take(wv.len() - 1));
    edges.extend(we.iter().rev());
    Some((verts, edges))
}

fn octopus_form(g: &InverseDualGraph, comp: &ThetaComponent, base: usize) -> ThetaNormalForm {
    let heads = comp.edges.iter().filter(|&&o| g.edge(o).map(|e| e.is_loop()).unwrap_or(false)).count();
    ThetaNormalForm::Octopus { base, legs: comp.vertices.len() - 1, heads }
}

fn is_octopus_at(g: &InverseDualGraph, comp: &ThetaComponent, base: usize) -> bool {
    comp.edges.iter().all(|&o| {
        let e = g.edge(o).expect("component edge");
        e.touches(base)
    }) && comp.vertices.iter().all(|&v| v == base || g.degree(v) == 1)
}

fn normalize_octopus(g: &mut InverseDualGraph, comp: &ThetaComponent, moves: &mut Vec<NielsenMove>) -> Result<ThetaNormalForm> {
    let with_loop = comp.vertices.iter().copied().find(|&v| !g.loops_at(v).is_empty());
    let base = match with_loop {
        Some(v) => v,
        None => {
            let (mut verts, mut edges) = shortest_odd_cycle(g, comp).ok_or_else(|| Error::InvariantViolation("component has no odd cycle".into()))?;
            let len = verts.len();
            let n = len / 2;
            let m = (0..len).min_by_key(|&i| verts[i]).expect("cycle is non-empty");
            let shift = (m + len - n) % len;
            verts.rotate_left(shift);
            edges.rotate_left(shift);
            let middle = edges[2 * n];
            for k in 1..=n {
                moves.extend(g.walk_spin(verts[k], [edges[k - 1], middle, edges[2 * n - k]], 1)?);
            }
            verts[n]
        }
    };
    let head = g.loops_at(base)[0];
    loop {
        let dist = bfs_from(g, &[base]);
        let Some((&v2, &(_, Some((v1, g_occ))))) = dist.iter().find(|(_, &(d, _))| d == 2) else { break };
        let f = g.edges_between(base, v1)[0];
        moves.extend(g.walk_spin(base, [head, f, g_occ], 2)?);
        let _ = v2;
    }
    loop {
        let crowded = comp.vertices.iter().copied().find(|&v| v != base && g.degree(v) > 1);
        let Some(v) = crowded else { break };
        let f = g.edges_between(base, v)[0];
        if let Some(&l) = g.loops_at(v).first() {
            moves.extend(g.shift_loop(l, f)?);
            continue;
        }
        let (e, u) = g
            .incident(v)
            .into_iter()
            .find(|&(o, _)| o != f)
            .ok_or_else(|| Error::InvariantViolation("crowded vertex has a single edge".into()))?;
        if u == base {
            moves.extend(g.walk_spin(base, [f, e, head], 1)?);
        } else {
            let fu = g.edges_between(base, u)[0];
            moves.extend(g.walk_spin(base, [f, e, fu], 1)?);
        }
    }
    if !is_octopus_at(g, comp, base) {
        return violation("octopus procedure left the component out of shape");
    }
    Ok(octopus_form(g, comp, base))
}

fn sweet_at(g: &InverseDualGraph, comp: &ThetaComponent, p: usize, q: usize) -> Option<ThetaNormalForm> {
    let ok = comp.vertices.iter().all(|&v| {
        v == p || v == q || (g.degree(v) == 1 && g.incident(v).iter().all(|&(_, w)| w == p || w == q))
    });
    if !ok {
        return None;
    }
    let core = g.edges_between(p, q).len();
    let sticks = |b: usize| comp.vertices.iter().filter(|&&v| v != p && v != q && g.edges_between(b, v).len() == 1).count();
    let (sp, sq) = (sticks(p), sticks(q));
    Some(if sp <= sq {
        ThetaNormalForm::Sweet { bases: (p, q), core, left_sticks: sp, right_sticks: sq }
    } else {
        ThetaNormalForm::Sweet { bases: (q, p), core, left_sticks: sq, right_sticks: sp }
    })
}

fn normalize_sweet(g: &mut InverseDualGraph, comp: &ThetaComponent, moves: &mut Vec<NielsenMove>) -> Result<ThetaNormalForm> {
    for &o in &comp.edges {
        let e = g.edge(o)?;
        if let Some(form) = sweet_at(g, comp, e.from.min(e.to), e.from.max(e.to)) {
            return Ok(form);
        }
    }
    let v0 = comp.vertices[0];
    let (core, v1) = g.incident(v0).into_iter().min().expect("component vertex has an edge");
    loop {
        let dist = bfs_from(g, &[v0, v1]);
        let Some((_, &(_, Some((v2, g2))))) = dist.iter().find(|(_, &(d, _))| d == 2) else { break };
        let &(_, Some((bb, g1))) = &dist[&v2] else { return violation("distance-one vertex has no parent") };
        let ob = if bb == v0 { v1 } else { v0 };
        moves.extend(g.walk_spin(ob, [core, g1, g2], 2)?);
    }
    loop {
        let crowded = comp.vertices.iter().copied().find(|&v| v != v0 && v != v1 && g.degree(v) > 1);
        let Some(v) = crowded else { break };
        let (f, bb) = g
            .incident(v)
            .into_iter()
            .filter(|&(_, w)| w == v0 || w == v1)
            .min()
            .ok_or_else(|| Error::InvariantViolation("vertex is not next to a base".into()))?;
        let ob = if bb == v0 { v1 } else { v0 };
        let (e, u) = g
            .incident(v)
            .into_iter()
            .find(|&(o, _)| o != f)
            .ok_or_else(|| Error::InvariantViolation("crowded vertex has a single edge".into()))?;
        if u == bb {
            moves.extend(g.walk_spin(ob, [core, f, e], 2)?);
        } else {
            let fu = g.edges_between(ob, u)[0];
            moves.extend(g.walk_spin(bb, [f, e, fu], 1)?);
        }
    }
    sweet_at(g, comp, v0, v1).ok_or_else(|| Error::InvariantViolation("sweet procedure left the component out of shape".into()))
}

fn normalize_graph(g: &mut InverseDualGraph) -> Result<(Vec<ComponentForm>, Vec<NielsenMove>)> {
    let mut moves = Vec::new();
    let mut forms = Vec::new();
    for comp in g.components() {
        let form = if g.bipartition(&comp).is_some() {
            normalize_sweet(g, &comp, &mut moves)?
        } else {
            normalize_octopus(g, &comp, &mut moves)?
        };
        forms.push(ComponentForm { vertices: comp.vertices, edges: comp.edges, form });
    }
    Ok((forms, moves))
}

/// Simple moves taking every component to its octopus or sweet normal form.
pub fn theta_normal_form(g: &InverseDualGraph) -> Result<(InverseDualGraph, Vec<ComponentForm>, Vec<NielsenMove>)> {
    let mut out = g.clone();
    let (forms, moves) = normalize_graph(&mut out)?;
    Ok((out, forms, moves))
}

/// Inserts the sticks `x` at `p` and `y` at `q` into the cycle next to each other.
#[allow(clippy::too_many_arguments)]
fn insert_pair(
    g: &mut InverseDualGraph,
    cyc_v: &mut Vec<usize>,
    cyc_e: &mut Vec<usize>,
    p: usize,
    x: usize,
    mut q: usize,
    y: usize,
    moves: &mut Vec<NielsenMove>,
) -> Result<()> {
    let len = cyc_v.len();
    let idx = |cyc_v: &[usize], v: usize| cyc_v.iter().position(|&c| c == v).expect("vertex on cycle");
    loop {
        let ip = idx(cyc_v, p);
        if cyc_v[(ip + 1) % len] == q || cyc_v[(ip + len - 1) % len] == q {
            break;
        }
        let iq = idx(cyc_v, q);
        let q2 = cyc_v[(iq + 2) % len];
        moves.extend(g.walk_spin(q2, [cyc_e[(iq + 1) % len], cyc_e[iq], y], 2)?);
        q = q2;
    }
    let w = g.edge(x)?.other(p).expect("stick touches its anchor");
    let u = g.edge(y)?.other(q).expect("stick touches its anchor");
    let ip = idx(cyc_v, p);
    if cyc_v[(ip + 1) % len] == q {
        let e = cyc_e[ip];
        moves.extend(g.walk_spin(w, [x, e, y], 1)?);
        cyc_v.splice(ip + 1..ip + 1, [w, u]);
        cyc_e.splice(ip..ip + 1, [x, e, y]);
    } else {
        let iq = (ip + len - 1) % len;
        let e = cyc_e[iq];
        moves.extend(g.walk_spin(u, [y, e, x], 1)?);
        cyc_v.splice(iq + 1..iq + 1, [u, w]);
        cyc_e.splice(iq..iq + 1, [y, e, x]);
    }
    Ok(())
}

type Stick = (usize, usize, usize, usize);

/// Turns one solvable normal-form component into a directed cycle.
fn cycle_from_form(g: &mut InverseDualGraph, form: &ComponentForm, moves: &mut Vec<NielsenMove>) -> Result<()> {
    let (mut cyc_v, mut cyc_e, sticks): (Vec<usize>, Vec<usize>, Vec<Stick>) = match form.form {
        ThetaNormalForm::Octopus { base, legs, heads: 1 } if legs % 2 == 0 => {
            let head = g.loops_at(base)[0];
            if legs == 0 {
                (vec![base], vec![head], vec![])
            } else {
                let mut leg_list: Vec<(usize, usize)> =
                    g.incident(base).into_iter().filter(|&(o, _)| o != head).map(|(o, w)| (w, o)).collect();
                leg_list.sort_unstable();
                let (u1, x1) = leg_list[0];
                let (u2, x2) = leg_list[1];
                moves.extend(g.walk_spin(u1, [x1, head, x2], 1)?);
                let rest = leg_list[2..].chunks(2).map(|c| (base, c[0].1, base, c[1].1)).collect();
                (vec![base, u1, u2], vec![x1, head, x2], rest)
            }
        }
        ThetaNormalForm::Sweet { bases: (p, q), core: 2, left_sticks, right_sticks } if left_sticks == right_sticks => {
            let core = g.edges_between(p, q);
            let side = |b: usize| -> Vec<usize> {
                let mut s: Vec<(usize, usize)> =
                    g.incident(b).into_iter().filter(|&(_, w)| w != p && w != q).map(|(o, w)| (w, o)).collect();
                s.sort_unstable();
                s.into_iter().map(|(_, o)| o).collect()
            };
            let pairs = side(p).into_iter().zip(side(q)).map(|(x, y)| (p, x, q, y)).collect();
            (vec![p, q], core, pairs)
        }
        other => return not_applicable(format!("component in normal form {other} is not solvable")),
    };
    for (p, x, q, y) in sticks {
        insert_pair(g, &mut cyc_v, &mut cyc_e, p, x, q, y, moves)?;
    }
    let len = cyc_v.len();
    for i in 0..len {
        let (from, to) = (cyc_v[i], cyc_v[(i + 1) % len]);
        let e = g.edge(cyc_e[i])?;
        if (e.from, e.to) != (from, to) {
            moves.extend(g.invert(cyc_e[i])?);
        }
    }
    Ok(())
}

fn is_undirected_cycle(g: &InverseDualGraph, comp: &ThetaComponent) -> bool {
    comp.edges.len() == comp.vertices.len() && comp.vertices.iter().all(|&v| g.degree(v) == 2)
}

/// Orients a component that is already an undirected cycle.
fn orient_cycle(g: &mut InverseDualGraph, comp: &ThetaComponent, moves: &mut Vec<NielsenMove>) -> Result<()> {
    let start = comp.vertices[0];
    let mut v = start;
    let mut used: BTreeSet<usize> = BTreeSet::new();
    loop {
        let (occ, w) = g
            .incident(v)
            .into_iter()
            .find(|(o, _)| !used.contains(o))
            .ok_or_else(|| Error::InvariantViolation("cycle walk ran out of edges".into()))?;
        used.insert(occ);
        let e = g.edge(occ)?;
        if (e.from, e.to) != (v, w) {
            moves.extend(g.invert(occ)?);
        }
        v = w;
        if v == start && used.len() == comp.edges.len() {
            break;
        }
    }
    Ok(())
}

fn solve_cycles_graph(g: &mut InverseDualGraph) -> Result<Vec<NielsenMove>> {
    let mut moves = Vec::new();
    let mut pending = Vec::new();
    for comp in g.components() {
        if is_undirected_cycle(g, &comp) {
            orient_cycle(g, &comp, &mut moves)?;
        } else {
            pending.push(comp);
        }
    }
    for comp in pending {
        let form = if g.bipartition(&comp).is_some() {
            normalize_sweet(g, &comp, &mut moves)?
        } else {
            normalize_octopus(g, &comp, &mut moves)?
        };
        if !is_theta_solvable(&form) {
            return not_applicable(format!("component with vertices {:?} has normal form {form}", comp.vertices));
        }
        cycle_from_form(g, &ComponentForm { vertices: comp.vertices, edges: comp.edges, form }, &mut moves)?;
    }
    if !g.is_cycle_cover() {
        return violation("cycle construction did not produce disjoint directed cycles");
    }
    Ok(moves)
}

/// A recorder over a whole multiset that replays graph-level moves on real values and
/// checks the graph it predicted.
struct Driver {
    rec: Recorder,
    board: usize,
}

impl Driver {
    fn graph(&self) -> Result<InverseDualGraph> {
        theta_graph(&section(self.rec.ms(), self.board)?)
    }

    fn run<T>(&mut self, f: impl FnOnce(&mut InverseDualGraph) -> Result<(T, Vec<NielsenMove>)>) -> Result<T> {
        let mut g = self.graph()?;
        let (out, moves) = f(&mut g)?;
        for m in moves {
            self.rec.apply(m)?;
        }
        if self.graph()? != g {
            return violation("predicted inverse-dual graph differs from the replayed one");
        }
        Ok(out)
    }
}

/// Simple moves making a configuration whose components are all solvable left-right diagonal.
pub fn solve_cycles(c: &Configuration) -> Result<Transcript> {
    theta_graph(c)?;
    let mut d = Driver { rec: Recorder::new(&c.multiset()), board: c.board() };
    d.run(|g| Ok(((), solve_cycles_graph(g)?)))?;
    Ok(d.rec.finish())
}

/// Inversions making every column hold exactly one occurrence, when possible.
pub fn left_diagonal_orientation(g: &InverseDualGraph) -> Option<Vec<usize>> {
    let comps = g.components();
    let touched: usize = comps.iter().map(|c| c.vertices.len()).sum();
    if touched != g.vertex_count || comps.iter().any(|c| c.edges.len() != c.vertices.len()) {
        return None;
    }
    let mut flips = Vec::new();
    for comp in &comps {
        // strip leaves towards the unique cycle; each stripped edge points at its leaf
        let mut degree: BTreeMap<usize, usize> = comp.vertices.iter().map(|&v| (v, g.degree(v))).collect();
        let mut removed: BTreeSet<usize> = BTreeSet::new();
        let mut queue: VecDeque<usize> = degree.iter().filter(|(_, &d)| d == 1).map(|(&v, _)| v).collect();
        while let Some(v) = queue.pop_front() {
            let Some((occ, w)) = g.incident(v).into_iter().find(|(o, _)| !removed.contains(o)) else { continue };
            removed.insert(occ);
            let e = g.edge(occ).ok()?;
            if e.to != v {
                flips.push(occ);
            }
            *degree.get_mut(&v)? -= 1;
            let dw = degree.get_mut(&w)?;
            *dw -= 1;
            if *dw == 1 {
                queue.push_back(w);
            }
        }
        let rest: Vec<usize> = comp.edges.iter().copied().filter(|o| !removed.contains(o)).collect();
        let start = g.edge(*rest.first()?).ok()?.from;
        let mut v = start;
        let mut used: BTreeSet<usize> = BTreeSet::new();
        while used.len() < rest.len() {
            let (occ, w) = rest
                .iter()
                .filter(|o| !used.contains(o))
                .find_map(|&o| g.edge(o).ok()?.other(v).map(|w| (o, w)))?;
            used.insert(occ);
            let e = g.edge(occ).ok()?;
            if (e.from, e.to) != (v, w) {
                flips.push(occ);
            }
            v = w;
        }
    }
    flips.sort_unstable();
    Some(flips)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OctopusCase {
    /// The new edge stayed inside the odd octopus; one leg was cut off.
    CutLeg,
    /// The new edge joined two components; one head was cut off.
    MergeComponents,
}

/// Counter `#components + 2 * #odd octopuses` before each iteration and at the end.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OctopusRun {
    pub transcript: Transcript,
    pub counters: Vec<usize>,
    /// Component count alongside each counter value.
    pub components: Vec<usize>,
    /// Odd-octopus count alongside each counter value.
    pub odd_octopuses: Vec<usize>,
    pub cases: Vec<OctopusCase>,
    /// Occurrence left in `H` at the end.
    pub h_occ: usize,
}

fn odd_count(forms: &[ComponentForm]) -> usize {
    forms.iter().filter(|f| f.form.is_odd_octopus()).count()
}

fn counter(forms: &[ComponentForm]) -> usize {
    forms.len() + 2 * odd_count(forms)
}

/// Removes odd octopuses from a self-inverse board using one occurrence in `H`, then solves the cycles.
pub fn odd_octopus_algorithm(s: &GenMultiset, board: usize, h_occ: usize) -> Result<OctopusRun> {
    let st = s.setting().clone();
    if board >= st.atlas.boards.len() {
        return precondition(format!("board {board} does not exist"));
    }
    if !st.in_h(s.value(h_occ)?) {
        return precondition(format!("occurrence {h_occ} does not lie in H"));
    }
    let mut d = Driver { rec: Recorder::new(s), board };
    let g0 = d.graph()?;
    let flips = left_diagonal_orientation(&g0)
        .ok_or_else(|| Error::Precondition("configuration cannot be oriented to one element per column".into()))?;
    d.run(|g| {
        let mut moves = Vec::new();
        for o in flips {
            moves.extend(g.invert(o)?);
        }
        Ok(((), moves))
    })?;
    let mut forms = d.run(normalize_graph)?;
    if let Some(bad) = forms.iter().find(|f| !is_theta_solvable(&f.form) && !f.form.is_odd_octopus()) {
        return not_applicable(format!("component with normal form {} is neither solvable nor an odd octopus", bad.form));
    }
    let mut h = h_occ;
    let mut counters = vec![counter(&forms)];
    let mut components = vec![forms.len()];
    let mut odd_octopuses = vec![odd_count(&forms)];
    let mut cases = Vec::new();
    while let Some(odd) = forms
        .iter()
        .filter(|f| f.form.is_odd_octopus())
        .min_by_key(|f| f.vertices[0])
        .cloned()
    {
        let ThetaNormalForm::Octopus { base, .. } = odd.form else { unreachable!() };
        let x0 = d.graph()?.loops_at(base)[0];
        d.rec.lmul(h, x0, 1)?;
        let cell = st.cell(d.rec.val(h));
        if cell.board != board {
            return violation("head times H element left the board");
        }
        let case = if odd.vertices.contains(&cell.row) { OctopusCase::CutLeg } else { OctopusCase::MergeComponents };
        d.run(normalize_graph)?;
        let g = d.graph()?;
        let comp = g
            .components()
            .into_iter()
            .find(|c| c.edges.contains(&h))
            .ok_or_else(|| Error::InvariantViolation("new edge is in no component".into()))?;
        let base = comp
            .vertices
            .iter()
            .copied()
            .find(|&v| g.loops_at(v).len() == 2)
            .ok_or_else(|| Error::InvariantViolation("merged component is not a two-headed octopus".into()))?;
        let heads = g.loops_at(base);
        match case {
            OctopusCase::CutLeg => {
                let (x1, v1) = g
                    .incident(base)
                    .into_iter()
                    .filter(|&(_, w)| w != base)
                    .min_by_key(|&(o, w)| (w, o))
                    .ok_or_else(|| Error::InvariantViolation("odd octopus has no leg".into()))?;
                let l2 = heads[1];
                d.run(|g| {
                    let mut moves = g.shift_loop(l2, x1)?;
                    if g.edge(x1)?.from != v1 {
                        moves.extend(g.invert(x1)?);
                    }
                    Ok(((), moves))
                })?;
                d.rec.rmul(x1, l2, -1)?;
                h = x1;
            }
            OctopusCase::MergeComponents => {
                d.rec.rmul(heads[1], heads[0], -1)?;
                h = heads[1];
            }
        }
        if !st.in_h(d.rec.val(h)) {
            return violation("cut did not produce an element of H");
        }
        cases.push(case);
        forms = d.run(normalize_graph)?;
        let c = counter(&forms);
        let prev = *counters.last().expect("counter trace starts non-empty");
        if !(c + 1 == prev || c + 3 == prev) {
            return violation(format!("counter went from {prev} to {c}"));
        }
        counters.push(c);
        components.push(forms.len());
        odd_octopuses.push(odd_count(&forms));
    }
    d.run(|g| Ok(((), solve_cycles_graph(g)?)))?;
    Ok(OctopusRun { transcript: d.rec.finish(), counters, components, odd_octopuses, cases, h_occ: h })
}
