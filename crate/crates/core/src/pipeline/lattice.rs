//! Routing of a 2-local X/Z Hamiltonian onto the square lattice with subdivision, fork and
//! crossing gadgets.
//!
//! Without usable geometry every site is placed on row 0, twelve columns apart. Each
//! 2-local term becomes a wire: out of its endpoints through one of four ports (straight
//! up, straight down, or a four-cell stub left or right that then turns up or down), along
//! its own horizontal track, and back. Tracks and vertical legs sit on multiples of four,
//! so wires only meet at perpendicular crossings whose diagonal corners are free. Sites of
//! degree above four are first isolated by one subdivision per incident term and then
//! reduced by rounds of forks that pair terms with the same letter there.
//!
//! Rounds then subdivide every wire segment at an anchor (a neighbour of a crossing) or at
//! its midpoint until each segment is either a lattice edge or spans exactly one crossing.
//! One crossing round replaces each pair of spanning segments by a star on the crossing
//! cell, and a last subdivision round routes the four diagonal compensation terms of each
//! star through its outer corners.
//!
//! Input with geometry whose every 2-local term joins lattice neighbours, at most one term
//! per pair, is instead scaled by two and routed with a single subdivision round.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gadgets::{crossing, fork, subdivide_term, PerturbativeGadget};
use crate::hamcore::{Hamiltonian, Pauli, PauliTerm, Term};

pub type Cell = (i64, i64);

const NODE_PITCH: i64 = 12;
const STUB: i64 = 4;
const TRACK_PITCH: i64 = 4;
const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundKind {
    Isolation,
    Fork,
    Subdivision,
    Crossing,
    Corner,
}

impl RoundKind {
    pub fn name(self) -> &'static str {
        match self {
            RoundKind::Isolation => "isolation",
            RoundKind::Fork => "fork",
            RoundKind::Subdivision => "subdivision",
            RoundKind::Crossing => "crossing",
            RoundKind::Corner => "corner",
        }
    }
}

/// Gadgets to run side by side on the current register; `passthrough` holds every other
/// term of the current Hamiltonian.
pub struct Round {
    pub kind: RoundKind,
    pub components: Vec<PerturbativeGadget>,
    pub passthrough: Hamiltonian,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RoutingStats {
    pub sparse: bool,
    pub width: i64,
    pub height: i64,
    pub sites: usize,
    pub wires: usize,
    pub crossings: usize,
    pub forks: usize,
    pub subdivisions: usize,
    pub rounds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Port {
    Up,
    Down,
    Left,
    Right,
}

struct Wire {
    cells: Vec<Cell>,
    anchors: BTreeSet<usize>,
}

#[derive(Clone)]
struct Seg {
    wire: usize,
    i: usize,
    j: usize,
    term: PauliTerm,
}

struct Crossing {
    cell: Cell,
    /// (wire, index) of the horizontal and the vertical pass.
    h: (usize, usize),
    v: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Isolate,
    Fork,
    Layout,
    Subdivide,
    Cross,
    Corner,
    Done,
}

pub struct Router {
    h: Hamiltonian,
    stage: Stage,
    roots: Vec<usize>,
    pos: Vec<Option<Cell>>,
    wires: Vec<Wire>,
    crossings: Vec<Crossing>,
    segs: Vec<Seg>,
    rest: Vec<PauliTerm>,
    /// Site pairs the next simulator must carry as wire segments.
    pending: HashMap<(usize, usize), (usize, usize, usize)>,
    next_kind: Option<RoundKind>,
    stats: RoutingStats,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn adjacent(a: Cell, b: Cell) -> bool {
    (a.0 - b.0).abs() + (a.1 - b.1).abs() == 1
}

fn failure(msg: impl Into<String>) -> Error {
    Error::RoutingFailure(msg.into())
}

fn pauli_form(h: &Hamiltonian) -> Result<Vec<PauliTerm>> {
    Ok(h.to_pauli(0.0)?
        .pauli_terms()
        .expect("Pauli form")
        .into_iter()
        .cloned()
        .collect())
}

fn as_hamiltonian(n: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Hamiltonian {
    let mut h = Hamiltonian::qubits(n);
    for t in terms {
        h.push(t);
    }
    h
}

/// Straight cells from `a` (exclusive) to `b` (inclusive); `a` and `b` share a row or column.
fn line(a: Cell, b: Cell, out: &mut Vec<Cell>) {
    let (dr, dc) = ((b.0 - a.0).signum(), (b.1 - a.1).signum());
    let mut c = a;
    while c != b {
        c = (c.0 + dr, c.1 + dc);
        out.push(c);
    }
}

fn path(waypoints: &[Cell]) -> Vec<Cell> {
    let mut out = vec![waypoints[0]];
    for w in waypoints.windows(2) {
        line(w[0], w[1], &mut out);
    }
    out
}

/// Splits edges into two classes so that each vertex of degree ≤ 4 has at most three edges
/// in either class: alternate colours along Euler circuits of the graph made even by a
/// dummy vertex joined to every odd vertex.
fn split_halves(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let dummy = n;
    let mut all: Vec<(usize, usize)> = edges.to_vec();
    let mut deg = vec![0usize; n + 1];
    for &(a, b) in edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    for (v, &d) in deg.iter().enumerate().take(n) {
        if d % 2 == 1 {
            all.push((v, dummy));
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![vec![]; n + 1];
    for (e, &(a, b)) in all.iter().enumerate() {
        adj[a].push(e);
        adj[b].push(e);
    }
    let mut used = vec![false; all.len()];
    let mut next = vec![0usize; n + 1];
    let mut up = vec![true; all.len()];
    for start in std::iter::once(dummy).chain(0..n) {
        let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
        let mut circuit = vec![];
        while let Some(&(v, e_in)) = stack.last() {
            while next[v] < adj[v].len() && used[adj[v][next[v]]] {
                next[v] += 1;
            }
            if next[v] < adj[v].len() {
                let e = adj[v][next[v]];
                used[e] = true;
                let (a, b) = all[e];
                stack.push((if a == v { b } else { a }, Some(e)));
            } else {
                stack.pop();
                if let Some(e) = e_in {
                    circuit.push(e);
                }
            }
        }
        for (k, &e) in circuit.iter().enumerate() {
            up[e] = k % 2 == 0;
        }
    }
    up.truncate(edges.len());
    up
}

impl Router {
    /// Requires a qubit Hamiltonian whose Pauli form has only I, X and Z letters and
    /// terms of locality ≤ 2.
    pub fn new(h: &Hamiltonian) -> Result<Router> {
        let terms = pauli_form(h)?;
        if let Some(t) = terms.iter().find(|t| t.locality() > 2 || t.y_count() > 0) {
            return Err(Error::UnsupportedFamily(format!(
                "lattice routing needs 2-local X/Z terms, got {}",
                t.label()
            )));
        }
        let mut r = Router {
            h: as_hamiltonian(h.n, terms),
            stage: Stage::Isolate,
            roots: vec![],
            pos: vec![None; h.n],
            wires: vec![],
            crossings: vec![],
            segs: vec![],
            rest: vec![],
            pending: HashMap::new(),
            next_kind: None,
            stats: RoutingStats::default(),
        };
        if let Some(g) = &h.geometry {
            if r.sparse_layout(g)? {
                r.stats.sparse = true;
                r.stage = Stage::Subdivide;
            }
        }
        Ok(r)
    }

    pub fn n(&self) -> usize {
        self.h.n
    }

    pub fn stats(&self) -> &RoutingStats {
        &self.stats
    }

    fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.h.n];
        for t in self.h.pauli_terms().expect("Pauli form") {
            if t.locality() == 2 {
                deg[t.sites[0]] += 1;
                deg[t.sites[1]] += 1;
            }
        }
        deg
    }

    /// Lattice positions ×2 when every coupling is a unit lattice step with one term per
    /// pair; false leaves the general layout to run.
    fn sparse_layout(&mut self, g: &BTreeMap<usize, (i64, i64)>) -> Result<bool> {
        let n = self.h.n;
        let mut cells = vec![];
        for s in 0..n {
            match g.get(&s) {
                Some(&(r, c)) => cells.push((2 * r, 2 * c)),
                None => return Ok(false),
            }
        }
        if cells.iter().collect::<BTreeSet<_>>().len() != n {
            return Ok(false);
        }
        let terms: Vec<PauliTerm> = self
            .h
            .pauli_terms()
            .expect("Pauli form")
            .into_iter()
            .cloned()
            .collect();
        let mut pairs = BTreeSet::new();
        for t in terms.iter().filter(|t| t.locality() == 2) {
            let (a, b) = (cells[t.sites[0]], cells[t.sites[1]]);
            if (a.0 - b.0).abs() + (a.1 - b.1).abs() != 2 || (a.0 != b.0 && a.1 != b.1) {
                return Ok(false);
            }
            if !pairs.insert(key(t.sites[0], t.sites[1])) {
                return Ok(false);
            }
        }
        self.pos = cells.iter().map(|&c| Some(c)).collect();
        for t in terms {
            if t.locality() == 2 {
                let w = self.wires.len();
                self.wires.push(Wire {
                    cells: path(&[cells[t.sites[0]], cells[t.sites[1]]]),
                    anchors: BTreeSet::new(),
                });
                self.segs.push(Seg {
                    wire: w,
                    i: 0,
                    j: 2,
                    term: t,
                });
            } else {
                self.rest.push(t);
            }
        }
        self.stats.wires = self.wires.len();
        Ok(true)
    }

    /// The next round of gadgets, or `None` when every coupling is a lattice edge.
    pub fn next_round(&mut self) -> Result<Option<Round>> {
        loop {
            let round = match self.stage {
                Stage::Isolate => self.isolate(),
                Stage::Fork => self.fork_round()?,
                Stage::Layout => {
                    self.layout()?;
                    self.stage = Stage::Subdivide;
                    continue;
                }
                Stage::Subdivide | Stage::Corner => self.subdivide_round()?,
                Stage::Cross => self.cross_round()?,
                Stage::Done => return Ok(None),
            };
            if let Some(r) = round {
                self.next_kind = Some(r.kind);
                self.stats.rounds += 1;
                return Ok(Some(r));
            }
        }
    }

    fn fresh_site(&mut self, cell: Option<Cell>) -> usize {
        self.pos.push(cell);
        self.pos.len() - 1
    }

    fn isolate(&mut self) -> Option<Round> {
        let deg = self.degrees();
        let high: Vec<usize> = (0..self.h.n).filter(|&s| deg[s] > MAX_DEGREE).collect();
        if high.is_empty() {
            self.stage = Stage::Layout;
            return None;
        }
        let n = self.h.n;
        let mut components = vec![];
        let mut pass = vec![];
        for t in self
            .h
            .pauli_terms()
            .expect("Pauli form")
            .into_iter()
            .cloned()
            .collect::<Vec<_>>()
        {
            if t.locality() == 2 && t.sites.iter().any(|s| high.contains(s)) {
                let m = self.fresh_site(None);
                components.push(subdivide_term(&t, n, m).expect("2-local X/Z term"));
                self.stats.subdivisions += 1;
            } else {
                pass.push(t);
            }
        }
        self.roots = high;
        self.stage = Stage::Fork;
        Some(Round {
            kind: RoundKind::Isolation,
            components,
            passthrough: as_hamiltonian(n, pass),
        })
    }

    fn fork_round(&mut self) -> Result<Option<Round>> {
        let deg = self.degrees();
        let busy: Vec<usize> = self
            .roots
            .iter()
            .copied()
            .filter(|&r| deg[r] > MAX_DEGREE)
            .collect();
        if busy.is_empty() {
            self.stage = Stage::Layout;
            return Ok(None);
        }
        let n = self.h.n;
        let terms: Vec<PauliTerm> = self
            .h
            .pauli_terms()
            .expect("Pauli form")
            .into_iter()
            .cloned()
            .collect();
        let mut used = vec![false; terms.len()];
        let mut components = vec![];
        for &root in &busy {
            for letter in [Pauli::X, Pauli::Z] {
                let group: Vec<usize> = (0..terms.len())
                    .filter(|&k| {
                        !used[k] && terms[k].locality() == 2 && terms[k].letter_at(root) == letter
                    })
                    .collect();
                for pair in group.chunks_exact(2) {
                    let m = self.fresh_site(None);
                    components.push(fork(&terms[pair[0]], &terms[pair[1]], n, m)?);
                    used[pair[0]] = true;
                    used[pair[1]] = true;
                    self.stats.forks += 1;
                }
            }
        }
        if components.is_empty() {
            return Err(failure(
                "no pair of terms with a common letter left to fork",
            ));
        }
        let pass = terms
            .iter()
            .zip(&used)
            .filter(|(_, &u)| !u)
            .map(|(t, _)| t.clone());
        Ok(Some(Round {
            kind: RoundKind::Fork,
            components,
            passthrough: as_hamiltonian(n, pass),
        }))
    }

    fn layout(&mut self) -> Result<()> {
        let n = self.h.n;
        let deg = self.degrees();
        if let Some(s) = (0..n).find(|&s| deg[s] > MAX_DEGREE) {
            return Err(failure(format!(
                "site {s} keeps degree {} after forking",
                deg[s]
            )));
        }
        self.pos = (0..n)
            .map(|k| Some((0, NODE_PITCH * k as i64 + STUB)))
            .collect();
        let terms: Vec<PauliTerm> = self
            .h
            .pauli_terms()
            .expect("Pauli form")
            .into_iter()
            .cloned()
            .collect();
        let (two, rest): (Vec<PauliTerm>, Vec<PauliTerm>) =
            terms.into_iter().partition(|t| t.locality() == 2);
        self.rest = rest;
        let edges: Vec<(usize, usize)> = two.iter().map(|t| (t.sites[0], t.sites[1])).collect();
        let up = split_halves(n, &edges);
        let mut free: Vec<Vec<Port>> = vec![vec![Port::Up, Port::Down, Port::Left, Port::Right]; n];
        let mut take = |s: usize, is_up: bool| -> Result<Port> {
            let prefer = if is_up { Port::Up } else { Port::Down };
            let k = free[s]
                .iter()
                .position(|&p| p == prefer)
                .or_else(|| {
                    free[s]
                        .iter()
                        .position(|&p| p == Port::Left || p == Port::Right)
                })
                .ok_or_else(|| failure(format!("site {s} has no free port")))?;
            Ok(free[s].remove(k))
        };
        let mut tracks = [0i64; 2];
        for (e, t) in two.into_iter().enumerate() {
            let (a, b) = edges[e];
            let sign = if up[e] { 1 } else { -1 };
            let (pa, pb) = (take(a, up[e])?, take(b, up[e])?);
            tracks[usize::from(!up[e])] += 1;
            let row = sign * TRACK_PITCH * tracks[usize::from(!up[e])];
            let leg = |s: usize, p: Port| -> Cell {
                let (r, c) = self.pos[s].expect("placed");
                match p {
                    Port::Up | Port::Down => (r, c),
                    Port::Left => (r, c - STUB),
                    Port::Right => (r, c + STUB),
                }
            };
            let (la, lb) = (leg(a, pa), leg(b, pb));
            let (ca, cb) = (self.pos[a].expect("placed"), self.pos[b].expect("placed"));
            let cells = path(&[ca, la, (row, la.1), (row, lb.1), lb, cb]);
            let mut dedup: Vec<Cell> = vec![];
            for c in cells {
                if dedup.last() != Some(&c) {
                    dedup.push(c);
                }
            }
            let len = dedup.len() - 1;
            self.wires.push(Wire {
                cells: dedup,
                anchors: BTreeSet::new(),
            });
            self.segs.push(Seg {
                wire: e,
                i: 0,
                j: len,
                term: t,
            });
        }
        self.stats.wires = self.wires.len();
        self.find_crossings()
    }

    fn find_crossings(&mut self) -> Result<()> {
        let nodes: BTreeSet<Cell> = self.pos.iter().flatten().copied().collect();
        let mut occ: BTreeMap<Cell, Vec<(usize, usize)>> = BTreeMap::new();
        for (w, wire) in self.wires.iter().enumerate() {
            for (k, &c) in wire
                .cells
                .iter()
                .enumerate()
                .take(wire.cells.len() - 1)
                .skip(1)
            {
                if nodes.contains(&c) {
                    return Err(failure(format!("wire {w} runs through a site at {c:?}")));
                }
                occ.entry(c).or_default().push((w, k));
            }
        }
        let mut corners = BTreeSet::new();
        for (&cell, users) in &occ {
            match users.len() {
                1 => continue,
                2 => {}
                k => return Err(failure(format!("{k} wires share cell {cell:?}"))),
            }
            let horizontal = |&(w, k): &(usize, usize)| {
                let c = &self.wires[w].cells;
                c[k - 1].0 == cell.0 && c[k + 1].0 == cell.0
            };
            let vertical = |&(w, k): &(usize, usize)| {
                let c = &self.wires[w].cells;
                c[k - 1].1 == cell.1 && c[k + 1].1 == cell.1
            };
            let (h, v) = if horizontal(&users[0]) && vertical(&users[1]) {
                (users[0], users[1])
            } else if horizontal(&users[1]) && vertical(&users[0]) {
                (users[1], users[0])
            } else {
                return Err(failure(format!("wires meet at {cell:?} without crossing")));
            };
            for dr in [-1, 1] {
                for dc in [-1, 1] {
                    let corner = (cell.0 + dr, cell.1 + dc);
                    if occ.contains_key(&corner)
                        || nodes.contains(&corner)
                        || !corners.insert(corner)
                    {
                        return Err(failure(format!(
                            "corner {corner:?} of the crossing at {cell:?} is taken"
                        )));
                    }
                }
            }
            self.crossings.push(Crossing { cell, h, v });
        }
        for x in &self.crossings {
            for (w, k) in [x.h, x.v] {
                let len = self.wires[w].cells.len() - 1;
                for a in [k - 1, k + 1] {
                    if a == 0
                        || a == len
                        || occ
                            .get(&self.wires[w].cells[a])
                            .is_some_and(|u| u.len() > 1)
                    {
                        return Err(failure(format!(
                            "crossing at {:?} is too close to another feature",
                            x.cell
                        )));
                    }
                    self.wires[w].anchors.insert(a);
                }
            }
        }
        self.stats.crossings = self.crossings.len();
        Ok(())
    }

    fn is_crossing(&self, w: usize, k: usize) -> bool {
        self.crossings
            .iter()
            .any(|x| x.h == (w, k) || x.v == (w, k))
    }

    fn site_at(&self, cell: Cell) -> Option<usize> {
        self.pos.iter().position(|&p| p == Some(cell))
    }

    fn subdivide_round(&mut self) -> Result<Option<Round>> {
        let n = self.h.n;
        let corner = self.stage == Stage::Corner;
        let mut components = vec![];
        let mut pass: Vec<PauliTerm> = self.rest.clone();
        self.pending.clear();
        let segs = std::mem::take(&mut self.segs);
        let mut kept = vec![];
        for s in segs {
            let mid = (s.i + s.j) as f64 / 2.0;
            let split = self.wires[s.wire]
                .anchors
                .range(s.i + 1..s.j)
                .copied()
                .min_by(|a, b| (*a as f64 - mid).abs().total_cmp(&(*b as f64 - mid).abs()))
                .or_else(|| {
                    (s.j - s.i >= 2 && !self.is_crossing(s.wire, s.i + 1) || s.j - s.i > 2)
                        .then_some((s.i + s.j) / 2)
                });
            let (a, b) = (s.term.sites[0], s.term.sites[1]);
            match split {
                Some(k) => {
                    let cells = &self.wires[s.wire].cells;
                    let (cell, ci, cj) = (cells[k], cells[s.i], cells[s.j]);
                    let (si, sj) = (
                        self.site_at(ci).expect("placed"),
                        self.site_at(cj).expect("placed"),
                    );
                    let m = self.fresh_site(Some(cell));
                    components.push(subdivide_term(&s.term, n, m)?);
                    self.stats.subdivisions += 1;
                    self.pending.insert(key(si, m), (s.wire, s.i, k));
                    self.pending.insert(key(m, sj), (s.wire, k, s.j));
                }
                None => {
                    self.pending.insert(key(a, b), (s.wire, s.i, s.j));
                    pass.push(s.term.clone());
                    kept.push(s);
                }
            }
        }
        if components.is_empty() {
            self.segs = kept;
            self.pending.clear();
            self.stage = if corner { Stage::Done } else { Stage::Cross };
            return Ok(None);
        }
        let kind = if corner {
            RoundKind::Corner
        } else {
            RoundKind::Subdivision
        };
        Ok(Some(Round {
            kind,
            components,
            passthrough: as_hamiltonian(n, pass),
        }))
    }

    fn cross_round(&mut self) -> Result<Option<Round>> {
        if self.segs.is_empty() {
            self.stage = Stage::Done;
            return Ok(None);
        }
        let n = self.h.n;
        let mut components = vec![];
        self.pending.clear();
        let mut segs = std::mem::take(&mut self.segs);
        let mut new_wires = vec![];
        for x in &self.crossings {
            let find = |(w, k): (usize, usize), segs: &[Seg]| {
                segs.iter()
                    .position(|s| s.wire == w && s.i + 1 == k && s.j == k + 1)
            };
            let (Some(ih), Some(iv)) = (find(x.h, &segs), find(x.v, &segs)) else {
                return Err(failure(format!("crossing at {:?} is not ready", x.cell)));
            };
            let (th, tv) = (segs[ih].term.clone(), segs[iv].term.clone());
            let m = self.pos.len();
            components.push(crossing(&th, &tv, n, m)?);
            self.pos.push(Some(x.cell));
            for &a in &th.sites {
                for &b in &tv.sites {
                    let (pa, pb) = (self.pos[a].expect("placed"), self.pos[b].expect("placed"));
                    let corner = if (pa.0, pb.1) != x.cell {
                        (pa.0, pb.1)
                    } else {
                        (pb.0, pa.1)
                    };
                    let w = self.wires.len() + new_wires.len();
                    new_wires.push(Wire {
                        cells: vec![pa, corner, pb],
                        anchors: BTreeSet::new(),
                    });
                    self.pending.insert(key(a, b), (w, 0, 2));
                }
            }
            for idx in [ih.max(iv), ih.min(iv)] {
                segs.remove(idx);
            }
        }
        if let Some(s) = segs.first() {
            return Err(failure(format!(
                "segment {} is neither a lattice edge nor at a crossing",
                s.term.label()
            )));
        }
        self.wires.extend(new_wires);
        self.stage = Stage::Corner;
        let pass = as_hamiltonian(n, self.rest.clone());
        Ok(Some(Round {
            kind: RoundKind::Crossing,
            components,
            passthrough: pass,
        }))
    }

    /// Takes the simulator built from the last round's merged gadget.
    pub fn absorb(&mut self, sim: &Hamiltonian) -> Result<()> {
        let terms = pauli_form(sim)?;
        self.h = as_hamiltonian(sim.n, terms.clone());
        self.pos.resize(sim.n, None);
        if matches!(
            self.next_kind.take(),
            Some(RoundKind::Isolation | RoundKind::Fork)
        ) {
            return Ok(());
        }
        self.rest.clear();
        self.segs.clear();
        for t in terms {
            if t.locality() < 2 {
                self.rest.push(t);
                continue;
            }
            if t.locality() > 2 {
                return Err(failure(format!(
                    "round produced the {}-local term {}",
                    t.locality(),
                    t.label()
                )));
            }
            let (a, b) = (t.sites[0], t.sites[1]);
            let (pa, pb) = match (self.pos[a], self.pos[b]) {
                (Some(pa), Some(pb)) => (pa, pb),
                _ => {
                    return Err(failure(format!(
                        "term {} touches an unplaced site",
                        t.label()
                    )))
                }
            };
            if adjacent(pa, pb) {
                self.rest.push(t);
                continue;
            }
            let Some(&(wire, i, j)) = self.pending.get(&key(a, b)) else {
                return Err(failure(format!(
                    "term {} joins non-adjacent cells off every wire",
                    t.label()
                )));
            };
            self.segs.push(Seg {
                wire,
                i,
                j,
                term: t,
            });
        }
        Ok(())
    }

    /// The routed Hamiltonian with lattice coordinates shifted to start at (0, 0).
    pub fn finish(mut self) -> Result<(Hamiltonian, RoutingStats)> {
        if self.stage != Stage::Done {
            return Err(failure("routing has rounds left"));
        }
        let placed: Vec<Cell> = self
            .pos
            .iter()
            .map(|p| p.ok_or_else(|| failure("unplaced site")))
            .collect::<Result<_>>()?;
        if placed.iter().collect::<BTreeSet<_>>().len() != placed.len() {
            return Err(failure("two sites share a cell"));
        }
        let r0 = placed.iter().map(|c| c.0).min().unwrap_or(0);
        let c0 = placed.iter().map(|c| c.1).min().unwrap_or(0);
        let geometry: BTreeMap<usize, (i64, i64)> = placed
            .iter()
            .enumerate()
            .map(|(s, &(r, c))| (s, (r - r0, c - c0)))
            .collect();
        self.stats.height = geometry.values().map(|c| c.0).max().unwrap_or(0) + 1;
        self.stats.width = geometry.values().map(|c| c.1).max().unwrap_or(0) + 1;
        self.stats.sites = placed.len();
        let mut h = self.h;
        h.geometry = Some(geometry);
        if let Some(e) = lattice_violations(&h).first() {
            return Err(failure(format!("term {e} is not a lattice edge")));
        }
        Ok((h, self.stats))
    }
}

/// Indices of terms that act on more than two sites or on two sites that are not lattice
/// neighbours in `h.geometry`. Every 2-local term is a violation when there is no geometry.
pub fn lattice_violations(h: &Hamiltonian) -> Vec<usize> {
    let geo = h.geometry.as_ref();
    h.terms
        .iter()
        .enumerate()
        .filter(|(_, t): &(usize, &Term)| {
            let s = t.support();
            match s.len() {
                0 | 1 => false,
                2 => match geo.and_then(|g| Some((g.get(&s[0])?, g.get(&s[1])?))) {
                    Some((&a, &b)) => !adjacent(a, b),
                    None => true,
                },
                _ => true,
            }
        })
        .map(|(i, _)| i)
        .collect()
}

/// log10 of the Δ that the 16×(perturbative scaling) rule gives a round of `m` gadgets acting on
/// terms of magnitude ≤ 10^`log_w`, with ε and η shared evenly between the gadgets. A
/// gadget on a term of weight w has ‖H2‖ ≤ 4(w/2)^{1/2} and ‖H1‖ ≤ 4w.
pub fn model_log10_delta(log_w: f64, m: usize, eps: f64, eta: f64) -> f64 {
    let m = m.max(1) as f64;
    let lw = log_w.max(0.0);
    let log_lambda = 4f64.log10() + lw.max(0.5 * (lw - 2f64.log10()));
    let a = 6.0 * log_lambda + 2.0 * (m / eps).log10();
    let b = 2.0 * log_lambda + 2.0 * (m / eta).log10();
    16f64.log10() + a.max(b) + (1.0 + 10f64.powf(-(a - b).abs())).log10()
}

/// Magnitude of the routed terms after a round at Δ = 10^`log_delta`: √(Δw/2).
pub fn model_next_log10_weight(log_w: f64, log_delta: f64) -> f64 {
    log_w.max(0.5 * (log_delta + log_w - 2f64.log10()))
}
