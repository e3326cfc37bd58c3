//! Zero-field Ising partition functions on the rectangular lattice with
//! both boundary columns clamped, in polynomial time.
//!
//! Each symmetric table is written as `w(σ, σ') = c (1 + t σσ')` with
//! `σ = ±1`. Clamped spins are gauged to `+1` (flipping the sign of `t` on
//! their edges), edges between two clamped spins become a constant factor,
//! and the clamped spins are tied into one cluster by equality edges
//! (`t = 1`) down both boundary columns plus an arch over the top row. The
//! cluster then takes either sign, so the clamped sum is half the free sum
//! over this planar graph. The free sum is `Π c · 2^V` times the weighted
//! count of even subgraphs, which is a Pfaffian of a Kasteleyn-oriented
//! Fisher decoration, eliminated one lattice column at a time.

use std::collections::VecDeque;

use crate::circuit::Circuit;
use crate::compiler::circuit_to_edge_model;
use crate::error::{Error, Result};
use crate::lattice::SiteKind;
use crate::matrix::{C64, ONE, ZERO};
use crate::spin_models::{BoundaryConfig, EdgeModel, EdgeWeightTable};

use super::pfaffian::eliminate_pairs;

/// Tolerance for `w_00 = w_11` and `w_01 = w_10`, relative to the table scale.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// `|w_same + w_diff|` below this (relative) makes `t` blow up.
pub const SINGULAR_TOL: f64 = 1e-12;
/// Relative nudge applied to `w_same` at a singular table.
pub const SINGULAR_PERTURBATION: f64 = 1e-8;
/// Gate-family tolerance for [`simulate_xz_circuit`].
pub const XZ_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanarOptions {
    /// Nudge singular tables instead of failing with `SingularTable`.
    pub perturb_singular: bool,
}

impl Default for PlanarOptions {
    fn default() -> Self {
        Self { perturb_singular: true }
    }
}

pub fn partition_planar_ising(em: &EdgeModel, left: &BoundaryConfig, right: &BoundaryConfig) -> Result<C64> {
    partition_planar_ising_with(em, left, right, &PlanarOptions::default())
}

pub fn partition_planar_ising_with(
    em: &EdgeModel,
    left: &BoundaryConfig,
    right: &BoundaryConfig,
    opts: &PlanarOptions,
) -> Result<C64> {
    if em.q() != 2 {
        return Err(Error::NotIsingForm(format!("Ising spins are binary, model has q = {}", em.q())));
    }
    let (rows, cols) = (em.rows(), em.columns());
    left.validate(rows, 2)?;
    right.validate(rows, 2)?;
    for (k, table) in em.weights().iter().enumerate() {
        check_symmetric(table, k)?;
    }
    let fixed = |r: usize, c: usize| -> Option<usize> {
        if c == 1 {
            Some(right.values()[r - 1])
        } else if c == cols {
            Some(left.values()[r - 1])
        } else {
            None
        }
    };
    if cols == 1 {
        if left != right {
            return Ok(ZERO);
        }
        return Ok((1..rows).map(|r| em.vertical(1, r).get(right.values()[r - 1], right.values()[r])).product());
    }

    let vertex = |r: usize, c: usize| (c - 1) * rows + (r - 1);
    let gauge = |r: usize, c: usize| match fixed(r, c) {
        Some(1) => -1.0,
        _ => 1.0,
    };
    let mut prefactor = ONE;
    let mut edges = Vec::new();
    for site in em.lattice().sites() {
        let table = &em.weights()[site.id];
        let ((r1, c1), (r2, c2), s1, s2) = match site.kind {
            SiteKind::Vertical { column } => ((site.wires[0], column), (site.wires[1], column), SOUTH, NORTH),
            SiteKind::Horizontal { column } => ((site.wires[0], column), (site.wires[0], column + 1), EAST, WEST),
            SiteKind::Vertex => unreachable!("rectangular lattices have no vertex sites"),
        };
        if let (Some(a), Some(b)) = (fixed(r1, c1), fixed(r2, c2)) {
            prefactor *= table.get(a, b);
            continue;
        }
        let Some(Coupling { c, t }) = coupling(table, site.id, opts)? else {
            return Ok(ZERO);
        };
        prefactor *= c;
        edges.push(AugEdge {
            u: vertex(r1, c1),
            su: s1,
            v: vertex(r2, c2),
            sv: s2,
            t: t * (gauge(r1, c1) * gauge(r2, c2)),
        });
    }
    if cols == 2 {
        // every edge joins two clamped spins
        return Ok(prefactor);
    }
    let half = C64::new(0.5, 0.0);
    for c in [1, cols] {
        for r in 1..rows {
            edges.push(AugEdge { u: vertex(r, c), su: SOUTH, v: vertex(r + 1, c), sv: NORTH, t: ONE });
            prefactor *= half;
        }
    }
    edges.push(AugEdge { u: vertex(1, 1), su: NORTH, v: vertex(1, cols), sv: NORTH, t: ONE });
    prefactor *= half;

    let sum = even_subgraph_sum(rows, cols, &edges)?;
    // 2^V for the free spins, then 1/2 for the cluster's global sign
    let free_factor = C64::new(2f64.powi((rows * cols) as i32 - 1), 0.0);
    Ok(prefactor * free_factor * sum)
}

fn check_symmetric(table: &EdgeWeightTable, id: usize) -> Result<()> {
    let scale = table.matrix().max_abs().max(1.0);
    let same = (table.get(0, 0) - table.get(1, 1)).norm();
    let diff = (table.get(0, 1) - table.get(1, 0)).norm();
    if same > SYMMETRY_TOL * scale || diff > SYMMETRY_TOL * scale {
        return Err(Error::NotIsingForm(format!("table of site {id} is not symmetric under a global flip")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Coupling {
    c: C64,
    t: C64,
}

/// `(c, t)` with `w(σ, σ') = c (1 + t σσ')`, or `None` for an all-zero table.
fn coupling(table: &EdgeWeightTable, id: usize, opts: &PlanarOptions) -> Result<Option<Coupling>> {
    let (mut same, diff) = (table.get(0, 0), table.get(0, 1));
    let scale = same.norm().max(diff.norm());
    if scale == 0.0 {
        return Ok(None);
    }
    if (same + diff).norm() <= SINGULAR_TOL * scale {
        if !opts.perturb_singular {
            return Err(Error::SingularTable(format!("site {id} has w_same ≈ -w_diff")));
        }
        log::warn!("site {id}: w_same ≈ -w_diff, perturbing w_same by a relative {SINGULAR_PERTURBATION:e}; result is approximate");
        same += C64::new(SINGULAR_PERTURBATION * scale, 0.0);
    }
    let sum = same + diff;
    Ok(Some(Coupling { c: sum * 0.5, t: (same - diff) / sum }))
}

const EAST: usize = 0;
const NORTH: usize = 1;
const WEST: usize = 2;
const SOUTH: usize = 3;
const DIRECTIONS: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];

/// Edge of the augmented lattice graph; `su`/`sv` are the compass slots it
/// occupies at each end.
#[derive(Debug, Clone, Copy)]
struct AugEdge {
    u: usize,
    su: usize,
    v: usize,
    sv: usize,
    t: C64,
}

/// Fisher-decorated graph with a straight-line planar drawing.
#[derive(Debug, Default)]
struct Decorated {
    pos: Vec<(f64, f64)>,
    column: Vec<usize>,
    edges: Vec<(usize, usize, C64)>,
    /// The matching used when no street is occupied.
    base_matching: Vec<(usize, usize)>,
}

impl Decorated {
    fn node(&mut self, at: (f64, f64), column: usize) -> usize {
        self.pos.push(at);
        self.column.push(column);
        self.pos.len() - 1
    }

    fn edge(&mut self, u: usize, v: usize, w: C64) {
        self.edges.push((u, v, w));
    }

    fn len(&self) -> usize {
        self.pos.len()
    }

    /// Gadget with one internal node joined to three terminals, plus a chord
    /// between the first two. Every even subset of used terminals leaves a
    /// uniquely matchable remainder.
    fn triad(&mut self, centre: (f64, f64), column: usize, t: [usize; 3]) {
        let x = self.node(centre, column);
        for &ti in &t {
            self.edge(x, ti, ONE);
        }
        self.edge(t[0], t[1], ONE);
        self.base_matching.push((t[0], t[1]));
        self.base_matching.push((x, t[2]));
    }
}

/// Weighted count of even subgraphs `Σ_{E'} Π_{e ∈ E'} t_e`.
fn even_subgraph_sum(rows: usize, cols: usize, edges: &[AugEdge]) -> Result<C64> {
    let nv = rows * cols;
    let mut used = vec![[false; 4]; nv];
    for e in edges {
        used[e.u][e.su] = true;
        used[e.v][e.sv] = true;
    }
    let mut g = Decorated::default();
    let mut terminal = vec![[usize::MAX; 4]; nv];
    for v in 0..nv {
        let (r, c) = (v % rows + 1, v / rows + 1);
        let centre = (c as f64, -(r as f64));
        let at = |dx: f64, dy: f64| (centre.0 + dx, centre.1 + dy);
        let slots: Vec<usize> = (0..4).filter(|&s| used[v][s]).collect();
        for &s in &slots {
            let (dx, dy) = DIRECTIONS[s];
            terminal[v][s] = g.node(at(0.35 * dx, 0.35 * dy), c);
        }
        let t: Vec<usize> = slots.iter().map(|&s| terminal[v][s]).collect();
        match slots.len() {
            0 => {}
            1 => {
                let x = g.node(centre, c);
                g.edge(t[0], x, ONE);
                g.base_matching.push((t[0], x));
            }
            2 => {
                g.edge(t[0], t[1], ONE);
                g.base_matching.push((t[0], t[1]));
            }
            3 => {
                // chord between two terminals a quarter turn apart
                let i = (0..3).find(|&i| (slots[(i + 1) % 3] + 4 - slots[i]) % 4 == 1).expect("three of four slots");
                g.triad(centre, c, [t[i], t[(i + 1) % 3], t[(i + 2) % 3]]);
            }
            _ => {
                // split into (E, N, s1) and (W, S, s2) joined by an equality street
                let s1 = g.node(at(0.03, -0.03), c);
                let s2 = g.node(at(-0.03, 0.03), c);
                g.triad(at(0.15, 0.15), c, [t[EAST], t[NORTH], s1]);
                g.triad(at(-0.15, -0.15), c, [t[WEST], t[SOUTH], s2]);
                g.edge(s1, s2, ONE);
            }
        }
    }
    for e in edges {
        g.edge(terminal[e.u][e.su], terminal[e.v][e.sv], e.t);
    }
    let orientation = kasteleyn_orientation(&g)?;
    let sign = base_matching_sign(&g, &orientation);
    Ok(sign * blocked_pfaffian(&g, &orientation, cols))
}

/// Orients every edge so that each face but one has an odd number of edges
/// pointing along its boundary walk.
fn kasteleyn_orientation(g: &Decorated) -> Result<Vec<bool>> {
    let (nn, ne) = (g.len(), g.edges.len());
    let tail = |d: usize| if d.is_multiple_of(2) { g.edges[d / 2].0 } else { g.edges[d / 2].1 };
    let head = |d: usize| tail(d ^ 1);
    let mut rotation: Vec<Vec<usize>> = vec![Vec::new(); nn];
    for d in 0..2 * ne {
        rotation[tail(d)].push(d);
    }
    let angle = |d: usize| {
        let (a, b) = (g.pos[tail(d)], g.pos[head(d)]);
        (b.1 - a.1).atan2(b.0 - a.0)
    };
    let mut slot = vec![0; 2 * ne];
    for darts in &mut rotation {
        darts.sort_by(|&x, &y| angle(x).total_cmp(&angle(y)));
        for (i, &d) in darts.iter().enumerate() {
            slot[d] = i;
        }
    }
    let next = |d: usize| {
        let back = d ^ 1;
        let around = &rotation[tail(back)];
        around[(slot[back] + around.len() - 1) % around.len()]
    };
    let mut face_of = vec![usize::MAX; 2 * ne];
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for start in 0..2 * ne {
        if face_of[start] != usize::MAX {
            continue;
        }
        let mut walk = Vec::new();
        let mut d = start;
        while face_of[d] == usize::MAX {
            face_of[d] = faces.len();
            walk.push(d);
            d = next(d);
        }
        faces.push(walk);
    }
    if faces.len() + nn != ne + 2 {
        return Err(Error::NumericalBreakdown(format!(
            "decorated graph drawing is not planar ({} faces, {nn} nodes, {ne} edges)",
            faces.len()
        )));
    }

    // spanning tree, oriented away from node 0
    let mut orient: Vec<Option<bool>> = vec![None; ne];
    let mut seen = vec![false; nn];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &d in &rotation[u] {
            let v = head(d);
            if !seen[v] {
                seen[v] = true;
                orient[d / 2] = Some(d % 2 == 0);
                queue.push_back(v);
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::NumericalBreakdown("decorated graph is disconnected".into()));
    }

    // the remaining edges form a spanning tree of the dual; fix them leaf-first
    let mut dual: Vec<Vec<(usize, usize)>> = vec![Vec::new(); faces.len()];
    for e in (0..ne).filter(|&e| orient[e].is_none()) {
        let (f1, f2) = (face_of[2 * e], face_of[2 * e + 1]);
        dual[f1].push((f2, e));
        dual[f2].push((f1, e));
    }
    let mut parent = vec![usize::MAX; faces.len()];
    let mut order = vec![0];
    let mut visited = vec![false; faces.len()];
    visited[0] = true;
    let mut i = 0;
    while i < order.len() {
        let f = order[i];
        for &(h, e) in &dual[f] {
            if !visited[h] {
                visited[h] = true;
                parent[h] = e;
                order.push(h);
            }
        }
        i += 1;
    }
    if order.len() != faces.len() {
        return Err(Error::NumericalBreakdown("dual of the decorated graph is disconnected".into()));
    }
    for &f in order.iter().skip(1).rev() {
        let pe = parent[f];
        let mut along = 0;
        let mut parent_dart = usize::MAX;
        for &d in &faces[f] {
            if d / 2 == pe {
                parent_dart = d;
            } else if orient[d / 2] == Some(d % 2 == 0) {
                along += 1;
            }
        }
        let forward = parent_dart % 2 == 0;
        orient[pe] = Some(if along % 2 == 0 { forward } else { !forward });
    }
    Ok(orient.into_iter().map(|o| o.expect("every edge oriented")).collect())
}

/// Sign relating the Pfaffian to the unsigned matching sum, read off the
/// matching that uses no street.
fn base_matching_sign(g: &Decorated, orientation: &[bool]) -> f64 {
    let mut seq = Vec::with_capacity(g.len());
    let mut sign = 1.0;
    for &(a, b) in &g.base_matching {
        let (i, j) = (a.min(b), a.max(b));
        seq.push(i);
        seq.push(j);
        let k = g
            .edges
            .iter()
            .position(|&(u, v, _)| (u, v) == (a, b) || (u, v) == (b, a))
            .expect("base matching uses gadget edges");
        let (u, _, _) = g.edges[k];
        // K[i][j] = +w when the edge points from i to j
        let from_i = (u == i) == orientation[k];
        if !from_i {
            sign = -sign;
        }
    }
    debug_assert_eq!(seq.len(), g.len());
    sign * permutation_sign(&seq)
}

fn permutation_sign(p: &[usize]) -> f64 {
    let mut seen = vec![false; p.len()];
    let mut transpositions = 0;
    for start in 0..p.len() {
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = p[i];
            len += 1;
        }
        if len > 0 {
            transpositions += len - 1;
        }
    }
    if transpositions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Pfaffian of the Kasteleyn matrix, eliminating the nodes of each lattice
/// column as soon as all their neighbours have been loaded.
fn blocked_pfaffian(g: &Decorated, orientation: &[bool], cols: usize) -> C64 {
    let nn = g.len();
    let mut adj: Vec<Vec<(usize, C64)>> = vec![Vec::new(); nn];
    for (k, &(u, v, w)) in g.edges.iter().enumerate() {
        let val = if orientation[k] { w } else { -w };
        adj[u].push((v, val));
        adj[v].push((u, -val));
    }
    let ready: Vec<usize> =
        (0..nn).map(|u| adj[u].iter().map(|&(v, _)| g.column[v]).fold(g.column[u], usize::max)).collect();

    let mut pf = ONE;
    let mut active: Vec<usize> = Vec::new();
    let mut block: Vec<C64> = Vec::new();
    let mut pos = vec![usize::MAX; nn];
    let mut next = 0;
    for c in 1..=cols {
        let old = active.len();
        while next < nn && g.column[next] == c {
            active.push(next);
            next += 1;
        }
        let size = active.len();
        let mut grown = vec![ZERO; size * size];
        for i in 0..old {
            grown[i * size..i * size + old].copy_from_slice(&block[i * old..(i + 1) * old]);
        }
        for (i, &u) in active.iter().enumerate() {
            pos[u] = i;
        }
        for i in old..size {
            for &(v, val) in &adj[active[i]] {
                let j = pos[v];
                if j != usize::MAX {
                    grown[i * size + j] = val;
                    grown[j * size + i] = -val;
                }
            }
        }
        // stable partition: nodes whose neighbourhood is complete go first
        let done_here = |u: usize| c == cols || ready[u] <= c;
        let mut order: Vec<usize> = (0..size).filter(|&i| done_here(active[i])).collect();
        let limit = order.len();
        let mut inversions = 0usize;
        let mut kept = 0usize;
        for &a in &active[..size] {
            if done_here(a) {
                inversions += kept;
            } else {
                kept += 1;
            }
        }
        order.extend((0..size).filter(|&i| !done_here(active[i])));
        if inversions % 2 == 1 {
            pf = -pf;
        }
        let mut work = vec![ZERO; size * size];
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                work[a * size + b] = grown[i * size + j];
            }
        }
        let mut labels: Vec<usize> = order.iter().map(|&i| active[i]).collect();
        let (eliminated, _) = eliminate_pairs(&mut work, size, limit, &mut pf, &mut labels);
        for &u in &labels[..eliminated] {
            pos[u] = usize::MAX;
        }
        active = labels[eliminated..].to_vec();
        let rest = active.len();
        block = vec![ZERO; rest * rest];
        for i in 0..rest {
            let src = (eliminated + i) * size + eliminated;
            block[i * rest..(i + 1) * rest].copy_from_slice(&work[src..src + rest]);
        }
    }
    if active.is_empty() {
        pf
    } else {
        ZERO
    }
}

/// `⟨L| C |R⟩` for circuits of `exp(iα σx)` and nearest-neighbour
/// `exp(iβ σz⊗σz)` gates, through the planar Ising engine.
pub fn simulate_xz_circuit(circuit: &Circuit, left: &BoundaryConfig, right: &BoundaryConfig) -> Result<C64> {
    if circuit.q() != 2 {
        return Err(Error::NotXZCircuit(format!("qubit circuit expected, got q = {}", circuit.q())));
    }
    for g in circuit.gates() {
        let m = g.matrix();
        let near = |a: C64, b: C64| (a - b).norm() <= XZ_TOL;
        let ok = match g.arity() {
            1 => {
                near(m[(0, 0)], m[(1, 1)])
                    && near(m[(0, 1)], m[(1, 0)])
                    && m[(0, 0)].im.abs() <= XZ_TOL
                    && m[(0, 1)].re.abs() <= XZ_TOL
                    && (m[(0, 0)].norm_sqr() + m[(0, 1)].norm_sqr() - 1.0).abs() <= XZ_TOL
            }
            2 => {
                let d: Vec<C64> = (0..4).map(|k| m[(k, k)]).collect();
                let diagonal = (0..4).all(|i| (0..4).all(|j| i == j || m[(i, j)].norm() <= XZ_TOL));
                g.wires()[0].abs_diff(g.wires()[1]) == 1
                    && diagonal
                    && near(d[0], d[3])
                    && near(d[1], d[2])
                    && near(d[1], d[0].conj())
                    && (d[0].norm() - 1.0).abs() <= XZ_TOL
            }
            _ => false,
        };
        if !ok {
            return Err(Error::NotXZCircuit(format!("gate on wires {:?} is not an x or zz rotation", g.wires())));
        }
    }
    let em = circuit_to_edge_model(circuit, 1)?;
    partition_planar_ising(&em, left, right)
}
