//! Vertex and edge models with complex Boltzmann weights.
//!
//! A vertex model puts a `q`-state spin on every wire segment between two
//! sites and a weight tensor on every site. The tensor of a `k`-wire site is
//! a `q^k × q^k` matrix `w = Σ w^{out}_{in} |out⟩⟨in|`: rows index the spins
//! on the left (output) side, columns the spins on the right (input) side,
//! and the lowest wire is the most significant digit.
//!
//! An edge model puts spins on the vertices of a rectangular `N × M` grid
//! and a `q × q` table on every edge. Column 1 is the right boundary
//! (clamped to `R`), column `M` the left boundary (clamped to `L`).

use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeKind, SiteKind};
use crate::matrix::{Matrix, C64, ONE, ZERO};

/// Default tolerance for the eight-vertex zero pattern.
pub const PATTERN_TOL: f64 = 1e-12;
/// Default cap on internal spins (qubit equivalents) for exhaustive sums.
pub const DEFAULT_MAX_BRUTE_SPINS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightTensor {
    q: usize,
    arity: usize,
    matrix: Matrix,
}

impl WeightTensor {
    pub fn new(q: usize, arity: usize, matrix: Matrix) -> Result<Self> {
        if q < 2 || arity == 0 {
            return Err(Error::ShapeMismatch(format!("q = {q}, arity = {arity}")));
        }
        let dim = q.pow(arity as u32);
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::ShapeMismatch(format!(
                "tensor of arity {arity} over q = {q} needs a {dim}×{dim} matrix, got {}×{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidInput("non-finite weight".into()));
        }
        Ok(Self { q, arity, matrix })
    }

    pub fn identity(q: usize, arity: usize) -> Self {
        Self { q, arity, matrix: Matrix::identity(q.pow(arity as u32)) }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    /// `w^{ij}_{kl}` for a two-wire binary tensor.
    pub fn entry2(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.matrix[(i * self.q + j, k * self.q + l)]
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { q: self.q, arity: self.arity, matrix: self.matrix.scale(s) }
    }
}

/// The eight entries `(w^{00}_{00}, w^{00}_{11}, w^{01}_{01}, w^{01}_{10},
/// w^{10}_{01}, w^{10}_{10}, w^{11}_{00}, w^{11}_{11})`.
pub type EightVertexWeights = [C64; 8];
/// The six entries `(w^{00}_{00}, w^{01}_{01}, w^{01}_{10}, w^{10}_{01},
/// w^{10}_{10}, w^{11}_{11})`.
pub type SixVertexWeights = [C64; 6];

pub fn eight_vertex_tensor(w: &EightVertexWeights) -> WeightTensor {
    let mut m = Matrix::zeros(4, 4);
    m[(0, 0)] = w[0];
    m[(0, 3)] = w[1];
    m[(1, 1)] = w[2];
    m[(1, 2)] = w[3];
    m[(2, 1)] = w[4];
    m[(2, 2)] = w[5];
    m[(3, 0)] = w[6];
    m[(3, 3)] = w[7];
    WeightTensor { q: 2, arity: 2, matrix: m }
}

pub fn six_vertex_tensor(w: &SixVertexWeights) -> WeightTensor {
    eight_vertex_tensor(&[w[0], ZERO, w[1], w[2], w[3], w[4], ZERO, w[5]])
}

/// Positions that must vanish in an eight-vertex tensor.
fn off_pattern(i: usize, j: usize) -> bool {
    // parity of row and column index must agree
    (i.count_ones() + j.count_ones()) % 2 == 1
}

/// Whether a binary two-wire tensor has the eight-vertex zero pattern.
pub fn has_eight_vertex_form(m: &Matrix, tol: f64) -> bool {
    if m.rows() != 4 || m.cols() != 4 {
        return false;
    }
    (0..4).all(|i| (0..4).all(|j| !off_pattern(i, j) || m[(i, j)].norm() <= tol))
}

/// Whether the corner entries `w^{00}_{11}`, `w^{11}_{00}` also vanish.
pub fn has_six_vertex_form(m: &Matrix, tol: f64) -> bool {
    has_eight_vertex_form(m, tol) && m[(0, 3)].norm() <= tol && m[(3, 0)].norm() <= tol
}

/// The two sides of the free-fermion condition: the determinants of the even
/// block `{00, 11}` and of the odd block `{01, 10}`.
pub fn free_fermion_sides(m: &Matrix) -> (C64, C64) {
    let even = m[(0, 0)] * m[(3, 3)] - m[(0, 3)] * m[(3, 0)];
    let odd = m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)];
    (even, odd)
}

/// `|det(even block) - det(odd block)| ≤ tol` for an eight-vertex tensor.
pub fn free_fermion_condition(tensor: &WeightTensor, tol: f64) -> Result<bool> {
    if tensor.q != 2 || tensor.arity != 2 {
        return Err(Error::NotEightVertexForm(format!(
            "expected a binary two-wire tensor, got q = {}, arity = {}",
            tensor.q, tensor.arity
        )));
    }
    if !has_eight_vertex_form(&tensor.matrix, PATTERN_TOL) {
        return Err(Error::NotEightVertexForm("non-zero entry outside the pattern".into()));
    }
    let (lhs, rhs) = free_fermion_sides(&tensor.matrix);
    Ok((lhs - rhs).norm() <= tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeightTable {
    q: usize,
    matrix: Matrix,
}

impl EdgeWeightTable {
    pub fn new(q: usize, matrix: Matrix) -> Result<Self> {
        if q < 2 || matrix.rows() != q || matrix.cols() != q {
            return Err(Error::ShapeMismatch(format!(
                "edge table over q = {q} must be {q}×{q}, got {}×{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidInput("non-finite weight".into()));
        }
        Ok(Self { q, matrix })
    }

    pub fn ones(q: usize) -> Self {
        let mut m = Matrix::zeros(q, q);
        for i in 0..q {
            for j in 0..q {
                m[(i, j)] = ONE;
            }
        }
        Self { q, matrix: m }
    }

    /// Table of an edge that forces equal spins.
    pub fn identity(q: usize) -> Self {
        Self { q, matrix: Matrix::identity(q) }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { q: self.q, matrix: self.matrix.scale(s) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryConfig(Vec<usize>);

impl BoundaryConfig {
    pub fn new(values: Vec<usize>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// `(0, 1, 0, 1, …)` of length `n`.
    pub fn staggered(n: usize) -> Self {
        Self((0..n).map(|i| i % 2).collect())
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self, wires: usize, q: usize) -> Result<()> {
        if self.0.len() != wires {
            return Err(Error::InvalidBoundary(format!(
                "expected {wires} values, got {}",
                self.0.len()
            )));
        }
        if let Some(v) = self.0.iter().find(|&&v| v >= q) {
            return Err(Error::InvalidBoundary(format!("value {v} out of range for q = {q}")));
        }
        Ok(())
    }

    /// Basis index with wire 1 as the most significant digit.
    pub fn basis_index(&self, q: usize) -> usize {
        self.0.iter().fold(0, |acc, &v| acc * q + v)
    }

    pub fn flipped(&self, q: usize) -> Self {
        Self(self.0.iter().map(|&v| q - 1 - v).collect())
    }
}

impl From<Vec<usize>> for BoundaryConfig {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexModel {
    lattice: Lattice,
    q: usize,
    site_weights: Vec<WeightTensor>,
}

impl VertexModel {
    pub fn new(lattice: Lattice, q: usize, site_weights: Vec<WeightTensor>) -> Result<Self> {
        if lattice.kind() == LatticeKind::Rectangular {
            return Err(Error::InvalidInput("vertex models live on tilted lattices".into()));
        }
        if site_weights.len() != lattice.site_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} tensors for {} sites",
                site_weights.len(),
                lattice.site_count()
            )));
        }
        for (site, w) in lattice.sites().iter().zip(&site_weights) {
            if w.q != q || w.arity != site.wires.len() {
                return Err(Error::ShapeMismatch(format!(
                    "site {} spans {} wires over q = {q}, tensor has arity {} over q = {}",
                    site.id,
                    site.wires.len(),
                    w.arity,
                    w.q
                )));
            }
        }
        Ok(Self { lattice, q, site_weights })
    }

    /// Same tensor on every site.
    pub fn uniform(lattice: Lattice, tensor: WeightTensor) -> Result<Self> {
        let q = tensor.q;
        let n = lattice.site_count();
        Self::new(lattice, q, vec![tensor; n])
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn site_weights(&self) -> &[WeightTensor] {
        &self.site_weights
    }

    pub fn site_weights_mut(&mut self) -> &mut [WeightTensor] {
        &mut self.site_weights
    }
}

fn expand<T: Clone>(items: &[T], sites: usize) -> Result<Vec<T>> {
    match items.len() {
        1 => Ok(vec![items[0].clone(); sites]),
        n if n == sites => Ok(items.to_vec()),
        n => Err(Error::ShapeMismatch(format!("{n} weight tuples for {sites} sites"))),
    }
}

/// Eight-vertex model on a tilted square lattice; one tuple per site, or a
/// single tuple applied uniformly.
pub fn eight_vertex_model(lattice: Lattice, weights: &[EightVertexWeights]) -> Result<VertexModel> {
    if lattice.kind() != LatticeKind::TiltedSquare {
        return Err(Error::InvalidInput("eight-vertex models need a tilted square lattice".into()));
    }
    let tuples = expand(weights, lattice.site_count())?;
    VertexModel::new(lattice, 2, tuples.iter().map(eight_vertex_tensor).collect())
}

pub fn six_vertex_model(lattice: Lattice, weights: &[SixVertexWeights]) -> Result<VertexModel> {
    if lattice.kind() != LatticeKind::TiltedSquare {
        return Err(Error::InvalidInput("six-vertex models need a tilted square lattice".into()));
    }
    let tuples = expand(weights, lattice.site_count())?;
    VertexModel::new(lattice, 2, tuples.iter().map(six_vertex_tensor).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeModel {
    lattice: Lattice,
    q: usize,
    /// Indexed by lattice site id; horizontal tables are `[left][right]`,
    /// vertical tables `[upper][lower]`.
    weights: Vec<EdgeWeightTable>,
}

impl EdgeModel {
    pub fn new(lattice: Lattice, q: usize, weights: Vec<EdgeWeightTable>) -> Result<Self> {
        if lattice.kind() != LatticeKind::Rectangular {
            return Err(Error::InvalidInput("edge models live on rectangular lattices".into()));
        }
        if weights.len() != lattice.site_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} tables for {} edges",
                weights.len(),
                lattice.site_count()
            )));
        }
        if let Some(t) = weights.iter().find(|t| t.q != q) {
            return Err(Error::ShapeMismatch(format!("table over q = {} in a q = {q} model", t.q)));
        }
        Ok(Self { lattice, q, weights })
    }

    pub fn uniform(lattice: Lattice, table: EdgeWeightTable) -> Result<Self> {
        let q = table.q;
        let n = lattice.site_count();
        Self::new(lattice, q, vec![table; n])
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn weights(&self) -> &[EdgeWeightTable] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [EdgeWeightTable] {
        &mut self.weights
    }

    pub fn rows(&self) -> usize {
        self.lattice.wires()
    }

    pub fn columns(&self) -> usize {
        self.lattice.layers()
    }

    pub fn vertical(&self, column: usize, row: usize) -> &EdgeWeightTable {
        &self.weights[self.lattice.vertical_site(column, row).expect("vertical edge in range")]
    }

    pub fn horizontal(&self, column: usize, row: usize) -> &EdgeWeightTable {
        &self.weights[self.lattice.horizontal_site(column, row).expect("horizontal edge in range")]
    }
}

/// Ising-type edge model: `w_same = e^{βJ}`, `w_diff = e^{-βJ}` on every
/// edge, from the energy `-J` for aligned and `+J` for anti-aligned spins.
pub fn ising_edge_model(lattice: Lattice, beta: C64, couplings: &[C64]) -> Result<EdgeModel> {
    if lattice.kind() != LatticeKind::Rectangular {
        return Err(Error::InvalidInput("Ising edge models need a rectangular lattice".into()));
    }
    let couplings = expand(couplings, lattice.site_count())?;
    let tables = couplings.iter().map(|&j| ising_table(beta * j)).collect();
    EdgeModel::new(lattice, 2, tables)
}

/// `[[e^{K}, e^{-K}], [e^{-K}, e^{K}]]`.
pub fn ising_table(k: C64) -> EdgeWeightTable {
    let (same, diff) = (k.exp(), (-k).exp());
    EdgeWeightTable {
        q: 2,
        matrix: Matrix::from_rows(vec![vec![same, diff], vec![diff, same]]).unwrap(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpinModel {
    Vertex(VertexModel),
    Edge(EdgeModel),
}

impl SpinModel {
    pub fn lattice(&self) -> &Lattice {
        match self {
            SpinModel::Vertex(m) => m.lattice(),
            SpinModel::Edge(m) => m.lattice(),
        }
    }

    pub fn q(&self) -> usize {
        match self {
            SpinModel::Vertex(m) => m.q(),
            SpinModel::Edge(m) => m.q(),
        }
    }
}

impl From<VertexModel> for SpinModel {
    fn from(m: VertexModel) -> Self {
        SpinModel::Vertex(m)
    }
}

impl From<EdgeModel> for SpinModel {
    fn from(m: EdgeModel) -> Self {
        SpinModel::Edge(m)
    }
}

/// One weight factor of a configuration sum: `table[(row spins, col spins)]`.
struct Factor<'a> {
    matrix: &'a Matrix,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

/// Spin variables of an exhaustive sum, either clamped or free.
struct ConfigurationSum<'a> {
    q: usize,
    /// `Some(v)` for boundary spins.
    clamp: Vec<Option<usize>>,
    factors: Vec<Factor<'a>>,
    /// Product of factors that touch no free spin; zero when clamps conflict.
    constant: C64,
}

impl ConfigurationSum<'_> {
    fn free_count(&self) -> usize {
        self.clamp.iter().filter(|c| c.is_none()).count()
    }

    fn evaluate(&self, max_spins: usize) -> Result<C64> {
        let free: Vec<usize> = (0..self.clamp.len()).filter(|&v| self.clamp[v].is_none()).collect();
        let bits = free.len() as f64 * (self.q as f64).log2();
        if bits > max_spins as f64 + 1e-9 {
            return Err(Error::TooLarge(format!(
                "{} internal spins over q = {} exceed the cap of {max_spins} qubit equivalents",
                free.len(),
                self.q
            )));
        }
        if self.constant == ZERO {
            return Ok(ZERO);
        }
        let mut spins: Vec<usize> = self.clamp.iter().map(|c| c.unwrap_or(0)).collect();
        let mut total = ZERO;
        loop {
            let mut w = self.constant;
            for f in &self.factors {
                let r = f.rows.iter().fold(0, |acc, &v| acc * self.q + spins[v]);
                let c = f.cols.iter().fold(0, |acc, &v| acc * self.q + spins[v]);
                w *= f.matrix[(r, c)];
                if w == ZERO {
                    break;
                }
            }
            total += w;
            // odometer over free spins, last free spin fastest
            let mut pos = free.len();
            loop {
                if pos == 0 {
                    return Ok(total);
                }
                pos -= 1;
                let v = free[pos];
                spins[v] += 1;
                if spins[v] < self.q {
                    break;
                }
                spins[v] = 0;
            }
        }
    }
}

fn vertex_sum<'a>(
    model: &'a VertexModel,
    left: &BoundaryConfig,
    right: &BoundaryConfig,
) -> ConfigurationSum<'a> {
    let n = model.lattice.wires();
    // variable 0..n are the right-boundary segments
    let mut clamp: Vec<Option<usize>> = right.values().iter().map(|&v| Some(v)).collect();
    let mut current: Vec<usize> = (0..n).collect();
    let mut factors = Vec::with_capacity(model.site_weights.len());
    for (site, tensor) in model.lattice.sites().iter().zip(&model.site_weights) {
        let cols: Vec<usize> = site.wires.iter().map(|&w| current[w - 1]).collect();
        // a diagonal site keeps its spins, so no new variables are needed
        match diagonal_kind(&tensor.matrix) {
            Some(true) => continue,
            Some(false) => {
                factors.push(Factor { matrix: &tensor.matrix, rows: cols.clone(), cols });
                continue;
            }
            None => {}
        }
        let rows: Vec<usize> = site
            .wires
            .iter()
            .map(|&w| {
                clamp.push(None);
                current[w - 1] = clamp.len() - 1;
                clamp.len() - 1
            })
            .collect();
        factors.push(Factor { matrix: &tensor.matrix, rows, cols });
    }
    let mut constant = ONE;
    for (w, &v) in current.iter().enumerate() {
        let l = left.values()[w];
        match clamp[v] {
            Some(r) if r != l => constant = ZERO,
            _ => clamp[v] = Some(l),
        }
    }
    ConfigurationSum { q: model.q, clamp, factors, constant }
}

fn edge_sum<'a>(
    model: &'a EdgeModel,
    left: &BoundaryConfig,
    right: &BoundaryConfig,
) -> ConfigurationSum<'a> {
    let (n, m) = (model.rows(), model.columns());
    let grid = |row: usize, column: usize| (column - 1) * n + (row - 1);
    // spins joined by a diagonal horizontal table share one variable
    let mut parent: Vec<usize> = (0..n * m).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for site in model.lattice.sites() {
        if let SiteKind::Horizontal { column } = site.kind {
            if diagonal_kind(&model.weights[site.id].matrix).is_some() {
                let r = site.wires[0];
                let (a, b) = (find(&mut parent, grid(r, column + 1)), find(&mut parent, grid(r, column)));
                parent[a] = b;
            }
        }
    }
    let var: Vec<usize> = (0..n * m).map(|v| find(&mut parent, v)).collect();
    let mut clamp = vec![None; n * m];
    let mut constant = ONE;
    let mut pin = |v: usize, value: usize, clamp: &mut Vec<Option<usize>>| match clamp[v] {
        Some(x) if x != value => constant = ZERO,
        _ => clamp[v] = Some(value),
    };
    for r in 1..=n {
        pin(var[grid(r, 1)], right.values()[r - 1], &mut clamp);
        pin(var[grid(r, m)], left.values()[r - 1], &mut clamp);
    }
    // merged-away grid points are not variables of the sum
    let mut live = vec![false; n * m];
    for &v in &var {
        live[v] = true;
    }
    let mut factors = Vec::with_capacity(model.weights.len());
    for site in model.lattice.sites() {
        let matrix = &model.weights[site.id].matrix;
        match site.kind {
            SiteKind::Vertical { column } => {
                if matrix.as_slice().iter().all(|&x| x == ONE) {
                    continue;
                }
                factors.push(Factor {
                    matrix,
                    rows: vec![var[grid(site.wires[0], column)]],
                    cols: vec![var[grid(site.wires[1], column)]],
                })
            }
            SiteKind::Horizontal { column } => {
                if diagonal_kind(matrix) == Some(true) {
                    continue;
                }
                factors.push(Factor {
                    matrix,
                    rows: vec![var[grid(site.wires[0], column + 1)]],
                    cols: vec![var[grid(site.wires[0], column)]],
                })
            }
            SiteKind::Vertex => unreachable!("rectangular lattices have no vertex sites"),
        }
    }
    for (v, c) in clamp.iter_mut().enumerate() {
        if !live[v] {
            *c = Some(0);
        }
    }
    ConfigurationSum { q: model.q, clamp, factors, constant }
}

/// `Some(true)` for the identity, `Some(false)` for any other diagonal
/// matrix, `None` otherwise. Exact comparisons: only structural zeros count.
fn diagonal_kind(m: &Matrix) -> Option<bool> {
    let n = m.rows();
    let mut identity = true;
    for i in 0..n {
        for j in 0..n {
            let x = m[(i, j)];
            if i != j && x != ZERO {
                return None;
            }
            if i == j && x != ONE {
                identity = false;
            }
        }
    }
    Some(identity)
}

/// Exhaustive partition function with the boundary spins clamped.
pub fn brute_force_partition(
    model: &SpinModel,
    left: &BoundaryConfig,
    right: &BoundaryConfig,
    max_spins: usize,
) -> Result<C64> {
    let (wires, q) = (model.lattice().wires(), model.q());
    left.validate(wires, q)?;
    right.validate(wires, q)?;
    match model {
        SpinModel::Vertex(vm) => vertex_sum(vm, left, right).evaluate(max_spins),
        SpinModel::Edge(em) => edge_sum(em, left, right).evaluate(max_spins),
    }
}

/// Number of free spins the exhaustive sum would enumerate.
pub fn internal_spin_count(model: &SpinModel) -> usize {
    let n = model.lattice().wires();
    let (l, r) = (BoundaryConfig::zeros(n), BoundaryConfig::zeros(n));
    match model {
        SpinModel::Vertex(vm) => vertex_sum(vm, &l, &r).free_count(),
        SpinModel::Edge(em) => edge_sum(em, &l, &r).free_count(),
    }
}
