//! Finite lattices with an explicit wire/layer layout.
//!
//! Models and circuits share one addressing scheme: wires are numbered
//! `1..=N` from the top, layers `1..=M` from the right boundary. Layer 1 is
//! applied first to `|R⟩`, so reading a circuit as `⟨L| G_T ··· G_1 |R⟩`
//! walks the lattice from right to left.
//!
//! * `TiltedSquare`: odd layers carry gates on `(1,2),(3,4),…`, even layers
//!   on `(2,3),(4,5),…`; wires without a partner idle through the layer.
//! * `TiltedTriangular`: layer `ℓ` carries 3-wire gates starting at offset
//!   `1, 2, 3, 1, …` and stepping by 3.
//! * `Rectangular`: `M` columns of vertices. Slices alternate vertical
//!   (the `N-1` edges inside one column) and horizontal (the `N` edges
//!   between neighbouring columns), starting and ending with a vertical
//!   slice, so there are `2M-1` slices in total.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    TiltedSquare,
    TiltedTriangular,
    Rectangular,
}

/// What an interaction site stands for in the underlying spin model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteKind {
    /// A vertex of a vertex model (tilted lattices).
    Vertex,
    /// A vertical edge inside `column` of a rectangular lattice.
    Vertical { column: usize },
    /// A horizontal edge between `column` and `column + 1`; `column + 1`
    /// lies further from the right boundary.
    Horizontal { column: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Site {
    pub id: usize,
    /// 1-based layer (slice index for rectangular lattices).
    pub layer: usize,
    pub kind: SiteKind,
    /// Contiguous, ascending, 1-based wire indices.
    pub wires: Vec<usize>,
}

impl Site {
    pub fn lowest_wire(&self) -> usize {
        self.wires[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub wires: usize,
    pub layers: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    kind: LatticeKind,
    wires: usize,
    layers: usize,
    sites: Vec<Site>,
}

impl Lattice {
    pub fn new(kind: LatticeKind, wires: usize, layers: usize) -> Result<Self> {
        let min_wires = match kind {
            LatticeKind::TiltedTriangular => 3,
            LatticeKind::TiltedSquare => 2,
            // A single row is a plain chain of horizontal edges.
            LatticeKind::Rectangular => 1,
        };
        if wires < min_wires {
            return Err(Error::InvalidDimensions(format!(
                "{kind:?} needs at least {min_wires} wires, got {wires}"
            )));
        }
        if layers == 0 {
            return Err(Error::InvalidDimensions("layers must be at least 1".into()));
        }
        let mut sites = Vec::new();
        let mut push = |layer: usize, kind: SiteKind, wires: Vec<usize>| {
            let id = sites.len();
            sites.push(Site { id, layer, kind, wires });
        };
        match kind {
            LatticeKind::TiltedSquare => {
                for layer in 1..=layers {
                    let start = if layer % 2 == 1 { 1 } else { 2 };
                    let mut w = start;
                    while w < wires {
                        push(layer, SiteKind::Vertex, vec![w, w + 1]);
                        w += 2;
                    }
                }
            }
            LatticeKind::TiltedTriangular => {
                for layer in 1..=layers {
                    let mut w = (layer - 1) % 3 + 1;
                    while w + 2 <= wires {
                        push(layer, SiteKind::Vertex, vec![w, w + 1, w + 2]);
                        w += 3;
                    }
                }
            }
            LatticeKind::Rectangular => {
                for slice in 1..=(2 * layers - 1) {
                    if slice % 2 == 1 {
                        let column = slice.div_ceil(2);
                        for r in 1..wires {
                            push(slice, SiteKind::Vertical { column }, vec![r, r + 1]);
                        }
                    } else {
                        let column = slice / 2;
                        for r in 1..=wires {
                            push(slice, SiteKind::Horizontal { column }, vec![r]);
                        }
                    }
                }
            }
        }
        Ok(Self { kind, wires, layers, sites })
    }

    pub fn from_spec(spec: LatticeSpec) -> Result<Self> {
        Self::new(spec.kind, spec.wires, spec.layers)
    }

    pub fn spec(&self) -> LatticeSpec {
        LatticeSpec { kind: self.kind, wires: self.wires, layers: self.layers }
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn wires(&self) -> usize {
        self.wires
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    /// Sites in layer-major, lowest-wire-minor order.
    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    /// `(id, layer, wires)` triples in iteration order.
    pub fn site_list(&self) -> Vec<(usize, usize, Vec<usize>)> {
        self.sites.iter().map(|s| (s.id, s.layer, s.wires.clone())).collect()
    }

    /// Number of layers (slices for rectangular lattices) in application order.
    pub fn slice_count(&self) -> usize {
        match self.kind {
            LatticeKind::Rectangular => 2 * self.layers - 1,
            _ => self.layers,
        }
    }

    /// Site index of the vertical edge `(row, row + 1)` in `column`.
    pub fn vertical_site(&self, column: usize, row: usize) -> Option<usize> {
        if self.kind != LatticeKind::Rectangular
            || column == 0
            || column > self.layers
            || row == 0
            || row >= self.wires
        {
            return None;
        }
        let per_pair = (self.wires - 1) + self.wires;
        Some((column - 1) * per_pair + (row - 1))
    }

    /// Site index of the horizontal edge on `row` between `column` and `column + 1`.
    pub fn horizontal_site(&self, column: usize, row: usize) -> Option<usize> {
        if self.kind != LatticeKind::Rectangular
            || column == 0
            || column >= self.layers
            || row == 0
            || row > self.wires
        {
            return None;
        }
        let per_pair = (self.wires - 1) + self.wires;
        Some((column - 1) * per_pair + (self.wires - 1) + (row - 1))
    }
}
