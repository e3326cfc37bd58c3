//! JSON documents for models and circuits.
//!
//! Complex numbers are written as `[re, im]`; a bare number is read as a
//! real. Matrices are row-major arrays of rows.

use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeSpec};
use crate::matrix::{Matrix, C64};
use crate::spin_models::{BoundaryConfig, EdgeModel, EdgeWeightTable, SpinModel, VertexModel, WeightTensor};

/// A complex number in its JSON form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsonComplex(pub C64);

impl Serialize for JsonComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&self.0.re)?;
        t.serialize_element(&self.0.im)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for JsonComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ComplexVisitor;

        impl<'de> Visitor<'de> for ComplexVisitor {
            type Value = JsonComplex;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or an [re, im] pair")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<JsonComplex, E> {
                Ok(JsonComplex(C64::new(v, 0.0)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<JsonComplex, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<JsonComplex, E> {
                self.visit_f64(v as f64)
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<JsonComplex, A::Error> {
                let re: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(JsonComplex(C64::new(re, im)))
            }
        }

        d.deserialize_any(ComplexVisitor)
    }
}

pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn matrix_to_json(m: &Matrix) -> JsonMatrix {
    m.to_rows().into_iter().map(|r| r.into_iter().map(JsonComplex).collect()).collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<Matrix> {
    Matrix::from_rows(rows.iter().map(|r| r.iter().map(|c| c.0).collect()).collect())
        .ok_or_else(|| Error::ShapeMismatch("matrix rows have unequal lengths".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelType {
    Vertex,
    Edge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteMatrix {
    pub site: usize,
    pub matrix: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsDocument {
    Uniform(JsonMatrix),
    PerSite(Vec<SiteMatrix>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryDocument {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(rename = "type")]
    pub model_type: ModelType,
    pub q: usize,
    pub lattice: LatticeSpec,
    pub weights: WeightsDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryDocument>,
}

impl ModelDocument {
    /// Per-site document for `model`.
    pub fn from_model(model: &SpinModel, boundary: Option<(&BoundaryConfig, &BoundaryConfig)>) -> Self {
        let (model_type, matrices): (_, Vec<&Matrix>) = match model {
            SpinModel::Vertex(vm) => (ModelType::Vertex, vm.site_weights().iter().map(|t| t.matrix()).collect()),
            SpinModel::Edge(em) => (ModelType::Edge, em.weights().iter().map(|t| t.matrix()).collect()),
        };
        let per_site = matrices
            .into_iter()
            .enumerate()
            .map(|(site, m)| SiteMatrix { site, matrix: matrix_to_json(m) })
            .collect();
        ModelDocument {
            model_type,
            q: model.q(),
            lattice: model.lattice().spec(),
            weights: WeightsDocument::PerSite(per_site),
            boundary: boundary.map(|(l, r)| BoundaryDocument { left: l.values().to_vec(), right: r.values().to_vec() }),
        }
    }

    pub fn to_model(&self) -> Result<SpinModel> {
        let lattice = Lattice::from_spec(self.lattice)?;
        let matrices = self.site_matrices(lattice.site_count())?;
        let q = self.q;
        Ok(match self.model_type {
            ModelType::Vertex => {
                let w = matrices.into_iter().map(|m| WeightTensor::new(q, 2, m)).collect::<Result<_>>()?;
                VertexModel::new(lattice, q, w)?.into()
            }
            ModelType::Edge => {
                let w = matrices.into_iter().map(|m| EdgeWeightTable::new(q, m)).collect::<Result<_>>()?;
                EdgeModel::new(lattice, q, w)?.into()
            }
        })
    }

    fn site_matrices(&self, sites: usize) -> Result<Vec<Matrix>> {
        match &self.weights {
            WeightsDocument::Uniform(m) => {
                let m = matrix_from_json(m)?;
                Ok(vec![m; sites])
            }
            WeightsDocument::PerSite(list) => {
                let mut out: Vec<Option<Matrix>> = vec![None; sites];
                for entry in list {
                    let slot = out
                        .get_mut(entry.site)
                        .ok_or_else(|| Error::InvalidInput(format!("site {} does not exist ({sites} sites)", entry.site)))?;
                    if slot.is_some() {
                        return Err(Error::InvalidInput(format!("site {} listed twice", entry.site)));
                    }
                    *slot = Some(matrix_from_json(&entry.matrix)?);
                }
                out.into_iter()
                    .enumerate()
                    .map(|(i, m)| m.ok_or_else(|| Error::InvalidInput(format!("site {i} has no weights"))))
                    .collect()
            }
        }
    }

    /// The boundary pair `(left, right)`, if the document carries one.
    pub fn boundary(&self) -> Option<(BoundaryConfig, BoundaryConfig)> {
        self.boundary
            .as_ref()
            .map(|b| (BoundaryConfig::new(b.left.clone()), BoundaryConfig::new(b.right.clone())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateDocument {
    pub wires: Vec<usize>,
    pub matrix: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDocument {
    pub wires: usize,
    pub q: usize,
    pub gates: Vec<GateDocument>,
}

impl CircuitDocument {
    pub fn from_circuit(c: &Circuit) -> Self {
        CircuitDocument {
            wires: c.wires(),
            q: c.q(),
            gates: c
                .gates()
                .iter()
                .map(|g| GateDocument { wires: g.wires().to_vec(), matrix: matrix_to_json(g.matrix()) })
                .collect(),
        }
    }

    pub fn to_circuit(&self) -> Result<Circuit> {
        let mut c = Circuit::new(self.wires, self.q);
        for g in &self.gates {
            c.push(Gate::new(g.wires.clone(), self.q, matrix_from_json(&g.matrix)?)?)?;
        }
        Ok(c)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))
}

pub fn parse_model(text: &str) -> Result<ModelDocument> {
    parse(text)
}

pub fn parse_circuit(text: &str) -> Result<CircuitDocument> {
    parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeKind;
    use crate::matrix::{I, ONE};

    #[test]
    fn complex_forms() {
        let v: Vec<JsonComplex> = serde_json::from_str("[1.5, [0, -2], 3]").unwrap();
        assert_eq!(v, vec![JsonComplex(C64::new(1.5, 0.0)), JsonComplex(-2.0 * I), JsonComplex(C64::new(3.0, 0.0))]);
        assert_eq!(serde_json::to_string(&JsonComplex(C64::new(0.5, -1.0))).unwrap(), "[0.5,-1.0]");
        assert!(serde_json::from_str::<JsonComplex>("[1, 2, 3]").is_err());
        assert!(serde_json::from_str::<JsonComplex>("\"1\"").is_err());
    }

    #[test]
    fn uniform_edge_document() {
        let text = r#"{"type":"edge","q":2,"lattice":{"kind":"rectangular","wires":1,"layers":3},
            "weights":{"uniform":[[1,1],[1,1]]},"boundary":{"left":[0],"right":[0]}}"#;
        let doc = parse_model(text).unwrap();
        let model = doc.to_model().unwrap();
        assert_eq!(model.lattice().site_count(), 2);
        let (l, r) = doc.boundary().unwrap();
        assert_eq!((l.values(), r.values()), (&[0][..], &[0][..]));
    }

    #[test]
    fn model_round_trip() {
        let l = Lattice::new(LatticeKind::TiltedSquare, 3, 2).unwrap();
        let mut m = Matrix::identity(4);
        m[(1, 2)] = C64::new(0.25, -1.0);
        let vm: SpinModel = VertexModel::uniform(l, WeightTensor::new(2, 2, m).unwrap()).unwrap().into();
        let b = BoundaryConfig::new(vec![1, 0, 1]);
        let doc = ModelDocument::from_model(&vm, Some((&b, &b)));
        let text = serde_json::to_string(&doc).unwrap();
        let back = parse_model(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_model().unwrap(), vm);
    }

    #[test]
    fn circuit_round_trip() {
        let g = Gate::new(vec![2, 1], 2, Matrix::diagonal(&[ONE, I, -ONE, -I])).unwrap();
        let c = Circuit::from_gates(2, 2, vec![g]).unwrap();
        let text = serde_json::to_string(&CircuitDocument::from_circuit(&c)).unwrap();
        assert_eq!(parse_circuit(&text).unwrap().to_circuit().unwrap(), c);
    }

    #[test]
    fn schema_errors() {
        assert!(parse_model("{}").is_err());
        let missing = r#"{"type":"edge","q":2,"lattice":{"kind":"rectangular","wires":1,"layers":3},
            "weights":{"per_site":[{"site":0,"matrix":[[1,0],[0,1]]}]}}"#;
        assert!(matches!(parse_model(missing).unwrap().to_model(), Err(Error::InvalidInput(_))));
        let extra = r#"{"wires":1,"q":2,"gates":[],"depth":3}"#;
        assert!(parse_circuit(extra).is_err());
        let ragged = r#"{"wires":1,"q":2,"gates":[{"wires":[1],"matrix":[[1,0],[0]]}]}"#;
        assert!(parse_circuit(ragged).unwrap().to_circuit().is_err());
    }
}
