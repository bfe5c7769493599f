use super::real::{floats, reals, Real};
use crate::cost::{
    build_twosat_cost, BuckinghamParams, Cnf, CostFamily, CostOracle, DeterminantVariant, Graph, IonSystem, IonVariant,
    SetFunction, SetFunctionRepr,
};
use crate::error::{Error, Result};
use crate::min::WeightMatrix;
use crate::tensor::{MarginalSpec, Shape};
use serde::{Deserialize, Serialize};

/// On-disk form of one problem instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub n: usize,
    pub k: usize,
    pub cost: CostDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marginals: Option<MarginalsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights_p: Option<Vec<Vec<Real>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalsDoc {
    /// 1-based mode numbers.
    pub constrained: Vec<usize>,
    pub values: Vec<Vec<Real>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeterminantVariantDoc {
    NegAbsDet,
    CappedNegLogAbsDet,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: usize,
    /// 1-based endpoints.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CostDoc {
    /// Row-major, mode 1 slowest.
    Dense {
        values: Vec<Real>,
    },
    LowRank {
        terms: Vec<Vec<Vec<Real>>>,
    },
    /// One `n × n` table per pair `i < i'`, in lexicographic pair order.
    Pairwise {
        tables: Vec<Vec<Vec<Real>>>,
    },
    Determinant {
        points: Vec<Vec<Real>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variant: Option<DeterminantVariantDoc>,
    },
    LogDeterminant {
        points: Vec<Vec<Real>>,
    },
    /// Either a `2^k` table indexed by subset bitmask (bit `i` = element `i + 1`),
    /// or a graph whose cut function, times `scale`, is the cost.
    SetFunction {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<Vec<Real>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        graph: Option<GraphDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<Real>,
    },
    Coulomb(IonsDoc),
    CoulombBuckingham(IonsDoc),
    TwoSat {
        num_vars: usize,
        clauses: Vec<Vec<i32>>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IonsDoc {
    pub positions: Vec<[Real; 3]>,
    pub charges: Vec<i8>,
    pub m: Real,
    #[serde(default)]
    pub a_plus: Real,
    #[serde(default)]
    pub a_minus: Real,
    #[serde(default)]
    pub b_plus: Real,
    #[serde(default)]
    pub b_minus: Real,
    #[serde(default)]
    pub c_plus: Real,
    #[serde(default)]
    pub c_minus: Real,
}

/// A parsed instance: cost plus optional marginals and weights.
#[derive(Clone, Debug)]
pub struct Instance {
    pub cost: CostOracle,
    pub spec: Option<MarginalSpec>,
    pub weights: Option<WeightMatrix>,
}

impl Instance {
    pub fn new(cost: CostOracle) -> Self {
        Instance { cost, spec: None, weights: None }
    }

    pub fn shape(&self) -> Shape {
        self.cost.shape()
    }

    pub fn weights_or_zero(&self) -> WeightMatrix {
        self.weights.clone().unwrap_or_else(|| WeightMatrix::zeros(self.shape()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(format!("instance JSON: {e}")))?;
        Self::from_doc(doc)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_doc(doc: InstanceDoc) -> Result<Self> {
        let shape = Shape::new(doc.n, doc.k)?;
        let cost = cost_from_doc(shape, doc.cost)?;
        if cost.shape() != shape {
            return Err(Error::DimensionMismatch(format!(
                "cost payload implies n={}, k={} but the document says n={}, k={}",
                cost.shape().n,
                cost.shape().k,
                shape.n,
                shape.k
            )));
        }
        let spec = doc
            .marginals
            .map(|m| {
                if m.constrained.len() != m.values.len() {
                    return Err(Error::Parse(format!(
                        "{} constrained modes but {} marginal vectors",
                        m.constrained.len(),
                        m.values.len()
                    )));
                }
                let fixed = m
                    .constrained
                    .iter()
                    .zip(&m.values)
                    .map(|(&mode, v)| {
                        if mode == 0 {
                            return Err(Error::Parse("constrained modes are 1-based".into()));
                        }
                        Ok((mode - 1, floats(v)))
                    })
                    .collect::<Result<_>>()?;
                MarginalSpec::partial(shape, fixed)
            })
            .transpose()?;
        let weights =
            doc.weights_p.map(|p| WeightMatrix::new(p.iter().map(|r| floats(r)).collect(), shape)).transpose()?;
        Ok(Instance { cost, spec, weights })
    }

    pub fn to_doc(&self) -> InstanceDoc {
        let shape = self.shape();
        InstanceDoc {
            n: shape.n,
            k: shape.k,
            cost: cost_to_doc(&self.cost),
            marginals: self.spec.as_ref().map(|s| MarginalsDoc {
                constrained: s.constrained().iter().map(|i| i + 1).collect(),
                values: s.constrained().iter().map(|&i| reals(s.marginal(i).expect("constrained"))).collect(),
            }),
            weights_p: self.weights.as_ref().map(|w| w.p.iter().map(|r| reals(r)).collect()),
        }
    }
}

fn cost_from_doc(shape: Shape, doc: CostDoc) -> Result<CostOracle> {
    let (n, k) = (shape.n, shape.k);
    match doc {
        CostDoc::Dense { values } => CostOracle::dense(shape, floats(&values)),
        CostDoc::LowRank { terms } => {
            CostOracle::low_rank(shape, terms.iter().map(|t| t.iter().map(|u| floats(u)).collect()).collect())
        }
        CostDoc::Pairwise { tables } => {
            let flat = tables
                .iter()
                .map(|t| {
                    if t.len() != n || t.iter().any(|r| r.len() != n) {
                        return Err(Error::DimensionMismatch(format!("pairwise tables must be {n}×{n}")));
                    }
                    Ok(t.iter().flat_map(|r| floats(r)).collect())
                })
                .collect::<Result<_>>()?;
            CostOracle::pairwise(shape, flat)
        }
        CostDoc::Determinant { points, variant } => {
            let variant = match variant.unwrap_or(DeterminantVariantDoc::NegAbsDet) {
                DeterminantVariantDoc::NegAbsDet => DeterminantVariant::NegAbsDet,
                DeterminantVariantDoc::CappedNegLogAbsDet => DeterminantVariant::CappedNegLogAbsDet,
            };
            CostOracle::determinant(points.iter().map(|p| floats(p)).collect(), variant)
        }
        CostDoc::LogDeterminant { points } => {
            CostOracle::determinant(points.iter().map(|p| floats(p)).collect(), DeterminantVariant::CappedNegLogAbsDet)
        }
        CostDoc::SetFunction { table, graph, scale } => {
            let f = match (table, graph) {
                (Some(t), None) => SetFunction::table(k, floats(&t))?,
                (None, Some(g)) => SetFunction::cut(graph_from_doc(&g)?, scale.map_or(1.0, |s| s.0))?,
                _ => return Err(Error::Parse("set_function needs exactly one of `table` or `graph`".into())),
            };
            CostOracle::set_function(f)
        }
        CostDoc::Coulomb(ions) => CostOracle::ions(ions_from_doc(ions, IonVariant::Coulomb, k)?, k),
        CostDoc::CoulombBuckingham(ions) => CostOracle::ions(ions_from_doc(ions, IonVariant::Buckingham, k)?, k),
        CostDoc::TwoSat { num_vars, clauses } => {
            let cnf = Cnf::new(num_vars, clauses)?;
            cnf.check_two_sat()?;
            build_twosat_cost(&cnf)
        }
    }
}

pub fn graph_from_doc(g: &GraphDoc) -> Result<Graph> {
    let edges = g
        .edges
        .iter()
        .map(|&(u, v)| {
            if u == 0 || v == 0 || u > g.vertices || v > g.vertices {
                return Err(Error::Parse(format!("edge ({u}, {v}) outside 1..={}", g.vertices)));
            }
            Ok((u - 1, v - 1))
        })
        .collect::<Result<Vec<_>>>()?;
    Graph::new(g.vertices, edges)
}

fn ions_from_doc(d: IonsDoc, variant: IonVariant, k: usize) -> Result<IonSystem> {
    let params = BuckinghamParams {
        a_plus: d.a_plus.0,
        a_minus: d.a_minus.0,
        b_plus: d.b_plus.0,
        b_minus: d.b_minus.0,
        c_plus: d.c_plus.0,
        c_minus: d.c_minus.0,
    };
    let positions = d.positions.iter().map(|p| [p[0].0, p[1].0, p[2].0]).collect();
    IonSystem::new(positions, d.charges, params, d.m.0, variant, k)
}

pub fn cost_to_doc(cost: &CostOracle) -> CostDoc {
    match cost.family() {
        CostFamily::Dense(v) => CostDoc::Dense { values: reals(v) },
        CostFamily::LowRank(l) => {
            CostDoc::LowRank { terms: l.terms.iter().map(|t| t.iter().map(|u| reals(u)).collect()).collect() }
        }
        CostFamily::Pairwise(p) => {
            let n = cost.shape().n;
            CostDoc::Pairwise { tables: p.tables.iter().map(|t| t.chunks(n).map(reals).collect()).collect() }
        }
        CostFamily::Determinant(d) => {
            let points = d.points.iter().map(|p| reals(p)).collect();
            match d.variant {
                DeterminantVariant::NegAbsDet => CostDoc::Determinant { points, variant: None },
                DeterminantVariant::CappedNegLogAbsDet => CostDoc::LogDeterminant { points },
            }
        }
        CostFamily::SetFunction(f) => match f.repr() {
            SetFunctionRepr::Table(t) => CostDoc::SetFunction { table: Some(reals(t)), graph: None, scale: None },
            SetFunctionRepr::Cut { graph, scale } => CostDoc::SetFunction {
                table: None,
                graph: Some(GraphDoc {
                    vertices: graph.vertices(),
                    edges: graph.edges().iter().map(|&(u, v)| (u + 1, v + 1)).collect(),
                }),
                scale: Some(Real(*scale)),
            },
        },
        CostFamily::Ions(s) => {
            let doc = IonsDoc {
                positions: s.positions.iter().map(|p| [Real(p[0]), Real(p[1]), Real(p[2])]).collect(),
                charges: s.charges.clone(),
                m: Real(s.penalty),
                a_plus: Real(s.params.a_plus),
                a_minus: Real(s.params.a_minus),
                b_plus: Real(s.params.b_plus),
                b_minus: Real(s.params.b_minus),
                c_plus: Real(s.params.c_plus),
                c_minus: Real(s.params.c_minus),
            };
            match s.variant {
                IonVariant::Coulomb => CostDoc::Coulomb(doc),
                IonVariant::Buckingham => CostDoc::CoulombBuckingham(doc),
            }
        }
        CostFamily::TwoSat(cnf) => CostDoc::TwoSat { num_vars: cnf.num_vars(), clauses: cnf.clauses().to_vec() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dense_with_partial_marginals() {
        let text = r#"{"n":2,"k":2,"cost":{"family":"dense","values":["0","1",1,0]},
            "marginals":{"constrained":[2],"values":[["0.25","0.75"]]},
            "weights_p":[[0,0],[0,"-0.5"]]}"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.cost.evaluate(&[0, 1]), 1.0);
        let spec = inst.spec.as_ref().unwrap();
        assert_eq!(spec.constrained(), &[1]);
        assert_eq!(spec.marginal(1).unwrap(), &[0.25, 0.75]);
        assert_eq!(inst.weights.as_ref().unwrap().p[1][1], -0.5);
        let again = Instance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(again.cost, inst.cost);
        assert_eq!(again.spec, inst.spec);
    }

    #[test]
    fn schema_violations_are_parse_errors() {
        assert!(matches!(Instance::from_json("{}"), Err(Error::Parse(_))));
        assert!(matches!(Instance::from_json(r#"{"n":2,"k":2,"cost":{"family":"nope"}}"#), Err(Error::Parse(_))));
        let bad_len = r#"{"n":2,"k":2,"cost":{"family":"dense","values":[1,2,3]}}"#;
        assert!(Instance::from_json(bad_len).is_err());
        let mismatch = r#"{"n":2,"k":3,"cost":{"family":"two_sat","num_vars":2,"clauses":[[1,2]]}}"#;
        assert!(matches!(Instance::from_json(mismatch), Err(Error::DimensionMismatch(_))));
        let wide = r#"{"n":2,"k":3,"cost":{"family":"two_sat","num_vars":3,"clauses":[[1,2,3]]}}"#;
        assert!(matches!(Instance::from_json(wide), Err(Error::ClauseWidth { .. })));
    }

    #[test]
    fn every_family_round_trips() {
        let docs = [
            r#"{"family":"low_rank","terms":[[[1,2],[3,4]]]}"#,
            r#"{"family":"pairwise","tables":[[[1,2],[3,4]]]}"#,
            r#"{"family":"determinant","points":[[1,0],[0,1]]}"#,
            r#"{"family":"log_determinant","points":[[2,0],[0,1]]}"#,
            r#"{"family":"set_function","table":[0,1,1,1]}"#,
            r#"{"family":"set_function","graph":{"vertices":2,"edges":[[1,2]]},"scale":-1}"#,
            r#"{"family":"coulomb","positions":[[0,0,0],[1,0,0]],"charges":[1,-1],"m":10}"#,
            r#"{"family":"coulomb_buckingham","positions":[[0,0,0],[1,0,0]],"charges":[1,-1],"m":100,
               "a_plus":1,"a_minus":1,"b_plus":1,"b_minus":1,"c_plus":1,"c_minus":1}"#,
            r#"{"family":"two_sat","num_vars":2,"clauses":[[1,-2]]}"#,
        ];
        for cost in docs {
            let text = format!(r#"{{"n":2,"k":2,"cost":{cost}}}"#);
            let inst = Instance::from_json(&text).unwrap_or_else(|e| panic!("{cost}: {e}"));
            let again = Instance::from_json(&inst.to_json().unwrap()).unwrap();
            assert_eq!(again.cost.materialize().unwrap(), inst.cost.materialize().unwrap(), "{cost}");
        }
    }
}
