//! JSON schema for matrices, measures and representations.
//!
//! Complex entries are `[re, im]` pairs, matrices are row-major nested arrays.
//! Floats are written in shortest round-trip form, so read-write cycles are exact.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::matmeasure::{Atom, HermMatrix, MatrixMeasure, PsdMatrix, SupportSet};
use crate::stieltjes_repr::{
    KKPair, NevanlinnaTriple, Repr, S0Measure, SInfTriple, StieltjesPair, T0Measure, TInfTriple, TPair,
};

pub type MatJson = Vec<Vec<[f64; 2]>>;

pub fn ser_mat<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    linalg::to_pairs(m).serialize(s)
}

pub fn ser_mats<S: Serializer>(ms: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
    ms.iter().map(linalg::to_pairs).collect::<Vec<_>>().serialize(s)
}

pub fn mat_from_json(m: &MatJson) -> Result<CMat> {
    let nr = m.len();
    let nc = m.first().map_or(0, |r| r.len());
    if nr == 0 || nc == 0 || m.iter().any(|r| r.len() != nc) {
        return Err(Error::InvalidInput(format!("matrix rows must be non-empty and of equal length ({nr} rows)")));
    }
    Ok(CMat::from_fn(nr, nc, |r, c| C64::new(m[r][c][0], m[r][c][1])))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomJson {
    pub t: f64,
    #[serde(rename = "W")]
    pub w: MatJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureJson {
    pub q: usize,
    pub support: SupportSet,
    pub atoms: Vec<AtomJson>,
}

impl From<&MatrixMeasure> for MeasureJson {
    fn from(mu: &MatrixMeasure) -> Self {
        MeasureJson {
            q: mu.q(),
            support: mu.support(),
            atoms: mu.atoms().iter().map(|a| AtomJson { t: a.t, w: linalg::to_pairs(a.w.mat()) }).collect(),
        }
    }
}

impl MeasureJson {
    pub fn build(&self) -> Result<MatrixMeasure> {
        let atoms = self
            .atoms
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let w = mat_from_json(&a.w).map_err(|e| field(&format!("atoms[{k}].W"), e))?;
                let w = PsdMatrix::new(w).map_err(|e| field(&format!("atoms[{k}].W"), e))?;
                Ok(Atom { t: a.t, w })
            })
            .collect::<Result<Vec<_>>>()?;
        MatrixMeasure::from_atoms(self.q, self.support, atoms)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReprJson {
    StieltjesPair {
        alpha: f64,
        gamma: MatJson,
        mu: MeasureJson,
    },
    KkPair {
        alpha: f64,
        #[serde(rename = "C")]
        c: MatJson,
        eta: MeasureJson,
    },
    Nevanlinna {
        #[serde(rename = "A")]
        a: MatJson,
        #[serde(rename = "B")]
        b: MatJson,
        nu: MeasureJson,
    },
    S0 {
        alpha: f64,
        sigma: MeasureJson,
    },
    SinfTriple {
        alpha: f64,
        #[serde(rename = "D")]
        d: MatJson,
        #[serde(rename = "E")]
        e: MatJson,
        rho: MeasureJson,
    },
    TPair {
        beta: f64,
        gamma: MatJson,
        mu: MeasureJson,
    },
    T0 {
        beta: f64,
        sigma: MeasureJson,
    },
    TinfTriple {
        beta: f64,
        #[serde(rename = "D")]
        d: MatJson,
        #[serde(rename = "E")]
        e: MatJson,
        rho: MeasureJson,
    },
}

/// Attach a field path to an input error.
pub fn field(name: &str, e: Error) -> Error {
    Error::InvalidInput(format!("field `{name}`: {e}"))
}

fn psd(name: &str, m: &MatJson) -> Result<PsdMatrix> {
    mat_from_json(m).and_then(PsdMatrix::new).map_err(|e| field(name, e))
}

fn measure(name: &str, m: &MeasureJson) -> Result<MatrixMeasure> {
    m.build().map_err(|e| field(name, e))
}

impl From<&Repr> for ReprJson {
    fn from(r: &Repr) -> Self {
        let m = |x: &PsdMatrix| linalg::to_pairs(x.mat());
        match r {
            Repr::Pair(p) => ReprJson::StieltjesPair { alpha: p.alpha(), gamma: m(p.gamma()), mu: p.mu().into() },
            Repr::Kk(k) => ReprJson::KkPair { alpha: k.alpha(), c: m(k.c()), eta: k.eta().into() },
            Repr::Nevanlinna(n) => {
                ReprJson::Nevanlinna { a: linalg::to_pairs(n.a().mat()), b: m(n.b()), nu: n.nu().into() }
            }
            Repr::S0(s) => ReprJson::S0 { alpha: s.alpha(), sigma: s.sigma().into() },
            Repr::SInf(s) => ReprJson::SinfTriple { alpha: s.alpha(), d: m(s.d()), e: m(s.e()), rho: s.rho().into() },
            Repr::TPair(p) => ReprJson::TPair { beta: p.beta(), gamma: m(p.gamma()), mu: p.mu().into() },
            Repr::T0(s) => ReprJson::T0 { beta: s.beta(), sigma: s.sigma().into() },
            Repr::TInf(s) => ReprJson::TinfTriple { beta: s.beta(), d: m(s.d()), e: m(s.e()), rho: s.rho().into() },
        }
    }
}

impl ReprJson {
    pub fn build(&self) -> Result<Repr> {
        Ok(match self {
            ReprJson::StieltjesPair { alpha, gamma, mu } => {
                Repr::Pair(StieltjesPair::new(*alpha, psd("gamma", gamma)?, measure("mu", mu)?)?)
            }
            ReprJson::KkPair { alpha, c, eta } => Repr::Kk(KKPair::new(*alpha, psd("C", c)?, measure("eta", eta)?)?),
            ReprJson::Nevanlinna { a, b, nu } => {
                let a = mat_from_json(a).and_then(HermMatrix::new).map_err(|e| field("A", e))?;
                Repr::Nevanlinna(NevanlinnaTriple::new(a, psd("B", b)?, measure("nu", nu)?)?)
            }
            ReprJson::S0 { alpha, sigma } => Repr::S0(S0Measure::new(*alpha, measure("sigma", sigma)?)?),
            ReprJson::SinfTriple { alpha, d, e, rho } => {
                Repr::SInf(SInfTriple::new(*alpha, psd("D", d)?, psd("E", e)?, measure("rho", rho)?)?)
            }
            ReprJson::TPair { beta, gamma, mu } => {
                Repr::TPair(TPair::new(*beta, psd("gamma", gamma)?, measure("mu", mu)?)?)
            }
            ReprJson::T0 { beta, sigma } => Repr::T0(T0Measure::new(*beta, measure("sigma", sigma)?)?),
            ReprJson::TinfTriple { beta, d, e, rho } => {
                Repr::TInf(TInfTriple::new(*beta, psd("D", d)?, psd("E", e)?, measure("rho", rho)?)?)
            }
        })
    }
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::InvalidInput(format!("malformed JSON: {e}"))
}

pub fn repr_from_str(s: &str) -> Result<Repr> {
    serde_json::from_str::<ReprJson>(s).map_err(parse_err)?.build()
}

pub fn repr_to_value(r: &Repr) -> serde_json::Value {
    serde_json::to_value(ReprJson::from(r)).expect("representation serializes")
}

pub fn repr_to_string(r: &Repr) -> String {
    serde_json::to_string_pretty(&ReprJson::from(r)).expect("representation serializes")
}

pub fn measure_from_str(s: &str) -> Result<MatrixMeasure> {
    serde_json::from_str::<MeasureJson>(s).map_err(parse_err)?.build()
}

pub fn measure_to_string(mu: &MatrixMeasure) -> String {
    serde_json::to_string_pretty(&MeasureJson::from(mu)).expect("measure serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_diag;

    #[test]
    fn measure_round_trip_is_exact() {
        let s = SupportSet::right_ray(0.1);
        let mut w = real_diag(&[1.0 / 3.0, 2.0]);
        w[(0, 1)] = C64::new(0.1, 0.2);
        w[(1, 0)] = C64::new(0.1, -0.2);
        let mu = MatrixMeasure::new(2, s, vec![(0.1, w.clone()), (std::f64::consts::PI, w)]).unwrap();
        let back = measure_from_str(&measure_to_string(&mu)).unwrap();
        assert_eq!(back, mu);
    }

    #[test]
    fn malformed_input_reports_location() {
        let err = repr_from_str("{\"kind\": \"s0\", \"alpha\": 0.0,\n \"sigma\": {\"q\": 1,}}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        let err = repr_from_str(
            r#"{"kind":"stieltjes_pair","alpha":0,"gamma":[[[-1,0]]],"mu":{"q":1,"support":{"kind":"right_ray","endpoint":0},"atoms":[]}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
    }
}
