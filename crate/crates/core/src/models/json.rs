//! JSON file formats.
//!
//! Mixture:
//!
//! ```json
//! { "alphabet": ["0","1"], "n": 2,
//!   "components": [ { "weight": "1/2", "rows": [["1/3","2/3"], ["1/4","3/4"]] } ] }
//! ```
//!
//! Ising model (indices are zero-based):
//!
//! ```json
//! { "n": 3, "pairs": [ {"i": 0, "j": 1, "w": 0.5} ], "fields": [0.1, -0.2, 0.0] }
//! ```

use serde::{Deserialize, Serialize};

use super::{
    format_rational, parse_rational, Alphabet, IsingModel, Mixture, ModelError,
    ProductDistribution,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureDoc {
    pub alphabet: Vec<String>,
    pub n: usize,
    pub components: Vec<ComponentDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub weight: String,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingDoc {
    pub n: usize,
    #[serde(default)]
    pub pairs: Vec<PairDoc>,
    pub fields: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDoc {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

impl From<&Mixture> for MixtureDoc {
    fn from(m: &Mixture) -> Self {
        MixtureDoc {
            alphabet: m.alphabet().symbols().to_vec(),
            n: m.n(),
            components: m
                .weights()
                .iter()
                .zip(m.components())
                .map(|(w, c)| ComponentDoc {
                    weight: format_rational(w),
                    rows: c
                        .rows()
                        .iter()
                        .map(|row| row.iter().map(format_rational).collect())
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<MixtureDoc> for Mixture {
    type Error = ModelError;

    /// Parses rationals and the alphabet only; see [`Mixture::validate`].
    fn try_from(doc: MixtureDoc) -> Result<Self, ModelError> {
        let alphabet = Alphabet::new(doc.alphabet)?;
        let mut weights = Vec::with_capacity(doc.components.len());
        let mut components = Vec::with_capacity(doc.components.len());
        for c in doc.components {
            weights.push(parse_rational(&c.weight)?);
            let rows = c
                .rows
                .iter()
                .map(|row| row.iter().map(|s| parse_rational(s)).collect())
                .collect::<Result<Vec<_>, _>>()?;
            components.push(ProductDistribution::new(rows));
        }
        Ok(Mixture::from_parts(alphabet, doc.n, weights, components))
    }
}

impl From<&IsingModel> for IsingDoc {
    fn from(m: &IsingModel) -> Self {
        IsingDoc {
            n: m.n(),
            pairs: m.pairs().map(|((i, j), w)| PairDoc { i, j, w }).collect(),
            fields: m.fields().to_vec(),
        }
    }
}

impl TryFrom<IsingDoc> for IsingModel {
    type Error = ModelError;

    fn try_from(doc: IsingDoc) -> Result<Self, ModelError> {
        IsingModel::new(doc.n, doc.pairs.into_iter().map(|p| (p.i, p.j, p.w)), doc.fields)
    }
}

fn json_err(e: serde_json::Error) -> ModelError {
    ModelError::Json(e.to_string())
}

impl Mixture {
    /// Parses the mixture JSON format without validating the probabilities.
    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let doc: MixtureDoc = serde_json::from_str(s).map_err(json_err)?;
        doc.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MixtureDoc::from(self)).expect("serializable")
    }
}

impl IsingModel {
    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let doc: IsingDoc = serde_json::from_str(s).map_err(json_err)?;
        doc.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&IsingDoc::from(self)).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ratio;

    #[test]
    fn mixture_document() {
        let text = r#"{ "alphabet": ["0","1"], "n": 3,
          "components": [ { "weight": "1/1", "rows": [["1/3","2/3"], ["1/4","3/4"], ["0/1","1/1"]] } ] }"#;
        let m = Mixture::from_json(text).unwrap();
        assert!(m.validate().is_empty());
        assert_eq!(m.prefix_prob(&[1, 0, 1]).unwrap(), ratio(1, 6));
        let back = Mixture::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn mixture_document_errors() {
        assert!(matches!(
            Mixture::from_json(r#"{"alphabet":["0"],"n":1,"components":[{"weight":"1/0","rows":[["1"]]}]}"#),
            Err(ModelError::BadRational(_))
        ));
        assert!(matches!(
            Mixture::from_json(r#"{"alphabet":["0","0"],"n":0,"components":[]}"#),
            Err(ModelError::DuplicateSymbol(_))
        ));
        assert!(matches!(
            Mixture::from_json(r#"{"alphabet":["0"],"n":0,"components":[],"extra":1}"#),
            Err(ModelError::Json(_))
        ));
    }

    #[test]
    fn ising_document() {
        let text = r#"{ "n": 3, "pairs": [ {"i": 0, "j": 1, "w": 0.5} ], "fields": [0.1, -0.2, 0.0] }"#;
        let m = IsingModel::from_json(text).unwrap();
        assert_eq!(m.pair_weight(1, 0), 0.5);
        assert_eq!(IsingModel::from_json(&m.to_json()).unwrap(), m);
        assert!(IsingModel::from_json(r#"{"n":2,"pairs":[{"i":0,"j":0,"w":1.0}],"fields":[0,0]}"#).is_err());
    }
}
