//! JSON model-spec documents.
//!
//! ```json
//! {"p": 3, "terms": [{"coef": 1.0, "vars": [0]}, {"coef": 0.5, "vars": [0, 2]}]}
//! ```
//!
//! Feature indices are 0-based. A term with empty `vars` is a constant.
//! Listing the same variable set twice is accepted only when both entries
//! carry the same coefficient.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShapError};
use crate::model::PolynomialModel;
use crate::subset::MAX_FEATURES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub p: usize,
    #[serde(default)]
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coef: f64,
    #[serde(default)]
    pub vars: Vec<usize>,
}

pub fn parse_model_spec(text: &str) -> Result<PolynomialModel> {
    let spec: ModelSpec = serde_json::from_str(text).map_err(|e| ShapError::MalformedSpec(e.to_string()))?;
    model_from_spec(&spec)
}

pub fn model_from_spec(spec: &ModelSpec) -> Result<PolynomialModel> {
    if spec.p > MAX_FEATURES {
        return Err(ShapError::TooManyFeatures { p: spec.p, limit: MAX_FEATURES, method: "model spec" });
    }
    let mut seen: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for term in &spec.terms {
        let mut vars = term.vars.clone();
        vars.sort_unstable();
        if let Some(&index) = vars.iter().find(|&&j| j >= spec.p) {
            return Err(ShapError::FeatureOutOfRange { index, p: spec.p });
        }
        if let Some(w) = vars.windows(2).find(|w| w[0] == w[1]) {
            return Err(ShapError::RepeatedFeature { index: w[0] });
        }
        if !term.coef.is_finite() {
            return Err(ShapError::MalformedSpec(format!("non-finite coefficient {}", term.coef)));
        }
        match seen.get(&vars) {
            Some(&first) if first != term.coef => {
                return Err(ShapError::ConflictingTerm { vars, first, second: term.coef });
            }
            Some(_) => {}
            None => {
                seen.insert(vars, term.coef);
            }
        }
    }
    Ok(PolynomialModel::from_merged(spec.p, seen))
}

pub fn model_to_spec(model: &PolynomialModel) -> ModelSpec {
    ModelSpec {
        p: model.p(),
        terms: model.terms().iter().map(|t| TermSpec { coef: t.coef, vars: t.vars.clone() }).collect(),
    }
}

pub fn serialize_model_spec(model: &PolynomialModel) -> String {
    serde_json::to_string_pretty(&model_to_spec(model)).expect("model spec serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_order2_style_spec() {
        let text = r#"{"p": 4, "terms": [
            {"coef": 1, "vars": [0]}, {"coef": 1, "vars": [1]},
            {"coef": 1, "vars": [2]}, {"coef": 1, "vars": [3]},
            {"coef": 1, "vars": [1, 0]}, {"coef": 1, "vars": [2, 3]}]}"#;
        let m = parse_model_spec(text).unwrap();
        assert_eq!(m.p(), 4);
        assert_eq!(m.terms().len(), 6);
        assert_eq!(m.order(), 2);
        assert_eq!(m.terms()[4].vars, vec![0, 1]);
    }

    #[test]
    fn empty_terms_is_zero_model() {
        let m = parse_model_spec(r#"{"p": 5, "terms": []}"#).unwrap();
        assert_eq!(m, PolynomialModel::zero(5));
        let m = parse_model_spec(r#"{"p": 5}"#).unwrap();
        assert_eq!(m, PolynomialModel::zero(5));
    }

    #[test]
    fn out_of_range_index() {
        let err = parse_model_spec(r#"{"p": 10, "terms": [{"coef": 1, "vars": [12]}]}"#).unwrap_err();
        assert_eq!(err, ShapError::FeatureOutOfRange { index: 12, p: 10 });
    }

    #[test]
    fn duplicate_terms() {
        let same = r#"{"p": 3, "terms": [{"coef": 2, "vars": [0, 1]}, {"coef": 2, "vars": [1, 0]}]}"#;
        let m = parse_model_spec(same).unwrap();
        assert_eq!(m.terms().len(), 1);
        assert_eq!(m.terms()[0].coef, 2.0);

        let conflict = r#"{"p": 3, "terms": [{"coef": 2, "vars": [0, 1]}, {"coef": 3, "vars": [1, 0]}]}"#;
        assert!(matches!(parse_model_spec(conflict), Err(ShapError::ConflictingTerm { .. })));
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(parse_model_spec("{"), Err(ShapError::MalformedSpec(_))));
        assert!(matches!(parse_model_spec(r#"{"terms": []}"#), Err(ShapError::MalformedSpec(_))));
        assert!(matches!(parse_model_spec(r#"{"p": 2, "terms": [{"coef": 1, "vars": [-1]}]}"#), Err(ShapError::MalformedSpec(_))));
        assert!(matches!(parse_model_spec(r#"{"p": 2, "extra": 1}"#), Err(ShapError::MalformedSpec(_))));
    }
}
