use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{HeferTriple, HomogPoly3, PolyError};
use crate::scalar::{AsScalar, Scalar};

/// Wire form `{"degree": d, "terms": [{"exp": [a0, a1, a2], "re": .., "im": ..}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub degree: u32,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub exp: [u32; 3],
    pub re: f64,
    pub im: f64,
}

impl<T: Scalar> From<&HomogPoly3<T>> for PolyJson {
    fn from(p: &HomogPoly3<T>) -> Self {
        Self {
            degree: p.degree(),
            terms: p
                .terms()
                .map(|(e, c)| TermJson {
                    exp: *e,
                    re: c.re.to_f64().unwrap(),
                    im: c.im.to_f64().unwrap(),
                })
                .collect(),
        }
    }
}

impl<T: Scalar> TryFrom<&PolyJson> for HomogPoly3<T> {
    type Error = PolyError;

    fn try_from(j: &PolyJson) -> Result<Self, PolyError> {
        if j.terms.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) {
            return Err(PolyError::Json("non-finite coefficient".into()));
        }
        HomogPoly3::from_terms(
            j.degree,
            j.terms.iter().map(|t| (t.exp, Complex::new(t.re.as_t(), t.im.as_t()))),
        )
    }
}

impl<T: Scalar> Serialize for HomogPoly3<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyJson::from(self).serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for HomogPoly3<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = PolyJson::deserialize(d)?;
        HomogPoly3::try_from(&j).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize)]
struct BiTermJson {
    exp: [u32; 6],
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct HeferJson {
    /// Variable order of the six-component exponents.
    variables: [&'static str; 6],
    degree: u32,
    components: Vec<Vec<BiTermJson>>,
}

impl<T: Scalar> Serialize for HeferTriple<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        HeferJson {
            variables: ["zeta0", "zeta1", "zeta2", "z0", "z1", "z2"],
            degree: self.degree(),
            components: self
                .components()
                .iter()
                .map(|q| {
                    q.terms()
                        .map(|(e, c)| BiTermJson {
                            exp: *e,
                            re: c.re.to_f64().unwrap(),
                            im: c.im.to_f64().unwrap(),
                        })
                        .collect()
                })
                .collect(),
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_wire_format() {
        let text = r#"{"degree":2,"terms":[{"exp":[1,0,1],"re":1.0,"im":0.0},{"exp":[0,2,0],"re":-1.0,"im":0.0}]}"#;
        let p: HomogPoly3<f64> = serde_json::from_str(text).unwrap();
        assert_eq!(
            p,
            HomogPoly3::from_real(2, &[([1, 0, 1], 1.0), ([0, 2, 0], -1.0)]).unwrap()
        );
        // Terms come back in exponent order.
        let back: HomogPoly3<f64> = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::to_string(&p)
            .unwrap()
            .starts_with(r#"{"degree":2,"terms":[{"exp":[0,2,0]"#));
    }

    #[test]
    fn rejects_bad_exponent_and_unknown_fields() {
        let bad = r#"{"degree":2,"terms":[{"exp":[1,0,0],"re":1.0,"im":0.0}]}"#;
        assert!(serde_json::from_str::<HomogPoly3<f64>>(bad).is_err());
        let extra = r#"{"degree":1,"terms":[],"note":"x"}"#;
        assert!(serde_json::from_str::<HomogPoly3<f64>>(extra).is_err());
    }
}
