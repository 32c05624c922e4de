use serde_json::{json, Value};

use super::poly::{format_rational, Poly};

/// A truncated series in the smoothing variables with symbolic coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlumbingSeries {
    pub poly: Poly,
    /// Per-variable truncation: monomials with an exponent above it are
    /// unknown.
    pub s_trunc: Option<u32>,
}

impl PlumbingSeries {
    pub fn new(poly: Poly, s_trunc: Option<u32>) -> Self {
        PlumbingSeries { poly: poly.truncate_s(s_trunc), s_trunc }
    }

    /// Sorted monomials, `+ O(...)` marking the truncation.
    pub fn to_text(&self) -> String {
        match self.s_trunc {
            Some(t) => format!("{} + O(s^{})", self.poly, t + 1),
            None => self.poly.to_string(),
        }
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .poly
            .sorted_terms()
            .into_iter()
            .map(|(m, c)| {
                let factors: Vec<Value> = m.factors().iter().map(|(v, e)| json!([v.to_string(), e])).collect();
                json!({"coeff": format_rational(c), "monomial": factors})
            })
            .collect();
        json!({"sTruncation": self.s_trunc, "terms": terms})
    }
}
