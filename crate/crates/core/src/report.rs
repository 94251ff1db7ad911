//! Self-contained verification reports.
//!
//! A report records named scalar quantities and the comparisons they must
//! satisfy. The pass flag is the conjunction of those comparisons, so it can
//! be recomputed from the serialized report alone.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Op {
    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Op::Lt => a < b,
            Op::Le => a <= b,
            Op::Gt => a > b,
            Op::Ge => a >= b,
        }
    }
}

/// Right-hand side of a rule: a number or another recorded quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Value(f64),
    Quantity(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub quantity: String,
    pub op: Op,
    pub bound: Bound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    /// Which statement of the underlying theory the check exercises.
    pub paper_ref: String,
    pub params: BTreeMap<String, serde_json::Value>,
    /// Non-finite values are written as `null` and read back as NaN.
    #[serde(with = "nullable")]
    pub quantities: BTreeMap<String, f64>,
    /// Headline tolerance; the rules carry the exact comparisons.
    pub tolerance: f64,
    pub rules: Vec<Rule>,
    pub pass: bool,
    /// Wall-clock seconds, left out unless timing was requested so that
    /// reports are reproducible byte for byte.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime: Option<f64>,
}

impl VerificationReport {
    pub fn new(check: &str, paper_ref: &str, tolerance: f64) -> Self {
        VerificationReport {
            check: check.to_string(),
            paper_ref: paper_ref.to_string(),
            params: BTreeMap::new(),
            quantities: BTreeMap::new(),
            tolerance,
            rules: Vec::new(),
            pass: false,
            runtime: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.params.insert(key.to_string(), v);
        self
    }

    pub fn quantity(&mut self, key: &str, value: f64) -> &mut Self {
        self.quantities.insert(key.to_string(), value);
        self
    }

    pub fn rule(&mut self, quantity: &str, op: Op, bound: f64) -> &mut Self {
        self.rules.push(Rule { quantity: quantity.to_string(), op, bound: Bound::Value(bound) });
        self
    }

    pub fn rule_vs(&mut self, quantity: &str, op: Op, other: &str) -> &mut Self {
        self.rules.push(Rule { quantity: quantity.to_string(), op, bound: Bound::Quantity(other.to_string()) });
        self
    }

    /// Evaluates the rules on the recorded quantities. A missing or NaN
    /// quantity fails its rule.
    pub fn recheck(&self) -> bool {
        let get = |k: &str| self.quantities.get(k).copied().unwrap_or(f64::NAN);
        !self.rules.is_empty()
            && self.rules.iter().all(|r| {
                let b = match &r.bound {
                    Bound::Value(v) => *v,
                    Bound::Quantity(q) => get(q),
                };
                r.op.holds(get(&r.quantity), b)
            })
    }

    /// Sets `pass` from [`recheck`](Self::recheck).
    pub fn finish(mut self) -> Self {
        self.pass = self.recheck();
        self
    }

    /// Rules that fail, rendered for messages.
    pub fn failures(&self) -> Vec<String> {
        let get = |k: &str| self.quantities.get(k).copied().unwrap_or(f64::NAN);
        self.rules
            .iter()
            .filter_map(|r| {
                let (b, name) = match &r.bound {
                    Bound::Value(v) => (*v, format!("{v:e}")),
                    Bound::Quantity(q) => (get(q), format!("{q} = {:e}", get(q))),
                };
                let a = get(&r.quantity);
                (!r.op.holds(a, b)).then(|| format!("{} = {a:e} not {:?} {name}", r.quantity, r.op))
            })
            .collect()
    }
}

mod nullable {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<&String, Option<f64>> = m.iter().map(|(k, v)| (k, v.is_finite().then_some(*v))).collect();
        m.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let m = BTreeMap::<String, Option<f64>>::deserialize(d)?;
        Ok(m.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::NAN))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_recheck() {
        let mut r = VerificationReport::new("demo", "a statement", 1e-3);
        r.param("eta", 0.1).quantity("gap", 5e-4).quantity("lhs", 1.0).quantity("rhs", 2.0);
        r.rule("gap", Op::Le, 1e-3).rule_vs("lhs", Op::Lt, "rhs");
        let r = r.finish();
        assert!(r.pass);
        let s = serde_json::to_string(&r).unwrap();
        assert!(!s.contains("runtime"));
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert!(back.recheck());
    }

    #[test]
    fn nan_and_missing_fail() {
        let mut r = VerificationReport::new("demo", "", 1.0);
        r.quantity("x", f64::NAN).rule("x", Op::Le, 1.0);
        let nan = r.clone().finish();
        assert!(!nan.pass);
        let back: VerificationReport = serde_json::from_str(&serde_json::to_string(&nan).unwrap()).unwrap();
        assert!(back.quantities["x"].is_nan());
        r.quantities.insert("x".into(), 0.5);
        r.rule("y", Op::Ge, 0.0);
        let r = r.finish();
        assert!(!r.pass);
        assert_eq!(r.failures().len(), 1);
        assert!(!VerificationReport::new("empty", "", 1.0).finish().pass);
    }
}
