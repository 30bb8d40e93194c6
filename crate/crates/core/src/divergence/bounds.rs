use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Memory lower-bound expressions, evaluated with every hidden constant set to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundFormula {
    /// `n d / (p c k^2 t)`
    GeneralFramework,
    /// `n m q / (p k^4 log2(nm))`
    BicliqueMain,
    /// `n^2 / (p k^3)`
    PatternPlanted,
    /// `2 p s n`
    MicBudget,
}

impl BoundFormula {
    pub const ALL: [BoundFormula; 4] = [
        BoundFormula::GeneralFramework,
        BoundFormula::BicliqueMain,
        BoundFormula::PatternPlanted,
        BoundFormula::MicBudget,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundFormula::GeneralFramework => "general-framework",
            BoundFormula::BicliqueMain => "biclique-main",
            BoundFormula::PatternPlanted => "pattern-planted",
            BoundFormula::MicBudget => "mic-budget",
        }
    }

    pub fn required_inputs(self) -> &'static [&'static str] {
        match self {
            BoundFormula::GeneralFramework => &["n", "d", "p", "c", "k", "t"],
            BoundFormula::BicliqueMain => &["n", "m", "q", "p", "k"],
            BoundFormula::PatternPlanted => &["n", "p", "k"],
            BoundFormula::MicBudget => &["p", "s", "n"],
        }
    }
}

impl fmt::Display for BoundFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundFormula::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s) || format!("{b:?}").eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid("formula", format!("unknown bound formula `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundPrediction {
    pub formula: BoundFormula,
    pub value_bits: f64,
    pub inputs: BTreeMap<String, f64>,
}

/// Evaluates `formula` on the named inputs.
///
/// Zero inputs are accepted and give the degenerate value (0 or infinity);
/// negative or non-finite inputs are rejected, as are missing or unknown names.
pub fn bound_prediction(formula: BoundFormula, inputs: &BTreeMap<String, f64>) -> Result<BoundPrediction> {
    let required = formula.required_inputs();
    for (key, value) in inputs {
        if !required.contains(&key.as_str()) {
            return Err(Error::InvalidParams {
                field: "inputs",
                reason: format!("`{key}` is not an input of {formula}"),
            });
        }
        if !value.is_finite() || *value < 0.0 {
            return Err(Error::InvalidParams { field: "inputs", reason: format!("`{key}` must be finite and >= 0") });
        }
    }
    let get = |name: &str| -> Result<f64> {
        inputs
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidParams { field: "inputs", reason: format!("{formula} needs `{name}`") })
    };
    let value_bits = match formula {
        BoundFormula::GeneralFramework => {
            get("n")? * get("d")? / (get("p")? * get("c")? * get("k")?.powi(2) * get("t")?)
        }
        BoundFormula::BicliqueMain => {
            let (n, m) = (get("n")?, get("m")?);
            n * m * get("q")? / (get("p")? * get("k")?.powi(4) * (n * m).log2())
        }
        BoundFormula::PatternPlanted => get("n")?.powi(2) / (get("p")? * get("k")?.powi(3)),
        BoundFormula::MicBudget => 2.0 * get("p")? * get("s")? * get("n")?,
    };
    Ok(BoundPrediction {
        formula,
        value_bits: if value_bits.is_nan() { 0.0 } else { value_bits },
        inputs: inputs.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn mic_budget() {
        let b = bound_prediction(BoundFormula::MicBudget, &inputs(&[("p", 2.0), ("s", 8.0), ("n", 100.0)])).unwrap();
        assert_eq!(b.value_bits, 3200.0);
    }

    #[test]
    fn missing_and_negative_inputs() {
        assert!(bound_prediction(BoundFormula::MicBudget, &inputs(&[("p", 2.0)])).is_err());
        assert!(bound_prediction(BoundFormula::MicBudget, &inputs(&[("p", -2.0), ("s", 1.0), ("n", 1.0)])).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("biclique-main".parse::<BoundFormula>().unwrap(), BoundFormula::BicliqueMain);
        assert_eq!("MicBudget".parse::<BoundFormula>().unwrap(), BoundFormula::MicBudget);
    }
}
