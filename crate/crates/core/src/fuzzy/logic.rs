use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::set::{check_unit, FuzzySet};

/// A t-norm / t-conorm pair, dual under the negation `1 - x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Logic {
    /// `x·y` and `x + y - x·y`.
    #[default]
    Product,
    /// `min` and `max`.
    Godel,
    /// `max(x + y - 1, 0)` and `min(x + y, 1)`.
    Lukasiewicz,
}

impl Logic {
    pub const ALL: [Logic; 3] = [Logic::Product, Logic::Godel, Logic::Lukasiewicz];

    pub fn name(self) -> &'static str {
        match self {
            Logic::Product => "product",
            Logic::Godel => "godel",
            Logic::Lukasiewicz => "lukasiewicz",
        }
    }

    /// Conjunction. Inputs must already lie in [0, 1].
    #[inline]
    pub fn tnorm(self, x: f64, y: f64) -> f64 {
        match self {
            Logic::Product => x * y,
            Logic::Godel => x.min(y),
            Logic::Lukasiewicz => {
                // lo - (1 - hi) keeps ⊤(x, 1) = x exact; sorting keeps it symmetric
                let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
                (lo - (1.0 - hi)).max(0.0)
            }
        }
    }

    /// Disjunction. Inputs must already lie in [0, 1].
    #[inline]
    pub fn tconorm(self, x: f64, y: f64) -> f64 {
        match self {
            Logic::Product => x + y - x * y,
            Logic::Godel => x.max(y),
            Logic::Lukasiewicz => (x + y).min(1.0),
        }
    }

    pub fn checked_tnorm(self, x: f64, y: f64) -> Result<f64> {
        Ok(self.tnorm(check_unit(x)?, check_unit(y)?))
    }

    pub fn checked_tconorm(self, x: f64, y: f64) -> Result<f64> {
        Ok(self.tconorm(check_unit(x)?, check_unit(y)?))
    }

    pub fn intersect(self, a: &FuzzySet, b: &FuzzySet) -> Result<FuzzySet> {
        self.zip(a, b, |x, y| self.tnorm(x, y))
    }

    pub fn union(self, a: &FuzzySet, b: &FuzzySet) -> Result<FuzzySet> {
        self.zip(a, b, |x, y| self.tconorm(x, y))
    }

    fn zip(self, a: &FuzzySet, b: &FuzzySet, f: impl Fn(f64, f64) -> f64) -> Result<FuzzySet> {
        if a.len() != b.len() {
            return Err(Error::InvalidState(format!(
                "fuzzy set lengths differ: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        Ok(FuzzySet::from_unchecked(
            a.values()
                .iter()
                .zip(b.values())
                .map(|(&x, &y)| f(x, y).clamp(0.0, 1.0))
                .collect(),
        ))
    }
}

/// Fuzzy negation `1 - x`.
#[inline]
pub fn fnot(x: f64) -> f64 {
    1.0 - x
}

pub fn checked_fnot(x: f64) -> Result<f64> {
    Ok(fnot(check_unit(x)?))
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Logic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "product" | "prod" => Ok(Logic::Product),
            "godel" | "gödel" | "min" => Ok(Logic::Godel),
            "lukasiewicz" | "łukasiewicz" | "luk" => Ok(Logic::Lukasiewicz),
            _ => Err(Error::UnknownName {
                kind: "logic",
                name: s.to_owned(),
                known: "product, godel, lukasiewicz".into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        assert!((Logic::Product.tnorm(0.5, 0.4) - 0.2).abs() < 1e-15);
        assert_eq!(Logic::Godel.tnorm(0.3, 0.7), 0.3);
        assert!((Logic::Lukasiewicz.tnorm(0.5, 0.7) - 0.2).abs() < 1e-15);
        assert_eq!(Logic::Godel.tconorm(0.3, 0.7), 0.7);
        assert_eq!(Logic::Lukasiewicz.tconorm(0.5, 0.7), 1.0);
    }

    #[test]
    fn identity_elements() {
        for logic in Logic::ALL {
            for x in [0.0, 0.37, 1.0] {
                assert_eq!(logic.tnorm(x, 1.0), x, "{logic}");
                assert_eq!(logic.tconorm(x, 0.0), x, "{logic}");
            }
        }
    }

    #[test]
    fn domain_checks() {
        assert!(matches!(Logic::Product.checked_tnorm(1.5, 0.2), Err(Error::Domain(_))));
        assert_eq!(Logic::Product.checked_tnorm(1.0 + 1e-12, 0.5).unwrap(), 0.5);
        assert!(checked_fnot(-0.2).is_err());
        assert_eq!(checked_fnot(0.25).unwrap(), 0.75);
    }

    #[test]
    fn names_round_trip() {
        for logic in Logic::ALL {
            assert_eq!(logic.name().parse::<Logic>().unwrap(), logic);
        }
        assert!("xor".parse::<Logic>().is_err());
    }

    proptest! {
        #[test]
        fn operators_stay_in_unit_interval(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
            for logic in Logic::ALL {
                let t = logic.tnorm(x, y);
                let s = logic.tconorm(x, y);
                prop_assert!((0.0..=1.0).contains(&t));
                prop_assert!((0.0..=1.0).contains(&s));
                prop_assert!(t <= x.min(y) + 1e-15);
                prop_assert!(s + 1e-15 >= x.max(y));
            }
        }

        #[test]
        fn de_morgan_duality(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
            for logic in Logic::ALL {
                let dual = 1.0 - logic.tnorm(1.0 - x, 1.0 - y);
                prop_assert!((logic.tconorm(x, y) - dual).abs() <= 1e-12);
            }
        }
    }
}
