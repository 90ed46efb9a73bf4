//! Harmonic bookkeeping for modulator sidebands.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Harmonic order imparted by each modulator along a photon's history.
///
/// Entries with order zero are never stored, so two vectors compare equal
/// exactly when their nonzero entries match.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SidebandVector(BTreeMap<String, i32>);

impl SidebandVector {
    /// The unshifted carrier.
    pub fn carrier() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, i32)>,
        S: Into<String>,
    {
        let mut v = Self::default();
        for (id, n) in pairs {
            v.add(&id.into(), n);
        }
        v
    }

    pub fn order(&self, eom: &str) -> i32 {
        self.0.get(eom).copied().unwrap_or(0)
    }

    pub fn is_carrier(&self) -> bool {
        self.0.is_empty()
    }

    /// Adds `n` to the entry for `eom`, dropping it if the result is zero.
    pub fn add(&mut self, eom: &str, n: i32) {
        if n == 0 {
            return;
        }
        let slot = self.0.entry(eom.to_string()).or_insert(0);
        *slot += n;
        if *slot == 0 {
            self.0.remove(eom);
        }
    }

    pub fn shifted(&self, eom: &str, n: i32) -> Self {
        let mut v = self.clone();
        v.add(eom, n);
        v
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, i32)> {
        self.0.iter().map(|(k, &n)| (k.as_str(), n))
    }

    /// Sum of |order| over all modulators.
    pub fn total_order(&self) -> u32 {
        self.0.values().map(|n| n.unsigned_abs()).sum()
    }

    /// Applies `f` to every modulator id.
    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Self {
        Self::from_pairs(self.entries().map(|(k, n)| (f(k), n)))
    }
}

impl fmt::Display for SidebandVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "{{}}");
        }
        write!(f, "{{")?;
        for (i, (k, n)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}:{n:+}")?;
        }
        write!(f, "}}")
    }
}

/// Net frequency shift of a sideband vector, in GHz.
pub fn total_shift(v: &SidebandVector, eom_freqs: &BTreeMap<String, f64>) -> Result<f64> {
    v.entries().try_fold(0.0, |acc, (id, n)| {
        let omega = eom_freqs
            .get(id)
            .ok_or_else(|| Error::UnknownEom(id.to_string()))?;
        Ok(acc + f64::from(n) * omega)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn freqs() -> BTreeMap<String, f64> {
        [("A", 2.8), ("B", 1.6)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    #[test]
    fn empty_vector_has_no_shift() {
        assert_eq!(total_shift(&SidebandVector::carrier(), &freqs()).unwrap(), 0.0);
    }

    #[test]
    fn single_and_composite_shifts() {
        let a = SidebandVector::from_pairs([("A", 1)]);
        assert_eq!(total_shift(&a, &freqs()).unwrap(), 2.8);
        let ab = SidebandVector::from_pairs([("A", 1), ("B", -1)]);
        assert!((total_shift(&ab, &freqs()).unwrap() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn unknown_eom_is_an_error() {
        let v = SidebandVector::from_pairs([("Z", 1)]);
        assert_eq!(total_shift(&v, &freqs()), Err(Error::UnknownEom("Z".into())));
    }

    #[test]
    fn zero_entries_are_not_stored() {
        let mut v = SidebandVector::from_pairs([("A", 1)]);
        v.add("A", -1);
        assert_eq!(v, SidebandVector::carrier());
        assert_eq!(SidebandVector::from_pairs([("A", 0)]), SidebandVector::carrier());
    }
}
