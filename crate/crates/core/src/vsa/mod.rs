//! Hypervector value types and the four VSA primitives.

mod binary;
mod cyclic;
pub mod record;

use std::fmt;
use std::str::FromStr;

pub use binary::{bundle_binary, BinaryBundler, BinaryHypervector};
pub use cyclic::{
    bundle_cyclic, CyclicBundler, CyclicHypervector, CyclicSimilaritySpec, MAX_ORDER,
};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Which carrier a hypervector (or a model built from them) uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Family {
    Binary,
    Cyclic(usize),
}

impl Family {
    pub fn cyclic(order: usize) -> Result<Self> {
        cyclic::check_order(order)?;
        Ok(Family::Cyclic(order))
    }

    /// Group order; binary HDC behaves as order 2.
    pub fn order(&self) -> usize {
        match self {
            Family::Binary => 2,
            Family::Cyclic(n) => *n,
        }
    }

    /// Serialized order byte: 0 for binary.
    pub fn order_byte(&self) -> u8 {
        match self {
            Family::Binary => 0,
            Family::Cyclic(n) => *n as u8,
        }
    }

    pub fn from_order_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(Family::Binary),
            n => Family::cyclic(n as usize),
        }
    }

    /// Similarity kernel for the cyclic family; `None` for binary.
    pub fn default_spec(&self) -> Option<CyclicSimilaritySpec> {
        match self {
            Family::Binary => None,
            Family::Cyclic(n) => Some(CyclicSimilaritySpec::new(*n).expect("order validated")),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Binary => write!(f, "binary"),
            Family::Cyclic(n) => write!(f, "g{n}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// `binary`, or `gN` for the cyclic group of order N (`g8` is G(2^3)).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "binary" {
            return Ok(Family::Binary);
        }
        t.strip_prefix('g')
            .and_then(|n| n.parse::<usize>().ok())
            .ok_or_else(|| Error::invalid(format!("unknown family '{s}' (expected binary or gN)")))
            .and_then(Family::cyclic)
    }
}

impl TryFrom<String> for Family {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Family> for String {
    fn from(f: Family) -> String {
        f.to_string()
    }
}

/// Either carrier, for code that is generic over the family.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Hypervector {
    Binary(BinaryHypervector),
    Cyclic(CyclicHypervector),
}

impl Hypervector {
    pub fn random(family: Family, dim: usize, rng: &mut SeededRng) -> Result<Self> {
        Ok(match family {
            Family::Binary => Hypervector::Binary(BinaryHypervector::random(dim, 0.5, rng)?),
            Family::Cyclic(n) => Hypervector::Cyclic(CyclicHypervector::random(dim, n, rng)?),
        })
    }

    pub fn identity(family: Family, dim: usize) -> Result<Self> {
        Ok(match family {
            Family::Binary => Hypervector::Binary(BinaryHypervector::ones(dim)?),
            Family::Cyclic(n) => Hypervector::Cyclic(CyclicHypervector::zeros(dim, n)?),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Hypervector::Binary(v) => v.dim(),
            Hypervector::Cyclic(v) => v.dim(),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Hypervector::Binary(_) => Family::Binary,
            Hypervector::Cyclic(v) => Family::Cyclic(v.order()),
        }
    }

    pub fn as_binary(&self) -> Option<&BinaryHypervector> {
        match self {
            Hypervector::Binary(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_cyclic(&self) -> Option<&CyclicHypervector> {
        match self {
            Hypervector::Cyclic(v) => Some(v),
            _ => None,
        }
    }

    /// `spec` is required for cyclic vectors and ignored for binary ones.
    pub fn similarity(&self, other: &Self, spec: Option<&CyclicSimilaritySpec>) -> Result<f64> {
        match (self, other) {
            (Hypervector::Binary(a), Hypervector::Binary(b)) => a.similarity(b),
            (Hypervector::Cyclic(a), Hypervector::Cyclic(b)) => {
                let spec = spec.ok_or_else(|| Error::invalid("cyclic similarity needs a spec"))?;
                a.similarity(b, spec)
            }
            _ => Err(family_mismatch(self.family(), other.family())),
        }
    }

    pub fn bind(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Hypervector::Binary(a), Hypervector::Binary(b)) => Ok(Hypervector::Binary(a.bind(b)?)),
            (Hypervector::Cyclic(a), Hypervector::Cyclic(b)) => Ok(Hypervector::Cyclic(a.bind(b)?)),
            _ => Err(family_mismatch(self.family(), other.family())),
        }
    }

    pub fn permute(&self, j: i64) -> Self {
        match self {
            Hypervector::Binary(v) => Hypervector::Binary(v.permute(j)),
            Hypervector::Cyclic(v) => Hypervector::Cyclic(v.permute(j)),
        }
    }
}

pub(crate) fn family_mismatch(a: Family, b: Family) -> Error {
    Error::invalid(format!("family mismatch: {a} vs {b}"))
}

/// Fixed bijection between binary HDC and Z/2Z: `+1 <-> 0`, `-1 <-> 1`.
impl From<&BinaryHypervector> for CyclicHypervector {
    fn from(v: &BinaryHypervector) -> Self {
        let elems = (0..v.dim()).map(|i| u8::from(!v.bit(i))).collect();
        CyclicHypervector::new(2, elems).expect("order 2 elements are valid")
    }
}

impl TryFrom<&CyclicHypervector> for BinaryHypervector {
    type Error = Error;

    fn try_from(v: &CyclicHypervector) -> Result<Self> {
        if v.order() != 2 {
            return Err(Error::OrderMismatch {
                left: v.order(),
                right: 2,
            });
        }
        BinaryHypervector::from_bits(v.dim(), v.elems().iter().map(|&e| e == 0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_parse_and_display() {
        assert_eq!("binary".parse::<Family>().unwrap(), Family::Binary);
        assert_eq!("g8".parse::<Family>().unwrap(), Family::Cyclic(8));
        assert_eq!("G16".parse::<Family>().unwrap(), Family::Cyclic(16));
        assert!("g1".parse::<Family>().is_err());
        assert!("g256".parse::<Family>().is_err());
        assert!("ternary".parse::<Family>().is_err());
        assert_eq!(Family::Cyclic(4).to_string(), "g4");
    }

    #[test]
    fn bijection_round_trips() {
        let mut rng = SeededRng::new(1);
        let b = BinaryHypervector::random(77, 0.5, &mut rng).unwrap();
        let c = CyclicHypervector::from(&b);
        assert_eq!(BinaryHypervector::try_from(&c).unwrap(), b);
        let ones = BinaryHypervector::ones(5).unwrap();
        assert_eq!(CyclicHypervector::from(&ones).elems(), &[0; 5]);
    }

    #[test]
    fn mixed_families_rejected() {
        let mut rng = SeededRng::new(2);
        let a = Hypervector::random(Family::Binary, 10, &mut rng).unwrap();
        let b = Hypervector::random(Family::Cyclic(4), 10, &mut rng).unwrap();
        assert!(a.bind(&b).is_err());
        assert!(a.similarity(&b, None).is_err());
        assert!(b.similarity(&b, None).is_err());
    }
}
