use std::io::{Read, Write};
use std::path::Path;

use super::{Classifier, Paradigm, PrototypeModel, SgdModel, DEFAULT_BETA};
use crate::error::{Error, Result};
use crate::vsa::record::{read_record, truncated, write_record};
use crate::vsa::{CyclicSimilaritySpec, Family, Hypervector};

pub const MODEL_MAGIC: &[u8; 4] = b"VSA1";

/// Any trained model, as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Prototypes(PrototypeModel),
    Sgd(SgdModel),
}

impl Model {
    pub fn paradigm(&self) -> Paradigm {
        match self {
            Model::Prototypes(_) => Paradigm::Prototypes,
            Model::Sgd(m) => m.paradigm(),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Model::Prototypes(m) => m.family(),
            Model::Sgd(m) => m.family(),
        }
    }

    pub fn classes(&self) -> usize {
        match self {
            Model::Prototypes(m) => m.classes(),
            Model::Sgd(m) => m.classes(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Prototypes(m) => m.dim(),
            Model::Sgd(m) => m.dim(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Model::Prototypes(m) => m.seed(),
            Model::Sgd(m) => m.seed(),
        }
    }

    fn spec(&self) -> Option<&CyclicSimilaritySpec> {
        match self {
            Model::Prototypes(m) => m.spec(),
            Model::Sgd(m) => m.spec(),
        }
    }

    /// `"VSA1" | paradigm u8 | order u8 | C u32 | D u64 | payload | seed u64`,
    /// little-endian. Prototypes are HV01 records; weights are row-major f64.
    /// Only the default cyclic similarity table can be stored.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        if let (Family::Cyclic(n), Some(spec)) = (self.family(), self.spec()) {
            if *spec != CyclicSimilaritySpec::new(n)? {
                return Err(Error::invalid(
                    "model files only store the default cyclic similarity",
                ));
            }
        }
        w.write_all(MODEL_MAGIC)?;
        w.write_all(&[self.paradigm() as u8, self.family().order_byte()])?;
        w.write_all(&(self.classes() as u32).to_le_bytes())?;
        w.write_all(&(self.dim() as u64).to_le_bytes())?;
        match self {
            Model::Prototypes(m) => {
                for p in m.prototypes() {
                    write_record(p, w)?;
                }
            }
            Model::Sgd(m) => {
                let mut buf = Vec::with_capacity(m.weights().len() * 8);
                for x in m.weights() {
                    buf.extend_from_slice(&x.to_le_bytes());
                }
                w.write_all(&buf)?;
            }
        }
        w.write_all(&self.seed().to_le_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut head = [0u8; 18];
        r.read_exact(&mut head).map_err(truncated)?;
        if &head[..4] != MODEL_MAGIC {
            return Err(Error::Format("bad model magic".into()));
        }
        let paradigm = Paradigm::from_byte(head[4])?;
        let family = Family::from_order_byte(head[5]).map_err(|e| Error::Format(e.to_string()))?;
        let classes = u32::from_le_bytes(head[6..10].try_into().unwrap()) as usize;
        let dim = u64::from_le_bytes(head[10..18].try_into().unwrap());
        if classes == 0 || dim == 0 || dim > 1 << 32 {
            return Err(Error::Format(format!(
                "implausible model shape {classes} x {dim}"
            )));
        }
        let dim = dim as usize;
        let bad = |e: Error| Error::Format(e.to_string());
        let model = match paradigm {
            Paradigm::Prototypes => {
                let mut protos = Vec::with_capacity(classes);
                for _ in 0..classes {
                    let p = read_record(r)?;
                    if p.dim() != dim || p.family() != family {
                        return Err(Error::Format(
                            "prototype record does not match the model header".into(),
                        ));
                    }
                    protos.push(p);
                }
                let seed = read_seed(r)?;
                Model::Prototypes(PrototypeModel::new(protos, None, seed).map_err(bad)?)
            }
            p => {
                let len = classes
                    .checked_mul(dim)
                    .and_then(|n| n.checked_mul(8))
                    .ok_or_else(|| Error::Format("model too large".into()))?;
                let mut buf = Vec::new();
                r.take(len as u64).read_to_end(&mut buf)?;
                if buf.len() != len {
                    return Err(Error::Format("truncated weight matrix".into()));
                }
                let weights: Vec<f64> = buf
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect();
                if let Family::Cyclic(n) = family {
                    if weights
                        .iter()
                        .any(|w| w.fract() != 0.0 || *w < 0.0 || *w >= n as f64)
                    {
                        return Err(Error::Format(
                            "cyclic weights must be lattice values".into(),
                        ));
                    }
                }
                let seed = read_seed(r)?;
                Model::Sgd(
                    SgdModel::new(p, family, classes, dim, weights, DEFAULT_BETA, None, seed)
                        .map_err(bad)?,
                )
            }
        };
        Ok(model)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write_to(&mut out)?;
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cursor = bytes;
        let m = Self::read_from(&mut cursor)?;
        if !cursor.is_empty() {
            return Err(Error::Format("trailing bytes after model".into()));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io_at(path, e))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io_at(path, e))?)
    }
}

fn read_seed<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

impl Classifier for Model {
    fn scores(&self, t: &Hypervector) -> Result<Vec<f64>> {
        match self {
            Model::Prototypes(m) => m.scores(t),
            Model::Sgd(m) => m.scores(t),
        }
    }

    fn predict(&self, t: &Hypervector) -> Result<usize> {
        match self {
            Model::Prototypes(m) => m.predict(t),
            Model::Sgd(m) => m.predict(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn round_trips() {
        let mut rng = SeededRng::new(4);
        let protos: Vec<Hypervector> = (0..3)
            .map(|_| Hypervector::random(Family::Cyclic(8), 77, &mut rng).unwrap())
            .collect();
        let a = Model::Prototypes(PrototypeModel::new(protos, None, 42).unwrap());
        let bytes = a.to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"VSA1");
        let b = Model::from_bytes(&bytes).unwrap();
        assert_eq!(a, b);
        assert_eq!(b.to_bytes().unwrap(), bytes);

        let w: Vec<f64> = (0..2 * 65).map(|i| (i as f64 - 60.0) / 7.0).collect();
        let s = Model::Sgd(
            SgdModel::new(
                Paradigm::SgdBinary,
                Family::Binary,
                2,
                65,
                w,
                DEFAULT_BETA,
                None,
                9,
            )
            .unwrap(),
        );
        let bytes = s.to_bytes().unwrap();
        assert_eq!(bytes.len(), 18 + 2 * 65 * 8 + 8);
        assert_eq!(
            Model::from_bytes(&bytes).unwrap().to_bytes().unwrap(),
            bytes
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Model::from_bytes(b"VSA2").is_err());
        let w = vec![0.0, 1.0, 2.0, 3.0];
        let m = Model::Sgd(
            SgdModel::new(
                Paradigm::SgdCyclic,
                Family::Cyclic(4),
                2,
                2,
                w,
                1.0,
                None,
                0,
            )
            .unwrap(),
        );
        let mut bytes = m.to_bytes().unwrap();
        assert!(Model::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        bytes[18..26].copy_from_slice(&0.5f64.to_le_bytes());
        assert!(Model::from_bytes(&bytes).is_err());
    }
}
