//! Named, ordered parameter collections and the SFPS checkpoint format.

use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bytes::{Reader, Writer};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// SFPS container magic bytes.
pub const SFPS_MAGIC: &[u8; 4] = b"SFPS";
/// Only supported SFPS version.
pub const SFPS_VERSION: u8 = 0x01;

/// Ordered collection of uniquely named parameter tensors.
///
/// Iteration order is insertion order and survives save/load bit-exactly,
/// which is what makes checkpoints and hashes stable.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamSet {
    entries: Vec<(String, Tensor)>,
}

impl ParamSet {
    pub fn new() -> Self {
        ParamSet::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor) -> Result<()> {
        let name = name.into();
        if self.index_of(&name).is_some() {
            return Err(Error::validation(format!("duplicate parameter name {name:?}")));
        }
        self.entries.push((name, value));
        Ok(())
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|(n, _)| n == name)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.index_of(name).map(|i| &self.entries[i].1)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.index_of(name).map(|i| &mut self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor)> {
        self.entries.iter_mut().map(|(n, t)| (n.as_str(), t))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Total number of scalar parameters.
    pub fn value_count(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    /// Zero tensors with the same names and dims, in the same order.
    pub fn zeros_like(&self) -> ParamSet {
        ParamSet {
            entries: self
                .entries
                .iter()
                .map(|(n, t)| (n.clone(), Tensor::zeros(t.dims())))
                .collect(),
        }
    }

    /// Appends every entry of `other`; names must stay unique.
    pub fn merged(mut self, other: ParamSet) -> Result<ParamSet> {
        for (name, value) in other.entries {
            self.insert(name, value)?;
        }
        Ok(self)
    }

    /// Element-wise `self += other`, matched entry by entry.
    pub fn add_assign(&mut self, other: &ParamSet) -> Result<()> {
        check_aligned(self, other)?;
        for ((_, a), (_, b)) in self.entries.iter_mut().zip(&other.entries) {
            for (x, y) in a.data_mut().iter_mut().zip(b.data()) {
                *x += y;
            }
        }
        Ok(())
    }

    /// Element-wise scale of every tensor.
    pub fn scale(&mut self, factor: f32) {
        for (_, t) in self.entries.iter_mut() {
            for v in t.data_mut() {
                *v *= factor;
            }
        }
    }

    /// Largest absolute element-wise difference across all entries.
    pub fn max_abs_diff(&self, other: &ParamSet) -> Result<f32> {
        check_aligned(self, other)?;
        let mut worst = 0.0f32;
        for ((_, a), (_, b)) in self.entries.iter().zip(&other.entries) {
            worst = worst.max(a.max_abs_diff(b)?);
        }
        Ok(worst)
    }

    /// Canonical SFPS serialization.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(SFPS_MAGIC);
        w.u8(SFPS_VERSION);
        w.u32_le(self.entries.len() as u32);
        for (name, tensor) in &self.entries {
            w.u16_le(name.len() as u16);
            w.bytes(name.as_bytes());
            w.u8(tensor.rank() as u8);
            for &d in tensor.dims() {
                w.u32_le(d as u32);
            }
            w.f32_slice(tensor.data());
        }
        w.into_bytes()
    }

    pub fn from_bytes(buf: &[u8]) -> Result<ParamSet> {
        let mut r = Reader::new(buf);
        let magic = r.take(4, "SFPS magic")?;
        if magic != SFPS_MAGIC {
            return Err(Error::Format {
                offset: 0,
                message: format!("bad magic {magic:02x?}, expected \"SFPS\""),
            });
        }
        let version = r.u8("SFPS version")?;
        if version != SFPS_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let count = r.u32_le("entry count")?;
        let mut set = ParamSet::new();
        for _ in 0..count {
            let name_len = r.u16_le("name length")? as usize;
            let name = r.utf8(name_len, "parameter name")?.to_string();
            let rank = r.u8("rank")? as usize;
            let mut dims = Vec::with_capacity(rank);
            let mut product: u64 = 1;
            for _ in 0..rank {
                let d = r.u32_le("dim")? as usize;
                product = product.saturating_mul(d as u64);
                dims.push(d);
            }
            if product.saturating_mul(4) > r.remaining() as u64 {
                return Err(Error::Format {
                    offset: r.offset(),
                    message: format!("tensor {name:?} claims {product} values, larger than the rest of the file"),
                });
            }
            let data = r.f32_slice(product as usize, "tensor data")?;
            let tensor = Tensor::new(dims, data).map_err(|e| Error::Format {
                offset: r.offset(),
                message: e.to_string(),
            })?;
            set.insert(name, tensor).map_err(|e| Error::Format {
                offset: r.offset(),
                message: e.to_string(),
            })?;
        }
        r.expect_end("SFPS file")?;
        Ok(set)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ParamSet> {
        let buf = std::fs::read(path)?;
        ParamSet::from_bytes(&buf)
    }
}

/// Fails with the first mismatched name or dims between two sets.
pub fn check_aligned(a: &ParamSet, b: &ParamSet) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::shape(format!(
            "parameter sets have {} vs {} entries",
            a.len(),
            b.len()
        )));
    }
    for ((an, at), (bn, bt)) in a.entries.iter().zip(&b.entries) {
        if an != bn {
            return Err(Error::shape(format!("parameter name mismatch: {an:?} vs {bn:?}")));
        }
        if at.dims() != bt.dims() {
            return Err(Error::shape(format!(
                "parameter {an:?} dims {:?} vs {:?}",
                at.dims(),
                bt.dims()
            )));
        }
    }
    Ok(())
}

/// Shape of one conv layer's learnable tensors.
#[derive(Clone, Debug)]
pub struct ConvSpec {
    /// Name stem; tensors are stored as `{name}.w` and `{name}.b`.
    pub name: String,
    pub out_channels: usize,
    pub in_channels: usize,
    pub kernel: usize,
}

impl ConvSpec {
    pub fn value_count(&self) -> usize {
        self.out_channels * self.in_channels * self.kernel * self.kernel + self.out_channels
    }
}

/// He-normal initialization for a list of conv layers: weights drawn from
/// N(0, 2/fan_in), biases zero. Deterministic for a given seed.
pub fn init_params(specs: &[ConvSpec], seed: u64) -> Result<ParamSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = ParamSet::new();
    for spec in specs {
        let fan_in = spec.in_channels * spec.kernel * spec.kernel;
        let std = (2.0 / fan_in as f32).sqrt();
        let n = spec.out_channels * spec.in_channels * spec.kernel * spec.kernel;
        let data: Vec<f32> = (0..n)
            .map(|_| {
                let z: f32 = rng.sample(StandardNormal);
                z * std
            })
            .collect();
        let dims = vec![spec.out_channels, spec.in_channels, spec.kernel, spec.kernel];
        set.insert(format!("{}.w", spec.name), Tensor::new(dims, data)?)?;
        set.insert(format!("{}.b", spec.name), Tensor::zeros(&[spec.out_channels]))?;
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_set() -> ParamSet {
        let mut p = ParamSet::new();
        p.insert("a.w", Tensor::new(vec![2, 2], vec![1.0, -2.0, 3.5, 0.25]).unwrap())
            .unwrap();
        p.insert("a.b", Tensor::new(vec![2], vec![0.5, -0.5]).unwrap())
            .unwrap();
        p
    }

    #[test]
    fn sfps_round_trip_is_identity() {
        let p = sample_set();
        let bytes = p.to_bytes();
        let q = ParamSet::from_bytes(&bytes).unwrap();
        assert_eq!(p, q);
        assert_eq!(bytes, q.to_bytes());
    }

    #[test]
    fn sfps_layout_is_bit_exact() {
        let mut p = ParamSet::new();
        p.insert("x", Tensor::scalar(42.0)).unwrap();
        let bytes = p.to_bytes();
        let expect = [
            b'S', b'F', b'P', b'S', 0x01, // magic + version
            0x01, 0x00, 0x00, 0x00, // count = 1
            0x01, 0x00, // name length = 1
            b'x',  // name
            0x01, // rank
            0x01, 0x00, 0x00, 0x00, // dims = [1]
            0x00, 0x00, 0x28, 0x42, // 42.0f32 LE
        ];
        assert_eq!(bytes, expect);
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let p = sample_set();
        let mut bytes = p.to_bytes();
        bytes[0] = b'X';
        assert!(matches!(
            ParamSet::from_bytes(&bytes),
            Err(Error::Format { offset: 0, .. })
        ));
        let mut bytes = p.to_bytes();
        bytes[4] = 0x02;
        assert!(matches!(
            ParamSet::from_bytes(&bytes),
            Err(Error::UnsupportedVersion(0x02))
        ));
    }

    #[test]
    fn rejects_truncation_with_offset() {
        let p = sample_set();
        let bytes = p.to_bytes();
        let cut = &bytes[..bytes.len() - 3];
        match ParamSet::from_bytes(cut) {
            Err(Error::Format { offset, .. }) => assert!(offset > 0),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut p = ParamSet::new();
        p.insert("w", Tensor::scalar(1.0)).unwrap();
        assert!(p.insert("w", Tensor::scalar(2.0)).is_err());
    }

    #[test]
    fn init_params_deterministic_and_seed_sensitive() {
        let specs = [ConvSpec {
            name: "c1".into(),
            out_channels: 4,
            in_channels: 3,
            kernel: 3,
        }];
        let a = init_params(&specs, 11).unwrap();
        let b = init_params(&specs, 11).unwrap();
        let c = init_params(&specs, 12).unwrap();
        assert_eq!(a, b);
        assert!(a.max_abs_diff(&c).unwrap() > 0.0);
        // biases zero
        assert!(a.get("c1.b").unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn init_params_he_std() {
        // 3x3 kernels over 8 input channels: fan_in = 72. Draw enough weights
        // for a stable sample standard deviation.
        let specs = [ConvSpec {
            name: "big".into(),
            out_channels: 139, // 139*8*9 = 10008 >= 1e4 samples
            in_channels: 8,
            kernel: 3,
        }];
        let p = init_params(&specs, 5).unwrap();
        let w = p.get("big.w").unwrap().data();
        assert!(w.len() >= 10_000);
        let mean: f64 = w.iter().map(|&v| v as f64).sum::<f64>() / w.len() as f64;
        let var: f64 =
            w.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / w.len() as f64;
        let std = var.sqrt();
        let expect = (2.0f64 / 72.0).sqrt();
        assert!(
            (std - expect).abs() < 0.1 * expect,
            "std {std} not within 10% of {expect}"
        );
    }
}
