//! Dense rank-N f32 tensor, the one value type exchanged between layers and
//! over the wire.

use crate::error::{Error, Result};

/// Row-major dense array of 32-bit floats.
///
/// Invariant: `data.len()` equals the product of `dims`. Layer ops in this
/// crate keep values finite; the trainer checks losses for divergence.
#[derive(Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f32>,
}

impl std::fmt::Debug for Tensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Tensor{:?}[{} values]", self.dims, self.data.len())
    }
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let expect: usize = dims.iter().product();
        if data.len() != expect {
            return Err(Error::shape(format!(
                "data length {} does not match dims {:?} (product {})",
                data.len(),
                dims,
                expect
            )));
        }
        Ok(Tensor { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Tensor {
            dims: dims.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn full(dims: &[usize], value: f32) -> Self {
        let n = dims.iter().product();
        Tensor {
            dims: dims.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn scalar(value: f32) -> Self {
        Tensor {
            dims: vec![1],
            data: vec![value],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest absolute element-wise difference; shapes must match.
    pub fn max_abs_diff(&self, other: &Tensor) -> Result<f32> {
        if self.dims != other.dims {
            return Err(Error::shape(format!(
                "max_abs_diff: dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max))
    }

    /// Stacks equal-shaped tensors along a new leading axis.
    pub fn stack(parts: &[Tensor]) -> Result<Tensor> {
        let first = parts
            .first()
            .ok_or_else(|| Error::validation("stack of zero tensors"))?;
        let mut data = Vec::with_capacity(first.len() * parts.len());
        for (i, p) in parts.iter().enumerate() {
            if p.dims != first.dims {
                return Err(Error::shape(format!(
                    "stack: element {i} has dims {:?}, expected {:?}",
                    p.dims, first.dims
                )));
            }
            data.extend_from_slice(&p.data);
        }
        let mut dims = Vec::with_capacity(first.rank() + 1);
        dims.push(parts.len());
        dims.extend_from_slice(&first.dims);
        Ok(Tensor { dims, data })
    }

    /// Splits along the leading axis, inverse of [`Tensor::stack`].
    pub fn unstack(&self) -> Result<Vec<Tensor>> {
        let &batch = self
            .dims
            .first()
            .ok_or_else(|| Error::shape("unstack: rank-0 tensor".to_string()))?;
        let inner: Vec<usize> = self.dims[1..].to_vec();
        let chunk: usize = inner.iter().product();
        Ok(self
            .data
            .chunks(chunk.max(1))
            .take(batch)
            .map(|c| Tensor {
                dims: inner.clone(),
                data: c.to_vec(),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_length_mismatch() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
    }

    #[test]
    fn stack_unstack_round_trip() {
        let a = Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Tensor::new(vec![2, 2], vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let s = Tensor::stack(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(s.dims(), &[2, 2, 2]);
        let parts = s.unstack().unwrap();
        assert_eq!(parts, vec![a, b]);
    }

    #[test]
    fn stack_rejects_ragged_parts() {
        let a = Tensor::zeros(&[2, 2]);
        let b = Tensor::zeros(&[2, 3]);
        assert!(Tensor::stack(&[a, b]).is_err());
    }
}
