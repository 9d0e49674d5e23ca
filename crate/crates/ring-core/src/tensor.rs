use crate::ring::{i64_to_zl, zl_to_i64};
use crate::{Result, RingError, RingId};

/// Dense row-major tensor of ring elements.
///
/// Elements are stored as canonical `u64` words regardless of ring; `Z_67`
/// elements only use values `0..67` and serialize to one byte each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingTensor {
    ring: RingId,
    shape: Vec<usize>,
    data: Vec<u64>,
}

impl RingTensor {
    pub fn zeros(ring: RingId, shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        RingTensor {
            ring,
            shape,
            data: vec![0; n],
        }
    }

    /// Construct without canonicality checks; `data` must already be reduced.
    pub(crate) fn from_raw(ring: RingId, shape: Vec<usize>, data: Vec<u64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        RingTensor { ring, shape, data }
    }

    pub fn from_vec(ring: RingId, shape: Vec<usize>, data: Vec<u64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(RingError::ShapeMismatch(shape, vec![data.len()]));
        }
        if let Some(&bad) = data.iter().find(|&&x| !ring.is_canonical(x)) {
            return Err(RingError::NotCanonical(bad, ring));
        }
        Ok(RingTensor { ring, shape, data })
    }

    /// Two's-complement embedding of signed values into `Z_{2^64}`.
    pub fn from_i64_vec(shape: Vec<usize>, data: &[i64]) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(RingError::ShapeMismatch(shape, vec![data.len()]));
        }
        Ok(RingTensor {
            ring: RingId::ZL,
            shape,
            data: data.iter().map(|&v| i64_to_zl(v)).collect(),
        })
    }

    pub fn ring(&self) -> RingId {
        self.ring
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u64] {
        &mut self.data
    }

    /// Signed interpretation of a `Z_{2^64}` tensor.
    pub fn to_i64_vec(&self) -> Vec<i64> {
        debug_assert_eq!(self.ring, RingId::ZL);
        self.data.iter().map(|&x| zl_to_i64(x)).collect()
    }

    fn check_same(&self, other: &RingTensor) -> Result<()> {
        if self.ring != other.ring {
            return Err(RingError::RingMismatch(self.ring, other.ring));
        }
        if self.shape != other.shape {
            return Err(RingError::ShapeMismatch(
                self.shape.clone(),
                other.shape.clone(),
            ));
        }
        Ok(())
    }

    fn zip(&self, other: &RingTensor, f: impl Fn(RingId, u64, u64) -> u64) -> Result<RingTensor> {
        self.check_same(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(self.ring, a, b))
            .collect();
        Ok(RingTensor {
            ring: self.ring,
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn add(&self, other: &RingTensor) -> Result<RingTensor> {
        self.zip(other, RingId::add)
    }

    pub fn sub(&self, other: &RingTensor) -> Result<RingTensor> {
        self.zip(other, RingId::sub)
    }

    pub fn mul(&self, other: &RingTensor) -> Result<RingTensor> {
        self.zip(other, RingId::mul)
    }

    pub fn neg(&self) -> RingTensor {
        let data = self.data.iter().map(|&a| self.ring.neg(a)).collect();
        RingTensor {
            ring: self.ring,
            shape: self.shape.clone(),
            data,
        }
    }

    pub fn scalar_mul(&self, k: u64) -> RingTensor {
        let data = self.data.iter().map(|&a| self.ring.mul(a, k)).collect();
        RingTensor {
            ring: self.ring,
            shape: self.shape.clone(),
            data,
        }
    }

    pub fn scalar_add(&self, k: u64) -> RingTensor {
        let data = self.data.iter().map(|&a| self.ring.add(a, k)).collect();
        RingTensor {
            ring: self.ring,
            shape: self.shape.clone(),
            data,
        }
    }

    /// Matrix product of two 2-d tensors.
    pub fn matmul(&self, other: &RingTensor) -> Result<RingTensor> {
        if self.ring != other.ring {
            return Err(RingError::RingMismatch(self.ring, other.ring));
        }
        let (a, b) = (&self.shape, &other.shape);
        if a.len() != 2 || b.len() != 2 || a[1] != b[0] {
            return Err(RingError::BadMatmul(a.clone(), b.clone()));
        }
        let (m, k, n) = (a[0], a[1], b[1]);
        let ring = self.ring;
        let mut data = vec![0u64; m * n];
        for i in 0..m {
            for t in 0..k {
                let x = self.data[i * k + t];
                if x == 0 {
                    continue;
                }
                for j in 0..n {
                    let prod = ring.mul(x, other.data[t * n + j]);
                    data[i * n + j] = ring.add(data[i * n + j], prod);
                }
            }
        }
        Ok(RingTensor {
            ring,
            shape: vec![m, n],
            data,
        })
    }

    pub fn reshape(&self, shape: Vec<usize>) -> Result<RingTensor> {
        if shape.iter().product::<usize>() != self.numel() {
            return Err(RingError::BadReshape(self.shape.clone(), shape));
        }
        Ok(RingTensor {
            ring: self.ring,
            shape,
            data: self.data.clone(),
        })
    }
}
