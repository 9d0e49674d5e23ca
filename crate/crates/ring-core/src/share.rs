use crate::{PrfStream, Result, RingTensor};

/// Both halves of a 2-out-of-2 additive sharing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretShare {
    pub part0: RingTensor,
    pub part1: RingTensor,
}

/// Share `x` as `(r, x - r)` with `r` drawn from `stream`.
pub fn share_tensor(x: &RingTensor, stream: &mut PrfStream) -> SecretShare {
    let r = stream.next_tensor(x.ring(), x.shape());
    let part1 = x.sub(&r).expect("mask has x's shape by construction");
    SecretShare { part0: r, part1 }
}

/// Share `x` with an explicit mask, for deterministic test vectors.
pub fn share_tensor_with_mask(x: &RingTensor, r: &RingTensor) -> Result<SecretShare> {
    let part1 = x.sub(r)?;
    Ok(SecretShare {
        part0: r.clone(),
        part1,
    })
}

pub fn reconstruct_parts(part0: &RingTensor, part1: &RingTensor) -> Result<RingTensor> {
    part0.add(part1)
}

impl SecretShare {
    pub fn reconstruct(&self) -> RingTensor {
        self.part0
            .add(&self.part1)
            .expect("share halves always agree in ring and shape")
    }
}
