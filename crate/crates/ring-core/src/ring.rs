/// Identifier of one of the three rings the protocols compute in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RingId {
    /// `Z_{2^64}`, the main computation ring.
    ZL,
    /// `Z_{2^64 - 1}`, odd-modulus ring used for sign-bit extraction.
    ZLm1,
    /// `Z_67`, small prime field for bit shares in private comparison.
    Zp,
}

pub const ZLM1_MOD: u64 = u64::MAX; // 2^64 - 1
pub const ZP_MOD: u64 = 67;

impl RingId {
    /// Bytes one element occupies on the wire.
    pub fn elem_bytes(self) -> usize {
        match self {
            RingId::ZL | RingId::ZLm1 => 8,
            RingId::Zp => 1,
        }
    }

    /// Whether `x` is a canonical representative of this ring.
    pub fn is_canonical(self, x: u64) -> bool {
        match self {
            RingId::ZL => true,
            RingId::ZLm1 => x < ZLM1_MOD,
            RingId::Zp => x < ZP_MOD,
        }
    }

    pub fn add(self, a: u64, b: u64) -> u64 {
        match self {
            RingId::ZL => a.wrapping_add(b),
            RingId::ZLm1 => {
                let s = a as u128 + b as u128;
                (s % ZLM1_MOD as u128) as u64
            }
            RingId::Zp => (a + b) % ZP_MOD,
        }
    }

    pub fn neg(self, a: u64) -> u64 {
        match self {
            RingId::ZL => a.wrapping_neg(),
            RingId::ZLm1 => {
                if a == 0 {
                    0
                } else {
                    ZLM1_MOD - a
                }
            }
            RingId::Zp => (ZP_MOD - a) % ZP_MOD,
        }
    }

    pub fn sub(self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(self, a: u64, b: u64) -> u64 {
        match self {
            RingId::ZL => a.wrapping_mul(b),
            RingId::ZLm1 => {
                let p = a as u128 * b as u128;
                (p % ZLM1_MOD as u128) as u64
            }
            RingId::Zp => (a * b) % ZP_MOD,
        }
    }
}

/// Two's-complement embedding of a signed value into `Z_{2^64}`.
pub fn i64_to_zl(v: i64) -> u64 {
    v as u64
}

/// Signed interpretation of a `Z_{2^64}` element.
pub fn zl_to_i64(x: u64) -> i64 {
    x as i64
}
