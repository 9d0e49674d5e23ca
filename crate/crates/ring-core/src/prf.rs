use aes::cipher::{BlockCipherEncrypt, KeyInit};
use aes::Aes128;

use crate::ring::{ZLM1_MOD, ZP_MOD};
use crate::{RingId, RingTensor};

/// Deterministic randomness stream: AES-128 in counter mode over
/// `label || block_counter`, consumed as a byte stream.
///
/// Every piece of protocol randomness is drawn from one of these streams, so
/// two parties holding the same key and label derive identical values and a
/// whole protocol run is reproducible from its seeds.
pub struct PrfStream {
    cipher: Aes128,
    label: u64,
    block_ctr: u64,
    buf: [u8; 16],
    pos: usize,
}

impl PrfStream {
    pub fn new(key: &[u8; 16], label: u64) -> Self {
        PrfStream {
            cipher: Aes128::new(key.into()),
            label,
            block_ctr: 0,
            buf: [0u8; 16],
            pos: 16,
        }
    }

    fn refill(&mut self) {
        let mut block = [0u8; 16];
        block[..8].copy_from_slice(&self.label.to_le_bytes());
        block[8..].copy_from_slice(&self.block_ctr.to_le_bytes());
        self.block_ctr = self
            .block_ctr
            .checked_add(1)
            .expect("PRF stream block counter exhausted");
        self.cipher.encrypt_block((&mut block).into());
        self.buf = block;
        self.pos = 0;
    }

    pub fn next_byte(&mut self) -> u8 {
        if self.pos == 16 {
            self.refill();
        }
        let b = self.buf[self.pos];
        self.pos += 1;
        b
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut bytes = [0u8; 8];
        for b in bytes.iter_mut() {
            *b = self.next_byte();
        }
        u64::from_le_bytes(bytes)
    }

    /// A uniform element of `ring`, by rejection sampling where the modulus
    /// does not divide the sample space.
    pub fn next_elem(&mut self, ring: RingId) -> u64 {
        match ring {
            RingId::ZL => self.next_u64(),
            RingId::ZLm1 => loop {
                let x = self.next_u64();
                if x < ZLM1_MOD {
                    return x;
                }
            },
            RingId::Zp => loop {
                // 201 = 3 * 67 is the largest multiple of 67 below 256.
                let b = self.next_byte();
                if (b as u64) < 3 * ZP_MOD {
                    return b as u64 % ZP_MOD;
                }
            },
        }
    }

    /// A uniform nonzero element of `ring`.
    pub fn next_nonzero(&mut self, ring: RingId) -> u64 {
        loop {
            let x = self.next_elem(ring);
            if x != 0 {
                return x;
            }
        }
    }

    pub fn next_tensor(&mut self, ring: RingId, shape: &[usize]) -> RingTensor {
        let n: usize = shape.iter().product();
        let data: Vec<u64> = (0..n).map(|_| self.next_elem(ring)).collect();
        RingTensor::from_raw(ring, shape.to_vec(), data)
    }

    /// Fisher-Yates permutation of `0..n`.
    pub fn next_permutation(&mut self, n: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            // Rejection-sampled uniform index in 0..=i.
            let bound = (i + 1) as u64;
            let zone = u64::MAX - u64::MAX % bound;
            let j = loop {
                let x = self.next_u64();
                if x < zone {
                    break (x % bound) as usize;
                }
            };
            perm.swap(i, j);
        }
        perm
    }
}
