//! Closed-form wire costs (payload bytes, all channels combined) for each
//! protocol. Tests pin the implementations to these numbers byte for byte.

/// Bytes per 64-bit ring element on the wire.
pub const ELEM_BYTES: u64 = 8;

/// Elementwise Beaver multiplication over n elements.
pub fn mult_bytes(n: usize) -> u64 {
    40 * n as u64
}

/// Matrix multiplication of l x m by m x n.
pub fn matmul_bytes(l: usize, m: usize, n: usize) -> u64 {
    ELEM_BYTES * (2 * l * m + 2 * m * n + l * n) as u64
}

/// Stride-1 valid convolution of h x w x i input with f x g x i x o filters.
pub fn conv2d_bytes(h: usize, w: usize, i: usize, f: usize, g: usize, o: usize) -> u64 {
    let (qh, qw) = (h - f + 1, w - g + 1);
    ELEM_BYTES * (2 * h * w * i + 2 * f * g * i * o + qh * qw * o) as u64
}

/// Private comparison over n elements of `nbits` bit shares: each party sends
/// one masked codeword byte per bit.
pub fn private_compare_bytes(n: usize, nbits: u32) -> u64 {
    2 * n as u64 * nbits as u64
}

/// Share conversion per element: masked value (16) + explicit bit shares (64)
/// + wrap-bit shares (16) + comparison (128) + result-bit share (8).
pub fn share_convert_bytes(n: usize) -> u64 {
    232 * n as u64
}

/// MSB per element: explicit bit shares (64) + low-bit share (8) + mask
/// reveal (16) + comparison (128) + result-bit share (8) + one bit
/// multiplication (40).
pub fn msb_bytes(n: usize) -> u64 {
    264 * n as u64
}

/// Sign bit per element: conversion + MSB on the doubled value.
pub fn drelu_bytes(n: usize) -> u64 {
    share_convert_bytes(n) + msb_bytes(n)
}

/// Rectification per element: sign bit + one selecting multiplication.
pub fn relu_bytes(n: usize) -> u64 {
    drelu_bytes(n) + mult_bytes(n)
}

/// Tournament maximum/argmax over `count` candidates in each of `lanes`
/// lanes: count - 1 rounds of one sign bit and two multiplications.
pub fn maxpool_bytes(lanes: usize, count: usize) -> u64 {
    (count as u64 - 1) * (drelu_bytes(lanes) + 2 * mult_bytes(lanes))
}

/// Folded batch normalization over n elements: one multiplication.
pub fn batchnorm_bytes(n: usize) -> u64 {
    mult_bytes(n)
}
