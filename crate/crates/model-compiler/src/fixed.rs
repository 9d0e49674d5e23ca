use crate::error::CompileError;
use crate::graph::{FloatTensor, IntTensor};

/// Global fixed-point parameters: 64-bit words, one public scale exponent
/// shared by every tensor in the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedConfig {
    pub s: u32,
}

impl FixedConfig {
    pub fn new(s: u32) -> Result<Self, CompileError> {
        if s > 63 {
            return Err(CompileError::BadScale(s));
        }
        Ok(FixedConfig { s })
    }
}

/// `floor(r * 2^s)` computed exactly on the float32 value, reduced mod 2^64.
///
/// The float is decomposed into an integer mantissa and a power-of-two
/// exponent, so the shift is exact; negative values floor (arithmetic right
/// shift), matching the ScaleDown semantics used everywhere else.
pub fn rho_wrapping(r: f32, s: u32) -> i64 {
    let (m, e) = decompose(r);
    let shift = e + s as i64;
    if m == 0 {
        return 0;
    }
    if shift >= 0 {
        if shift >= 64 {
            0
        } else {
            ((m as i128) << shift) as i64
        }
    } else {
        let right = (-shift).min(127) as u32;
        (m >> right) as i64
    }
}

/// Like [`rho_wrapping`] but reports values outside the signed 64-bit range,
/// where the fixed-point encoding stops being meaningful.
pub fn rho_checked(r: f32, s: u32) -> Result<i64, CompileError> {
    let (m, e) = decompose(r);
    let shift = e + s as i64;
    if m == 0 {
        return Ok(0);
    }
    let exact: i128 = if shift >= 0 {
        if shift >= 100 {
            return Err(CompileError::RhoOverflow { value: r, scale: s });
        }
        (m as i128) << shift
    } else {
        m >> (-shift).min(127) as u32
    };
    i64::try_from(exact).map_err(|_| CompileError::RhoOverflow { value: r, scale: s })
}

/// Signed integer mantissa and binary exponent with `r = m * 2^e` exactly.
fn decompose(r: f32) -> (i128, i64) {
    let bits = r.to_bits();
    let sign = if bits >> 31 == 1 { -1i128 } else { 1i128 };
    let exp_field = ((bits >> 23) & 0xff) as i64;
    let frac = (bits & 0x7f_ffff) as i128;
    debug_assert!(exp_field != 0xff, "rho requires finite input");
    if exp_field == 0 {
        (sign * frac, -126 - 23)
    } else {
        (sign * (frac | (1 << 23)), exp_field - 127 - 23)
    }
}

pub fn quantize_tensor_wrapping(t: &FloatTensor, s: u32) -> IntTensor {
    IntTensor::new(
        t.dims.clone(),
        t.data.iter().map(|&v| rho_wrapping(v, s)).collect(),
    )
}

pub fn quantize_tensor_checked(t: &FloatTensor, s: u32) -> Result<IntTensor, CompileError> {
    let data = t
        .data
        .iter()
        .map(|&v| rho_checked(v, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IntTensor::new(t.dims.clone(), data))
}
