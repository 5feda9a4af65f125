//! Binary-reflected Gray code over most-significant-bit-first bit strings.

use super::SearchError;

pub fn gray_encode(value: u32, width: usize) -> Result<Vec<bool>, SearchError> {
    if width == 0 || width > 32 || (width < 32 && value >> width != 0) {
        return Err(SearchError::GrayRange { value, width });
    }
    let g = value ^ (value >> 1);
    Ok((0..width).rev().map(|i| g >> i & 1 == 1).collect())
}

pub fn gray_decode(bits: &[bool]) -> u32 {
    let mut value = 0u32;
    let mut prev = false;
    for &b in bits {
        prev ^= b;
        value = value << 1 | u32::from(prev);
    }
    value
}
