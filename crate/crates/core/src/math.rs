//! Scalar helpers. Transcendentals go through `libm` so that results do not
//! depend on the platform C library.

pub use core::f64::consts::{LN_2, PI, TAU};

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `x·ln x` with the continuous extension `0·ln 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * ln(x)
    }
}

/// Exponent below which the truncated kernel is treated as exactly zero.
/// `e^-36 ≈ 2.3e-16`, i.e. below one ulp of the kernel peak.
pub const KERNEL_CUTOFF: f64 = 36.0;

const MAGIC: f64 = 6_755_399_441_055_744.0; // 1.5 * 2^52
const LN2_HI: f64 = 6.931_471_803_691_238e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;

/// `e^x` for `x ∈ [-KERNEL_CUTOFF, 0]`, returning 0 below the cutoff.
///
/// Branch-free (Cody–Waite reduction plus a degree-12 Taylor polynomial on
/// `|r| ≤ ln2/2`) so the pairwise loops vectorize. Relative error is a few
/// ulp on the supported range.
#[inline(always)]
pub fn kernel_exp(x: f64) -> f64 {
    // all ones inside the support, zero below the cutoff; an integer mask
    // keeps LLVM from turning the cutoff into a branch
    let keep = ((x + KERNEL_CUTOFF).to_bits() >> 63).wrapping_sub(1);
    let xc = x.max(-KERNEL_CUTOFF);
    let t = xc * core::f64::consts::LOG2_E + MAGIC;
    let k = t - MAGIC;
    let r = (xc - k * LN2_HI) - k * LN2_LO;
    let mut p = 1.0 / 479_001_600.0;
    p = p * r + 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    // low bits of t hold k in two's complement
    let kbits = t.to_bits().wrapping_sub(MAGIC.to_bits());
    let scale = f64::from_bits((kbits.wrapping_add(1023) << 52) & keep);
    p * scale
}
