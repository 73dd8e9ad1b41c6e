//! Counter-based random sampling for reproducible parallel Monte Carlo.
//!
//! Every draw is a pure function of `(seed, path, step, coord)`, so path
//! simulations can run on any number of workers in any order and still
//! produce bit-identical output. The generator hashes the counter tuple
//! through chained 64-bit finalizer rounds and maps the result to a standard
//! normal via Box-Muller.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut x: u64) -> u64 {
    // splitmix64 finalizer: a full-period bijection on u64
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

#[inline]
fn hash_counter(seed: u64, path: u64, step: u64, coord: u64, stream: u64) -> u64 {
    let mut h = mix(seed ^ GOLDEN);
    h = mix(h.wrapping_add(path).wrapping_mul(GOLDEN | 1) ^ path.rotate_left(17));
    h = mix(h ^ step.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    h = mix(h ^ coord.wrapping_mul(0xA24B_AED4_963E_E407));
    mix(h ^ stream)
}

#[inline]
fn to_unit_open(h: u64) -> f64 {
    // (0, 1]: zero is excluded so the Box-Muller log is safe
    ((h >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

#[inline]
fn to_unit_half_open(h: u64) -> f64 {
    // [0, 1)
    (h >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Standard normal draw for the counter `(seed, path, step, coord)`.
pub fn standard_normal(seed: u64, path: u64, step: u64, coord: u64) -> f64 {
    let u1 = to_unit_open(hash_counter(seed, path, step, coord, 0));
    let u2 = to_unit_half_open(hash_counter(seed, path, step, coord, 1));
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

/// Uniform draw in `[0, 1)` for the counter `(seed, path, step, coord)`.
pub fn uniform(seed: u64, path: u64, step: u64, coord: u64) -> f64 {
    to_unit_half_open(hash_counter(seed, path, step, coord, 2))
}
