//! Exact integer forms of the square-root-derived sizing formulas.

/// Smallest `s` with `s * s >= n`, i.e. the ceiling of the real square root.
pub fn ceil_sqrt(n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let mut s = (n as f64).sqrt().ceil() as usize;
    while s > 0 && (s - 1).saturating_mul(s - 1) >= n {
        s -= 1;
    }
    while s.saturating_mul(s) < n {
        s += 1;
    }
    s
}

/// Smallest `t` with `(d * t)^2 >= n`, i.e. the ceiling of `sqrt(n) / d`.
pub fn ceil_sqrt_div(n: usize, d: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let mut t = ((n as f64).sqrt() / d as f64).ceil() as usize;
    while t > 0 && (d * (t - 1)).saturating_mul(d * (t - 1)) >= n {
        t -= 1;
    }
    while (d * t).saturating_mul(d * t) < n {
        t += 1;
    }
    t
}

/// Number of radix-256 digits needed for values `<= max_value`.
pub fn bytes_for_value(max_value: usize) -> u32 {
    let bits = usize::BITS - max_value.leading_zeros();
    bits.div_ceil(8).max(1)
}
