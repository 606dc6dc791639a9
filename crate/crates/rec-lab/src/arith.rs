//! Shared modular arithmetic on `u64` residues.
//!
//! All moduli in the crate are prime powers `p^k ≤ 2^63`, so sums of two
//! residues never overflow a `u64` and products fit a `u128`.

/// Largest modulus the coefficient arithmetic accepts. Keeping moduli at or
/// below `2^63` lets `add_mod` work without overflow checks.
pub(crate) const MAX_MODULUS: u64 = 1 << 63;

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    debug_assert!(a < m && b < m);
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
pub(crate) fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    debug_assert!(a < m && b < m);
    if a >= b {
        a - b
    } else {
        a + m - b
    }
}

#[inline]
pub(crate) fn neg_mod(a: u64, m: u64) -> u64 {
    debug_assert!(a < m);
    if a == 0 {
        0
    } else {
        m - a
    }
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    debug_assert!(a < m && b < m);
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    base %= m;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// `p^n` if it fits the coefficient budget (`≤ 2^63`), else `None`.
pub(crate) fn checked_prime_power(p: u64, n: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..n {
        acc = acc.checked_mul(p)?;
        if acc > MAX_MODULUS {
            return None;
        }
    }
    Some(acc)
}

/// p-adic valuation of `v`, or `None` when `v = 0`.
pub(crate) fn val_p_u64(mut v: u64, p: u64) -> Option<u32> {
    if v == 0 {
        return None;
    }
    let mut k = 0;
    while v.is_multiple_of(p) {
        v /= p;
        k += 1;
    }
    Some(k)
}

/// Modular inverse by the extended Euclidean algorithm; `None` when
/// `gcd(a, m) ≠ 1`.
pub(crate) fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 0 {
        return None;
    }
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    let mut t = t0 % m as i128;
    if t < 0 {
        t += m as i128;
    }
    Some(t as u64)
}

/// Primality by trial division; only ever called on small inputs.
pub(crate) fn is_small_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Exact binomial coefficient for the small arguments used by the
/// cyclotomic minimal polynomial (`n ≤ 7` in practice).
pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}
