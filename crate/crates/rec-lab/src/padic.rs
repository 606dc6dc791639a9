//! Fixed-precision arithmetic in ℤ/p^N for a small odd prime p.
//!
//! A [`PAdicScalar`] is a canonical residue in `[0, p^N)` together with the
//! modulus data that produced it. Precision `N` is a per-value attribute: it
//! is reduced only by [`PAdicScalar::div_exact_p`], never silently, because
//! losing track of a division by p is the main correctness hazard in the
//! trace formulas downstream. Ordinary ring operations keep the minimum of
//! the operand precisions and never renormalize.

use crate::arith::{
    add_mod, checked_prime_power, inv_mod, is_small_prime, mul_mod, neg_mod, pow_mod, sub_mod,
    val_p_u64,
};
use crate::error::{Error, Result};
use std::fmt;

/// Result of a valuation query on a fixed-precision value.
///
/// A stored zero cannot be distinguished from "divisible by p^N", so the
/// valuation of zero is reported as [`Valuation::AtLeast`] the precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    /// The valuation is exactly this.
    Exact(u32),
    /// Every digit within precision vanishes; the true valuation is at least
    /// this (and possibly infinite).
    AtLeast(u32),
}

impl Valuation {
    /// Whether the valuation is provably `≥ k`.
    pub fn at_least(self, k: u32) -> bool {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v >= k,
        }
    }

    /// Numeric lower bound carried by the query.
    pub fn lower_bound(self) -> u32 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, "≥{v}"),
        }
    }
}

/// An element of ℤ/p^N with explicit precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PAdicScalar {
    prime: u64,
    precision: u32,
    value: u64,
}

impl PAdicScalar {
    /// Builds a scalar, validating the modulus data and reducing `value`.
    ///
    /// `prime` must be an odd prime (p = 2 is rejected: the tower built on
    /// top of this ring degenerates there and the torsion arguments need p
    /// odd), `precision ≥ 1`, and `p^precision` must fit the coefficient
    /// budget.
    pub fn new(prime: u64, precision: u32, value: u64) -> Result<Self> {
        if prime < 3 || !is_small_prime(prime) {
            return Err(Error::UnsupportedPrime(prime));
        }
        if precision == 0 {
            return Err(Error::PrecisionTooLow {
                required: 1,
                actual: 0,
            });
        }
        let modulus = checked_prime_power(prime, precision)
            .ok_or(Error::PrecisionTooHigh { prime, precision })?;
        Ok(PAdicScalar {
            prime,
            precision,
            value: value % modulus,
        })
    }

    /// Builds a scalar from a signed integer.
    pub fn from_i64(prime: u64, precision: u32, value: i64) -> Result<Self> {
        let probe = PAdicScalar::new(prime, precision, 0)?;
        let m = probe.modulus() as i128;
        let v = (value as i128).rem_euclid(m) as u64;
        PAdicScalar::new(prime, precision, v)
    }

    /// The zero of ℤ/p^N.
    pub fn zero(prime: u64, precision: u32) -> Result<Self> {
        PAdicScalar::new(prime, precision, 0)
    }

    /// The one of ℤ/p^N.
    pub fn one(prime: u64, precision: u32) -> Result<Self> {
        PAdicScalar::new(prime, precision, 1)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Canonical residue in `[0, p^N)`.
    pub fn value(&self) -> u64 {
        self.value
    }

    /// `p^N` for this value's own precision.
    pub fn modulus(&self) -> u64 {
        checked_prime_power(self.prime, self.precision).expect("modulus validated at construction")
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// Reduce to a smaller precision (a pure truncation; never an error to
    /// know less).
    pub fn reduce_precision(&self, precision: u32) -> Result<Self> {
        if precision > self.precision {
            return Err(Error::PrecisionTooLow {
                required: precision,
                actual: self.precision,
            });
        }
        PAdicScalar::new(self.prime, precision, self.value)
    }

    /// Residue of the value mod p, as a plain integer in `[0, p)`.
    pub fn residue(&self) -> u64 {
        self.value % self.prime
    }

    fn align(&self, other: &Self) -> Result<(PAdicScalar, PAdicScalar)> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch {
                left: self.prime,
                right: other.prime,
            });
        }
        let precision = self.precision.min(other.precision);
        Ok((
            self.reduce_precision(precision)?,
            other.reduce_precision(precision)?,
        ))
    }

    /// Sum; mixed precision coerces to the minimum, mixed primes error.
    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.align(other)?;
        PAdicScalar::new(a.prime, a.precision, add_mod(a.value, b.value, a.modulus()))
    }

    /// Difference; same coercion rules as [`PAdicScalar::checked_add`].
    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.align(other)?;
        PAdicScalar::new(a.prime, a.precision, sub_mod(a.value, b.value, a.modulus()))
    }

    /// Product; same coercion rules as [`PAdicScalar::checked_add`].
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.align(other)?;
        PAdicScalar::new(a.prime, a.precision, mul_mod(a.value, b.value, a.modulus()))
    }

    /// Additive inverse.
    pub fn neg(&self) -> Self {
        PAdicScalar {
            value: neg_mod(self.value, self.modulus()),
            ..*self
        }
    }

    /// `self^exp` by binary powering.
    pub fn pow_u64(&self, exp: u64) -> Self {
        PAdicScalar {
            value: pow_mod(self.value, exp, self.modulus()),
            ..*self
        }
    }

    /// Largest `k ≤ N` with `p^k | value`; `AtLeast(N)` for a stored zero.
    pub fn val_p(&self) -> Valuation {
        match val_p_u64(self.value, self.prime) {
            Some(v) => Valuation::Exact(v.min(self.precision)),
            None => Valuation::AtLeast(self.precision),
        }
    }

    /// Inverse of a unit; errors with [`Error::NotAUnit`] when `p | value`.
    pub fn inv_unit(&self) -> Result<Self> {
        if self.value.is_multiple_of(self.prime) {
            return Err(Error::NotAUnit);
        }
        let inv = inv_mod(self.value, self.modulus())
            .expect("unit residues are invertible modulo a prime power");
        PAdicScalar::new(self.prime, self.precision, inv)
    }

    /// Exact division by `p^k`. The result has precision `N − k`; the drop is
    /// recorded in the returned value. Requires `k < N` so at least one
    /// guaranteed digit survives.
    pub fn div_exact_p(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Ok(*self);
        }
        if k >= self.precision {
            return Err(Error::PrecisionTooLow {
                required: k + 1,
                actual: self.precision,
            });
        }
        if !self.val_p().at_least(k) {
            return Err(Error::NotDivisible {
                required: k as i64,
                available: self.val_p().lower_bound() as i64,
            });
        }
        let divisor = checked_prime_power(self.prime, k).expect("k < N so p^k fits");
        PAdicScalar::new(self.prime, self.precision - k, self.value / divisor)
    }

    /// Teichmüller lift of the residue mod p: the unique `(p−1)`-th root of
    /// unity (or zero) congruent to this value mod p.
    pub fn teichmuller(&self) -> Self {
        let mut t = *self;
        // x ↦ x^p gains one digit of agreement per pass and fixes the limit.
        for _ in 0..self.precision {
            t = t.pow_u64(self.prime);
        }
        t
    }
}

impl fmt::Display for PAdicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.value, self.prime, self.precision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn s(p: u64, n: u32, v: u64) -> PAdicScalar {
        PAdicScalar::new(p, n, v).unwrap()
    }

    #[test]
    fn construction_validates_modulus_data() {
        assert_eq!(PAdicScalar::new(2, 4, 1), Err(Error::UnsupportedPrime(2)));
        assert_eq!(PAdicScalar::new(9, 4, 1), Err(Error::UnsupportedPrime(9)));
        assert_eq!(
            PAdicScalar::new(3, 0, 1),
            Err(Error::PrecisionTooLow {
                required: 1,
                actual: 0
            })
        );
        assert!(matches!(
            PAdicScalar::new(3, 64, 1),
            Err(Error::PrecisionTooHigh { .. })
        ));
        assert_eq!(s(3, 2, 11).value(), 2);
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(s(3, 4, 9).val_p(), Valuation::Exact(2));
        assert_eq!(s(3, 4, 1).val_p(), Valuation::Exact(0));
        assert_eq!(s(3, 4, 0).val_p(), Valuation::AtLeast(4));
        assert_eq!(format!("{}", s(3, 4, 0).val_p()), "≥4");
    }

    #[test]
    fn unit_inverse_examples() {
        assert_eq!(s(3, 2, 2).inv_unit().unwrap().value(), 5);
        assert_eq!(s(5, 1, 4).inv_unit().unwrap().value(), 4);
        assert_eq!(s(3, 2, 3).inv_unit(), Err(Error::NotAUnit));
    }

    #[test]
    fn exact_division_examples() {
        let q = s(3, 4, 18).div_exact_p(2).unwrap();
        assert_eq!((q.precision(), q.value()), (2, 2));
        let z = s(3, 4, 0).div_exact_p(3).unwrap();
        assert_eq!((z.precision(), z.value()), (1, 0));
        assert!(matches!(
            s(3, 4, 3).div_exact_p(2),
            Err(Error::NotDivisible { .. })
        ));
        assert!(matches!(
            s(3, 4, 0).div_exact_p(4),
            Err(Error::PrecisionTooLow { .. })
        ));
    }

    #[test]
    fn ring_axioms_on_random_triples() {
        for p in [3u64, 5, 7] {
            let n = 8;
            let mut rng = ChaCha12Rng::seed_from_u64(17 * p);
            let modulus = checked_prime_power(p, n).unwrap();
            for _ in 0..1000 {
                let a = s(p, n, rng.random_range(0..modulus));
                let b = s(p, n, rng.random_range(0..modulus));
                let c = s(p, n, rng.random_range(0..modulus));
                // Independent oracle: direct i128 arithmetic mod p^n.
                let m = modulus as i128;
                let want_ab = (a.value() as i128 + b.value() as i128).rem_euclid(m) as u64;
                assert_eq!(a.checked_add(&b).unwrap().value(), want_ab);
                let want_mul = (a.value() as i128 * b.value() as i128).rem_euclid(m) as u64;
                assert_eq!(a.checked_mul(&b).unwrap().value(), want_mul);
                // Associativity, commutativity, distributivity.
                let ab_c = a.checked_add(&b).unwrap().checked_add(&c).unwrap();
                let a_bc = a.checked_add(&b.checked_add(&c).unwrap()).unwrap();
                assert_eq!(ab_c, a_bc);
                assert_eq!(a.checked_mul(&b).unwrap(), b.checked_mul(&a).unwrap());
                let lhs = a.checked_mul(&b.checked_add(&c).unwrap()).unwrap();
                let rhs = a
                    .checked_mul(&b)
                    .unwrap()
                    .checked_add(&a.checked_mul(&c).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn valuation_is_additive_below_precision() {
        for p in [3u64, 5, 7] {
            let n = 8;
            let mut rng = ChaCha12Rng::seed_from_u64(p);
            let modulus = checked_prime_power(p, n).unwrap();
            for _ in 0..1000 {
                let a = s(p, n, rng.random_range(1..modulus));
                let b = s(p, n, rng.random_range(1..modulus));
                if let (Valuation::Exact(va), Valuation::Exact(vb)) = (a.val_p(), b.val_p()) {
                    if va + vb < n {
                        assert_eq!(
                            a.checked_mul(&b).unwrap().val_p(),
                            Valuation::Exact(va + vb)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_is_an_involution_on_units() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for p in [3u64, 5, 7] {
            let n = 8;
            let modulus = checked_prime_power(p, n).unwrap();
            for _ in 0..200 {
                let mut v = rng.random_range(0..modulus);
                if v % p == 0 {
                    v += 1;
                }
                let a = s(p, n, v);
                let inv = a.inv_unit().unwrap();
                assert_eq!(a.checked_mul(&inv).unwrap().value(), 1);
                assert_eq!(inv.inv_unit().unwrap(), a);
            }
        }
    }

    #[test]
    fn mixed_precision_coerces_to_minimum_and_mixed_prime_errors() {
        let a = s(3, 6, 100);
        let b = s(3, 4, 100);
        let sum = a.checked_add(&b).unwrap();
        assert_eq!(sum.precision(), 4);
        assert_eq!(sum.value(), 200 % 81);
        assert!(matches!(
            a.checked_add(&s(5, 6, 1)),
            Err(Error::PrimeMismatch { left: 3, right: 5 })
        ));
    }

    #[test]
    fn teichmuller_lift_is_fixed_by_p_power_and_matches_residue() {
        for p in [3u64, 5, 7] {
            let n = 10;
            for r in 0..p {
                let t = s(p, n, r).teichmuller();
                assert_eq!(t.pow_u64(p), t, "lift must be fixed by x → x^p");
                assert_eq!(t.residue(), r);
            }
        }
    }

    #[test]
    fn from_i64_wraps_negatives() {
        assert_eq!(PAdicScalar::from_i64(3, 4, -1).unwrap().value(), 80);
        assert_eq!(PAdicScalar::from_i64(3, 4, -81).unwrap().value(), 0);
        assert_eq!(PAdicScalar::from_i64(7, 4, 2402).unwrap().value(), 1);
    }
}
