//! Exact arithmetic in `Q(zeta_p)`.
//!
//! Values are stored in the power basis `1, zeta, ..., zeta^{p-2}`, reducing
//! with `1 + zeta + ... + zeta^{p-1} = 0`, so equal values have identical
//! coefficient vectors. [`Cyclo`] is generic over the coefficient ring:
//! [`CycNum`] uses big rationals and [`CycInt`] uses `i128` for hot loops.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// An element of `Z[zeta_p] (x) R` for a coefficient ring `R`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cyclo<T> {
    p: u32,
    c: Vec<T>,
}

/// Exact element of `Q(zeta_p)`.
pub type CycNum = Cyclo<BigRational>;
/// Element of `Z[zeta_p]` with machine coefficients (overflow-checked builds).
pub type CycInt = Cyclo<i128>;

impl<T: Num + Clone + Neg<Output = T>> Cyclo<T> {
    fn basis_len(p: u32) -> usize {
        (p - 1) as usize
    }

    pub fn zero(p: u32) -> Self {
        Cyclo {
            p,
            c: vec![T::zero(); Self::basis_len(p)],
        }
    }

    pub fn one(p: u32) -> Self {
        Self::from_scalar(p, T::one())
    }

    pub fn from_scalar(p: u32, s: T) -> Self {
        let mut z = Self::zero(p);
        z.c[0] = s;
        z
    }

    /// `zeta_p^e`.
    pub fn zeta_pow(p: u32, e: u64) -> Self {
        let mut counts = vec![T::zero(); p as usize];
        counts[(e % p as u64) as usize] = T::one();
        Self::from_exponent_counts(p, &counts)
    }

    /// `sum_j counts[j] * zeta^j` for `j in 0..p`.
    pub fn from_exponent_counts(p: u32, counts: &[T]) -> Self {
        assert_eq!(counts.len(), p as usize, "need one count per residue");
        let top = counts[p as usize - 1].clone();
        let c = counts[..p as usize - 1]
            .iter()
            .map(|x| x.clone() - top.clone())
            .collect();
        Cyclo { p, c }
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Coefficients in the basis `1, zeta, ..., zeta^{p-2}`.
    pub fn coeffs(&self) -> &[T] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    /// True when the value lies in the coefficient ring.
    pub fn is_scalar(&self) -> bool {
        self.c[1..].iter().all(|x| x.is_zero())
    }

    pub fn scalar_part(&self) -> Option<T> {
        self.is_scalar().then(|| self.c[0].clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Cyclo {
            p: self.p,
            c: self.c.iter().map(|x| x.clone() * s.clone()).collect(),
        }
    }

    /// Full-length representation over `zeta^0..zeta^{p-1}` (last entry 0).
    fn full(&self) -> Vec<T> {
        let mut v = self.c.clone();
        v.push(T::zero());
        v
    }

    /// The Galois image under `zeta -> zeta^k`, `p` not dividing `k`.
    pub fn galois(&self, k: u64) -> Self {
        assert!(k % self.p as u64 != 0, "k must be a unit mod p");
        let p = self.p as usize;
        let full = self.full();
        let mut out = vec![T::zero(); p];
        for (j, x) in full.into_iter().enumerate() {
            let idx = (j as u64 * k % p as u64) as usize;
            out[idx] = out[idx].clone() + x;
        }
        Self::from_exponent_counts(self.p, &out)
    }

    /// Complex conjugation, `zeta -> zeta^{p-1}`.
    pub fn conj(&self) -> Self {
        self.galois(self.p as u64 - 1)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut r = Self::one(self.p);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = &r * &b;
            }
            b = &b * &b;
            e >>= 1;
        }
        r
    }

    /// `self += other * s`.
    pub fn add_scaled(&mut self, other: &Self, s: &T) {
        for (a, b) in self.c.iter_mut().zip(other.c.iter()) {
            *a = a.clone() + b.clone() * s.clone();
        }
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> Cyclo<U> {
        Cyclo {
            p: self.p,
            c: self.c.iter().map(f).collect(),
        }
    }
}

impl<T: Num + Clone + Neg<Output = T>> Add for &Cyclo<T> {
    type Output = Cyclo<T>;
    fn add(self, o: Self) -> Cyclo<T> {
        debug_assert_eq!(self.p, o.p);
        Cyclo {
            p: self.p,
            c: self
                .c
                .iter()
                .zip(o.c.iter())
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<T: Num + Clone + Neg<Output = T>> Sub for &Cyclo<T> {
    type Output = Cyclo<T>;
    fn sub(self, o: Self) -> Cyclo<T> {
        debug_assert_eq!(self.p, o.p);
        Cyclo {
            p: self.p,
            c: self
                .c
                .iter()
                .zip(o.c.iter())
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<T: Num + Clone + Neg<Output = T>> Neg for &Cyclo<T> {
    type Output = Cyclo<T>;
    fn neg(self) -> Cyclo<T> {
        Cyclo {
            p: self.p,
            c: self.c.iter().map(|a| -a.clone()).collect(),
        }
    }
}

impl<T: Num + Clone + Neg<Output = T>> Mul for &Cyclo<T> {
    type Output = Cyclo<T>;
    fn mul(self, o: Self) -> Cyclo<T> {
        debug_assert_eq!(self.p, o.p);
        let p = self.p as usize;
        if p == 2 {
            return Cyclo {
                p: 2,
                c: vec![self.c[0].clone() * o.c[0].clone()],
            };
        }
        let mut acc = vec![T::zero(); p];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let k = (i + j) % p;
                acc[k] = acc[k].clone() + a.clone() * b.clone();
            }
        }
        Cyclo::from_exponent_counts(self.p, &acc)
    }
}

macro_rules! owned_ops {
    ($tr:ident, $f:ident) => {
        impl<T: Num + Clone + Neg<Output = T>> $tr for Cyclo<T> {
            type Output = Cyclo<T>;
            fn $f(self, o: Self) -> Cyclo<T> {
                (&self).$f(&o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl From<&CycInt> for CycNum {
    fn from(z: &CycInt) -> CycNum {
        z.map(|&x| BigRational::from_integer(BigInt::from(x)))
    }
}

impl From<CycInt> for CycNum {
    fn from(z: CycInt) -> CycNum {
        CycNum::from(&z)
    }
}

impl CycNum {
    pub fn from_int(p: u32, n: i64) -> CycNum {
        CycNum::from_scalar(p, BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(p: u32, r: BigRational) -> CycNum {
        CycNum::from_scalar(p, r)
    }

    /// Value under the embedding `zeta -> exp(2 pi i k / p)`.
    pub fn to_complex(&self, k: u32) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        let p = self.p as f64;
        for (j, x) in self.c.iter().enumerate() {
            let v = x.to_f64().unwrap_or(f64::NAN);
            let ang =
                2.0 * core::f64::consts::PI * ((j as u64 * k as u64) % self.p as u64) as f64 / p;
            re += v * libm::cos(ang);
            im += v * libm::sin(ang);
        }
        (re, im)
    }

    /// `|z|` under the standard embedding, as a float.
    pub fn abs_f64(&self) -> f64 {
        let (re, im) = self.to_complex(1);
        libm::sqrt(re * re + im * im)
    }
}

impl CycInt {
    /// Sum of `zeta^e` over a histogram of exponents.
    pub fn from_histogram(p: u32, hist: &[i64]) -> CycInt {
        let counts: Vec<i128> = hist.iter().map(|&x| x as i128).collect();
        CycInt::from_exponent_counts(p, &counts)
    }
}

/// Result of [`cyc_abs_sq`]: the exact value of `|z|^2`, or a rational upper
/// bound valid for every embedding when `z * conj(z)` is not rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbsSq {
    pub value: BigRational,
    pub exact: bool,
}

/// `|z|^2`, exact when `z * conj(z)` is rational.
pub fn cyc_abs_sq(z: &CycNum) -> AbsSq {
    let n = z * &z.conj();
    match n.scalar_part() {
        Some(v) => AbsSq {
            value: v,
            exact: true,
        },
        None => {
            // every |zeta^j| = 1, so the l1 norm of the full vector bounds
            // each embedding; the full vector is the reduced one padded by 0
            let bound = n.c.iter().fold(BigRational::zero(), |acc, x| acc + x.abs());
            AbsSq {
                value: bound,
                exact: false,
            }
        }
    }
}

impl<T: fmt::Display + Num + Clone + Neg<Output = T>> fmt::Display for Cyclo<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (i, x) in self.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let s = match i {
                0 => format!("{x}"),
                1 => format!("({x})*z"),
                _ => format!("({x})*z^{i}"),
            };
            parts.push(s);
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Cyclo<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyclo(p={}, {:?})", self.p, self.c)
    }
}

/// Converts a small non-negative integer power of `q` into a rational.
pub fn rat_pow(q: u32, e: i64) -> BigRational {
    let base = BigInt::from(q);
    if e >= 0 {
        BigRational::from_integer(num_traits::pow(base, e as usize))
    } else {
        BigRational::new(BigInt::one(), num_traits::pow(base, (-e) as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn roots_of_unity_sum_to_zero() {
        for p in [2u32, 3, 5, 7] {
            let mut s = CycNum::zero(p);
            for j in 0..p {
                s = &s + &CycNum::zeta_pow(p, j as u64);
            }
            assert!(s.is_zero());
        }
    }

    #[test]
    fn abs_sq_examples() {
        assert_eq!(cyc_abs_sq(&CycNum::from_int(5, 1)).value, r(1, 1));
        let z = CycNum::from_rational(2, r(-3, 2));
        assert_eq!(
            cyc_abs_sq(&z),
            AbsSq {
                value: r(9, 4),
                exact: true
            }
        );
        let z = CycNum::zeta_pow(3, 1);
        assert_eq!(
            cyc_abs_sq(&z),
            AbsSq {
                value: r(1, 1),
                exact: true
            }
        );
    }

    #[test]
    fn zeta_multiplication() {
        for p in [2u32, 5, 7] {
            for a in 0..p as u64 {
                for b in 0..p as u64 {
                    let x = &CycInt::zeta_pow(p, a) * &CycInt::zeta_pow(p, b);
                    assert_eq!(x, CycInt::zeta_pow(p, a + b));
                }
            }
        }
    }

    #[test]
    fn conj_is_involution_and_galois_multiplicative() {
        let p = 5;
        let z = CycInt::from_histogram(p, &[3, -1, 4, 1, -5]);
        let w = CycInt::from_histogram(p, &[0, 2, 7, 1, 8]);
        assert_eq!(z.conj().conj(), z);
        assert_eq!((&z * &w).galois(2), &z.galois(2) * &w.galois(2));
    }
}
