//! The polynomial ring `O = F_q[t]`.
//!
//! [`Poly`] is a plain coefficient vector; all arithmetic goes through a
//! [`PolyRing`], which holds the shared field context.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{invalid, Error, Result};
use crate::fields::{format_univariate, ExprParser, FieldCtx, Fq};

/// A polynomial with ascending coefficients and no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    c: Vec<Fq>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly { c: vec![Fq::ONE] }
    }

    pub fn constant(a: Fq) -> Poly {
        Poly::from_coeffs(vec![a])
    }

    /// `a * t^k`.
    pub fn monomial(a: Fq, k: usize) -> Poly {
        let mut c = vec![Fq::ZERO; k + 1];
        c[k] = a;
        Poly::from_coeffs(c)
    }

    pub fn t() -> Poly {
        Poly::monomial(Fq::ONE, 1)
    }

    pub fn from_coeffs(mut c: Vec<Fq>) -> Poly {
        while c.last() == Some(&Fq::ZERO) {
            c.pop();
        }
        Poly { c }
    }

    /// Ascending coefficients.
    pub fn coeffs(&self) -> &[Fq] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> Fq {
        self.c.get(k).copied().unwrap_or(Fq::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0] == Fq::ONE
    }

    /// Degree, `None` for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// `log_q |P|`, `None` for zero (`|0| = 0`).
    pub fn abs_log(&self) -> Option<i64> {
        self.deg().map(|d| d as i64)
    }

    /// Number of coefficients (`deg + 1`, zero for the zero polynomial).
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn lc(&self) -> Fq {
        self.c.last().copied().unwrap_or(Fq::ZERO)
    }

    pub fn is_monic(&self) -> bool {
        self.lc() == Fq::ONE
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }
}

impl Ord for Poly {
    /// Canonical order: by degree, then coefficients from the top down.
    fn cmp(&self, o: &Self) -> Ordering {
        self.c
            .len()
            .cmp(&o.c.len())
            .then_with(|| self.c.iter().rev().cmp(o.c.iter().rev()))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// A factorization `unit * prod f_i^{e_i}` into monic irreducibles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: Fq,
    pub factors: Vec<(Poly, u32)>,
}

/// Which decomposition [`PolyRing::decompose`] computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerMode {
    Square,
    Cube,
}

/// The ring `F_q[t]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyRing {
    ctx: Arc<FieldCtx>,
}

const FACTOR_SEED: u64 = 0x00c0_ffee_f00d;

impl PolyRing {
    pub fn new(ctx: FieldCtx) -> PolyRing {
        PolyRing { ctx: Arc::new(ctx) }
    }

    pub fn from_arc(ctx: Arc<FieldCtx>) -> PolyRing {
        PolyRing { ctx }
    }

    pub fn field(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn field_arc(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn q(&self) -> u32 {
        self.ctx.q()
    }

    pub fn p(&self) -> u32 {
        self.ctx.p()
    }

    pub fn parse(&self, text: &str) -> Result<Poly> {
        Ok(Poly::from_coeffs(
            ExprParser::new(text, &self.ctx, b't', true).parse()?,
        ))
    }

    pub fn format(&self, a: &Poly) -> String {
        format_univariate(&self.ctx, &a.c, "t")
    }

    pub fn from_int(&self, n: i64) -> Poly {
        Poly::constant(self.ctx.from_int(n))
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        let (long, short) = if a.c.len() >= b.c.len() {
            (a, b)
        } else {
            (b, a)
        };
        let mut c = long.c.clone();
        for (x, &y) in c.iter_mut().zip(short.c.iter()) {
            *x = self.ctx.add(*x, y);
        }
        Poly::from_coeffs(c)
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Poly) -> Poly {
        Poly {
            c: a.c.iter().map(|&x| self.ctx.neg(x)).collect(),
        }
    }

    pub fn scale(&self, s: Fq, a: &Poly) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            c: a.c.iter().map(|&x| self.ctx.mul(s, x)).collect(),
        }
    }

    /// `a * t^k`.
    pub fn shift(&self, a: &Poly, k: usize) -> Poly {
        if a.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Fq::ZERO; k];
        c.extend_from_slice(&a.c);
        Poly { c }
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Fq::ZERO; a.c.len() + b.c.len() - 1];
        for (i, &x) in a.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.c.iter().enumerate() {
                c[i + j] = self.ctx.add(c[i + j], self.ctx.mul(x, y));
            }
        }
        Poly::from_coeffs(c)
    }

    pub fn pow(&self, a: &Poly, mut e: u64) -> Poly {
        let mut r = Poly::one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        r
    }

    pub fn cube(&self, a: &Poly) -> Poly {
        self.mul(&self.mul(a, a), a)
    }

    /// Euclidean division; errors when `b = 0`.
    pub fn div_rem(&self, a: &Poly, b: &Poly) -> Result<(Poly, Poly)> {
        if b.is_zero() {
            return invalid("division by the zero polynomial");
        }
        if a.c.len() < b.c.len() {
            return Ok((Poly::zero(), a.clone()));
        }
        let db = b.c.len() - 1;
        let inv = self.ctx.inv(b.lc()).expect("nonzero leading coefficient");
        let mut r = a.c.clone();
        let mut quo = vec![Fq::ZERO; a.c.len() - db];
        for k in (0..quo.len()).rev() {
            let top = r[k + db];
            if top.is_zero() {
                continue;
            }
            let f = self.ctx.mul(top, inv);
            quo[k] = f;
            for (i, &bi) in b.c.iter().enumerate() {
                r[k + i] = self.ctx.sub(r[k + i], self.ctx.mul(f, bi));
            }
        }
        Ok((Poly::from_coeffs(quo), Poly::from_coeffs(r)))
    }

    pub fn rem(&self, a: &Poly, b: &Poly) -> Poly {
        self.div_rem(a, b).expect("nonzero modulus").1
    }

    pub fn quo(&self, a: &Poly, b: &Poly) -> Poly {
        self.div_rem(a, b).expect("nonzero divisor").0
    }

    /// Exact quotient `a / b`; errors if `b` does not divide `a`.
    pub fn div_exact(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        let (q, r) = self.div_rem(a, b)?;
        if !r.is_zero() {
            return invalid("inexact polynomial division");
        }
        Ok(q)
    }

    pub fn divides(&self, d: &Poly, a: &Poly) -> bool {
        if d.is_zero() {
            return a.is_zero();
        }
        self.rem(a, d).is_zero()
    }

    /// `(unit, monic)` with `a = unit * monic`; zero maps to `(0, 0)`.
    pub fn monic(&self, a: &Poly) -> (Fq, Poly) {
        if a.is_zero() {
            return (Fq::ZERO, Poly::zero());
        }
        let u = a.lc();
        (u, self.scale(self.ctx.inv(u).expect("nonzero"), a))
    }

    pub fn make_monic(&self, a: &Poly) -> Poly {
        self.monic(a).1
    }

    /// Monic gcd (`gcd(0, 0) = 0`).
    pub fn gcd(&self, a: &Poly, b: &Poly) -> Poly {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let r = self.rem(&x, &y);
            x = y;
            y = r;
        }
        self.make_monic(&x)
    }

    /// `(g, s, u)` with `s*a + u*b = g = gcd(a, b)` monic.
    pub fn xgcd(&self, a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut t0, mut t1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (qq, r) = self.div_rem(&r0, &r1).expect("nonzero");
            let s = self.sub(&s0, &self.mul(&qq, &s1));
            let t = self.sub(&t0, &self.mul(&qq, &t1));
            r0 = core::mem::replace(&mut r1, r);
            s0 = core::mem::replace(&mut s1, s);
            t0 = core::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = self.ctx.inv(r0.lc()).expect("nonzero");
        (
            self.scale(inv, &r0),
            self.scale(inv, &s0),
            self.scale(inv, &t0),
        )
    }

    /// Inverse of `a` modulo `m`, if coprime.
    pub fn inv_mod(&self, a: &Poly, m: &Poly) -> Option<Poly> {
        let (g, s, _) = self.xgcd(a, m);
        g.is_one().then(|| self.rem(&s, m))
    }

    pub fn mul_mod(&self, a: &Poly, b: &Poly, m: &Poly) -> Poly {
        self.rem(&self.mul(a, b), m)
    }

    pub fn pow_mod(&self, a: &Poly, mut e: u64, m: &Poly) -> Poly {
        let mut r = self.rem(&Poly::one(), m);
        let mut b = self.rem(a, m);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_mod(&r, &b, m);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul_mod(&b, &b, m);
            }
        }
        r
    }

    /// `a^{q^k} mod m` by iterated Frobenius.
    fn frob_mod(&self, a: &Poly, k: u32, m: &Poly) -> Poly {
        let mut r = self.rem(a, m);
        for _ in 0..k {
            r = self.pow_mod(&r, self.q() as u64, m);
        }
        r
    }

    pub fn derivative(&self, a: &Poly) -> Poly {
        if a.c.len() <= 1 {
            return Poly::zero();
        }
        let c = a.c[1..]
            .iter()
            .enumerate()
            .map(|(i, &x)| self.ctx.mul(self.ctx.from_int(i as i64 + 1), x))
            .collect();
        Poly::from_coeffs(c)
    }

    pub fn eval(&self, a: &Poly, x: Fq) -> Fq {
        a.c.iter()
            .rev()
            .fold(Fq::ZERO, |acc, &c| self.ctx.add(self.ctx.mul(acc, x), c))
    }

    /// The polynomial with canonical index `idx` among those with fewer than
    /// `len` coefficients (base-`q` digits, constant term least significant).
    pub fn from_index(&self, mut idx: u64, len: usize) -> Poly {
        let q = self.q() as u64;
        let mut c = Vec::with_capacity(len);
        for _ in 0..len {
            c.push(Fq::from_index_unchecked((idx % q) as usize));
            idx /= q;
        }
        Poly::from_coeffs(c)
    }

    /// Inverse of [`PolyRing::from_index`].
    pub fn index_of(&self, a: &Poly) -> u64 {
        a.c.iter()
            .rev()
            .fold(0u64, |acc, &x| acc * self.q() as u64 + x.index() as u64)
    }

    /// All polynomials of degree `< len` (including zero), canonical order.
    pub fn below_degree(&self, len: usize) -> impl Iterator<Item = Poly> + '_ {
        let count = (self.q() as u64).pow(len as u32);
        (0..count).map(move |i| self.from_index(i, len))
    }

    /// Monic polynomials of exactly degree `deg`, canonical order.
    pub fn monic_enum(&self, deg: usize) -> impl Iterator<Item = Poly> + '_ {
        let count = (self.q() as u64).pow(deg as u32);
        (0..count).map(move |i| {
            let mut c = self.from_index(i, deg).c;
            c.resize(deg, Fq::ZERO);
            c.push(Fq::ONE);
            Poly { c }
        })
    }

    /// Monic irreducibles of exactly degree `deg`, canonical order.
    pub fn irreducible_enum(&self, deg: usize) -> impl Iterator<Item = Poly> + '_ {
        self.monic_enum(deg).filter(move |f| self.is_irreducible(f))
    }

    /// All monic polynomials with degree `<= max_deg`, by degree.
    pub fn monic_up_to(&self, max_deg: usize) -> impl Iterator<Item = Poly> + '_ {
        (0..=max_deg).flat_map(move |d| self.monic_enum(d))
    }

    /// Residues `a` with `|a| < |r|` and `gcd(a, r) = 1`, canonical order.
    pub fn units_mod(&self, r: &Poly) -> Vec<Poly> {
        let d = r.deg().expect("nonzero modulus");
        if d == 0 {
            return vec![Poly::zero()];
        }
        self.below_degree(d)
            .filter(|a| self.gcd(a, r).is_one())
            .collect()
    }

    /// Rabin's irreducibility test.
    pub fn is_irreducible(&self, f: &Poly) -> bool {
        let d = match f.deg() {
            Some(d) if d >= 1 => d,
            _ => return false,
        };
        if d == 1 {
            return true;
        }
        let t = Poly::t();
        if self.frob_mod(&t, d as u32, f) != self.rem(&t, f) {
            return false;
        }
        let mut n = d;
        let mut primes = Vec::new();
        let mut l = 2;
        while l * l <= n {
            if n % l == 0 {
                primes.push(l);
                while n % l == 0 {
                    n /= l;
                }
            }
            l += 1;
        }
        if n > 1 {
            primes.push(n);
        }
        primes.into_iter().all(|l| {
            let h = self.frob_mod(&t, (d / l) as u32, f);
            self.gcd(&self.sub(&h, &t), f).is_one()
        })
    }

    /// `a^{1/p}` for `a` whose exponents are all multiples of `p`.
    fn pth_root(&self, a: &Poly) -> Poly {
        let p = self.p() as usize;
        let e = (self.q() / self.p()) as u64;
        let c = a.c.iter().step_by(p).map(|&x| self.ctx.pow(x, e)).collect();
        Poly::from_coeffs(c)
    }

    /// Square-free factorization of a monic polynomial: `(g, m)` pairs with
    /// `f = prod g^m`, each `g` square-free, monic and nonconstant.
    pub fn squarefree_decomposition(&self, f: &Poly) -> Vec<(Poly, u32)> {
        let mut out = Vec::new();
        if f.deg().unwrap_or(0) == 0 {
            return out;
        }
        let d = self.derivative(f);
        if d.is_zero() {
            for (g, m) in self.squarefree_decomposition(&self.pth_root(f)) {
                out.push((g, m * self.p()));
            }
            return out;
        }
        let mut c = self.gcd(f, &d);
        let mut w = self.quo(f, &c);
        let mut i = 1;
        while !w.is_one() {
            let y = self.gcd(&w, &c);
            let fac = self.quo(&w, &y);
            if !fac.is_one() {
                out.push((fac, i));
            }
            w = y;
            c = self.quo(&c, &w);
            i += 1;
        }
        if !c.is_one() {
            for (g, m) in self.squarefree_decomposition(&self.pth_root(&c)) {
                out.push((g, m * self.p()));
            }
        }
        out
    }

    fn distinct_degree(&self, f: &Poly) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        let t = Poly::t();
        let mut rest = f.clone();
        let mut h = self.rem(&t, &rest);
        let mut i = 1;
        while rest.deg().unwrap_or(0) >= 2 * i {
            h = self.pow_mod(&h, self.q() as u64, &rest);
            let g = self.gcd(&self.sub(&h, &t), &rest);
            if !g.is_one() {
                rest = self.quo(&rest, &g);
                h = self.rem(&h, &rest);
                out.push((g, i));
            }
            i += 1;
        }
        if rest.deg().unwrap_or(0) > 0 {
            let d = rest.deg().unwrap();
            out.push((rest, d));
        }
        out
    }

    fn random_below(&self, rng: &mut ChaCha8Rng, len: usize) -> Poly {
        let c = (0..len)
            .map(|_| Fq::from_index_unchecked((rng.next_u32() % self.q()) as usize))
            .collect();
        Poly::from_coeffs(c)
    }

    fn equal_degree(&self, f: &Poly, d: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Poly>) {
        let n = f.deg().unwrap();
        if n == d {
            out.push(f.clone());
            return;
        }
        loop {
            let a = self.random_below(rng, n);
            if a.deg().unwrap_or(0) == 0 {
                continue;
            }
            let b = if self.p() == 2 {
                // absolute trace map a + a^2 + ... + a^{2^{hd-1}}
                let mut acc = Poly::zero();
                let mut x = self.rem(&a, f);
                for _ in 0..(self.ctx.h() as usize * d) {
                    acc = self.add(&acc, &x);
                    x = self.mul_mod(&x, &x, f);
                }
                acc
            } else {
                // a^{(q^d-1)/2} = (a^{1+q+...+q^{d-1}})^{(q-1)/2}
                let mut norm = Poly::one();
                let mut x = self.rem(&a, f);
                for _ in 0..d {
                    norm = self.mul_mod(&norm, &x, f);
                    x = self.pow_mod(&x, self.q() as u64, f);
                }
                let y = self.pow_mod(&norm, (self.q() as u64 - 1) / 2, f);
                self.sub(&y, &Poly::one())
            };
            let g = self.gcd(&b, f);
            if !g.is_one() && g.deg() != f.deg() && !g.is_zero() {
                self.equal_degree(&g, d, rng, out);
                self.equal_degree(&self.quo(f, &g), d, rng, out);
                return;
            }
        }
    }

    /// Complete factorization with factors in canonical order.
    pub fn factor(&self, a: &Poly) -> Result<Factorization> {
        if a.is_zero() {
            return invalid("cannot factor the zero polynomial");
        }
        let (unit, f) = self.monic(a);
        let mut rng = ChaCha8Rng::seed_from_u64(FACTOR_SEED);
        let mut factors: Vec<(Poly, u32)> = Vec::new();
        for (g, m) in self.squarefree_decomposition(&f) {
            for (h, d) in self.distinct_degree(&g) {
                let mut irr = Vec::new();
                self.equal_degree(&h, d, &mut rng, &mut irr);
                factors.extend(irr.into_iter().map(|x| (x, m)));
            }
        }
        factors.sort();
        let mut merged: Vec<(Poly, u32)> = Vec::new();
        for (g, m) in factors {
            match merged.last_mut() {
                Some((h, k)) if *h == g => *k += m,
                _ => merged.push((g, m)),
            }
        }
        Ok(Factorization {
            unit,
            factors: merged,
        })
    }

    pub fn expand(&self, f: &Factorization) -> Poly {
        f.factors
            .iter()
            .fold(Poly::constant(f.unit), |acc, (g, m)| {
                self.mul(&acc, &self.pow(g, *m as u64))
            })
    }

    /// `(free, full)` for monic nonzero `r`.
    pub fn decompose(&self, r: &Poly, mode: PowerMode) -> Result<(Poly, Poly)> {
        if r.is_zero() || !r.is_monic() {
            return invalid("decompose needs a monic nonzero polynomial");
        }
        let m = match mode {
            PowerMode::Square => 2,
            PowerMode::Cube => 3,
        };
        let mut free = Poly::one();
        let mut full = Poly::one();
        for (g, k) in self.factor(r)?.factors {
            let pk = self.pow(&g, k as u64);
            if k < m {
                free = self.mul(&free, &pk);
            } else {
                full = self.mul(&full, &pk);
            }
        }
        Ok((free, full))
    }

    fn radical_where(&self, r: &Poly, keep: impl Fn(u32) -> bool) -> Result<Poly> {
        Ok(self
            .factor(r)?
            .factors
            .into_iter()
            .filter(|(_, k)| keep(*k))
            .fold(Poly::one(), |acc, (g, _)| self.mul(&acc, &g)))
    }

    /// `eta(r)`: product of primes dividing `r` exactly once or twice.
    pub fn eta(&self, r: &Poly) -> Result<Poly> {
        self.radical_where(r, |k| k <= 2)
    }

    /// `m(r)`: product of primes dividing `r` exactly once.
    pub fn m_part(&self, r: &Poly) -> Result<Poly> {
        self.radical_where(r, |k| k == 1)
    }

    /// Whether every prime factor of `r` occurs at least twice.
    pub fn is_squarefull(&self, r: &Poly) -> bool {
        match self.factor(r) {
            Ok(f) => f.factors.iter().all(|(_, k)| *k >= 2),
            Err(_) => false,
        }
    }

    pub fn is_squarefree(&self, r: &Poly) -> bool {
        match self.factor(r) {
            Ok(f) => f.factors.iter().all(|(_, k)| *k == 1),
            Err(_) => false,
        }
    }

    /// Solves `R^k = a` top-down for `k` in {2, 3}.
    fn kth_root(&self, a: &Poly, k: usize) -> Option<Poly> {
        if a.is_zero() {
            return Some(Poly::zero());
        }
        let n = a.deg().unwrap();
        if n % k != 0 {
            return None;
        }
        let e = n / k;
        let lead = if k == 3 {
            self.ctx.cube_root(a.lc())?
        } else {
            self.ctx.sqrt(a.lc())?
        };
        if self.p() as usize == k {
            // Frobenius: R^p has only exponents divisible by p
            if a.c
                .iter()
                .enumerate()
                .any(|(i, c)| i % k != 0 && !c.is_zero())
            {
                return None;
            }
            let r = self.pth_root(a);
            return (self.pow(&r, k as u64) == *a).then_some(r);
        }
        let mut r = vec![Fq::ZERO; e + 1];
        r[e] = lead;
        let kk = self.ctx.from_int(k as i64);
        let denom = self.ctx.mul(kk, self.ctx.pow(lead, k as u64 - 1));
        for m in 1..=e {
            let cur = self.pow(&Poly::from_coeffs(r.clone()), k as u64);
            let idx = k * e - m;
            let diff = self.ctx.sub(a.coeff(idx), cur.coeff(idx));
            r[e - m] = self.ctx.div(diff, denom);
        }
        let root = Poly::from_coeffs(r);
        (self.pow(&root, k as u64) == *a).then_some(root)
    }

    /// `R` with `R^3 = a`, leading coefficient the smallest cube root.
    pub fn cube_root(&self, a: &Poly) -> Option<Poly> {
        self.kth_root(a, 3)
    }

    /// `R` with `R^2 = a`, leading coefficient the smallest square root.
    pub fn sqrt(&self, a: &Poly) -> Option<Poly> {
        self.kth_root(a, 2)
    }

    /// Coprime `(bi, bj)` with `bi^3 Fj = bj^3 Fi`, `bj` monic and the unit
    /// of `bi` the smallest cube root, if `Fi/Fj` is a cube in `F_q(t)`.
    pub fn cube_ratio(&self, fi: &Poly, fj: &Poly) -> Option<(Poly, Poly)> {
        if fi.is_zero() || fj.is_zero() {
            return None;
        }
        let g = self.gcd(fi, fj);
        let a = self.quo(fi, &g);
        let b = self.quo(fj, &g);
        let (ua, ma) = self.monic(&a);
        let (ub, mb) = self.monic(&b);
        let w = self.ctx.cube_root(self.ctx.div(ua, ub))?;
        let ra = self.cube_root(&ma)?;
        let rb = self.cube_root(&mb)?;
        Some((self.scale(w, &ra), rb))
    }

    /// All cube-root-of-unity twists of [`PolyRing::cube_ratio`].
    pub fn cube_ratios(&self, fi: &Poly, fj: &Poly) -> Vec<(Poly, Poly)> {
        match self.cube_ratio(fi, fj) {
            None => Vec::new(),
            Some((bi, bj)) => self
                .ctx
                .roots_of_unity3()
                .iter()
                .map(|&w| (self.scale(w, &bi), bj.clone()))
                .collect(),
        }
    }

    /// The unique `x` with `deg x < deg r1 r2`, `x = a1 mod r1`, `x = a2 mod r2`.
    pub fn crt(&self, a1: &Poly, r1: &Poly, a2: &Poly, r2: &Poly) -> Result<Poly> {
        let (g, s, u) = self.xgcd(r1, r2);
        if !g.is_one() {
            return Err(Error::InvalidArgument("CRT moduli are not coprime".into()));
        }
        let m = self.mul(r1, r2);
        let x = self.add(
            &self.mul(&self.mul(a1, &u), r2),
            &self.mul(&self.mul(a2, &s), r1),
        );
        Ok(self.rem(&x, &m))
    }

    /// Euler's totient `#(O/r)^*`.
    pub fn phi(&self, r: &Poly) -> u64 {
        let f = self.factor(r).expect("nonzero");
        let q = self.q() as u64;
        f.factors.iter().fold(1u64, |acc, (g, k)| {
            let n = q.pow(g.deg().unwrap() as u32);
            acc * n.pow(*k - 1) * (n - 1)
        })
    }
}
