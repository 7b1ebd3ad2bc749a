//! The finite field `F_q`, `q = p^h`, with `p != 3`.
//!
//! Elements are stored as an index `a_0 + a_1 p + ... + a_{h-1} p^{h-1}` of
//! their coordinates in the basis `1, g, ..., g^{h-1}`, where `g` is a root of
//! the chosen modulus. All arithmetic goes through lookup tables built once in
//! [`FieldCtx::new`], so fields are limited to `q <= 1024`.
//!
//! The canonical order on elements is the index order. Every "smallest"
//! choice in the crate (non-squares, cube roots, factor ordering) uses it.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Largest supported field size.
pub const MAX_Q: u32 = 1024;

/// An element of `F_q`. Only meaningful together with its [`FieldCtx`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Fq(u16);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    /// Index of the element in the canonical order.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub(crate) fn from_index_unchecked(i: usize) -> Fq {
        Fq(i as u16)
    }
}

/// Default irreducible moduli (ascending coefficients), Conway polynomials.
const DEFAULT_MODULI: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 1, 1, 0, 1]),
    (5, 2, &[2, 4, 1]),
    (5, 3, &[3, 3, 0, 1]),
    (7, 2, &[3, 6, 1]),
    (11, 2, &[2, 7, 1]),
    (13, 2, &[2, 12, 1]),
];

/// The field `F_q` together with its arithmetic tables.
#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    h: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    trace: Vec<u16>,
    cube_roots: Vec<Vec<Fq>>,
    sqrt: Vec<Option<Fq>>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldCtx({})", self.spec())
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.h == other.h && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// Small dense polynomials over F_p, used only to build the tables.
fn fp_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = fp_inv(m[dm], p);
    while r.len() > dm {
        let top = r.len() - 1;
        let f = r[top] * lead_inv % p;
        let shift = top - dm;
        for (i, &mi) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - f * mi % p) % p;
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_inv(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn fp_irreducible(m: &[u32], p: u32) -> bool {
    let d = m.len() - 1;
    if d == 0 {
        return false;
    }
    // trial division by all monic polynomials of degree 1..=d/2
    for k in 1..=d / 2 {
        let count = (p as u64).pow(k as u32);
        for idx in 0..count {
            let mut f = vec![0u32; k + 1];
            let mut x = idx;
            for c in f.iter_mut().take(k) {
                *c = (x % p as u64) as u32;
                x /= p as u64;
            }
            f[k] = 1;
            if fp_rem(m, &f, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FieldCtx {
    /// Builds `F_{p^h}` from a monic irreducible modulus over `F_p`, given by
    /// ascending coefficients (ignored when `h = 1`).
    pub fn new(p: u32, h: u32, modulus: &[u32]) -> Result<FieldCtx> {
        FieldCtx::build(p, h, modulus, false)
    }

    fn build(p: u32, h: u32, modulus: &[u32], allow_char3: bool) -> Result<FieldCtx> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("p={p} is not prime")));
        }
        if p == 3 && !allow_char3 {
            return Err(Error::InvalidField("characteristic 3 is excluded".into()));
        }
        if h == 0 {
            return Err(Error::InvalidField("h must be positive".into()));
        }
        let q = (p as u64)
            .checked_pow(h)
            .filter(|&q| q <= MAX_Q as u64)
            .ok_or_else(|| {
                Error::InvalidField(format!("q={p}^{h} exceeds the supported maximum {MAX_Q}"))
            })? as u32;
        let modulus: Vec<u32> = if h == 1 {
            vec![0, 1]
        } else {
            let mut m: Vec<u32> = modulus.iter().map(|&c| c % p).collect();
            fp_trim(&mut m);
            if m.len() != h as usize + 1 {
                return Err(Error::InvalidField(format!("modulus must have degree {h}")));
            }
            if m[h as usize] != 1 {
                return Err(Error::InvalidField("modulus must be monic".into()));
            }
            if !fp_irreducible(&m, p) {
                return Err(Error::InvalidField("modulus is reducible over F_p".into()));
            }
            m
        };
        let qs = q as usize;
        let hs = h as usize;
        let coords = |i: usize| -> Vec<u32> {
            let mut v = vec![0u32; hs];
            let mut x = i;
            for c in v.iter_mut() {
                *c = (x % p as usize) as u32;
                x /= p as usize;
            }
            v
        };
        let index = |v: &[u32]| -> usize {
            let mut i = 0usize;
            for &c in v.iter().rev() {
                i = i * p as usize + c as usize;
            }
            i
        };
        let all: Vec<Vec<u32>> = (0..qs).map(coords).collect();
        let mut add = vec![0u16; qs * qs];
        let mut mul = vec![0u16; qs * qs];
        for a in 0..qs {
            for b in 0..qs {
                let s: Vec<u32> = (0..hs).map(|k| (all[a][k] + all[b][k]) % p).collect();
                add[a * qs + b] = index(&s) as u16;
                let mut prod = vec![0u32; 2 * hs];
                for i in 0..hs {
                    for j in 0..hs {
                        prod[i + j] = (prod[i + j] + all[a][i] * all[b][j]) % p;
                    }
                }
                let mut r = if hs == 1 {
                    prod
                } else {
                    fp_rem(&prod, &modulus, p)
                };
                r.resize(hs, 0);
                mul[a * qs + b] = index(&r[..hs]) as u16;
            }
        }
        let neg: Vec<u16> = (0..qs)
            .map(|a| index(&all[a].iter().map(|&c| (p - c) % p).collect::<Vec<_>>()) as u16)
            .collect();
        let mut inv = vec![0u16; qs];
        for a in 1..qs {
            for b in 1..qs {
                if mul[a * qs + b] == 1 {
                    inv[a] = b as u16;
                    break;
                }
            }
        }
        let mut ctx = FieldCtx {
            p,
            h,
            q,
            modulus,
            add,
            mul,
            neg,
            inv,
            trace: Vec::new(),
            cube_roots: Vec::new(),
            sqrt: Vec::new(),
        };
        let mut trace = vec![0u16; qs];
        for (a, tr) in trace.iter_mut().enumerate() {
            let mut acc = Fq::ZERO;
            let mut y = Fq(a as u16);
            for _ in 0..h {
                acc = ctx.add(acc, y);
                y = ctx.pow(y, p as u64);
            }
            debug_assert!(acc.index() < p as usize);
            *tr = acc.0;
        }
        let mut cube_roots = vec![Vec::new(); qs];
        let mut sqrt = vec![None; qs];
        for a in 0..qs {
            let x = Fq(a as u16);
            let x2 = ctx.mul(x, x);
            cube_roots[ctx.mul(x2, x).index()].push(x);
            if sqrt[x2.index()].is_none() {
                sqrt[x2.index()] = Some(x);
            }
        }
        ctx.trace = trace;
        ctx.cube_roots = cube_roots;
        ctx.sqrt = sqrt;
        Ok(ctx)
    }

    /// The prime field `F_p`.
    pub fn prime(p: u32) -> Result<FieldCtx> {
        FieldCtx::new(p, 1, &[])
    }

    /// `F_q` with the bundled default modulus when `q` is not prime.
    pub fn with_q(q: u32) -> Result<FieldCtx> {
        if is_prime(q) {
            return FieldCtx::prime(q);
        }
        for &(p, h, m) in DEFAULT_MODULI {
            if (p as u64).pow(h) == q as u64 {
                return FieldCtx::new(p, h, m);
            }
        }
        Err(Error::InvalidField(format!(
            "no default modulus for q={q}; use p=..,h=..,mod=.."
        )))
    }

    /// Like [`FieldCtx::with_q`] but also accepting characteristic 3. Only for
    /// work that never touches a cubic form: characters, linear and
    /// Ramanujan sums, the Farey dissection, parabola measures.
    pub fn with_q_unrestricted(q: u32) -> Result<FieldCtx> {
        if q == 3 {
            return FieldCtx::build(3, 1, &[], true);
        }
        if q == 9 {
            return FieldCtx::build(3, 2, &[2, 2, 1], true);
        }
        FieldCtx::with_q(q)
    }

    /// Parses `q=<int>` or `p=<int>,h=<int>,mod=<poly in g>`.
    pub fn parse_spec(spec: &str) -> Result<FieldCtx> {
        let mut q = None;
        let mut p = None;
        let mut h = None;
        let mut m = None;
        for part in spec.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidField(format!("expected key=value, got '{part}'")))?;
            let num = |v: &str| {
                v.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidField(format!("bad integer '{v}'")))
            };
            match k.trim() {
                "q" => q = Some(num(v)?),
                "p" => p = Some(num(v)?),
                "h" => h = Some(num(v)?),
                "mod" => m = Some(v.trim().to_string()),
                other => return Err(Error::InvalidField(format!("unknown key '{other}'"))),
            }
        }
        match (q, p, h, m) {
            (Some(q), None, None, None) => FieldCtx::with_q(q),
            (None, Some(p), h, None) if h.unwrap_or(1) == 1 => FieldCtx::prime(p),
            (None, Some(p), Some(h), None) => {
                let q = (p as u64).pow(h);
                FieldCtx::with_q(q as u32)
            }
            (None, Some(p), Some(h), Some(m)) => {
                let fp = FieldCtx::prime(p)?;
                let coeffs = ExprParser::new(&m, &fp, b'g', false).parse()?;
                let coeffs: Vec<u32> = coeffs.iter().map(|c| c.index() as u32).collect();
                FieldCtx::new(p, h, &coeffs)
            }
            _ => Err(Error::InvalidField(format!(
                "cannot interpret field spec '{spec}'"
            ))),
        }
    }

    /// Canonical spec string, accepted by [`FieldCtx::parse_spec`].
    pub fn spec(&self) -> String {
        if self.h == 1 {
            format!("q={}", self.p)
        } else {
            let fp = FieldCtx::prime(self.p).expect("prime subfield");
            let m: Vec<Fq> = self.modulus.iter().map(|&c| Fq(c as u16)).collect();
            format!(
                "p={},h={},mod={}",
                self.p,
                self.h,
                format_univariate(&fp, &m, "g")
            )
        }
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn h(&self) -> u32 {
        self.h
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Ascending coefficients of the modulus over `F_p`.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The element with the given canonical index.
    pub fn element(&self, index: usize) -> Result<Fq> {
        if index < self.q as usize {
            Ok(Fq(index as u16))
        } else {
            Err(Error::InvalidArgument(format!(
                "index {index} outside F_{}",
                self.q
            )))
        }
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = Fq> + Clone {
        (0..self.q as u16).map(Fq)
    }

    /// Nonzero elements in canonical order.
    pub fn units(&self) -> impl Iterator<Item = Fq> + Clone {
        (1..self.q as u16).map(Fq)
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> Fq {
        Fq(n.rem_euclid(self.p as i64) as u16)
    }

    /// Coordinates in the basis `1, g, ..., g^{h-1}`.
    pub fn coords(&self, x: Fq) -> Vec<u32> {
        let mut v = vec![0u32; self.h as usize];
        let mut i = x.index();
        for c in v.iter_mut() {
            *c = (i % self.p as usize) as u32;
            i /= self.p as usize;
        }
        v
    }

    pub fn from_coords(&self, coords: &[u32]) -> Result<Fq> {
        if coords.len() != self.h as usize || coords.iter().any(|&c| c >= self.p) {
            return Err(Error::InvalidArgument("coordinates out of range".into()));
        }
        let mut i = 0usize;
        for &c in coords.iter().rev() {
            i = i * self.p as usize + c as usize;
        }
        Ok(Fq(i as u16))
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.add[a.index() * self.q as usize + b.index()])
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        Fq(self.neg[a.index()])
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.mul[a.index() * self.q as usize + b.index()])
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: Fq) -> Option<Fq> {
        if a.is_zero() {
            None
        } else {
            Some(Fq(self.inv[a.index()]))
        }
    }

    /// `a / b`, panicking on division by zero.
    #[inline]
    pub fn div(&self, a: Fq, b: Fq) -> Fq {
        self.mul(a, self.inv(b).expect("division by zero in F_q"))
    }

    pub fn pow(&self, a: Fq, mut e: u64) -> Fq {
        let mut r = Fq::ONE;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    /// `Tr_{F_q/F_p}(x)` as a residue in `[0, p)`.
    #[inline]
    pub fn trace(&self, x: Fq) -> u32 {
        self.trace[x.index()] as u32
    }

    /// All `y` with `y^3 = x`, in canonical order.
    pub fn cube_roots(&self, x: Fq) -> &[Fq] {
        &self.cube_roots[x.index()]
    }

    pub fn is_cube(&self, x: Fq) -> bool {
        !self.cube_roots[x.index()].is_empty()
    }

    /// The smallest cube root, if any.
    pub fn cube_root(&self, x: Fq) -> Option<Fq> {
        self.cube_roots[x.index()].first().copied()
    }

    /// The cube roots of unity in `F_q`, in canonical order.
    pub fn roots_of_unity3(&self) -> &[Fq] {
        self.cube_roots(Fq::ONE)
    }

    /// A square root of `x`. In characteristic 2 this is the unique root
    /// `x^{2^{h-1}}`; otherwise the smallest root, if one exists.
    pub fn sqrt(&self, x: Fq) -> Option<Fq> {
        if self.p == 2 {
            return Some(self.pow(x, 1u64 << (self.h - 1)));
        }
        self.sqrt[x.index()]
    }

    pub fn is_square(&self, x: Fq) -> bool {
        self.p == 2 || self.sqrt[x.index()].is_some()
    }

    /// The smallest non-square in canonical order.
    pub fn nonsquare(&self) -> Result<Fq> {
        if self.p == 2 {
            return Err(Error::Unsupported("no nonsquare in char 2".into()));
        }
        Ok(self
            .units()
            .find(|&x| !self.is_square(x))
            .expect("odd q has non-squares"))
    }

    /// Text form: an integer when `h = 1`, otherwise `a0+a1*g+...`.
    pub fn format_elem(&self, x: Fq) -> String {
        if self.h == 1 {
            return x.index().to_string();
        }
        let c = self.coords(x);
        let mut out = String::new();
        for (i, &a) in c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            if !out.is_empty() {
                out.push('+');
            }
            match (i, a) {
                (0, a) => out.push_str(&a.to_string()),
                (1, 1) => out.push('g'),
                (1, a) => out.push_str(&format!("{a}*g")),
                (i, 1) => out.push_str(&format!("g^{i}")),
                (i, a) => out.push_str(&format!("{a}*g^{i}")),
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// Whether the text form of `x` has more than one term.
    pub(crate) fn elem_is_compound(&self, x: Fq) -> bool {
        self.h > 1 && self.coords(x).iter().filter(|&&a| a != 0).count() > 1
    }

    /// Parses an element written in the `g`-expression syntax.
    pub fn parse_elem(&self, text: &str) -> Result<Fq> {
        let v = ExprParser::new(text, self, b't', false).parse()?;
        Ok(v.first().copied().unwrap_or(Fq::ZERO))
    }

    /// The element `g` (a root of the modulus); equals the index `p`.
    pub fn generator(&self) -> Fq {
        if self.h == 1 {
            Fq::ZERO
        } else {
            Fq(self.p as u16)
        }
    }
}

/// Formats a dense univariate polynomial (ascending coefficients) in
/// descending powers of `var`, eliding `1*` and zero terms.
pub(crate) fn format_univariate(ctx: &FieldCtx, coeffs: &[Fq], var: &str) -> String {
    let mut out = String::new();
    for (k, &c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        if !out.is_empty() {
            out.push('+');
        }
        let cs = ctx.format_elem(c);
        let mono = match k {
            0 => String::new(),
            1 => var.to_string(),
            k => format!("{var}^{k}"),
        };
        if k == 0 {
            out.push_str(&cs);
        } else if c == Fq::ONE {
            out.push_str(&mono);
        } else if ctx.elem_is_compound(c) {
            out.push_str(&format!("({cs})*{mono}"));
        } else {
            out.push_str(&format!("{cs}*{mono}"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Recursive-descent parser for sums of products of integers, `g`, the
/// polynomial variable and parenthesised subexpressions. Produces ascending
/// coefficients in the polynomial variable; `g` is reduced by the modulus.
pub(crate) struct ExprParser<'a> {
    s: &'a [u8],
    pos: usize,
    ctx: &'a FieldCtx,
    var: u8,
    allow_var: bool,
}

const MAX_EXPONENT: u64 = 4096;

impl<'a> ExprParser<'a> {
    /// `var` is the polynomial variable; it is rejected unless `allow_var`.
    /// With `var = b'g'` over a prime field this parses a modulus.
    pub(crate) fn new(text: &'a str, ctx: &'a FieldCtx, var: u8, allow_var: bool) -> Self {
        let allow = allow_var || var == b'g';
        ExprParser {
            s: text.as_bytes(),
            pos: 0,
            ctx,
            var,
            allow_var: allow,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    pub(crate) fn parse(mut self) -> Result<Vec<Fq>> {
        let v = self.expr()?;
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        Ok(v)
    }

    fn expr(&mut self) -> Result<Vec<Fq>> {
        let mut acc: Vec<Fq> = Vec::new();
        let mut sign = false;
        match self.peek() {
            Some(b'-') => {
                sign = true;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            _ => {}
        }
        loop {
            let t = self.term()?;
            acc = self.combine(&acc, &t, sign);
            match self.peek() {
                Some(b'+') => {
                    sign = false;
                    self.pos += 1;
                }
                Some(b'-') => {
                    sign = true;
                    self.pos += 1;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn combine(&self, a: &[Fq], b: &[Fq], negate: bool) -> Vec<Fq> {
        let n = a.len().max(b.len());
        let mut out = vec![Fq::ZERO; n];
        for (i, o) in out.iter_mut().enumerate() {
            let x = a.get(i).copied().unwrap_or(Fq::ZERO);
            let mut y = b.get(i).copied().unwrap_or(Fq::ZERO);
            if negate {
                y = self.ctx.neg(y);
            }
            *o = self.ctx.add(x, y);
        }
        while out.last() == Some(&Fq::ZERO) {
            out.pop();
        }
        out
    }

    fn mul_polys(&self, a: &[Fq], b: &[Fq]) -> Vec<Fq> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![Fq::ZERO; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = self.ctx.add(out[i + j], self.ctx.mul(x, y));
            }
        }
        while out.last() == Some(&Fq::ZERO) {
            out.pop();
        }
        out
    }

    fn term(&mut self) -> Result<Vec<Fq>> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let f = self.factor()?;
            acc = self.mul_polys(&acc, &f);
        }
        Ok(acc)
    }

    fn exponent(&mut self) -> Result<u64> {
        if self.peek() != Some(b'^') {
            return Ok(1);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected exponent");
        }
        let e: u64 = core::str::from_utf8(&self.s[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::Parse {
                pos: start,
                msg: "exponent overflow".into(),
            })?;
        if e > MAX_EXPONENT {
            return self.err("exponent too large");
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Vec<Fq>> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                let e = self.exponent()?;
                let mut acc = vec![Fq::ONE];
                for _ in 0..e {
                    acc = self.mul_polys(&acc, &v);
                }
                Ok(acc)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                let mut val: u64 = 0;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                    val = (val * 10 + (self.s[self.pos] - b'0') as u64) % self.ctx.p as u64;
                    self.pos += 1;
                }
                let _ = start;
                let e = self.exponent()?;
                let x = self.ctx.pow(self.ctx.from_int(val as i64), e);
                Ok(if x.is_zero() { Vec::new() } else { vec![x] })
            }
            Some(c) if c == self.var => {
                if !self.allow_var {
                    return self.err(format!("variable '{}' not allowed here", c as char));
                }
                self.pos += 1;
                let e = self.exponent()? as usize;
                let mut v = vec![Fq::ZERO; e + 1];
                v[e] = Fq::ONE;
                Ok(v)
            }
            Some(b'g') if self.ctx.h > 1 => {
                self.pos += 1;
                let e = self.exponent()?;
                let x = self.ctx.pow(self.ctx.generator(), e);
                Ok(if x.is_zero() { Vec::new() } else { vec![x] })
            }
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_examples() {
        let f2 = FieldCtx::prime(2).unwrap();
        assert_eq!(f2.trace(Fq::ONE), 1);
        let f4 = FieldCtx::parse_spec("p=2,h=2,mod=g^2+g+1").unwrap();
        assert_eq!(f4.trace(f4.generator()), 1);
        assert_eq!(f4.trace(Fq::ZERO), 0);
    }

    #[test]
    fn cube_roots_examples() {
        let f2 = FieldCtx::prime(2).unwrap();
        assert_eq!(f2.cube_roots(Fq::ONE), &[Fq::ONE]);
        let f5 = FieldCtx::prime(5).unwrap();
        assert_eq!(f5.cube_roots(f5.from_int(2)), &[f5.from_int(3)]);
        let f7 = FieldCtx::prime(7).unwrap();
        assert!(f7.cube_roots(f7.from_int(3)).is_empty());
    }

    #[test]
    fn sqrt_and_nonsquare() {
        let f4 = FieldCtx::with_q(4).unwrap();
        let g = f4.generator();
        assert_eq!(f4.sqrt(g), Some(f4.mul(g, g)));
        let f5 = FieldCtx::prime(5).unwrap();
        let r = f5.sqrt(f5.from_int(4)).unwrap();
        assert!(r == f5.from_int(2) || r == f5.from_int(3));
        assert_eq!(f5.sqrt(f5.from_int(2)), None);
        assert_eq!(f5.nonsquare().unwrap(), f5.from_int(2));
        assert_eq!(FieldCtx::prime(7).unwrap().nonsquare().unwrap().index(), 3);
        assert!(FieldCtx::prime(2).unwrap().nonsquare().is_err());
    }

    #[test]
    fn rejects_char3_and_reducible() {
        assert!(FieldCtx::prime(3).is_err());
        assert!(FieldCtx::with_q(9).is_err());
        assert!(FieldCtx::parse_spec("p=2,h=2,mod=g^2+1").is_err());
        assert!(FieldCtx::parse_spec("q=6").is_err());
    }

    #[test]
    fn spec_round_trip() {
        for q in [2, 4, 5, 7, 8, 16, 25, 32] {
            let f = FieldCtx::with_q(q).unwrap();
            let g = FieldCtx::parse_spec(&f.spec()).unwrap();
            assert_eq!(f, g);
            for x in f.elements() {
                assert_eq!(f.parse_elem(&f.format_elem(x)).unwrap(), x);
            }
        }
    }
}
