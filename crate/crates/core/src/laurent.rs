//! Truncated arithmetic in `K_inf = F_q((1/t))`, the character `psi`, exact
//! Haar integration, the Farey dissection of `T` and parabola measures.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::max;

use num_rational::BigRational;
use num_traits::Zero;

use crate::cyclotomic::{rat_pow, CycNum};
use crate::error::{invalid, Error, Result};
use crate::fields::{FieldCtx, Fq};
use crate::poly::{Poly, PolyRing};

/// `sum_i a_i t^i`, known at every index `>= floor`.
///
/// With `floor = None` the value is exact (all lower digits vanish). With
/// `floor = Some(f)` it stands for the coset `value + {|e| < q^f}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Laurent {
    /// Index of `digits[0]`. Equals the floor for inexact values.
    base: i64,
    digits: Vec<Fq>,
    floor: Option<i64>,
}

impl Laurent {
    pub fn zero() -> Laurent {
        Laurent {
            base: 0,
            digits: Vec::new(),
            floor: None,
        }
    }

    /// Exact value `sum_k digits[k] t^{base+k}`.
    pub fn exact(base: i64, digits: Vec<Fq>) -> Laurent {
        Laurent {
            base,
            digits,
            floor: None,
        }
        .normalized()
    }

    /// Value known at indices `>= floor`; `digits[k]` is the digit at `floor+k`.
    pub fn with_floor(floor: i64, digits: Vec<Fq>) -> Laurent {
        Laurent {
            base: floor,
            digits,
            floor: Some(floor),
        }
        .normalized()
    }

    pub fn monomial(c: Fq, k: i64) -> Laurent {
        Laurent::exact(k, vec![c])
    }

    pub fn from_poly(p: &Poly) -> Laurent {
        Laurent::exact(0, p.coeffs().to_vec())
    }

    fn normalized(mut self) -> Laurent {
        while self.digits.last() == Some(&Fq::ZERO) {
            self.digits.pop();
        }
        if self.floor.is_none() {
            let lead = self.digits.iter().take_while(|d| d.is_zero()).count();
            if lead == self.digits.len() {
                self.digits.clear();
                self.base = 0;
            } else if lead > 0 {
                self.digits.drain(..lead);
                self.base += lead as i64;
            }
        }
        self
    }

    pub fn is_exact(&self) -> bool {
        self.floor.is_none()
    }

    pub fn floor(&self) -> Option<i64> {
        self.floor
    }

    /// Digit at index `i`; errors below the precision floor.
    pub fn digit(&self, i: i64) -> Result<Fq> {
        if let Some(f) = self.floor {
            if i < f {
                return Err(Error::Precision { floor: f });
            }
        }
        Ok(self.raw(i))
    }

    fn raw(&self, i: i64) -> Fq {
        let k = i - self.base;
        if k < 0 {
            return Fq::ZERO;
        }
        self.digits.get(k as usize).copied().unwrap_or(Fq::ZERO)
    }

    /// Highest index carrying a known nonzero digit.
    pub fn top(&self) -> Option<i64> {
        let n = self.digits.len();
        (n > 0).then(|| self.base + n as i64 - 1)
    }

    /// Lowest stored index (the floor for inexact values).
    pub fn low(&self) -> i64 {
        self.floor.unwrap_or(self.base)
    }

    /// `log_q |a|` (`None` for zero); errors when every known digit is zero
    /// but the value is inexact.
    pub fn abs_log(&self) -> Result<Option<i64>> {
        match (self.top(), self.floor) {
            (Some(t), _) => Ok(Some(t)),
            (None, None) => Ok(None),
            (None, Some(f)) => Err(Error::Precision { floor: f }),
        }
    }

    /// True when the value is known to satisfy `|a| < q^e`.
    pub fn abs_below(&self, e: i64) -> Result<bool> {
        match self.top() {
            Some(t) => Ok(t < e),
            None => match self.floor {
                Some(f) if f > e => Err(Error::Precision { floor: f }),
                _ => Ok(true),
            },
        }
    }

    /// Drops digits below `f` (keeps the weaker of the two floors).
    pub fn truncate(&self, f: i64) -> Laurent {
        let nf = match self.floor {
            Some(g) => max(f, g),
            None => f,
        };
        let digits = (nf..self.top().map_or(nf, |t| t + 1))
            .map(|i| self.raw(i))
            .collect();
        Laurent::with_floor(nf, digits)
    }

    fn combine_floor(a: Option<i64>, b: Option<i64>) -> Option<i64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(max(x, y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    fn build(lo: i64, hi: i64, floor: Option<i64>, f: impl Fn(i64) -> Fq) -> Laurent {
        if hi < lo {
            return match floor {
                Some(fl) => Laurent::with_floor(fl, Vec::new()),
                None => Laurent::zero(),
            };
        }
        let digits = (lo..=hi).map(f).collect();
        match floor {
            Some(fl) => {
                debug_assert_eq!(fl, lo);
                Laurent::with_floor(fl, digits)
            }
            None => Laurent::exact(lo, digits),
        }
    }

    pub fn add(&self, ctx: &FieldCtx, o: &Laurent) -> Laurent {
        let floor = Self::combine_floor(self.floor, o.floor);
        let lo = floor.unwrap_or(self.base.min(o.base));
        let hi = max(self.top().unwrap_or(lo - 1), o.top().unwrap_or(lo - 1));
        Self::build(lo, hi, floor, |i| ctx.add(self.raw(i), o.raw(i)))
    }

    pub fn neg(&self, ctx: &FieldCtx) -> Laurent {
        Laurent {
            base: self.base,
            digits: self.digits.iter().map(|&d| ctx.neg(d)).collect(),
            floor: self.floor,
        }
    }

    pub fn sub(&self, ctx: &FieldCtx, o: &Laurent) -> Laurent {
        self.add(ctx, &o.neg(ctx))
    }

    pub fn scale(&self, ctx: &FieldCtx, c: Fq) -> Laurent {
        if c.is_zero() {
            return match self.floor {
                None => Laurent::zero(),
                Some(f) => Laurent::with_floor(f, Vec::new()),
            };
        }
        Laurent {
            base: self.base,
            digits: self.digits.iter().map(|&d| ctx.mul(c, d)).collect(),
            floor: self.floor,
        }
    }

    /// Multiplication by `t^k`.
    pub fn shift(&self, k: i64) -> Laurent {
        Laurent {
            base: self.base + k,
            digits: self.digits.clone(),
            floor: self.floor.map(|f| f + k),
        }
    }

    /// Product. The floor is `max(h_a + l_b, h_b + l_a, l_a + l_b)` where `h`
    /// is the top known digit and `l` the floor, which bounds every term of
    /// `(A + e_a)(B + e_b) - AB`.
    pub fn mul(&self, ctx: &FieldCtx, o: &Laurent) -> Laurent {
        let cand = [
            self.top().zip(o.floor).map(|(h, l)| h + l),
            o.top().zip(self.floor).map(|(h, l)| h + l),
            self.floor.zip(o.floor).map(|(a, b)| a + b),
        ];
        let floor = cand.iter().flatten().copied().max();
        let (Some(ta), Some(tb)) = (self.top(), o.top()) else {
            return Self::build(0, -1, floor, |_| Fq::ZERO);
        };
        let lo_exact = self.base + o.base;
        let hi = ta + tb;
        let mut prod = vec![Fq::ZERO; (hi - lo_exact + 1) as usize];
        for (i, &x) in self.digits.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in o.digits.iter().enumerate() {
                prod[i + j] = ctx.add(prod[i + j], ctx.mul(x, y));
            }
        }
        let lo = floor.unwrap_or(lo_exact);
        Self::build(lo, hi.max(lo - 1), floor, |i| {
            let k = i - lo_exact;
            if k < 0 {
                Fq::ZERO
            } else {
                prod.get(k as usize).copied().unwrap_or(Fq::ZERO)
            }
        })
    }

    pub fn mul_poly(&self, ctx: &FieldCtx, p: &Poly) -> Laurent {
        self.mul(ctx, &Laurent::from_poly(p))
    }

    /// `a / r` expanded down to index `floor` (exact if the expansion ends).
    pub fn from_ratio(ctx: &FieldCtx, a: &Poly, r: &Poly, floor: i64) -> Result<Laurent> {
        let ring = PolyRing::new(ctx.clone());
        Self::from_ratio_in(&ring, a, r, floor)
    }

    pub fn from_ratio_in(ring: &PolyRing, a: &Poly, r: &Poly, floor: i64) -> Result<Laurent> {
        let ctx = ring.field();
        let Some(dr) = r.deg() else {
            return invalid("division by zero");
        };
        let (quo, mut rem) = ring.div_rem(a, r)?;
        let mut out = Laurent::from_poly(&quo);
        let inv = ctx.inv(r.lc()).expect("nonzero");
        // long division into negative powers: rem/r with deg rem < deg r
        let mut neg = Vec::new();
        let mut i = -1i64;
        while i >= floor && !rem.is_zero() {
            // digit at t^i is the coefficient of t^{dr-1} in rem * t^{-i-1}... by
            // shifting rem up one step at a time
            rem = ring.shift(&rem, 1);
            let d = ctx.mul(rem.coeff(dr), inv);
            neg.push(d);
            rem = ring.sub(&rem, &ring.scale(d, r));
            i -= 1;
        }
        if !neg.is_empty() {
            neg.reverse();
            let base = -(neg.len() as i64);
            out = out.add(ctx, &Laurent::exact(base, neg));
        }
        Ok(if rem.is_zero() {
            out
        } else {
            out.truncate(floor)
        })
    }

    /// Digits at non-negative indices.
    pub fn poly_part(&self) -> Result<Poly> {
        if let Some(f) = self.floor {
            if f > 0 {
                return Err(Error::Precision { floor: f });
            }
        }
        let top = self.top().unwrap_or(-1);
        Ok(Poly::from_coeffs((0..=top).map(|i| self.raw(i)).collect()))
    }

    /// `{a}`: digits at negative indices.
    pub fn frac_part(&self) -> Laurent {
        let hi = self.top().map_or(-1, |t| t.min(-1));
        let lo = self.low();
        if lo > -1 {
            return match self.floor {
                None => Laurent::zero(),
                Some(_) => Laurent::with_floor(lo, Vec::new()),
            };
        }
        Self::build(lo, hi, self.floor, |i| self.raw(i))
    }

    pub fn parse(ctx: &FieldCtx, text: &str) -> Result<Laurent> {
        parse_laurent(ctx, text)
    }

    pub fn format(&self, ctx: &FieldCtx) -> String {
        let mut out = String::new();
        if let Some(t) = self.top() {
            for i in (self.base..=t).rev() {
                let c = self.raw(i);
                if c.is_zero() {
                    continue;
                }
                if !out.is_empty() {
                    out.push('+');
                }
                let cs = ctx.format_elem(c);
                let cs = if ctx.elem_is_compound(c) {
                    format!("({cs})")
                } else {
                    cs
                };
                match (i, c == Fq::ONE) {
                    (0, _) => out.push_str(&cs),
                    (1, true) => out.push('t'),
                    (1, false) => out.push_str(&format!("{cs}*t")),
                    (_, true) => out.push_str(&format!("t^{i}")),
                    (_, false) => out.push_str(&format!("{cs}*t^{i}")),
                }
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        if let Some(f) = self.floor {
            out.push_str(&format!(" @lo={f}"));
        }
        out
    }
}

fn parse_laurent(ctx: &FieldCtx, text: &str) -> Result<Laurent> {
    let (body, floor) = match text.find('@') {
        Some(k) => {
            let spec = text[k + 1..].trim();
            let v = spec
                .strip_prefix("lo")
                .map(str::trim_start)
                .and_then(|s| s.strip_prefix('='))
                .ok_or(Error::Parse {
                    pos: k,
                    msg: "expected '@lo=<int>'".into(),
                })?;
            let f: i64 = v.trim().parse().map_err(|_| Error::Parse {
                pos: k,
                msg: "bad precision floor".into(),
            })?;
            (&text[..k], Some(f))
        }
        None => (text, None),
    };
    let bytes = body.as_bytes();
    let mut terms: Vec<(usize, bool, &str)> = Vec::new();
    let mut depth = 0i32;
    let mut start = 0usize;
    let mut neg = false;
    let mut prev_caret = false;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 && !prev_caret => {
                let piece = body[start..i].trim();
                if !piece.is_empty() {
                    terms.push((start, neg, piece));
                } else if i != 0 && !body[..i].trim().is_empty() {
                    return Err(Error::Parse {
                        pos: i,
                        msg: "empty term".into(),
                    });
                }
                neg = b == b'-';
                start = i + 1;
            }
            _ => {}
        }
        if !b.is_ascii_whitespace() {
            prev_caret = b == b'^';
        }
    }
    let piece = body[start..].trim();
    if piece.is_empty() {
        return Err(Error::Parse {
            pos: start,
            msg: "empty term".into(),
        });
    }
    terms.push((start, neg, piece));
    let mut acc = Laurent::zero();
    for (pos, neg, term) in terms {
        let (coef, exp) = split_term(term).ok_or(Error::Parse {
            pos,
            msg: format!("bad term '{term}'"),
        })?;
        let c = match coef {
            Some(s) => ctx.parse_elem(s).map_err(|e| match e {
                Error::Parse { pos: p, msg } => Error::Parse { pos: pos + p, msg },
                other => other,
            })?,
            None => Fq::ONE,
        };
        let c = if neg { ctx.neg(c) } else { c };
        acc = acc.add(ctx, &Laurent::monomial(c, exp));
    }
    Ok(match floor {
        Some(f) => {
            if acc.base < f && !acc.digits.is_empty() {
                return Err(Error::Parse {
                    pos: 0,
                    msg: "digit below the precision floor".into(),
                });
            }
            acc.truncate(f)
        }
        None => acc,
    })
}

/// Splits `c*t^k`, `t^k`, `c*t`, `t`, `c` into coefficient text and exponent.
fn split_term(term: &str) -> Option<(Option<&str>, i64)> {
    let term = term.trim();
    let (coef, var) = match term.rfind('t') {
        Some(k) => {
            let head = term[..k].trim_end();
            let coef = if head.is_empty() {
                None
            } else {
                Some(head.strip_suffix('*')?.trim())
            };
            (coef, Some(term[k + 1..].trim()))
        }
        None => (Some(term), None),
    };
    let exp = match var {
        None => 0,
        Some("") => 1,
        Some(rest) => rest.strip_prefix('^')?.trim().parse().ok()?,
    };
    Some((coef, exp))
}

/// `Tr(a_{-1})` as an exponent of `zeta_p`.
pub fn psi_exponent(ctx: &FieldCtx, a: &Laurent) -> Result<u32> {
    Ok(ctx.trace(a.digit(-1)?))
}

/// `psi(a) = zeta_p^{Tr(a_{-1})}`.
pub fn psi(ctx: &FieldCtx, a: &Laurent) -> Result<CycNum> {
    Ok(CycNum::zeta_pow(ctx.p(), psi_exponent(ctx, a)? as u64))
}

/// Depth `m` such that `psi(gamma f(x) + w.x)` is constant on cosets of
/// `t^{-m}` times the unit ball in `T^n`: `2 + max(0, log|gamma| + log H_f, log|w|)`.
pub fn constancy_depth(gamma_log: Option<i64>, height_log: i64, w_log: Option<i64>) -> i64 {
    let g = gamma_log.map_or(0, |g| g + height_log);
    2 + max(0, max(g, w_log.unwrap_or(0)))
}

/// A one-dimensional ball `{x : |x - center| < q^radius_log}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HaarBall {
    pub center: Laurent,
    pub radius_log: i64,
}

impl HaarBall {
    /// The unit interval `T = {|x| < 1}`.
    pub fn unit() -> HaarBall {
        HaarBall {
            center: Laurent::zero(),
            radius_log: 0,
        }
    }

    pub fn around_zero(radius_log: i64) -> HaarBall {
        HaarBall {
            center: Laurent::zero(),
            radius_log,
        }
    }

    pub fn measure(&self, q: u32) -> BigRational {
        rat_pow(q, self.radius_log)
    }
}

/// Exact integral of a locally constant `f` over a product of balls.
///
/// The caller warrants that `f` is constant on cosets of `t^{-depth}` times
/// the unit ball in each coordinate. The representatives are exact values.
pub fn haar_integrate<F>(ctx: &FieldCtx, boxes: &[HaarBall], depth: i64, mut f: F) -> Result<CycNum>
where
    F: FnMut(&[Laurent]) -> Result<CycNum>,
{
    let q = ctx.q() as u64;
    let p = ctx.p();
    let mut spans = Vec::with_capacity(boxes.len());
    let mut cell_log = 0i64;
    for b in boxes {
        let m = max(depth, -b.radius_log);
        let width = (b.radius_log + m) as u32;
        spans.push((m, width));
        cell_log -= m;
    }
    let total: u64 = spans.iter().map(|&(_, w)| q.pow(w)).product();
    let mut acc = CycNum::zero(p);
    let mut point: Vec<Laurent> = boxes.iter().map(|b| b.center.clone()).collect();
    for idx in 0..total {
        let mut rest = idx;
        for (k, (b, &(m, w))) in boxes.iter().zip(spans.iter()).enumerate() {
            let n = q.pow(w);
            let mut code = rest % n;
            rest /= n;
            let mut digits = Vec::with_capacity(w as usize);
            for _ in 0..w {
                digits.push(Fq::from_index_unchecked((code % q) as usize));
                code /= q;
            }
            point[k] = b.center.add(ctx, &Laurent::exact(-m, digits));
        }
        acc = &acc + &f(&point)?;
    }
    Ok(acc.scale(&rat_pow(ctx.q(), cell_log)))
}

/// [`haar_integrate`] re-evaluated at `depth + 1`; errors on mismatch.
pub fn haar_integrate_checked<F>(
    ctx: &FieldCtx,
    boxes: &[HaarBall],
    depth: i64,
    mut f: F,
) -> Result<CycNum>
where
    F: FnMut(&[Laurent]) -> Result<CycNum>,
{
    let a = haar_integrate(ctx, boxes, depth, &mut f)?;
    let b = haar_integrate(ctx, boxes, depth + 1, &mut f)?;
    if a != b {
        return Err(Error::Identity(format!(
            "integrand not constant at depth {depth}"
        )));
    }
    Ok(a)
}

/// `{a in T : |r a - a0| < q^{-Q}}` with `r` monic, `gcd(a0, r) = 1`, `|a0| < |r|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FareyBall {
    pub a: Poly,
    pub r: Poly,
    pub q_log: i64,
}

impl FareyBall {
    /// Haar measure `q^{-Q - deg r}`.
    pub fn measure(&self, q: u32) -> BigRational {
        rat_pow(q, -self.q_log - self.r.deg().unwrap_or(0) as i64)
    }

    pub fn contains(&self, ring: &PolyRing, alpha: &Laurent) -> Result<bool> {
        let ctx = ring.field();
        let v = alpha
            .mul_poly(ctx, &self.r)
            .sub(ctx, &Laurent::from_poly(&self.a));
        v.abs_below(-self.q_log)
    }

    pub fn format(&self, ring: &PolyRing) -> String {
        format!(
            "({}/{}, radius=q^-{})",
            ring.format(&self.a),
            ring.format(&self.r),
            self.q_log
        )
    }
}

/// The Dirichlet dissection of `T` at level `Q`: all balls with monic
/// `|r| <= q^Q`, in canonical order of `r` then `a`.
pub fn farey_dissect(ring: &PolyRing, q_log: i64) -> Result<Vec<FareyBall>> {
    if q_log < 1 {
        return invalid("farey_dissect needs Q >= 1");
    }
    let mut out = Vec::new();
    for r in ring.monic_up_to(q_log as usize) {
        for a in ring.units_mod(&r) {
            out.push(FareyBall {
                a,
                r: r.clone(),
                q_log,
            });
        }
    }
    Ok(out)
}

/// The ball containing `alpha`: `a` is the polynomial part of `r alpha`.
pub fn farey_locate(ring: &PolyRing, q_log: i64, alpha: &Laurent) -> Result<Option<FareyBall>> {
    let ctx = ring.field();
    for r in ring.monic_up_to(q_log as usize) {
        let ra = alpha.mul_poly(ctx, &r);
        let a = ra.poly_part()?;
        if !ra.frac_part().abs_below(-q_log)? {
            continue;
        }
        if ring.gcd(&a, &r).is_one() {
            return Ok(Some(FareyBall { a, r, q_log }));
        }
    }
    Ok(None)
}

/// Haar measure of `{x in T : |x^2 - a| < |b|}` by digit enumeration.
///
/// Returns `(measure, depth)`; `b_log = None` means `b = 0`, giving 0.
pub fn measure_parabola(
    ctx: &FieldCtx,
    a: &Laurent,
    b_log: Option<i64>,
) -> Result<(BigRational, i64)> {
    let Some(beta) = b_log else {
        return Ok((BigRational::zero(), 0));
    };
    let m = max(1, -beta - 1);
    Ok((measure_parabola_at(ctx, a, beta, m)?, m))
}

/// [`measure_parabola`] with an explicit enumeration depth.
pub fn measure_parabola_at(ctx: &FieldCtx, a: &Laurent, beta: i64, m: i64) -> Result<BigRational> {
    let q = ctx.q() as u64;
    let count_all = q.pow(m as u32);
    let mut hits = 0u64;
    let a_low = a.truncate(beta);
    for idx in 0..count_all {
        let mut code = idx;
        let mut digits = Vec::with_capacity(m as usize);
        for _ in 0..m {
            digits.push(Fq::from_index_unchecked((code % q) as usize));
            code /= q;
        }
        let x = Laurent::exact(-m, digits);
        let d = x.mul(ctx, &x).sub(ctx, &a_low);
        if d.abs_below(beta)? {
            hits += 1;
        }
    }
    Ok(BigRational::new(
        hits.into(),
        num_bigint::BigInt::from(q).pow(m as u32),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn fq(q: u32) -> FieldCtx {
        FieldCtx::with_q(q).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn psi_examples() {
        let k = fq(2);
        assert_eq!(psi(&k, &Laurent::zero()).unwrap(), CycNum::one(2));
        let a = Laurent::parse(&k, "t^-1").unwrap();
        assert_eq!(psi(&k, &a).unwrap(), CycNum::from_int(2, -1));
        let b = Laurent::parse(&k, "t^-2").unwrap();
        assert_eq!(psi(&k, &b).unwrap(), CycNum::one(2));
        let c = Laurent::parse(&k, "t^-1 @lo=0").unwrap_err();
        assert!(matches!(c, Error::Parse { .. }));
        let d = Laurent::parse(&k, "t @lo=0").unwrap();
        assert!(matches!(psi(&k, &d), Err(Error::Precision { .. })));
    }

    #[test]
    fn parse_format_round_trip() {
        let k = fq(5);
        for s in [
            "t^-1+t^-3 @lo=-4",
            "2*t^2+4",
            "0",
            "3*t^-2 @lo=-7",
            "t+1+t^-1",
        ] {
            let a = Laurent::parse(&k, s).unwrap();
            assert_eq!(Laurent::parse(&k, &a.format(&k)).unwrap(), a, "{s}");
        }
        let a = Laurent::parse(&k, "t^-1 - t^-3").unwrap();
        assert_eq!(a.digit(-3).unwrap().index(), 4);
    }

    #[test]
    fn haar_examples() {
        let k = fq(2);
        let one = haar_integrate(&k, &[HaarBall::unit()], 1, |_| Ok(CycNum::one(2))).unwrap();
        assert_eq!(one, CycNum::one(2));
        let x = Laurent::parse(&k, "t").unwrap();
        let v =
            haar_integrate(&k, &[HaarBall::unit()], 3, |pt| psi(&k, &pt[0].mul(&k, &x))).unwrap();
        assert!(v.is_zero());
        let x = Laurent::parse(&k, "t+1").unwrap();
        let ball = HaarBall::around_zero(-2);
        let v = haar_integrate(&k, &[ball], 4, |pt| psi(&k, &pt[0].mul(&k, &x))).unwrap();
        assert_eq!(v, CycNum::from_rational(2, rat(1, 4)));
    }

    #[test]
    fn farey_examples() {
        let ring = PolyRing::new(fq(2));
        let balls = farey_dissect(&ring, 1).unwrap();
        assert_eq!(balls.len(), 3);
        let ms: Vec<_> = balls.iter().map(|b| b.measure(2)).collect();
        assert_eq!(ms, vec![rat(1, 2), rat(1, 4), rat(1, 4)]);
        let ring3 = PolyRing::new(fq(5));
        let total = farey_dissect(&ring3, 1)
            .unwrap()
            .iter()
            .fold(BigRational::zero(), |acc, b| acc + b.measure(5));
        assert_eq!(total, rat(1, 1));
        let b = farey_locate(&ring, 1, &Laurent::zero()).unwrap().unwrap();
        assert!(b.a.is_zero() && b.r.is_one());
    }

    #[test]
    fn parabola_examples() {
        let k = fq(2);
        let (m, _) = measure_parabola(&k, &Laurent::zero(), Some(-2)).unwrap();
        assert_eq!(m, rat(1, 2));
        let a = Laurent::parse(&k, "t^-1").unwrap();
        assert_eq!(measure_parabola(&k, &a, Some(-2)).unwrap().0, rat(0, 1));
        let a = Laurent::parse(&k, "t^-2").unwrap();
        assert_eq!(measure_parabola(&k, &a, Some(-4)).unwrap().0, rat(1, 4));
        assert_eq!(measure_parabola(&k, &a, None).unwrap().0, rat(0, 1));
    }

    #[test]
    fn ratio_expansion() {
        let ring = PolyRing::new(fq(2));
        let one = Poly::one();
        let t1 = ring.parse("t+1").unwrap();
        // 1/(t+1) = t^-1 + t^-2 + ...
        let v = Laurent::from_ratio_in(&ring, &one, &t1, -5).unwrap();
        assert_eq!(v.floor(), Some(-5));
        for i in -5..=-1 {
            assert_eq!(v.digit(i).unwrap(), Fq::ONE);
        }
        let t = Poly::t();
        let v = Laurent::from_ratio_in(&ring, &one, &t, -5).unwrap();
        assert!(v.is_exact());
        assert_eq!(v, Laurent::parse(ring.field(), "t^-1").unwrap());
    }
}
