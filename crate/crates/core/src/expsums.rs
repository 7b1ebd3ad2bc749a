//! Complete exponential sums over `O/r`.
//!
//! Everything reduces to sums `sum_{|x| < |r|} psi(g(x)/r)` for a polynomial
//! `g` of degree at most 3 in `x`. With `r` monic of degree `d`, `psi(A/r)`
//! depends only on the linear functional `A -> [t^{d-1}](A mod r)`, whose
//! values on `t^k` form a Hankel table. A sum is then a histogram of traces.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::cyclotomic::{cyc_abs_sq, rat_pow, AbsSq, CycInt, CycNum};
use crate::dualform::{dual_eval, SpecialSetup};
use crate::error::{invalid, Error, Result};
use crate::fields::{FieldCtx, Fq};
use crate::laurent::Laurent;
use crate::poly::{Poly, PolyRing};

/// `F(x) = sum_i F_i x_i^3` with every `F_i` nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalForm {
    ring: PolyRing,
    f: Vec<Poly>,
}

impl DiagonalForm {
    pub fn new(ring: PolyRing, f: Vec<Poly>) -> Result<DiagonalForm> {
        if f.len() < 2 {
            return invalid("a diagonal form needs n >= 2");
        }
        if f.iter().any(Poly::is_zero) {
            return invalid("coefficients of a diagonal form must be nonzero");
        }
        if ring.p() == 3 {
            return Err(Error::InvalidField(
                "characteristic 3 is excluded for cubic forms".into(),
            ));
        }
        Ok(DiagonalForm { ring, f })
    }

    /// Parses a comma-separated coefficient list such as `1,1,t+1`.
    pub fn parse(ring: PolyRing, text: &str) -> Result<DiagonalForm> {
        let f = text
            .split(',')
            .map(|s| ring.parse(s.trim()))
            .collect::<Result<Vec<_>>>()?;
        DiagonalForm::new(ring, f)
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn field(&self) -> &FieldCtx {
        self.ring.field()
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.f
    }

    /// `log_q H_F = max_i deg F_i`.
    pub fn height_log(&self) -> i64 {
        self.f
            .iter()
            .map(|x| x.deg().unwrap_or(0) as i64)
            .max()
            .unwrap_or(0)
    }

    /// `prod_i F_i`, standing in for the discriminant.
    pub fn disc(&self) -> Poly {
        self.f
            .iter()
            .fold(Poly::one(), |acc, x| self.ring.mul(&acc, x))
    }

    pub fn eval(&self, x: &[Poly]) -> Poly {
        let r = &self.ring;
        self.f.iter().zip(x).fold(Poly::zero(), |acc, (fi, xi)| {
            r.add(&acc, &r.mul(fi, &r.cube(xi)))
        })
    }

    /// The form with coefficients permuted: `perm[k]` is the source index.
    pub fn permuted(&self, perm: &[usize]) -> DiagonalForm {
        DiagonalForm {
            ring: self.ring.clone(),
            f: perm.iter().map(|&i| self.f[i].clone()).collect(),
        }
    }

    pub fn format(&self) -> String {
        let parts: Vec<String> = self.f.iter().map(|x| self.ring.format(x)).collect();
        parts.join(",")
    }
}

/// A sum together with its squared magnitude.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumValue {
    pub value: CycNum,
    pub abs_sq: AbsSq,
}

impl SumValue {
    pub fn new(value: CycNum) -> SumValue {
        let abs_sq = cyc_abs_sq(&value);
        SumValue { value, abs_sq }
    }
}

/// `h_k = [t^{d-1}](t^k mod r)` for `k < len`, with `r` monic of degree `d`.
pub(crate) fn residue_weights(ctx: &FieldCtx, r: &Poly, len: usize) -> Vec<Fq> {
    let d = r.deg().unwrap_or(0);
    if d == 0 {
        return vec![Fq::ZERO; len];
    }
    let rc = r.coeffs();
    let mut cur = vec![Fq::ZERO; d];
    cur[0] = Fq::ONE;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(cur[d - 1]);
        let top = cur[d - 1];
        for i in (1..d).rev() {
            cur[i] = ctx.sub(cur[i - 1], ctx.mul(top, rc[i]));
        }
        cur[0] = ctx.neg(ctx.mul(top, rc[0]));
    }
    out
}

fn dot_shift(ctx: &FieldCtx, g: &[Fq], h: &[Fq], shift: usize) -> Fq {
    g.iter().enumerate().fold(Fq::ZERO, |acc, (i, &gi)| {
        ctx.add(acc, ctx.mul(gi, h[i + shift]))
    })
}

/// `out[..a.len() + b.len() - 1] = a * b`; `a` and `b` are nonempty.
fn conv_into(ctx: &FieldCtx, a: &[Fq], b: &[Fq], out: &mut [Fq]) {
    out[..a.len() + b.len() - 1].fill(Fq::ZERO);
    for (i, &x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = ctx.add(out[i + j], ctx.mul(x, y));
        }
    }
}

/// `sum_x zeta^{Tr(lambda(g(x)))}` over all `x` with `len_x` free digits,
/// where `lambda(t^k) = h[k]` and `g(x) = sum_k g[k] x^k` (`k <= 3`).
pub(crate) fn functional_sum(ctx: &FieldCtx, len_x: usize, h: &[Fq], g: &[Poly]) -> CycInt {
    let p = ctx.p();
    let q = ctx.q() as u64;
    let c0 = g
        .first()
        .map_or(Fq::ZERO, |g0| dot_shift(ctx, g0.coeffs(), h, 0));
    let span = len_x.saturating_sub(1);
    let weights: Vec<Vec<Fq>> = (1..g.len())
        .map(|k| {
            if g[k].is_zero() {
                return Vec::new();
            }
            (0..=k * span)
                .map(|j| dot_shift(ctx, g[k].coeffs(), h, j))
                .collect()
        })
        .collect();
    let mut hist = vec![0i64; p as usize];
    let total = q.pow(len_x as u32);
    let mut x = vec![Fq::ZERO; len_x];
    let cap = weights.len() * span + 1;
    let mut pw = vec![Fq::ZERO; cap];
    let mut next = vec![Fq::ZERO; cap];
    for idx in 0..total {
        let mut code = idx;
        for d in x.iter_mut() {
            *d = Fq::from_index_unchecked((code % q) as usize);
            code /= q;
        }
        let mut val = c0;
        pw[0] = Fq::ONE;
        let mut len = 1;
        for w in &weights {
            if len_x == 0 {
                break;
            }
            conv_into(ctx, &pw[..len], &x, &mut next);
            len += span;
            core::mem::swap(&mut pw, &mut next);
            if w.is_empty() {
                continue;
            }
            for (j, &xj) in pw[..len].iter().enumerate() {
                if !xj.is_zero() {
                    val = ctx.add(val, ctx.mul(xj, w[j]));
                }
            }
        }
        hist[ctx.trace(val) as usize] += 1;
    }
    CycInt::from_histogram(p, &hist)
}

/// Monic normalization: `psi(A/r) = psi((A/lc r) / monic(r))`.
fn normalize(ring: &PolyRing, r: &Poly, g: &[Poly]) -> (Poly, Vec<Poly>) {
    let (u, m) = ring.monic(r);
    let inv = ring.field().inv(u).expect("nonzero");
    let g = g
        .iter()
        .map(|x| ring.rem(&ring.scale(inv, x), &m))
        .collect();
    (m, g)
}

/// `sum_{|x|<|r|} psi(g(x)/r)` for `g(x) = sum_k g[k] x^k`, `k <= 3`.
pub fn poly_sum(ring: &PolyRing, r: &Poly, g: &[Poly]) -> Result<CycInt> {
    if r.is_zero() {
        return invalid("modulus must be nonzero");
    }
    if g.len() > 4 {
        return invalid("poly_sum supports degree at most 3 in x");
    }
    let (m, g) = normalize(ring, r, g);
    let d = m.deg().unwrap();
    let h = residue_weights(ring.field(), &m, 4 * d + 1);
    Ok(functional_sum(ring.field(), d, &h, &g))
}

/// Exponent `e` with `psi(a/r) = zeta^e`.
pub fn psi_frac(ring: &PolyRing, a: &Poly, r: &Poly) -> Result<u32> {
    if r.is_zero() {
        return invalid("modulus must be nonzero");
    }
    let (m, g) = normalize(ring, r, core::slice::from_ref(a));
    let d = m.deg().unwrap();
    if d == 0 {
        return Ok(0);
    }
    Ok(ring.field().trace(g[0].coeff(d - 1)))
}

/// `sum_{|x|<|r|} psi(a x / r)`, equal to `|r|` if `r | a` and 0 otherwise.
pub fn linear_full_sum(ring: &PolyRing, a: &Poly, r: &Poly) -> Result<CycNum> {
    if r.is_zero() {
        return invalid("modulus must be nonzero");
    }
    let p = ring.p();
    if ring.divides(r, a) {
        Ok(CycNum::from_rational(
            p,
            rat_pow(ring.q(), r.deg().unwrap() as i64),
        ))
    } else {
        Ok(CycNum::zero(p))
    }
}

/// Term-by-term evaluation of [`linear_full_sum`].
pub fn linear_full_sum_brute(ring: &PolyRing, a: &Poly, r: &Poly) -> Result<CycNum> {
    if r.is_zero() {
        return invalid("modulus must be nonzero");
    }
    let (m, g) = normalize(ring, r, core::slice::from_ref(a));
    let mut hist = vec![0i64; ring.p() as usize];
    for x in ring.below_degree(m.deg().unwrap()) {
        hist[psi_frac_monic(ring, &ring.mul(&g[0], &x), &m) as usize] += 1;
    }
    Ok(CycInt::from_histogram(ring.p(), &hist).into())
}

/// [`psi_frac`] for a monic modulus, without renormalizing.
fn psi_frac_monic(ring: &PolyRing, a: &Poly, m: &Poly) -> u32 {
    match m.deg().unwrap() {
        0 => 0,
        d => ring.field().trace(ring.rem(a, m).coeff(d - 1)),
    }
}

fn check_prime(ring: &PolyRing, w: &Poly, k: u32) -> Result<()> {
    if k == 0 {
        return invalid("exponent k must be at least 1");
    }
    if !w.is_monic() || !ring.is_irreducible(w) {
        return invalid("modulus must be monic irreducible");
    }
    Ok(())
}

/// Ramanujan sum `sum'_{|x|<|w|^k} psi(a x / w^k)` by its closed form.
pub fn ramanujan_sum(ring: &PolyRing, a: &Poly, w: &Poly, k: u32) -> Result<CycNum> {
    check_prime(ring, w, k)?;
    let p = ring.p();
    let qw = rat_pow(ring.q(), w.deg().unwrap() as i64);
    let qpow = |e: u32| num_traits::pow(qw.clone(), e as usize);
    let v = if ring.divides(&ring.pow(w, k as u64), a) {
        qpow(k - 1) * (qw.clone() - BigRational::one())
    } else if ring.divides(&ring.pow(w, k as u64 - 1), a) {
        -qpow(k - 1)
    } else {
        BigRational::zero()
    };
    Ok(CycNum::from_rational(p, v))
}

/// Term-by-term evaluation of [`ramanujan_sum`].
pub fn ramanujan_sum_brute(ring: &PolyRing, a: &Poly, w: &Poly, k: u32) -> Result<CycNum> {
    check_prime(ring, w, k)?;
    let r = ring.pow(w, k as u64);
    let mut hist = vec![0i64; ring.p() as usize];
    for x in ring
        .below_degree(r.deg().unwrap())
        .filter(|x| !ring.divides(w, x))
    {
        hist[psi_frac_monic(ring, &ring.mul(a, &x), &r) as usize] += 1;
    }
    Ok(CycInt::from_histogram(ring.p(), &hist).into())
}

/// `S_r(a,c) = sum_{|x|<|r|} psi((a B x^3 + c x)/r)` with `gcd(a, r) = 1`.
#[doc(alias = "S_r_ac")]
pub fn s_r_ac(ring: &PolyRing, b: &Poly, r: &Poly, a: &Poly, c: &Poly) -> Result<CycNum> {
    if r.is_zero() || !ring.gcd(a, r).is_one() {
        return invalid("S_r(a,c) needs gcd(a, r) = 1");
    }
    Ok(poly_sum(
        ring,
        r,
        &[Poly::zero(), c.clone(), Poly::zero(), ring.mul(a, b)],
    )?
    .into())
}

fn check_modulus(form: &DiagonalForm, r: &Poly, c: &[Poly]) -> Result<()> {
    if !r.is_monic() {
        return invalid("modulus must be monic");
    }
    if c.len() != form.n() {
        return invalid(format!(
            "expected {} frequencies, got {}",
            form.n(),
            c.len()
        ));
    }
    Ok(())
}

/// `S_r(c)` for many frequency vectors at one modulus.
///
/// With `lambda(A)` the trace of the `t^{-1}` digit of `A / r`, the phase of
/// `S_r(a F_i, c_i)` is `sum_j g_j mu_j(x) + lambda(c_i x)`, where
/// `g = a F_i mod r` and `mu_j(x) = lambda(t^j x^3)`. The table `mu` is built
/// once; one-dimensional sums are cached by `(g, c_i mod r)`.
pub struct CentralSums<'a> {
    form: &'a DiagonalForm,
    r: Poly,
    d: usize,
    /// `g = a F_i mod r` for each unit `a` (rows) and coordinate `i`.
    g: Vec<Vec<Poly>>,
    mu: Vec<Vec<Fq>>,
    /// `(lambda(x t^k))_{k<d}` for each `x`.
    shifts: Vec<Vec<Fq>>,
    cache: HashMap<(Poly, Poly), CycInt>,
}

impl<'a> CentralSums<'a> {
    /// Tables for the monic modulus `r`.
    pub fn new(form: &'a DiagonalForm, r: &Poly) -> Result<CentralSums<'a>> {
        if !r.is_monic() {
            return invalid("modulus must be monic");
        }
        let ring = form.ring();
        let ctx = ring.field();
        let d = r.deg().unwrap();
        let h = residue_weights(ctx, r, 2 * d);
        let pad = |a: &Poly| -> Vec<Fq> { (0..d).map(|k| a.coeff(k)).collect() };
        let xs: Vec<Poly> = if d == 0 {
            Vec::new()
        } else {
            ring.below_degree(d).collect()
        };
        let mu = xs
            .iter()
            .map(|x| {
                let cube = pad(&ring.rem(&ring.cube(x), r));
                (0..d).map(|j| dot_shift(ctx, &cube, &h, j)).collect()
            })
            .collect();
        let shifts = xs
            .iter()
            .map(|x| (0..d).map(|k| dot_shift(ctx, x.coeffs(), &h, k)).collect())
            .collect();
        let g = ring
            .units_mod(r)
            .iter()
            .map(|a| {
                form.coeffs()
                    .iter()
                    .map(|f| ring.rem(&ring.mul(a, f), r))
                    .collect()
            })
            .collect();
        Ok(CentralSums {
            form,
            r: r.clone(),
            d,
            g,
            mu,
            shifts,
            cache: HashMap::new(),
        })
    }

    fn one_dim(&mut self, g: &Poly, c: &Poly) -> CycInt {
        let key = (g.clone(), c.clone());
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let ctx = self.form.field();
        let p = ctx.p();
        let v = if self.d == 0 {
            CycInt::one(p)
        } else {
            let gc: Vec<Fq> = (0..self.d).map(|k| g.coeff(k)).collect();
            let cc: Vec<Fq> = (0..self.d).map(|k| c.coeff(k)).collect();
            let mut hist = vec![0i64; p as usize];
            for (m, sh) in self.mu.iter().zip(&self.shifts) {
                let lin = dot_shift(ctx, &cc, sh, 0);
                let v = gc
                    .iter()
                    .zip(m)
                    .fold(lin, |acc, (&gj, &mj)| ctx.add(acc, ctx.mul(gj, mj)));
                hist[ctx.trace(v) as usize] += 1;
            }
            CycInt::from_histogram(p, &hist)
        };
        self.cache.insert(key, v.clone());
        v
    }

    /// `S_r(a F_i, c_i)` for every unit `a` (rows, canonical order) and coordinate `i`.
    pub(crate) fn rows(&mut self, c: &[Poly]) -> Vec<Vec<CycInt>> {
        let ring = self.form.ring().clone();
        let cr: Vec<Poly> = c.iter().map(|x| ring.rem(x, &self.r)).collect();
        (0..self.g.len())
            .map(|a| {
                (0..cr.len())
                    .map(|i| self.one_dim(&self.g[a][i].clone(), &cr[i]))
                    .collect()
            })
            .collect()
    }

    pub(crate) fn eval_int(&mut self, c: &[Poly]) -> CycInt {
        let p = self.form.field().p();
        self.rows(c).iter().fold(CycInt::zero(p), |acc, row| {
            let prod = row.iter().fold(CycInt::one(p), |x, y| &x * y);
            &acc + &prod
        })
    }

    /// `S_r(c)`.
    pub fn eval(&mut self, c: &[Poly]) -> Result<CycNum> {
        check_modulus(self.form, &self.r, c)?;
        Ok(self.eval_int(c).into())
    }
}

/// `S_r(c)` in `Z[zeta_p]`.
pub(crate) fn s_r_c_int(form: &DiagonalForm, r: &Poly, c: &[Poly]) -> CycInt {
    CentralSums::new(form, r)
        .expect("monic modulus")
        .eval_int(c)
}

/// `S_r(c) = sum'_{|a|<|r|} prod_i S_r(a F_i, c_i)` for monic `r`.
#[doc(alias = "S_r_c")]
pub fn s_r_c(form: &DiagonalForm, r: &Poly, c: &[Poly]) -> Result<CycNum> {
    check_modulus(form, r, c)?;
    Ok(s_r_c_int(form, r, c).into())
}

/// `S_r(c)` by direct summation over `a` and all of `(O/r)^n`.
pub fn s_r_c_brute(form: &DiagonalForm, r: &Poly, c: &[Poly]) -> Result<CycNum> {
    check_modulus(form, r, c)?;
    let ring = form.ring();
    let n = form.n();
    let d = r.deg().unwrap();
    let q = ring.q() as u64;
    let per = q.pow(d as u32);
    let mut hist = vec![0i64; ring.p() as usize];
    for a in ring.units_mod(r) {
        for idx in 0..per.pow(n as u32) {
            let mut code = idx;
            let mut x = Vec::with_capacity(n);
            for _ in 0..n {
                x.push(ring.from_index(code % per, d));
                code /= per;
            }
            let lin = x.iter().zip(c).fold(Poly::zero(), |acc, (xi, ci)| {
                ring.add(&acc, &ring.mul(xi, ci))
            });
            let arg = ring.add(&ring.mul(&a, &form.eval(&x)), &lin);
            hist[psi_frac(ring, &arg, r)? as usize] += 1;
        }
    }
    Ok(CycInt::from_histogram(ring.p(), &hist).into())
}

/// `{r, c}` for square-full `r`, as an exact rational.
pub fn bracket(ring: &PolyRing, r: &Poly, c: &Poly) -> Result<BigRational> {
    if r.is_zero() || !ring.is_squarefull(r) {
        return invalid("bracket needs a nonzero square-full modulus");
    }
    let q = ring.q();
    let f = ring.factor(r)?;
    let mut out = BigRational::one();
    for (w, k) in &f.factors {
        let dw = w.deg().unwrap() as i64;
        let exact_once = ring.divides(w, c) && !ring.divides(&ring.mul(w, w), c);
        let s = if *k >= 3 && exact_once {
            rat_pow(q, -dw)
        } else {
            let g = ring.gcd(&ring.pow(w, *k as u64), c);
            rat_pow(q, g.deg().unwrap() as i64)
        };
        out *= s;
    }
    Ok(out)
}

/// Outcome of [`vanishing_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VanishingReport {
    pub sum: CycNum,
    pub sum_is_zero: bool,
    /// Whether `w` divides `F*(c)`.
    pub divides: bool,
}

/// Computes `S_{w^k}(c)` and tests `w | F*(c)`; a nonzero sum with
/// `w` not dividing `F*(c)` is reported as an identity failure.
pub fn vanishing_check(
    form: &DiagonalForm,
    w: &Poly,
    k: u32,
    c: &[Poly],
) -> Result<VanishingReport> {
    if k < 2 {
        return invalid("vanishing_check needs k >= 2");
    }
    let ring = form.ring();
    let r = ring.pow(w, k as u64);
    let sum = s_r_c(form, &r, c)?;
    let dual = dual_eval(form, c)?;
    let divides = ring.divides(w, &dual.value);
    let sum_is_zero = sum.is_zero();
    if !divides && !sum_is_zero {
        return Err(Error::Identity(format!(
            "S_(w^{k})(c) nonzero with w = {} not dividing F*(c)",
            ring.format(w)
        )));
    }
    Ok(VanishingReport {
        sum,
        sum_is_zero,
        divides,
    })
}

/// [`vanishing_check`] for many `c` at once, sharing the tables for `w^k`.
pub fn vanishing_check_many(
    form: &DiagonalForm,
    w: &Poly,
    k: u32,
    cs: &[Vec<Poly>],
) -> Result<Vec<VanishingReport>> {
    if k < 2 {
        return invalid("vanishing_check needs k >= 2");
    }
    let ring = form.ring();
    let r = ring.pow(w, k as u64);
    let mut sums = CentralSums::new(form, &r)?;
    cs.iter()
        .map(|c| {
            let sum = sums.eval(c)?;
            let dual = dual_eval(form, c)?;
            let divides = ring.divides(w, &dual.value);
            let sum_is_zero = sum.is_zero();
            if !divides && !sum_is_zero {
                return Err(Error::Identity(format!(
                    "S_(w^{k})(c) nonzero with w = {} not dividing F*(c)",
                    ring.format(w)
                )));
            }
            Ok(VanishingReport {
                sum,
                sum_is_zero,
                divides,
            })
        })
        .collect()
}

/// Weyl sum `T(alpha) = sum_{|x| < q^B} psi(alpha x^3)`.
pub fn weyl_sum(ctx: &FieldCtx, alpha: &Laurent, b: u32) -> Result<CycNum> {
    if b == 0 {
        return Ok(CycNum::one(ctx.p()));
    }
    let len = 3 * (b as usize - 1) + 1;
    let h = (0..len)
        .map(|k| alpha.digit(-1 - k as i64))
        .collect::<Result<Vec<_>>>()?;
    let g = [Poly::zero(), Poly::zero(), Poly::zero(), Poly::one()];
    Ok(functional_sum(ctx, b as usize, &h, &g).into())
}

fn special_fiber_sums(setup: &SpecialSetup, r: &Poly, j: &[Poly; 2]) -> Vec<[CycInt; 2]> {
    let ring = setup.ring();
    let ctx = ring.field();
    let d = r.deg().unwrap_or(0);
    let h = residue_weights(ctx, r, 4 * d + 1);
    let fibers = [setup.fiber_poly(0, &j[0]), setup.fiber_poly(1, &j[1])];
    ring.units_mod(r)
        .iter()
        .map(|a| {
            let s = |i: usize| {
                let g: Vec<Poly> = fibers[i]
                    .iter()
                    .map(|x| ring.rem(&ring.mul(a, x), r))
                    .collect();
                functional_sum(ctx, d, &h, &g)
            };
            [s(0), s(1)]
        })
        .collect()
}

/// `T_r(j) = sum'_a sum_{|h|<|r|} psi(a F~(j, h) / r)` for monic `r`.
#[doc(alias = "T_r_j")]
pub fn t_r_j(setup: &SpecialSetup, r: &Poly, j: &[Poly; 2]) -> Result<CycNum> {
    if !r.is_monic() {
        return invalid("modulus must be monic");
    }
    let p = setup.ring().p();
    let total = special_fiber_sums(setup, r, j)
        .iter()
        .fold(CycInt::zero(p), |acc, [a, b]| &acc + &(a * b));
    Ok(total.into())
}

/// Closed form of `T_{w^2}(j)` when `w` is prime and divides none of `j_1`,
/// `j_2`, `lambda`, `mu` and the `rho_i`; `None` otherwise.
pub fn t_r_j_closed(setup: &SpecialSetup, w: &Poly, j: &[Poly; 2]) -> Result<Option<CycNum>> {
    let ring = setup.ring();
    check_prime(ring, w, 2)?;
    let guard = [&j[0], &j[1], &setup.lambda, &setup.mu];
    if guard
        .into_iter()
        .chain(setup.rho.iter())
        .any(|x| ring.divides(w, x))
    {
        return Ok(None);
    }
    let f0 = setup.f0(j);
    let qw = rat_pow(ring.q(), w.deg().unwrap() as i64);
    let q3 = num_traits::pow(qw.clone(), 3);
    let v = if !ring.divides(w, &f0) {
        BigRational::zero()
    } else if !ring.divides(&ring.mul(w, w), &f0) {
        -q3
    } else {
        num_traits::pow(qw, 4) - q3
    };
    Ok(Some(CycNum::from_rational(ring.p(), v)))
}

/// One cutoff of [`avg_hasse_weil`]: the normalized partial sum is
/// `a_part + b_part * q^{-1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HasseWeilRow {
    pub z: u32,
    /// `sum_{deg r = z} S_r(c)` over admissible `r`.
    pub degree_sum: CycNum,
    pub a_part: CycNum,
    pub b_part: CycNum,
    pub magnitude: f64,
    /// `Z^^{1/2}` for comparison.
    pub reference: f64,
}

fn cyc_abs_f64(z: &CycNum) -> f64 {
    let (re, im) = z.to_complex(1);
    libm::sqrt(re * re + im * im)
}

/// Partial sums of `S_r(c)/|r|^{(n+1)/2}` over monic `r` coprime to
/// `disc(F) F*(c)`, one row per degree cutoff `0..=z_max`.
pub fn avg_hasse_weil(form: &DiagonalForm, c: &[Poly], z_max: u32) -> Result<Vec<HasseWeilRow>> {
    let n = form.n();
    if n % 2 != 0 {
        return invalid("avg_hasse_weil needs n even");
    }
    let ring = form.ring();
    let dual = dual_eval(form, c)?;
    if dual.value.is_zero() {
        return invalid("avg_hasse_weil needs F*(c) != 0");
    }
    let bad = ring.mul(&form.disc(), &dual.value);
    let p = ring.p();
    let q = ring.q();
    let mut a_part = CycNum::zero(p);
    let mut b_part = CycNum::zero(p);
    let mut rows = Vec::new();
    for z in 0..=z_max {
        let mut degree_sum = CycNum::zero(p);
        for r in ring.monic_enum(z as usize) {
            if ring.gcd(&r, &bad).is_one() {
                degree_sum = &degree_sum + &s_r_c(form, &r, c)?;
            }
        }
        let e = z as i64 * (n as i64 + 1);
        if e % 2 == 0 {
            a_part = &a_part + &degree_sum.scale(&rat_pow(q, -e / 2));
        } else {
            b_part = &b_part + &degree_sum.scale(&rat_pow(q, -(e - 1) / 2));
        }
        let (ar, ai) = a_part.to_complex(1);
        let (br, bi) = b_part.to_complex(1);
        let s = 1.0 / libm::sqrt(q as f64);
        let magnitude = libm::sqrt((ar + s * br) * (ar + s * br) + (ai + s * bi) * (ai + s * bi));
        let reference = libm::pow(q as f64, z as f64 / 2.0);
        rows.push(HasseWeilRow {
            z,
            degree_sum,
            a_part: a_part.clone(),
            b_part: b_part.clone(),
            magnitude,
            reference,
        });
    }
    Ok(rows)
}

/// Result of [`avg_squarefull`].
#[derive(Clone, Debug, PartialEq)]
pub struct SquarefullReport {
    /// `sum |S_r(c)|^2`, exact when every term is.
    pub sum_abs_sq: BigRational,
    pub all_exact: bool,
    /// `sum |S_r(c)|` in one complex embedding.
    pub sum_abs: f64,
    /// `#R(C)`, counting every `c` of the prescribed shape.
    pub family_size: u64,
    pub bound: f64,
    pub ratio: f64,
}

fn exact_degree_polys(ring: &PolyRing, deg: u32) -> Vec<Poly> {
    ring.below_degree(deg as usize + 1)
        .filter(|x| x.deg() == Some(deg as usize))
        .collect()
}

/// `A(R(C), Y^) = sum_{c in R(C), F*(c) != 0} sum_{r monic square-full, deg r = Y} |S_r(c)|`.
pub fn avg_squarefull(
    form: &DiagonalForm,
    indices: &[usize],
    degs: &[u32],
    y: u32,
) -> Result<SquarefullReport> {
    let n = form.n();
    if indices.len() != degs.len() || indices.iter().any(|&i| i >= n) {
        return invalid("index set and degree list must match and be in range");
    }
    let ring = form.ring();
    let moduli: Vec<Poly> = ring
        .monic_enum(y as usize)
        .filter(|r| ring.is_squarefull(r))
        .collect();
    let choices: Vec<Vec<Poly>> = degs.iter().map(|&d| exact_degree_polys(ring, d)).collect();
    let family_size: u64 = choices.iter().map(|v| v.len() as u64).product();
    let mut sum_abs_sq = BigRational::zero();
    let mut all_exact = true;
    let mut sum_abs = 0.0;
    let mut idx = vec![0usize; choices.len()];
    'outer: loop {
        if !choices.iter().any(|v| v.is_empty()) {
            let mut c = vec![Poly::zero(); n];
            for (k, &i) in indices.iter().enumerate() {
                c[i] = choices[k][idx[k]].clone();
            }
            if !dual_eval(form, &c)?.value.is_zero() {
                for r in &moduli {
                    let s = s_r_c(form, r, &c)?;
                    let a = cyc_abs_sq(&s);
                    all_exact &= a.exact;
                    sum_abs_sq += a.value;
                    sum_abs += cyc_abs_f64(&s);
                }
            }
        } else {
            break;
        }
        for k in 0..idx.len() {
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    let t = indices.len() as f64;
    let nf = n as f64;
    let yhat = libm::pow(ring.q() as f64, y as f64);
    let bound = libm::pow(yhat, 1.0 + nf / 2.0 + (nf - t) / 6.0) * family_size as f64;
    let ratio = if bound > 0.0 { sum_abs / bound } else { 0.0 };
    Ok(SquarefullReport {
        sum_abs_sq,
        all_exact,
        sum_abs,
        family_size,
        bound,
        ratio,
    })
}

/// A family of sums audited against a published bound with constant 1.
#[derive(Clone, Debug)]
pub enum AuditFamily {
    /// 1-D `S_{w^k}(a, c)` with `B = 1` against `|w|^{2k/3}`.
    Hua { max_deg: usize, max_k: u32 },
    /// 1-D `S_{w^k}(a, c)`, `k >= 2`, against `|w|^{k/2} {w^k, c}^{1/4}`.
    PrimePower { max_deg: usize, max_k: u32 },
    /// `S_w(c)` against `|w|^{(n+1)/2} |(w, grad F*(c))|^{1/2}`.
    Deligne {
        form: DiagonalForm,
        deg: usize,
        samples: usize,
        seed: u64,
    },
    /// `S_{w^2}(c)` against `|w|^{2+n}`.
    SquareModulus { form: DiagonalForm, deg: usize },
}

/// One audited sum. For 1-D families the row is the maximum over `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditRow {
    pub family: &'static str,
    pub q: u32,
    pub n: usize,
    pub r: String,
    pub c: String,
    pub abs_sq: AbsSq,
    pub bound_sq: f64,
    pub ratio: f64,
}

impl AuditRow {
    pub const CSV_HEADER: &'static str = "family,q,n,r,c,|S|^2,bound^2,ratio";

    pub fn csv_line(&self) -> String {
        let flag = if self.abs_sq.exact { "" } else { "<=" };
        format!(
            "{},{},{},{},{},{}{},{:.6},{:.6}",
            self.family,
            self.q,
            self.n,
            self.r,
            self.c,
            flag,
            self.abs_sq.value,
            self.bound_sq,
            self.ratio
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    pub max_ratio: f64,
}

fn rat_f64(x: &BigRational) -> f64 {
    let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
    let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
    n / d
}

fn ratio_of(a: &AbsSq, bound_sq: f64) -> f64 {
    libm::sqrt(rat_f64(&a.value) / bound_sq)
}

fn max_abs_sq(vals: impl Iterator<Item = CycNum>) -> AbsSq {
    let mut best = AbsSq {
        value: BigRational::zero(),
        exact: true,
    };
    for v in vals {
        let a = cyc_abs_sq(&v);
        if a.value > best.value || (a.value == best.value && !a.exact) {
            best = a;
        }
    }
    best
}

fn format_vec(ring: &PolyRing, c: &[Poly]) -> String {
    let parts: Vec<String> = c.iter().map(|x| ring.format(x)).collect();
    format!("({})", parts.join(";"))
}

/// Runs an audit family; the report is the deliverable and nothing is asserted.
pub fn audit_bounds(ring: &PolyRing, family: &AuditFamily) -> Result<AuditReport> {
    let q = ring.q();
    let mut rows = Vec::new();
    match family {
        AuditFamily::Hua { max_deg, max_k } | AuditFamily::PrimePower { max_deg, max_k } => {
            let hua = matches!(family, AuditFamily::Hua { .. });
            for dw in 1..=*max_deg {
                for w in ring.irreducible_enum(dw).collect::<Vec<_>>() {
                    let kmin = if hua { 1 } else { 2 };
                    for k in kmin..=*max_k {
                        let r = ring.pow(&w, k as u64);
                        let units = ring.units_mod(&r);
                        for c in ring.below_degree(r.deg().unwrap()) {
                            let best =
                                max_abs_sq(units.iter().map(|a| {
                                    s_r_ac(ring, &Poly::one(), &r, a, &c).expect("unit a")
                                }));
                            let wq = libm::pow(q as f64, dw as f64);
                            let bound_sq = if hua {
                                libm::pow(wq, 4.0 * k as f64 / 3.0)
                            } else {
                                let br = bracket(ring, &r, &c)?;
                                libm::pow(wq, k as f64) * libm::sqrt(rat_f64(&br))
                            };
                            let ratio = ratio_of(&best, bound_sq);
                            rows.push(AuditRow {
                                family: if hua { "hua" } else { "prime-power" },
                                q,
                                n: 1,
                                r: ring.format(&r),
                                c: ring.format(&c),
                                abs_sq: best,
                                bound_sq,
                                ratio,
                            });
                        }
                    }
                }
            }
        }
        AuditFamily::Deligne {
            form,
            deg,
            samples,
            seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let n = form.n();
            let moduli: Vec<Poly> = ring.irreducible_enum(*deg).collect();
            let span = (q as u64).pow(*deg as u32 + 1);
            for _ in 0..*samples {
                let w = &moduli[(rng.next_u64() % moduli.len() as u64) as usize];
                let c: Vec<Poly> = (0..n)
                    .map(|_| ring.from_index(rng.next_u64() % span, *deg + 1))
                    .collect();
                let s = s_r_c(form, w, &c)?;
                let a = cyc_abs_sq(&s);
                let divides = ring.divides(w, &dual_eval(form, &c)?.value);
                // without the gradient of F*, take the worst case |w| when w | F*(c)
                let wq = libm::pow(q as f64, *deg as f64);
                let bound_sq = libm::pow(wq, n as f64 + 1.0) * if divides { wq } else { 1.0 };
                let ratio = ratio_of(&a, bound_sq);
                rows.push(AuditRow {
                    family: "deligne",
                    q,
                    n,
                    r: ring.format(w),
                    c: format_vec(ring, &c),
                    abs_sq: a,
                    bound_sq,
                    ratio,
                });
            }
        }
        AuditFamily::SquareModulus { form, deg } => {
            let n = form.n();
            for w in ring.irreducible_enum(*deg).collect::<Vec<_>>() {
                let r = ring.mul(&w, &w);
                let len = r.deg().unwrap();
                let per = (q as u64).pow(len as u32);
                for idx in 0..per.pow(n as u32) {
                    let mut code = idx;
                    let c: Vec<Poly> = (0..n)
                        .map(|_| {
                            let x = ring.from_index(code % per, len);
                            code /= per;
                            x
                        })
                        .collect();
                    let a = cyc_abs_sq(&s_r_c(form, &r, &c)?);
                    let wq = libm::pow(q as f64, *deg as f64);
                    let bound_sq = libm::pow(wq, 2.0 * (2.0 + n as f64));
                    let ratio = ratio_of(&a, bound_sq);
                    rows.push(AuditRow {
                        family: "square-modulus",
                        q,
                        n,
                        r: ring.format(&r),
                        c: format_vec(ring, &c),
                        abs_sq: a,
                        bound_sq,
                        ratio,
                    });
                }
            }
        }
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(AuditReport { rows, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(q: u32) -> PolyRing {
        PolyRing::new(FieldCtx::with_q_unrestricted(q).unwrap())
    }

    fn int(p: u32, n: i64) -> CycNum {
        CycNum::from_int(p, n)
    }

    #[test]
    fn linear_sums() {
        let r2 = ring(2);
        let t = Poly::t();
        assert_eq!(linear_full_sum(&r2, &t, &t).unwrap(), int(2, 2));
        assert_eq!(linear_full_sum(&r2, &Poly::one(), &t).unwrap(), int(2, 0));
        assert_eq!(
            linear_full_sum(&r2, &Poly::zero(), &Poly::one()).unwrap(),
            int(2, 1)
        );
        assert!(linear_full_sum(&r2, &t, &Poly::zero()).is_err());
        for r in r2.monic_up_to(3).collect::<Vec<_>>() {
            for a in r2.below_degree(4) {
                assert_eq!(
                    linear_full_sum(&r2, &a, &r).unwrap(),
                    linear_full_sum_brute(&r2, &a, &r).unwrap()
                );
            }
        }
    }

    #[test]
    fn ramanujan_examples() {
        let r2 = ring(2);
        let t = Poly::t();
        assert_eq!(ramanujan_sum(&r2, &Poly::one(), &t, 1).unwrap(), int(2, -1));
        assert_eq!(ramanujan_sum(&r2, &t, &t, 1).unwrap(), int(2, 1));
        assert_eq!(ramanujan_sum(&r2, &Poly::one(), &t, 2).unwrap(), int(2, 0));
        assert!(ramanujan_sum(&r2, &Poly::one(), &r2.parse("t^2").unwrap(), 1).is_err());
        for q in [2u32, 3, 5] {
            let rg = ring(q);
            for w in rg
                .monic_up_to(2)
                .filter(|w| rg.is_irreducible(w))
                .collect::<Vec<_>>()
            {
                for k in 1..=2u32 {
                    for a in rg.below_degree(2 * k as usize + 1).step_by(7) {
                        assert_eq!(
                            ramanujan_sum(&rg, &a, &w, k).unwrap(),
                            ramanujan_sum_brute(&rg, &a, &w, k).unwrap()
                        );
                    }
                }
            }
        }
        assert!(DiagonalForm::parse(ring(3), "1,1").is_err());
    }

    #[test]
    fn one_dimensional_examples() {
        let r2 = ring(2);
        let t = Poly::t();
        let one = Poly::one();
        assert_eq!(
            s_r_ac(&r2, &one, &one, &one, &Poly::zero()).unwrap(),
            int(2, 1)
        );
        assert_eq!(
            s_r_ac(&r2, &one, &t, &one, &Poly::zero()).unwrap(),
            int(2, 0)
        );
        assert_eq!(s_r_ac(&r2, &one, &t, &one, &one).unwrap(), int(2, 2));
        assert!(s_r_ac(&r2, &one, &t, &t, &one).is_err());
    }

    #[test]
    fn central_sum_examples() {
        let r2 = ring(2);
        let f = DiagonalForm::parse(r2.clone(), "1,1").unwrap();
        let z = vec![Poly::zero(), Poly::zero()];
        assert_eq!(s_r_c(&f, &Poly::one(), &z).unwrap(), int(2, 1));
        assert_eq!(s_r_c(&f, &Poly::t(), &z).unwrap(), int(2, 0));
        let r1 = Poly::t();
        let r2p = r2.parse("t+1").unwrap();
        let c = vec![Poly::one(), Poly::t()];
        let lhs = s_r_c(&f, &r2.mul(&r1, &r2p), &c).unwrap();
        let rhs = &s_r_c(&f, &r1, &c).unwrap() * &s_r_c(&f, &r2p, &c).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn product_form_matches_brute_force() {
        for (q, fs) in [(2u32, "1,t,1,t+1"), (5, "1,t+2")] {
            let rg = ring(q);
            let f = DiagonalForm::parse(rg.clone(), fs).unwrap();
            for r in rg.monic_up_to(2).collect::<Vec<_>>() {
                for c0 in rg.below_degree(2).step_by(3).take(4).collect::<Vec<_>>() {
                    let c: Vec<Poly> = (0..f.n())
                        .map(|i| rg.add(&c0, &rg.from_index(i as u64, 2)))
                        .collect();
                    assert_eq!(s_r_c(&f, &r, &c).unwrap(), s_r_c_brute(&f, &r, &c).unwrap());
                }
            }
        }
    }

    #[test]
    fn weyl_examples() {
        let ctx = FieldCtx::with_q(2).unwrap();
        assert_eq!(weyl_sum(&ctx, &Laurent::zero(), 3).unwrap(), int(2, 8));
        assert_eq!(weyl_sum(&ctx, &Laurent::zero(), 0).unwrap(), int(2, 1));
        let a = Laurent::monomial(Fq::ONE, -4);
        assert_eq!(weyl_sum(&ctx, &a, 1).unwrap(), int(2, 2));
        let coarse = Laurent::with_floor(-2, vec![]);
        assert!(weyl_sum(&ctx, &coarse, 2).is_err());
    }

    #[test]
    fn bracket_examples() {
        let rg = ring(2);
        let w = rg.parse("t^2+t+1").unwrap();
        let w2 = rg.mul(&w, &w);
        let w3 = rg.mul(&w2, &w);
        assert_eq!(bracket(&rg, &w2, &Poly::one()).unwrap(), BigRational::one());
        assert_eq!(
            bracket(&rg, &w3, &rg.mul(&w, &Poly::t())).unwrap(),
            rat_pow(2, -2)
        );
        assert_eq!(bracket(&rg, &w2, &w2).unwrap(), rat_pow(2, 4));
        assert!(bracket(&rg, &w, &Poly::one()).is_err());
    }
}
