//! The dual form `F*`, special solutions and the lines on `F = 0`.
//!
//! In characteristic 2, `F*(c) = sum_i (prod_{j != i} F_j) c_i^3`. Otherwise
//! `F*(c)` is the product of `sum_k +-sqrt(u_k)` over sign patterns with the
//! first sign fixed, where `u_k = (prod_{j != k} F_j) c_k^3`. That product is
//! a polynomial in the `u_k`; we compute it in closed form for `n <= 4` and in
//! general as the square root of `Q_n(0)`, where
//! `Q_k(z) = Res_w(Q_{k-1}(w), (z - w)^2 - u_k)` and `Q_0(z) = z`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::expsums::DiagonalForm;
use crate::fields::Fq;
use crate::multipoly::MPoly;
use crate::poly::{Poly, PolyRing};

/// How a [`DualEval`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualMethod {
    Char2ClosedForm,
    /// Explicit polynomial in the `u_k` (`n <= 4`).
    ClosedForm,
    ResultantSqrt,
}

/// `F*(c)` up to sign: the sign is fixed by taking the smaller of the two
/// leading coefficients in the canonical order of `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualEval {
    pub value: Poly,
    pub method: DualMethod,
}

fn normalize_sign(ring: &PolyRing, v: Poly) -> Poly {
    if v.is_zero() {
        return v;
    }
    let neg = ring.field().neg(v.lc());
    if neg < v.lc() {
        ring.neg(&v)
    } else {
        v
    }
}

fn check_c(form: &DiagonalForm, c: &[Poly]) -> Result<()> {
    if c.len() != form.n() {
        return invalid(format!(
            "expected {} frequencies, got {}",
            form.n(),
            c.len()
        ));
    }
    Ok(())
}

/// `u_k = (prod_{j != k} F_j) c_k^3`.
pub fn dual_weights(form: &DiagonalForm, c: &[Poly]) -> Vec<Poly> {
    let ring = form.ring();
    let f = form.coeffs();
    (0..form.n())
        .map(|k| {
            let others = (0..form.n())
                .filter(|&j| j != k)
                .fold(Poly::one(), |acc, j| ring.mul(&acc, &f[j]));
            ring.mul(&others, &ring.cube(&c[k]))
        })
        .collect()
}

/// Evaluates `F*(c)`.
pub fn dual_eval(form: &DiagonalForm, c: &[Poly]) -> Result<DualEval> {
    check_c(form, c)?;
    let ring = form.ring();
    let u = dual_weights(form, c);
    if ring.p() == 2 {
        let v = u.iter().fold(Poly::zero(), |acc, x| ring.add(&acc, x));
        return Ok(DualEval {
            value: v,
            method: DualMethod::Char2ClosedForm,
        });
    }
    if form.n() <= 4 {
        let v = closed_form(ring, &u);
        return Ok(DualEval {
            value: normalize_sign(ring, v),
            method: DualMethod::ClosedForm,
        });
    }
    dual_eval_chain(form, c)
}

fn closed_form(ring: &PolyRing, u: &[Poly]) -> Poly {
    let m = |a: &Poly, b: &Poly| ring.mul(a, b);
    let k = |n: i64, a: &Poly| ring.mul(&ring.from_int(n), a);
    match u {
        [a, b] => ring.sub(a, b),
        [a, b, c] => {
            let sq = ring.add(&ring.add(&m(a, a), &m(b, b)), &m(c, c));
            let e2 = ring.add(&ring.add(&m(a, b), &m(a, c)), &m(b, c));
            ring.sub(&sq, &k(2, &e2))
        }
        [a, b, c, d] => {
            let sq = [a, b, c, d]
                .iter()
                .fold(Poly::zero(), |acc, x| ring.add(&acc, &m(x, x)));
            let mut e2 = Poly::zero();
            for i in 0..4 {
                for j in i + 1..4 {
                    e2 = ring.add(&e2, &m(&u[i], &u[j]));
                }
            }
            let s = ring.sub(&sq, &k(2, &e2));
            let abcd = m(&m(a, b), &m(c, d));
            ring.sub(&m(&s, &s), &k(64, &abcd))
        }
        _ => unreachable!("closed form only for n in 2..=4"),
    }
}

/// Binomial coefficients mod `p` up to row `n`.
fn binomials(ring: &PolyRing, n: usize) -> Vec<Vec<Fq>> {
    let ctx = ring.field();
    let mut rows = vec![vec![Fq::ONE]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![Fq::ONE; i + 1];
        for m in 1..i {
            row[m] = ctx.add(prev[m - 1], prev[m]);
        }
        rows.push(row);
    }
    rows
}

/// One step of the chain: with `Q(z + s) = E(z) + s O(z)` and `s^2 = u`,
/// returns `E^2 - u O^2`. Polynomials in `z` are coefficient vectors over `O`.
fn chain_step(ring: &PolyRing, q: &[Poly], u: &Poly) -> Vec<Poly> {
    let deg = q.len() - 1;
    let binom = binomials(ring, deg);
    let mut upow = vec![Poly::one()];
    for _ in 0..deg {
        let next = ring.mul(upow.last().unwrap(), u);
        upow.push(next);
    }
    let mut even = vec![Poly::zero(); deg + 1];
    let mut odd = vec![Poly::zero(); deg + 1];
    for (i, a) in q.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for m in 0..=i {
            let coef = ring.scale(binom[i][m], a);
            let term = ring.mul(&coef, &upow[m / 2]);
            let slot = if m % 2 == 0 {
                &mut even[i - m]
            } else {
                &mut odd[i - m]
            };
            *slot = ring.add(slot, &term);
        }
    }
    let sq = |v: &[Poly]| {
        let mut out = vec![Poly::zero(); 2 * deg + 1];
        for (i, a) in v.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                out[i + j] = ring.add(&out[i + j], &ring.mul(a, b));
            }
        }
        out
    };
    let e2 = sq(&even);
    let o2 = sq(&odd);
    let mut out: Vec<Poly> = e2
        .iter()
        .zip(&o2)
        .map(|(a, b)| ring.sub(a, &ring.mul(u, b)))
        .collect();
    while out.len() > 1 && out.last().is_some_and(Poly::is_zero) {
        out.pop();
    }
    out
}

/// The chain polynomials `Q_0, ..., Q_n` as coefficient vectors in `z`.
pub fn resultant_chain(form: &DiagonalForm, c: &[Poly]) -> Result<Vec<Vec<Poly>>> {
    check_c(form, c)?;
    let ring = form.ring();
    if ring.p() == 2 {
        return Err(Error::Unsupported(
            "the resultant chain needs odd characteristic".into(),
        ));
    }
    let u = dual_weights(form, c);
    let mut chain = vec![vec![Poly::zero(), Poly::one()]];
    for uk in &u {
        let next = chain_step(ring, chain.last().unwrap(), uk);
        chain.push(next);
    }
    Ok(chain)
}

/// `F*(c)` as the square root of `Q_n(0)`.
pub fn dual_eval_chain(form: &DiagonalForm, c: &[Poly]) -> Result<DualEval> {
    let ring = form.ring();
    let chain = resultant_chain(form, c)?;
    let q0 = chain.last().unwrap()[0].clone();
    let root = ring
        .sqrt(&q0)
        .ok_or_else(|| Error::Identity("Q_n(0) is not a square in O".into()))?;
    Ok(DualEval {
        value: normalize_sign(ring, root),
        method: DualMethod::ResultantSqrt,
    })
}

/// `F*(c)` by expanding the product over half the sign patterns with formal
/// square roots `s_k`, `s_k^2 = u_k`. Used as an oracle.
pub fn dual_eval_expand(form: &DiagonalForm, c: &[Poly]) -> Result<Poly> {
    check_c(form, c)?;
    let ring = form.ring();
    let n = form.n();
    let u = dual_weights(form, c);
    let mut prod = MPoly::constant(n, Poly::one());
    for mask in 0..(1u32 << (n - 1)) {
        let mut factor = MPoly::var(n, 0);
        for k in 1..n {
            let v = MPoly::var(n, k);
            factor = if mask >> (k - 1) & 1 == 1 {
                factor.sub(ring, &v)
            } else {
                factor.add(ring, &v)
            };
        }
        prod = prod.mul(ring, &factor).reduce_squares(ring, &u);
    }
    let v = prod.as_constant().ok_or_else(|| {
        Error::Identity("sign-pattern product is not free of square roots".into())
    })?;
    Ok(normalize_sign(ring, v))
}

fn eval_z(ring: &PolyRing, q: &[Poly], z: &Poly) -> Poly {
    q.iter()
        .rev()
        .fold(Poly::zero(), |acc, a| ring.add(&ring.mul(&acc, z), a))
}

/// Determinant over `O` by fraction-free (Bareiss) elimination.
fn bareiss_det(ring: &PolyRing, mut m: Vec<Vec<Poly>>) -> Result<Poly> {
    let n = m.len();
    let mut sign = false;
    let mut prev = Poly::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(s) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return Ok(Poly::zero());
            };
            m.swap(k, s);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = ring.sub(&ring.mul(&m[i][j], &m[k][k]), &ring.mul(&m[i][k], &m[k][j]));
                m[i][j] = ring.div_exact(&v, &prev)?;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    Ok(if sign { ring.neg(&d) } else { d })
}

/// `Res_w(a(w), b(w))` by the Sylvester determinant; coefficient vectors.
pub fn sylvester_resultant(ring: &PolyRing, a: &[Poly], b: &[Poly]) -> Result<Poly> {
    let (m, n) = (a.len() - 1, b.len() - 1);
    let size = m + n;
    if size == 0 {
        return Ok(Poly::one());
    }
    let mut rows = vec![vec![Poly::zero(); size]; size];
    for i in 0..n {
        for (k, x) in a.iter().rev().enumerate() {
            rows[i][i + k] = x.clone();
        }
    }
    for i in 0..m {
        for (k, x) in b.iter().rev().enumerate() {
            rows[n + i][i + k] = x.clone();
        }
    }
    bareiss_det(ring, rows)
}

/// Checks every chain step at `z = z0` against a Sylvester resultant.
pub fn check_chain_sylvester(form: &DiagonalForm, c: &[Poly], z0: &Poly) -> Result<()> {
    let ring = form.ring();
    let chain = resultant_chain(form, c)?;
    let u = dual_weights(form, c);
    for k in 1..chain.len() {
        // (z0 - w)^2 - u as a polynomial in w
        let b = vec![
            ring.sub(&ring.mul(z0, z0), &u[k - 1]),
            ring.neg(&ring.add(z0, z0)),
            Poly::one(),
        ];
        let res = sylvester_resultant(ring, &chain[k - 1], &b)?;
        if res != eval_z(ring, &chain[k], z0) {
            return Err(Error::Identity(format!(
                "chain step {k} disagrees with the Sylvester resultant"
            )));
        }
    }
    Ok(())
}

/// Class of a frequency vector for `n = 4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Nonzero,
    Special,
    Ordinary,
}

/// The three ways of splitting `{0,1,2,3}` into two pairs.
pub const PAIRINGS: [[(usize, usize); 2]; 3] =
    [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];

/// The pairing identities `F_j c_i^3 = F_i c_j^3`, `F_l c_k^3 = F_k c_l^3`
/// for some pairing, with every `c_i` nonzero.
pub fn is_special_shape(form: &DiagonalForm, c: &[Poly]) -> bool {
    let ring = form.ring();
    let f = form.coeffs();
    if form.n() != 4 || c.iter().any(Poly::is_zero) {
        return false;
    }
    let balanced = |i: usize, j: usize| {
        ring.mul(&f[j], &ring.cube(&c[i])) == ring.mul(&f[i], &ring.cube(&c[j]))
    };
    PAIRINGS
        .iter()
        .any(|[(i, j), (k, l)]| balanced(*i, *j) && balanced(*k, *l))
}

/// Classifies `c` as a nonzero of `F*`, a special zero or an ordinary zero.
pub fn classify_solution(form: &DiagonalForm, c: &[Poly]) -> Result<Classification> {
    if form.n() != 4 {
        return invalid("classification is defined for n = 4");
    }
    if !dual_eval(form, c)?.value.is_zero() {
        return Ok(Classification::Nonzero);
    }
    Ok(if is_special_shape(form, c) {
        Classification::Special
    } else {
        Classification::Ordinary
    })
}

/// Counts of nonzero dual zeros in a box.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DualCount {
    pub ordinary: u64,
    pub special: u64,
    pub total: u64,
}

impl DualCount {
    pub fn merge(self, o: DualCount) -> DualCount {
        DualCount {
            ordinary: self.ordinary + o.ordinary,
            special: self.special + o.special,
            total: self.total + o.total,
        }
    }
}

/// Number of vectors in the box `deg c_i <= C`.
pub fn dual_box_size(form: &DiagonalForm, c_deg: u32) -> u64 {
    (form.ring().q() as u64).pow((c_deg + 1) * form.n() as u32)
}

/// The `idx`-th vector of the box `deg c_i <= C` (coordinate 0 least significant).
pub fn dual_box_vector(form: &DiagonalForm, c_deg: u32, idx: u64) -> Vec<Poly> {
    let ring = form.ring();
    let len = c_deg as usize + 1;
    let per = (ring.q() as u64).pow(len as u32);
    let mut code = idx;
    (0..form.n())
        .map(|_| {
            let x = ring.from_index(code % per, len);
            code /= per;
            x
        })
        .collect()
}

/// [`dual_count`] restricted to box indices in `range`.
pub fn dual_count_range(
    form: &DiagonalForm,
    c_deg: u32,
    range: core::ops::Range<u64>,
) -> Result<DualCount> {
    let mut out = DualCount::default();
    for idx in range {
        if idx == 0 {
            continue;
        }
        let c = dual_box_vector(form, c_deg, idx);
        if !dual_eval(form, &c)?.value.is_zero() {
            continue;
        }
        out.total += 1;
        if form.n() == 4 {
            if is_special_shape(form, &c) {
                out.special += 1;
            } else {
                out.ordinary += 1;
            }
        } else {
            out.ordinary += 1;
        }
    }
    Ok(out)
}

/// Counts nonzero `c` with `deg c_i <= C` and `F*(c) = 0`, by class. For
/// `n != 4` every zero is counted as ordinary.
pub fn dual_count(form: &DiagonalForm, c_deg: u32) -> Result<DualCount> {
    dual_count_range(form, c_deg, 0..dual_box_size(form, c_deg))
}

/// One choice of `rho` for the special-solution transform of `n = 4`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecialSetup {
    ring: PolyRing,
    pub rho: [Poly; 4],
    pub rho_p: [Poly; 4],
    pub lambda: Poly,
    pub mu: Poly,
}

impl SpecialSetup {
    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    fn quarter(&self) -> Fq {
        let ctx = self.ring.field();
        ctx.inv(ctx.from_int(4)).expect("odd characteristic")
    }

    /// `rho_a rho_b' + rho_a' rho_b` for the pair `i` (0 or 1).
    fn cross(&self, i: usize) -> Poly {
        let r = &self.ring;
        let (a, b) = (2 * i, 2 * i + 1);
        r.add(
            &r.mul(&self.rho[a], &self.rho_p[b]),
            &r.mul(&self.rho_p[a], &self.rho[b]),
        )
    }

    fn scale_of(&self, i: usize) -> &Poly {
        if i == 0 {
            &self.lambda
        } else {
            &self.mu
        }
    }

    /// Coefficients in `z` of `y Q_i(y, z)`, lowest first.
    pub fn fiber_poly(&self, i: usize, y: &Poly) -> [Poly; 3] {
        let r = &self.ring;
        let ctx = r.field();
        let l = self.scale_of(i);
        let s = self.cross(i);
        let rr = r.mul(&self.rho[2 * i], &self.rho[2 * i + 1]);
        let y2 = r.mul(y, y);
        let three = r.from_int(3);
        let c0 = r.scale(
            self.quarter(),
            &r.mul(l, &r.add(&Poly::one(), &r.mul(&three, &r.mul(&s, &s)))),
        );
        let c0 = r.mul(&c0, &r.mul(&y2, y));
        let c1 = r.scale(ctx.from_int(-3), &r.mul(&r.mul(l, &rr), &r.mul(&s, &y2)));
        let c2 = r.mul(&r.mul(&three, l), &r.mul(&r.mul(&rr, &rr), y));
        [c0, c1, c2]
    }

    /// `F_0(j) = lambda j_1^3 + mu j_2^3`.
    pub fn f0(&self, j: &[Poly; 2]) -> Poly {
        let r = &self.ring;
        r.add(
            &r.mul(&self.lambda, &r.cube(&j[0])),
            &r.mul(&self.mu, &r.cube(&j[1])),
        )
    }

    /// `F~(y, z) = y_1 Q_1(y_1, z_1) + y_2 Q_2(y_2, z_2)`.
    pub fn ftilde(&self, y: &[Poly; 2], z: &[Poly; 2]) -> Poly {
        let r = &self.ring;
        (0..2).fold(Poly::zero(), |acc, i| {
            let f = self.fiber_poly(i, &y[i]);
            let v = r.add(
                &r.add(&f[0], &r.mul(&f[1], &z[i])),
                &r.mul(&f[2], &r.mul(&z[i], &z[i])),
            );
            r.add(&acc, &v)
        })
    }

    /// The matrix `x = M (y_1, z_1, y_2, z_2)`, as rows.
    pub fn inverse_matrix(&self) -> [[Poly; 4]; 4] {
        let r = &self.ring;
        let z = Poly::zero;
        let [p1, p2, p3, p4] = &self.rho;
        let [q1, q2, q3, q4] = &self.rho_p;
        [
            [q2.clone(), r.neg(p2), z(), z()],
            [r.neg(q1), p1.clone(), z(), z()],
            [z(), z(), q4.clone(), r.neg(p4)],
            [z(), z(), r.neg(q3), p3.clone()],
        ]
    }

    /// `c(d) = (rho_1 d_1, rho_2 d_1, rho_3 d_2, rho_4 d_2)`.
    pub fn c_of(&self, d: &[Poly; 2]) -> Vec<Poly> {
        let r = &self.ring;
        (0..4).map(|i| r.mul(&self.rho[i], &d[i / 2])).collect()
    }

    fn verify(&self, form: &DiagonalForm) -> Result<()> {
        let r = &self.ring;
        for i in 0..2 {
            let det = r.sub(
                &r.mul(&self.rho[2 * i], &self.rho_p[2 * i + 1]),
                &r.mul(&self.rho[2 * i + 1], &self.rho_p[2 * i]),
            );
            if !det.is_one() {
                return Err(Error::Identity(
                    "Bezout complement does not give determinant 1".into(),
                ));
            }
        }
        for k in 0..4 {
            let l = if k < 2 { &self.lambda } else { &self.mu };
            if r.mul(l, &r.cube(&self.rho[k])) != form.coeffs()[k] {
                return Err(Error::Identity(format!("F_{} != scale * rho^3", k + 1)));
            }
        }
        // symbolic check of F(x(y, z)) = F~(y, z) in variables (y1, z1, y2, z2)
        let m = self.inverse_matrix();
        let vars: Vec<MPoly> = (0..4).map(|i| MPoly::var(4, i)).collect();
        let mut lhs = MPoly::zero(4);
        for (k, row) in m.iter().enumerate() {
            let xk = vars
                .iter()
                .zip(row)
                .fold(MPoly::zero(4), |acc, (v, mk)| acc.add(r, &v.scale(r, mk)));
            lhs = lhs.add(r, &xk.pow(r, 3).scale(r, &form.coeffs()[k]));
        }
        let mut rhs = MPoly::zero(4);
        for i in 0..2 {
            let y = &vars[2 * i];
            let z = &vars[2 * i + 1];
            let l = self.scale_of(i);
            let s = self.cross(i);
            let rr = r.mul(&self.rho[2 * i], &self.rho[2 * i + 1]);
            let inner = z
                .scale(r, &r.mul(&r.from_int(2), &rr))
                .sub(r, &y.scale(r, &s));
            let q = y
                .mul(r, y)
                .add(r, &inner.mul(r, &inner).scale(r, &r.from_int(3)));
            let q = q.scale(r, &r.scale(self.quarter(), l));
            rhs = rhs.add(r, &y.mul(r, &q));
        }
        if lhs != rhs {
            return Err(Error::Identity("F(x(y,z)) differs from F~(y,z)".into()));
        }
        Ok(())
    }
}

/// All choices of `rho` with `F_1 = lambda rho_1^3`, `F_2 = lambda rho_2^3`,
/// `F_3 = mu rho_3^3`, `F_4 = mu rho_4^3`; empty when a ratio is not a cube.
pub fn special_param(form: &DiagonalForm) -> Result<Vec<SpecialSetup>> {
    let ring = form.ring();
    if form.n() != 4 {
        return invalid("special_param needs n = 4");
    }
    if ring.p() == 2 {
        return Err(Error::Unsupported(
            "special_param needs characteristic > 3".into(),
        ));
    }
    let f = form.coeffs();
    let left = ring.cube_ratios(&f[0], &f[1]);
    let right = ring.cube_ratios(&f[2], &f[3]);
    let mut out = Vec::new();
    for (r1, r2) in &left {
        for (r3, r4) in &right {
            let lambda = ring.div_exact(&f[0], &ring.cube(r1))?;
            let mu = ring.div_exact(&f[2], &ring.cube(r3))?;
            let (g1, s1, u1) = ring.xgcd(r1, r2);
            let (g2, s2, u2) = ring.xgcd(r3, r4);
            if !g1.is_one() || !g2.is_one() {
                return Err(Error::Identity(
                    "cube ratio components are not coprime".into(),
                ));
            }
            let setup = SpecialSetup {
                ring: ring.clone(),
                rho: [r1.clone(), r2.clone(), r3.clone(), r4.clone()],
                rho_p: [ring.neg(&u1), s1, ring.neg(&u2), s2],
                lambda,
                mu,
            };
            setup.verify(form)?;
            out.push(setup);
        }
    }
    Ok(out)
}

/// The line `b_i x_i + b_j x_j = 0 = b_k x_k + b_l x_l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineDesc {
    pub pairing: [(usize, usize); 2],
    /// Coefficients indexed by coordinate.
    pub b: [Poly; 4],
}

impl LineDesc {
    pub fn contains(&self, ring: &PolyRing, x: &[Poly]) -> bool {
        self.pairing.iter().all(|&(i, j)| {
            ring.add(&ring.mul(&self.b[i], &x[i]), &ring.mul(&self.b[j], &x[j]))
                .is_zero()
        })
    }

    /// The point with parameters `(s_1, s_2)`: `x_i = b_j s_1`, `x_j = -b_i s_1`, etc.
    pub fn point(&self, ring: &PolyRing, s: &[Poly; 2]) -> Vec<Poly> {
        let mut x = vec![Poly::zero(); 4];
        for (k, &(i, j)) in self.pairing.iter().enumerate() {
            x[i] = ring.mul(&self.b[j], &s[k]);
            x[j] = ring.neg(&ring.mul(&self.b[i], &s[k]));
        }
        x
    }

    pub fn format(&self, ring: &PolyRing) -> String {
        let [(i, j), (k, l)] = self.pairing;
        let f = |x: usize| ring.format(&self.b[x]);
        format!(
            "({} {} | {} {}) : {},{} ; {},{}",
            i + 1,
            j + 1,
            k + 1,
            l + 1,
            f(i),
            f(j),
            f(k),
            f(l)
        )
    }
}

/// All lines of the stated shape on `F = 0`, each verified symbolically.
pub fn lines_of(form: &DiagonalForm) -> Result<Vec<LineDesc>> {
    let ring = form.ring();
    if form.n() != 4 {
        return invalid("lines_of needs n = 4");
    }
    let f = form.coeffs();
    let mut out = Vec::new();
    for pairing in PAIRINGS {
        let [(i, j), (k, l)] = pairing;
        for (bi, bj) in ring.cube_ratios(&f[i], &f[j]) {
            for (bk, bl) in ring.cube_ratios(&f[k], &f[l]) {
                let mut b = [Poly::zero(), Poly::zero(), Poly::zero(), Poly::zero()];
                b[i] = bi.clone();
                b[j] = bj.clone();
                b[k] = bk;
                b[l] = bl;
                let line = LineDesc { pairing, b };
                let s = [MPoly::var(2, 0), MPoly::var(2, 1)];
                let mut total = MPoly::zero(2);
                for (m, &(a, c)) in line.pairing.iter().enumerate() {
                    let xa = s[m].scale(ring, &line.b[c]);
                    let xc = s[m].scale(ring, &ring.neg(&line.b[a]));
                    total = total.add(ring, &xa.pow(ring, 3).scale(ring, &f[a]));
                    total = total.add(ring, &xc.pow(ring, 3).scale(ring, &f[c]));
                }
                if !total.is_zero() {
                    return Err(Error::Identity(format!(
                        "line {} is not on F = 0",
                        line.format(ring)
                    )));
                }
                out.push(line);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldCtx;

    fn form(q: u32, f: &str) -> DiagonalForm {
        DiagonalForm::parse(PolyRing::new(FieldCtx::with_q(q).unwrap()), f).unwrap()
    }

    fn polys(ring: &PolyRing, s: &[&str]) -> Vec<Poly> {
        s.iter().map(|x| ring.parse(x).unwrap()).collect()
    }

    #[test]
    fn char2_closed_form() {
        let f = form(2, "1,1,1,1");
        let r = f.ring().clone();
        let c = polys(&r, &["t", "1", "t+1", "0"]);
        let want = c
            .iter()
            .fold(Poly::zero(), |acc, x| r.add(&acc, &r.cube(x)));
        let got = dual_eval(&f, &c).unwrap();
        assert_eq!(got.value, want);
        assert_eq!(got.method, DualMethod::Char2ClosedForm);
    }

    #[test]
    fn all_ones_vanish() {
        let f = form(5, "1,1,1,1");
        let c = vec![Poly::one(); 4];
        assert!(dual_eval(&f, &c).unwrap().value.is_zero());
        assert_eq!(classify_solution(&f, &c).unwrap(), Classification::Special);
    }

    #[test]
    fn closed_form_chain_and_expansion_agree() {
        for (q, fs) in [
            (5u32, "1,1,1,1"),
            (7, "1,2,t,3"),
            (5, "1,t,2"),
            (11, "t+1,2,3,1,t"),
        ] {
            let f = form(q, fs);
            let r = f.ring().clone();
            for idx in [1u64, 7, 123, 999, 4321] {
                let c: Vec<Poly> = (0..f.n())
                    .map(|i| r.from_index(idx * (i as u64 + 3) % 97, 2))
                    .collect();
                let a = dual_eval(&f, &c).unwrap().value;
                let b = dual_eval_chain(&f, &c).unwrap().value;
                let e = dual_eval_expand(&f, &c).unwrap();
                assert_eq!(a, b, "q={q} F={fs} c={c:?}");
                assert_eq!(a, e);
                check_chain_sylvester(&f, &c, &Poly::t()).unwrap();
                check_chain_sylvester(&f, &c, &Poly::one()).unwrap();
            }
        }
    }

    #[test]
    fn classification_examples() {
        let f = form(5, "1,1,1,1");
        let r = f.ring().clone();
        let zero_first = polys(&r, &["0", "1", "1", "0"]);
        assert!(dual_eval(&f, &zero_first).unwrap().value.is_zero());
        assert_eq!(
            classify_solution(&f, &zero_first).unwrap(),
            Classification::Ordinary
        );
        let generic = polys(&r, &["1", "2", "t", "0"]);
        assert_eq!(
            classify_solution(&f, &generic).unwrap(),
            Classification::Nonzero
        );
    }

    #[test]
    fn special_setups() {
        let s5 = special_param(&form(5, "1,1,1,1")).unwrap();
        assert_eq!(s5.len(), 1);
        assert!(s5[0].lambda.is_one() && s5[0].mu.is_one());
        assert!(s5[0].rho.iter().all(Poly::is_one));
        assert_eq!(special_param(&form(7, "1,1,1,1")).unwrap().len(), 9);
        assert!(special_param(&form(7, "3,1,1,1")).unwrap().is_empty());
        assert!(!special_param(&form(7, "t^3,1,8,1")).unwrap().is_empty());
    }

    #[test]
    fn lines() {
        let f = form(5, "1,1,1,1");
        let r = f.ring().clone();
        let ls = lines_of(&f).unwrap();
        assert_eq!(ls.len(), 3);
        let pt = polys(&r, &["1", "-1", "1", "-1"]);
        assert!(ls[0].contains(&r, &pt));
        assert_eq!(ls[0].format(&r), "(1 2 | 3 4) : 1,1 ; 1,1");
        assert_eq!(lines_of(&form(7, "1,1,1,1")).unwrap().len(), 27);
        let mixed = lines_of(&form(7, "3,1,1,1")).unwrap();
        assert!(mixed.is_empty());
    }
}
