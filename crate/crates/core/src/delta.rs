//! The delta method for diagonal cubic forms.
//!
//! For the annulus weight `w = chi_T - chi_{t^{-1} T}` (product form in each
//! coordinate) every oscillatory integral splits into one-dimensional ball
//! integrals `int psi(g x^3 + w x) dx`. On `T` only the polynomial parts of
//! `g` and `w` matter, which makes exact evaluation cheap and memoizable.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::max;

use hashbrown::HashMap;
use num_rational::BigRational;
use num_traits::Zero;

use crate::counting::{count_nw, Method, Weight};
use crate::cyclotomic::{rat_pow, CycInt, CycNum};
use crate::dualform::{classify_solution, dual_eval, Classification, SpecialSetup};
use crate::error::{invalid, Error, Result};
use crate::expsums::{functional_sum, poly_sum, s_r_c_int, t_r_j, DiagonalForm};
use crate::fields::{FieldCtx, Fq};
use crate::laurent::{constancy_depth, psi_exponent, HaarBall, Laurent};
use crate::poly::{Poly, PolyRing};

fn scale_q(ctx: &FieldCtx, z: &CycNum, e: i64) -> CycNum {
    z.scale(&rat_pow(ctx.q(), e))
}

/// `int_B f` for locally constant `f` given as a `psi` exponent (or `None`
/// where the weight vanishes), constant on cosets of depth `depth`.
fn integrate_exponents<F>(
    ctx: &FieldCtx,
    boxes: &[HaarBall],
    depth: i64,
    mut f: F,
) -> Result<CycNum>
where
    F: FnMut(&[Laurent]) -> Result<Option<u32>>,
{
    let q = ctx.q() as u64;
    let p = ctx.p();
    let mut spans = Vec::with_capacity(boxes.len());
    let mut cell_log = 0i64;
    for b in boxes {
        let m = max(depth, -b.radius_log);
        spans.push((m, (b.radius_log + m) as u32));
        cell_log -= m;
    }
    let total: u64 = spans.iter().map(|&(_, w)| q.pow(w)).product();
    let mut hist = vec![0i64; p as usize];
    let mut point: Vec<Laurent> = boxes.iter().map(|b| b.center.clone()).collect();
    for idx in 0..total {
        let mut rest = idx;
        for (k, (b, &(m, w))) in boxes.iter().zip(&spans).enumerate() {
            let n = q.pow(w);
            let mut code = rest % n;
            rest /= n;
            let mut digits = Vec::with_capacity(w as usize);
            for _ in 0..w {
                digits.push(ctx.element((code % q) as usize)?);
                code /= q;
            }
            point[k] = b.center.add(ctx, &Laurent::exact(-m, digits));
        }
        if let Some(e) = f(&point)? {
            hist[e as usize] += 1;
        }
    }
    Ok(scale_q(
        ctx,
        &CycInt::from_histogram(p, &hist).into(),
        cell_log,
    ))
}

/// `int_{|x| < q^{-shrink}} psi(g x^3 + w x) dx`.
///
/// Exact for any `g`, `w` whose digits at indices `>= 0` are the given
/// polynomials: lower digits do not affect the integrand on `T`.
pub fn ball_integral(ring: &PolyRing, g: &Poly, w: &Poly, shrink: u32, extra_depth: i64) -> CycNum {
    let ctx = ring.field();
    let m = (constancy_depth(g.abs_log(), 0, w.abs_log()).max(shrink as i64 + 1) + extra_depth)
        as usize;
    let free = m - shrink as usize;
    // x = t^{-m} X with deg X < free; psi(A t^{-3m}) reads [t^{3m-1}] A
    let coeffs = [Poly::zero(), ring.shift(w, 2 * m), Poly::zero(), g.clone()];
    let span = free.saturating_sub(1);
    let hlen = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.len() + k * span)
        .max()
        .unwrap_or(0)
        .max(3 * m)
        + 1;
    let mut h = vec![Fq::ZERO; hlen];
    h[3 * m - 1] = Fq::ONE;
    let s: CycNum = functional_sum(ctx, free, &h, &coeffs).into();
    scale_q(ctx, &s, -(m as i64))
}

/// [`ball_integral`] re-evaluated one digit deeper; errors on mismatch.
pub fn ball_integral_checked(ring: &PolyRing, g: &Poly, w: &Poly, shrink: u32) -> Result<CycNum> {
    let a = ball_integral(ring, g, w, shrink, 0);
    if a != ball_integral(ring, g, w, shrink, 1) {
        return Err(Error::Identity(format!(
            "ball integral not stable at +1 depth (g={g:?}, w={w:?})"
        )));
    }
    Ok(a)
}

/// `(sign, per-coordinate shrink)` pieces of the annulus weight.
const ANNULUS: [(i8, u32); 2] = [(1, 0), (-1, 1)];

fn check_box(w: &Weight, n: usize) -> Result<()> {
    match w {
        Weight::Annulus => Ok(()),
        Weight::Box {
            center,
            n_log,
            congruence,
        } => {
            if congruence.is_some() {
                return Err(Error::Unsupported(
                    "congruence weights only enter point counts".into(),
                ));
            }
            if center.len() != n || *n_log < 0 {
                return invalid("box weight needs one center per coordinate and N >= 0");
            }
            for c in center {
                if !c.abs_below(0)? {
                    return invalid("box centers must lie in T");
                }
            }
            Ok(())
        }
    }
}

fn weight_value(w: &Weight, ctx: &FieldCtx, x: &[Laurent]) -> Result<bool> {
    Ok(match w {
        Weight::Annulus => {
            let mut any = false;
            for xi in x {
                if !xi.abs_below(0)? {
                    return Ok(false);
                }
                any |= !xi.abs_below(-1)?;
            }
            any
        }
        Weight::Box { center, n_log, .. } => {
            for (xi, c) in x.iter().zip(center) {
                if !xi.sub(ctx, c).abs_below(-*n_log)? {
                    return Ok(false);
                }
            }
            true
        }
    })
}

/// `J_f(gamma, w) = int w(x) psi(gamma f(x) + w.x) dx` for `f = sum F_i x_i^3`.
///
/// Computed coordinate by coordinate: the annulus as a difference of two
/// products, a box as one product of ball integrals.
pub fn j_f(
    ring: &PolyRing,
    gamma: &Laurent,
    w_vec: &[Laurent],
    coeffs: &[Poly],
    weight: &Weight,
) -> Result<CycNum> {
    let ctx = ring.field();
    let n = coeffs.len();
    if w_vec.len() != n {
        return invalid("frequency vector must match the form");
    }
    check_box(weight, n)?;
    let p = ctx.p();
    match weight {
        Weight::Annulus => {
            let mut total = CycNum::zero(p);
            for (sign, shrink) in ANNULUS {
                let mut prod = CycNum::one(p);
                for i in 0..n {
                    let g = gamma.mul_poly(ctx, &coeffs[i]).poly_part()?;
                    let w = w_vec[i].poly_part()?;
                    prod = &prod * &ball_integral(ring, &g, &w, shrink, 0);
                }
                total = if sign > 0 {
                    &total + &prod
                } else {
                    &total - &prod
                };
            }
            Ok(total)
        }
        Weight::Box { center, n_log, .. } => {
            let mut prod = CycNum::one(p);
            for i in 0..n {
                let gf = gamma.mul_poly(ctx, &coeffs[i]);
                let depth = constancy_depth(gf.abs_log()?, 0, w_vec[i].abs_log()?);
                let ball = HaarBall {
                    center: center[i].clone(),
                    radius_log: -*n_log,
                };
                let v = integrate_exponents(ctx, &[ball], depth, |x| {
                    let x3 = x[0].mul(ctx, &x[0]).mul(ctx, &x[0]);
                    let phase = gf.mul(ctx, &x3).add(ctx, &w_vec[i].mul(ctx, &x[0]));
                    Ok(Some(psi_exponent(ctx, &phase)?))
                })?;
                prod = &prod * &v;
            }
            Ok(prod)
        }
    }
}

/// [`j_f`] by direct integration over `T^n` (no factoring); for `n <= 3`.
pub fn j_f_direct(
    ring: &PolyRing,
    gamma: &Laurent,
    w_vec: &[Laurent],
    coeffs: &[Poly],
    weight: &Weight,
) -> Result<CycNum> {
    let ctx = ring.field();
    let n = coeffs.len();
    if n > 3 || w_vec.len() != n {
        return invalid("direct integration supports n <= 3 with matching frequencies");
    }
    check_box(weight, n)?;
    let h = coeffs.iter().filter_map(Poly::abs_log).max().unwrap_or(0);
    let wl = w_vec
        .iter()
        .map(|w| w.abs_log())
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .max();
    let mut depth = constancy_depth(gamma.abs_log()?, h, wl);
    if let Weight::Box { n_log, .. } = weight {
        depth = depth.max(*n_log);
    }
    let boxes = vec![HaarBall::unit(); n];
    integrate_exponents(ctx, &boxes, depth, |x| {
        if !weight_value(weight, ctx, x)? {
            return Ok(None);
        }
        let mut phase = Laurent::zero();
        for i in 0..n {
            let x3 = x[i].mul(ctx, &x[i]).mul(ctx, &x[i]);
            phase = phase.add(ctx, &gamma.mul_poly(ctx, &coeffs[i]).mul(ctx, &x3));
            phase = phase.add(ctx, &w_vec[i].mul(ctx, &x[i]));
        }
        Ok(Some(psi_exponent(ctx, &phase)?))
    })
}

/// Parameters of one delta-method instance.
#[derive(Clone, Debug)]
pub struct DeltaConfig {
    pub form: DiagonalForm,
    pub p: Poly,
    /// `Q` with `|P|^{3/2} <= q^Q <= q |P|^{3/2}`.
    pub q_log: i64,
    pub weight: Weight,
    /// Re-evaluate every one-dimensional integral one digit deeper.
    pub paranoid: bool,
}

impl DeltaConfig {
    /// Uses the smallest admissible `Q` when `q_log` is `None`.
    pub fn new(form: DiagonalForm, p: Poly, q_log: Option<i64>) -> Result<DeltaConfig> {
        let Some(dp) = p.deg().filter(|&d| d >= 1) else {
            return invalid("P must have degree at least 1");
        };
        let dp = dp as i64;
        let q_log = q_log.unwrap_or((3 * dp + 1) / 2);
        if 2 * q_log < 3 * dp || 2 * q_log > 3 * dp + 2 {
            return invalid(format!(
                "Q = {q_log} violates |P|^(3/2) <= q^Q <= q|P|^(3/2) for deg P = {dp}"
            ));
        }
        Ok(DeltaConfig {
            form,
            p,
            q_log,
            weight: Weight::Annulus,
            paranoid: false,
        })
    }

    pub fn deg_p(&self) -> i64 {
        self.p.deg().unwrap_or(0) as i64
    }

    /// `log_q C = 2 deg P - Q`.
    pub fn c_hat_log(&self) -> i64 {
        2 * self.deg_p() - self.q_log
    }

    /// Digits of `theta` below this index never affect `I_r(theta, c)`.
    pub fn theta_depth(&self) -> i64 {
        2 + self.form.height_log() + 3 * self.deg_p()
    }

    /// Representatives of `{|theta| < |r|^{-1} q^{-Q}}` and the log-measure of each cell.
    pub fn theta_cells(&self, deg_r: i64) -> (Vec<Laurent>, i64) {
        let top = deg_r + self.q_log;
        let k = (self.theta_depth() - top).max(0);
        let q = self.form.ring().q() as u64;
        let ctx = self.form.field();
        let reps = (0..q.pow(k as u32))
            .map(|mut code| {
                let digits = (0..k)
                    .map(|_| {
                        let d = ctx.element((code % q) as usize).expect("digit");
                        code /= q;
                        d
                    })
                    .collect();
                Laurent::exact(-(top + k), digits)
            })
            .collect();
        (reps, -(top + k))
    }

    fn check_annulus(&self) -> Result<()> {
        match self.weight {
            Weight::Annulus => Ok(()),
            _ => Err(Error::Unsupported(
                "the delta pipeline is implemented for the annulus weight".into(),
            )),
        }
    }

    /// `floor(P^3 theta F_i)` for each coordinate.
    fn cubic_keys(&self, theta: &Laurent) -> Result<Vec<Poly>> {
        let ring = self.form.ring();
        let ctx = ring.field();
        let p3 = ring.cube(&self.p);
        self.form
            .coeffs()
            .iter()
            .map(|f| theta.mul_poly(ctx, &ring.mul(&p3, f)).poly_part())
            .collect()
    }

    /// Coordinates `c_i` with `deg c_i < D_i` carry every nonzero `I_r(theta, c)`.
    fn c_degrees(&self, deg_r: i64, keys: &[Poly]) -> Vec<i64> {
        keys.iter()
            .map(|g| {
                let w_log = max(1, g.abs_log().map_or(0, |d| d - 1));
                w_log + deg_r - self.deg_p()
            })
            .collect()
    }
}

fn ball_for(ring: &PolyRing, g: &Poly, w: &Poly, shrink: u32, paranoid: bool) -> Result<CycNum> {
    if paranoid {
        ball_integral_checked(ring, g, w, shrink)
    } else {
        Ok(ball_integral(ring, g, w, shrink, 0))
    }
}

type BallKey = (Poly, Poly, u32);

/// Memoized one-dimensional integrals of the annulus pieces.
struct BallCache<'a> {
    ring: &'a PolyRing,
    paranoid: bool,
    map: HashMap<BallKey, CycNum>,
}

impl<'a> BallCache<'a> {
    fn new(ring: &'a PolyRing, paranoid: bool) -> Self {
        BallCache {
            ring,
            paranoid,
            map: HashMap::new(),
        }
    }

    fn get(&mut self, g: &Poly, w: &Poly, shrink: u32) -> Result<CycNum> {
        let key = (g.clone(), w.clone(), shrink);
        if let Some(v) = self.map.get(&key) {
            return Ok(v.clone());
        }
        let v = ball_for(self.ring, g, w, shrink, self.paranoid)?;
        self.map.insert(key, v.clone());
        Ok(v)
    }

    /// `I_r(theta, c) = sum_pieces sign prod_i K_i(c_i)` from the cubic keys.
    fn i_value(
        &mut self,
        cfg: &DeltaConfig,
        r: &Poly,
        keys: &[Poly],
        c: &[Poly],
    ) -> Result<CycNum> {
        let ring = self.ring;
        let p = ring.p();
        let mut total = CycNum::zero(p);
        for (sign, shrink) in ANNULUS {
            let mut prod = CycNum::one(p);
            for (g, ci) in keys.iter().zip(c) {
                let w = ring.quo(&ring.mul(&cfg.p, ci), r);
                prod = &prod * &self.get(g, &w, shrink)?;
                if prod.is_zero() {
                    break;
                }
            }
            total = if sign > 0 {
                &total + &prod
            } else {
                &total - &prod
            };
        }
        Ok(total)
    }
}

/// `I_r(theta, c) = int w(x) psi(theta P^3 F(x) + P c.x / r) dx`.
pub fn i_r_theta_c(cfg: &DeltaConfig, r: &Poly, theta: &Laurent, c: &[Poly]) -> Result<CycNum> {
    let ring = cfg.form.ring();
    let ctx = ring.field();
    let Some(dr) = r.deg() else {
        return invalid("modulus must be nonzero");
    };
    if c.len() != cfg.form.n() {
        return invalid("frequency vector must match the form");
    }
    if !theta.abs_below(-(dr as i64) - cfg.q_log)? {
        return invalid("theta must satisfy |theta| < |r|^-1 q^-Q");
    }
    let gamma = theta.mul_poly(ctx, &ring.cube(&cfg.p));
    let w: Vec<Laurent> = c
        .iter()
        .map(|ci| Laurent::from_ratio_in(ring, &ring.mul(&cfg.p, ci), r, -1))
        .collect::<Result<_>>()?;
    j_f(ring, &gamma, &w, cfg.form.coeffs(), &cfg.weight)
}

/// Evaluation routes for the `theta`-average of `I_r(theta, c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IHatPath {
    /// Sum over `theta` cells.
    ThetaSum,
    /// `(|r| q^Q)^{-1} int w(x) psi(P c.x / r) [|P^3 F(x)| < |r| q^Q] dx`.
    Collapse,
}

/// `int_{|theta| < |r|^{-1} q^{-Q}} I_r(theta, c) d theta`.
pub fn i_hat_r(cfg: &DeltaConfig, r: &Poly, c: &[Poly], path: IHatPath) -> Result<CycNum> {
    cfg.check_annulus()?;
    let ring = cfg.form.ring();
    let ctx = ring.field();
    let dr = match r.deg() {
        Some(d) if (d as i64) <= cfg.q_log => d as i64,
        _ => return invalid("modulus must be nonzero with deg r <= Q"),
    };
    match path {
        IHatPath::ThetaSum => {
            let (reps, cell) = cfg.theta_cells(dr);
            let mut cache = BallCache::new(ring, cfg.paranoid);
            let mut acc = CycNum::zero(ring.p());
            for th in &reps {
                let keys = cfg.cubic_keys(th)?;
                acc = &acc + &cache.i_value(cfg, r, &keys, c)?;
            }
            Ok(scale_q(ctx, &acc, cell))
        }
        IHatPath::Collapse => {
            let n = cfg.form.n();
            if n > 3 {
                return Err(Error::Unsupported(
                    "the collapsed route integrates over T^n directly; n <= 3".into(),
                ));
            }
            let w: Vec<Laurent> = c
                .iter()
                .map(|ci| Laurent::from_poly(&ring.quo(&ring.mul(&cfg.p, ci), r)))
                .collect();
            let wl = w.iter().filter_map(|x| x.top()).max();
            let bound = dr + cfg.q_log;
            let ind_depth = 3 * cfg.deg_p() + cfg.form.height_log() - bound;
            let depth =
                constancy_depth(None, 0, wl).max(ind_depth).max(1) + i64::from(cfg.paranoid);
            let p3f: Vec<Laurent> = cfg
                .form
                .coeffs()
                .iter()
                .map(|f| Laurent::from_poly(&ring.mul(&ring.cube(&cfg.p), f)))
                .collect();
            let boxes = vec![HaarBall::unit(); n];
            let v = integrate_exponents(ctx, &boxes, depth, |x| {
                if !weight_value(&Weight::Annulus, ctx, x)? {
                    return Ok(None);
                }
                let mut val = Laurent::zero();
                let mut phase = Laurent::zero();
                for i in 0..n {
                    let x3 = x[i].mul(ctx, &x[i]).mul(ctx, &x[i]);
                    val = val.add(ctx, &p3f[i].mul(ctx, &x3));
                    phase = phase.add(ctx, &w[i].mul(ctx, &x[i]));
                }
                if !val.abs_below(bound)? {
                    return Ok(None);
                }
                Ok(Some(psi_exponent(ctx, &phase)?))
            })?;
            Ok(scale_q(ctx, &v, -bound))
        }
    }
}

/// `I_Y(c)`, the `theta`-average for any `|r| = q^Y` (computed with `r = t^Y`).
pub fn i_hat(cfg: &DeltaConfig, y: i64, c: &[Poly]) -> Result<CycNum> {
    if y < 0 || y > cfg.q_log {
        return invalid("Y must satisfy 0 <= Y <= Q");
    }
    i_hat_r(
        cfg,
        &Poly::monomial(Fq::ONE, y as usize),
        c,
        IHatPath::ThetaSum,
    )
}

/// `N_0 + E_1 + E_2` and the split of `E_2` for `n = 4`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaPieces {
    pub n0: CycNum,
    pub e1: CycNum,
    pub e2: CycNum,
    pub e2_ord: Option<CycNum>,
    pub e2_spec: Option<CycNum>,
    /// Whether `E_1` was summed term by term rather than as the remainder.
    pub e1_direct: bool,
    pub dual_zeros: usize,
}

/// Both sides of the delta-method identity.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaReport {
    pub lhs: u64,
    pub rhs: CycNum,
    pub equal: bool,
    pub pieces: DeltaPieces,
    pub moduli: usize,
    pub theta_cells: u64,
}

impl DeltaReport {
    /// True when the right-hand side and the three pieces all equal `N(w, P)`.
    pub fn holds(&self) -> bool {
        let p = self.rhs.p();
        let sum = &(&self.pieces.n0 + &self.pieces.e1) + &self.pieces.e2;
        self.equal && sum == CycNum::from_int(p, self.lhs as i64)
    }
}

struct DualZero {
    c: Vec<Poly>,
    special: Option<bool>,
}

fn below(ring: &PolyRing, d: i64) -> Vec<Poly> {
    ring.below_degree(d.max(0) as usize).collect()
}

/// The right-hand side of the delta-method identity, split into pieces.
///
/// `budget` bounds the frequency boxes that are enumerated vector by
/// vector: the dual-zero scan always, and the direct `E_1` sum when
/// `direct_e1` is set.
pub fn delta_rhs(
    cfg: &DeltaConfig,
    budget: u64,
    direct_e1: bool,
) -> Result<(CycNum, DeltaPieces, usize, u64)> {
    cfg.check_annulus()?;
    let form = &cfg.form;
    let ring = form.ring();
    let p = ring.p();
    let n = form.n();
    let dp = cfg.deg_p();

    // widest frequency box over all moduli
    let mut dmax = vec![0i64; n];
    for dr in 0..=cfg.q_log {
        for (i, f) in form.coeffs().iter().enumerate() {
            let g_log = 3 * dp + f.abs_log().unwrap_or(0) - dr - cfg.q_log - 1;
            let w_log = max(1, g_log - 1);
            dmax[i] = dmax[i].max(w_log + dr - dp);
        }
    }
    let box_size = dmax.iter().fold(1u64, |acc, &d| {
        acc.saturating_mul((ring.q() as u64).saturating_pow(d.max(0) as u32))
    });
    if box_size > budget {
        return Err(Error::Budget(format!(
            "frequency box has {box_size} vectors, budget is {budget}"
        )));
    }
    let lists: Vec<Vec<Poly>> = dmax.iter().map(|&d| below(ring, d)).collect();
    let mut zeros = Vec::new();
    let mut idx = vec![0usize; n];
    'scan: loop {
        let c: Vec<Poly> = (0..n).map(|i| lists[i][idx[i]].clone()).collect();
        if c.iter().any(|x| !x.is_zero()) && dual_eval(form, &c)?.value.is_zero() {
            let special = if n == 4 {
                Some(classify_solution(form, &c)? == Classification::Special)
            } else {
                None
            };
            zeros.push(DualZero { c, special });
        }
        let mut k = 0;
        loop {
            if k == n {
                break 'scan;
            }
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }

    let mut cache = BallCache::new(ring, cfg.paranoid);
    let zero = CycNum::zero(p);
    let (mut total, mut n0, mut e2, mut e2_spec, mut e1) =
        (zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero);
    let mut moduli = 0;
    let mut cells = 0u64;
    for r in ring.monic_up_to(cfg.q_log as usize) {
        moduli += 1;
        let dr = r.deg().unwrap() as i64;
        let units = ring.units_mod(&r);
        let (reps, cell_log) = cfg.theta_cells(dr);
        cells += reps.len() as u64;
        let mut groups: HashMap<Vec<Poly>, u64> = HashMap::new();
        for th in &reps {
            *groups.entry(cfg.cubic_keys(th)?).or_insert(0) += 1;
        }
        let mut groups: Vec<_> = groups.into_iter().collect();
        groups.sort();
        let mut s_cache: HashMap<(Poly, Poly), CycNum> = HashMap::new();
        let mut s_of = |a: &Poly, f: &Poly, c: &Poly| -> Result<CycNum> {
            let key = (ring.rem(&ring.mul(a, f), &r), ring.rem(c, &r));
            if let Some(v) = s_cache.get(&key) {
                return Ok(v.clone());
            }
            let v: CycNum = poly_sum(
                ring,
                &r,
                &[Poly::zero(), key.1.clone(), Poly::zero(), key.0.clone()],
            )?
            .into();
            s_cache.insert(key, v.clone());
            Ok(v)
        };
        // |P|^n |r|^{-n} times the cell measure
        let outer = cell_log + (n as i64) * (dp - dr);
        for (keys, count) in groups {
            let degs = cfg.c_degrees(dr, &keys);
            let cl: Vec<Vec<Poly>> = degs.iter().map(|&d| below(ring, d)).collect();
            if cfg.paranoid {
                for (i, &d) in degs.iter().enumerate() {
                    for ci in ring.below_degree((d.max(0) + 1) as usize).skip(cl[i].len()) {
                        let w = ring.quo(&ring.mul(&cfg.p, &ci), &r);
                        for (_, shrink) in ANNULUS {
                            if !cache.get(&keys[i], &w, shrink)?.is_zero() {
                                return Err(Error::Identity(format!(
                                    "integral outside the frequency box for c_{i} = {ci:?}"
                                )));
                            }
                        }
                    }
                }
            }
            let scale = rat_pow(ring.q(), outer) * BigRational::from_integer((count as i64).into());
            // K[piece][i][idx]
            let mut kt: Vec<Vec<Vec<CycNum>>> = Vec::new();
            for (_, shrink) in ANNULUS {
                let mut per = Vec::with_capacity(n);
                for i in 0..n {
                    per.push(
                        cl[i]
                            .iter()
                            .map(|ci| {
                                cache.get(&keys[i], &ring.quo(&ring.mul(&cfg.p, ci), &r), shrink)
                            })
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                kt.push(per);
            }
            let mut grp_total = CycNum::zero(p);
            let mut grp_n0 = CycNum::zero(p);
            for a in &units {
                let srow: Vec<Vec<CycNum>> = (0..n)
                    .map(|i| {
                        cl[i]
                            .iter()
                            .map(|ci| s_of(a, &form.coeffs()[i], ci))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?;
                for (piece, (sign, _)) in ANNULUS.iter().enumerate() {
                    let mut prod = CycNum::one(p);
                    let mut prod0 = CycNum::one(p);
                    for i in 0..n {
                        let mut acc = CycNum::zero(p);
                        for (s, k) in srow[i].iter().zip(&kt[piece][i]) {
                            if !k.is_zero() {
                                acc = &acc + &(s * k);
                            }
                        }
                        prod = &prod * &acc;
                        prod0 = &prod0 * &(&srow[i][0] * &kt[piece][i][0]);
                    }
                    if *sign > 0 {
                        grp_total = &grp_total + &prod;
                        grp_n0 = &grp_n0 + &prod0;
                    } else {
                        grp_total = &grp_total - &prod;
                        grp_n0 = &grp_n0 - &prod0;
                    }
                }
            }
            total = &total + &grp_total.scale(&scale);
            n0 = &n0 + &grp_n0.scale(&scale);

            let in_box = |c: &[Poly]| {
                c.iter()
                    .zip(&degs)
                    .all(|(x, &d)| x.abs_log().is_none_or(|l| l < d))
            };
            for z in zeros.iter().filter(|z| in_box(&z.c)) {
                let iv = cache.i_value(cfg, &r, &keys, &z.c)?;
                if iv.is_zero() {
                    continue;
                }
                let s: CycNum = s_r_c_int(form, &r, &z.c).into();
                let term = (&s * &iv).scale(&scale);
                if z.special == Some(true) {
                    e2_spec = &e2_spec + &term;
                }
                e2 = &e2 + &term;
            }

            if direct_e1 {
                let size = cl
                    .iter()
                    .fold(1u64, |acc, l| acc.saturating_mul(l.len() as u64));
                if size.saturating_mul(moduli as u64) > budget {
                    return Err(Error::Budget(format!(
                        "direct E_1 needs {size} vectors per modulus"
                    )));
                }
                let mut idx = vec![0usize; n];
                'box_: loop {
                    let c: Vec<Poly> = (0..n).map(|i| cl[i][idx[i]].clone()).collect();
                    if c.iter().any(|x| !x.is_zero()) && !dual_eval(form, &c)?.value.is_zero() {
                        let iv = cache.i_value(cfg, &r, &keys, &c)?;
                        if !iv.is_zero() {
                            let s: CycNum = s_r_c_int(form, &r, &c).into();
                            e1 = &e1 + &(&s * &iv).scale(&scale);
                        }
                    }
                    let mut k = 0;
                    loop {
                        if k == n {
                            break 'box_;
                        }
                        idx[k] += 1;
                        if idx[k] < cl[k].len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                }
            }
        }
    }
    if !direct_e1 {
        e1 = &(&total - &n0) - &e2;
    }
    let (e2_ord, e2_spec) = if n == 4 {
        (Some(&e2 - &e2_spec), Some(e2_spec))
    } else {
        (None, None)
    };
    let pieces = DeltaPieces {
        n0,
        e1,
        e2,
        e2_ord,
        e2_spec,
        e1_direct: direct_e1,
        dual_zeros: zeros.len(),
    };
    Ok((total, pieces, moduli, cells))
}

/// Computes `N(w, P)` by counting and the delta-method right-hand side exactly.
pub fn delta_verify(cfg: &DeltaConfig, budget: u64) -> Result<DeltaReport> {
    delta_verify_with(cfg, budget, false)
}

/// [`delta_verify`] with `E_1` optionally summed term by term.
pub fn delta_verify_with(cfg: &DeltaConfig, budget: u64, direct_e1: bool) -> Result<DeltaReport> {
    let b = cfg.deg_p() as u32;
    let lhs = count_nw(&cfg.form, b, &cfg.weight, Method::MeetInMiddle, budget)?.value;
    let (rhs, pieces, moduli, theta_cells) = delta_rhs(cfg, budget, direct_e1)?;
    let equal = rhs == CycNum::from_int(rhs.p(), lhs as i64);
    Ok(DeltaReport {
        lhs,
        rhs,
        equal,
        pieces,
        moduli,
        theta_cells,
    })
}

/// `sum_{r monic, deg r <= Q} phi(r) q^{-deg r - Q}`, the total measure of the Farey balls.
pub fn farey_mass(ring: &PolyRing, q_log: i64) -> BigRational {
    let mut acc = BigRational::zero();
    for r in ring.monic_up_to(q_log as usize) {
        let phi = BigRational::from_integer((ring.phi(&r) as i64).into());
        acc += phi * rat_pow(ring.q(), -(r.deg().unwrap() as i64) - q_log);
    }
    acc
}

/// Both sides of Poisson summation for `w = indicator{|u| < q^b}` and
/// `f(u) = gamma sum F_i u_i^3`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonReport {
    pub lhs: CycNum,
    pub rhs: CycNum,
    pub frequencies: u64,
}

pub fn poisson_check(
    ring: &PolyRing,
    coeffs: &[Poly],
    gamma: &Laurent,
    b: u32,
) -> Result<PoissonReport> {
    let ctx = ring.field();
    let p = ring.p();
    let n = coeffs.len();
    let pts: Vec<Poly> = ring.below_degree(b as usize).collect();
    let gf: Vec<Laurent> = coeffs.iter().map(|f| gamma.mul_poly(ctx, f)).collect();
    let mut hist = vec![0i64; p as usize];
    let total = (pts.len() as u64).pow(n as u32);
    for idx in 0..total {
        let mut rest = idx;
        let mut phase = Laurent::zero();
        for g in &gf {
            let z = &pts[(rest % pts.len() as u64) as usize];
            rest /= pts.len() as u64;
            phase = phase.add(ctx, &g.mul_poly(ctx, &ring.cube(z)));
        }
        hist[psi_exponent(ctx, &phase)? as usize] += 1;
    }
    let lhs: CycNum = CycInt::from_histogram(p, &hist).into();

    // int_{|u|<q^b} psi(g u^3 + c u) du = q^b int_T psi(g t^{3b} v^3 + c t^b v) dv
    let mut rhs = CycNum::one(p);
    let mut frequencies = 1u64;
    for g in &gf {
        let gv = g.shift(3 * b as i64).poly_part()?;
        let l = max(0, gv.abs_log().map_or(0, |d| d - 1));
        // one extra degree beyond the vanishing radius
        let cs = below(ring, l - b as i64 + 1);
        frequencies *= cs.len() as u64;
        let mut acc = CycNum::zero(p);
        for c in &cs {
            acc = &acc + &ball_integral(ring, &gv, &ring.shift(c, b as usize), 0, 0);
        }
        rhs = &rhs * &scale_q(ctx, &acc, b as i64);
    }
    Ok(PoissonReport {
        lhs,
        rhs,
        frequencies,
    })
}

/// `J_r(j, theta) = int w(P^{-1} x(j, t)) psi(theta F~(j, t)) dt` over `K_inf^2`.
pub fn j_r_j(
    setup: &SpecialSetup,
    cfg: &DeltaConfig,
    j: &[Poly; 2],
    theta: &Laurent,
) -> Result<CycNum> {
    cfg.check_annulus()?;
    let ring = setup.ring();
    let ctx = ring.field();
    let p = ring.p();
    let dp = cfg.deg_p();
    let mut total = CycNum::zero(p);
    for (sign, shrink) in ANNULUS {
        let x_log = dp - shrink as i64;
        let mut prod = CycNum::one(p);
        for (k, jk) in j.iter().enumerate() {
            let v = fiber_integral(setup, ctx, k, jk, theta, x_log, cfg.paranoid)?;
            prod = &prod * &v;
            if prod.is_zero() {
                break;
            }
        }
        total = if sign > 0 {
            &total + &prod
        } else {
            &total - &prod
        };
    }
    Ok(total)
}

/// `a` with digits below `e` dropped, as an exact value.
fn exact_trunc(a: &Laurent, e: i64) -> Result<Laurent> {
    let Some(top) = a.top() else {
        return Ok(Laurent::zero());
    };
    if top < e {
        return Ok(Laurent::zero());
    }
    let digits = (e..=top).map(|i| a.digit(i)).collect::<Result<Vec<_>>>()?;
    Ok(Laurent::exact(e, digits))
}

/// `int psi(theta y Q_k(y, t)) dt` over `{t : |x_a|, |x_b| < q^x_log}` for the pair `k`.
fn fiber_integral(
    setup: &SpecialSetup,
    ctx: &FieldCtx,
    k: usize,
    j: &Poly,
    theta: &Laurent,
    x_log: i64,
    paranoid: bool,
) -> Result<CycNum> {
    let ring = setup.ring();
    let (a, b) = (2 * k, 2 * k + 1);
    // x_a = rho'_b j - rho_b t and x_b = rho_a t - rho'_a j
    let ball = |rho: &Poly, rho_p: &Poly| {
        (
            ring.mul(rho_p, j),
            rho.clone(),
            x_log - rho.deg().unwrap() as i64,
        )
    };
    let (na, da, ea) = ball(&setup.rho[b], &setup.rho_p[b]);
    let (nb, db, eb) = ball(&setup.rho[a], &setup.rho_p[a]);
    let ((ns, ds, es), (nl, dl, el)) = if ea <= eb {
        ((na, da, ea), (nb, db, eb))
    } else {
        ((nb, db, eb), (na, da, ea))
    };
    // the smaller ball lies inside the larger one iff their centers are close
    let diff_num = ring.sub(&ring.mul(&ns, &dl), &ring.mul(&nl, &ds));
    if let Some(d) = diff_num.abs_log() {
        if d - (ds.deg().unwrap() + dl.deg().unwrap()) as i64 >= el {
            return Ok(CycNum::zero(ctx.p()));
        }
    }
    let center = exact_trunc(&Laurent::from_ratio_in(ring, &ns, &ds, es - 1)?, es)?;
    let [e0, e1, e2] = setup.fiber_poly(k, j);
    let lin = theta.mul(
        ctx,
        &Laurent::from_poly(&e1).add(
            ctx,
            &center.mul_poly(ctx, &ring.scale(ctx.from_int(2), &e2)),
        ),
    );
    let quad = theta.mul_poly(ctx, &e2);
    let at_center = Laurent::from_poly(&e0)
        .add(ctx, &center.mul_poly(ctx, &e1))
        .add(ctx, &center.mul(ctx, &center).mul_poly(ctx, &e2));
    let shift = psi_exponent(ctx, &theta.mul(ctx, &at_center))?;
    let l = lin.abs_log()?.unwrap_or(i64::MIN / 4);
    let m = quad.abs_log()?.map_or(i64::MIN / 4, |x| x + es);
    let depth = 1 + max(l, m).max(-es - 1) + i64::from(paranoid);
    let dom = [HaarBall::around_zero(es)];
    let f = |u: &[Laurent]| -> Result<Option<u32>> {
        let ph = lin
            .mul(ctx, &u[0])
            .add(ctx, &quad.mul(ctx, &u[0].mul(ctx, &u[0])));
        Ok(Some((psi_exponent(ctx, &ph)? + shift) % ctx.p()))
    };
    let v = integrate_exponents(ctx, &dom, depth, f)?;
    if paranoid && v != integrate_exponents(ctx, &dom, depth + 1, f)? {
        return Err(Error::Identity(
            "fiber integral not stable at +1 depth".into(),
        ));
    }
    Ok(v)
}

/// Per-`theta` values of both sides of the special-solution transform.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformRow {
    pub theta: Laurent,
    pub lhs: CycNum,
    pub rhs: CycNum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformReport {
    pub r: Poly,
    pub rows: Vec<TransformRow>,
    /// `theta`-integrated sides.
    pub lhs_total: CycNum,
    pub rhs_total: CycNum,
    pub equal: bool,
    pub d_count: usize,
    pub j_count: usize,
}

/// Checks `sum_d S_r(c(d)) I_r(theta, c(d)) = |r|^2 |P|^{-4} sum_j T_r(j) J_r(j, theta)`
/// for every `theta` cell of the modulus `r`.
pub fn special_transform_verify(
    setup: &SpecialSetup,
    cfg: &DeltaConfig,
    r: &Poly,
) -> Result<TransformReport> {
    cfg.check_annulus()?;
    let form = &cfg.form;
    if form.n() != 4 {
        return invalid("the special transform needs n = 4");
    }
    let ring = form.ring();
    let ctx = ring.field();
    let p = ring.p();
    let dr = match r.deg() {
        Some(d) if r.is_monic() && (d as i64) <= cfg.q_log => d as i64,
        _ => return invalid("r must be monic with deg r <= Q"),
    };
    let dp = cfg.deg_p();
    let (reps, cell_log) = cfg.theta_cells(dr);
    let mut cache = BallCache::new(ring, cfg.paranoid);

    // T_r(j) over the box where J_r(j, .) can be nonzero, plus one guard degree
    let j_lists: Vec<Vec<Poly>> = (0..2)
        .map(|k| {
            let rd = max(
                setup.rho[2 * k].deg().unwrap(),
                setup.rho[2 * k + 1].deg().unwrap(),
            ) as i64;
            below(ring, dp + rd + i64::from(cfg.paranoid))
        })
        .collect();
    let mut t_vals = Vec::new();
    for j1 in &j_lists[0] {
        for j2 in &j_lists[1] {
            let j = [j1.clone(), j2.clone()];
            let t = t_r_j(setup, r, &j)?;
            if !t.is_zero() {
                t_vals.push((j, t));
            }
        }
    }
    let rhs_scale = rat_pow(ring.q(), 2 * dr - 4 * dp);

    let mut rows = Vec::with_capacity(reps.len());
    let mut d_count = 0;
    for th in reps {
        let keys = cfg.cubic_keys(&th)?;
        let degs = cfg.c_degrees(dr, &keys);
        let d_lists: Vec<Vec<Poly>> = (0..2)
            .map(|k| {
                let lim = (0..2)
                    .map(|s| degs[2 * k + s] - setup.rho[2 * k + s].deg().unwrap() as i64)
                    .min()
                    .unwrap();
                below(ring, lim)
            })
            .collect();
        let mut lhs = CycNum::zero(p);
        for d1 in &d_lists[0] {
            for d2 in &d_lists[1] {
                let c = setup.c_of(&[d1.clone(), d2.clone()]);
                let iv = cache.i_value(cfg, r, &keys, &c)?;
                if iv.is_zero() {
                    continue;
                }
                let s: CycNum = s_r_c_int(form, r, &c).into();
                lhs = &lhs + &(&s * &iv);
            }
        }
        d_count = d_count.max(d_lists[0].len() * d_lists[1].len());
        let mut rhs = CycNum::zero(p);
        for (j, t) in &t_vals {
            let jv = j_r_j(setup, cfg, j, &th)?;
            if !jv.is_zero() {
                rhs = &rhs + &(t * &jv);
            }
        }
        let rhs = rhs.scale(&rhs_scale);
        rows.push(TransformRow {
            theta: th,
            lhs,
            rhs,
        });
    }
    let sum = |f: &dyn Fn(&TransformRow) -> &CycNum| {
        let s = rows.iter().fold(CycNum::zero(p), |acc, row| &acc + f(row));
        scale_q(ctx, &s, cell_log)
    };
    let lhs_total = sum(&|row| &row.lhs);
    let rhs_total = sum(&|row| &row.rhs);
    let equal = rows.iter().all(|row| row.lhs == row.rhs);
    let j_count = j_lists[0].len() * j_lists[1].len();
    Ok(TransformReport {
        r: r.clone(),
        rows,
        lhs_total,
        rhs_total,
        equal,
        d_count,
        j_count,
    })
}
