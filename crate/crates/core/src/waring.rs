//! The classical circle method for Waring's problem for cubes and for weak
//! approximation on diagonal cubic hypersurfaces.
//!
//! Singular integrals are computed as exact local densities
//! `R meas{x in box : |F(x) - nu| < 1/R}`; on `F_q((1/t))` these are
//! rational numbers with no carries to track, so the box decomposes digit
//! by digit and the count splits into two halves.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::counting::{count_r, jq3_closure, waring_b, Method};
use crate::cyclotomic::{cyc_abs_sq, rat_pow, CycNum};
use crate::error::{invalid, Error, Result};
use crate::expsums::{poly_sum, psi_frac, weyl_sum, DiagonalForm};
use crate::fields::FieldCtx;
use crate::laurent::{farey_dissect, farey_locate, FareyBall, Laurent};
use crate::poly::{Poly, PolyRing};

/// Which family of major arcs to use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArcConfig {
    /// `|r| <= q^B` and `|r alpha - a| < q^{-2B}`.
    Waring { b: u32 },
    /// `|r| < |P|^{1/2}` and `|r alpha - a| < H_F^{-1} |M|^{-3} |r| |P|^{-5/2}`.
    Wa {
        p_deg: u32,
        m_deg: u32,
        height_log: i64,
    },
}

impl ArcConfig {
    /// The Dirichlet level `Q` whose balls contain every major arc.
    pub fn level(&self) -> i64 {
        match *self {
            ArcConfig::Waring { b } => b as i64,
            ArcConfig::Wa { p_deg, .. } => (p_deg as i64 + 1) / 2,
        }
        .max(1)
    }

    fn modulus_ok(&self, deg_r: i64) -> bool {
        match *self {
            ArcConfig::Waring { b } => deg_r <= b as i64,
            ArcConfig::Wa { p_deg, .. } => 2 * deg_r < p_deg as i64,
        }
    }

    /// Twice the log-radius: major iff `2 log|r alpha - a| < radius2`.
    fn radius2(&self, deg_r: i64) -> i64 {
        match *self {
            ArcConfig::Waring { b } => -4 * b as i64,
            ArcConfig::Wa {
                p_deg,
                m_deg,
                height_log,
            } => 2 * (deg_r - height_log - 3 * m_deg as i64) - 5 * p_deg as i64,
        }
    }
}

/// Where `alpha` sits in the dissection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcClass {
    pub ball: FareyBall,
    pub major: bool,
    /// `log_q |r alpha - a|`, `None` when `alpha = a/r` exactly.
    pub dist_log: Option<i64>,
    /// Twice the log-radius of the major arc for this `r`.
    pub radius2: i64,
    /// False when `|r|` alone rules out a major arc.
    pub modulus_ok: bool,
}

impl ArcClass {
    /// The inequality that places `alpha` on the minor arcs, if it is minor.
    pub fn witness(&self, ring: &PolyRing) -> Option<String> {
        if self.major {
            return None;
        }
        let r = ring.format(&self.ball.r);
        Some(if !self.modulus_ok {
            format!(
                "deg r = {} is outside the major-arc range for r = {r}",
                self.ball.r.deg().unwrap_or(0)
            )
        } else {
            format!(
                "|r alpha - a| = q^{} >= q^({}/2) for a/r = {}/{r}",
                self.dist_log.unwrap_or(i64::MIN),
                self.radius2,
                ring.format(&self.ball.a)
            )
        })
    }
}

/// Classifies `alpha in T` as major or minor.
pub fn arc_classify(ring: &PolyRing, cfg: &ArcConfig, alpha: &Laurent) -> Result<ArcClass> {
    let ctx = ring.field();
    if !alpha.abs_below(0)? {
        return invalid("alpha must lie in T");
    }
    let level = cfg.level();
    let Some(ball) = farey_locate(ring, level, alpha)? else {
        return Err(Error::Identity(format!(
            "alpha not covered by the dissection at level {level}"
        )));
    };
    let dist = alpha
        .mul_poly(ctx, &ball.r)
        .sub(ctx, &Laurent::from_poly(&ball.a));
    let dist_log = dist.abs_log()?;
    let deg_r = ball.r.deg().unwrap() as i64;
    let modulus_ok = cfg.modulus_ok(deg_r);
    let radius2 = cfg.radius2(deg_r);
    let major = modulus_ok && dist_log.is_none_or(|d| 2 * d < radius2);
    Ok(ArcClass {
        ball,
        major,
        dist_log,
        radius2,
        modulus_ok,
    })
}

/// Every `alpha in T` with digits down to `-depth`, in index order.
pub fn representatives(ctx: &FieldCtx, depth: u32) -> Result<Vec<Laurent>> {
    let q = ctx.q() as u64;
    (0..q.pow(depth))
        .map(|mut code| {
            let mut digits = Vec::with_capacity(depth as usize);
            for _ in 0..depth {
                digits.push(ctx.element((code % q) as usize)?);
                code /= q;
            }
            Ok(Laurent::exact(-(depth as i64), digits))
        })
        .collect()
}

/// Minor-arc audit of `T(alpha)` over a grid of representatives.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylAudit {
    pub b: u32,
    pub depth: u32,
    pub reps: u64,
    pub major: u64,
    pub minor: u64,
    /// Every representative lies in exactly one Dirichlet ball.
    pub partition_ok: bool,
    /// `max log_q |T(alpha)|` over the minor representatives.
    pub max_minor_log: f64,
    /// Largest `delta` with `|T| <= q^{B(1 - delta) + 1}` on the minor arcs.
    pub delta: f64,
}

impl WeylAudit {
    pub fn bound_holds(&self) -> bool {
        self.delta > 0.0
    }
}

pub fn weyl_audit(ring: &PolyRing, b: u32, depth: u32) -> Result<WeylAudit> {
    let ctx = ring.field();
    let cfg = ArcConfig::Waring { b };
    let balls = farey_dissect(ring, cfg.level())?;
    let q = ring.q() as f64;
    let (mut major, mut minor, mut partition_ok, mut max_log) =
        (0u64, 0u64, true, f64::NEG_INFINITY);
    let reps = representatives(ctx, depth)?;
    for alpha in &reps {
        let mut hits = 0;
        for ball in &balls {
            if ball.contains(ring, alpha)? {
                hits += 1;
            }
        }
        partition_ok &= hits == 1;
        let class = arc_classify(ring, &cfg, alpha)?;
        if class.major {
            major += 1;
            continue;
        }
        minor += 1;
        let t = weyl_sum(ctx, alpha, b)?;
        let sq = cyc_abs_sq(&t).value.to_f64().unwrap_or(f64::INFINITY);
        let lg = if sq > 0.0 {
            0.5 * libm::log(sq) / libm::log(q)
        } else {
            f64::NEG_INFINITY
        };
        max_log = max_log.max(lg);
    }
    let delta = if minor == 0 {
        1.0
    } else {
        1.0 - (max_log - 1.0) / b as f64
    };
    Ok(WeylAudit {
        b,
        depth,
        reps: reps.len() as u64,
        major,
        minor,
        partition_ok,
        max_minor_log: max_log,
        delta,
    })
}

/// Partial sums of a singular series, one per truncation level.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesReport {
    /// `levels[k]` is the log-size of the truncation for `partial[k]`.
    pub levels: Vec<i64>,
    pub partial: Vec<CycNum>,
    /// Each partial sum equals its complex conjugate.
    pub real: bool,
}

impl SeriesReport {
    /// `partial[k] - partial[k-1]`, starting with `partial[0]`.
    pub fn increments(&self) -> Vec<CycNum> {
        let p = self.partial.first().map_or(2, CycNum::p);
        let mut prev = CycNum::zero(p);
        self.partial
            .iter()
            .map(|x| {
                let d = x - &prev;
                prev = x.clone();
                d
            })
            .collect()
    }

    /// The last partial sum as a float (real part under the standard embedding).
    pub fn value_f64(&self) -> f64 {
        self.partial.last().map_or(0.0, |x| x.to_complex(1).0)
    }
}

fn cubic_sum(ring: &PolyRing, r: &Poly, a: &Poly) -> Result<CycNum> {
    Ok(poly_sum(
        ring,
        r,
        &[Poly::zero(), Poly::zero(), Poly::zero(), a.clone()],
    )?
    .into())
}

/// `|r|^{-n} sum'_a S_r(a)^n psi(-a P / r)` with `S_r(a) = sum_{|x|<|r|} psi(a x^3 / r)`.
pub fn waring_series_term(ring: &PolyRing, n: u32, p: &Poly, r: &Poly) -> Result<CycNum> {
    let pr = ring.p();
    let mut acc = CycNum::zero(pr);
    for a in ring.units_mod(r) {
        let s = cubic_sum(ring, r, &a)?;
        let e = psi_frac(ring, &ring.neg(&ring.mul(&a, p)), r)?;
        acc = &acc + &(&s.pow(n) * &CycNum::zeta_pow(pr, e as u64));
    }
    Ok(acc.scale(&rat_pow(ring.q(), -(n as i64) * r.deg().unwrap() as i64)))
}

fn partial_sums<F>(
    ring: &PolyRing,
    levels: Vec<i64>,
    max_deg: impl Fn(i64) -> i64,
    mut term: F,
) -> Result<SeriesReport>
where
    F: FnMut(&Poly) -> Result<CycNum>,
{
    let top = levels.iter().map(|&l| max_deg(l)).max().unwrap_or(-1);
    let mut by_deg = vec![CycNum::zero(ring.p()); (top + 1).max(0) as usize];
    if top >= 0 {
        for r in ring.monic_up_to(top as usize) {
            let d = r.deg().unwrap();
            by_deg[d] = &by_deg[d] + &term(&r)?;
        }
    }
    let mut partial = Vec::with_capacity(levels.len());
    for &l in &levels {
        let s = by_deg
            .iter()
            .take((max_deg(l) + 1).max(0) as usize)
            .fold(CycNum::zero(ring.p()), |acc, x| &acc + x);
        partial.push(s);
    }
    let real = partial.iter().all(|x| *x == x.conj());
    Ok(SeriesReport {
        levels,
        partial,
        real,
    })
}

/// `S(P, q^y)` for `y = 0..=Y`, summing over monic `|r| <= q^y`.
pub fn sing_series_waring(ring: &PolyRing, n: u32, p: &Poly, y: u32) -> Result<SeriesReport> {
    if n == 0 {
        return invalid("n must be positive");
    }
    let rep = partial_sums(
        ring,
        (0..=y as i64).collect(),
        |l| l,
        |r| waring_series_term(ring, n, p, r),
    )?;
    if !rep.real {
        return Err(Error::Identity(
            "singular series partial sum is not real".into(),
        ));
    }
    Ok(rep)
}

/// Congruence data `x = M u + b` for weak approximation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WaData {
    pub form: DiagonalForm,
    pub m: Poly,
    pub b: Vec<Poly>,
}

impl WaData {
    pub fn new(form: DiagonalForm, m: Poly, b: Vec<Poly>) -> Result<WaData> {
        if m.is_zero() || b.len() != form.n() {
            return invalid("need M != 0 and one residue per coordinate");
        }
        if b.iter().any(|bi| bi.len() > m.deg().unwrap()) {
            return invalid("residues must satisfy |b| < |M|");
        }
        Ok(WaData { form, m, b })
    }

    /// `sum_{|x|<|r|} psi(a F(M x + b) / r)`.
    pub fn s_tilde(&self, r: &Poly, a: &Poly) -> Result<CycNum> {
        let ring = self.form.ring();
        let m = &self.m;
        let three = ring.from_int(3);
        let mut prod = CycNum::one(ring.p());
        for (f, bi) in self.form.coeffs().iter().zip(&self.b) {
            let af = ring.mul(a, f);
            // a F_i (M x + b)^3 expanded in x
            let g = [
                ring.mul(&af, &ring.cube(bi)),
                ring.mul(&af, &ring.mul(&three, &ring.mul(m, &ring.mul(bi, bi)))),
                ring.mul(&af, &ring.mul(&three, &ring.mul(&ring.mul(m, m), bi))),
                ring.mul(&af, &ring.cube(m)),
            ];
            let g: Vec<Poly> = g.iter().map(|x| ring.rem(x, r)).collect();
            prod = &prod * &CycNum::from(poly_sum(ring, r, &g)?);
            if prod.is_zero() {
                break;
            }
        }
        Ok(prod)
    }

    /// `|r|^{-n} sum'_a S~_r(a)`.
    pub fn series_term(&self, r: &Poly) -> Result<CycNum> {
        let ring = self.form.ring();
        let mut acc = CycNum::zero(ring.p());
        for a in ring.units_mod(r) {
            acc = &acc + &self.s_tilde(r, &a)?;
        }
        Ok(acc.scale(&rat_pow(
            ring.q(),
            -(self.form.n() as i64) * r.deg().unwrap() as i64,
        )))
    }

    /// `S~_{r1 r2}(a) = S~_{r1}(a r2^{-1}) S~_{r2}(a r1^{-1})` for coprime monic `r1, r2`.
    pub fn multiplicativity_holds(&self, r1: &Poly, r2: &Poly, a: &Poly) -> Result<bool> {
        let ring = self.form.ring();
        let (Some(i2), Some(i1)) = (ring.inv_mod(r2, r1), ring.inv_mod(r1, r2)) else {
            return invalid("moduli must be coprime");
        };
        let lhs = self.s_tilde(&ring.mul(r1, r2), a)?;
        let rhs = &self.s_tilde(r1, &ring.mul_mod(a, &i2, r1))?
            * &self.s_tilde(r2, &ring.mul_mod(a, &i1, r2))?;
        Ok(lhs == rhs)
    }
}

/// `S(q^y)` for `y = 1..=Y`, summing over monic `|r| < q^y`.
pub fn sing_series_wa(data: &WaData, y: u32) -> Result<SeriesReport> {
    partial_sums(
        data.form.ring(),
        (1..=y as i64).collect(),
        |l| l - 1,
        |r| data.series_term(r),
    )
}

/// `R meas{x : |x_i - c_i| < q^rho, |sum F_i x_i^3 - nu| < 1/R}` with `R = q^k`.
///
/// Each coordinate is enumerated at a precision where `F_i x_i^3` is
/// constant modulo `t^{-k}`; the tuples are then matched by hashing the
/// sums of the first half.
pub fn local_density(
    ring: &PolyRing,
    coeffs: &[Poly],
    centers: &[Laurent],
    radius_log: i64,
    nu: &Laurent,
    k: i64,
    budget: u64,
) -> Result<BigRational> {
    local_density_at(ring, coeffs, centers, radius_log, nu, k, 0, budget)
}

#[allow(clippy::too_many_arguments)]
fn local_density_at(
    ring: &PolyRing,
    coeffs: &[Poly],
    centers: &[Laurent],
    radius_log: i64,
    nu: &Laurent,
    k: i64,
    extra: i64,
    budget: u64,
) -> Result<BigRational> {
    let ctx = ring.field();
    let n = coeffs.len();
    if n == 0 || centers.len() != n {
        return invalid("need one center per coefficient");
    }
    let mut m = -radius_log;
    for (f, c) in coeffs.iter().zip(centers) {
        let Some(h) = f.abs_log() else {
            return invalid("coefficients must be nonzero");
        };
        let s = c.abs_log()?.unwrap_or(i64::MIN / 4).max(radius_log - 1);
        m = m.max(k + h + 2 * s);
    }
    m += extra;
    let free = (m + radius_log) as u32;
    let q = ring.q() as u64;
    let per = q
        .checked_pow(free)
        .ok_or_else(|| Error::Budget("coordinate grid too fine".into()))?;
    let half = n.div_ceil(2);
    let left_work = per.checked_pow(half as u32).unwrap_or(u64::MAX);
    if left_work > budget {
        return Err(Error::Budget(format!(
            "density needs {left_work} partial sums, budget is {budget}"
        )));
    }
    let target = nu.shift(k).poly_part()?;
    let lists: Vec<Vec<Poly>> = coeffs
        .iter()
        .zip(centers)
        .map(|(f, c)| {
            let base = truncate_exact(c, radius_log)?;
            let fl = Laurent::from_poly(f);
            (0..per)
                .map(|mut code| {
                    let mut digits = Vec::with_capacity(free as usize);
                    for _ in 0..free {
                        digits.push(ctx.element((code % q) as usize)?);
                        code /= q;
                    }
                    let x = base.add(ctx, &Laurent::exact(-m, digits));
                    fl.mul(ctx, &x.mul(ctx, &x).mul(ctx, &x))
                        .shift(k)
                        .poly_part()
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let sums = |part: &[Vec<Poly>]| -> HashMap<Poly, u64> {
        let mut acc: HashMap<Poly, u64> = HashMap::new();
        acc.insert(Poly::zero(), 1);
        for list in part {
            let mut next: HashMap<Poly, u64> = HashMap::new();
            for (s, cnt) in &acc {
                for v in list {
                    *next.entry(ring.add(s, v)).or_insert(0) += cnt;
                }
            }
            acc = next;
        }
        acc
    };
    let left = sums(&lists[..half]);
    let right = sums(&lists[half..]);
    let mut count = 0u64;
    for (s, cnt) in &right {
        if let Some(l) = left.get(&ring.sub(&target, s)) {
            count += l * cnt;
        }
    }
    Ok(BigRational::from_integer(count.into()) * rat_pow(ring.q(), k - n as i64 * m))
}

/// `c` with digits below `e` dropped.
fn truncate_exact(c: &Laurent, e: i64) -> Result<Laurent> {
    let Some(top) = c.top() else {
        return Ok(Laurent::zero());
    };
    if top < e {
        return Ok(Laurent::zero());
    }
    let digits = (e..=top).map(|i| c.digit(i)).collect::<Result<Vec<_>>>()?;
    Ok(Laurent::exact(e, digits))
}

/// `|grad F(x0)| = max_i |3 F_i x0_i^2|` as a log, `None` when it vanishes.
pub fn gradient_log(form: &DiagonalForm, x0: &[Laurent]) -> Result<Option<i64>> {
    let ring = form.ring();
    let ctx = ring.field();
    let three = ring.from_int(3);
    let mut best = None;
    for (f, x) in form.coeffs().iter().zip(x0) {
        let g = x.mul(ctx, x).mul_poly(ctx, &ring.mul(&three, f));
        best = best.max(g.abs_log()?);
    }
    Ok(best)
}

/// The weak-approximation singular integral and its truncations.
#[derive(Clone, Debug, PartialEq)]
pub struct SingIntegral {
    /// `1 / (|grad F(x0)| N^{n-1})`.
    pub closed: BigRational,
    /// `(Y, I(q^Y))` for the requested levels.
    pub truncated: Vec<(i64, BigRational)>,
    /// Smallest `Y` with `q^Y >= H_F N / |grad F(x0)|`.
    pub threshold: i64,
}

impl SingIntegral {
    /// Truncations past the threshold equal the closed form.
    pub fn stable(&self) -> bool {
        self.truncated
            .iter()
            .filter(|(y, _)| *y >= self.threshold)
            .all(|(_, v)| *v == self.closed)
    }
}

/// Closed form of the singular integral for the weight `|x - x0| < q^{-N}`.
pub fn sing_integral_wa(form: &DiagonalForm, x0: &[Laurent], n_log: i64) -> Result<BigRational> {
    let ctx = form.field();
    if x0.len() != form.n() || n_log < 0 {
        return invalid("x0 must match the form and N >= 0");
    }
    let Some(g) = gradient_log(form, x0)? else {
        return invalid("x0 is singular: grad F(x0) = 0");
    };
    let mut val = Laurent::zero();
    for (f, x) in form.coeffs().iter().zip(x0) {
        val = val.add(ctx, &x.mul(ctx, x).mul(ctx, x).mul_poly(ctx, f));
    }
    if !val.abs_below(g - n_log)? {
        return invalid("F(x0) is too large for the ball around x0 to meet F = 0");
    }
    Ok(rat_pow(form.ring().q(), -g - (form.n() as i64 - 1) * n_log))
}

/// `I(q^Y) = int_{|gamma| < H_F^{-1} q^Y} int w~(x) psi(gamma F(x)) dx d gamma`.
pub fn sing_integral_wa_truncated(
    form: &DiagonalForm,
    x0: &[Laurent],
    n_log: i64,
    y: i64,
    budget: u64,
) -> Result<BigRational> {
    let centers: Vec<Laurent> = x0.to_vec();
    local_density(
        form.ring(),
        form.coeffs(),
        &centers,
        -n_log,
        &Laurent::zero(),
        y - form.height_log(),
        budget,
    )
}

/// Closed form plus truncations at `Y in ys`.
pub fn sing_integral_report(
    form: &DiagonalForm,
    x0: &[Laurent],
    n_log: i64,
    ys: &[i64],
    budget: u64,
) -> Result<SingIntegral> {
    let closed = sing_integral_wa(form, x0, n_log)?;
    let g = gradient_log(form, x0)?.unwrap_or(0);
    let threshold = form.height_log() + n_log - g;
    let truncated = ys
        .iter()
        .map(|&y| Ok((y, sing_integral_wa_truncated(form, x0, n_log, y, budget)?)))
        .collect::<Result<_>>()?;
    Ok(SingIntegral {
        closed,
        truncated,
        threshold,
    })
}

/// `sigma(k) = q^k meas{y in T^n : |y_1^3 + ... + y_n^3 - P t^{-3B}| < q^{-k}}`.
pub fn sigma_inf(
    ring: &PolyRing,
    n: usize,
    p: &Poly,
    b: u32,
    k: i64,
    budget: u64,
) -> Result<BigRational> {
    let nu = Laurent::from_poly(p).shift(-3 * b as i64);
    local_density(
        ring,
        &vec![Poly::one(); n],
        &vec![Laurent::zero(); n],
        0,
        &nu,
        k,
        budget,
    )
}

/// Exact count against the major-arc prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct WaringReport {
    pub n: usize,
    pub p: Poly,
    pub b: u32,
    /// `P` lies in the additive closure of cubes.
    pub in_closure: bool,
    pub r_n: u64,
    pub series: SeriesReport,
    /// `(k, sigma(k))` for the computed levels.
    pub sigma: Vec<(i64, BigRational)>,
    /// `S(P, q^Y) sigma q^{B(n-3)}` with the deepest `sigma`.
    pub prediction: CycNum,
    pub ratio: f64,
}

impl WaringReport {
    /// `R_n(P) >= 1` when `P` is a sum of cubes; `None` when obstructed.
    pub fn positive(&self) -> Option<bool> {
        self.in_closure.then_some(self.r_n >= 1)
    }
}

/// Counts `R_n(P)` exactly and evaluates the truncated main term.
pub fn waring_report(
    ring: &PolyRing,
    n: usize,
    p: &Poly,
    y: Option<u32>,
    sigma_levels: &[i64],
    budget: u64,
) -> Result<WaringReport> {
    let b = waring_b(p, false);
    let in_closure = jq3_closure(ring, p.deg().unwrap_or(0))?.contains(p);
    let r_n = count_r(ring, n, p, Method::MeetInMiddle, budget)?.value;
    let series = sing_series_waring(ring, n as u32, p, y.unwrap_or(b))?;
    let sigma: Vec<(i64, BigRational)> = sigma_levels
        .iter()
        .map(|&k| Ok((k, sigma_inf(ring, n, p, b, k, budget)?)))
        .collect::<Result<_>>()?;
    let s_last = sigma
        .last()
        .map_or_else(BigRational::zero, |(_, v)| v.clone());
    let main = s_last * rat_pow(ring.q(), b as i64 * (n as i64 - 3));
    let prediction = series
        .partial
        .last()
        .cloned()
        .unwrap_or_else(|| CycNum::zero(ring.p()))
        .scale(&main);
    let pred = prediction.to_complex(1).0;
    let ratio = if pred != 0.0 {
        r_n as f64 / pred
    } else {
        f64::NAN
    };
    Ok(WaringReport {
        n,
        p: p.clone(),
        b,
        in_closure,
        r_n,
        series,
        sigma,
        prediction,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Fq;

    fn ring(q: u32) -> PolyRing {
        PolyRing::new(FieldCtx::with_q(q).unwrap())
    }

    #[test]
    fn classify_basics() {
        let r = ring(2);
        let cfg = ArcConfig::Waring { b: 2 };
        let c = arc_classify(&r, &cfg, &Laurent::zero()).unwrap();
        assert!(c.major && c.ball.r.is_one() && c.ball.a.is_zero());
        // (t^2+1)(t^-1 + t^-3) = t + t^-3, so the ball is t/(t^2+1) at distance q^-3
        let a = Laurent::parse(r.field(), "t^-1+t^-3").unwrap();
        let c = arc_classify(&r, &cfg, &a).unwrap();
        assert_eq!(c.ball.r, r.parse("t^2+1").unwrap());
        assert_eq!(c.ball.a, Poly::t());
        assert_eq!(c.dist_log, Some(-3));
        assert!(!c.major);
        assert!(c.witness(&r).is_some());
    }

    #[test]
    fn audit_partitions() {
        let r = ring(2);
        let a = weyl_audit(&r, 2, 5).unwrap();
        assert_eq!(a.reps, 32);
        assert!(a.partition_ok);
        assert_eq!(a.major + a.minor, 32);
        assert!(a.minor > 0 && a.bound_holds());
    }

    #[test]
    fn waring_series_small() {
        let r = ring(2);
        let rep = sing_series_waring(&r, 7, &Poly::t(), 3).unwrap();
        assert_eq!(rep.partial[0], CycNum::one(2));
        assert_eq!(rep.partial.len(), 4);
        assert!(rep.real);
        let r5 = ring(5);
        let rep = sing_series_waring(&r5, 4, &r5.parse("t+2").unwrap(), 1).unwrap();
        assert!(rep.real);
    }

    #[test]
    fn wa_series_reduces_and_multiplies() {
        let r = ring(5);
        let form = DiagonalForm::parse(r.clone(), "1,1,2").unwrap();
        let trivial = WaData::new(form.clone(), Poly::one(), vec![Poly::zero(); 3]).unwrap();
        let m = r.parse("t^2+1").unwrap();
        for a in r.units_mod(&m) {
            let direct = (0..3).fold(CycNum::one(5), |acc, i| {
                let g = [
                    Poly::zero(),
                    Poly::zero(),
                    Poly::zero(),
                    r.mul(&a, &form.coeffs()[i]),
                ];
                &acc * &CycNum::from(poly_sum(&r, &m, &g).unwrap())
            });
            assert_eq!(trivial.s_tilde(&m, &a).unwrap(), direct);
        }
        let data = WaData::new(
            form,
            r.parse("t").unwrap(),
            vec![Poly::one(), Poly::zero(), r.from_int(2)],
        )
        .unwrap();
        let (r1, r2) = (r.parse("t+1").unwrap(), r.parse("t^2+2").unwrap());
        for a in r.units_mod(&r.mul(&r1, &r2)).iter().take(40) {
            assert!(data.multiplicativity_holds(&r1, &r2, a).unwrap());
        }
        let rep = sing_series_wa(&data, 2).unwrap();
        assert_eq!(rep.partial[0], CycNum::one(5));
        assert!(rep.real);
    }

    #[test]
    fn singular_integral_closed_form() {
        let r = ring(2);
        let form = DiagonalForm::parse(r.clone(), "1,1,1,1,1,1,1").unwrap();
        let mut x0 = vec![Laurent::zero(); 7];
        x0[0] = Laurent::monomial(Fq::ONE, 0);
        x0[1] = Laurent::monomial(Fq::ONE, 0);
        let closed = sing_integral_wa(&form, &x0, 1).unwrap();
        assert_eq!(closed, rat_pow(2, -6));
        let rep = sing_integral_report(&form, &x0, 1, &[1, 2, 3], 1 << 22).unwrap();
        assert_eq!(rep.threshold, 1);
        assert!(rep.stable(), "{:?}", rep.truncated);
        // singular points are rejected
        assert!(sing_integral_wa(&form, &vec![Laurent::zero(); 7], 1).is_err());
    }

    #[test]
    fn density_depth_stable() {
        let r = ring(2);
        let nu = Laurent::parse(r.field(), "t^-4").unwrap();
        let c = vec![Laurent::zero(); 3];
        let f = vec![Poly::one(); 3];
        for k in 1..6 {
            let a = local_density_at(&r, &f, &c, 0, &nu, k, 0, 1 << 20).unwrap();
            let b = local_density_at(&r, &f, &c, 0, &nu, k, 1, 1 << 20).unwrap();
            assert_eq!(a, b, "k = {k}");
        }
    }

    #[test]
    fn waring_cube_and_positive() {
        let r = ring(2);
        let p = r.parse("t^3").unwrap();
        let rep = waring_report(&r, 7, &p, Some(1), &[3], 1 << 22).unwrap();
        assert!(rep.r_n >= 7);
        let p = r.parse("t^4+t").unwrap();
        let rep = waring_report(&r, 7, &p, None, &[4], 1 << 22).unwrap();
        assert_eq!(rep.positive(), Some(true));
        assert_eq!(rep.series.partial.len(), 4);
    }
}
