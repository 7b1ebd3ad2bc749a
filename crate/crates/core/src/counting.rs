//! Point counters for diagonal cubic equations `sum_i F_i z_i^3 = target`.
//!
//! All counters share one engine: each coordinate ranges over an explicit
//! candidate list, values are digit vectors over `F_q` packed into `u128`
//! keys, and the count is either exhaustive or meet-in-the-middle.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use hashbrown::HashMap;

use crate::dualform::{lines_of, LineDesc};
use crate::error::{invalid, Error, Result};
use crate::expsums::DiagonalForm;
use crate::fields::{FieldCtx, Fq};
use crate::laurent::Laurent;
use crate::poly::{Poly, PolyRing};

/// Counting strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Exhaustive,
    MeetInMiddle,
}

/// An exact count and the engine that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub value: u64,
    pub method: Method,
}

/// Weight functions for [`count_nw`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Weight {
    /// Indicator of `{|x| = q^{-1}}` in the max-norm.
    Annulus,
    /// Indicator of `{|x - x0| < q^{-N}}`, optionally with `x = b mod M`.
    Box {
        center: Vec<Laurent>,
        n_log: i64,
        congruence: Option<(Poly, Vec<Poly>)>,
    },
}

/// The `u128` packing of digit vectors of fixed length.
#[derive(Clone, Copy, Debug)]
struct Packer {
    q: u128,
    len: usize,
}

impl Packer {
    fn new(q: u32, len: usize) -> Result<Packer> {
        let bits = (32 - (q - 1).leading_zeros()) as usize * len;
        if bits > 128 {
            return Err(Error::Unsupported(format!(
                "values of {len} digits over F_{q} do not fit a 128-bit key"
            )));
        }
        Ok(Packer { q: q as u128, len })
    }

    fn pack(&self, v: &[Fq]) -> u128 {
        v.iter()
            .rev()
            .fold(0u128, |acc, d| acc * self.q + d.index() as u128)
    }
}

/// `sum_i F_i z_i^3 = target` with `z_i` drawn from candidate lists.
#[derive(Clone, Debug)]
pub struct CubeSumEngine {
    ring: PolyRing,
    candidates: Vec<Vec<Poly>>,
    values: Vec<Vec<Vec<Fq>>>,
    target: Vec<Fq>,
    packer: Packer,
    split: usize,
}

fn digits(p: &Poly, len: usize) -> Vec<Fq> {
    (0..len).map(|k| p.coeff(k)).collect()
}

fn add_digits(ctx: &FieldCtx, a: &mut [Fq], b: &[Fq]) {
    for (x, &y) in a.iter_mut().zip(b) {
        *x = ctx.add(*x, y);
    }
}

fn sub_digits(ctx: &FieldCtx, a: &[Fq], b: &[Fq]) -> Vec<Fq> {
    a.iter().zip(b).map(|(&x, &y)| ctx.sub(x, y)).collect()
}

impl CubeSumEngine {
    pub fn new(
        ring: &PolyRing,
        coeffs: &[Poly],
        candidates: Vec<Vec<Poly>>,
        target: &Poly,
    ) -> Result<CubeSumEngine> {
        if coeffs.len() != candidates.len() || coeffs.is_empty() {
            return invalid("one candidate list per coefficient is required");
        }
        let mut len = target.len();
        for (f, list) in coeffs.iter().zip(&candidates) {
            let m = list.iter().map(Poly::len).max().unwrap_or(0);
            if m > 0 && !f.is_zero() {
                len = len.max(f.len() + 3 * (m - 1));
            }
        }
        let len = len.max(1);
        let packer = Packer::new(ring.q(), len)?;
        let values = coeffs
            .iter()
            .zip(&candidates)
            .map(|(f, list)| {
                list.iter()
                    .map(|z| digits(&ring.mul(f, &ring.cube(z)), len))
                    .collect()
            })
            .collect();
        let split = coeffs.len().div_ceil(2);
        Ok(CubeSumEngine {
            ring: ring.clone(),
            candidates,
            values,
            target: digits(target, len),
            packer,
            split,
        })
    }

    pub fn n(&self) -> usize {
        self.candidates.len()
    }

    fn sizes(&self, range: Range<usize>) -> u64 {
        self.candidates[range]
            .iter()
            .fold(1u64, |acc, l| acc.saturating_mul(l.len() as u64))
    }

    /// Number of tuples an exhaustive count visits.
    pub fn exhaustive_work(&self) -> u64 {
        self.sizes(0..self.n())
    }

    /// `(left table size, right probes)` for meet-in-the-middle.
    pub fn mitm_work(&self) -> (u64, u64) {
        (self.sizes(0..self.split), self.sizes(self.split..self.n()))
    }

    fn check_budget(&self, method: Method, budget: u64) -> Result<()> {
        let need = match method {
            Method::Exhaustive => self.exhaustive_work(),
            Method::MeetInMiddle => {
                let (a, b) = self.mitm_work();
                a.max(b)
            }
        };
        if need > budget {
            return Err(Error::Budget(format!(
                "{method:?} needs about {need} steps, budget is {budget}"
            )));
        }
        Ok(())
    }

    /// Calls `f(indices, sum)` for every tuple over coordinates `range`,
    /// where the `idx`-th tuple is in mixed radix with the first coordinate fastest.
    fn for_each_tuple<F: FnMut(&[usize], &[Fq])>(
        &self,
        range: Range<usize>,
        idx: Range<u64>,
        mut f: F,
    ) {
        let ctx = self.ring.field();
        let coords: Vec<usize> = range.collect();
        let len = self.packer.len;
        let k = coords.len();
        let mut pos = vec![0usize; k];
        let mut rest = idx.start;
        for (j, &c) in coords.iter().enumerate() {
            let m = self.candidates[c].len() as u64;
            if m == 0 {
                return;
            }
            pos[j] = (rest % m) as usize;
            rest /= m;
        }
        // partial[j] = sum over coordinates j.. of the chosen values
        let mut partial = vec![vec![Fq::ZERO; len]; k + 1];
        for j in (0..k).rev() {
            let mut v = partial[j + 1].clone();
            add_digits(ctx, &mut v, &self.values[coords[j]][pos[j]]);
            partial[j] = v;
        }
        for _ in idx {
            f(&pos, &partial[0]);
            let mut j = 0;
            while j < k {
                pos[j] += 1;
                if pos[j] < self.candidates[coords[j]].len() {
                    break;
                }
                pos[j] = 0;
                j += 1;
            }
            if j == k {
                break;
            }
            for i in (0..=j).rev() {
                let mut v = partial[i + 1].clone();
                add_digits(ctx, &mut v, &self.values[coords[i]][pos[i]]);
                partial[i] = v;
            }
        }
    }

    /// Exhaustive count over tuple indices in `range`.
    pub fn count_exhaustive_range(&self, range: Range<u64>) -> u64 {
        let mut hits = 0;
        self.for_each_tuple(0..self.n(), range, |_, s| {
            if s == self.target.as_slice() {
                hits += 1;
            }
        });
        hits
    }

    /// The left table `key -> multiplicity` of partial sums.
    pub fn left_table(&self) -> HashMap<u128, u64> {
        let mut table = HashMap::new();
        let total = self.sizes(0..self.split);
        self.for_each_tuple(0..self.split, 0..total, |_, s| {
            *table.entry(self.packer.pack(s)).or_insert(0) += 1;
        });
        table
    }

    /// Meet-in-the-middle count for right-hand tuple indices in `range`.
    pub fn count_probe_range(&self, table: &HashMap<u128, u64>, range: Range<u64>) -> u64 {
        let ctx = self.ring.field();
        let mut hits = 0;
        if self.split == self.n() {
            return if range.start == 0 && !range.is_empty() {
                table
                    .get(&self.packer.pack(&self.target))
                    .copied()
                    .unwrap_or(0)
            } else {
                0
            };
        }
        self.for_each_tuple(self.split..self.n(), range, |_, s| {
            let need = sub_digits(ctx, &self.target, s);
            hits += table.get(&self.packer.pack(&need)).copied().unwrap_or(0);
        });
        hits
    }

    /// Number of right-hand probes (1 when the right half is empty).
    pub fn probe_count(&self) -> u64 {
        self.sizes(self.split..self.n())
    }

    pub fn count(&self, method: Method, budget: u64) -> Result<CountReport> {
        self.check_budget(method, budget)?;
        let value = match method {
            Method::Exhaustive => self.count_exhaustive_range(0..self.exhaustive_work()),
            Method::MeetInMiddle => {
                let table = self.left_table();
                self.count_probe_range(&table, 0..self.probe_count())
            }
        };
        Ok(CountReport { value, method })
    }

    /// All solutions, in canonical order of the left indices within each probe.
    pub fn solutions(&self, budget: u64) -> Result<Vec<Vec<Poly>>> {
        self.check_budget(Method::MeetInMiddle, budget)?;
        let ctx = self.ring.field();
        let mut table: HashMap<u128, Vec<Vec<usize>>> = HashMap::new();
        let total = self.sizes(0..self.split);
        self.for_each_tuple(0..self.split, 0..total, |pos, s| {
            table
                .entry(self.packer.pack(s))
                .or_default()
                .push(pos.to_vec());
        });
        let mut out = Vec::new();
        let right: Vec<usize> = (self.split..self.n()).collect();
        let mut emit = |pos: &[usize], s: &[Fq]| {
            let need = sub_digits(ctx, &self.target, s);
            if let Some(lefts) = table.get(&self.packer.pack(&need)) {
                for l in lefts {
                    let mut x: Vec<Poly> = l
                        .iter()
                        .enumerate()
                        .map(|(i, &k)| self.candidates[i][k].clone())
                        .collect();
                    x.extend(
                        pos.iter()
                            .zip(&right)
                            .map(|(&k, &i)| self.candidates[i][k].clone()),
                    );
                    out.push(x);
                }
            }
        };
        if right.is_empty() {
            emit(&[], &vec![Fq::ZERO; self.packer.len]);
        } else {
            self.for_each_tuple(self.split..self.n(), 0..self.probe_count(), &mut emit);
        }
        Ok(out)
    }
}

fn box_list(ring: &PolyRing, b: u32) -> Vec<Poly> {
    ring.below_degree(b as usize).collect()
}

/// Engine for `N(P)` with `|x_i| < q^B`.
pub fn engine_n(form: &DiagonalForm, b: u32) -> Result<CubeSumEngine> {
    let ring = form.ring();
    let lists = vec![box_list(ring, b); form.n()];
    CubeSumEngine::new(ring, form.coeffs(), lists, &Poly::zero())
}

/// `N(P) = #{x : |x| < q^B, F(x) = 0}`.
pub fn count_n(form: &DiagonalForm, b: u32, method: Method, budget: u64) -> Result<CountReport> {
    engine_n(form, b)?.count(method, budget)
}

/// `N(w, P)` for `|P| = q^B`.
pub fn count_nw(
    form: &DiagonalForm,
    b: u32,
    w: &Weight,
    method: Method,
    budget: u64,
) -> Result<CountReport> {
    match w {
        Weight::Annulus => {
            let all = count_n(form, b, method, budget)?;
            let inner = if b == 0 {
                1
            } else {
                count_n(form, b - 1, method, budget)?.value
            };
            Ok(CountReport {
                value: all.value - inner,
                method,
            })
        }
        Weight::Box {
            center,
            n_log,
            congruence,
        } => {
            let p = Poly::monomial(Fq::ONE, b as usize);
            let (m, bv) = match congruence {
                Some((m, bv)) => (m.clone(), bv.clone()),
                None => (Poly::one(), vec![Poly::zero(); form.n()]),
            };
            count_congruence(form, &p, &m, &bv, center, *n_log, method, budget)
        }
    }
}

/// Candidates `z` with `|z - P x0| < q^{deg P - N}` and `z = b mod M`.
fn congruence_list(
    ring: &PolyRing,
    p: &Poly,
    m: &Poly,
    b: &Poly,
    x0: &Laurent,
    n_log: i64,
) -> Result<Vec<Poly>> {
    let ctx = ring.field();
    let d = p.deg().unwrap_or(0) as i64 - n_log;
    let c = x0.mul_poly(ctx, p);
    let low = d.min(0);
    for i in low..0 {
        if !c.digit(i)?.is_zero() {
            return Ok(Vec::new());
        }
    }
    let top = c.top().unwrap_or(-1).max(d);
    let fixed: Vec<Fq> = (0..=top.max(0))
        .map(|i| if i >= d { c.digit(i) } else { Ok(Fq::ZERO) })
        .collect::<Result<_>>()?;
    let base = Poly::from_coeffs(fixed);
    let free = d.max(0) as usize;
    let br = ring.rem(b, m);
    Ok(ring
        .below_degree(free)
        .map(|e| ring.add(&base, &e))
        .filter(|z| ring.rem(z, m) == br)
        .collect())
}

/// `#{x : F(Mx + b) = 0, |(Mx + b)/P - x0| < q^{-N}}`, counted over `z = Mx + b`.
#[allow(clippy::too_many_arguments)]
pub fn count_congruence(
    form: &DiagonalForm,
    p: &Poly,
    m: &Poly,
    b: &[Poly],
    x0: &[Laurent],
    n_log: i64,
    method: Method,
    budget: u64,
) -> Result<CountReport> {
    let ring = form.ring();
    if m.is_zero() || b.len() != form.n() || x0.len() != form.n() {
        return invalid("congruence data must match the form");
    }
    if b.iter().any(|bi| bi.len() > m.len() - 1 && !bi.is_zero()) {
        return invalid("congruence needs |b| < |M|");
    }
    let lists = (0..form.n())
        .map(|i| congruence_list(ring, p, m, &b[i], &x0[i], n_log))
        .collect::<Result<Vec<_>>>()?;
    CubeSumEngine::new(ring, form.coeffs(), lists, &Poly::zero())?.count(method, budget)
}

/// Totals for the line-excluded count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LineCount {
    pub total: u64,
    pub on_lines: u64,
    pub circ: u64,
}

/// `N(P)`, the points on the union of the lines of [`lines_of`] and `N°(P)`.
pub fn count_n_circ(
    form: &DiagonalForm,
    b: u32,
    budget: u64,
) -> Result<(LineCount, Vec<LineDesc>)> {
    let ring = form.ring();
    if ring.p() == 2 {
        return Err(Error::Unsupported(
            "line classification needs characteristic > 3".into(),
        ));
    }
    if form.n() != 4 {
        return invalid("count_n_circ needs n = 4");
    }
    let lines = lines_of(form)?;
    let sols = engine_n(form, b)?.solutions(budget)?;
    let on = sols
        .iter()
        .filter(|x| lines.iter().any(|l| l.contains(ring, x)))
        .count() as u64;
    let total = sols.len() as u64;
    Ok((
        LineCount {
            total,
            on_lines: on,
            circ: total - on,
        },
        lines,
    ))
}

/// Engine for Davenport's `M(P)`: `x_1^3+x_2^3+x_3^3 = x_4^3+x_5^3+x_6^3`.
pub fn engine_m(ring: &PolyRing, b: u32) -> Result<CubeSumEngine> {
    if ring.p() == 3 {
        return Err(Error::InvalidField(
            "characteristic 3 is excluded for cubic forms".into(),
        ));
    }
    let one = Poly::one();
    let neg = ring.neg(&one);
    let coeffs = [one.clone(), one.clone(), one, neg.clone(), neg.clone(), neg];
    CubeSumEngine::new(ring, &coeffs, vec![box_list(ring, b); 6], &Poly::zero())
}

/// `M(P) = sum_v cnt(v)^2` over three-cube sums `v`; exhaustive on request.
pub fn count_m(ring: &PolyRing, b: u32, method: Method, budget: u64) -> Result<CountReport> {
    let e = engine_m(ring, b)?;
    match method {
        Method::Exhaustive => e.count(method, budget),
        Method::MeetInMiddle => {
            e.check_budget(method, budget)?;
            let value = e.left_table().values().map(|c| c * c).sum();
            Ok(CountReport { value, method })
        }
    }
}

/// Waring's `B = ceil(deg P / 3) + 1`; the strict variant drops the `+1`.
pub fn waring_b(p: &Poly, strict: bool) -> u32 {
    let d = p.deg().unwrap_or(0) as u32;
    d.div_ceil(3) + if strict { 0 } else { 1 }
}

/// Engine for `R_n(P)` over `|x| < q^B`.
pub fn engine_r(ring: &PolyRing, n: usize, p: &Poly, b: u32) -> Result<CubeSumEngine> {
    if n == 0 {
        return invalid("R_n needs n >= 1");
    }
    if ring.p() == 3 {
        return Err(Error::InvalidField(
            "characteristic 3 is excluded for cubic forms".into(),
        ));
    }
    CubeSumEngine::new(ring, &vec![Poly::one(); n], vec![box_list(ring, b); n], p)
}

/// `R_n(P) = #{x : |x| < q^B, x_1^3 + ... + x_n^3 = P}` with Waring's `B`.
pub fn count_r(
    ring: &PolyRing,
    n: usize,
    p: &Poly,
    method: Method,
    budget: u64,
) -> Result<CountReport> {
    engine_r(ring, n, p, waring_b(p, false))?.count(method, budget)
}

/// The additive closure of cubes, restricted to degree `<= D`.
#[derive(Clone, Debug)]
pub struct Jq3 {
    ring: PolyRing,
    d: usize,
    width: usize,
    /// Echelon rows over `F_p`; `pivots[k]` is the highest nonzero coordinate of `rows[k]`.
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
    pub generators: usize,
}

impl Jq3 {
    fn coords(&self, a: &Poly) -> Vec<u32> {
        let ctx = self.ring.field();
        let h = ctx.h() as usize;
        let mut v = vec![0u32; self.width];
        for (k, &c) in a.coeffs().iter().enumerate() {
            for (j, x) in ctx.coords(c).into_iter().enumerate() {
                v[k * h + j] = x;
            }
        }
        v
    }

    fn reduce(&self, mut v: Vec<u32>) -> Vec<u32> {
        let p = self.ring.p();
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            if v[piv] != 0 {
                let f = v[piv];
                for (x, &r) in v.iter_mut().zip(row) {
                    *x = (*x + p - (f * r) % p) % p;
                }
            }
        }
        v
    }

    /// Whether `a` is a finite sum of cubes; `false` when `deg a > D`.
    pub fn contains(&self, a: &Poly) -> bool {
        if a.len() > self.d + 1 {
            return false;
        }
        self.reduce(self.coords(a)).iter().all(|&x| x == 0)
    }

    /// Dimension over `F_p` of the closure in degree `<= D`.
    pub fn dim(&self) -> usize {
        let h = self.ring.field().h() as usize;
        self.pivots
            .iter()
            .filter(|&&piv| piv < (self.d + 1) * h)
            .count()
    }

    /// All members of degree `<= D`, in canonical polynomial order.
    pub fn members(&self) -> Vec<Poly> {
        let mut out: Vec<Poly> = self
            .ring
            .below_degree(self.d + 1)
            .filter(|a| self.contains(a))
            .collect();
        out.sort();
        out
    }
}

/// `J_q^3[t]` in degree `<= D`, generated by cubes of degree `<= ceil(D/3)+1` polynomials.
pub fn jq3_closure(ring: &PolyRing, d: usize) -> Result<Jq3> {
    if ring.p() == 3 {
        return Err(Error::InvalidField(
            "characteristic 3 is excluded for cubic forms".into(),
        ));
    }
    let e = d.div_ceil(3) + 1;
    let ctx = ring.field();
    let h = ctx.h() as usize;
    let p = ring.p();
    let width = (3 * e + 1).max(d + 1) * h;
    let mut jq = Jq3 {
        ring: ring.clone(),
        d,
        width,
        rows: Vec::new(),
        pivots: Vec::new(),
        generators: 0,
    };
    for x in ring.below_degree(e + 1) {
        jq.generators += 1;
        let v = jq.reduce(jq.coords(&ring.cube(&x)));
        let Some(piv) = (0..width).rev().find(|&i| v[i] != 0) else {
            continue;
        };
        // normalize pivot to 1 (p is prime so inverses exist)
        let inv = (1..p).find(|&y| (y * v[piv]) % p == 1).expect("prime");
        let row: Vec<u32> = v.iter().map(|&x| (x * inv) % p).collect();
        // keep rows fully reduced at their pivots
        for (r, &pv) in jq.rows.iter_mut().zip(&jq.pivots) {
            let _ = pv;
            if r[piv] != 0 {
                let f = r[piv];
                for (a, &b) in r.iter_mut().zip(&row) {
                    *a = (*a + p - (f * b) % p) % p;
                }
            }
        }
        jq.rows.push(row);
        jq.pivots.push(piv);
    }
    // order rows by descending pivot so reduction runs from the top
    let mut order: Vec<usize> = (0..jq.rows.len()).collect();
    order.sort_by(|&a, &b| jq.pivots[b].cmp(&jq.pivots[a]));
    jq.rows = order.iter().map(|&i| jq.rows[i].clone()).collect();
    jq.pivots = order.iter().map(|&i| jq.pivots[i]).collect();
    Ok(jq)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BIG: u64 = 1 << 40;

    fn ring(q: u32) -> PolyRing {
        PolyRing::new(FieldCtx::with_q(q).unwrap())
    }

    fn form(q: u32, f: &str) -> DiagonalForm {
        DiagonalForm::parse(ring(q), f).unwrap()
    }

    #[test]
    fn small_counts() {
        let f = form(2, "1,1");
        for b in 0..5 {
            let want = 1u64 << b;
            assert_eq!(
                count_n(&f, b, Method::MeetInMiddle, BIG).unwrap().value,
                want
            );
            assert_eq!(count_n(&f, b, Method::Exhaustive, BIG).unwrap().value, want);
        }
        let f4 = form(2, "1,1,1,1");
        assert_eq!(
            count_n(&f4, 1, Method::MeetInMiddle, BIG).unwrap().value,
            count_n(&f4, 1, Method::Exhaustive, BIG).unwrap().value
        );
        assert!(count_n(&f4, 4, Method::Exhaustive, 10).is_err());
    }

    #[test]
    fn annulus_counts() {
        let f = form(2, "1,1");
        assert_eq!(
            count_nw(&f, 2, &Weight::Annulus, Method::MeetInMiddle, BIG)
                .unwrap()
                .value,
            2
        );
        assert_eq!(
            count_nw(&f, 0, &Weight::Annulus, Method::MeetInMiddle, BIG)
                .unwrap()
                .value,
            0
        );
    }

    #[test]
    fn congruence_counts() {
        let f = form(5, "1,1");
        let r = f.ring().clone();
        let p = r.parse("t^2").unwrap();
        let zero = vec![Laurent::zero(), Laurent::zero()];
        let all = count_congruence(
            &f,
            &p,
            &Poly::one(),
            &[Poly::zero(), Poly::zero()],
            &zero,
            0,
            Method::Exhaustive,
            BIG,
        )
        .unwrap()
        .value;
        assert_eq!(all, count_n(&f, 2, Method::Exhaustive, BIG).unwrap().value);
        let b = vec![Poly::one(), r.from_int(-1)];
        let got = count_congruence(&f, &p, &Poly::t(), &b, &zero, 0, Method::MeetInMiddle, BIG)
            .unwrap()
            .value;
        // x_2 = -x_1 is forced (unique cube roots), and x_1 = 1 mod t leaves 5 choices
        assert_eq!(got, 5);
        let none = vec![Poly::one(), Poly::one()];
        assert_eq!(
            count_congruence(&f, &p, &Poly::t(), &none, &zero, 0, Method::Exhaustive, BIG)
                .unwrap()
                .value,
            0
        );
    }

    #[test]
    fn davenport_small() {
        let r = ring(2);
        assert_eq!(count_m(&r, 0, Method::MeetInMiddle, BIG).unwrap().value, 1);
        for b in 1..=2 {
            let a = count_m(&r, b, Method::MeetInMiddle, BIG).unwrap().value;
            assert_eq!(a, count_m(&r, b, Method::Exhaustive, BIG).unwrap().value);
            assert!(a >= 1 << (3 * b));
        }
    }

    #[test]
    fn waring_counts() {
        let r = ring(2);
        assert_eq!(
            count_r(&r, 1, &Poly::zero(), Method::MeetInMiddle, BIG)
                .unwrap()
                .value,
            1
        );
        assert_eq!(
            count_r(&r, 1, &r.parse("t^3").unwrap(), Method::MeetInMiddle, BIG)
                .unwrap()
                .value,
            1
        );
        let p = r.parse("t^4+t").unwrap();
        assert!(count_r(&r, 7, &p, Method::MeetInMiddle, BIG).unwrap().value > 0);
    }

    #[test]
    fn closure() {
        let r2 = ring(2);
        let j = jq3_closure(&r2, 5).unwrap();
        assert!(j.contains(&Poly::zero()));
        assert!(j.contains(&Poly::one()));
        let r7 = ring(7);
        let j7 = jq3_closure(&r7, 0).unwrap();
        assert!(r7
            .field()
            .elements()
            .all(|c| j7.contains(&Poly::constant(c))));
    }

    #[test]
    fn line_accounting() {
        let f = form(5, "1,1,1,1");
        let (lc, lines) = count_n_circ(&f, 1, BIG).unwrap();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lc.total,
            count_n(&f, 1, Method::Exhaustive, BIG).unwrap().value
        );
        assert_eq!(lc.total, lc.on_lines + lc.circ);
        assert!(count_n_circ(&form(2, "1,1,1,1"), 1, BIG).is_err());
    }
}
