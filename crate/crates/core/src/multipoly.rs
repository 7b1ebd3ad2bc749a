//! Sparse multivariate polynomials with coefficients in `O`, used for the
//! symbolic identity checks in [`crate::dualform`].

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::poly::{Poly, PolyRing};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct MPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Poly>,
}

impl MPoly {
    pub(crate) fn zero(nvars: usize) -> MPoly {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub(crate) fn constant(nvars: usize, c: Poly) -> MPoly {
        let mut m = MPoly::zero(nvars);
        if !c.is_zero() {
            m.terms.insert(vec![0; nvars], c);
        }
        m
    }

    pub(crate) fn var(nvars: usize, i: usize) -> MPoly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut m = MPoly::zero(nvars);
        m.terms.insert(e, Poly::one());
        m
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, ring: &PolyRing, e: Vec<u32>, c: Poly) {
        let entry = self.terms.entry(e).or_insert_with(Poly::zero);
        *entry = ring.add(entry, &c);
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub(crate) fn add(&self, ring: &PolyRing, o: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.insert(ring, e.clone(), c.clone());
        }
        out
    }

    pub(crate) fn sub(&self, ring: &PolyRing, o: &MPoly) -> MPoly {
        self.add(ring, &o.scale(ring, &ring.from_int(-1)))
    }

    pub(crate) fn scale(&self, ring: &PolyRing, s: &Poly) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let v = ring.mul(c, s);
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    pub(crate) fn mul(&self, ring: &PolyRing, o: &MPoly) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert(ring, e, ring.mul(c1, c2));
            }
        }
        out
    }

    pub(crate) fn pow(&self, ring: &PolyRing, k: u32) -> MPoly {
        let mut out = MPoly::constant(self.nvars, Poly::one());
        for _ in 0..k {
            out = out.mul(ring, self);
        }
        out
    }

    /// Replaces `s_k^2` by `u_k` for every variable.
    pub(crate) fn reduce_squares(&self, ring: &PolyRing, u: &[Poly]) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut coef = c.clone();
            let mut red = e.clone();
            for (k, x) in red.iter_mut().enumerate() {
                coef = ring.mul(&coef, &ring.pow(&u[k], (*x / 2) as u64));
                *x %= 2;
            }
            out.insert(ring, red, coef);
        }
        out
    }

    /// The constant term, if the polynomial has no other terms.
    pub(crate) fn as_constant(&self) -> Option<Poly> {
        match self.terms.len() {
            0 => Some(Poly::zero()),
            1 => self.terms.get(&vec![0; self.nvars]).cloned(),
            _ => None,
        }
    }
}
