use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::linform::LinForm;
use super::monomial::{Monomial, MAX_VARS};
use crate::error::{Error, Result};
use crate::rational::Rat;

/// Sparse polynomial with exact rational coefficients in the spectral
/// variables `ζ_1, …, ζ_{l+1}`. Zero coefficients are never stored and
/// iteration follows the graded lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ZPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rat>,
}

fn add_term(map: &mut BTreeMap<Monomial, Rat>, m: Monomial, c: Rat) {
    if c.is_zero() {
        return;
    }
    match map.entry(m) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let s = o.get() + &c;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

impl ZPoly {
    pub fn zero(nvars: usize) -> ZPoly {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} spectral variables supported");
        ZPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rat) -> ZPoly {
        let mut p = ZPoly::zero(nvars);
        add_term(&mut p.terms, Monomial::ONE, c);
        p
    }

    pub fn one(nvars: usize) -> ZPoly {
        ZPoly::constant(nvars, Rat::ONE)
    }

    /// The coordinate function `ζ_{i+1}`.
    pub fn var(nvars: usize, i: usize) -> ZPoly {
        assert!(i < nvars);
        ZPoly::monomial(nvars, Monomial::var(i), Rat::ONE)
    }

    pub fn monomial(nvars: usize, m: Monomial, c: Rat) -> ZPoly {
        let mut p = ZPoly::zero(nvars);
        add_term(&mut p.terms, m, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rat)>>(nvars: usize, terms: I) -> ZPoly {
        let mut p = ZPoly::zero(nvars);
        for (m, c) in terms {
            add_term(&mut p.terms, m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rat> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, Rat> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.degree())
    }

    /// Degree in the single variable `i`.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(i)).max().unwrap_or(0)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn homogeneous_part(&self, d: u32) -> ZPoly {
        ZPoly {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(m, _)| m.degree() == d).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    /// Highest-degree homogeneous component.
    pub fn top_part(&self) -> ZPoly {
        match self.degree() {
            Some(d) => self.homogeneous_part(d),
            None => self.clone(),
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        add_term(&mut self.terms, m, c);
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, other: &ZPoly, c: &Rat) {
        debug_assert_eq!(self.nvars, other.nvars);
        if c.is_zero() {
            return;
        }
        for (m, a) in &other.terms {
            add_term(&mut self.terms, *m, a * c);
        }
    }

    /// `self += a * b`
    pub fn add_product(&mut self, a: &ZPoly, b: &ZPoly) {
        debug_assert_eq!(a.nvars, b.nvars);
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                add_term(&mut self.terms, *ma * *mb, ca * cb);
            }
        }
    }

    pub fn scale(&self, c: &Rat) -> ZPoly {
        if c.is_zero() {
            return ZPoly::zero(self.nvars);
        }
        ZPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect() }
    }

    pub fn mul_monomial(&self, m: Monomial) -> ZPoly {
        ZPoly { nvars: self.nvars, terms: self.terms.iter().map(|(k, a)| (*k * m, a.clone())).collect() }
    }

    pub fn mul_linform(&self, f: &LinForm) -> ZPoly {
        let mut out = ZPoly::zero(self.nvars);
        for (i, c) in f.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = Monomial::var(i);
            for (m, a) in &self.terms {
                add_term(&mut out.terms, *m * v, a * c);
            }
        }
        if !f.constant().is_zero() {
            out.add_scaled(self, f.constant());
        }
        out
    }

    pub fn pow(&self, e: u32) -> ZPoly {
        let mut acc = ZPoly::one(self.nvars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `p(ζ + t)`.
    pub fn shift(&self, t: &[Rat]) -> ZPoly {
        assert_eq!(t.len(), self.nvars);
        let mut cur = self.clone();
        for (i, ti) in t.iter().enumerate() {
            if ti.is_zero() || cur.is_zero() {
                continue;
            }
            let maxe = cur.degree_in(i) as usize;
            let powers: Vec<Rat> = std::iter::successors(Some(Rat::ONE), |p| Some(p * ti)).take(maxe + 1).collect();
            let binom = binomial_rows(maxe);
            let mut next = BTreeMap::new();
            for (m, c) in &cur.terms {
                let e = m.exp(i) as usize;
                if e == 0 {
                    add_term(&mut next, *m, c.clone());
                    continue;
                }
                for j in 0..=e {
                    let coef = c * &binom[e][j] * &powers[e - j];
                    add_term(&mut next, m.with_exp(i, j as u32), coef);
                }
            }
            cur.terms = next;
        }
        cur
    }

    /// Substitute the polynomial `s` for variable `i` (Horner in `ζ_i`).
    pub fn substitute_var(&self, i: usize, s: &ZPoly) -> ZPoly {
        let d = self.degree_in(i) as usize;
        let mut slices = vec![ZPoly::zero(self.nvars); d + 1];
        for (m, c) in &self.terms {
            slices[m.exp(i) as usize].add_term(m.with_exp(i, 0), c.clone());
        }
        let mut acc = ZPoly::zero(self.nvars);
        for slice in slices.into_iter().rev() {
            acc = &(&acc * s) + &slice;
        }
        acc
    }

    /// Exact quotient by a linear form using graded-lex term-order division.
    pub fn divide_by_linform(&self, f: &LinForm) -> Result<ZPoly> {
        let v = f.lead_var();
        debug_assert!(f.coeffs()[v].is_one());
        let tail: Vec<(Monomial, Rat)> = f
            .coeffs()
            .iter()
            .enumerate()
            .skip(v + 1)
            .filter(|(_, c)| !c.is_zero())
            .map(|(w, c)| (Monomial::var(w), c.clone()))
            .chain((!f.constant().is_zero()).then(|| (Monomial::ONE, f.constant().clone())))
            .collect();
        let mut rem = self.terms.clone();
        let mut quot = BTreeMap::new();
        while let Some((m, c)) = rem.pop_last() {
            let e = m.exp(v);
            if e == 0 {
                return Err(Error::NotDivisible);
            }
            let qm = m.with_exp(v, e - 1);
            for (tm, tc) in &tail {
                add_term(&mut rem, qm * *tm, -(&c * tc));
            }
            quot.insert(qm, c);
        }
        Ok(ZPoly { nvars: self.nvars, terms: quot })
    }

    /// Restriction to the hyperplane `f = 0` by eliminating the leading
    /// variable of `f`.
    pub fn restrict_to_hyperplane(&self, f: &LinForm) -> ZPoly {
        let v = f.lead_var();
        let mut sub = ZPoly::constant(self.nvars, -f.constant());
        for (w, c) in f.coeffs().iter().enumerate().skip(v + 1) {
            if !c.is_zero() {
                sub.add_term(Monomial::var(w), -c);
            }
        }
        self.substitute_var(v, &sub)
    }

    pub fn eval_exact(&self, z: &[Rat]) -> Rat {
        assert_eq!(z.len(), self.nvars);
        let mut acc = Rat::ZERO;
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, zi) in z.iter().enumerate() {
                let e = m.exp(i);
                if e > 0 {
                    t *= zi.pow(e as i32);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.nvars);
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = Complex64::new(c.to_f64(), 0.0);
            for (i, zi) in z.iter().enumerate() {
                let e = m.exp(i);
                if e > 0 {
                    t *= zi.powu(e);
                }
            }
            acc += t;
        }
        acc
    }

    /// Sum of absolute values of the terms at `z`, a scale for rounding error.
    pub fn eval_abs(&self, z: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().abs();
                for (i, zi) in z.iter().enumerate() {
                    t *= zi.norm().powi(m.exp(i) as i32);
                }
                t
            })
            .sum()
    }
}

/// Rows `0..=n` of Pascal's triangle as rationals.
pub(crate) fn binomial_rows(n: usize) -> Vec<Vec<Rat>> {
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(n + 1);
    for e in 0..=n {
        let mut row = vec![Rat::ONE; e + 1];
        for j in 1..e {
            row[j] = &rows[e - 1][j - 1] + &rows[e - 1][j];
        }
        rows.push(row);
    }
    rows
}

impl Add for &ZPoly {
    type Output = ZPoly;
    fn add(self, rhs: &ZPoly) -> ZPoly {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rat::ONE);
        out
    }
}

impl Sub for &ZPoly {
    type Output = ZPoly;
    fn sub(self, rhs: &ZPoly) -> ZPoly {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rat::ONE);
        out
    }
}

impl Mul for &ZPoly {
    type Output = ZPoly;
    fn mul(self, rhs: &ZPoly) -> ZPoly {
        let mut out = ZPoly::zero(self.nvars);
        out.add_product(self, rhs);
        out
    }
}

impl Neg for &ZPoly {
    type Output = ZPoly;
    fn neg(self) -> ZPoly {
        self.scale(&-Rat::ONE)
    }
}

impl fmt::Debug for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*{m:?}")?;
        }
        Ok(())
    }
}
