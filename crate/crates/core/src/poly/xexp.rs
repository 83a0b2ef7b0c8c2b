use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::monomial::MAX_VARS;
use crate::error::{Error, Result};
use crate::rational::Rat;

/// Integer vector with up to `MAX_VARS` components; unused trailing slots
/// are zero. Serves as x-exponent, lattice point and shift.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IVec(pub [i32; MAX_VARS]);

impl IVec {
    pub const ZERO: IVec = IVec([0; MAX_VARS]);

    pub fn from_slice(v: &[i32]) -> IVec {
        assert!(v.len() <= MAX_VARS);
        let mut a = [0; MAX_VARS];
        a[..v.len()].copy_from_slice(v);
        IVec(a)
    }

    pub fn unit(i: usize, scale: i32) -> IVec {
        let mut a = [0; MAX_VARS];
        a[i] = scale;
        IVec(a)
    }

    pub fn get(&self, i: usize) -> i32 {
        self.0[i]
    }

    pub fn to_vec(&self, dim: usize) -> Vec<i32> {
        self.0[..dim].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn scale(&self, s: i32) -> IVec {
        IVec(self.0.map(|c| c * s))
    }

    pub fn componentwise_max(&self, o: &IVec) -> IVec {
        IVec(std::array::from_fn(|i| self.0[i].max(o.0[i])))
    }

    pub fn componentwise_min(&self, o: &IVec) -> IVec {
        IVec(std::array::from_fn(|i| self.0[i].min(o.0[i])))
    }
}

impl Add for IVec {
    type Output = IVec;
    fn add(self, o: IVec) -> IVec {
        IVec(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for IVec {
    type Output = IVec;
    fn sub(self, o: IVec) -> IVec {
        IVec(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for IVec {
    type Output = IVec;
    fn neg(self) -> IVec {
        IVec(self.0.map(|c| -c))
    }
}

impl fmt::Debug for IVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// `Σ c_η X^η` with `X^η = exp(η_1 x_1 + … + η_l x_l + η_{l+1} v)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct XExpPoly {
    dim: usize,
    terms: BTreeMap<IVec, Rat>,
}

impl XExpPoly {
    pub fn zero(dim: usize) -> XExpPoly {
        assert!(dim <= MAX_VARS);
        XExpPoly { dim, terms: BTreeMap::new() }
    }

    pub fn monomial(dim: usize, eta: IVec, c: Rat) -> XExpPoly {
        let mut p = XExpPoly::zero(dim);
        p.add_term(eta, c);
        p
    }

    pub fn constant(dim: usize, c: Rat) -> XExpPoly {
        XExpPoly::monomial(dim, IVec::ZERO, c)
    }

    pub fn one(dim: usize) -> XExpPoly {
        XExpPoly::constant(dim, Rat::ONE)
    }

    /// `X^η - X^{-η}`, i.e. `2 sinh⟨η,x⟩`.
    pub fn sinh2(dim: usize, eta: IVec) -> XExpPoly {
        let mut p = XExpPoly::monomial(dim, eta, Rat::ONE);
        p.add_term(-eta, -Rat::ONE);
        p
    }

    /// `X^η + X^{-η}`, i.e. `2 cosh⟨η,x⟩`.
    pub fn cosh2(dim: usize, eta: IVec) -> XExpPoly {
        let mut p = XExpPoly::monomial(dim, eta, Rat::ONE);
        p.add_term(-eta, Rat::ONE);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (IVec, Rat)>>(dim: usize, it: I) -> XExpPoly {
        let mut p = XExpPoly::zero(dim);
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<IVec, Rat> {
        &self.terms
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

    pub fn coeff(&self, eta: &IVec) -> Rat {
        self.terms.get(eta).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, eta: IVec, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(eta) {
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

    pub fn add_scaled(&mut self, other: &XExpPoly, c: &Rat) {
        for (e, a) in &other.terms {
            self.add_term(*e, a * c);
        }
    }

    pub fn scale(&self, c: &Rat) -> XExpPoly {
        if c.is_zero() {
            return XExpPoly::zero(self.dim);
        }
        XExpPoly { dim: self.dim, terms: self.terms.iter().map(|(e, a)| (*e, a * c)).collect() }
    }

    /// Multiplication by the single exponential `X^η`.
    pub fn shift(&self, eta: IVec) -> XExpPoly {
        XExpPoly { dim: self.dim, terms: self.terms.iter().map(|(e, a)| (*e + eta, a.clone())).collect() }
    }

    pub fn pow(&self, e: u32) -> XExpPoly {
        let mut acc = XExpPoly::one(self.dim);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Replaces each coefficient `c_η` by `w(η) c_η`; derivatives act this way.
    pub fn map_weight(&self, w: impl Fn(&IVec) -> Rat) -> XExpPoly {
        XExpPoly::from_terms(self.dim, self.terms.iter().map(|(e, c)| (*e, c * &w(e))))
    }

    /// Componentwise bounding box of the exponents.
    pub fn bounding_box(&self) -> Option<(IVec, IVec)> {
        let mut it = self.terms.keys();
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), e| (lo.componentwise_min(e), hi.componentwise_max(e))))
    }

    /// Exact quotient `n / d`, peeling lexicographically leading exponents.
    /// A quotient term outside the Newton-box bound proves non-divisibility.
    pub fn divide(&self, d: &XExpPoly) -> Result<XExpPoly> {
        let (dlead, dc) = d.terms.iter().next_back().ok_or_else(|| Error::InvalidParams("division by zero".into()))?;
        let mut q = XExpPoly::zero(self.dim);
        let Some((nlo, nhi)) = self.bounding_box() else {
            return Ok(q);
        };
        let (dlo, dhi) = d.bounding_box().expect("nonzero divisor");
        let (qlo, qhi) = (nlo - dlo, nhi - dhi);
        let dinv = dc.recip();
        let mut rem = self.clone();
        while let Some((rlead, rc)) = rem.terms.iter().next_back().map(|(e, c)| (*e, c.clone())) {
            let qe = rlead - *dlead;
            if (0..self.dim).any(|i| qe.0[i] < qlo.0[i] || qe.0[i] > qhi.0[i]) {
                return Err(Error::NotDivisible);
            }
            let qc = &rc * &dinv;
            for (e, c) in &d.terms {
                rem.add_term(*e + qe, -(c * &qc));
            }
            q.add_term(qe, qc);
        }
        Ok(q)
    }

    /// Value at `x = (x_1, …, x_l, v)`.
    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|(e, c)| Self::exp_at(e, x) * c.to_f64()).sum()
    }

    pub fn exp_at(e: &IVec, x: &[Complex64]) -> Complex64 {
        x.iter().enumerate().map(|(i, xi)| xi * e.0[i] as f64).sum::<Complex64>().exp()
    }
}

/// Free-function form of [`XExpPoly::divide`].
pub fn xexp_divide(n: &XExpPoly, d: &XExpPoly) -> Result<XExpPoly> {
    n.divide(d)
}

impl Add for &XExpPoly {
    type Output = XExpPoly;
    fn add(self, o: &XExpPoly) -> XExpPoly {
        let mut out = self.clone();
        out.add_scaled(o, &Rat::ONE);
        out
    }
}

impl Sub for &XExpPoly {
    type Output = XExpPoly;
    fn sub(self, o: &XExpPoly) -> XExpPoly {
        let mut out = self.clone();
        out.add_scaled(o, &-Rat::ONE);
        out
    }
}

impl Mul for &XExpPoly {
    type Output = XExpPoly;
    fn mul(self, o: &XExpPoly) -> XExpPoly {
        let mut out = XExpPoly::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                out.add_term(*ea + *eb, ca * cb);
            }
        }
        out
    }
}

impl Neg for &XExpPoly {
    type Output = XExpPoly;
    fn neg(self) -> XExpPoly {
        self.scale(&-Rat::ONE)
    }
}

impl fmt::Debug for XExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})X^{:?}", &e.0[..self.dim])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x1(k: i32) -> IVec {
        IVec::from_slice(&[k, 0])
    }

    #[test]
    fn double_angle_division() {
        let n = XExpPoly::sinh2(2, x1(2));
        let d = XExpPoly::sinh2(2, x1(1));
        assert_eq!(n.divide(&d).unwrap(), XExpPoly::cosh2(2, x1(1)));
    }

    #[test]
    fn non_divisible() {
        let mut n = XExpPoly::monomial(2, x1(1), Rat::ONE);
        n.add_term(IVec::ZERO, Rat::ONE);
        let mut d = XExpPoly::monomial(2, x1(1), Rat::ONE);
        d.add_term(IVec::ZERO, -Rat::ONE);
        assert_eq!(n.divide(&d), Err(Error::NotDivisible));
    }

    #[test]
    fn evaluation_at_zero_sums_coefficients() {
        let p = XExpPoly::cosh2(2, x1(3));
        assert_eq!(p.eval(&[Complex64::new(0.0, 0.0); 2]), Complex64::new(2.0, 0.0));
    }

    fn arb_xexp() -> impl Strategy<Value = XExpPoly> {
        prop::collection::vec((-2i32..3, -2i32..3, -4i64..5), 0..5)
            .prop_map(|ts| XExpPoly::from_terms(2, ts.into_iter().map(|(a, b, c)| (IVec::from_slice(&[a, b]), Rat::from_int(c)))))
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_xexp(), b in arb_xexp(), c in arb_xexp()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn divide_inverts_multiply(a in arb_xexp(), b in arb_xexp()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!((&a * &b).divide(&b).unwrap(), a);
        }
    }
}
