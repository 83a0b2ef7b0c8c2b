use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::monomial::Monomial;
use super::xexp::{IVec, XExpPoly};
use super::zpoly::ZPoly;
use crate::rational::Rat;

/// `R(ζ, x) e^{⟨z,x⟩}` with `R = Σ_η R_η(ζ) X^η`. The prefactor is implicit.
///
/// Stored x-exponent first: each x-exponent maps to a nonzero polynomial in
/// the spectral variables.
#[derive(Clone, PartialEq, Eq)]
pub struct QuasiPoly {
    nvars: usize,
    body: BTreeMap<IVec, ZPoly>,
}

impl QuasiPoly {
    pub fn zero(nvars: usize) -> QuasiPoly {
        QuasiPoly { nvars, body: BTreeMap::new() }
    }

    /// `p(ζ) e^{⟨z,x⟩}`.
    pub fn from_zpoly(p: ZPoly) -> QuasiPoly {
        let mut q = QuasiPoly::zero(p.nvars());
        q.insert(IVec::ZERO, p);
        q
    }

    pub fn from_parts<I: IntoIterator<Item = (IVec, ZPoly)>>(nvars: usize, parts: I) -> QuasiPoly {
        let mut q = QuasiPoly::zero(nvars);
        for (e, p) in parts {
            q.add_part(e, &p);
        }
        q
    }

    fn insert(&mut self, e: IVec, p: ZPoly) {
        if !p.is_zero() {
            self.body.insert(e, p);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn body(&self) -> &BTreeMap<IVec, ZPoly> {
        &self.body
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_empty()
    }

    pub fn part(&self, e: &IVec) -> Option<&ZPoly> {
        self.body.get(e)
    }

    /// `self += p X^e`
    pub fn add_part(&mut self, e: IVec, p: &ZPoly) {
        if p.is_zero() {
            return;
        }
        match self.body.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(p.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + p;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &QuasiPoly) -> QuasiPoly {
        let mut out = self.clone();
        for (e, p) in &other.body {
            out.add_part(*e, p);
        }
        out
    }

    pub fn sub(&self, other: &QuasiPoly) -> QuasiPoly {
        let mut out = self.clone();
        for (e, p) in &other.body {
            out.add_part(*e, &-p);
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> QuasiPoly {
        QuasiPoly::from_parts(self.nvars, self.body.iter().map(|(e, p)| (*e, p.scale(c))))
    }

    pub fn mul_zpoly(&self, q: &ZPoly) -> QuasiPoly {
        QuasiPoly::from_parts(self.nvars, self.body.iter().map(|(e, p)| (*e, p * q)))
    }

    /// Multiplication by an x-only exponential polynomial.
    pub fn mul_xexp(&self, a: &XExpPoly) -> QuasiPoly {
        let mut out = QuasiPoly::zero(self.nvars);
        for (ea, ca) in a.terms() {
            for (e, p) in &self.body {
                out.add_part(*e + *ea, &p.scale(ca));
            }
        }
        out
    }

    /// Replaces each part `R_η X^η` by `w(η) R_η X^η`; x-derivatives act this way.
    pub fn map_x_weight(&self, w: impl Fn(&IVec) -> Rat) -> QuasiPoly {
        QuasiPoly::from_parts(self.nvars, self.body.iter().map(|(e, p)| (*e, p.scale(&w(e)))))
    }

    /// Multiplication of every part by the z-variable `ζ_{i+1}`.
    pub fn mul_var(&self, i: usize) -> QuasiPoly {
        let m = Monomial::var(i);
        QuasiPoly::from_parts(self.nvars, self.body.iter().map(|(e, p)| (*e, p.mul_monomial(m))))
    }

    /// Maximal z-degree over all x-exponents; `None` for zero.
    pub fn z_degree(&self) -> Option<u32> {
        self.body.values().filter_map(ZPoly::degree).max()
    }

    /// The homogeneous z-degree-`d` part.
    pub fn z_homogeneous(&self, d: u32) -> QuasiPoly {
        QuasiPoly::from_parts(self.nvars, self.body.iter().map(|(e, p)| (*e, p.homogeneous_part(d))))
    }

    /// The x-coefficient of the z-monomial `m`.
    pub fn coeff_of_monomial(&self, m: &Monomial) -> XExpPoly {
        XExpPoly::from_terms(self.nvars, self.body.iter().map(|(e, p)| (*e, p.coeff(m))))
    }

    /// All z-monomials occurring anywhere in the body.
    pub fn z_monomials(&self) -> Vec<Monomial> {
        let mut ms: Vec<Monomial> = self.body.values().flat_map(|p| p.terms().keys().copied()).collect();
        ms.sort();
        ms.dedup();
        ms
    }

    pub fn term_count(&self) -> usize {
        self.body.values().map(ZPoly::len).sum()
    }

    /// Body value `R(ζ, x)` without the exponential prefactor.
    pub fn eval_body(&self, z: &[Complex64], x: &[Complex64]) -> Complex64 {
        self.body.iter().map(|(e, p)| p.eval(z) * XExpPoly::exp_at(e, x)).sum()
    }

    /// `R(ζ, x) e^{⟨z,x⟩}` with `⟨z,x⟩ = Σ_{i≤l} ζ_i x_i + ζ_{l+1} v / k`.
    pub fn eval(&self, z: &[Complex64], x: &[Complex64], k: Complex64) -> Complex64 {
        self.eval_body(z, x) * pairing(z, x, k).exp()
    }
}

/// `⟨z,x⟩` in internal coordinates.
pub fn pairing(z: &[Complex64], x: &[Complex64], k: Complex64) -> Complex64 {
    let n = z.len();
    let head: Complex64 = z[..n - 1].iter().zip(&x[..n - 1]).map(|(a, b)| a * b).sum();
    head + z[n - 1] * x[n - 1] / k
}

impl fmt::Debug for QuasiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.body.iter().map(|(e, p)| (&e.0[..self.nvars], p))).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_body_evaluates_to_one() {
        let q = QuasiPoly::from_zpoly(ZPoly::one(2));
        let z = [Complex64::new(0.0, 0.0); 2];
        let x = [Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.5)];
        assert!((q.eval(&z, &x, Complex64::new(3.0, 0.0)) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn prefactor_uses_rescaled_last_coordinate() {
        let q = QuasiPoly::from_zpoly(ZPoly::one(2));
        let z = [Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)];
        let x = [Complex64::new(0.0, 0.0), Complex64::new(1.5, 0.0)];
        let v = q.eval(&z, &x, Complex64::new(3.0, 0.0));
        assert!((v - 1.0f64.exp()).norm() < 1e-14);
    }

    #[test]
    fn exponential_multiplication_and_cancellation() {
        let q = QuasiPoly::from_zpoly(ZPoly::var(2, 0));
        let a = XExpPoly::sinh2(2, IVec::from_slice(&[2, 0]));
        let prod = q.mul_xexp(&a);
        assert_eq!(prod.body().len(), 2);
        assert!(prod.sub(&prod).is_zero());
        assert_eq!(prod.z_degree(), Some(1));
    }
}
