use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linform::LinForm;
use super::zpoly::ZPoly;
use crate::error::{Error, Result};
use crate::rational::Rat;

/// Rational function `num / ∏ f^e` whose denominator is a multiset of
/// normalized linear forms. Any scalar factor lives in the numerator.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ZRatFunc {
    num: ZPoly,
    den: BTreeMap<LinForm, u32>,
}

impl ZRatFunc {
    pub fn from_poly(num: ZPoly) -> ZRatFunc {
        ZRatFunc { num, den: BTreeMap::new() }
    }

    pub fn zero(nvars: usize) -> ZRatFunc {
        ZRatFunc::from_poly(ZPoly::zero(nvars))
    }

    pub fn constant(nvars: usize, c: Rat) -> ZRatFunc {
        ZRatFunc::from_poly(ZPoly::constant(nvars, c))
    }

    pub fn new(num: ZPoly, den: impl IntoIterator<Item = LinForm>) -> ZRatFunc {
        let mut out = ZRatFunc::from_poly(num);
        for f in den {
            *out.den.entry(f).or_insert(0) += 1;
        }
        out
    }

    /// `c / f` for an arbitrary (unnormalized) affine polynomial `f`.
    pub fn inverse_affine(f: &ZPoly) -> Option<ZRatFunc> {
        let (s, form) = LinForm::from_poly(f)?;
        Some(ZRatFunc::new(ZPoly::constant(f.nvars(), s.recip()), [form]))
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn numerator(&self) -> &ZPoly {
        &self.num
    }

    pub fn denominator(&self) -> &BTreeMap<LinForm, u32> {
        &self.den
    }

    pub fn denominator_forms(&self) -> impl Iterator<Item = &LinForm> {
        self.den.keys()
    }

    pub fn denominator_poly(&self) -> ZPoly {
        let mut p = ZPoly::one(self.nvars());
        for (f, &e) in &self.den {
            for _ in 0..e {
                p = p.mul_linform(f);
            }
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    /// Numerator re-expressed over the denominator `target`, which must
    /// contain `self.den` as a sub-multiset.
    fn lift_to(&self, target: &BTreeMap<LinForm, u32>) -> ZPoly {
        let mut p = self.num.clone();
        for (f, &e) in target {
            let have = self.den.get(f).copied().unwrap_or(0);
            debug_assert!(have <= e);
            for _ in have..e {
                p = p.mul_linform(f);
            }
        }
        p
    }

    fn lcm(a: &BTreeMap<LinForm, u32>, b: &BTreeMap<LinForm, u32>) -> BTreeMap<LinForm, u32> {
        let mut out = a.clone();
        for (f, &e) in b {
            let slot = out.entry(f.clone()).or_insert(0);
            *slot = (*slot).max(e);
        }
        out
    }

    pub fn add(&self, other: &ZRatFunc) -> ZRatFunc {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let den = Self::lcm(&self.den, &other.den);
        let num = &self.lift_to(&den) + &other.lift_to(&den);
        ZRatFunc { num, den }
    }

    pub fn sub(&self, other: &ZRatFunc) -> ZRatFunc {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ZRatFunc {
        ZRatFunc { num: -&self.num, den: self.den.clone() }
    }

    pub fn mul(&self, other: &ZRatFunc) -> ZRatFunc {
        let mut den = self.den.clone();
        for (f, &e) in &other.den {
            *den.entry(f.clone()).or_insert(0) += e;
        }
        ZRatFunc { num: &self.num * &other.num, den }
    }

    pub fn mul_poly(&self, p: &ZPoly) -> ZRatFunc {
        ZRatFunc { num: &self.num * p, den: self.den.clone() }
    }

    pub fn scale(&self, c: &Rat) -> ZRatFunc {
        ZRatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    /// `self / f` for a normalized form `f`.
    pub fn div_linform(&self, f: &LinForm) -> ZRatFunc {
        let mut out = self.clone();
        *out.den.entry(f.clone()).or_insert(0) += 1;
        out
    }

    /// `r(ζ + t)`.
    pub fn shift(&self, t: &[Rat]) -> ZRatFunc {
        let mut den = BTreeMap::new();
        for (f, &e) in &self.den {
            *den.entry(f.shift(t)).or_insert(0) += e;
        }
        ZRatFunc { num: self.num.shift(t), den }
    }

    /// Cancels every denominator form that divides the numerator.
    pub fn reduce(&self) -> ZRatFunc {
        if self.num.is_zero() {
            return ZRatFunc::zero(self.nvars());
        }
        let mut num = self.num.clone();
        let mut den = BTreeMap::new();
        for (f, &e) in &self.den {
            let mut left = e;
            while left > 0 {
                match num.divide_by_linform(f) {
                    Ok(q) => {
                        num = q;
                        left -= 1;
                    }
                    Err(_) => break,
                }
            }
            if left > 0 {
                den.insert(f.clone(), left);
            }
        }
        ZRatFunc { num, den }
    }

    /// Exact equality by cross-multiplication over the common denominator.
    pub fn equals(&self, other: &ZRatFunc) -> bool {
        let den = Self::lcm(&self.den, &other.den);
        self.lift_to(&den) == other.lift_to(&den)
    }

    /// Polynomial value if the function reduces to one.
    pub fn to_poly(&self) -> Option<ZPoly> {
        let r = self.reduce();
        r.den.is_empty().then_some(r.num)
    }

    pub fn eval_exact(&self, z: &[Rat]) -> Result<Rat> {
        let mut d = Rat::ONE;
        for (f, &e) in &self.den {
            let v = f.eval_exact(z);
            if v.is_zero() {
                return Err(Error::PoleHit(format!("{f} = 0")));
            }
            d *= v.pow(e as i32);
        }
        Ok(self.num.eval_exact(z) / d)
    }

    /// Complex value; `PoleHit` when a denominator form is below `tol` in modulus.
    pub fn eval(&self, z: &[Complex64], tol: f64) -> Result<Complex64> {
        let mut d = Complex64::new(1.0, 0.0);
        for (f, &e) in &self.den {
            let v = f.eval(z);
            if v.norm() < tol {
                return Err(Error::PoleHit(format!("{f} = 0")));
            }
            d *= v.powu(e);
        }
        Ok(self.num.eval(z) / d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(i: usize) -> ZPoly {
        ZPoly::var(2, i)
    }

    fn c(v: i64) -> ZPoly {
        ZPoly::constant(2, Rat::from_int(v))
    }

    /// `1 - a / f`
    fn one_minus(a: i64, f: &ZPoly) -> ZRatFunc {
        ZRatFunc::constant(2, Rat::ONE).sub(&ZRatFunc::inverse_affine(f).unwrap().scale(&Rat::from_int(a)))
    }

    #[test]
    fn coefficient_value_at_point() {
        let r = one_minus(2, &(&z(1) + &z(0))).mul(&one_minus(2, &(&z(1) - &z(0))));
        let v = r.eval_exact(&[Rat::from_int(5), Rat::from_int(3)]).unwrap();
        assert_eq!(v, Rat::new(3, 2));
        let cv = r.eval(&[Complex64::new(5.0, 0.0), Complex64::new(3.0, 0.0)], 1e-12).unwrap();
        assert!((cv - Complex64::new(1.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn cross_multiplied_equality() {
        // (z1^2 - 1)/(z1 - 1) == z1 + 1
        let a = ZRatFunc::new(&(&z(0) * &z(0)) - &c(1), [LinForm::from_poly(&(&z(0) - &c(1))).unwrap().1]);
        let b = ZRatFunc::from_poly(&z(0) + &c(1));
        assert!(a.equals(&b));
        assert_eq!(a.reduce(), b);
        assert!(!a.equals(&ZRatFunc::from_poly(z(0))));
    }

    #[test]
    fn pole_detection() {
        let r = ZRatFunc::inverse_affine(&z(0)).unwrap();
        assert!(matches!(r.eval_exact(&[Rat::ZERO, Rat::ONE]), Err(Error::PoleHit(_))));
    }

    #[test]
    fn shift_consistency() {
        let r = one_minus(3, &(&z(0) + &c(1)));
        let t = [Rat::from_int(2), Rat::ZERO];
        let p = [Rat::new(1, 3), Rat::from_int(4)];
        let moved = [&p[0] + &t[0], p[1].clone()];
        assert_eq!(r.shift(&t).eval_exact(&p).unwrap(), r.eval_exact(&moved).unwrap());
    }
}
