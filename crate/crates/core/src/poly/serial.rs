//! Canonical JSON forms. Rationals are `"num/den"` strings, exponent vectors
//! are integer arrays and terms appear in ascending canonical order, so equal
//! values always serialize to identical bytes.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::monomial::{Monomial, MAX_VARS};
use super::quasi::QuasiPoly;
use super::xexp::{IVec, XExpPoly};
use super::zpoly::ZPoly;
use crate::rational::Rat;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZPolyRepr {
    nvars: usize,
    terms: Vec<(Vec<u32>, Rat)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct XExpRepr {
    dim: usize,
    terms: Vec<(Vec<i32>, Rat)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuasiRepr {
    nvars: usize,
    body: Vec<(Vec<i32>, Vec<(Vec<u32>, Rat)>)>,
}

fn zpoly_terms(p: &ZPoly) -> Vec<(Vec<u32>, Rat)> {
    p.terms().iter().map(|(m, c)| (m.exps(p.nvars()), c.clone())).collect()
}

fn zpoly_from_terms<E: serde::de::Error>(nvars: usize, terms: Vec<(Vec<u32>, Rat)>) -> Result<ZPoly, E> {
    if nvars == 0 || nvars > MAX_VARS {
        return Err(E::custom(format!("nvars {nvars} out of range")));
    }
    let mut prev: Option<Monomial> = None;
    let mut p = ZPoly::zero(nvars);
    for (exps, c) in terms {
        if exps.len() != nvars {
            return Err(E::custom("monomial length does not match nvars"));
        }
        if exps.iter().any(|&e| e > u16::MAX as u32) {
            return Err(E::custom("exponent too large"));
        }
        if c.is_zero() {
            return Err(E::custom("zero coefficient stored"));
        }
        let m = Monomial::from_exps(&exps);
        if prev.is_some_and(|q| q >= m) {
            return Err(E::custom("terms not in canonical order"));
        }
        prev = Some(m);
        p.add_term(m, c);
    }
    Ok(p)
}

fn ivec_from<E: serde::de::Error>(v: &[i32], dim: usize) -> Result<IVec, E> {
    if v.len() != dim {
        return Err(E::custom("exponent length does not match dim"));
    }
    Ok(IVec::from_slice(v))
}

impl Serialize for ZPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ZPolyRepr { nvars: self.nvars(), terms: zpoly_terms(self) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ZPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = ZPolyRepr::deserialize(d)?;
        zpoly_from_terms(r.nvars, r.terms)
    }
}

impl Serialize for XExpPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        XExpRepr { dim: self.dim(), terms: self.terms().iter().map(|(e, c)| (e.to_vec(self.dim()), c.clone())).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for XExpPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = XExpRepr::deserialize(d)?;
        if r.dim == 0 || r.dim > MAX_VARS {
            return Err(D::Error::custom("dim out of range"));
        }
        let mut p = XExpPoly::zero(r.dim);
        let mut prev: Option<IVec> = None;
        for (e, c) in r.terms {
            let e = ivec_from::<D::Error>(&e, r.dim)?;
            if c.is_zero() || prev.is_some_and(|q| q >= e) {
                return Err(D::Error::custom("non-canonical exponential polynomial"));
            }
            prev = Some(e);
            p.add_term(e, c);
        }
        Ok(p)
    }
}

impl Serialize for QuasiPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        QuasiRepr {
            nvars: self.nvars(),
            body: self.body().iter().map(|(e, p)| (e.to_vec(self.nvars()), zpoly_terms(p))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuasiPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = QuasiRepr::deserialize(d)?;
        let mut q = QuasiPoly::zero(r.nvars);
        let mut prev: Option<IVec> = None;
        for (e, terms) in r.body {
            let e = ivec_from::<D::Error>(&e, r.nvars)?;
            if prev.is_some_and(|p| p >= e) {
                return Err(D::Error::custom("x-exponents not in canonical order"));
            }
            prev = Some(e);
            let p = zpoly_from_terms::<D::Error>(r.nvars, terms)?;
            if p.is_zero() {
                return Err(D::Error::custom("empty body entry"));
            }
            q.add_part(e, &p);
        }
        Ok(q)
    }
}

impl Serialize for IVec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<i32>::deserialize(d)?;
        if v.len() > MAX_VARS {
            return Err(D::Error::custom("vector too long"));
        }
        Ok(IVec::from_slice(&v))
    }
}
