use std::fmt;

use serde::{Deserialize, Serialize};

use super::monomial::Monomial;
use super::zpoly::ZPoly;
use crate::rational::Rat;

/// Affine form `Σ a_i ζ_i + b`, normalized so that its first nonzero
/// coefficient is 1. Two forms describe the same hyperplane iff they are equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinForm {
    coeffs: Vec<Rat>,
    constant: Rat,
}

impl LinForm {
    /// Normalizes `coeffs·ζ + constant`, returning the scale `s` with
    /// `original = s * normalized`. `None` if every coefficient vanishes.
    pub fn new(coeffs: Vec<Rat>, constant: Rat) -> Option<(Rat, LinForm)> {
        let lead = coeffs.iter().find(|c| !c.is_zero())?.clone();
        let inv = lead.recip();
        let form = LinForm { coeffs: coeffs.iter().map(|c| c * &inv).collect(), constant: &constant * &inv };
        Some((lead, form))
    }

    pub fn coordinate(nvars: usize, i: usize) -> LinForm {
        let mut coeffs = vec![Rat::ZERO; nvars];
        coeffs[i] = Rat::ONE;
        LinForm { coeffs, constant: Rat::ZERO }
    }

    /// Reads an affine polynomial of degree exactly one.
    pub fn from_poly(p: &ZPoly) -> Option<(Rat, LinForm)> {
        if p.degree() != Some(1) {
            return None;
        }
        let coeffs = (0..p.nvars()).map(|i| p.coeff(&Monomial::var(i))).collect();
        LinForm::new(coeffs, p.coeff(&Monomial::ONE))
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn constant(&self) -> &Rat {
        &self.constant
    }

    pub fn lead_var(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).expect("normalized form has a nonzero coefficient")
    }

    pub fn to_poly(&self) -> ZPoly {
        let mut p = ZPoly::constant(self.nvars(), self.constant.clone());
        for (i, c) in self.coeffs.iter().enumerate() {
            p.add_term(Monomial::var(i), c.clone());
        }
        p
    }

    /// The form `f(ζ + t)`, still normalized.
    pub fn shift(&self, t: &[Rat]) -> LinForm {
        let delta: Rat = self.coeffs.iter().zip(t).map(|(a, b)| a * b).sum();
        LinForm { coeffs: self.coeffs.clone(), constant: &self.constant + &delta }
    }

    pub fn eval_exact(&self, z: &[Rat]) -> Rat {
        self.coeffs.iter().zip(z).map(|(a, b)| a * b).sum::<Rat>() + &self.constant
    }

    pub fn eval(&self, z: &[num_complex::Complex64]) -> num_complex::Complex64 {
        self.coeffs.iter().zip(z).map(|(a, b)| b * a.to_f64()).sum::<num_complex::Complex64>() + self.constant.to_f64()
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if mag.is_one() {
                write!(f, "z{}", i + 1)?;
            } else {
                write!(f, "{mag}*z{}", i + 1)?;
            }
        }
        if !self.constant.is_zero() {
            let sign = if self.constant.is_negative() { "-" } else { "+" };
            write!(f, " {sign} {}", self.constant.abs())?;
        }
        Ok(())
    }
}

impl fmt::Debug for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_identifies_hyperplanes() {
        let (s1, a) = LinForm::new(vec![Rat::from_int(2), Rat::from_int(-2)], Rat::from_int(4)).unwrap();
        let (s2, b) = LinForm::new(vec![Rat::from_int(-1), Rat::from_int(1)], Rat::from_int(-2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(s1, Rat::from_int(2));
        assert_eq!(s2, Rat::from_int(-1));
        assert_eq!(a.to_string(), "z1 - z2 + 2");
        assert!(LinForm::new(vec![Rat::ZERO; 2], Rat::ONE).is_none());
    }

    #[test]
    fn shift_moves_constant() {
        let f = LinForm::new(vec![Rat::ONE, Rat::from_int(3)], Rat::ZERO).unwrap().1;
        let g = f.shift(&[Rat::from_int(1), Rat::from_int(2)]);
        assert_eq!(g.constant(), &Rat::from_int(7));
        let p = [Rat::new(1, 2), Rat::from_int(5)];
        assert_eq!(g.eval_exact(&p), f.eval_exact(&[Rat::new(3, 2), Rat::from_int(7)]));
    }
}
