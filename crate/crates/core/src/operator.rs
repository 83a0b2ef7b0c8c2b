//! Rational difference operators `Σ_σ b_σ(ζ) T_σ` acting on quasi-polynomials,
//! the deformed Macdonald–Ruijsenaars operator `D` and its commuting family.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::poly::{IVec, LinForm, QuasiPoly, XExpPoly, ZPoly, ZRatFunc};
use crate::quasi_invariance;
use crate::rational::{binomial, factorial, Rat};

/// Difference operator `Σ_σ b_σ(ζ) T_σ`, where `T_σ f(z) = f(z + σ)` and the
/// shift `σ` is a vector in the `(e_i, f)` basis.
#[derive(Clone, Debug)]
pub struct DiffOp {
    nvars: usize,
    k: Rat,
    terms: BTreeMap<IVec, ZRatFunc>,
}

impl DiffOp {
    pub fn zero(cfg: &Config) -> DiffOp {
        DiffOp { nvars: cfg.nvars(), k: cfg.k().clone(), terms: BTreeMap::new() }
    }

    /// Multiplication by `p(ζ)`.
    pub fn multiplication(cfg: &Config, p: &ZPoly) -> DiffOp {
        DiffOp::monomial(cfg, IVec::ZERO, ZRatFunc::from_poly(p.clone()))
    }

    /// `b(ζ) T_σ`.
    pub fn monomial(cfg: &Config, shift: IVec, coeff: ZRatFunc) -> DiffOp {
        let mut op = DiffOp::zero(cfg);
        op.add_term(shift, coeff);
        op
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<IVec, ZRatFunc> {
        &self.terms
    }

    pub fn coeff(&self, shift: &IVec) -> Option<&ZRatFunc> {
        self.terms.get(shift)
    }

    pub fn add_term(&mut self, shift: IVec, coeff: ZRatFunc) {
        let merged = match self.terms.remove(&shift) {
            Some(old) => old.add(&coeff).reduce(),
            None => coeff,
        };
        if !merged.is_zero() {
            self.terms.insert(shift, merged);
        }
    }

    fn zeta_shift(&self, s: &IVec) -> Vec<Rat> {
        let l = self.nvars - 1;
        let mut t: Vec<Rat> = (0..l).map(|i| Rat::from_int(s.get(i) as i64)).collect();
        t.push(&self.k * Rat::from_int(s.get(l) as i64));
        t
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(*s, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        self.add(&other.scale(&-Rat::ONE))
    }

    pub fn scale(&self, c: &Rat) -> DiffOp {
        let mut out = DiffOp { nvars: self.nvars, k: self.k.clone(), terms: BTreeMap::new() };
        for (s, b) in &self.terms {
            out.add_term(*s, b.scale(c));
        }
        out
    }

    /// `self ∘ other`, using `(a T_σ)(b T_τ) = a · b(ζ+σ) · T_{σ+τ}`.
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        let mut acc: BTreeMap<IVec, ZRatFunc> = BTreeMap::new();
        for (s, a) in &self.terms {
            let t = self.zeta_shift(s);
            for (s2, b) in &other.terms {
                let term = a.mul(&b.shift(&t));
                let slot = acc.entry(*s + *s2).or_insert_with(|| ZRatFunc::zero(self.nvars));
                *slot = slot.add(&term);
            }
        }
        let mut out = DiffOp { nvars: self.nvars, k: self.k.clone(), terms: BTreeMap::new() };
        for (s, c) in acc {
            out.add_term(s, c.reduce());
        }
        out
    }

    /// `[self, other] = self∘other - other∘self`.
    pub fn commutator(&self, other: &DiffOp) -> DiffOp {
        self.compose(other).sub(&other.compose(self))
    }

    /// True iff every coefficient vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.reduce().is_zero())
    }

    /// Exact equality, per shift by cross-multiplication.
    pub fn equals(&self, other: &DiffOp) -> bool {
        self.sub(other).is_zero()
    }

    /// Applies the operator to `f = R(ζ,x) e^{⟨z,x⟩}`.
    ///
    /// Shifting the prefactor multiplies by `X^σ`. Each x-coefficient of the
    /// result is collected over the common denominator and then divided
    /// exactly by every denominator form.
    pub fn apply(&self, f: &QuasiPoly) -> Result<QuasiPoly> {
        let nv = self.nvars;
        if self.terms.is_empty() || f.is_zero() {
            return Ok(QuasiPoly::zero(nv));
        }
        let mut lcm: BTreeMap<LinForm, u32> = BTreeMap::new();
        for c in self.terms.values() {
            for (form, &e) in c.denominator() {
                let slot = lcm.entry(form.clone()).or_insert(0);
                *slot = (*slot).max(e);
            }
        }
        let lifted: Vec<(IVec, Vec<Rat>, ZPoly)> = self
            .terms
            .iter()
            .map(|(s, c)| {
                let mut num = c.numerator().clone();
                for (form, &e) in &lcm {
                    let have = c.denominator().get(form).copied().unwrap_or(0);
                    for _ in have..e {
                        num = num.mul_linform(form);
                    }
                }
                (*s, self.zeta_shift(s), num)
            })
            .collect();

        let mut acc: BTreeMap<IVec, ZPoly> = BTreeMap::new();
        for (s, t, num) in &lifted {
            for (eta, body) in f.body() {
                let shifted = body.shift(t);
                acc.entry(*eta + *s).or_insert_with(|| ZPoly::zero(nv)).add_product(&shifted, num);
            }
        }

        let mut out = QuasiPoly::zero(nv);
        for (eta, mut numer) in acc {
            if numer.is_zero() {
                continue;
            }
            for (form, &e) in &lcm {
                for _ in 0..e {
                    numer = numer.divide_by_linform(form).map_err(|_| Error::PoleCancellationFailure {
                        form: form.to_string(),
                        x_exponent: eta.to_vec(nv),
                    })?;
                }
            }
            out.add_part(eta, &numer);
        }
        Ok(out)
    }

    /// Complex value of the coefficient at `shift`.
    pub fn eval_coeff(&self, shift: &IVec, z: &[Complex64]) -> Result<Complex64> {
        match self.terms.get(shift) {
            Some(c) => c.eval(z, 1e-300),
            None => Ok(Complex64::new(0.0, 0.0)),
        }
    }
}

/// Accumulates `∏ (1 - c_j / L_j)` in factored form.
struct FactoredCoeff {
    nvars: usize,
    scale: Rat,
    num: Vec<LinForm>,
    den: Vec<LinForm>,
}

impl FactoredCoeff {
    fn new(nvars: usize, scale: Rat) -> FactoredCoeff {
        FactoredCoeff { nvars, scale, num: Vec::new(), den: Vec::new() }
    }

    /// Multiplies by `1 - c / form`, i.e. `(form - c) / form`.
    fn factor(&mut self, c: Rat, form: ZPoly) {
        if c.is_zero() {
            return;
        }
        let top = &form - &ZPoly::constant(self.nvars, c);
        let (s1, f1) = LinForm::from_poly(&top).expect("affine factor");
        let (s2, f2) = LinForm::from_poly(&form).expect("affine factor");
        self.scale = &self.scale * &s1 / s2;
        match self.den.iter().position(|d| *d == f1) {
            Some(i) => {
                self.den.remove(i);
            }
            None => self.num.push(f1),
        }
        match self.num.iter().position(|d| *d == f2) {
            Some(i) => {
                self.num.remove(i);
            }
            None => self.den.push(f2),
        }
    }

    fn finish(self) -> ZRatFunc {
        let mut p = ZPoly::constant(self.nvars, self.scale);
        for f in &self.num {
            p = p.mul_linform(f);
        }
        ZRatFunc::new(p, self.den)
    }
}

/// The coefficient `a_τ` of `D` for `τ = sign · 2e_i` (`i < l`) or
/// `τ = sign · 2f` (`i = l`).
pub fn shift_coefficient(cfg: &Config, i: usize, sign: i64) -> ZRatFunc {
    let l = cfg.l();
    let nv = cfg.nvars();
    let k = cfg.k().clone();
    let sg = Rat::from_int(sign);
    let z = |j: usize| ZPoly::var(nv, j);
    let cst = |c: Rat| ZPoly::constant(nv, c);
    let m = Rat::from(cfg.m());
    let n = Rat::from(cfg.n());
    let p = Rat::from(cfg.params().p);
    let r = Rat::from(cfg.params().r);
    let two = Rat::from_int(2);

    if i < l {
        let mut fc = FactoredCoeff::new(nv, Rat::ONE);
        fc.factor(&sg * (&m + &two * &n), z(i));
        fc.factor(&sg * &m, &z(i) + &cst(sg.clone()));
        for j in (0..l).filter(|&j| j != i) {
            fc.factor(&sg * &two * &k, &z(i) - &z(j));
            fc.factor(&sg * &two * &k, &z(i) + &z(j));
        }
        let shift = &sg * (Rat::ONE - &k);
        fc.factor(&sg * &two, &(&z(i) + &z(l)) + &cst(shift.clone()));
        fc.factor(&sg * &two, &(&z(i) - &z(l)) + &cst(shift));
        fc.finish()
    } else {
        let mut fc = FactoredCoeff::new(nv, k.recip());
        fc.factor(&sg * &k * (&p + &two * &r), z(l));
        fc.factor(&sg * &k * &p, &z(l) + &cst(&sg * &k));
        let shift = &sg * (&k - Rat::ONE);
        for j in 0..l {
            fc.factor(&sg * &two * &k, &(&z(l) + &z(j)) + &cst(shift.clone()));
            fc.factor(&sg * &two * &k, &(&z(l) - &z(j)) + &cst(shift.clone()));
        }
        fc.finish()
    }
}

/// The operator `D = Σ_τ a_τ (T_τ - 1)`.
pub fn build_d(cfg: &Config) -> DiffOp {
    let mut op = DiffOp::zero(cfg);
    let mut identity = ZRatFunc::zero(cfg.nvars());
    for i in 0..=cfg.l() {
        for sign in [1, -1] {
            let a = shift_coefficient(cfg, i, sign);
            identity = identity.sub(&a);
            op.add_term(IVec::unit(i, 2 * sign as i32), a);
        }
    }
    op.add_term(IVec::ZERO, identity.reduce());
    op
}

/// `μ_p`: the top homogeneous part of `p` with `ζ_j ↦ 2(X^{2e_j} - X^{-2e_j})`.
pub fn mu_p(cfg: &Config, p: &ZPoly) -> XExpPoly {
    let nv = cfg.nvars();
    let images: Vec<XExpPoly> =
        (0..nv).map(|j| XExpPoly::sinh2(nv, IVec::unit(j, 2)).scale(&Rat::from_int(2))).collect();
    let mut out = XExpPoly::zero(nv);
    for (mono, c) in p.top_part().terms() {
        let mut t = XExpPoly::constant(nv, c.clone());
        for (j, img) in images.iter().enumerate() {
            t = &t * &img.pow(mono.exp(j));
        }
        out = &out + &t;
    }
    out
}

/// `D_p = ad_D^d(p̂) / d!` with `d = deg p`, together with `μ_p`.
pub fn build_dp(cfg: &Config, d_op: &DiffOp, p: &ZPoly) -> Result<(DiffOp, XExpPoly)> {
    let failures = quasi_invariance::polynomial_failures(cfg, p);
    if !failures.is_empty() {
        return Err(Error::NotQuasiInvariant(failures));
    }
    let d = p.degree().unwrap_or(0);
    let mut op = DiffOp::multiplication(cfg, p);
    for _ in 0..d {
        op = d_op.commutator(&op);
    }
    Ok((op.scale(&factorial(d).recip()), mu_p(cfg, p)))
}

/// `D_p f` computed as `Σ_j (-1)^j C(d,j) D^{d-j}(p · D^j f) / d!`, which is
/// `ad_D^d(p̂) f / d!` expanded; only applications of `D` are needed.
pub fn apply_dp(d_op: &DiffOp, p: &ZPoly, f: &QuasiPoly) -> Result<QuasiPoly> {
    let d = p.degree().unwrap_or(0);
    let mut powers = vec![f.clone()];
    for _ in 0..d {
        powers.push(d_op.apply(powers.last().expect("nonempty"))?);
    }
    let mut acc = QuasiPoly::zero(f.nvars());
    for j in 0..=d {
        let mut g = powers[j as usize].mul_zpoly(p);
        for _ in 0..d - j {
            g = d_op.apply(&g)?;
        }
        let sign = if j % 2 == 0 { Rat::ONE } else { -Rat::ONE };
        acc = acc.add(&g.scale(&(sign * binomial(d, j))));
    }
    Ok(acc.scale(&factorial(d).recip()))
}

/// Remainder `R_τ = a_τ - κ_τ + κ_τ Σ_α ⟨τ,α⟩(m_α + m_{2α}) / ⟨α,ζ⟩` evaluated
/// exactly at `t·ζ_0`.
pub fn asymptotic_remainder(cfg: &Config, i: usize, sign: i64, zeta0: &[Rat], t: &Rat) -> Result<Rat> {
    let z: Vec<Rat> = zeta0.iter().map(|c| c * t).collect();
    let a = shift_coefficient(cfg, i, sign).eval_exact(&z)?;
    let tau = IVec::unit(i, 2 * sign as i32);
    let kappa = if i == cfg.l() { cfg.k().recip() } else { Rat::ONE };
    let mut sum = Rat::ZERO;
    for root in cfg.reduced_roots() {
        let e = root.mult + root.double_mult;
        if e == 0 {
            continue;
        }
        let pair = cfg.pairing_poly(&root.vec).eval_exact(&z);
        if pair.is_zero() {
            return Err(Error::PoleHit(format!("<{}, z> = 0", root.label())));
        }
        sum += cfg.k_inner(&tau, &root.vec) * Rat::from(e) / pair;
    }
    Ok(a - &kappa + &kappa * sum)
}

/// Least-squares slope of `log|R_τ(tζ_0)|` against `log t` for the given `t`.
pub fn asymptotic_slope(cfg: &Config, i: usize, sign: i64, zeta0: &[Rat], ts: &[Rat]) -> Result<f64> {
    let mut pts = Vec::with_capacity(ts.len());
    for t in ts {
        let r = asymptotic_remainder(cfg, i, sign, zeta0, t)?;
        if r.is_zero() {
            continue;
        }
        pts.push((t.to_f64().ln(), log_abs(&r)));
    }
    if pts.len() < 2 {
        // Identically vanishing remainder decays faster than any power.
        return Ok(f64::NEG_INFINITY);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// `ln|r|` robust against numerators and denominators beyond `f64` range.
fn log_abs(r: &Rat) -> f64 {
    fn ln_big(b: &num_bigint::BigInt) -> f64 {
        let bits = b.bits();
        if bits < 1000 {
            return num_traits::ToPrimitive::to_f64(b).unwrap_or(f64::INFINITY).abs().ln();
        }
        let shift = bits - 60;
        let top: num_bigint::BigInt = b >> shift;
        num_traits::ToPrimitive::to_f64(&top).unwrap_or(0.0).abs().ln() + shift as f64 * std::f64::consts::LN_2
    }
    ln_big(&r.numer()) - ln_big(&r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Params;
    use crate::poly::Monomial;

    fn cfg(l: usize, k: i64, p: u32, r: u32) -> Config {
        Config::build(Params::new(l, Rat::from_int(k), p, r)).unwrap()
    }

    #[test]
    fn coefficient_value_at_point() {
        let c = cfg(1, 1, 0, 0);
        let a = shift_coefficient(&c, 1, 1);
        assert_eq!(a.eval_exact(&[Rat::from_int(5), Rat::from_int(3)]).unwrap(), Rat::new(3, 2));
    }

    #[test]
    fn coefficient_denominators_smallest() {
        let c = cfg(1, 1, 0, 0);
        let a = shift_coefficient(&c, 0, 1);
        let forms: Vec<String> = a.denominator_forms().map(|f| f.to_string()).collect();
        assert_eq!(forms.len(), 2);
        assert!(forms.contains(&"z1 + z2".to_string()));
        assert!(forms.contains(&"z1 - z2".to_string()));
    }

    #[test]
    fn coefficients_tend_to_kappa() {
        let c = cfg(1, 3, 1, 1);
        let ray = [Rat::new(7, 3), Rat::new(-5, 11)];
        for (i, kappa) in [(0, Rat::ONE), (1, Rat::new(1, 3))] {
            for sign in [1, -1] {
                let big = Rat::from_int(1_000_000_000);
                let z: Vec<Rat> = ray.iter().map(|v| v * &big).collect();
                let a = shift_coefficient(&c, i, sign).eval_exact(&z).unwrap();
                assert!((a - &kappa).abs() < Rat::new(1, 10_000));
            }
        }
    }

    #[test]
    fn commutator_examples() {
        let c = cfg(1, 1, 0, 0);
        let d = build_d(&c);
        assert!(d.commutator(&d).is_zero());
        let one = ZRatFunc::constant(2, Rat::ONE);
        let tp = DiffOp::monomial(&c, IVec::unit(0, 2), one.clone());
        let tm = DiffOp::monomial(&c, IVec::unit(0, -2), one.clone());
        assert!(tp.commutator(&tm).is_zero());
        let zhat = DiffOp::multiplication(&c, &ZPoly::var(2, 0));
        let expected = DiffOp::monomial(&c, IVec::unit(0, 2), ZRatFunc::constant(2, Rat::from_int(-2)));
        assert!(zhat.commutator(&tp).equals(&expected));
    }

    #[test]
    fn empty_operator_gives_zero() {
        let c = cfg(1, 1, 0, 0);
        let f = QuasiPoly::from_zpoly(ZPoly::one(2));
        assert!(DiffOp::zero(&c).apply(&f).unwrap().is_zero());
    }

    #[test]
    fn constant_body_does_not_cancel_poles() {
        let c = cfg(1, 1, 0, 0);
        let f = QuasiPoly::from_zpoly(ZPoly::one(2));
        match build_d(&c).apply(&f) {
            Err(Error::PoleCancellationFailure { form, .. }) => assert!(form == "z1 + z2" || form == "z1 - z2"),
            other => panic!("expected pole failure, got {other:?}"),
        }
    }

    #[test]
    fn q_application_drops_degree() {
        for c in [cfg(1, 1, 0, 0), cfg(1, 3, 0, 0), cfg(1, 1, 1, 0)] {
            let s = c.symbols().unwrap();
            let out = build_d(&c).apply(&QuasiPoly::from_zpoly(s.q.clone())).unwrap();
            let dmu = out.sub(&QuasiPoly::from_zpoly(s.q.clone()).mul_xexp(&s.mu));
            assert!(dmu.z_degree().unwrap() < 2 * c.big_m());
        }
    }

    #[test]
    fn mu_for_z_squared() {
        let c = cfg(1, 3, 0, 0);
        let mu = mu_p(&c, &c.z_squared());
        let mut expected = XExpPoly::zero(2);
        for (j, w) in [(0usize, Rat::from_int(4)), (1, Rat::new(4, 3))] {
            expected.add_term(IVec::unit(j, 4), w.clone());
            expected.add_term(IVec::unit(j, -4), w.clone());
            expected.add_term(IVec::ZERO, &w * Rat::from_int(-2));
        }
        assert_eq!(mu, expected);
        assert_eq!(mu_p(&c, &ZPoly::one(2)), XExpPoly::one(2));
    }

    #[test]
    fn degree_zero_family_member_is_multiplication() {
        let c = cfg(1, 1, 0, 0);
        let d = build_d(&c);
        let (op, mu) = build_dp(&c, &d, &ZPoly::one(2)).unwrap();
        assert!(op.equals(&DiffOp::multiplication(&c, &ZPoly::one(2))));
        assert_eq!(mu, XExpPoly::one(2));
    }

    #[test]
    fn non_invariant_family_input_rejected() {
        let c = cfg(1, 1, 0, 0);
        let d = build_d(&c);
        let p = ZPoly::monomial(2, Monomial::var(0), Rat::ONE);
        assert!(matches!(build_dp(&c, &d, &p), Err(Error::NotQuasiInvariant(_))));
    }

    #[test]
    fn composition_is_associative() {
        let c = cfg(1, 3, 0, 0);
        let d = build_d(&c);
        let a = DiffOp::multiplication(&c, &c.z_squared());
        let b = DiffOp::monomial(&c, IVec::unit(1, -2), ZRatFunc::inverse_affine(&ZPoly::var(2, 0)).unwrap());
        assert!(d.compose(&a).compose(&b).equals(&d.compose(&a.compose(&b))));
    }

    #[test]
    fn remainder_decays_quadratically() {
        let c = cfg(1, 1, 1, 0);
        let ts: Vec<Rat> = (2..=6).map(|e| Rat::from_int(10i64.pow(e))).collect();
        let ray = [Rat::new(3, 7), Rat::new(11, 5)];
        for (i, s) in [(0, 1), (0, -1), (1, 1), (1, -1)] {
            assert!(asymptotic_slope(&c, i, s, &ray, &ts).unwrap() <= -1.9);
        }
    }
}
