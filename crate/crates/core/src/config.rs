//! The deformed root system BC(l,1): parameters, roots, multiplicities,
//! derived scalars and symbols, and the positive cone of the exponent lattice.
//!
//! Vectors are written in the basis `(e_1, …, e_l, f)` with `f = √k e_{l+1}`,
//! where the bilinear form is `diag(1, …, 1, k)`. Spectral variables are
//! `ζ_i = z_i` and `ζ_{l+1} = √k z_{l+1}`; spatial ones `x_i` and
//! `v = √k x_{l+1}`. In these coordinates every quantity is rational in `k`.

use serde::{Deserialize, Serialize};
use sha2::Digest;

use crate::error::{Error, Result};
use crate::poly::{IVec, Monomial, XExpPoly, ZPoly, MAX_VARS};
use crate::rational::{factorial, Rat};

/// Exact-mode parameters. `m = kp` and `n = (k(2r+1) - 1)/2` are derived.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    pub l: usize,
    pub k: Rat,
    pub p: u32,
    pub r: u32,
}

impl Params {
    pub fn new(l: usize, k: Rat, p: u32, r: u32) -> Params {
        Params { l, k, p, r }
    }

    pub fn m(&self) -> Rat {
        &self.k * Rat::from(self.p)
    }

    pub fn n(&self) -> Rat {
        (&self.k * Rat::from(2 * self.r + 1) - Rat::ONE) / Rat::from_int(2)
    }

    /// SHA-256 of the canonical JSON encoding, used as a cache key.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("serializable");
        hex::encode(sha2::Sha256::digest(&bytes))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidParams(s));
        if self.l == 0 {
            return bad("l must be a positive integer".into());
        }
        if self.l + 1 > MAX_VARS {
            return bad(format!("l = {} exceeds the supported maximum {}", self.l, MAX_VARS - 1));
        }
        if !self.k.is_positive() {
            return bad(format!("k = {} must be positive", self.k));
        }
        if self.l > 1 && !self.k.is_integer() {
            return bad(format!("k = {} must be a positive integer when l > 1", self.k));
        }
        let odd = &self.k * Rat::from(2 * self.r + 1);
        if !odd.is_integer() || odd.to_i64().is_some_and(|v| v % 2 == 0) {
            return bad(format!(
                "2n+1 = k(2r+1) = {odd} must be an odd integer (n = (k(2r+1)-1)/2 a non-negative integer); for l > 1 this forces k odd"
            ));
        }
        if !self.m().is_integer() {
            return bad(format!("m = kp = {} must be a non-negative integer", self.m()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootKind {
    /// `e_i`
    Short(usize),
    /// `2e_i`
    Long(usize),
    /// `e_i + f`
    MixedPlus(usize),
    /// `e_i - f`
    MixedMinus(usize),
    /// `e_i + e_j`, `i < j`
    PairPlus(usize, usize),
    /// `e_i - e_j`, `i < j`
    PairMinus(usize, usize),
    /// `f`
    F,
    /// `2f`
    TwoF,
}

impl RootKind {
    /// All positive roots for rank `l`.
    pub fn all(l: usize) -> Vec<RootKind> {
        let mut out = Vec::new();
        for i in 0..l {
            out.extend([RootKind::Short(i), RootKind::Long(i), RootKind::MixedPlus(i), RootKind::MixedMinus(i)]);
        }
        for i in 0..l {
            for j in i + 1..l {
                out.extend([RootKind::PairPlus(i, j), RootKind::PairMinus(i, j)]);
            }
        }
        out.extend([RootKind::F, RootKind::TwoF]);
        out
    }

    pub fn vector(&self, l: usize) -> IVec {
        let mut v = [0; MAX_VARS];
        match *self {
            RootKind::Short(i) => v[i] = 1,
            RootKind::Long(i) => v[i] = 2,
            RootKind::MixedPlus(i) => (v[i], v[l]) = (1, 1),
            RootKind::MixedMinus(i) => (v[i], v[l]) = (1, -1),
            RootKind::PairPlus(i, j) => (v[i], v[j]) = (1, 1),
            RootKind::PairMinus(i, j) => (v[i], v[j]) = (1, -1),
            RootKind::F => v[l] = 1,
            RootKind::TwoF => v[l] = 2,
        }
        IVec(v)
    }

    pub fn is_reduced(&self) -> bool {
        !matches!(self, RootKind::Long(_) | RootKind::TwoF)
    }

    /// Multiplicity of this root and of its double, from `(m, n, k, p, r)`.
    pub fn multiplicities<T: Clone + num_traits::Zero + num_traits::One>(&self, m: &T, n: &T, k: &T, p: &T, r: &T) -> (T, T) {
        let zero = T::zero();
        match self {
            RootKind::Short(_) => (m.clone(), n.clone()),
            RootKind::Long(_) => (n.clone(), zero),
            RootKind::MixedPlus(_) | RootKind::MixedMinus(_) => (T::one(), zero),
            RootKind::PairPlus(..) | RootKind::PairMinus(..) => (k.clone(), zero),
            RootKind::F => (p.clone(), r.clone()),
            RootKind::TwoF => (r.clone(), zero),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            RootKind::Short(i) => format!("e{}", i + 1),
            RootKind::Long(i) => format!("2e{}", i + 1),
            RootKind::MixedPlus(i) => format!("e{}+f", i + 1),
            RootKind::MixedMinus(i) => format!("e{}-f", i + 1),
            RootKind::PairPlus(i, j) => format!("e{}+e{}", i + 1, j + 1),
            RootKind::PairMinus(i, j) => format!("e{}-e{}", i + 1, j + 1),
            RootKind::F => "f".into(),
            RootKind::TwoF => "2f".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Root {
    pub kind: RootKind,
    pub vec: IVec,
    pub mult: u32,
    /// Multiplicity of `2α` (0 when `2α` is not a root).
    pub double_mult: u32,
    /// `⟨α,α⟩`
    pub norm2: Rat,
    /// Quasi-invariance shifts; empty for non-reduced roots.
    pub a_set: Vec<u32>,
}

impl Root {
    pub fn is_reduced(&self) -> bool {
        self.kind.is_reduced()
    }

    pub fn label(&self) -> String {
        self.kind.label()
    }
}

/// Shift `τ` of the difference operator together with its weight `κ_τ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shift {
    pub vec: IVec,
    pub kappa: Rat,
}

/// Validated exact-mode configuration.
#[derive(Clone, Debug)]
pub struct Config {
    params: Params,
    m: u32,
    n: u32,
    roots: Vec<Root>,
    rho: IVec,
    big_m: u32,
}

fn a_set(m: u32, m2: u32) -> Vec<u32> {
    (1..=m).chain((1..=m2).map(|j| m + 2 * j)).collect()
}

impl Config {
    pub fn build(params: Params) -> Result<Config> {
        params.validate()?;
        let l = params.l;
        let to_u32 = |r: Rat| r.to_i64().and_then(|v| u32::try_from(v).ok());
        let m = to_u32(params.m()).ok_or_else(|| Error::InvalidParams("m = kp must be a non-negative integer".into()))?;
        let n = to_u32(params.n()).ok_or_else(|| Error::InvalidParams("n must be a non-negative integer".into()))?;
        // Pair roots exist only for l > 1, where k is an integer.
        let k_mult = to_u32(params.k.clone()).unwrap_or(0);
        let mut roots = Vec::new();
        for kind in RootKind::all(l) {
            let (mult, double_mult) = kind.multiplicities(&m, &n, &k_mult, &params.p, &params.r);
            let vec = kind.vector(l);
            let norm2 = k_inner_with(&params.k, l, &vec, &vec);
            let a = if kind.is_reduced() { a_set(mult, double_mult) } else { Vec::new() };
            roots.push(Root { kind, vec, mult, double_mult, norm2, a_set: a });
        }
        let mut rho = IVec::ZERO;
        let mut big_m = 0;
        for r in &roots {
            rho = rho + r.vec.scale(r.mult as i32);
            big_m += r.mult;
        }
        let closed = l as u32 * (m + n + (l as u32 - 1) * k_mult + 2) + params.p + params.r;
        assert_eq!(big_m, closed, "multiplicity sum disagrees with its closed form");
        Ok(Config { params, m, n, roots, rho, big_m })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn l(&self) -> usize {
        self.params.l
    }

    /// Number of spectral (and spatial) variables, `l + 1`.
    pub fn nvars(&self) -> usize {
        self.params.l + 1
    }

    pub fn k(&self) -> &Rat {
        &self.params.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Total multiplicity `M = Σ_α m_α`, the number of iterations.
    pub fn big_m(&self) -> u32 {
        self.big_m
    }

    pub fn rho(&self) -> IVec {
        self.rho
    }

    pub fn positive_roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn reduced_roots(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.is_reduced())
    }

    pub fn root(&self, kind: RootKind) -> Option<&Root> {
        self.roots.iter().find(|r| r.kind == kind)
    }

    pub fn k_inner(&self, u: &IVec, w: &IVec) -> Rat {
        k_inner_with(&self.params.k, self.l(), u, w)
    }

    /// The translation of `ζ` induced by the vector shift `z ↦ z + u`.
    pub fn zeta_shift(&self, u: &IVec) -> Vec<Rat> {
        let l = self.l();
        let mut t: Vec<Rat> = (0..l).map(|i| Rat::from_int(u.get(i) as i64)).collect();
        t.push(&self.params.k * Rat::from_int(u.get(l) as i64));
        t
    }

    /// The affine-linear polynomial `⟨u, z⟩` in `ζ`.
    pub fn pairing_poly(&self, u: &IVec) -> ZPoly {
        let nv = self.nvars();
        ZPoly::from_terms(nv, (0..nv).map(|i| (Monomial::var(i), Rat::from_int(u.get(i) as i64))))
    }

    /// `z² = Σ ζ_i² + ζ_{l+1}² / k`.
    pub fn z_squared(&self) -> ZPoly {
        let nv = self.nvars();
        ZPoly::from_terms(
            nv,
            (0..nv).map(|i| {
                let c = if i == self.l() { self.params.k.recip() } else { Rat::ONE };
                (Monomial::var(i).with_exp(i, 2), c)
            }),
        )
    }

    /// `S = {±2e_i, ±2f}` with weights `κ = 1` and `κ_{±2f} = 1/k`.
    pub fn shifts(&self) -> Vec<Shift> {
        let l = self.l();
        let mut out = Vec::new();
        for i in 0..=l {
            let kappa = if i == l { self.params.k.recip() } else { Rat::ONE };
            for s in [2, -2] {
                out.push(Shift { vec: IVec::unit(i, s), kappa: kappa.clone() });
            }
        }
        out
    }

    pub fn symbols(&self) -> Result<Symbols> {
        Symbols::build(self)
    }

    /// Coordinates of `ν` in the simple basis `α_1 = 2(e_1-e_2), …,
    /// α_l = 2(e_l - f), α_{l+1} = 2f`; `None` if `ν ∉ L`.
    pub fn lattice_coords(&self, nu: &IVec) -> Option<Vec<i64>> {
        let nv = self.nvars();
        if (0..nv).any(|i| nu.get(i) % 2 != 0) || (nv..MAX_VARS).any(|i| nu.get(i) != 0) {
            return None;
        }
        let mut acc = 0i64;
        Some(
            (0..nv)
                .map(|i| {
                    acc += nu.get(i) as i64 / 2;
                    acc
                })
                .collect(),
        )
    }

    pub fn in_l_plus(&self, nu: &IVec) -> bool {
        self.lattice_coords(nu).is_some_and(|c| c.iter().all(|&v| v >= 0))
    }

    /// Height `h(ν) = Σ c_j`; meaningful for `ν ∈ L`.
    pub fn height(&self, nu: &IVec) -> Option<i64> {
        self.lattice_coords(nu).map(|c| c.iter().sum())
    }

    /// The lattice point with the given simple-basis coordinates.
    pub fn from_lattice_coords(&self, c: &[i64]) -> IVec {
        let mut v = [0; MAX_VARS];
        let mut prev = 0;
        for (i, &ci) in c.iter().enumerate() {
            v[i] = (2 * (ci - prev)) as i32;
            prev = ci;
        }
        IVec(v)
    }

    /// All `ν ∈ L_+` with `h(ν) ≤ max_height`, ordered by height.
    pub fn lattice_points(&self, max_height: u32) -> Vec<IVec> {
        lattice_points(self.nvars(), max_height)
    }
}

/// `ν ∈ L_+` with `h(ν) ≤ max_height` for rank `nvars - 1`, ordered by height.
pub fn lattice_points(nvars: usize, max_height: u32) -> Vec<IVec> {
    let mut out = Vec::new();
    for h in 0..=max_height as i64 {
        let mut c = vec![0i64; nvars];
        compositions(h, 0, &mut c, &mut |c| {
            let mut v = [0; MAX_VARS];
            let mut prev = 0;
            for (i, &ci) in c.iter().enumerate() {
                v[i] = (2 * (ci - prev)) as i32;
                prev = ci;
            }
            out.push(IVec(v));
        });
    }
    out
}

fn compositions(left: i64, pos: usize, c: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
    if pos + 1 == c.len() {
        c[pos] = left;
        f(c);
        return;
    }
    for v in (0..=left).rev() {
        c[pos] = v;
        compositions(left - v, pos + 1, c, f);
    }
}

/// `⟨u,w⟩ = Σ_{i≤l} u_i w_i + k u_f w_f`.
pub fn k_inner_with(k: &Rat, l: usize, u: &IVec, w: &IVec) -> Rat {
    let head: i64 = (0..l).map(|i| u.get(i) as i64 * w.get(i) as i64).sum();
    Rat::from_int(head) + k * Rat::from_int(u.get(l) as i64 * w.get(l) as i64)
}

/// Symbolic data attached to a configuration.
#[derive(Clone, Debug)]
pub struct Symbols {
    /// `∏_{α reduced, s ∈ A_α} (⟨α,z⟩² - s²⟨α,α⟩²)`
    pub q: ZPoly,
    /// `Σ_τ κ_τ (X^τ - 1)`
    pub mu: XExpPoly,
    /// Leading-term normalizer of the constructed function.
    pub c: XExpPoly,
    /// `∏_α (X^α - X^{-α})^{m_α}` over all positive roots.
    pub delta: XExpPoly,
    /// `c / δ`
    pub g: XExpPoly,
    /// `c / ∏_{α reduced} (X^{2α} - X^{-2α})^{m_α + m_{2α}}`
    pub c_sinh_constant: Rat,
    /// `G / ∏_{α reduced} (X^α + X^{-α})^{m_α}`
    pub g_cosh_constant: Rat,
}

impl Symbols {
    fn build(cfg: &Config) -> Result<Symbols> {
        let nv = cfg.nvars();
        let mut q = ZPoly::one(nv);
        for a in cfg.reduced_roots() {
            let form = cfg.pairing_poly(&a.vec);
            let sq = &form * &form;
            for &s in &a.a_set {
                let s2 = Rat::from(s * s) * &a.norm2 * &a.norm2;
                q = &q * &(&sq - &ZPoly::constant(nv, s2));
            }
        }

        let mut mu = XExpPoly::zero(nv);
        for t in cfg.shifts() {
            mu.add_term(t.vec, t.kappa.clone());
            mu.add_term(IVec::ZERO, -t.kappa);
        }

        let shifts = cfg.shifts();
        let mut c = XExpPoly::constant(nv, factorial(cfg.big_m()) / Rat::from_int(2).pow((cfg.l() as u32 * cfg.n + cfg.params.r) as i32));
        let mut sinh_prod = XExpPoly::one(nv);
        let mut cosh_prod = XExpPoly::one(nv);
        for a in cfg.reduced_roots() {
            let factor = XExpPoly::from_terms(nv, shifts.iter().map(|t| (t.vec, &t.kappa * cfg.k_inner(&t.vec, &a.vec))));
            let e = a.mult + a.double_mult;
            c = &c * &factor.pow(e);
            sinh_prod = &sinh_prod * &XExpPoly::sinh2(nv, a.vec.scale(2)).pow(e);
            cosh_prod = &cosh_prod * &XExpPoly::cosh2(nv, a.vec).pow(a.mult);
        }

        let mut delta = XExpPoly::one(nv);
        for a in cfg.positive_roots() {
            delta = &delta * &XExpPoly::sinh2(nv, a.vec).pow(a.mult);
        }

        let g = c.divide(&delta)?;
        let c_sinh_constant = constant_ratio(&c, &sinh_prod)?;
        let g_cosh_constant = constant_ratio(&g, &cosh_prod)?;
        Ok(Symbols { q, mu, c, delta, g, c_sinh_constant, g_cosh_constant })
    }
}

/// The scalar `λ` with `a = λ b`, or `NotDivisible` if none exists.
fn constant_ratio(a: &XExpPoly, b: &XExpPoly) -> Result<Rat> {
    let q = a.divide(b)?;
    match q.terms().iter().next() {
        Some((e, c)) if q.len() == 1 && e.is_zero() => Ok(c.clone()),
        _ => Err(Error::NotDivisible),
    }
}
