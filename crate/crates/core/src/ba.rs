//! Construction of `Φ = (D - μ)^M [Q e^{⟨z,x⟩}]` and verification of the
//! defining properties of `ψ = Φ / c`.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Config, Params};
use crate::error::{Error, Result};
use crate::operator::{build_d, DiffOp};
use crate::poly::{IVec, QuasiPoly, XExpPoly, ZPoly};
use crate::quasi_invariance::{is_quasi_invariant, QiReport};
use crate::rational::Rat;
use crate::sampling;

/// Ceiling on the size of exact constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_m: u32,
    pub max_l: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_m: 8, max_l: 2 }
    }
}

impl Budget {
    pub fn check(&self, cfg: &Config) -> Result<()> {
        if cfg.big_m() > self.max_m || cfg.l() > self.max_l {
            return Err(Error::BudgetExceeded(format!(
                "M = {}, l = {} exceeds the ceiling M <= {}, l <= {}",
                cfg.big_m(),
                cfg.l(),
                self.max_m,
                self.max_l
            )));
        }
        Ok(())
    }
}

/// `ψ = Φ / c` stored as the exact pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BAFunction {
    pub params: Params,
    pub big_m: u32,
    pub phi: QuasiPoly,
    pub c: XExpPoly,
    /// z-degree after each of the `M` steps.
    pub degrees: Vec<u32>,
}

impl BAFunction {
    /// SHA-256 of the canonical JSON encoding.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("serializable");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// On-disk form: the function plus its hash and build time.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Artifact {
    pub schema_version: u32,
    pub content_hash: String,
    pub build_ms: u64,
    pub ba: BAFunction,
}

pub const ARTIFACT_SCHEMA_VERSION: u32 = 1;

impl Artifact {
    pub fn new(ba: BAFunction, build_ms: u64) -> Artifact {
        Artifact { schema_version: ARTIFACT_SCHEMA_VERSION, content_hash: ba.content_hash(), build_ms, ba }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    /// Parses and checks the schema version and content hash.
    pub fn from_json(s: &str) -> Result<Artifact> {
        let a: Artifact = serde_json::from_str(s).map_err(|e| Error::Deserialization(e.to_string()))?;
        if a.schema_version != ARTIFACT_SCHEMA_VERSION {
            return Err(Error::Deserialization(format!("unsupported schema version {}", a.schema_version)));
        }
        let h = a.ba.content_hash();
        if h != a.content_hash {
            return Err(Error::Deserialization(format!("content hash mismatch: stored {}, computed {h}", a.content_hash)));
        }
        Config::build(a.ba.params.clone()).map_err(|e| Error::Deserialization(e.to_string()))?;
        Ok(a)
    }
}

/// Runs the `M`-step scheme with per-step degree checks and the final
/// annihilation check `(D - μ)^{M+1}[Q e] = 0`.
pub fn construct(cfg: &Config, budget: &Budget) -> Result<(BAFunction, u64)> {
    budget.check(cfg)?;
    let start = Instant::now();
    let sym = cfg.symbols()?;
    let d = build_d(cfg);
    let big_m = cfg.big_m();
    let step = |f: &QuasiPoly| -> Result<QuasiPoly> { Ok(d.apply(f)?.sub(&f.mul_xexp(&sym.mu))) };

    let mut f = QuasiPoly::from_zpoly(sym.q.clone());
    let mut degrees = Vec::with_capacity(big_m as usize);
    for b in 1..=big_m {
        f = step(&f)?;
        let degree = f.z_degree().unwrap_or(0);
        let bound = 2 * big_m - b;
        if f.is_zero() || degree > bound {
            return Err(Error::DegreeAnomaly { step: b as usize, degree, bound });
        }
        degrees.push(degree);
    }
    if !step(&f)?.is_zero() {
        return Err(Error::EigenViolation("one further application of D - mu does not annihilate".into()));
    }
    let ba = BAFunction { params: cfg.params().clone(), big_m, phi: f, c: sym.c, degrees };
    Ok((ba, start.elapsed().as_millis() as u64))
}

/// `∏_{α > 0} ⟨α,z⟩^{m_α}` over all positive roots.
pub fn leading_product(cfg: &Config) -> ZPoly {
    let mut p = ZPoly::one(cfg.nvars());
    for a in cfg.positive_roots() {
        p = &p * &cfg.pairing_poly(&a.vec).pow(a.mult);
    }
    p
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub leading_term: bool,
    pub quasi_invariance: QiReport,
}

/// Checks the leading-term and quasi-invariance axioms.
pub fn verify_axioms(cfg: &Config, ba: &BAFunction) -> Result<AxiomReport> {
    let expected = QuasiPoly::from_zpoly(leading_product(cfg)).mul_xexp(&ba.c);
    let leading_term = ba.phi.z_degree() == Some(cfg.big_m()) && ba.phi.z_homogeneous(cfg.big_m()) == expected;
    if !leading_term {
        return Err(Error::AxiomViolation {
            axiom: 1,
            detail: "top z-homogeneous part differs from c(x) times the product of root pairings".into(),
        });
    }
    let qi = is_quasi_invariant(cfg, &ba.phi);
    if !qi.ok {
        return Err(Error::AxiomViolation { axiom: 2, detail: format!("failing (root, s): {:?}", qi.failures) });
    }
    Ok(AxiomReport { leading_term, quasi_invariance: qi })
}

/// `D Φ = μ Φ` exactly.
pub fn verify_eigen_d(cfg: &Config, d: &DiffOp, phi: &QuasiPoly) -> Result<()> {
    let mu = cfg.symbols()?.mu;
    let lhs = d.apply(phi)?;
    let diff = lhs.sub(&phi.mul_xexp(&mu));
    if !diff.is_zero() {
        return Err(Error::EigenViolation(format!("D Phi - mu Phi has {} nonzero terms", diff.term_count())));
    }
    Ok(())
}

/// Weights of the potential: `C_α = m_α(m_α + 2m_{2α} + 1)⟨α,α⟩`, nonzero ones only.
fn potential_weights(cfg: &Config) -> Vec<(IVec, Rat)> {
    cfg.positive_roots()
        .iter()
        .filter(|a| a.mult > 0)
        .map(|a| (a.vec, Rat::from(a.mult * (a.mult + 2 * a.double_mult + 1)) * &a.norm2))
        .collect()
}

/// Metric weights `(1, …, 1, k)` of the Laplacian in `(x_1, …, x_l, v)`.
fn metric(cfg: &Config) -> Vec<Rat> {
    (0..cfg.nvars()).map(|j| if j == cfg.l() { cfg.k().clone() } else { Rat::ONE }).collect()
}

/// The numerator of `(Hψ + z²ψ) e^{-⟨z,x⟩}` after clearing `c³ ∏ S_α²`,
/// where `S_α = X^α - X^{-α}`. It vanishes iff the eigen-relation holds.
pub fn h_numerator(cfg: &Config, phi: &QuasiPoly, c: &XExpPoly) -> QuasiPoly {
    let nv = cfg.nvars();
    let g = metric(cfg);
    let weights = potential_weights(cfg);
    let d = |j: usize| move |e: &IVec| Rat::from_int(e.get(j) as i64);
    let d2 = |j: usize| move |e: &IVec| Rat::from_int((e.get(j) as i64).pow(2));

    // c³ (Δu + 2 Σ ζ_j ∂_j u) with u = P/c.
    let c2 = c * c;
    let mut kinetic = QuasiPoly::zero(nv);
    for j in 0..nv {
        let dp = phi.map_x_weight(d(j));
        let d2p = phi.map_x_weight(d2(j));
        let dc = c.map_weight(d(j));
        let d2c = c.map_weight(d2(j));
        let mut lap = d2p.mul_xexp(&c2);
        lap = lap.sub(&dp.mul_xexp(&(c * &dc)).scale(&Rat::from_int(2)));
        lap = lap.sub(&phi.mul_xexp(&(c * &d2c)));
        lap = lap.add(&phi.mul_xexp(&(&dc * &dc)).scale(&Rat::from_int(2)));
        kinetic = kinetic.add(&lap.scale(&g[j]));
        let first = dp.mul_xexp(c).sub(&phi.mul_xexp(&dc)).mul_xexp(c).mul_var(j);
        kinetic = kinetic.add(&first.scale(&Rat::from_int(2)));
    }

    let sq: Vec<XExpPoly> = weights.iter().map(|(a, _)| XExpPoly::sinh2(nv, *a).pow(2)).collect();
    let all = sq.iter().fold(XExpPoly::one(nv), |acc, s| &acc * s);
    let mut pot = XExpPoly::zero(nv);
    for (i, (_, w)) in weights.iter().enumerate() {
        let others = sq.iter().enumerate().filter(|(j, _)| *j != i).fold(XExpPoly::one(nv), |acc, (_, s)| &acc * s);
        pot.add_scaled(&others, &(w * Rat::from_int(4)));
    }
    kinetic.mul_xexp(&all).sub(&phi.mul_xexp(&(&c2 * &pot)))
}

pub fn verify_h_exact(cfg: &Config, ba: &BAFunction) -> Result<()> {
    let n = h_numerator(cfg, &ba.phi, &ba.c);
    if !n.is_zero() {
        return Err(Error::EigenViolation(format!("cleared numerator of H psi + z^2 psi has {} terms", n.term_count())));
    }
    Ok(())
}

/// Value and first/second partial derivatives of `Σ_η a_η X^η` at `x`.
struct Jet {
    val: Complex64,
    d1: Vec<Complex64>,
    d2: Vec<Complex64>,
}

fn jet<'a>(nv: usize, terms: impl Iterator<Item = (&'a IVec, Complex64)>, x: &[Complex64]) -> Jet {
    let zero = Complex64::new(0.0, 0.0);
    let mut j = Jet { val: zero, d1: vec![zero; nv], d2: vec![zero; nv] };
    for (e, a) in terms {
        let t = a * XExpPoly::exp_at(e, x);
        j.val += t;
        for i in 0..nv {
            let ei = e.get(i) as f64;
            j.d1[i] += t * ei;
            j.d2[i] += t * ei * ei;
        }
    }
    j
}

/// Relative residual of `Hψ + z²ψ = 0` at one point, from exact
/// x-derivatives evaluated in floating point.
pub fn h_residual_at(cfg: &Config, ba: &BAFunction, z: &[Complex64], x: &[Complex64]) -> f64 {
    let nv = cfg.nvars();
    let g: Vec<f64> = metric(cfg).iter().map(Rat::to_f64).collect();
    let p = jet(nv, ba.phi.body().iter().map(|(e, b)| (e, b.eval(z))), x);
    let c = jet(nv, ba.c.terms().iter().map(|(e, a)| (e, Complex64::new(a.to_f64(), 0.0))), x);
    let u = p.val / c.val;
    let mut lap = Complex64::new(0.0, 0.0);
    let mut drift = Complex64::new(0.0, 0.0);
    for j in 0..nv {
        let du = (p.d1[j] * c.val - p.val * c.d1[j]) / (c.val * c.val);
        let d2u = p.d2[j] / c.val - 2.0 * p.d1[j] * c.d1[j] / (c.val * c.val) - p.val * c.d2[j] / (c.val * c.val)
            + 2.0 * p.val * c.d1[j] * c.d1[j] / (c.val * c.val * c.val);
        lap += g[j] * d2u;
        drift += 2.0 * z[j] * du;
    }
    let mut v = Complex64::new(0.0, 0.0);
    for (a, w) in potential_weights(cfg) {
        let s = XExpPoly::exp_at(&a, x) - XExpPoly::exp_at(&-a, x);
        v += 4.0 * w.to_f64() / (s * s);
    }
    let pot = v * u;
    (lap + drift - pot).norm() / (lap.norm() + drift.norm() + pot.norm())
}

/// Seeded sample points `(ζ, x)` away from the zeros of `c` and of every `sinh⟨α,x⟩`.
pub fn h_sample_points(cfg: &Config, c: &XExpPoly, n: usize, seed: u64) -> Vec<(Vec<Complex64>, Vec<Complex64>)> {
    let nv = cfg.nvars();
    let mut rng = sampling::seeded(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z: Vec<Complex64> = (0..nv).map(|_| sampling::complex_normal(&mut rng, 1.0)).collect();
        let x: Vec<Complex64> = (0..nv).map(|_| sampling::complex_uniform(&mut rng, (-0.8, 0.8), (-0.4, 0.4))).collect();
        let near_wall = cfg.positive_roots().iter().any(|a| {
            let s = XExpPoly::exp_at(&a.vec, &x) - XExpPoly::exp_at(&-a.vec, &x);
            s.norm() < 0.1
        });
        if near_wall || c.eval(&x).norm() < 1e-3 {
            continue;
        }
        out.push((z, x));
    }
    out
}

/// Maximum relative residual of `Hψ + z²ψ` over `n` seeded points.
pub fn verify_h_numeric(cfg: &Config, ba: &BAFunction, n: usize, seed: u64) -> f64 {
    h_sample_points(cfg, &ba.c, n, seed).iter().map(|(z, x)| h_residual_at(cfg, ba, z, x)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(l: usize, k: i64, p: u32, r: u32) -> (Config, BAFunction) {
        let cfg = Config::build(Params::new(l, Rat::from_int(k), p, r)).unwrap();
        let ba = construct(&cfg, &Budget::default()).unwrap().0;
        (cfg, ba)
    }

    #[test]
    fn smallest_construction() {
        let (cfg, ba) = build(1, 1, 0, 0);
        assert_eq!(ba.big_m, 2);
        assert_eq!(ba.phi.z_degree(), Some(2));
        verify_axioms(&cfg, &ba).unwrap();
        verify_eigen_d(&cfg, &build_d(&cfg), &ba.phi).unwrap();
        verify_h_exact(&cfg, &ba).unwrap();
        assert!(verify_h_numeric(&cfg, &ba, 5, 1) < 1e-9);
    }

    #[test]
    fn leading_product_smallest() {
        let cfg = Config::build(Params::new(1, Rat::ONE, 0, 0)).unwrap();
        let z1 = ZPoly::var(2, 0);
        let z2 = ZPoly::var(2, 1);
        assert_eq!(leading_product(&cfg), &(&z1 + &z2) * &(&z1 - &z2));
    }

    #[test]
    fn mutation_breaks_axioms() {
        let (cfg, mut ba) = build(1, 1, 0, 0);
        let (e, p) = ba.phi.body().iter().next().map(|(e, p)| (*e, p.clone())).unwrap();
        let (m, _) = p.leading_term().unwrap();
        ba.phi.add_part(e, &ZPoly::monomial(2, *m, Rat::ONE));
        assert!(matches!(verify_axioms(&cfg, &ba), Err(Error::AxiomViolation { .. })));
    }

    #[test]
    fn q_is_not_an_eigenfunction() {
        let (cfg, _) = build(1, 1, 0, 0);
        let q = QuasiPoly::from_zpoly(cfg.symbols().unwrap().q);
        assert!(verify_eigen_d(&cfg, &build_d(&cfg), &q).is_err());
    }

    #[test]
    fn budget_refuses_large_rank() {
        let cfg = Config::build(Params::new(3, Rat::ONE, 0, 0)).unwrap();
        assert!(matches!(construct(&cfg, &Budget::default()), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn artifact_round_trip() {
        let (_, ba) = build(1, 1, 0, 0);
        let art = Artifact::new(ba, 0);
        let s = art.to_json();
        let back = Artifact::from_json(&s).unwrap();
        assert_eq!(back.to_json(), s);
        let corrupted = s.replacen("\"1/1\"", "\"2/1\"", 1);
        assert!(matches!(Artifact::from_json(&corrupted), Err(Error::Deserialization(_))));
        assert!(matches!(Artifact::from_json("{not json"), Err(Error::Deserialization(_))));
    }
}
