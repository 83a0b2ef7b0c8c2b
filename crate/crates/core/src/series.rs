//! The x-series side: the coefficients `q_ν` of the normalized solution
//! `φ = e^{⟨z-ρ,x⟩} Σ_{ν∈L_+} q_ν e^{⟨ν,x⟩}`, the coefficients `c_ν`
//! extracted from a constructed function, and the identities linking them.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::ba::BAFunction;
use crate::config::{lattice_points, Config};
use crate::error::{Error, Result};
use crate::numeric::ComplexParams;
use crate::poly::{xexp_divide, IVec, QuasiPoly, XExpPoly, ZPoly, ZRatFunc};
use crate::rational::Rat;
use crate::sampling::{complex_uniform, seeded};

type C = Complex64;

pub const MAX_EXACT_HEIGHT: u32 = 10;
pub const MAX_NUMERIC_HEIGHT: u32 = 64;
/// Numeric points closer than this to a hyperplane `⟨ν,ν+2z⟩ = 0` are refused.
pub const HYPERPLANE_EPS: f64 = 1e-3;

/// Coefficients indexed by lattice points of height at most `max_height`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesCoeffs<T> {
    pub max_height: u32,
    pub coeffs: BTreeMap<IVec, T>,
}

impl<T> SeriesCoeffs<T> {
    pub fn get(&self, nu: &IVec) -> Option<&T> {
        self.coeffs.get(nu)
    }
}

/// Exact `q_ν(z)` for `h(ν) ≤ max_height`, solved in height order.
pub fn solve_recurrence(cfg: &Config, max_height: u32) -> Result<SeriesCoeffs<ZRatFunc>> {
    if max_height > MAX_EXACT_HEIGHT {
        return Err(Error::HeightBudget { requested: max_height, max: MAX_EXACT_HEIGHT });
    }
    let nv = cfg.nvars();
    let rho = cfg.rho();
    let mut q: BTreeMap<IVec, ZRatFunc> = BTreeMap::new();
    for nu in lattice_points(nv, max_height) {
        if nu.is_zero() {
            q.insert(nu, ZRatFunc::constant(nv, Rat::ONE));
            continue;
        }
        let mut rhs = ZRatFunc::zero(nv);
        for root in cfg.positive_roots().iter().filter(|r| r.mult > 0) {
            let weight = Rat::from(4 * root.mult);
            let mut j = 1;
            loop {
                let lower = nu - root.vec.scale(2 * j);
                if !cfg.in_l_plus(&lower) {
                    break;
                }
                if let Some(ql) = q.get(&lower).filter(|v| !v.is_zero()) {
                    let c = cfg.k_inner(&root.vec, &(lower - rho));
                    let lin = &cfg.pairing_poly(&root.vec) + &ZPoly::constant(nv, c);
                    rhs = rhs.add(&ql.mul_poly(&lin.scale(&weight)));
                }
                j += 1;
            }
        }
        let diag = &cfg.pairing_poly(&nu).scale(&Rat::from_int(2)) + &ZPoly::constant(nv, cfg.k_inner(&nu, &nu));
        let inv = ZRatFunc::inverse_affine(&diag).expect("⟨ν,ν⟩ ≠ 0 keeps the diagonal form nonconstant");
        q.insert(nu, rhs.neg().mul(&inv).reduce());
    }
    Ok(SeriesCoeffs { max_height, coeffs: q })
}

/// Complex `q_ν(z)` for `h(ν) ≤ max_height` at a single spectral point.
pub fn solve_recurrence_numeric(cp: &ComplexParams, max_height: u32, z: &[C]) -> Result<SeriesCoeffs<C>> {
    if max_height > MAX_NUMERIC_HEIGHT {
        return Err(Error::HeightBudget { requested: max_height, max: MAX_NUMERIC_HEIGHT });
    }
    let nv = cp.nvars();
    let rho = cp.rho();
    let roots: Vec<_> = cp.roots().into_iter().filter(|r| r.mult.norm() > 0.0).collect();
    let root_z: Vec<C> = roots.iter().map(|r| cp.pair_z(&r.vec, z)).collect();
    let root_rho: Vec<C> = roots.iter().map(|r| cp.inner(&crate::numeric::to_c(&r.vec, nv), &rho)).collect();
    let mut q: BTreeMap<IVec, C> = BTreeMap::new();
    for nu in lattice_points(nv, max_height) {
        if nu.is_zero() {
            q.insert(nu, C::new(1.0, 0.0));
            continue;
        }
        let mut rhs = C::new(0.0, 0.0);
        for (idx, root) in roots.iter().enumerate() {
            let mut j = 1;
            loop {
                let lower = nu - root.vec.scale(2 * j);
                if !in_l_plus(nv, &lower) {
                    break;
                }
                let lin = root_z[idx] - root_rho[idx] + cp.inner_int(&root.vec, &lower);
                rhs += 4.0 * root.mult * lin * q[&lower];
                j += 1;
            }
        }
        let diag = cp.inner_int(&nu, &nu) + 2.0 * cp.pair_z(&nu, z);
        let grad = 2.0 * (0..nv).map(|i| (nu.get(i) as f64).powi(2)).sum::<f64>().sqrt();
        if diag.norm() / grad < HYPERPLANE_EPS {
            return Err(Error::HyperplaneHit { locus: format!("<nu,nu+2z> = 0 for nu = {:?}", nu.to_vec(nv)), distance: diag.norm() / grad });
        }
        q.insert(nu, -rhs / diag);
    }
    Ok(SeriesCoeffs { max_height, coeffs: q })
}

fn in_l_plus(nv: usize, nu: &IVec) -> bool {
    let mut acc = 0i64;
    for i in 0..nv {
        if nu.get(i) % 2 != 0 {
            return false;
        }
        acc += nu.get(i) as i64 / 2;
        if acc < 0 {
            return false;
        }
    }
    true
}

/// The exact coefficients `c_ν(z)` of `ψ = δ^{-1} e^{⟨z-ρ,x⟩} Σ c_ν e^{⟨ν,x⟩}`.
///
/// From `ψ = Φ e^{⟨z,x⟩} / c` and `c / δ = G`, each z-monomial coefficient of
/// `Φ` is `G X^{-ρ} Σ c_ν X^ν`, so the division below must be exact.
pub fn extract_expansion(cfg: &Config, ba: &BAFunction) -> Result<SeriesCoeffs<ZPoly>> {
    let nv = cfg.nvars();
    let divisor = cfg.symbols()?.g.shift(-cfg.rho());
    let mut coeffs: BTreeMap<IVec, ZPoly> = BTreeMap::new();
    for mono in ba.phi.z_monomials() {
        let quotient = xexp_divide(&ba.phi.coeff_of_monomial(&mono), &divisor)?;
        for (nu, c) in quotient.terms() {
            coeffs.entry(*nu).or_insert_with(|| ZPoly::zero(nv)).add_term(mono, c.clone());
        }
    }
    coeffs.retain(|_, p| !p.is_zero());
    let mut max_height = 0;
    for nu in coeffs.keys() {
        if !cfg.in_l_plus(nu) {
            return Err(Error::SupportViolation { exponent: nu.to_vec(nv) });
        }
        max_height = max_height.max(cfg.height(nu).unwrap_or(0) as u32);
    }
    Ok(SeriesCoeffs { max_height, coeffs })
}

/// `(-1)^{l(m+n)+p+r} 2^{ln+r} ∏_{α reduced, s∈A_α} (⟨α,z⟩ + s⟨α,α⟩)`.
pub fn c0_closed_form(cfg: &Config) -> ZPoly {
    let nv = cfg.nvars();
    let l = cfg.l() as u32;
    let (p, r) = (cfg.params().p, cfg.params().r);
    let sign = if (l * (cfg.m() + cfg.n()) + p + r).is_multiple_of(2) { 1 } else { -1 };
    let mut out = ZPoly::constant(nv, Rat::from_int(sign) * Rat::from_int(2).pow((l * cfg.n() + r) as i32));
    for root in cfg.reduced_roots() {
        for &s in &root.a_set {
            let shift = Rat::from(s) * &root.norm2;
            out = &out * &(&cfg.pairing_poly(&root.vec) + &ZPoly::constant(nv, shift));
        }
    }
    out
}

/// Exact comparison of the extracted `c_0` with its closed form.
pub fn check_c0(cfg: &Config, coeffs: &SeriesCoeffs<ZPoly>) -> Result<()> {
    let zero = ZPoly::zero(cfg.nvars());
    let c0 = coeffs.get(&IVec::ZERO).unwrap_or(&zero);
    let diff = c0 - &c0_closed_form(cfg);
    if diff.is_zero() {
        Ok(())
    } else {
        Err(Error::Mismatch(format!("c_0 differs from the closed form by {diff:?}")))
    }
}

/// Per-`ν` outcome of `c_ν = c_0 q_ν` for every `ν` solved by the recurrence.
pub fn cross_validate_each(cfg: &Config, extracted: &SeriesCoeffs<ZPoly>, series: &SeriesCoeffs<ZRatFunc>) -> Vec<(IVec, bool)> {
    let zero = ZPoly::zero(cfg.nvars());
    let c0 = extracted.get(&IVec::ZERO).unwrap_or(&zero);
    series
        .coeffs
        .iter()
        .map(|(nu, q)| {
            let c = extracted.get(nu).unwrap_or(&zero);
            (*nu, ZRatFunc::from_poly(c.clone()).equals(&q.mul_poly(c0)))
        })
        .collect()
}

/// Checks `c_ν = c_0 q_ν` for every `ν ∈ L_+` up to the recurrence height;
/// returns the number of identities checked. Beyond the support of the
/// extracted coefficients this forces `q_ν = 0`.
pub fn cross_validate(cfg: &Config, extracted: &SeriesCoeffs<ZPoly>, series: &SeriesCoeffs<ZRatFunc>) -> Result<usize> {
    let rows = cross_validate_each(cfg, extracted, series);
    if let Some((nu, _)) = rows.iter().find(|(_, ok)| !ok) {
        return Err(Error::Mismatch(format!(
            "c_nu != c_0 q_nu at nu = {:?} (height {})",
            nu.to_vec(cfg.nvars()),
            cfg.height(nu).unwrap_or(-1)
        )));
    }
    Ok(rows.len())
}

/// `|a|` relative to `scale`, with an exactly-zero scale giving `|a|`.
pub fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Both sides of the constant identity
/// `Σ m_α m_β ⟨α,β⟩ coth⟨α,x⟩ coth⟨β,x⟩ = Σ m_α m_β ⟨α,β⟩` (pairs with
/// `α ∉ {β, 2β, β/2}`) and the sum of moduli of the left-hand terms.
pub fn const_identity_sides(cp: &ComplexParams, x: &[C]) -> (C, C, f64) {
    let roots = cp.roots();
    let coth: Vec<C> = roots.iter().map(|r| 1.0 / cp.pair_x(&r.vec, x).tanh()).collect();
    let (mut lhs, mut rhs, mut scale) = (C::new(0.0, 0.0), C::new(0.0, 0.0), 0.0);
    for (a, ra) in roots.iter().enumerate() {
        for (b, rb) in roots.iter().enumerate() {
            if ra.vec == rb.vec || ra.vec == rb.vec.scale(2) || rb.vec == ra.vec.scale(2) {
                continue;
            }
            let w = ra.mult * rb.mult * cp.inner_int(&ra.vec, &rb.vec);
            let t = w * coth[a] * coth[b];
            lhs += t;
            rhs += w;
            scale += t.norm();
        }
    }
    (lhs, rhs, scale)
}

/// Seeded points `x = (x_1, …, x_l, v)` with `|sinh⟨α,x⟩| ≥ 0.15` for every root.
pub fn regular_x_points(cp: &ComplexParams, n: usize, seed: u64) -> Vec<Vec<C>> {
    let mut rng = seeded(seed);
    let roots = cp.roots();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x: Vec<C> = (0..cp.nvars()).map(|_| complex_uniform(&mut rng, (-1.0, 1.0), (-1.0, 1.0))).collect();
        if roots.iter().all(|r| cp.pair_x(&r.vec, &x).sinh().norm() >= 0.15) {
            out.push(x);
        }
    }
    out
}

/// Maximal relative residual of the constant identity over the points.
pub fn check_const_identity(cp: &ComplexParams, points: &[Vec<C>], tol: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in points {
        let (lhs, rhs, scale) = const_identity_sides(cp, x);
        worst = worst.max(relative((lhs - rhs).norm(), scale.max(rhs.norm())));
    }
    within("const identity", worst, tol)
}

fn within(check: &str, residual: f64, tol: f64) -> Result<f64> {
    if residual <= tol {
        Ok(residual)
    } else {
        Err(Error::ResidualExceeded { check: check.into(), residual, tolerance: tol })
    }
}

/// An exponential polynomial `Σ c_η e^{⟨η,x⟩}` with complex coefficients.
pub type ExpSum = Vec<(IVec, C)>;

/// Seeded test function with `terms` exponents drawn from `{-2, …, 2}^{l+1}`.
pub fn random_exp_sum(nvars: usize, terms: usize, seed: u64) -> ExpSum {
    use rand::Rng;
    let mut rng = seeded(seed);
    (0..terms)
        .map(|_| {
            let e: Vec<i32> = (0..nvars).map(|_| rng.random_range(-2..=2)).collect();
            (IVec::from_slice(&e), complex_uniform(&mut rng, (-1.0, 1.0), (-1.0, 1.0)))
        })
        .collect()
}

/// `((L + ρ²) g)(x)` and `(-δ H δ^{-1} g)(x)` with a magnitude scale.
///
/// `L = Δ - Σ 2m_α coth⟨α,x⟩ ∂_α`; the right side uses the logarithmic
/// derivative `w = ∇ log δ` and the quotient rule.
pub fn gauge_sides(cp: &ComplexParams, g: &ExpSum, x: &[C]) -> (C, C, f64) {
    let nv = cp.nvars();
    let l = cp.l;
    let metric: Vec<C> = (0..nv).map(|j| if j == l { cp.k } else { C::new(1.0, 0.0) }).collect();
    let roots = cp.roots();
    let zero = C::new(0.0, 0.0);

    let terms: Vec<(IVec, C)> = g.iter().map(|(e, c)| (*e, c * XExpPoly::exp_at(e, x))).collect();
    let gval: C = terms.iter().map(|t| t.1).sum();
    let d1: Vec<C> = (0..nv).map(|j| terms.iter().map(|(e, v)| v * e.get(j) as f64).sum()).collect();
    let d2: Vec<C> = (0..nv).map(|j| terms.iter().map(|(e, v)| v * (e.get(j) as f64).powi(2)).sum()).collect();
    let lap: C = terms.iter().map(|(e, v)| v * cp.inner_int(e, e)).sum();

    let mut lhs = lap + cp.rho_squared() * gval;
    let mut scale = lap.norm() + (cp.rho_squared() * gval).norm();
    let mut w = vec![zero; nv];
    let mut dw = vec![zero; nv];
    let mut potential = zero;
    for root in &roots {
        let t = cp.pair_x(&root.vec, x);
        let (coth, csch2) = (1.0 / t.tanh(), 1.0 / (t.sinh() * t.sinh()));
        let d_alpha: C = terms.iter().map(|(e, v)| v * cp.inner_int(&root.vec, e)).sum();
        let drift = 2.0 * root.mult * coth * d_alpha;
        lhs -= drift;
        scale += drift.norm();
        for j in 0..nv {
            let a = root.vec.get(j) as f64;
            w[j] += root.mult * a * coth;
            dw[j] -= root.mult * a * a * csch2;
        }
        let weight = root.mult * (root.mult + 2.0 * root.double_mult + 1.0) * cp.inner_int(&root.vec, &root.vec);
        potential += weight * csch2;
    }
    let mut rhs = -potential * gval;
    for j in 0..nv {
        let t = metric[j] * (d2[j] - 2.0 * w[j] * d1[j] - dw[j] * gval + w[j] * w[j] * gval);
        scale += t.norm();
        rhs += t;
    }
    scale += (potential * gval).norm();
    (lhs, rhs, scale)
}

/// Maximal relative deviation between the two sides of the gauge relation.
pub fn check_gauge(cp: &ComplexParams, g: &ExpSum, points: &[Vec<C>], tol: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in points {
        let (lhs, rhs, scale) = gauge_sides(cp, g, x);
        worst = worst.max(relative((lhs - rhs).norm(), scale));
    }
    within("gauge", worst, tol)
}

/// `Σ q_ν e^{⟨ν,x⟩}` from numeric coefficients (without the prefactor).
pub fn eval_series(series: &SeriesCoeffs<C>, x: &[C], max_height: u32) -> C {
    series
        .coeffs
        .iter()
        .filter(|(nu, _)| height(x.len(), nu) <= max_height as i64)
        .map(|(nu, q)| q * XExpPoly::exp_at(nu, x))
        .sum()
}

/// Height of a lattice point given by even coordinates in the `(e, f)` basis.
pub fn height(nvars: usize, nu: &IVec) -> i64 {
    (0..nvars).map(|i| (nvars - i) as i64 * nu.get(i) as i64 / 2).sum()
}

/// The exact expansion as a quasi-polynomial-like object
/// `Σ c_ν X^{ν-ρ}`, used to rebuild `δ Φ / c` for consistency checks.
pub fn expansion_as_quasi(cfg: &Config, coeffs: &SeriesCoeffs<ZPoly>) -> QuasiPoly {
    QuasiPoly::from_parts(cfg.nvars(), coeffs.coeffs.iter().map(|(nu, c)| (*nu - cfg.rho(), c.clone())))
}
