//! Membership tests for the ring of quasi-invariants: for each reduced
//! root `α` and `s ∈ A_α`, `f(z + sα) = f(z - sα)` on `⟨α,z⟩ = 0`.

use serde::Serialize;

use crate::config::{Config, Root};
use crate::poly::{IVec, LinForm, QuasiPoly, ZPoly};
use crate::rational::Rat;

fn hyperplane(cfg: &Config, alpha: &IVec) -> LinForm {
    LinForm::from_poly(&cfg.pairing_poly(alpha)).expect("root pairing is linear").1
}

/// `f(z + sα) - f(z - sα)` divided by `e^{⟨z,x⟩}` and restricted to
/// `⟨α,z⟩ = 0`. The shifted prefactors contribute `X^{±sα}`.
pub fn condition_residual(cfg: &Config, f: &QuasiPoly, alpha: &IVec, s: i32) -> QuasiPoly {
    let plane = hyperplane(cfg, alpha);
    let sa = alpha.scale(s);
    let t_plus = cfg.zeta_shift(&sa);
    let t_minus: Vec<Rat> = t_plus.iter().map(|c| -c).collect();
    let mut g = QuasiPoly::zero(cfg.nvars());
    for (eta, body) in f.body() {
        g.add_part(*eta + sa, &body.shift(&t_plus).restrict_to_hyperplane(&plane));
        g.add_part(*eta - sa, &-&body.shift(&t_minus).restrict_to_hyperplane(&plane));
    }
    g
}

pub fn check_condition(cfg: &Config, f: &QuasiPoly, alpha: &IVec, s: i32) -> bool {
    condition_residual(cfg, f, alpha, s).is_zero()
}

/// Outcome of a full sweep over all conditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QiReport {
    pub ok: bool,
    /// Failing `(root label, s)` pairs.
    pub failures: Vec<(String, u32)>,
    pub checked: usize,
}

fn sweep(cfg: &Config, mut holds: impl FnMut(&Root, u32) -> bool) -> QiReport {
    let mut failures = Vec::new();
    let mut checked = 0;
    for root in cfg.reduced_roots() {
        for &s in &root.a_set {
            checked += 1;
            if !holds(root, s) {
                failures.push((root.label(), s));
            }
        }
    }
    QiReport { ok: failures.is_empty(), failures, checked }
}

pub fn is_quasi_invariant(cfg: &Config, f: &QuasiPoly) -> QiReport {
    sweep(cfg, |root, s| check_condition(cfg, f, &root.vec, s as i32))
}

/// The same conditions for a plain polynomial `p(ζ)` with no exponential factor.
pub fn polynomial_condition(cfg: &Config, p: &ZPoly, alpha: &IVec, s: i32) -> bool {
    let plane = hyperplane(cfg, alpha);
    let t = cfg.zeta_shift(&alpha.scale(s));
    let tm: Vec<Rat> = t.iter().map(|c| -c).collect();
    (&p.shift(&t) - &p.shift(&tm)).restrict_to_hyperplane(&plane).is_zero()
}

/// Labels of failing conditions for a plain polynomial; empty if it is quasi-invariant.
pub fn polynomial_failures(cfg: &Config, p: &ZPoly) -> Vec<String> {
    sweep(cfg, |root, s| polynomial_condition(cfg, p, &root.vec, s as i32))
        .failures
        .into_iter()
        .map(|(a, s)| format!("({a}, s={s})"))
        .collect()
}

/// Test corpus of quasi-invariant quasi-polynomials:
/// `Q e`, `z² Q e`, `(z²)² Q e`, `Q² e`.
pub fn qi_samples(cfg: &Config, q: &ZPoly) -> Vec<(&'static str, QuasiPoly)> {
    let z2 = cfg.z_squared();
    vec![
        ("Q", QuasiPoly::from_zpoly(q.clone())),
        ("z2*Q", QuasiPoly::from_zpoly(&z2 * q)),
        ("z2^2*Q", QuasiPoly::from_zpoly(&(&z2 * &z2) * q)),
        ("Q^2", QuasiPoly::from_zpoly(q * q)),
    ]
}
