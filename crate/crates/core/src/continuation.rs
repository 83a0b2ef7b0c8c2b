//! Numerics for complex multiplicities: the ratios `C(z+τ)/C(z)` of the
//! Γ-normalization, the per-exponent identities of the conjugated operator
//! `C^{-1} D C`, and truncated-series residuals of both eigen-relations.
//!
//! Absolute values of `C(z)` are never formed; every check goes through the
//! telescoped ratios, which are rational in `z`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{ComplexParams, POLE_EPS};
use crate::poly::{IVec, XExpPoly};
use crate::sampling::{complex_normal, complex_uniform, seeded, SeededRng};
use crate::series::{height, relative, solve_recurrence_numeric, SeriesCoeffs};

type C = Complex64;

/// `Γ(a + n) / Γ(a)` by telescoping.
pub fn gamma_ratio(a: C, n: i64) -> Result<C> {
    let mut acc = C::new(1.0, 0.0);
    let check = |f: C| {
        if f.norm() < POLE_EPS {
            Err(Error::PoleHit(format!("telescoping factor {f} vanishes")))
        } else {
            Ok(f)
        }
    };
    if n >= 0 {
        for i in 0..n {
            acc *= check(a + i as f64)?;
        }
    } else {
        for i in 1..=-n {
            acc /= check(a - i as f64)?;
        }
    }
    Ok(acc)
}

/// `C(z+τ)/C(z)` for `τ = sign · 2e_i` (or `sign · 2f` when `i = l`).
pub fn c_ratio(cp: &ComplexParams, z: &[C], i: usize, sign: i64) -> Result<C> {
    let l = cp.l;
    let tau = IVec::unit(i, 2 * sign as i32);
    let (m, n, k, p, r) = (cp.m(), cp.n(), cp.k, cp.p, cp.r);
    let mut acc = C::new(1.0, 0.0);

    // Γ(-u)Γ(-u/2 - a/2) / (Γ(-u - a)Γ(-u/2 - a/2 - b)) with u ↦ u + du.
    let mut long_factor = |u: C, du: i64, a: C, b: C| -> Result<()> {
        if du == 0 {
            return Ok(());
        }
        debug_assert!(du % 2 == 0);
        let h = -du / 2;
        acc *= gamma_ratio(-u, -du)? * gamma_ratio(-u / 2.0 - a / 2.0, h)?;
        acc /= gamma_ratio(-u - a, -du)? * gamma_ratio(-u / 2.0 - a / 2.0 - b, h)?;
        Ok(())
    };
    for j in 0..l {
        long_factor(z[j], tau.get(j) as i64, m, n)?;
    }
    long_factor(z[l] / k, tau.get(l) as i64, p, r)?;

    for a in 0..l {
        for b in a + 1..l {
            for s in [1.0, -1.0] {
                let u = (z[a] + s * z[b]) / 2.0;
                let du = (tau.get(a) as f64 + s * tau.get(b) as f64) / 2.0;
                let du = du as i64;
                if du != 0 {
                    acc *= gamma_ratio(-u, -du)? / gamma_ratio(-u - k, -du)?;
                }
            }
        }
    }

    for j in 0..l {
        for s in [1.0, -1.0] {
            let before = -(z[j] + s * z[l]) - 1.0 - k;
            let after = before - (tau.get(j) as f64 + s * k * tau.get(l) as f64);
            if before.norm() < POLE_EPS {
                return Err(Error::PoleHit("mixed-root factor of C vanishes".into()));
            }
            acc *= after / before;
        }
    }
    Ok(acc)
}

/// Data attached to a spectral point: the series at `z` and at every `z + τ`,
/// with `a_τ(z)` and `C(z+τ)/C(z)`.
#[derive(Clone, Debug)]
pub struct SpectralPoint {
    pub z: Vec<C>,
    pub series: SeriesCoeffs<C>,
    pub shifts: Vec<ShiftData>,
}

#[derive(Clone, Debug)]
pub struct ShiftData {
    pub tau: IVec,
    pub kappa: C,
    pub a: C,
    pub ratio: C,
    pub series: SeriesCoeffs<C>,
}

impl SpectralPoint {
    /// Solves the recurrence to `height` at `z` and at its `2l+2` shifts.
    pub fn new(cp: &ComplexParams, z: Vec<C>, height: u32) -> Result<SpectralPoint> {
        let series = solve_recurrence_numeric(cp, height, &z)?;
        let mut shifts = Vec::new();
        for (i, s) in cp.shift_list() {
            let tau = IVec::unit(i, 2 * s as i32);
            let a = cp.a_tau(i, s, &z)?;
            let ratio = c_ratio(cp, &z, i, s)?;
            let series = solve_recurrence_numeric(cp, height, &cp.shifted(&z, &tau))?;
            shifts.push(ShiftData { tau, kappa: cp.kappa(i), a, ratio, series });
        }
        Ok(SpectralPoint { z, series, shifts })
    }
}

/// Extra height needed below `ν` to reach every `ν - τ`.
pub fn shift_reach(cp: &ComplexParams) -> u32 {
    cp.l as u32 + 1
}

/// Seeded complex-Gaussian spectral points, rejecting any point whose series
/// or shift data comes within the pole threshold of a singular locus.
pub fn sample_spectral_points(cp: &ComplexParams, n: usize, height: u32, seed: u64) -> Result<Vec<SpectralPoint>> {
    let mut rng = seeded(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        if attempts > 1000 * n.max(1) {
            return Err(Error::HyperplaneHit { locus: "no admissible spectral point found".into(), distance: 0.0 });
        }
        let z: Vec<C> = (0..cp.nvars()).map(|_| complex_normal(&mut rng, 2.0)).collect();
        match SpectralPoint::new(cp, z, height) {
            Ok(p) => out.push(p),
            Err(Error::HyperplaneHit { .. } | Error::PoleHit(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Outcome of the per-exponent identities at one spectral point.
#[derive(Clone, Debug, Serialize)]
pub struct DtildeReport {
    pub max_residual: f64,
    pub identities: usize,
    pub worst_nu: Vec<i32>,
}

/// Evaluates, for every `ν ∈ L` with `h(ν) ≤ max_height` that receives a
/// contribution,
/// `Σ_τ (κ_τ - a_τ) q_ν(z) + Σ_{μ+τ=ν} (a_τ C(z+τ)/C(z) q_μ(z+τ) - κ_τ q_μ(z))`.
/// The reported residual is the largest `|identity|` divided by the largest
/// single term over all identities; several identities vanish termwise.
pub fn verify_dtilde(cp: &ComplexParams, point: &SpectralPoint, max_height: u32) -> Result<DtildeReport> {
    let nv = cp.nvars();
    let needed = max_height + shift_reach(cp);
    if point.series.max_height < needed {
        return Err(Error::HeightBudget { requested: needed, max: point.series.max_height });
    }
    let mut targets: Vec<IVec> = point.series.coeffs.keys().copied().filter(|nu| height(nv, nu) <= max_height as i64).collect();
    for mu in point.series.coeffs.keys() {
        for sh in &point.shifts {
            let nu = *mu + sh.tau;
            if height(nv, &nu) <= max_height as i64 {
                targets.push(nu);
            }
        }
    }
    targets.sort();
    targets.dedup();

    let zero = C::new(0.0, 0.0);
    let mut sums = Vec::with_capacity(targets.len());
    let mut biggest: f64 = 0.0;
    for nu in &targets {
        let q_nu = point.series.get(nu).copied().unwrap_or(zero);
        let mut sum = zero;
        let mut add = |t: C| {
            sum += t;
            biggest = biggest.max(t.norm());
        };
        for sh in &point.shifts {
            add((sh.kappa - sh.a) * q_nu);
            let mu = *nu - sh.tau;
            if let (Some(q_shift), Some(q_here)) = (sh.series.get(&mu), point.series.get(&mu)) {
                add(sh.a * sh.ratio * q_shift);
                add(-sh.kappa * q_here);
            }
        }
        sums.push(sum.norm());
    }
    let mut report = DtildeReport { max_residual: 0.0, identities: targets.len(), worst_nu: vec![0; nv] };
    for (nu, s) in targets.iter().zip(sums) {
        let res = relative(s, biggest);
        if res > report.max_residual {
            report.max_residual = res;
            report.worst_nu = nu.to_vec(nv);
        }
    }
    Ok(report)
}

/// A point of `B` with `Re⟨α_i,x⟩ ∈ [-margin-1, -margin]` for the simple roots.
pub fn b_point(cp: &ComplexParams, margin: f64, rng: &mut SeededRng) -> Vec<C> {
    let nv = cp.nvars();
    let y: Vec<C> = (0..nv).map(|_| complex_uniform(rng, (-margin - 1.0, -margin), (-1.0, 1.0))).collect();
    let mut x = vec![C::new(0.0, 0.0); nv];
    x[nv - 1] = y[nv - 1] / 2.0;
    for j in (0..nv - 1).rev() {
        x[j] = y[j] / 2.0 + x[j + 1];
    }
    x
}

/// Smallest `-Re⟨α,x⟩` over positive roots; positive inside `B`.
pub fn b_margin(cp: &ComplexParams, x: &[C]) -> f64 {
    cp.roots().iter().map(|r| -cp.pair_x(&r.vec, x).re).fold(f64::INFINITY, f64::min)
}

/// Truncated `Σ_{h(ν)≤H} q_ν e^{⟨ν,x⟩}` and the largest height-`H` term.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhiValue {
    pub sum: C,
    pub tail: f64,
}

/// The truncated series body of `φ`; the prefactor `e^{⟨z-ρ,x⟩}` is omitted.
pub fn assemble_phi(series: &SeriesCoeffs<C>, x: &[C], truncation: u32) -> PhiValue {
    let nv = x.len();
    let mut sum = C::new(0.0, 0.0);
    let mut tail: f64 = 0.0;
    for (nu, q) in &series.coeffs {
        let h = height(nv, nu);
        if h > truncation as i64 {
            continue;
        }
        let t = q * XExpPoly::exp_at(nu, x);
        sum += t;
        if h == truncation as i64 {
            tail = tail.max(t.norm());
        }
    }
    PhiValue { sum, tail }
}

/// Relative residual of `D̃φ_H - μφ_H` for the truncation `φ_H`, divided by
/// the common factor `e^{⟨z-ρ,x⟩}`.
pub fn truncated_d_residual(cp: &ComplexParams, point: &SpectralPoint, x: &[C], truncation: u32) -> f64 {
    let here = assemble_phi(&point.series, x, truncation).sum;
    let mu = cp.mu(x);
    let mut res = -mu * here;
    let mut scale = res.norm();
    for sh in &point.shifts {
        let moved = assemble_phi(&sh.series, x, truncation).sum;
        let t1 = sh.a * sh.ratio * XExpPoly::exp_at(&sh.tau, x) * moved;
        let t2 = -sh.a * here;
        res += t1 + t2;
        scale += t1.norm() + t2.norm();
    }
    relative(res.norm(), scale)
}

/// Relative residual of `Lφ_H - (z² - ρ²)φ_H`, which is the truncated form
/// of `HΨ + z²Ψ = 0` after the gauge transformation.
pub fn truncated_l_residual(cp: &ComplexParams, point: &SpectralPoint, x: &[C], truncation: u32) -> f64 {
    let nv = cp.nvars();
    let l = cp.l;
    let rho = cp.rho();
    let mut zvec: Vec<C> = point.z.clone();
    zvec[l] /= cp.k;
    let eigen = cp.z_squared(&point.z) - cp.rho_squared();
    let roots = cp.roots();
    let coth: Vec<C> = roots.iter().map(|r| 1.0 / cp.pair_x(&r.vec, x).tanh()).collect();
    let root_c: Vec<Vec<C>> = roots.iter().map(|r| crate::numeric::to_c(&r.vec, nv)).collect();
    let mut res = C::new(0.0, 0.0);
    let mut scale = 0.0;
    for (nu, q) in &point.series.coeffs {
        if height(nv, nu) > truncation as i64 {
            continue;
        }
        let lambda: Vec<C> = (0..nv).map(|i| zvec[i] - rho[i] + nu.get(i) as f64).collect();
        let w = q * XExpPoly::exp_at(nu, x);
        let mut factor = cp.inner(&lambda, &lambda) - eigen;
        let mut mag = cp.inner(&lambda, &lambda).norm() + eigen.norm();
        for (idx, root) in roots.iter().enumerate() {
            let t = 2.0 * root.mult * coth[idx] * cp.inner(&root_c[idx], &lambda);
            factor -= t;
            mag += t.norm();
        }
        res += factor * w;
        scale += mag * w.norm();
    }
    relative(res.norm(), scale)
}

/// One row of a continuation report.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuationRow {
    pub params: ComplexParams,
    pub seed: u64,
    pub point: usize,
    pub z: Vec<[f64; 2]>,
    pub x: Vec<[f64; 2]>,
    pub height: u32,
    pub dtilde_residual: f64,
    pub d_residual: f64,
    pub l_residual: f64,
    pub tail: f64,
    pub margin: f64,
}

fn pairs(v: &[C]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

/// Runs all continuation checks at `points` seeded spectral points with one
/// `B`-point each (margin 3), for every truncation height in `heights`.
pub fn run_continuation(cp: &ComplexParams, heights: &[u32], points: usize, seed: u64) -> Result<Vec<ContinuationRow>> {
    let top = heights.iter().copied().max().unwrap_or(0);
    let spectral = sample_spectral_points(cp, points, top + shift_reach(cp), seed)?;
    let mut rng = seeded(seed ^ 0x5eed);
    let mut rows = Vec::new();
    for (idx, point) in spectral.iter().enumerate() {
        let x = b_point(cp, 3.0, &mut rng);
        for &h in heights {
            let dt = verify_dtilde(cp, point, h)?;
            rows.push(ContinuationRow {
                params: cp.clone(),
                seed,
                point: idx,
                z: pairs(&point.z),
                x: pairs(&x),
                height: h,
                dtilde_residual: dt.max_residual,
                d_residual: truncated_d_residual(cp, point, &x, h),
                l_residual: truncated_l_residual(cp, point, &x, h),
                tail: assemble_phi(&point.series, &x, h).tail,
                margin: b_margin(cp, &x),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Config, Params};
    use crate::rational::Rat;
    use crate::series::c0_closed_form;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    /// Complex `ln Γ` by the Lanczos approximation (g = 7) with reflection.
    fn ln_gamma(z: C) -> C {
        const G: f64 = 7.0;
        const COEF: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        if z.re < 0.5 {
            let pi = std::f64::consts::PI;
            return C::new(pi, 0.0).ln() - (pi * z).sin().ln() - ln_gamma(1.0 - z);
        }
        let z = z - 1.0;
        let mut a = C::new(COEF[0], 0.0);
        for (i, &co) in COEF.iter().enumerate().skip(1) {
            a += co / (z + i as f64);
        }
        let t = z + G + 0.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
    }

    /// `ln C(z)` up to additive multiples of `2πi` (which cancel after `exp`).
    fn ln_c(cp: &ComplexParams, z: &[C]) -> C {
        let l = cp.l;
        let (m, n, k, p, r) = (cp.m(), cp.n(), cp.k, cp.p, cp.r);
        let mut acc = c(0.0, 0.0);
        let mut long = |u: C, a: C, b: C| {
            acc += ln_gamma(-u) + ln_gamma(-u / 2.0 - a / 2.0) - ln_gamma(-u - a) - ln_gamma(-u / 2.0 - a / 2.0 - b);
        };
        for j in 0..l {
            long(z[j], m, n);
        }
        long(z[l] / k, p, r);
        for a in 0..l {
            for b in a + 1..l {
                for s in [1.0, -1.0] {
                    let u = (z[a] + s * z[b]) / 2.0;
                    acc += ln_gamma(-u) - ln_gamma(-u - k);
                }
            }
        }
        for j in 0..l {
            for s in [1.0, -1.0] {
                acc += (-(z[j] + s * z[l]) - 1.0 - k).ln();
            }
        }
        acc
    }

    #[test]
    fn oracle_reproduces_factorials() {
        assert!((ln_gamma(c(5.0, 0.0)) - c(24.0f64.ln(), 0.0)).norm() < 1e-12);
        assert!((ln_gamma(c(0.5, 0.0)).exp() - c(std::f64::consts::PI.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn gamma_ratio_telescopes() {
        let a = c(0.3, 0.8);
        let up = gamma_ratio(a, 3).unwrap();
        assert!((up - a * (a + 1.0) * (a + 2.0)).norm() < 1e-14);
        let down = gamma_ratio(a, -2).unwrap();
        assert!((down * (a - 1.0) * (a - 2.0) - 1.0).norm() < 1e-14);
        assert!(matches!(gamma_ratio(c(2.0, 0.0), -2), Err(Error::PoleHit(_))));
    }

    #[test]
    fn c_ratio_matches_lgamma_oracle() {
        let mut rng = seeded(17);
        for cp in [
            ComplexParams::new(1, c(1.5, 0.2), c(0.7, 0.0), c(0.3, 0.0)).unwrap(),
            ComplexParams::new(2, c(2.3, -0.4), c(0.4, 0.1), c(0.1, 0.0)).unwrap(),
        ] {
            let mut tested = 0;
            while tested < 10 {
                let z: Vec<C> = (0..cp.nvars()).map(|_| complex_normal(&mut rng, 2.0)).collect();
                for (i, s) in cp.shift_list() {
                    let Ok(closed) = c_ratio(&cp, &z, i, s) else { continue };
                    let zt = cp.shifted(&z, &IVec::unit(i, 2 * s as i32));
                    let oracle = (ln_c(&cp, &zt) - ln_c(&cp, &z)).exp();
                    assert!((closed - oracle).norm() < 1e-10 * oracle.norm().max(1.0), "{closed} vs {oracle}");
                }
                tested += 1;
            }
        }
    }

    #[test]
    fn c_ratio_reduces_to_c0_ratio_at_integer_multiplicities() {
        let params = Params::new(1, Rat::ONE, 1, 0);
        let cfg = Config::build(params.clone()).unwrap();
        let cp = ComplexParams::from_exact(&params);
        let c0 = c0_closed_form(&cfg);
        let z = [c(0.37, 1.3), c(-0.55, 0.8)];
        for (i, s) in cp.shift_list() {
            let zt = cp.shifted(&z, &IVec::unit(i, 2 * s as i32));
            let expect = c0.eval(&zt) / c0.eval(&z);
            let got = c_ratio(&cp, &z, i, s).unwrap();
            assert!((got - expect).norm() < 1e-10 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn dtilde_identities_hold() {
        for (cp, tol) in [
            (ComplexParams::from_exact(&Params::new(1, Rat::ONE, 1, 0)), 1e-9),
            (ComplexParams::new(1, c(1.5, 0.2), c(0.7, 0.0), c(0.3, 0.0)).unwrap(), 1e-8),
            (ComplexParams::new(2, c(2.0, 0.3), c(0.4, 0.0), c(0.1, 0.0)).unwrap(), 1e-8),
        ] {
            let h = 4;
            for point in sample_spectral_points(&cp, 2, h + shift_reach(&cp), 5).unwrap() {
                let rep = verify_dtilde(&cp, &point, h).unwrap();
                assert!(rep.max_residual < tol, "{rep:?}");
            }
        }
    }

    #[test]
    fn wrong_ratio_breaks_identities() {
        let cp = ComplexParams::new(1, c(1.5, 0.2), c(0.7, 0.0), c(0.3, 0.0)).unwrap();
        let mut point = sample_spectral_points(&cp, 1, 5, 1).unwrap().remove(0);
        point.shifts[0].ratio *= 1.01;
        assert!(verify_dtilde(&cp, &point, 3).unwrap().max_residual > 1e-6);
    }

    #[test]
    fn b_points_lie_inside_b() {
        let cp = ComplexParams::new(2, c(1.5, 0.2), c(0.7, 0.0), c(0.3, 0.0)).unwrap();
        let mut rng = seeded(3);
        for _ in 0..10 {
            let x = b_point(&cp, 3.0, &mut rng);
            assert!(b_margin(&cp, &x) > 0.0);
        }
    }

    #[test]
    fn truncation_residuals_decrease() {
        let cp = ComplexParams::new(1, c(2.3, 0.0), c(0.4, 0.0), c(0.1, 0.0)).unwrap();
        let point = sample_spectral_points(&cp, 1, 8 + shift_reach(&cp), 21).unwrap().remove(0);
        let x = b_point(&cp, 3.0, &mut seeded(4));
        let d: Vec<f64> = [4, 6, 8].iter().map(|&h| truncated_d_residual(&cp, &point, &x, h)).collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
        assert!(truncated_l_residual(&cp, &point, &x, 8) < 1e-6);
    }

    #[test]
    fn seeded_runs_repeat() {
        let cp = ComplexParams::new(1, c(1.5, 0.2), c(0.7, 0.0), c(0.3, 0.0)).unwrap();
        let a = serde_json::to_string(&run_continuation(&cp, &[2, 4], 2, 42).unwrap()).unwrap();
        let b = serde_json::to_string(&run_continuation(&cp, &[2, 4], 2, 42).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
