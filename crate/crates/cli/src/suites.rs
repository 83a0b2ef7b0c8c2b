use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use bispectral_core::ba::{leading_product, verify_eigen_d, verify_h_exact, verify_h_numeric, BAFunction};
use bispectral_core::config::Config;
use bispectral_core::numeric::ComplexParams;
use bispectral_core::operator::{apply_dp, asymptotic_slope, build_d, build_dp, mu_p};
use bispectral_core::quasi_invariance::{is_quasi_invariant, qi_samples};
use bispectral_core::sampling::{complex_uniform, seeded};
use bispectral_core::series::{
    check_c0, check_const_identity, check_gauge, cross_validate_each, extract_expansion, random_exp_sum, regular_x_points,
    solve_recurrence,
};
use bispectral_core::{Error, IVec, QuasiPoly, Rat, XExpPoly, ZPoly};
use clap::ValueEnum;

use crate::report::{Mode, Row};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Suite {
    Axioms,
    #[value(name = "eigenD")]
    EigenD,
    #[value(name = "eigenH")]
    EigenH,
    Expansion,
    Family,
    Ring,
    Const,
    Gauge,
    All,
}

impl Suite {
    const EACH: [Suite; 8] =
        [Suite::Axioms, Suite::EigenD, Suite::EigenH, Suite::Expansion, Suite::Family, Suite::Ring, Suite::Const, Suite::Gauge];

    pub fn expand(selected: &[Suite]) -> Vec<Suite> {
        let mut out: Vec<Suite> =
            if selected.contains(&Suite::All) { Suite::EACH.to_vec() } else { selected.to_vec() };
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    Auto,
    Exact,
    Numeric,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub mode: ModeChoice,
    pub max_height: Option<u32>,
    pub tol: Option<f64>,
    pub seed: u64,
}

struct Ctx<'a> {
    cfg: &'a Config,
    ba: &'a BAFunction,
    opts: &'a Options,
}

impl Ctx<'_> {
    fn tol(&self, default: f64) -> f64 {
        self.opts.tol.unwrap_or(default)
    }

    fn complex_params(&self) -> ComplexParams {
        ComplexParams::from_exact(self.cfg.params())
    }
}

fn timed(rows: &mut Vec<Row>, f: impl FnOnce() -> Row) {
    let start = Instant::now();
    let mut row = f();
    row.time_ms = start.elapsed().as_millis() as u64;
    rows.push(row);
}

fn exact_result(check: &str, r: Result<String, Error>) -> Row {
    match r {
        Ok(detail) => Row::exact(check, true, detail),
        Err(e) => Row::exact(check, false, e.to_string()),
    }
}

fn vec_label(v: &IVec, nv: usize) -> String {
    let parts: Vec<String> = v.to_vec(nv).iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(","))
}

fn axioms(ctx: &Ctx) -> Vec<Row> {
    let (cfg, ba) = (ctx.cfg, ctx.ba);
    let mut rows = Vec::new();
    timed(&mut rows, || {
        let m = cfg.big_m();
        let ok = ba.degrees.len() == m as usize
            && ba.degrees.iter().enumerate().all(|(i, &d)| d <= 2 * m - (i as u32 + 1));
        Row::exact("axioms.degree_bounds", ok, format!("degrees {:?}, M = {m}", ba.degrees))
    });
    timed(&mut rows, || {
        let expected = QuasiPoly::from_zpoly(leading_product(cfg)).mul_xexp(&ba.c);
        let ok = ba.phi.z_degree() == Some(cfg.big_m()) && ba.phi.z_homogeneous(cfg.big_m()) == expected;
        Row::exact("axioms.leading_term", ok, "top z-part equals c(x) times the product of root pairings")
    });
    timed(&mut rows, || {
        let qi = is_quasi_invariant(cfg, &ba.phi);
        let detail =
            if qi.ok { format!("{} conditions", qi.checked) } else { format!("failing (root, s): {:?}", qi.failures) };
        Row::exact("axioms.quasi_invariance", qi.ok, detail)
    });
    let symbols = cfg.symbols();
    timed(&mut rows, || {
        exact_result(
            "axioms.c_sinh_form",
            symbols.as_ref().map_err(Clone::clone).and_then(|s| {
                if s.c != ba.c {
                    return Err(Error::Mismatch("stored c(x) differs from the configuration".into()));
                }
                Ok(format!("c = {} * sinh product", s.c_sinh_constant))
            }),
        )
    });
    timed(&mut rows, || {
        exact_result(
            "axioms.c_cosh_form",
            symbols.as_ref().map_err(Clone::clone).map(|s| format!("c/delta = {} * cosh product", s.g_cosh_constant)),
        )
    });
    rows
}

/// `n` rational rays with every reduced-root pairing and every shift coefficient regular along the ray.
fn generic_rays(cfg: &Config, n: usize, seed: u64) -> Vec<Vec<Rat>> {
    let mut rng = seeded(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let ray: Vec<Rat> = (0..cfg.nvars())
            .map(|_| Rat::new((complex_uniform(&mut rng, (-3.0, 3.0), (0.0, 1.0)).re * 100.0).round() as i64, 100))
            .collect();
        let generic = cfg.positive_roots().iter().all(|a| !cfg.pairing_poly(&a.vec).eval_exact(&ray).is_zero());
        if generic {
            out.push(ray);
        }
    }
    out
}

fn eigen_d(ctx: &Ctx) -> Vec<Row> {
    let cfg = ctx.cfg;
    let mut rows = Vec::new();
    timed(&mut rows, || exact_result("eigenD.exact", verify_eigen_d(cfg, &build_d(cfg), &ctx.ba.phi).map(|_| "D Phi = mu Phi".into())));
    timed(&mut rows, || {
        let ts: Vec<Rat> = (2..=6).map(|e| Rat::from_int(10i64.pow(e))).collect();
        let mut worst = f64::NEG_INFINITY;
        let mut evaluated = 0;
        let mut rays = generic_rays(cfg, 5, ctx.opts.seed);
        let mut extra = 0u64;
        let mut i = 0;
        while i < rays.len() {
            let slopes: Result<Vec<f64>, Error> = (0..cfg.nvars())
                .flat_map(|j| [(j, 1), (j, -1)])
                .map(|(j, s)| asymptotic_slope(cfg, j, s, &rays[i], &ts))
                .collect();
            match slopes {
                Ok(s) => {
                    evaluated += s.len();
                    worst = s.into_iter().fold(worst, f64::max);
                    i += 1;
                }
                Err(Error::PoleHit(_)) => {
                    extra += 1;
                    rays[i] = generic_rays(cfg, 1, ctx.opts.seed.wrapping_add(extra << 32)).remove(0);
                }
                Err(e) => return Row::failed("eigenD.asymptotics", Mode::Numeric, e.to_string()),
            }
        }
        Row::numeric("eigenD.asymptotics", worst, -1.9, format!("worst log-log slope of the remainder over {evaluated} (ray, shift) pairs, t in [1e2, 1e6]"))
    });
    rows
}

fn eigen_h(ctx: &Ctx) -> Vec<Row> {
    let (cfg, ba) = (ctx.cfg, ctx.ba);
    let mut rows = Vec::new();
    let exact = match ctx.opts.mode {
        ModeChoice::Exact => true,
        ModeChoice::Numeric => false,
        ModeChoice::Auto => cfg.l() == 1,
    };
    if exact {
        timed(&mut rows, || exact_result("eigenH.exact", verify_h_exact(cfg, ba).map(|_| "cleared-denominator identity holds".into())));
    }
    if ctx.opts.mode != ModeChoice::Exact {
        timed(&mut rows, || {
            let res = verify_h_numeric(cfg, ba, 10, ctx.opts.seed);
            Row::numeric("eigenH.numeric", res, ctx.tol(1e-9), "max relative residual of H psi + z^2 psi at 10 points")
        });
    }
    rows
}

fn expansion(ctx: &Ctx) -> Vec<Row> {
    let (cfg, ba) = (ctx.cfg, ctx.ba);
    let nv = cfg.nvars();
    let mut rows = Vec::new();
    let start = Instant::now();
    let extracted = match extract_expansion(cfg, ba) {
        Ok(e) => e,
        Err(e) => {
            rows.push(Row::failed("expansion.support", Mode::Exact, e.to_string()));
            return rows;
        }
    };
    let mut support = Row::exact(
        "expansion.support",
        true,
        format!("{} exponents in L+, max height {}", extracted.coeffs.len(), extracted.max_height),
    );
    support.time_ms = start.elapsed().as_millis() as u64;
    rows.push(support);
    timed(&mut rows, || exact_result("expansion.c0", check_c0(cfg, &extracted).map(|_| "c_0 equals the closed form".into())));

    let height = ctx.opts.max_height.unwrap_or(if cfg.l() == 1 { 4 } else { 3 });
    let start = Instant::now();
    match solve_recurrence(cfg, height) {
        Ok(series) => {
            let each = cross_validate_each(cfg, &extracted, &series);
            let per = start.elapsed().as_millis() as u64 / each.len().max(1) as u64;
            for (nu, ok) in each {
                let h = cfg.height(&nu).unwrap_or(-1);
                let mut row = Row::exact(
                    format!("expansion.c_nu[{}]", vec_label(&nu, nv)),
                    ok,
                    format!("c_nu = c_0 q_nu at height {h}"),
                );
                row.time_ms = per;
                rows.push(row);
            }
        }
        Err(e) => rows.push(Row::failed("expansion.recurrence", Mode::Exact, e.to_string())),
    }
    rows
}

fn family(ctx: &Ctx) -> Vec<Row> {
    let (cfg, ba) = (ctx.cfg, ctx.ba);
    let nv = cfg.nvars();
    let d = build_d(cfg);
    let z2 = cfg.z_squared();
    let mut rows = Vec::new();
    timed(&mut rows, || {
        let mut expected = XExpPoly::zero(nv);
        for j in 0..nv {
            let w = if j == cfg.l() { Rat::from_int(4) / cfg.k() } else { Rat::from_int(4) };
            expected = &expected + &XExpPoly::sinh2(nv, IVec::unit(j, 2)).pow(2).scale(&w);
        }
        Row::exact("family.mu_formula", mu_p(cfg, &z2) == expected, "mu_{z^2} = sum 16 sinh^2(2x_i) + (16/k) sinh^2(2 sqrt(k) x_{l+1})")
    });
    timed(&mut rows, || {
        let r = apply_dp(&d, &z2, &ba.phi).and_then(|lhs| {
            if lhs == ba.phi.mul_xexp(&mu_p(cfg, &z2)) {
                Ok("D_{z^2} Phi = mu_{z^2} Phi".to_string())
            } else {
                Err(Error::EigenViolation("D_{z^2} Phi != mu_{z^2} Phi".into()))
            }
        });
        exact_result("family.eigen", r)
    });
    timed(&mut rows, || {
        let r = build_dp(cfg, &d, &z2).and_then(|(dp, _)| {
            let c = d.commutator(&dp);
            if c.is_zero() {
                Ok(format!("[D, D_{{z^2}}] = 0 ({} shifts in D_{{z^2}})", dp.terms().len()))
            } else {
                Err(Error::Mismatch(format!("commutator has {} nonzero shifts", c.terms().len())))
            }
        });
        exact_result("family.commutator", r)
    });
    rows
}

fn ring(ctx: &Ctx) -> Vec<Row> {
    let cfg = ctx.cfg;
    let d = build_d(cfg);
    let mut rows = Vec::new();
    let q = match cfg.symbols() {
        Ok(s) => s.q,
        Err(e) => return vec![Row::failed("ring.setup", Mode::Exact, e.to_string())],
    };
    for (name, f) in qi_samples(cfg, &q) {
        timed(&mut rows, || {
            let r = d.apply(&f).and_then(|g| {
                let qi = is_quasi_invariant(cfg, &g);
                if qi.ok {
                    Ok(format!("D maps {name} to a quasi-invariant"))
                } else {
                    Err(Error::NotQuasiInvariant(qi.failures.iter().map(|(a, s)| format!("{a}, s = {s}")).collect()))
                }
            });
            exact_result(&format!("ring.D[{name}]"), r)
        });
    }
    timed(&mut rows, || {
        let one = QuasiPoly::from_zpoly(ZPoly::one(cfg.nvars()));
        match d.apply(&one) {
            Err(Error::PoleCancellationFailure { form, .. }) => {
                Row::exact("ring.rejects_non_invariant", true, format!("constant input leaves a pole along {form} = 0"))
            }
            Err(e) => Row::exact("ring.rejects_non_invariant", false, format!("unexpected error: {e}")),
            Ok(_) => Row::exact("ring.rejects_non_invariant", false, "non-invariant input was accepted"),
        }
    });
    rows
}

fn residual_of(r: Result<f64, Error>) -> Result<f64, Error> {
    match r {
        Err(Error::ResidualExceeded { residual, .. }) => Ok(residual),
        other => other,
    }
}

fn constant_identity(ctx: &Ctx) -> Vec<Row> {
    let mut rows = Vec::new();
    timed(&mut rows, || {
        let cp = ctx.complex_params();
        let pts = regular_x_points(&cp, 20, ctx.opts.seed);
        let tol = ctx.tol(1e-10);
        match residual_of(check_const_identity(&cp, &pts, tol)) {
            Ok(res) => Row::numeric("const.identity", res, tol, "20 seeded points"),
            Err(e) => Row::failed("const.identity", Mode::Numeric, e.to_string()),
        }
    });
    rows
}

fn gauge(ctx: &Ctx) -> Vec<Row> {
    let mut rows = Vec::new();
    timed(&mut rows, || {
        let cp = ctx.complex_params();
        let g = random_exp_sum(cp.nvars(), 4, ctx.opts.seed);
        let pts = regular_x_points(&cp, 20, ctx.opts.seed.wrapping_add(1));
        let tol = ctx.tol(1e-10);
        match residual_of(check_gauge(&cp, &g, &pts, tol)) {
            Ok(res) => Row::numeric("gauge.relation", res, tol, "random exponential sum, 20 seeded points"),
            Err(e) => Row::failed("gauge.relation", Mode::Numeric, e.to_string()),
        }
    });
    rows
}

fn run_one(suite: Suite, ctx: &Ctx) -> Vec<Row> {
    match suite {
        Suite::Axioms => axioms(ctx),
        Suite::EigenD => eigen_d(ctx),
        Suite::EigenH => eigen_h(ctx),
        Suite::Expansion => expansion(ctx),
        Suite::Family => family(ctx),
        Suite::Ring => ring(ctx),
        Suite::Const => constant_identity(ctx),
        Suite::Gauge => gauge(ctx),
        Suite::All => unreachable!("expanded before dispatch"),
    }
}

/// Runs the suites on up to `jobs` worker threads. Rows come back grouped by
/// suite in a fixed order regardless of scheduling.
pub fn run(cfg: &Config, ba: &BAFunction, suites: &[Suite], opts: &Options, jobs: usize) -> Vec<Row> {
    let suites = Suite::expand(suites);
    let ctx = Ctx { cfg, ba, opts };
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Vec<Row>)>> = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, suites.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&suite) = suites.get(i) else { break };
                let rows = run_one(suite, &ctx);
                results.lock().expect("no poisoned workers").push((i, rows));
            });
        }
    });
    let mut results = results.into_inner().expect("no poisoned workers");
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().flat_map(|(_, rows)| rows).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_expands_in_fixed_order() {
        assert_eq!(Suite::expand(&[Suite::Gauge, Suite::All]), Suite::EACH.to_vec());
        assert_eq!(Suite::expand(&[Suite::Ring, Suite::Axioms, Suite::Ring]), vec![Suite::Axioms, Suite::Ring]);
    }

    #[test]
    fn job_count_does_not_change_rows() {
        let cfg = Config::build(bispectral_core::config::Params::new(1, Rat::ONE, 0, 0)).unwrap();
        let (ba, _) = bispectral_core::ba::construct(&cfg, &Default::default()).unwrap();
        let opts = Options { mode: ModeChoice::Auto, max_height: Some(2), tol: None, seed: 3 };
        let strip = |rows: Vec<Row>| rows.into_iter().map(|r| (r.check, r.status, r.residual.map(f64::to_bits))).collect::<Vec<_>>();
        let one = strip(run(&cfg, &ba, &[Suite::All], &opts, 1));
        let four = strip(run(&cfg, &ba, &[Suite::All], &opts, 4));
        assert_eq!(one, four);
    }
}
