//! Complex-parameter version of the configuration, used by the series and
//! continuation numerics. Multiplicities are `m = kp`, `n = (k(2r+1) - 1)/2`
//! and need not be integers; only `Re k > 0` is required.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{Params, RootKind};
use crate::error::{Error, Result};
use crate::poly::{IVec, MAX_VARS};

type C = Complex64;

/// Denominators below this magnitude are treated as poles.
pub const POLE_EPS: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexParams {
    pub l: usize,
    pub k: C,
    pub p: C,
    pub r: C,
}

#[derive(Clone, Debug)]
pub struct NumRoot {
    pub kind: RootKind,
    pub vec: IVec,
    pub mult: C,
    pub double_mult: C,
}

impl ComplexParams {
    pub fn new(l: usize, k: C, p: C, r: C) -> Result<ComplexParams> {
        let cp = ComplexParams { l, k, p, r };
        cp.validate()?;
        Ok(cp)
    }

    pub fn from_exact(params: &Params) -> ComplexParams {
        ComplexParams {
            l: params.l,
            k: C::new(params.k.to_f64(), 0.0),
            p: C::new(params.p as f64, 0.0),
            r: C::new(params.r as f64, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || self.l + 1 > MAX_VARS {
            return Err(Error::InvalidParams(format!("l = {} must lie in 1..={}", self.l, MAX_VARS - 1)));
        }
        if [self.k, self.p, self.r].iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if self.k.re <= 0.0 {
            return Err(Error::InvalidParams(format!("Re k = {} must be positive", self.k.re)));
        }
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.l + 1
    }

    pub fn m(&self) -> C {
        self.k * self.p
    }

    pub fn n(&self) -> C {
        (self.k * (2.0 * self.r + 1.0) - 1.0) / 2.0
    }

    pub fn roots(&self) -> Vec<NumRoot> {
        let (m, n, k, p, r) = (self.m(), self.n(), self.k, self.p, self.r);
        RootKind::all(self.l)
            .into_iter()
            .map(|kind| {
                let (mult, double_mult) = kind.multiplicities(&m, &n, &k, &p, &r);
                NumRoot { kind, vec: kind.vector(self.l), mult, double_mult }
            })
            .collect()
    }

    /// `⟨u,w⟩` for complex coefficient vectors in the `(e, f)` basis.
    pub fn inner(&self, u: &[C], w: &[C]) -> C {
        let l = self.l;
        let head: C = (0..l).map(|i| u[i] * w[i]).sum();
        head + self.k * u[l] * w[l]
    }

    pub fn inner_int(&self, u: &IVec, w: &IVec) -> C {
        self.inner(&to_c(u, self.nvars()), &to_c(w, self.nvars()))
    }

    /// `⟨u, z⟩` with `z` in spectral coordinates.
    pub fn pair_z(&self, u: &IVec, z: &[C]) -> C {
        (0..self.nvars()).map(|i| z[i] * u.get(i) as f64).sum()
    }

    /// `⟨u, x⟩` with `x = (x_1, …, x_l, v)`.
    pub fn pair_x(&self, u: &IVec, x: &[C]) -> C {
        self.pair_z(u, x)
    }

    /// The spectral translation induced by `z ↦ z + u`.
    pub fn zeta_shift(&self, u: &IVec) -> Vec<C> {
        let l = self.l;
        let mut t: Vec<C> = (0..l).map(|i| C::new(u.get(i) as f64, 0.0)).collect();
        t.push(self.k * u.get(l) as f64);
        t
    }

    pub fn shifted(&self, z: &[C], u: &IVec) -> Vec<C> {
        z.iter().zip(self.zeta_shift(u)).map(|(a, b)| a + b).collect()
    }

    /// `ρ = Σ_α m_α α` in the `(e, f)` basis.
    pub fn rho(&self) -> Vec<C> {
        let mut rho = vec![C::new(0.0, 0.0); self.nvars()];
        for root in self.roots() {
            for (i, c) in rho.iter_mut().enumerate() {
                *c += root.mult * root.vec.get(i) as f64;
            }
        }
        rho
    }

    pub fn rho_squared(&self) -> C {
        let rho = self.rho();
        self.inner(&rho, &rho)
    }

    /// `z² = Σ ζ_i² + ζ_{l+1}² / k`.
    pub fn z_squared(&self, z: &[C]) -> C {
        let l = self.l;
        z[..l].iter().map(|c| c * c).sum::<C>() + z[l] * z[l] / self.k
    }

    pub fn kappa(&self, i: usize) -> C {
        if i == self.l {
            1.0 / self.k
        } else {
            C::new(1.0, 0.0)
        }
    }

    /// Shifts `(i, sign)` for `τ = sign · 2e_i` (or `sign · 2f` when `i = l`).
    pub fn shift_list(&self) -> Vec<(usize, i64)> {
        (0..=self.l).flat_map(|i| [(i, 1), (i, -1)]).collect()
    }

    /// `a_τ(z)` for `τ = sign · 2e_i` (or `sign · 2f`).
    pub fn a_tau(&self, i: usize, sign: i64, z: &[C]) -> Result<C> {
        let l = self.l;
        let s = sign as f64;
        let (m, n, k, p, r) = (self.m(), self.n(), self.k, self.p, self.r);
        let mut acc = self.kappa(i);
        let mut factor = |c: C, form: C, label: &str| -> Result<()> {
            if form.norm() < POLE_EPS {
                return Err(Error::PoleHit(format!("a_tau denominator {label}")));
            }
            acc *= 1.0 - c / form;
            Ok(())
        };
        if i < l {
            factor(s * (m + 2.0 * n), z[i], "z_i")?;
            factor(s * m, z[i] + s, "z_i + sign")?;
            for j in (0..l).filter(|&j| j != i) {
                factor(s * 2.0 * k, z[i] - z[j], "z_i - z_j")?;
                factor(s * 2.0 * k, z[i] + z[j], "z_i + z_j")?;
            }
            let sh = s * (1.0 - k);
            factor(C::new(2.0 * s, 0.0), z[i] + z[l] + sh, "z_i + z_f")?;
            factor(C::new(2.0 * s, 0.0), z[i] - z[l] + sh, "z_i - z_f")?;
        } else {
            factor(s * k * (p + 2.0 * r), z[l], "z_f")?;
            factor(s * k * p, z[l] + s * k, "z_f + sign k")?;
            let sh = s * (k - 1.0);
            for j in 0..l {
                factor(s * 2.0 * k, z[l] + z[j] + sh, "z_f + z_j")?;
                factor(s * 2.0 * k, z[l] - z[j] + sh, "z_f - z_j")?;
            }
        }
        Ok(acc)
    }

    /// `μ(x) = Σ_τ κ_τ (e^{⟨τ,x⟩} - 1)`.
    pub fn mu(&self, x: &[C]) -> C {
        self.shift_list()
            .into_iter()
            .map(|(i, s)| self.kappa(i) * ((2.0 * s as f64) * x[i]).exp() - self.kappa(i))
            .sum()
    }
}

pub fn to_c(u: &IVec, nvars: usize) -> Vec<C> {
    (0..nvars).map(|i| C::new(u.get(i) as f64, 0.0)).collect()
}
