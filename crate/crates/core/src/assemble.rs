//! Composition of the long-wave approximations on the physical grid.
//!
//! The first-order approximation is `(eps^2 U(X-, T), eps^2 V(X+, T))`;
//! the second-order one adds `eps^4 (A(X,tau) + F(X-,T), B(X,tau) + G(X+,T))`
//! with `X = eps x`, `tau = eps t`, `T = eps^3 t`, `X± = X ± tau`. When the
//! truth is computed in a frame moving with velocity `c`, every scaled
//! argument picks up `eps c t`.

use std::sync::Arc;

use crate::boussinesq::{SolverConfig, UVState};
use crate::error::{Error, Result};
use crate::fitting::{fit_power_law, FitResult};
use crate::grid::{Field, Grid};
use crate::kdv::KdvProfile;
use crate::linkdv::{advance_fg, LinKdvState};
use crate::spectral::{
    apply_symbol, dealiased_product, discrete_norms, lambda_symbol, resample_shifted,
};
use crate::transport::{compute_correction, QuadratureSpec};

/// Which approximation to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproximationOrder {
    KdvOnly,
    SecondOrder,
}

/// The modulation-equation outputs for one scenario at one eps: the
/// wavetrains, the quadrature settings for the transport corrections, and
/// (optionally) an integrated F/G state to step forward from.
#[derive(Debug, Clone)]
pub struct ModulationSet {
    pub u: KdvProfile,
    pub v: KdvProfile,
    pub eps: f64,
    /// Velocity of the reference frame the physical run uses (0 = lab).
    pub frame_velocity: f64,
    pub scaled_grid: Arc<Grid>,
    pub quad: QuadratureSpec,
    /// F/G at some slow time at or before any requested assembly time.
    /// `None` means the unidirectional corrections are taken as zero.
    pub fg_base: Option<LinKdvState>,
    /// Stepper settings used to bring `fg_base` up to the requested time.
    pub fg_cfg: SolverConfig,
}

impl ModulationSet {
    pub fn new(
        u: KdvProfile,
        v: KdvProfile,
        eps: f64,
        frame_velocity: f64,
        scaled_grid: Arc<Grid>,
    ) -> Result<ModulationSet> {
        if !(eps > 0.0 && eps <= 0.2) {
            return Err(Error::InvalidConfig(format!("eps must lie in (0, 0.2], got {eps}")));
        }
        let quad = QuadratureSpec::for_grid(&scaled_grid);
        Ok(ModulationSet {
            u,
            v,
            eps,
            frame_velocity,
            scaled_grid,
            quad,
            fg_base: None,
            fg_cfg: SolverConfig { dt: 0.005, ..SolverConfig::default() },
        })
    }

    /// All four second-order corrections on the scaled grid at physical
    /// time `t`: A, B from the transport quadratures, F, G by stepping the
    /// stored state forward to T = eps^3 t.
    pub fn corrections_at(&self, t: f64) -> Result<CorrectionSnapshot> {
        let tau = self.eps * t;
        let t_slow = self.eps.powi(3) * t;
        let corr = compute_correction(&self.u, &self.v, tau, self.eps, &self.scaled_grid, &self.quad)?;
        let (f, g) = match &self.fg_base {
            None => (Field::zeros(self.scaled_grid.clone()), Field::zeros(self.scaled_grid.clone())),
            Some(base) => {
                if t_slow < base.t - 1e-9 {
                    return Err(Error::TimeMismatch(format!(
                        "F/G state is at T = {}, cannot assemble at earlier T = {t_slow}",
                        base.t
                    )));
                }
                let mut state = base.clone();
                let span = t_slow - state.t;
                let n_full = (span / self.fg_cfg.dt + 1e-9).floor() as usize;
                for _ in 0..n_full {
                    state = self.advance(&state, self.fg_cfg.dt)?;
                }
                let leftover = t_slow - state.t;
                if leftover > 1e-9 * self.fg_cfg.dt {
                    state = self.advance(&state, leftover)?;
                }
                (state.f, state.g)
            }
        };
        Ok(CorrectionSnapshot { a: corr.a, b: corr.b, f, g })
    }

    /// Step the stored F/G state forward by whole `fg_cfg.dt` steps so it
    /// sits within one step of T = eps^3 t. Keeps repeated assemblies at
    /// increasing times from re-integrating the whole history.
    pub fn advance_base_to(&mut self, t: f64) -> Result<()> {
        let Some(base) = self.fg_base.take() else { return Ok(()) };
        let t_slow = self.eps.powi(3) * t;
        let mut state = base;
        let n_full = ((t_slow - state.t) / self.fg_cfg.dt + 1e-9).floor() as usize;
        for _ in 0..n_full {
            state = self.advance(&state, self.fg_cfg.dt)?;
        }
        self.fg_base = Some(state);
        Ok(())
    }

    fn advance(&self, state: &LinKdvState, dt: f64) -> Result<LinKdvState> {
        advance_fg(state, &self.u, &self.v, self.eps, &self.scaled_grid, &self.quad, dt, &self.fg_cfg)
    }
}

/// The second-order correction fields on the scaled grid at one time.
#[derive(Debug, Clone)]
pub struct CorrectionSnapshot {
    pub a: Field,
    pub b: Field,
    pub f: Field,
    pub g: Field,
}

impl CorrectionSnapshot {
    pub fn zeros(grid: Arc<Grid>) -> CorrectionSnapshot {
        CorrectionSnapshot {
            a: Field::zeros(grid.clone()),
            b: Field::zeros(grid.clone()),
            f: Field::zeros(grid.clone()),
            g: Field::zeros(grid),
        }
    }
}

/// The scaled image of the physical grid: same point count, length eps * L.
/// Scaled fields evaluated on it line up index-for-index with physical
/// grid points.
fn scaled_image(ms: &ModulationSet, physical: &Arc<Grid>) -> Result<Arc<Grid>> {
    let scaled_len = ms.eps * physical.length();
    if (scaled_len - ms.scaled_grid.length()).abs() > 1e-9 * ms.scaled_grid.length() {
        return Err(Error::InvalidConfig(format!(
            "physical grid of length {} maps to scaled length {scaled_len}, but the \
             modulation fields live on length {}",
            physical.length(),
            ms.scaled_grid.length()
        )));
    }
    Grid::new(physical.n(), scaled_len)
}

/// Assemble the approximation with an explicit correction snapshot
/// (`None` = first order). [`assemble_w`] computes the snapshot itself.
pub fn assemble_w_with(
    ms: &ModulationSet,
    physical: &Arc<Grid>,
    t: f64,
    corrections: Option<&CorrectionSnapshot>,
) -> Result<UVState> {
    let image = scaled_image(ms, physical)?;
    let eps = ms.eps;
    let c = ms.frame_velocity;
    let d_minus = eps * (c - 1.0) * t;
    let d_plus = eps * (c + 1.0) * t;
    let d_mid = eps * c * t;
    let t_slow = eps.powi(3) * t;

    let e2 = eps * eps;
    let e4 = e2 * e2;
    let mut u_vals = ms.u.eval(&image, d_minus, t_slow)?.into_values();
    let mut v_vals = ms.v.eval(&image, d_plus, t_slow)?.into_values();
    for x in u_vals.iter_mut().chain(v_vals.iter_mut()) {
        *x *= e2;
    }
    if let Some(corr) = corrections {
        // resample_shifted(f, g, s) returns f(y - s); the arguments here
        // are grid point + offset, hence the negated offsets.
        let a = resample_shifted(&corr.a, &image, -d_mid)?;
        let b = resample_shifted(&corr.b, &image, -d_mid)?;
        let f = resample_shifted(&corr.f, &image, -d_minus)?;
        let g = resample_shifted(&corr.g, &image, -d_plus)?;
        for j in 0..physical.n() {
            u_vals[j] += e4 * (a.values()[j] + f.values()[j]);
            v_vals[j] += e4 * (b.values()[j] + g.values()[j]);
        }
    }
    Ok(UVState {
        u: Field::new(physical.clone(), u_vals)?,
        v: Field::new(physical.clone(), v_vals)?,
        t,
    })
}

/// The approximation pair on the physical grid at physical time `t`.
pub fn assemble_w(
    ms: &ModulationSet,
    physical: &Arc<Grid>,
    t: f64,
    order: ApproximationOrder,
) -> Result<UVState> {
    match order {
        ApproximationOrder::KdvOnly => assemble_w_with(ms, physical, t, None),
        ApproximationOrder::SecondOrder => {
            let corr = ms.corrections_at(t)?;
            assemble_w_with(ms, physical, t, Some(&corr))
        }
    }
}

/// The scalar approximation theta_app = u + v of [`assemble_w`].
pub fn assemble_theta(
    ms: &ModulationSet,
    physical: &Arc<Grid>,
    t: f64,
    order: ApproximationOrder,
) -> Result<Field> {
    let w = assemble_w(ms, physical, t, order)?;
    w.u.add(&w.v)
}

/// Sup-norm of the discrete residual of the assembled approximation in
/// the evolution equations, with the time derivative replaced by a
/// centered difference of width `2h`. Lab frame only.
pub fn residual_norm(
    ms: &ModulationSet,
    physical: &Arc<Grid>,
    t: f64,
    order: ApproximationOrder,
    h: f64,
) -> Result<f64> {
    if ms.frame_velocity != 0.0 {
        return Err(Error::InvalidConfig(
            "residuals are measured in the lab frame (frame_velocity = 0)".into(),
        ));
    }
    let minus = assemble_w(ms, physical, t - h, order)?;
    let plus = assemble_w(ms, physical, t + h, order)?;
    let mid = assemble_w(ms, physical, t, order)?;
    let lam = lambda_symbol(physical);
    let s = mid.u.add(&mid.v)?;
    let lam_s2 = apply_symbol(&dealiased_product(&s, &s)?, &lam)?;
    let du = plus.u.sub(&minus.u)?.scaled(0.5 / h);
    let dv = plus.v.sub(&minus.v)?.scaled(0.5 / h);
    let res_u = apply_symbol(&mid.u, &lam)?
        .add(&lam_s2.scaled(0.5))?
        .scaled(-1.0)
        .sub(&du)?;
    let res_v = apply_symbol(&mid.v, &lam)?
        .add(&lam_s2.scaled(0.5))?
        .sub(&dv)?;
    Ok(discrete_norms(&res_u).linf.max(discrete_norms(&res_v).linf))
}

/// Sweep eps at a fixed scaled time `tau_probe = eps t` and fit the
/// order of the discrete residual. The scaled grid is rebuilt per eps so
/// the physical domain always maps to the modulation domain.
pub fn formal_residual_order(
    u: &KdvProfile,
    v: &KdvProfile,
    order: ApproximationOrder,
    eps_list: &[f64],
    tau_probe: f64,
) -> Result<FitResult> {
    if eps_list.len() < 3 {
        return Err(Error::DegenerateFit { needed: 3, got: eps_list.len() });
    }
    let scaled = Grid::new(512, 80.0)?;
    let mut points = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let run = || -> Result<(f64, f64)> {
            let physical = Grid::with_max_spacing(scaled.length() / eps, 0.25)?;
            let mut ms = ModulationSet::new(u.clone(), v.clone(), eps, 0.0, scaled.clone())?;
            let t = tau_probe / eps;
            let h = SolverConfig::default().dt / 10.0;
            if order == ApproximationOrder::SecondOrder {
                let t_base = eps.powi(3) * (t - h);
                let quad = ms.quad.clone();
                ms.fg_base = Some(crate::linkdv::solve_fg(
                    u,
                    v,
                    eps,
                    &scaled,
                    &quad,
                    t_base,
                    &ms.fg_cfg,
                    |_| Ok(()),
                )?);
            }
            Ok((eps, residual_norm(&ms, &physical, t, order, h)?))
        };
        points.push(run().map_err(|e| Error::AtEps { eps, source: Box::new(e) })?);
    }
    fit_power_law(&points)
}
