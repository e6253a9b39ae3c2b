//! Second-order unidirectional corrections F, G: the KdV equations
//! linearized about U, V with inhomogeneous forcing,
//!
//! ```text
//! dF/dT = -d(UF) - F'''/2 + J1
//! dG/dT = +d(VG) + G'''/2 + J2
//! ```
//!
//! integrated from zero data by the same integrating-factor implicit
//! midpoint scheme as the other solvers. The forcings J1, J2 are rebuilt
//! at every midpoint slow time from the closed-form wavetrains and the
//! transport quadratures.

use std::sync::Arc;

use num_complex::Complex64;

use crate::boussinesq::SolverConfig;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::kdv::KdvProfile;
use crate::spectral::{apply_symbol, dealiased_product, derivative, SpectralSymbol};
use crate::transport::{compute_alpha_beta, QuadratureSpec};

/// The correction pair at one slow time.
#[derive(Debug, Clone)]
pub struct LinKdvState {
    pub f: Field,
    pub g: Field,
    pub t: f64,
}

impl LinKdvState {
    pub fn zero(grid: Arc<Grid>, t: f64) -> LinKdvState {
        LinKdvState { f: Field::zeros(grid.clone()), g: Field::zeros(grid), t }
    }
}

/// Forcing for the F equation:
/// J1 = -(3/8) U''''' - (1/4) (U^2)''' + (1/4) (U^3)'
///      - (1/8) (V^2(.,0))''' - d(U (V^2(.,0)/4 + alpha)) - (1/2) alpha'''.
pub fn build_j1(
    u: &KdvProfile,
    v: &KdvProfile,
    alpha: &Field,
    grid: &Arc<Grid>,
    t_slow: f64,
) -> Result<Field> {
    alpha.check_finite("alpha")?;
    let uf = u.eval(grid, 0.0, t_slow)?;
    let v0 = v.eval(grid, 0.0, 0.0)?;
    let u2 = uf.mul_pointwise(&uf)?;
    let u3 = u2.mul_pointwise(&uf)?;
    let mut j = derivative(&uf, 5)?.scaled(-0.375);
    j = j.add(&derivative(&u2, 3)?.scaled(-0.25))?;
    j = j.add(&derivative(&u3, 1)?.scaled(0.25))?;
    j = j.add(&derivative(&v0.mul_pointwise(&v0)?, 3)?.scaled(-0.125))?;
    let carried = v0.mul_pointwise(&v0)?.scaled(0.25).add(alpha)?;
    j = j.add(&derivative(&uf.mul_pointwise(&carried)?, 1)?.scaled(-1.0))?;
    j.add(&derivative(alpha, 3)?.scaled(-0.5))
}

/// Forcing for the G equation: sign-mirrored counterpart of [`build_j1`].
pub fn build_j2(
    v: &KdvProfile,
    u: &KdvProfile,
    beta: &Field,
    grid: &Arc<Grid>,
    t_slow: f64,
) -> Result<Field> {
    beta.check_finite("beta")?;
    let vf = v.eval(grid, 0.0, t_slow)?;
    let u0 = u.eval(grid, 0.0, 0.0)?;
    let v2 = vf.mul_pointwise(&vf)?;
    let v3 = v2.mul_pointwise(&vf)?;
    let mut j = derivative(&vf, 5)?.scaled(0.375);
    j = j.add(&derivative(&v2, 3)?.scaled(0.25))?;
    j = j.add(&derivative(&v3, 1)?.scaled(-0.25))?;
    j = j.add(&derivative(&u0.mul_pointwise(&u0)?, 3)?.scaled(0.125))?;
    let carried = u0.mul_pointwise(&u0)?.scaled(0.25).add(beta)?;
    j = j.add(&derivative(&vf.mul_pointwise(&carried)?, 1)?)?;
    j.add(&derivative(beta, 3)?.scaled(0.5))
}

/// Everything the stepper needs at one midpoint slow time.
pub struct StepInputs<'a> {
    pub u_mid: &'a Field,
    pub v_mid: &'a Field,
    pub j1_mid: &'a Field,
    pub j2_mid: &'a Field,
}

/// One implicit-midpoint step of both linearized equations.
pub fn linkdv_step(
    state: &LinKdvState,
    inputs: &StepInputs,
    dt_slow: f64,
    cfg: &SolverConfig,
) -> Result<LinKdvState> {
    cfg.validate()?;
    let grid = state.f.grid();
    let half = 0.5 * dt_slow;
    // L_F = -d^3/2, L_G = +d^3/2; exact half-step propagators.
    let ef = SpectralSymbol::from_fn(grid, |k| Complex64::new(0.0, half * 0.5 * k * k * k).exp())?;
    let eg = SpectralSymbol::from_fn(grid, |k| Complex64::new(0.0, -half * 0.5 * k * k * k).exp())?;

    let hf = apply_symbol(&state.f, &ef)?;
    let hg = apply_symbol(&state.g, &eg)?;

    let nf = |f: &Field| -> Result<Field> {
        let transported = derivative(&dealiased_product(inputs.u_mid, f)?, 1)?;
        inputs.j1_mid.sub(&transported)
    };
    let ng = |g: &Field| -> Result<Field> {
        let transported = derivative(&dealiased_product(inputs.v_mid, g)?, 1)?;
        inputs.j2_mid.add(&transported)
    };

    let mut mf = hf.clone();
    let mut mg = hg.clone();
    let mut converged = false;
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iters {
        let nf_next = hf.add(&nf(&mf)?.scaled(half))?;
        let ng_next = hg.add(&ng(&mg)?.scaled(half))?;
        residual = linf_diff(&nf_next, &mf).max(linf_diff(&ng_next, &mg));
        mf = nf_next;
        mg = ng_next;
        if residual <= cfg.fixed_point_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iters: cfg.max_iters, residual });
    }
    let f = apply_symbol(&mf.scaled(2.0).sub(&hf)?, &ef)?;
    let g = apply_symbol(&mg.scaled(2.0).sub(&hg)?, &eg)?;
    Ok(LinKdvState { f, g, t: state.t + dt_slow })
}

/// Advance the pair by one step of `dt`, rebuilding the quadratures and
/// forcings at the midpoint slow time.
#[allow(clippy::too_many_arguments)]
pub fn advance_fg(
    state: &LinKdvState,
    u: &KdvProfile,
    v: &KdvProfile,
    eps: f64,
    grid: &Arc<Grid>,
    quad: &QuadratureSpec,
    dt: f64,
    cfg: &SolverConfig,
) -> Result<LinKdvState> {
    let t_mid = state.t + 0.5 * dt;
    let u_mid = u.eval(grid, 0.0, t_mid)?;
    let v_mid = v.eval(grid, 0.0, t_mid)?;
    let (alpha, beta) = compute_alpha_beta(u, v, t_mid, grid, eps, quad)?;
    let j1 = build_j1(u, v, &alpha, grid, t_mid)?;
    let j2 = build_j2(v, u, &beta, grid, t_mid)?;
    let inputs = StepInputs { u_mid: &u_mid, v_mid: &v_mid, j1_mid: &j1, j2_mid: &j2 };
    linkdv_step(state, &inputs, dt, cfg)
}

/// Integrate F, G from zero data at T = 0 up to `t_end`, rebuilding the
/// quadratures and forcings at every midpoint. The observer sees the
/// initial state and every accepted step.
#[allow(clippy::too_many_arguments)]
pub fn solve_fg(
    u: &KdvProfile,
    v: &KdvProfile,
    eps: f64,
    grid: &Arc<Grid>,
    quad: &QuadratureSpec,
    t_end: f64,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&LinKdvState) -> Result<()>,
) -> Result<LinKdvState> {
    cfg.validate()?;
    if t_end < 0.0 {
        return Err(Error::TimeMismatch(format!("t_end must be >= 0, got {t_end}")));
    }
    let mut state = LinKdvState::zero(grid.clone(), 0.0);
    observer(&state)?;
    if t_end == 0.0 {
        return Ok(state);
    }
    let n_full = (t_end / cfg.dt + 1e-9).floor() as usize;
    for _ in 0..n_full {
        state = advance_fg(&state, u, v, eps, grid, quad, cfg.dt, cfg)?;
        observer(&state)?;
    }
    let leftover = t_end - state.t;
    if leftover > 1e-9 * cfg.dt {
        state = advance_fg(&state, u, v, eps, grid, quad, leftover, cfg)?;
        observer(&state)?;
    }
    state.t = t_end;
    Ok(state)
}

fn linf_diff(a: &Field, b: &Field) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdv::{Direction, Soliton};
    use crate::spectral::discrete_norms;

    fn scaled_grid() -> Arc<Grid> {
        Grid::new(512, 80.0).unwrap()
    }

    fn right_soliton(kappa: f64, x0: f64) -> KdvProfile {
        KdvProfile::SingleSoliton { direction: Direction::Right, soliton: Soliton { kappa, x0 } }
    }

    fn left_soliton(kappa: f64, x0: f64) -> KdvProfile {
        KdvProfile::SingleSoliton { direction: Direction::Left, soliton: Soliton { kappa, x0 } }
    }

    /// Exact x-derivatives of c * sech^2(kappa (x - x0))-type profiles via
    /// the tanh-polynomial recurrence: if f = sech^2(y) P(tanh y) then
    /// f' = kappa sech^2(y) [(1 - t^2) P'(t) - 2 t P(t)].
    struct SechPoly {
        kappa: f64,
        center: f64,
        poly: Vec<f64>,
    }

    impl SechPoly {
        fn differentiate(&self) -> SechPoly {
            let p = &self.poly;
            let mut q = vec![0.0; p.len() + 1];
            for (i, &c) in p.iter().enumerate() {
                if i >= 1 {
                    q[i - 1] += self.kappa * i as f64 * c; // (1) * P'
                }
                q[i + 1] -= self.kappa * (i as f64 + 2.0) * c; // -t^2 P' - 2 t P
            }
            SechPoly { kappa: self.kappa, center: self.center, poly: q }
        }

        fn eval(&self, x: f64) -> f64 {
            let y = self.kappa * (x - self.center);
            let t = y.tanh();
            let sech2 = 1.0 - t * t;
            let p: f64 = self.poly.iter().rev().fold(0.0, |acc, &c| acc * t + c);
            sech2 * p
        }
    }

    fn max_abs_diff(a: &Field, b: &Field) -> f64 {
        linf_diff(a, b)
    }

    #[test]
    fn j1_zero_profiles() {
        let g = scaled_grid();
        let z = KdvProfile::Zero;
        let alpha = Field::zeros(g.clone());
        let j = build_j1(&z, &z, &alpha, &g, 0.0).unwrap();
        assert_eq!(discrete_norms(&j).linf, 0.0);
    }

    #[test]
    fn j1_against_analytic_oracle() {
        // Overtaking-style inputs: V = 0 so only the three U terms remain,
        // each an exact tanh-polynomial derivative of sech^2 powers.
        let g = scaled_grid();
        let u = right_soliton(1.0, 0.0);
        let alpha = Field::zeros(g.clone());
        let j = build_j1(&u, &KdvProfile::Zero, &alpha, &g, 0.0).unwrap();

        // U = 6 sech^2, U^2 = 36 sech^2 (1 - t^2), U^3 = 216 sech^2 (1-t^2)^2.
        let d = |mut s: SechPoly, n: usize| {
            for _ in 0..n {
                s = s.differentiate();
            }
            s
        };
        let u5 = d(SechPoly { kappa: 1.0, center: 0.0, poly: vec![6.0] }, 5);
        let u2d3 = d(SechPoly { kappa: 1.0, center: 0.0, poly: vec![36.0, 0.0, -36.0] }, 3);
        let u3d1 = d(
            SechPoly { kappa: 1.0, center: 0.0, poly: vec![216.0, 0.0, -432.0, 0.0, 216.0] },
            1,
        );
        let expect = Field::from_fn(g, |x| {
            -0.375 * u5.eval(x) - 0.25 * u2d3.eval(x) + 0.25 * u3d1.eval(x)
        });
        let err = max_abs_diff(&j, &expect);
        assert!(err < 1e-6, "J1 oracle mismatch {err}");
    }

    #[test]
    fn j2_is_mirror_of_j1() {
        let g = scaled_grid();
        let n = g.n();
        let eps = 0.1;
        let t_slow = 0.08;
        let quad = QuadratureSpec::for_grid(&g);

        let u = right_soliton(1.0, -10.0);
        let v = left_soliton(0.8, 9.0);
        let (_, beta) = compute_alpha_beta(&u, &v, t_slow, &g, eps, &quad).unwrap();
        let j2 = build_j2(&v, &u, &beta, &g, t_slow).unwrap();

        // Mirrored setup: swap roles and negate X.
        let um = right_soliton(0.8, -9.0);
        let vm = left_soliton(1.0, 10.0);
        let (alpha_m, _) = compute_alpha_beta(&um, &vm, t_slow, &g, eps, &quad).unwrap();
        let j1m = build_j1(&um, &vm, &alpha_m, &g, t_slow).unwrap();

        // Roundoff through the fifth derivative scales like k_max^5 * ulp;
        // the fields themselves are O(50).
        for j in 0..n {
            let mirrored = j1m.values()[(n - j) % n];
            let direct = j2.values()[j];
            assert!(
                (direct - mirrored).abs() < 1e-7,
                "mirror mismatch at {j}: {direct} vs {mirrored}"
            );
        }
    }

    #[test]
    fn j2_nonzero_at_start() {
        let g = scaled_grid();
        let u = right_soliton(1.0, -10.0);
        let v = left_soliton(1.0, 10.0);
        let beta = Field::zeros(g.clone());
        let j2 = build_j2(&v, &u, &beta, &g, 0.0).unwrap();
        assert!(discrete_norms(&j2).linf > 1e-3);
    }

    #[test]
    fn zero_forcing_zero_data_fixed_point() {
        let g = scaled_grid();
        let state = LinKdvState::zero(g.clone(), 0.0);
        let zeros = Field::zeros(g.clone());
        let inputs =
            StepInputs { u_mid: &zeros, v_mid: &zeros, j1_mid: &zeros, j2_mid: &zeros };
        let out = linkdv_step(&state, &inputs, 0.01, &SolverConfig::default()).unwrap();
        assert!(out.f.values().iter().all(|&v| v == 0.0));
        assert!(out.g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn resonantly_forced_airy_mode() {
        // U = 0, J1 = cos(k0 X): exact solution F_hat = J_hat (e^{LT}-1)/L
        // with L = i k0^3 / 2.
        let g = scaled_grid();
        let k0 = 2.0 * std::f64::consts::PI / 80.0;
        let j1 = Field::from_fn(g.clone(), |x| (k0 * x).cos());
        let zeros = Field::zeros(g.clone());
        let cfg = SolverConfig { dt: 1e-3, ..SolverConfig::default() };
        let mut state = LinKdvState::zero(g.clone(), 0.0);
        let inputs = StepInputs { u_mid: &zeros, v_mid: &zeros, j1_mid: &j1, j2_mid: &zeros };
        for _ in 0..1000 {
            state = linkdv_step(&state, &inputs, cfg.dt, &cfg).unwrap();
        }
        let lam = Complex64::new(0.0, 0.5 * k0 * k0 * k0);
        let amp = (lam.exp() - 1.0) / lam; // T = 1
        let expect = Field::from_fn(g, |x| (amp * Complex64::new(0.0, k0 * x).exp()).re);
        let err = max_abs_diff(&state.f, &expect);
        assert!(err < 1e-10, "Airy-mode error {err}");
    }

    #[test]
    fn manufactured_solution_recovery() {
        // F* = e^{-T} sech^2(X); J1 := dF*/dT + d(U F*) + F*'''/2.
        let g = scaled_grid();
        let u = right_soliton(1.0, -5.0);
        let fstar = |t: f64| Field::from_fn(g.clone(), |x| (-t).exp() / x.cosh().powi(2));
        let cfg = SolverConfig { dt: 1e-3, ..SolverConfig::default() };
        let zeros = Field::zeros(g.clone());
        let mut state = LinKdvState::zero(g.clone(), 0.0);
        // F*(0) != 0, so start the state on the manufactured solution.
        state.f = fstar(0.0);
        let steps = 1000;
        for i in 0..steps {
            let t_mid = (i as f64 + 0.5) * cfg.dt;
            let u_mid = u.eval(&g, 0.0, t_mid).unwrap();
            let fs = fstar(t_mid);
            let j1 = fs
                .scaled(-1.0) // dF*/dT = -F*
                .add(&derivative(&u_mid.mul_pointwise(&fs).unwrap(), 1).unwrap())
                .unwrap()
                .add(&derivative(&fs, 3).unwrap().scaled(0.5))
                .unwrap();
            let inputs = StepInputs { u_mid: &u_mid, v_mid: &zeros, j1_mid: &j1, j2_mid: &zeros };
            state = linkdv_step(&state, &inputs, cfg.dt, &cfg).unwrap();
        }
        let err = max_abs_diff(&state.f, &fstar(1.0));
        assert!(err < 1e-5, "manufactured-solution error {err}");
    }

    #[test]
    fn solve_fg_zero_horizon_and_split_determinism() {
        let g = scaled_grid();
        let u = right_soliton(1.0, -8.0);
        let v = KdvProfile::Zero;
        let quad = QuadratureSpec::for_grid(&g);
        let cfg = SolverConfig { dt: 0.01, ..SolverConfig::default() };

        let out = solve_fg(&u, &v, 0.1, &g, &quad, 0.0, &cfg, |_| Ok(())).unwrap();
        assert_eq!(discrete_norms(&out.f).linf, 0.0);
        assert_eq!(out.t, 0.0);
    }

    #[test]
    fn overtaking_f_stays_bounded() {
        let g = scaled_grid();
        let u = KdvProfile::TwoSoliton {
            fast: Soliton { kappa: 1.0, x0: -8.0 },
            slow: Soliton { kappa: 0.7, x0: -4.0 },
        };
        let v = KdvProfile::Zero;
        let quad = QuadratureSpec::for_grid(&g);
        let cfg = SolverConfig { dt: 0.01, ..SolverConfig::default() };
        let mut at_t1 = 0.0f64;
        let mut sup: f64 = 0.0;
        let out = solve_fg(&u, &v, 0.05, &g, &quad, 8.0, &cfg, |s| {
            let n = discrete_norms(&s.f).linf;
            sup = sup.max(n);
            if (s.t - 1.0).abs() < 1e-9 {
                at_t1 = n;
            }
            Ok(())
        })
        .unwrap();
        assert!(out.f.check_finite("F").is_ok());
        assert!(at_t1 > 0.0);
        assert!(sup < 10.0 * at_t1, "sup {sup} vs F(1) {at_t1}");
    }

    #[test]
    fn self_convergence_second_order() {
        let g = scaled_grid();
        let u = KdvProfile::TwoSoliton {
            fast: Soliton { kappa: 1.0, x0: -8.0 },
            slow: Soliton { kappa: 0.7, x0: -4.0 },
        };
        let v = KdvProfile::Zero;
        let quad = QuadratureSpec::for_grid(&g);
        let t_end = 0.5;
        let run = |dt: f64| {
            let cfg = SolverConfig { dt, ..SolverConfig::default() };
            solve_fg(&u, &v, 0.05, &g, &quad, t_end, &cfg, |_| Ok(())).unwrap()
        };
        // The fixed-point iteration contracts only for
        // dt < 2 / (||U||_inf * k_cut) ~ 0.025, so stay under that.
        let reference = run(0.0025 / 8.0);
        let mut pts = Vec::new();
        for dt in [0.01, 0.005, 0.0025] {
            let out = run(dt);
            pts.push((dt.ln(), max_abs_diff(&out.f, &reference.f).ln()));
        }
        let slope = crate::fitting::least_squares_slope(&pts);
        assert!((slope - 2.0).abs() <= 0.2, "self-convergence slope {slope}");
    }
}
