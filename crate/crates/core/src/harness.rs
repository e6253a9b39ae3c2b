//! Experiment orchestration: scenario definitions, eps sweeps, truth vs
//! approximation error measurement, order/constant fitting, peak tracking,
//! and result-file emission.

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::assemble::{assemble_w, ApproximationOrder, ModulationSet};
use crate::boussinesq::{evolve, SolverConfig};
use crate::error::{Error, Result};
use crate::fitting::{fit_power_law, FitResult};
use crate::grid::{Field, Grid};
use crate::kdv::{Direction, KdvProfile, Soliton};
use crate::linkdv::{solve_fg, LinKdvState};
use crate::spectral::discrete_norms;
use crate::transport::{compute_correction, QuadratureSpec};

impl ApproximationOrder {
    pub fn label(self) -> &'static str {
        match self {
            ApproximationOrder::KdvOnly => "kdv_only",
            ApproximationOrder::SecondOrder => "second_order",
        }
    }
}

/// Physical-time horizon as a function of eps.
#[derive(Debug, Clone, Copy)]
pub enum Horizon {
    /// `t_end = c / eps` (interaction scale).
    OverEps(f64),
    /// `t_end = c / eps^3` (modulation scale).
    OverEpsCubed(f64),
}

impl Horizon {
    pub fn t_end(self, eps: f64) -> f64 {
        match self {
            Horizon::OverEps(c) => c / eps,
            Horizon::OverEpsCubed(c) => c / (eps * eps * eps),
        }
    }
}

/// One experiment: initial wavetrains, the eps sweep, horizons, grids, and
/// solver settings.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub u0: KdvProfile,
    pub v0: KdvProfile,
    /// Sorted descending; entries in (0, 0.2]. Fits use only eps <= 0.1.
    pub eps_list: Vec<f64>,
    /// Slow-time horizon T0 (boundedness scans; equals the eps^-3 horizon
    /// coefficient for overtaking runs).
    pub t0: f64,
    pub horizon: Horizon,
    pub scaled_grid_n: usize,
    pub scaled_length: f64,
    pub dx_max: f64,
    /// Truth integrator settings; `frame_velocity` also fixes the frame the
    /// approximations are assembled in.
    pub solver: SolverConfig,
    /// Slow-time step for the F/G integration.
    pub fg_dt: f64,
    /// Number of sample intervals for error measurement and peak tracking.
    pub n_samples: usize,
    /// Use the survey-quality quadrature (long-horizon runs).
    pub coarse_quadrature: bool,
    /// Sample indices at which full profiles are kept.
    pub profile_samples: Vec<usize>,
    /// Also record theta = u + v errors.
    pub measure_theta: bool,
}

impl Scenario {
    /// Counter-propagating equal solitary waves colliding near t = 10/eps.
    pub fn head_on() -> Scenario {
        let n_samples = 50;
        Scenario {
            name: "head-on".into(),
            u0: KdvProfile::SingleSoliton {
                direction: Direction::Right,
                soliton: Soliton { kappa: 1.0, x0: -10.0 },
            },
            v0: KdvProfile::SingleSoliton {
                direction: Direction::Left,
                soliton: Soliton { kappa: 1.0, x0: 10.0 },
            },
            eps_list: vec![0.1, 0.075, 0.05, 0.035, 0.025],
            t0: 15.0,
            horizon: Horizon::OverEps(15.0),
            scaled_grid_n: 512,
            scaled_length: 80.0,
            dx_max: 0.25,
            solver: SolverConfig::default(),
            fg_dt: 0.005,
            n_samples,
            coarse_quadrature: false,
            profile_samples: vec![0, n_samples * 2 / 3, n_samples],
            measure_theta: true,
        }
    }

    /// Two right-moving solitary waves, the faster overtaking the slower,
    /// followed over the full modulation horizon in a co-moving frame.
    pub fn overtaking() -> Scenario {
        let n_samples = 40;
        Scenario {
            name: "overtaking".into(),
            u0: KdvProfile::TwoSoliton {
                fast: Soliton { kappa: 1.0, x0: -8.0 },
                slow: Soliton { kappa: 0.7, x0: -4.0 },
            },
            v0: KdvProfile::Zero,
            eps_list: vec![0.1, 0.075, 0.05, 0.035, 0.025],
            t0: 8.0,
            horizon: Horizon::OverEpsCubed(8.0),
            scaled_grid_n: 512,
            scaled_length: 80.0,
            dx_max: 0.25,
            solver: SolverConfig { dt: 0.2, frame_velocity: 1.0, ..SolverConfig::default() },
            fg_dt: 0.01,
            n_samples,
            coarse_quadrature: true,
            profile_samples: vec![0, n_samples / 2, n_samples],
            measure_theta: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_list.is_empty() {
            return Err(Error::InvalidConfig("eps_list must not be empty".into()));
        }
        for w in self.eps_list.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::InvalidConfig(
                    "eps_list must be strictly descending".into(),
                ));
            }
        }
        for &e in &self.eps_list {
            if !(e > 0.0 && e <= 0.2) {
                return Err(Error::InvalidConfig(format!(
                    "eps entries must lie in (0, 0.2], got {e}"
                )));
            }
        }
        if self.t0 <= 0.0 {
            return Err(Error::InvalidConfig("T0 must be positive".into()));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidConfig("need at least 2 sample intervals".into()));
        }
        if self.fg_dt <= 0.0 {
            return Err(Error::InvalidConfig("fg_dt must be positive".into()));
        }
        if self.dx_max <= 0.0 || self.scaled_length <= 0.0 {
            return Err(Error::InvalidConfig("grid spec must be positive".into()));
        }
        for &i in &self.profile_samples {
            if i > self.n_samples {
                return Err(Error::InvalidConfig(format!(
                    "profile sample index {i} exceeds n_samples {}",
                    self.n_samples
                )));
            }
        }
        self.solver.validate()
    }
}

/// Sup-in-time errors of one approximation order at one eps.
#[derive(Debug, Clone)]
pub struct ErrorRecord {
    pub scenario: String,
    pub eps: f64,
    pub order: ApproximationOrder,
    pub sup_l2: f64,
    pub sup_linf: f64,
    /// Sample time where the L-infinity error peaked.
    pub t_at_max: f64,
}

/// One located local maximum.
#[derive(Debug, Clone, Copy)]
pub struct Peak {
    pub position: f64,
    pub height: f64,
}

/// A single maximum followed through time; `None` where it dipped below
/// the detection threshold (e.g. mid-collision).
#[derive(Debug, Clone)]
pub struct PeakTrack {
    pub times: Vec<f64>,
    pub positions: Vec<Option<f64>>,
    pub heights: Vec<Option<f64>>,
}

impl PeakTrack {
    fn count(&self) -> usize {
        self.positions.iter().filter(|p| p.is_some()).count()
    }

    /// Largest recorded height, or 0 for an empty track.
    pub fn max_height(&self) -> f64 {
        self.heights.iter().flatten().fold(0.0, |a, &b| a.max(b))
    }
}

/// Full profiles stored at one sample time (u-component).
#[derive(Debug, Clone)]
pub struct ProfileSnapshot {
    pub eps: f64,
    pub t: f64,
    pub x: Vec<f64>,
    pub truth: Vec<f64>,
    pub kdv: Vec<f64>,
    pub second: Vec<f64>,
}

/// Everything measured for one eps.
#[derive(Debug)]
pub struct EpsResult {
    pub eps: f64,
    pub records: Vec<ErrorRecord>,
    pub theta_records: Vec<ErrorRecord>,
    pub sample_times: Vec<f64>,
    /// Per sample: (t, max theta of truth, of kdv_only, of second_order).
    pub theta_maxima: Vec<(f64, f64, f64, f64)>,
    pub truth_tracks: Vec<PeakTrack>,
    pub kdv_tracks: Vec<PeakTrack>,
    pub second_tracks: Vec<PeakTrack>,
    pub profiles: Vec<ProfileSnapshot>,
}

#[derive(Debug)]
pub struct ScenarioResult {
    pub scenario: String,
    pub runs: Vec<EpsResult>,
}

impl ScenarioResult {
    /// All u-component records across the sweep.
    pub fn records(&self) -> Vec<ErrorRecord> {
        self.runs.iter().flat_map(|r| r.records.iter().cloned()).collect()
    }

    pub fn theta_records(&self) -> Vec<ErrorRecord> {
        self.runs.iter().flat_map(|r| r.theta_records.iter().cloned()).collect()
    }
}

/// Locate local maxima above `min_height`, refining each position and
/// height by a quadratic through the peak sample and its neighbors.
pub fn find_peaks(field: &Field, min_height: f64) -> Vec<Peak> {
    let v = field.values();
    let n = v.len();
    let grid = field.grid();
    let mut peaks = Vec::new();
    for j in 0..n {
        let prev = v[(j + n - 1) % n];
        let next = v[(j + 1) % n];
        if v[j] < min_height || v[j] <= prev || v[j] < next {
            continue;
        }
        let denom = prev - 2.0 * v[j] + next;
        let (position, height) = if denom < 0.0 {
            let delta = 0.5 * (prev - next) / denom;
            (
                grid.point(j) + delta * grid.dx(),
                v[j] - 0.125 * (prev - next) * (prev - next) / denom,
            )
        } else {
            (grid.point(j), v[j])
        };
        peaks.push(Peak { position, height });
    }
    peaks
}

/// Associate per-snapshot peak lists into tracks by nearest
/// constant-velocity prediction.
pub fn track_peaks(times: &[f64], snapshots: &[Vec<Peak>], window: f64) -> Vec<PeakTrack> {
    assert_eq!(times.len(), snapshots.len());
    struct Live {
        track: PeakTrack,
        last: Option<(f64, f64)>,      // (t, position)
        before_last: Option<(f64, f64)>,
    }
    let mut live: Vec<Live> = Vec::new();
    for (i, (&t, peaks)) in times.iter().zip(snapshots).enumerate() {
        // Predicted position per track.
        let predictions: Vec<Option<f64>> = live
            .iter()
            .map(|l| {
                let (t1, x1) = l.last?;
                let x = match l.before_last {
                    Some((t0, x0)) if t1 > t0 => x1 + (x1 - x0) / (t1 - t0) * (t - t1),
                    _ => x1,
                };
                Some(x)
            })
            .collect();
        // Greedy nearest assignment.
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ti, pred) in predictions.iter().enumerate() {
            if let Some(p) = pred {
                for (pi, peak) in peaks.iter().enumerate() {
                    let d = (peak.position - p).abs();
                    if d <= window {
                        pairs.push((d, ti, pi));
                    }
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut track_used = vec![false; live.len()];
        let mut peak_used = vec![false; peaks.len()];
        let mut assignment: Vec<Option<usize>> = vec![None; live.len()];
        for (_, ti, pi) in pairs {
            if !track_used[ti] && !peak_used[pi] {
                track_used[ti] = true;
                peak_used[pi] = true;
                assignment[ti] = Some(pi);
            }
        }
        for (ti, l) in live.iter_mut().enumerate() {
            match assignment[ti] {
                Some(pi) => {
                    let p = peaks[pi];
                    l.track.times.push(t);
                    l.track.positions.push(Some(p.position));
                    l.track.heights.push(Some(p.height));
                    l.before_last = l.last;
                    l.last = Some((t, p.position));
                }
                None => {
                    l.track.times.push(t);
                    l.track.positions.push(None);
                    l.track.heights.push(None);
                }
            }
        }
        for (pi, p) in peaks.iter().enumerate() {
            if !peak_used[pi] {
                let mut track = PeakTrack {
                    times: times[..i].to_vec(),
                    positions: vec![None; i],
                    heights: vec![None; i],
                };
                track.times.push(t);
                track.positions.push(Some(p.position));
                track.heights.push(Some(p.height));
                live.push(Live {
                    track,
                    last: Some((t, p.position)),
                    before_last: None,
                });
            }
        }
    }
    live.into_iter().map(|l| l.track).filter(|t| t.count() > 0).collect()
}

/// Mean difference of post-collision peak positions (truth minus
/// approximation) over the final 10% of sampled times.
pub fn phase_shift_error(truth: &PeakTrack, approx: &PeakTrack) -> Result<f64> {
    let n = truth.times.len().min(approx.times.len());
    if n == 0 {
        return Err(Error::MissingPeaks);
    }
    let tail = (n / 10).max(1);
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in (n - tail)..n {
        if let (Some(a), Some(b)) = (truth.positions[i], approx.positions[i]) {
            sum += a - b;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::MissingPeaks);
    }
    Ok(sum / count as f64)
}

struct SupTracker {
    sup_l2: f64,
    sup_linf: f64,
    t_at_max: f64,
}

impl SupTracker {
    fn new() -> SupTracker {
        SupTracker { sup_l2: 0.0, sup_linf: 0.0, t_at_max: 0.0 }
    }

    fn update(&mut self, truth: &Field, approx: &Field, t: f64) -> Result<()> {
        let diff = truth.sub(approx)?;
        let norms = discrete_norms(&diff);
        self.sup_l2 = self.sup_l2.max(norms.l2);
        if norms.linf > self.sup_linf {
            self.sup_linf = norms.linf;
            self.t_at_max = t;
        }
        Ok(())
    }

    fn record(&self, scenario: &str, eps: f64, order: ApproximationOrder) -> ErrorRecord {
        ErrorRecord {
            scenario: scenario.into(),
            eps,
            order,
            sup_l2: self.sup_l2,
            sup_linf: self.sup_linf,
            t_at_max: self.t_at_max,
        }
    }
}

/// Run one eps of the sweep: integrate the truth, assemble both
/// approximation orders at every sample time, and measure.
pub fn run_eps(s: &Scenario, eps: f64) -> Result<EpsResult> {
    s.validate()?;
    let scaled = Grid::new(s.scaled_grid_n, s.scaled_length)?;
    let physical = Grid::with_max_spacing(s.scaled_length / eps, s.dx_max)?;
    let mut ms =
        ModulationSet::new(s.u0.clone(), s.v0.clone(), eps, s.solver.frame_velocity, scaled.clone())?;
    if s.coarse_quadrature {
        ms.quad = QuadratureSpec::coarse(&scaled);
    }
    ms.fg_cfg.dt = s.fg_dt;
    ms.fg_base = Some(LinKdvState::zero(scaled, 0.0));

    let t_end = s.horizon.t_end(eps);
    let dt = s.solver.dt;
    // Sample times snapped to whole solver steps; the final one is t_end
    // itself, which the integrator lands on exactly.
    let mut sample_times: Vec<f64> = (0..=s.n_samples)
        .map(|i| {
            let t = i as f64 * t_end / s.n_samples as f64;
            ((t / dt).round() * dt).min(t_end)
        })
        .collect();
    sample_times.dedup();
    *sample_times.last_mut().unwrap() = t_end;

    let initial = assemble_w(&ms, &physical, 0.0, ApproximationOrder::KdvOnly)?;

    let mut kdv_sup = SupTracker::new();
    let mut second_sup = SupTracker::new();
    let mut kdv_theta_sup = SupTracker::new();
    let mut second_theta_sup = SupTracker::new();
    let mut theta_maxima = Vec::new();
    let mut truth_peaks: Vec<Vec<Peak>> = Vec::new();
    let mut kdv_peaks: Vec<Vec<Peak>> = Vec::new();
    let mut second_peaks: Vec<Vec<Peak>> = Vec::new();
    let mut profiles = Vec::new();
    let min_height = 0.2 * eps * eps;

    let mut next_sample = 0usize;
    let mut sampled_times = Vec::new();
    let tol = 0.25 * dt;
    let final_state = evolve(initial, t_end, &s.solver, |state| {
        if next_sample >= sample_times.len()
            || (state.t - sample_times[next_sample]).abs() > tol
        {
            return Ok(());
        }
        let sample_idx = next_sample;
        next_sample += 1;
        let t = state.t;
        sampled_times.push(t);

        ms.advance_base_to(t)?;
        let kdv = assemble_w(&ms, &physical, t, ApproximationOrder::KdvOnly)?;
        let second = assemble_w(&ms, &physical, t, ApproximationOrder::SecondOrder)?;

        kdv_sup.update(&state.u, &kdv.u, t)?;
        second_sup.update(&state.u, &second.u, t)?;
        let theta_truth = state.theta();
        let theta_kdv = kdv.theta();
        let theta_second = second.theta();
        if s.measure_theta {
            kdv_theta_sup.update(&theta_truth, &theta_kdv, t)?;
            second_theta_sup.update(&theta_truth, &theta_second, t)?;
        }
        theta_maxima.push((
            t,
            discrete_norms(&theta_truth).linf,
            discrete_norms(&theta_kdv).linf,
            discrete_norms(&theta_second).linf,
        ));

        truth_peaks.push(find_peaks(&state.u, min_height));
        kdv_peaks.push(find_peaks(&kdv.u, min_height));
        second_peaks.push(find_peaks(&second.u, min_height));

        if s.profile_samples.contains(&sample_idx) {
            profiles.push(ProfileSnapshot {
                eps,
                t,
                x: physical.points().collect(),
                truth: state.u.values().to_vec(),
                kdv: kdv.u.values().to_vec(),
                second: second.u.values().to_vec(),
            });
        }
        Ok(())
    })?;
    debug_assert!((final_state.t - t_end).abs() < 1e-9);
    if next_sample != sample_times.len() {
        return Err(Error::TimeMismatch(format!(
            "only {next_sample} of {} sample times were hit",
            sample_times.len()
        )));
    }

    let window = physical.length() / 8.0;
    let mut records = vec![
        kdv_sup.record(&s.name, eps, ApproximationOrder::KdvOnly),
        second_sup.record(&s.name, eps, ApproximationOrder::SecondOrder),
    ];
    records.sort_by(|a, b| a.order.label().cmp(b.order.label()));
    let theta_records = if s.measure_theta {
        vec![
            kdv_theta_sup.record(&s.name, eps, ApproximationOrder::KdvOnly),
            second_theta_sup.record(&s.name, eps, ApproximationOrder::SecondOrder),
        ]
    } else {
        Vec::new()
    };
    Ok(EpsResult {
        eps,
        records,
        theta_records,
        truth_tracks: track_peaks(&sampled_times, &truth_peaks, window),
        kdv_tracks: track_peaks(&sampled_times, &kdv_peaks, window),
        second_tracks: track_peaks(&sampled_times, &second_peaks, window),
        sample_times: sampled_times,
        theta_maxima,
        profiles,
    })
}

/// Run the full sweep; per-eps runs execute on up to `threads` workers and
/// results are reported in eps order regardless of completion order.
pub fn run_scenario(s: &Scenario, threads: usize) -> Result<ScenarioResult> {
    s.validate()?;
    let n = s.eps_list.len();
    let threads = threads.max(1).min(n);
    let mut runs: Vec<Option<Result<EpsResult>>> = Vec::new();
    if threads == 1 {
        for &eps in &s.eps_list {
            runs.push(Some(run_eps(s, eps)));
        }
    } else {
        let slots: Mutex<Vec<Option<Result<EpsResult>>>> =
            Mutex::new((0..n).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..threads {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= n {
                        break;
                    }
                    let out = run_eps(s, s.eps_list[i]);
                    slots.lock().unwrap()[i] = Some(out);
                });
            }
        });
        runs = slots.into_inner().unwrap();
    }
    let mut out = Vec::with_capacity(n);
    for (i, slot) in runs.into_iter().enumerate() {
        let eps = s.eps_list[i];
        match slot {
            Some(Ok(r)) => out.push(r),
            Some(Err(e)) => return Err(Error::AtEps { eps, source: Box::new(e) }),
            None => {
                return Err(Error::AtEps {
                    eps,
                    source: Box::new(Error::InvalidConfig("worker never ran".into())),
                })
            }
        }
    }
    Ok(ScenarioResult { scenario: s.name.clone(), runs: out })
}

/// Which error norm a fit is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    Linf,
}

impl NormKind {
    pub fn label(self) -> &'static str {
        match self {
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
        }
    }
}

/// Fit the error order through the records of one approximation order,
/// using only eps <= 0.1.
pub fn fit_order(
    records: &[ErrorRecord],
    order: ApproximationOrder,
    norm: NormKind,
) -> Result<FitResult> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.order == order && r.eps <= 0.1 + 1e-12)
        .map(|r| {
            (
                r.eps,
                match norm {
                    NormKind::L2 => r.sup_l2,
                    NormKind::Linf => r.sup_linf,
                },
            )
        })
        .collect();
    fit_power_law(&points)
}

/// Sup norms of the four second-order correction fields over their proven
/// horizons: A, B over tau in [0, T0 / eps^2] and F, G over T in [0, T0].
#[derive(Debug, Clone, Serialize)]
pub struct BoundednessReport {
    pub eps: f64,
    pub sup_a: f64,
    pub sup_b: f64,
    pub sup_f: f64,
    pub sup_g: f64,
}

pub fn boundedness_scan(s: &Scenario, eps: f64, n_scan: usize) -> Result<BoundednessReport> {
    s.validate()?;
    let scaled = Grid::new(s.scaled_grid_n, s.scaled_length)?;
    let quad = QuadratureSpec::coarse(&scaled);
    let tau_max = s.t0 / (eps * eps);
    let mut sup_a = 0.0f64;
    let mut sup_b = 0.0f64;
    for j in 0..=n_scan {
        let tau = tau_max * j as f64 / n_scan as f64;
        let corr = compute_correction(&s.u0, &s.v0, tau, eps, &scaled, &quad)?;
        sup_a = sup_a.max(discrete_norms(&corr.a).linf);
        sup_b = sup_b.max(discrete_norms(&corr.b).linf);
    }
    let mut sup_f = 0.0f64;
    let mut sup_g = 0.0f64;
    let cfg = SolverConfig { dt: s.fg_dt, ..SolverConfig::default() };
    solve_fg(&s.u0, &s.v0, eps, &scaled, &quad, s.t0, &cfg, |state| {
        sup_f = sup_f.max(discrete_norms(&state.f).linf);
        sup_g = sup_g.max(discrete_norms(&state.g).linf);
        Ok(())
    })?;
    Ok(BoundednessReport { eps, sup_a, sup_b, sup_f, sup_g })
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// errors.csv: one row per (eps, order).
pub fn write_errors_csv(path: &Path, records: &[ErrorRecord]) -> Result<()> {
    let mut out = String::from("scenario,eps,order,sup_l2,sup_linf,t_at_max\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.scenario,
            fmt(r.eps),
            r.order.label(),
            fmt(r.sup_l2),
            fmt(r.sup_linf),
            fmt(r.t_at_max)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// One fitted line for fits.json.
#[derive(Debug, Clone, Serialize)]
pub struct NamedFit {
    pub scenario: String,
    pub order: &'static str,
    pub norm: &'static str,
    pub slope: f64,
    pub constant: f64,
    pub residual: f64,
}

/// Fit both orders and both norms of a sweep.
pub fn fit_all(scenario: &str, records: &[ErrorRecord]) -> Result<Vec<NamedFit>> {
    let mut fits = Vec::new();
    for order in [ApproximationOrder::KdvOnly, ApproximationOrder::SecondOrder] {
        for norm in [NormKind::L2, NormKind::Linf] {
            let f = fit_order(records, order, norm)?;
            fits.push(NamedFit {
                scenario: scenario.into(),
                order: order.label(),
                norm: norm.label(),
                slope: f.slope,
                constant: f.constant,
                residual: f.residual,
            });
        }
    }
    Ok(fits)
}

pub fn write_fits_json(path: &Path, fits: &[NamedFit]) -> Result<()> {
    let json = serde_json::to_string_pretty(fits)?;
    fs::write(path, json)?;
    Ok(())
}

/// peaks.csv: every tracked peak of every series.
pub fn write_peaks_csv(path: &Path, result: &ScenarioResult) -> Result<()> {
    let mut out = String::from("time,position,height,track_id\n");
    for run in &result.runs {
        for (series, tracks) in [
            ("truth", &run.truth_tracks),
            ("kdv_only", &run.kdv_tracks),
            ("second_order", &run.second_tracks),
        ] {
            for (k, track) in tracks.iter().enumerate() {
                for i in 0..track.times.len() {
                    if let (Some(p), Some(h)) = (track.positions[i], track.heights[i]) {
                        out.push_str(&format!(
                            "{},{},{},eps{}-{}-{}\n",
                            fmt(track.times[i]),
                            fmt(p),
                            fmt(h),
                            run.eps,
                            series,
                            k
                        ));
                    }
                }
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// One CSV per stored profile snapshot: x, truth, kdv, second_order.
pub fn write_snapshots(dir: &Path, result: &ScenarioResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    for run in &result.runs {
        for snap in &run.profiles {
            let mut file = fs::File::create(dir.join(format!(
                "snapshot-{}-eps{}-t{:.6}.csv",
                result.scenario, snap.eps, snap.t
            )))?;
            writeln!(file, "time,x,truth,kdv,second_order")?;
            for j in 0..snap.x.len() {
                writeln!(
                    file,
                    "{},{},{},{},{}",
                    fmt(snap.t),
                    fmt(snap.x[j]),
                    fmt(snap.truth[j]),
                    fmt(snap.kdv[j]),
                    fmt(snap.second[j])
                )?;
            }
        }
    }
    Ok(())
}
