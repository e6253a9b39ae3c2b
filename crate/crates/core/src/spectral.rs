//! Fourier-grid infrastructure: spectral differentiation, the nonlocal
//! operator with symbol ik/sqrt(1+k^2), its odd polynomial truncations,
//! dealiased products and discrete norms.
//!
//! Transform convention: forward transform unnormalized, inverse carries
//! the 1/n factor. Symbols are always applied to the forward-transformed
//! representation. Odd symbols are forced real (i.e. zero) at the Nyquist
//! mode so real-to-real maps stay exactly real.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward transform of real samples.
pub fn fft_forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(buf.len());
        fft.process(&mut buf);
    });
    buf
}

/// Inverse transform (with the 1/n factor), keeping only the real part.
pub fn fft_inverse_real(mut coeffs: Vec<Complex64>) -> Vec<f64> {
    let n = coeffs.len();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_inverse(n);
        fft.process(&mut coeffs);
    });
    let scale = 1.0 / n as f64;
    coeffs.into_iter().map(|c| c.re * scale).collect()
}

/// A Fourier multiplier tied to one grid.
///
/// Construction enforces conjugate symmetry (`symbol(-k) = conj(symbol(k))`)
/// so that applying the symbol to a real field yields a real field.
#[derive(Debug, Clone)]
pub struct SpectralSymbol {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl SpectralSymbol {
    /// Build a symbol by evaluating `f` at every grid wavenumber. The
    /// Nyquist value has its imaginary part zeroed.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> Complex64) -> Result<SpectralSymbol> {
        let mut values: Vec<Complex64> = grid.wavenumbers().iter().map(|&k| f(k)).collect();
        let ny = grid.nyquist_index();
        values[ny] = Complex64::new(values[ny].re, 0.0);
        let s = SpectralSymbol { grid: grid.clone(), values };
        s.check_conjugate_symmetry()?;
        Ok(s)
    }

    fn check_conjugate_symmetry(&self) -> Result<()> {
        let n = self.grid.n();
        for i in 0..n {
            let j = (n - i) % n;
            let a = self.values[i];
            let b = self.values[j].conj();
            if (a - b).norm() > 1e-12 * (1.0 + a.norm()) {
                return Err(Error::InvalidConfig(format!(
                    "symbol violates conjugate symmetry at mode index {i}"
                )));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// The nonlocal operator symbol ik/sqrt(1+k^2).
pub fn lambda_symbol(grid: &Arc<Grid>) -> SpectralSymbol {
    SpectralSymbol::from_fn(grid, |k| Complex64::new(0.0, k / (1.0 + k * k).sqrt()))
        .expect("lambda symbol is conjugate-symmetric")
}

/// Spectral derivative symbol (ik)^order.
pub fn derivative_symbol(grid: &Arc<Grid>, order: u32) -> SpectralSymbol {
    SpectralSymbol::from_fn(grid, |k| Complex64::new(0.0, k).powu(order))
        .expect("derivative symbol is conjugate-symmetric")
}

/// Apply a Fourier multiplier to a real field.
pub fn apply_symbol(f: &Field, s: &SpectralSymbol) -> Result<Field> {
    f.check_finite("apply_symbol input")?;
    if *f.grid().as_ref() != *s.grid.as_ref() {
        return Err(Error::GridMismatch { left: f.grid().n(), right: s.grid.n() });
    }
    let mut coeffs = fft_forward(f.values());
    for (c, m) in coeffs.iter_mut().zip(&s.values) {
        *c *= m;
    }
    Field::new(f.grid().clone(), fft_inverse_real(coeffs))
}

/// Spectral derivative of given order.
pub fn derivative(f: &Field, order: u32) -> Result<Field> {
    apply_symbol(f, &derivative_symbol(f.grid(), order))
}

/// Relative tolerance on the mean for inverting the lambda operator.
pub const MEAN_TOL_REL: f64 = 1e-10;

/// Invert the lambda operator on a zero-mean field.
///
/// The spectrum is divided by ik/sqrt(1+k^2) for k != 0; the k = 0 and
/// Nyquist modes (where the odd symbol vanishes) are set to zero.
pub fn apply_lambda_inverse(f: &Field) -> Result<Field> {
    f.check_finite("apply_lambda_inverse input")?;
    let norms = discrete_norms(f);
    let tol = MEAN_TOL_REL * norms.l2.max(f64::MIN_POSITIVE);
    let mean = f.mean();
    if mean.abs() > tol {
        return Err(Error::NonzeroMean { mean, tol });
    }
    let lam = lambda_symbol(f.grid());
    let mut coeffs = fft_forward(f.values());
    for (c, m) in coeffs.iter_mut().zip(lam.values()) {
        if m.norm_sqr() == 0.0 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= m;
        }
    }
    Field::new(f.grid().clone(), fft_inverse_real(coeffs))
}

/// Odd Maclaurin truncation T_j of y/sqrt(1-y^2) evaluated at y = i*a:
/// T1 = y, T3 = y + y^3/2, T5 = y + y^3/2 + 3y^5/8.
fn taylor_multiplier(a: f64, order: u32) -> Complex64 {
    let mut im = a;
    if order >= 3 {
        im -= 0.5 * a * a * a;
    }
    if order >= 5 {
        im += 0.375 * a.powi(5);
    }
    Complex64::new(0.0, im)
}

/// Apply the polynomial truncation T_j(eps * d/dX) to a long-wave profile
/// sampled on the scaled grid.
pub fn taylor_lambda(f: &Field, order: u32, eps: f64) -> Result<Field> {
    if !matches!(order, 1 | 3 | 5) {
        return Err(Error::BadTruncationOrder(order));
    }
    f.check_finite("taylor_lambda input")?;
    let s = SpectralSymbol::from_fn(f.grid(), |k| taylor_multiplier(eps * k, order))?;
    apply_symbol(f, &s)
}

fn dealias_mask(grid: &Grid) -> impl Fn(usize) -> bool + '_ {
    let n = grid.n();
    let cut = n as i64 / 3;
    move |i| {
        let m = if i <= n / 2 { i as i64 } else { i as i64 - n as i64 };
        m.abs() > cut
    }
}

/// Zero the upper third of a spectrum (2/3 rule).
pub fn dealias_spectrum(grid: &Grid, coeffs: &mut [Complex64]) {
    let kill = dealias_mask(grid);
    for (i, c) in coeffs.iter_mut().enumerate() {
        if kill(i) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Pointwise product with 2/3-rule dealiasing: the upper third of each
/// factor's spectrum is zeroed before multiplication and the product is
/// re-truncated.
pub fn dealiased_product(f: &Field, g: &Field) -> Result<Field> {
    f.same_grid(g)?;
    f.check_finite("dealiased_product left factor")?;
    g.check_finite("dealiased_product right factor")?;
    let grid = f.grid();
    let mut a = fft_forward(f.values());
    let mut b = fft_forward(g.values());
    dealias_spectrum(grid, &mut a);
    dealias_spectrum(grid, &mut b);
    let fa = fft_inverse_real(a);
    let fb = fft_inverse_real(b);
    let prod: Vec<f64> = fa.iter().zip(&fb).map(|(&x, &y)| x * y).collect();
    let mut p = fft_forward(&prod);
    dealias_spectrum(grid, &mut p);
    Field::new(grid.clone(), fft_inverse_real(p))
}

/// Discrete L2 and Linf norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub linf: f64,
}

pub fn discrete_norms(f: &Field) -> Norms {
    let dx = f.grid().dx();
    let mut sq = 0.0;
    let mut linf: f64 = 0.0;
    for &v in f.values() {
        sq += v * v;
        linf = linf.max(v.abs());
    }
    Norms { l2: (dx * sq).sqrt(), linf }
}

/// Discrete L2 inner product `dx * sum(f g)`.
pub fn inner_product(f: &Field, g: &Field) -> Result<f64> {
    f.same_grid(g)?;
    Ok(f.grid().dx() * f.values().iter().zip(g.values()).map(|(&a, &b)| a * b).sum::<f64>())
}

/// Translate a periodic field: returns g with g(x) = f(x - shift),
/// implemented as a Fourier phase factor.
pub fn shift_field(f: &Field, shift: f64) -> Result<Field> {
    if shift == 0.0 {
        return Ok(f.clone());
    }
    let s = SpectralSymbol::from_fn(f.grid(), |k| {
        Complex64::from_polar(1.0, -k * shift)
    })?;
    apply_symbol(f, &s)
}

/// Spectrally interpolate `f` (optionally pre-shifted so the result is
/// `f(y - shift)`) onto a finer grid spanning the same period.
///
/// Zero-padded transform; never linear interpolation.
pub fn resample_shifted(f: &Field, target: &Arc<Grid>, shift: f64) -> Result<Field> {
    let n_src = f.grid().n();
    let n_dst = target.n();
    if (f.grid().length() - target.length()).abs() > 1e-9 * target.length() {
        return Err(Error::InvalidConfig(
            "resample target grid must span the same period".into(),
        ));
    }
    if n_dst == n_src && shift == 0.0 {
        return Ok(Field::new(target.clone(), f.values().to_vec())?);
    }
    if n_dst < n_src {
        return Err(Error::InvalidConfig("resample target must not be coarser".into()));
    }
    let mut coeffs = fft_forward(f.values());
    // Phase shift on the source spectrum.
    if shift != 0.0 {
        for (c, &k) in coeffs.iter_mut().zip(f.grid().wavenumbers()) {
            *c *= Complex64::from_polar(1.0, -k * shift);
        }
    }
    // Zero-pad: modes 0..n/2-1 keep their slots, negative modes move to the
    // tail. The source Nyquist mode is split evenly between +/- n/2 slots.
    let mut padded = vec![Complex64::new(0.0, 0.0); n_dst];
    let half = n_src / 2;
    padded[..half].copy_from_slice(&coeffs[..half]);
    for i in 1..half {
        padded[n_dst - i] = coeffs[n_src - i];
    }
    let ny = coeffs[half] * 0.5;
    padded[half] = ny;
    padded[n_dst - half] = ny.conj();
    let scale = n_dst as f64 / n_src as f64;
    let values: Vec<f64> = fft_inverse_real(padded).into_iter().map(|v| v * scale).collect();
    Field::new(target.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_abs_diff(a: &Field, b: &Field) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(&x, &y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn lambda_on_constant_is_zero() {
        let g = Grid::new(64, 2.0 * PI).unwrap();
        let f = Field::from_fn(g.clone(), |_| 1.0);
        let out = apply_symbol(&f, &lambda_symbol(&g)).unwrap();
        assert!(discrete_norms(&out).linf < 1e-14);
    }

    #[test]
    fn lambda_on_cosine() {
        // lambda cos(x) = -sin(x)/sqrt(2) on a 2*pi*p grid.
        for p in [1u32, 3] {
            let g = Grid::new(128, 2.0 * PI * p as f64).unwrap();
            let f = Field::from_fn(g.clone(), |x| x.cos());
            let out = apply_symbol(&f, &lambda_symbol(&g)).unwrap();
            let expect = Field::from_fn(g, |x| -x.sin() / 2f64.sqrt());
            assert!(max_abs_diff(&out, &expect) < 1e-12);
        }
    }

    #[test]
    fn spectral_derivative_of_resolved_mode() {
        let g = Grid::new(64, 2.0 * PI).unwrap();
        let f = Field::from_fn(g.clone(), |x| (2.0 * x).sin());
        let out = derivative(&f, 1).unwrap();
        let expect = Field::from_fn(g, |x| 2.0 * (2.0 * x).cos());
        assert!(max_abs_diff(&out, &expect) < 1e-11);
    }

    #[test]
    fn apply_symbol_rejects_non_finite() {
        let g = Grid::new(8, 1.0).unwrap();
        let mut f = Field::zeros(g.clone());
        f.values_mut()[5] = f64::INFINITY;
        match apply_symbol(&f, &lambda_symbol(&g)) {
            Err(Error::NonFinite { index: 5, .. }) => {}
            other => panic!("expected NonFinite at 5, got {other:?}"),
        }
    }

    #[test]
    fn lambda_inverse_of_sine() {
        // inverse of the cosine example above.
        let g = Grid::new(128, 2.0 * PI).unwrap();
        let f = Field::from_fn(g.clone(), |x| -x.sin() / 2f64.sqrt());
        let out = apply_lambda_inverse(&f).unwrap();
        let expect = Field::from_fn(g, |x| x.cos());
        assert!(max_abs_diff(&out, &expect) < 1e-12);
    }

    #[test]
    fn lambda_inverse_trivial_and_error_cases() {
        let g = Grid::new(64, 2.0 * PI).unwrap();
        let zero = Field::zeros(g.clone());
        let out = apply_lambda_inverse(&zero).unwrap();
        assert_eq!(discrete_norms(&out).linf, 0.0);

        let ones = Field::from_fn(g, |_| 1.0);
        match apply_lambda_inverse(&ones) {
            Err(Error::NonzeroMean { .. }) => {}
            other => panic!("expected NonzeroMean, got {other:?}"),
        }
    }

    #[test]
    fn lambda_inverse_composes_to_identity() {
        let g = Grid::new(256, 40.0).unwrap();
        // Zero-mean smooth field.
        let f = Field::from_fn(g.clone(), |x| {
            (2.0 * PI * x / 40.0).sin() + 0.3 * (6.0 * PI * x / 40.0).cos()
        });
        let lam = apply_symbol(&f, &lambda_symbol(&g)).unwrap();
        let back = apply_lambda_inverse(&lam).unwrap();
        let rel = max_abs_diff(&back, &f) / discrete_norms(&f).linf;
        assert!(rel < 1e-10, "relative error {rel}");
    }

    #[test]
    fn lambda_is_skew_symmetric() {
        let g = Grid::new(128, 30.0).unwrap();
        let f = Field::from_fn(g.clone(), |x| (-0.5 * x * x).exp() + 0.1 * x.sin());
        let lf = apply_symbol(&f, &lambda_symbol(&g)).unwrap();
        let ip = inner_product(&f, &lf).unwrap();
        let nrm = discrete_norms(&f).l2;
        assert!(ip.abs() <= 1e-10 * nrm * nrm);
    }

    #[test]
    fn taylor_lambda_orders() {
        let g = Grid::new(64, 2.0 * PI).unwrap();

        // Order 1 on sech^2 is eps * d/dX.
        let f = Field::from_fn(g.clone(), |x| 1.0 / x.cosh().powi(2));
        let t1 = taylor_lambda(&f, 1, 0.3).unwrap();
        let d1 = derivative(&f, 1).unwrap().scaled(0.3);
        assert!(max_abs_diff(&t1, &d1) < 1e-12);

        // Order 3 on sin(X) with eps = 0.1: (0.1 - 0.0005) cos(X).
        let s = Field::from_fn(g.clone(), |x| x.sin());
        let t3 = taylor_lambda(&s, 3, 0.1).unwrap();
        let expect = Field::from_fn(g.clone(), |x| 0.0995 * x.cos());
        assert!(max_abs_diff(&t3, &expect) < 1e-13);

        // Order 5 on zero stays zero; bad order rejected.
        let z = Field::zeros(g);
        assert_eq!(discrete_norms(&taylor_lambda(&z, 5, 0.1).unwrap()).linf, 0.0);
        assert!(matches!(taylor_lambda(&z, 2, 0.1), Err(Error::BadTruncationOrder(2))));
    }

    /// Truncation-order property: || lambda Phi(eps x) - T_j(eps d/dX) Phi ||_{L2}
    /// decreases with fitted slope >= j + 1.4 for j in {1,3,5}.
    #[test]
    fn taylor_truncation_order_scaling() {
        let scaled_len = 60.0;
        let n = 2048;
        // sech^2 carries spectral weight out to K ~ 5, so the symbol's
        // Maclaurin expansion (accurate for eps*K small) only reaches its
        // asymptotic rate once eps <= 0.05.
        let eps_list = [0.05, 0.025, 0.0125];
        for j in [1u32, 3, 5] {
            let mut pts = Vec::new();
            for &eps in &eps_list {
                let phys = Grid::new(n, scaled_len / eps).unwrap();
                let scaled = Grid::new(n, scaled_len).unwrap();
                let phi_phys = Field::from_fn(phys.clone(), |x| 1.0 / (eps * x).cosh().powi(2));
                let phi_scaled = Field::from_fn(scaled, |xx| 1.0 / xx.cosh().powi(2));
                let full = apply_symbol(&phi_phys, &lambda_symbol(&phys)).unwrap();
                let trunc = taylor_lambda(&phi_scaled, j, eps).unwrap();
                // Values align point-for-point; measure on the unscaled grid.
                let diff: Vec<f64> = full
                    .values()
                    .iter()
                    .zip(trunc.values())
                    .map(|(&a, &b)| a - b)
                    .collect();
                let l2 = (phys.dx() * diff.iter().map(|d| d * d).sum::<f64>()).sqrt();
                pts.push((eps.ln(), l2.ln()));
            }
            let slope = crate::fitting::least_squares_slope(&pts);
            assert!(
                slope >= j as f64 + 1.4,
                "order {j}: fitted slope {slope} below {}",
                j as f64 + 1.4
            );
        }
    }

    #[test]
    fn dealiased_product_cases() {
        let g = Grid::new(64, 2.0 * PI).unwrap();
        let z = Field::zeros(g.clone());
        let out = dealiased_product(&z, &z).unwrap();
        assert_eq!(discrete_norms(&out).linf, 0.0);

        // Identity factor within the retained band.
        let one = Field::from_fn(g.clone(), |_| 1.0);
        let band = Field::from_fn(g.clone(), |x| (3.0 * x).sin() + 0.5 * (7.0 * x).cos());
        let out = dealiased_product(&one, &band).unwrap();
        assert!(max_abs_diff(&out, &band) < 1e-12);

        // cos^2 = 1/2 + cos(2x)/2, both modes retained for n = 64.
        let c = Field::from_fn(g.clone(), |x| x.cos());
        let out = dealiased_product(&c, &c).unwrap();
        let expect = Field::from_fn(g.clone(), |x| 0.5 + 0.5 * (2.0 * x).cos());
        assert!(max_abs_diff(&out, &expect) < 1e-12);

        // Grid mismatch rejected.
        let g2 = Grid::new(128, 2.0 * PI).unwrap();
        let other = Field::zeros(g2);
        assert!(dealiased_product(&c, &other).is_err());
    }

    #[test]
    fn dealiased_product_is_bitwise_symmetric() {
        let g = Grid::new(128, 10.0).unwrap();
        let f = Field::from_fn(g.clone(), |x| (0.7 * x).sin() + 0.3 * (1.9 * x).cos());
        let h = Field::from_fn(g, |x| (-0.1 * x * x).exp());
        let fg = dealiased_product(&f, &h).unwrap();
        let gf = dealiased_product(&h, &f).unwrap();
        assert_eq!(fg.values(), gf.values());
    }

    #[test]
    fn norm_examples() {
        let g = Grid::new(16, 1.0).unwrap();
        let z = Field::zeros(g.clone());
        assert_eq!(discrete_norms(&z), Norms { l2: 0.0, linf: 0.0 });

        let two = Field::from_fn(g, |_| 2.0);
        let n = discrete_norms(&two);
        assert!((n.l2 - 2.0).abs() < 1e-14 && (n.linf - 2.0).abs() < 1e-14);

        let g = Grid::new(256, 2.0 * PI).unwrap();
        let s = Field::from_fn(g, |x| x.sin());
        let n = discrete_norms(&s);
        assert!((n.l2 - PI.sqrt()).abs() < 1e-12);
        assert!((n.linf - 1.0).abs() < 1e-3); // grid may straddle the crest
    }

    #[test]
    fn shift_translates() {
        let g = Grid::new(128, 2.0 * PI).unwrap();
        let f = Field::from_fn(g.clone(), |x| x.sin());
        let out = shift_field(&f, 0.5).unwrap();
        let expect = Field::from_fn(g, |x| (x - 0.5).sin());
        assert!(max_abs_diff(&out, &expect) < 1e-12);
    }

    #[test]
    fn resample_interpolates_band_limited_exactly() {
        let coarse = Grid::new(64, 2.0 * PI).unwrap();
        let fine = Grid::new(256, 2.0 * PI).unwrap();
        let f = Field::from_fn(coarse, |x| (3.0 * x).cos() - 2.0 * (5.0 * x).sin());
        let out = resample_shifted(&f, &fine, 0.25).unwrap();
        let expect = Field::from_fn(fine, |x| (3.0 * (x - 0.25)).cos() - 2.0 * (5.0 * (x - 0.25)).sin());
        assert!(max_abs_diff(&out, &expect) < 1e-11);
    }
}
