//! Periodic 1-D grids and real-valued fields sampled on them.

use std::sync::Arc;

use crate::error::{Error, Result};

/// A uniform periodic grid on `[-L/2, L/2)` with its discrete wavenumbers.
///
/// `n` must be a power of two (and at least 8) so transforms stay fast and
/// coarse/fine grids nest exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
    dx: f64,
    wavenumbers: Vec<f64>,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Arc<Grid>> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "grid size must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidConfig(format!("grid length must be positive, got {length}")));
        }
        let dx = length / n as f64;
        // Layout: m = 0, 1, ..., n/2, -(n/2-1), ..., -1  (Nyquist stored positive).
        let scale = 2.0 * std::f64::consts::PI / length;
        let wavenumbers = (0..n)
            .map(|i| {
                let m = if i <= n / 2 { i as i64 } else { i as i64 - n as i64 };
                m as f64 * scale
            })
            .collect();
        Ok(Arc::new(Grid { n, length, dx, wavenumbers }))
    }

    /// Smallest power-of-two grid covering `length` with spacing at most `dx_max`.
    pub fn with_max_spacing(length: f64, dx_max: f64) -> Result<Arc<Grid>> {
        let needed = (length / dx_max).ceil() as usize;
        let n = needed.max(8).next_power_of_two();
        Grid::new(n, length)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Grid point `x_j = -L/2 + j dx`.
    pub fn point(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.point(j))
    }

    /// Index of the Nyquist mode (`n/2`).
    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }
}

/// Real samples of one function on a [`Grid`] at a fixed time.
///
/// Fields are immutable snapshots; cloning shares the grid.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Field> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch { left: grid.n(), right: values.len() });
        }
        let f = Field { grid, values };
        f.check_finite("field values")?;
        Ok(f)
    }

    pub fn zeros(grid: Arc<Grid>) -> Field {
        let n = grid.n();
        Field { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Field {
        let values = grid.points().map(f).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        if let Some(index) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what, index });
        }
        Ok(())
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && *self.grid != *other.grid {
            return Err(Error::GridMismatch { left: self.grid.n(), right: other.grid.n() });
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Field { grid: self.grid.clone(), values })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul_pointwise(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(4, 1.0).is_err());
        assert!(Grid::new(100, 1.0).is_err());
        assert!(Grid::new(128, 1.0).is_ok());
    }

    #[test]
    fn wavenumber_layout() {
        let g = Grid::new(8, 2.0 * std::f64::consts::PI).unwrap();
        let k = g.wavenumbers();
        assert_eq!(k[0], 0.0);
        assert_eq!(k[1], 1.0);
        assert_eq!(k[4], 4.0); // Nyquist
        assert_eq!(k[7], -1.0);
        assert!((g.dx() * g.n() as f64 - g.length()).abs() < 1e-15);
    }

    #[test]
    fn field_rejects_non_finite() {
        let g = Grid::new(8, 1.0).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        match Field::new(g, v) {
            Err(Error::NonFinite { index: 3, .. }) => {}
            other => panic!("expected NonFinite at 3, got {other:?}"),
        }
    }
}
