//! Dense row-major 2D grids.

use crate::error::{Error, Result};

/// A `height × width` row-major grid. Index `(row, col)` corresponds to the
/// `(x, y)` / `(u, v)` coordinates of the transform formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

pub type RealGrid = Grid<f64>;

impl<T> Grid<T> {
    pub fn new(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidInput(format!(
                "grid dimensions must be positive, got {height}×{width}"
            )));
        }
        if data.len() != height * width {
            return Err(Error::InvalidInput(format!(
                "grid {height}×{width} needs {} values, got {}",
                height * width,
                data.len()
            )));
        }
        Ok(Self { height, width, data })
    }

    /// Builds a grid from `f(row, col)`.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(height > 0 && width > 0, "grid dimensions must be positive");
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self { height, width, data }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// `(height, width)`.
    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.width + col]
    }

    #[inline]
    pub fn get_mut(&mut self, row: usize, col: usize) -> &mut T {
        &mut self.data[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Elementwise combination of two grids of equal dimensions.
    pub fn zip_map<U, V>(&self, other: &Grid<U>, mut f: impl FnMut(&T, &U) -> V) -> Result<Grid<V>> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} vs {}×{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(Grid {
            height: self.height,
            width: self.width,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        })
    }
}

impl<T: Clone> Grid<T> {
    /// Panics if either dimension is zero.
    pub fn filled(height: usize, width: usize, value: T) -> Self {
        assert!(height > 0 && width > 0, "grid dimensions must be positive");
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }
}

impl RealGrid {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn max_abs_diff(&self, other: &RealGrid) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self += other * scale`, elementwise.
    pub(crate) fn add_scaled(&mut self, other: &RealGrid, scale: f64) {
        debug_assert_eq!(self.dims(), other.dims());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * scale;
        }
    }
}

/// Moves index `(0, 0)` to `(⌊h/2⌋, ⌊w/2⌋)` by cyclic rotation.
pub fn fftshift<T: Clone>(grid: &Grid<T>) -> Grid<T> {
    let (h, w) = grid.dims();
    let (sh, sw) = (h / 2, w / 2);
    // out[(r + sh) % h][(c + sw) % w] = in[r][c]
    Grid::from_fn(h, w, |r, c| grid.get((r + h - sh) % h, (c + w - sw) % w).clone())
}

/// Inverse of [`fftshift`]; differs from it only for odd dimensions.
pub fn ifftshift<T: Clone>(grid: &Grid<T>) -> Grid<T> {
    let (h, w) = grid.dims();
    let (sh, sw) = (h / 2, w / 2);
    Grid::from_fn(h, w, |r, c| grid.get((r + sh) % h, (c + sw) % w).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_and_mismatched_sizes() {
        assert!(Grid::new(0, 3, Vec::<f64>::new()).is_err());
        assert!(Grid::new(2, 2, vec![1.0; 3]).is_err());
        assert!(Grid::new(2, 2, vec![1.0; 4]).is_ok());
    }

    #[test]
    fn shift_moves_origin_to_center() {
        for (h, w) in [(4, 4), (5, 3), (1, 6), (7, 7)] {
            let mut g = RealGrid::zeros(h, w);
            *g.get_mut(0, 0) = 1.0;
            let s = fftshift(&g);
            assert_eq!(*s.get(h / 2, w / 2), 1.0);
            assert_eq!(ifftshift(&s), g);
        }
    }
}
