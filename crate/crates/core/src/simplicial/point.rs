use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Largest ambient dimension supported by the kernel.
pub const MAX_DIM: usize = 3;

/// A point (or vector) of R^n with n in {1, 2, 3}, stored inline.
///
/// Unused trailing coordinates are kept at zero so that derived equality and
/// the arithmetic operators behave as on the first `dim` coordinates.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

/// Values of an R^n-valued map share the representation of points.
pub type Vector = Point;

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self, GeometryError> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(GeometryError::UnsupportedDimension(coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self::from_slice_unchecked(coords))
    }

    pub(crate) fn from_slice_unchecked(coords: &[f64]) -> Self {
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Self {
            coords: c,
            dim: coords.len() as u8,
        }
    }

    pub fn zero(dim: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&dim));
        Self {
            coords: [0.0; MAX_DIM],
            dim: dim as u8,
        }
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Self::from_slice_unchecked(&[x, y])
    }

    pub fn xyz(x: f64, y: f64, z: f64) -> Self {
        Self::from_slice_unchecked(&[x, y, z])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Sup-norm.
    #[inline]
    pub fn norm_inf(&self) -> f64 {
        self.coords().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (*self - *other).norm()
    }

    pub fn distance_inf(&self, other: &Self) -> f64 {
        (*self - *other).norm_inf()
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|c| c.is_finite())
    }

    /// Affine combination `sum w_i p_i`; weights are not required to sum to one.
    pub fn combination(points: &[Point], weights: &[f64]) -> Point {
        debug_assert_eq!(points.len(), weights.len());
        let mut out = Point::zero(points[0].dim());
        for (p, w) in points.iter().zip(weights) {
            for k in 0..MAX_DIM {
                out.coords[k] += w * p.coords[k];
            }
        }
        out
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl Index<usize> for Point {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.coords[..self.dim as usize][i]
    }
}

impl IndexMut<usize> for Point {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.coords[..self.dim as usize][i]
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(mut self, rhs: Point) -> Point {
        self += rhs;
        self
    }
}

impl AddAssign for Point {
    #[inline]
    fn add_assign(&mut self, rhs: Point) {
        for k in 0..MAX_DIM {
            self.coords[k] += rhs.coords[k];
        }
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(mut self, rhs: Point) -> Point {
        self -= rhs;
        self
    }
}

impl SubAssign for Point {
    #[inline]
    fn sub_assign(&mut self, rhs: Point) {
        for k in 0..MAX_DIM {
            self.coords[k] -= rhs.coords[k];
        }
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(mut self, rhs: f64) -> Point {
        for k in 0..MAX_DIM {
            self.coords[k] *= rhs;
        }
        self
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        self * -1.0
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Point::new(&v).map_err(serde::de::Error::custom)
    }
}
