use crate::error::{Error, Result};

/// A point in `R^d` with an optional sample index.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
    pub index: Option<usize>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(None));
        }
        Ok(Point {
            coords,
            index: None,
        })
    }

    pub fn with_index(coords: Vec<f64>, index: usize) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(Some(index)));
        }
        Ok(Point {
            coords,
            index: Some(index),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.coords
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn check_dims<P: AsRef<[f64]>>(points: &[P], d: usize) -> Result<()> {
    for p in points {
        let got = p.as_ref().len();
        if got != d {
            return Err(Error::DimensionMismatch { expected: d, got });
        }
    }
    Ok(())
}
