//! Dense vector helpers and the primal-dual point type.
//!
//! Points are plain `Vec<f64>`/`&[f64]`; these helpers keep the algorithm
//! code free of index loops.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `a - b` as a new vector.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + b` as a new vector.
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

pub fn scale_in_place(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

pub fn check_len(v: &[f64], expected: usize) -> Result<()> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found: v.len() })
    }
}

/// A primal-dual pair `w = (x, mu)` stored contiguously as `[x; mu]`.
///
/// The stacked layout is what the forward-backward core iterates on; the
/// block accessors give the primal and dual views.
#[derive(Debug, Clone, PartialEq)]
pub struct PdPoint {
    data: Vec<f64>,
    primal_dim: usize,
}

impl PdPoint {
    pub fn new(primal: &[f64], dual: &[f64]) -> Self {
        let mut data = Vec::with_capacity(primal.len() + dual.len());
        data.extend_from_slice(primal);
        data.extend_from_slice(dual);
        Self { data, primal_dim: primal.len() }
    }

    pub fn zeros(primal_dim: usize, dual_dim: usize) -> Self {
        Self { data: vec![0.0; primal_dim + dual_dim], primal_dim }
    }

    pub fn from_stacked(data: Vec<f64>, primal_dim: usize) -> Result<Self> {
        if primal_dim > data.len() {
            return Err(Error::DimensionMismatch { expected: primal_dim, found: data.len() });
        }
        Ok(Self { data, primal_dim })
    }

    pub fn primal(&self) -> &[f64] {
        &self.data[..self.primal_dim]
    }

    pub fn dual(&self) -> &[f64] {
        &self.data[self.primal_dim..]
    }

    pub fn primal_mut(&mut self) -> &mut [f64] {
        &mut self.data[..self.primal_dim]
    }

    pub fn dual_mut(&mut self) -> &mut [f64] {
        &mut self.data[self.primal_dim..]
    }

    pub fn primal_dim(&self) -> usize {
        self.primal_dim
    }

    pub fn dual_dim(&self) -> usize {
        self.data.len() - self.primal_dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_stacked(self) -> Vec<f64> {
        self.data
    }
}
