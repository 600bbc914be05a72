use serde::{Deserialize, Serialize};
use std::ops::Deref;

use crate::error::{invalid, Result};

/// A point of the ambient space ℝⁿ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("points need at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("point coordinates must be finite"));
        }
        Ok(Point(coords))
    }

    /// Unchecked constructor for internal hot paths.
    pub(crate) fn from_vec(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Point(vec![x, y])
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dist(&self, other: &[f64]) -> f64 {
        dist(&self.0, other)
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<[f64; 2]> for Point {
    fn from(c: [f64; 2]) -> Self {
        Point(c.to_vec())
    }
}

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Closed Euclidean ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    pub fn diam(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dist2(&self.center, x) <= self.radius * self.radius
    }

    /// Same center, radius multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Ball {
        Ball {
            center: self.center.clone(),
            radius: self.radius * factor,
        }
    }
}

/// Affine d-plane `base + span(basis)` with an orthonormal basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub base: Point,
    pub basis: Vec<Vec<f64>>,
}

impl Plane {
    /// Builds a plane, orthonormalizing `directions` by Gram–Schmidt.
    pub fn new(base: Point, directions: Vec<Vec<f64>>) -> Result<Self> {
        let n = base.dim();
        if directions.is_empty() || directions.len() > n {
            return Err(invalid(format!(
                "plane dimension {} must lie in 1..={n}",
                directions.len()
            )));
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(directions.len());
        for mut v in directions {
            if v.len() != n {
                return Err(invalid("direction dimension mismatch"));
            }
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let len = norm(&v);
            if len < 1e-12 {
                return Err(invalid("plane directions are linearly dependent"));
            }
            v.iter_mut().for_each(|x| *x /= len);
            basis.push(v);
        }
        Ok(Plane { base, basis })
    }

    /// Line through `base` in direction angle `theta` (planar).
    pub fn line(base: Point, theta: f64) -> Plane {
        Plane {
            base,
            basis: vec![vec![theta.cos(), theta.sin()]],
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn dist(&self, x: &[f64]) -> f64 {
        let mut v: Vec<f64> = sub(x, &self.base);
        for b in &self.basis {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        norm(&v).max(0.0)
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let v = sub(x, &self.base);
        let mut p = self.base.to_vec();
        for b in &self.basis {
            let c = dot(&v, b);
            p.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
        }
        p
    }

    /// Orthonormal completion of the basis, deterministic.
    pub fn normals(&self) -> Vec<Vec<f64>> {
        let n = self.ambient_dim();
        let mut frame = self.basis.clone();
        let mut normals = Vec::new();
        while frame.len() < n {
            // pick the standard vector with the largest residual
            let mut best: Option<(f64, Vec<f64>)> = None;
            for i in 0..n {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                for b in &frame {
                    let c = dot(&v, b);
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
                let len = norm(&v);
                if best.as_ref().is_none_or(|(l, _)| len > *l + 1e-12) {
                    best = Some((len, v));
                }
            }
            let (len, mut v) = best.expect("ambient dimension is positive");
            v.iter_mut().for_each(|x| *x /= len);
            frame.push(v.clone());
            normals.push(v);
        }
        normals
    }

    /// Same directions, translated so that it passes through `p`.
    pub fn through(&self, p: &[f64]) -> Plane {
        Plane {
            base: Point::from_vec(p.to_vec()),
            basis: self.basis.clone(),
        }
    }

    /// Checks orthonormality of the basis within `tol`.
    pub fn is_orthonormal(&self, tol: f64) -> bool {
        self.basis.iter().enumerate().all(|(i, a)| {
            self.basis.iter().enumerate().all(|(j, b)| {
                let target = if i == j { 1.0 } else { 0.0 };
                (dot(a, b) - target).abs() <= tol
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_distance_and_normal() {
        let l = Plane::new(Point::xy(0.0, 1.0), vec![vec![2.0, 0.0]]).unwrap();
        assert!(l.is_orthonormal(1e-12));
        assert!((l.dist(&[5.0, 3.0]) - 2.0).abs() < 1e-12);
        let nrm = l.normals();
        assert_eq!(nrm.len(), 1);
        assert!(nrm[0][0].abs() < 1e-12 && (nrm[0][1].abs() - 1.0).abs() < 1e-12);
        assert_eq!(l.project(&[3.0, -4.0]), vec![3.0, 1.0]);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(Ball::new(Point::xy(0.0, 0.0), 0.0).is_err());
        assert!(Point::new(vec![f64::NAN]).is_err());
        assert!(Plane::new(Point::xy(0.0, 0.0), vec![vec![1.0, 1.0], vec![2.0, 2.0]]).is_err());
    }
}
