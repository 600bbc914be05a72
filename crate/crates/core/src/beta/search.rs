//! Plane fitting: principal-component initialization and derivative-free
//! refinement over rotations and normal translations.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::geometry::{dot, Plane, Point};

/// Orthonormal frame whose first `d` axes span the plane.
#[derive(Clone, Debug)]
pub struct Frame {
    pub base: Vec<f64>,
    pub axes: Vec<Vec<f64>>,
    pub d: usize,
}

impl Frame {
    pub fn from_plane(plane: &Plane) -> Frame {
        let mut axes = plane.basis.clone();
        axes.extend(plane.normals());
        Frame { base: plane.base.to_vec(), axes, d: plane.dim() }
    }

    pub fn plane(&self) -> Plane {
        Plane { base: Point::from_vec(self.base.clone()), basis: self.axes[..self.d].to_vec() }
    }

    pub fn rotated(&self, i: usize, j: usize, theta: f64) -> Frame {
        let (s, c) = theta.sin_cos();
        let mut f = self.clone();
        let (a, b) = (&self.axes[i], &self.axes[j]);
        f.axes[i] = a.iter().zip(b).map(|(x, y)| c * x + s * y).collect();
        f.axes[j] = a.iter().zip(b).map(|(x, y)| -s * x + c * y).collect();
        f
    }

    fn translated(&self, j: usize, delta: f64) -> Frame {
        let mut f = self.clone();
        f.base.iter_mut().zip(&self.axes[j]).for_each(|(x, y)| *x += delta * y);
        f
    }
}

/// Principal-component d-plane through the centroid.
///
/// Returns the plane and the number of significant principal directions, so
/// callers can detect sets with fewer than `d+1` affinely independent points.
pub fn pca_plane(points: &[&[f64]], d: usize, n: usize) -> (Plane, usize) {
    let m = points.len().max(1) as f64;
    let mut centroid = vec![0.0; n];
    for p in points {
        centroid.iter_mut().zip(p.iter()).for_each(|(c, x)| *c += x / m);
    }
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for p in points {
        for a in 0..n {
            for b in 0..n {
                cov[(a, b)] += (p[a] - centroid[a]) * (p[b] - centroid[b]) / m;
            }
        }
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let rank = order.iter().filter(|&&i| eig.eigenvalues[i] > 1e-20 + 1e-12 * top).count();
    let mut basis = Vec::with_capacity(d);
    for &i in order.iter().take(d) {
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        basis.push(v);
    }
    let plane = Plane::new(Point::from_vec(centroid.clone()), basis).unwrap_or_else(|_| {
        let basis = (0..d)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        Plane { base: Point::from_vec(centroid), basis }
    });
    (plane, rank)
}

/// Search controls.
#[derive(Clone, Copy, Debug)]
pub struct SearchControl {
    /// Maximum number of objective evaluations.
    pub budget: usize,
    /// Initial rotation step in radians.
    pub angle: f64,
    /// Initial translation step.
    pub shift: f64,
    /// Whether the base may move along the normals.
    pub translate: bool,
}

/// Coordinate search minimizing `objective` from `start`. Returns the best
/// plane and its objective value.
pub fn refine(start: &Plane, ctl: SearchControl, mut objective: impl FnMut(&Plane) -> f64) -> (Plane, f64) {
    let mut frame = Frame::from_plane(start);
    let mut best = objective(start);
    let mut evals = 1;
    let n = frame.axes.len();
    let d = frame.d;
    let mut angle = ctl.angle;
    let mut shift = ctl.shift;
    let min_angle = 1e-6;
    let min_shift = 1e-6 * ctl.shift.max(f64::MIN_POSITIVE);
    while evals < ctl.budget && best > 0.0 && (angle > min_angle || (ctl.translate && shift > min_shift)) {
        let before = best;
        let mut moves: Vec<Frame> = Vec::new();
        if angle > min_angle {
            for i in 0..d {
                for j in d..n {
                    moves.push(frame.rotated(i, j, angle));
                    moves.push(frame.rotated(i, j, -angle));
                }
            }
        }
        if ctl.translate && shift > min_shift {
            for j in d..n {
                moves.push(frame.translated(j, shift));
                moves.push(frame.translated(j, -shift));
            }
        }
        for cand in moves {
            if evals >= ctl.budget {
                break;
            }
            let v = objective(&cand.plane());
            evals += 1;
            if v < best {
                best = v;
                frame = cand;
            }
        }
        let gain = before - best;
        if gain <= 1e-6 * before {
            angle /= 2.0;
            shift /= 2.0;
        }
    }
    (frame.plane(), best)
}

/// Projection of `x` onto the plane, expressed in plane coordinates.
pub fn plane_coords(plane: &Plane, x: &[f64]) -> Vec<f64> {
    let v: Vec<f64> = x.iter().zip(plane.base.iter()).map(|(a, b)| a - b).collect();
    plane.basis.iter().map(|b| dot(&v, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pca_recovers_a_line() {
        let pts: Vec<[f64; 2]> = (0..50).map(|i| [i as f64, 2.0 * i as f64 + 1.0]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
        let (plane, rank) = pca_plane(&refs, 1, 2);
        assert_eq!(rank, 1);
        assert!(refs.iter().all(|p| plane.dist(p) < 1e-9));
    }

    #[test]
    fn refine_finds_offset_line() {
        let start = Plane::line(Point::xy(0.0, 0.0), 0.3);
        let target = Plane::line(Point::xy(0.0, 0.4), 0.0);
        let probes: Vec<[f64; 2]> = (-5..=5).map(|i| [i as f64 * 0.1, 0.4]).collect();
        let ctl = SearchControl { budget: 2000, angle: 0.25, shift: 0.25, translate: true };
        let (p, v) = refine(&start, ctl, |l| probes.iter().map(|q| l.dist(q)).fold(0.0, f64::max));
        assert!(v < 1e-4, "{v}");
        assert!(probes.iter().all(|q| target.dist(q) < 1e-12 && p.dist(q) < 1e-4));
    }
}
