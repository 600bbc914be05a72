//! Closed-form harmonic measures and Green functions of the half-plane and the disk.

use std::f64::consts::{PI, TAU};

/// `ω^{(x,y)}([a, b] × {0})` in the upper half-plane.
pub fn half_plane_interval(x: f64, y: f64, a: f64, b: f64) -> f64 {
    ((b - x) / y).atan() / PI - ((a - x) / y).atan() / PI
}

/// `ω^z` of the counter-clockwise arc `[θ₀, θ₀ + len]` of the unit circle, `|z| < 1`.
pub fn disk_arc(z: [f64; 2], theta0: f64, len: f64) -> f64 {
    if len >= TAU {
        return 1.0;
    }
    let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
    let phi = z[1].atan2(z[0]);
    let k = (1.0 + r) / (1.0 - r);
    // antiderivative of the Poisson kernel on (−π, π)
    let f = |t: f64| {
        if t >= PI {
            PI
        } else if t <= -PI {
            -PI
        } else {
            2.0 * (k * (t / 2.0).tan()).atan()
        }
    };
    let a = (theta0 - phi + PI).rem_euclid(TAU) - PI;
    let b = a + len;
    let integral = if b <= PI { f(b) - f(a) } else { (PI - f(a)) + (f(b - TAU) + PI) };
    integral / TAU
}

/// `ω^z(B(ζ, ρ) ∩ ∂𝔻)` for the unit disk and `|ζ| = 1`.
pub fn disk_boundary_ball(z: [f64; 2], zeta: [f64; 2], rho: f64) -> f64 {
    if rho >= 2.0 {
        return 1.0;
    }
    let half = 2.0 * (rho / 2.0).asin();
    let t = zeta[1].atan2(zeta[0]);
    disk_arc(z, t - half, 2.0 * half)
}

/// `G_𝔻(p, q) = (1/2π) log(|1 − p̄q| / |q − p|)`.
pub fn disk_green(p: [f64; 2], q: [f64; 2]) -> f64 {
    // 1 − p̄q
    let re = 1.0 - (p[0] * q[0] + p[1] * q[1]);
    let im = -(p[0] * q[1] - p[1] * q[0]);
    let num = (re * re + im * im).sqrt();
    let den = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
    (num / den).ln() / TAU
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_quadrature(z: [f64; 2], theta0: f64, len: f64) -> f64 {
        let n = 20_000;
        let h = len / n as f64;
        (0..n)
            .map(|i| {
                let t = theta0 + (i as f64 + 0.5) * h;
                let (dx, dy) = (t.cos() - z[0], t.sin() - z[1]);
                (1.0 - z[0] * z[0] - z[1] * z[1]) / (dx * dx + dy * dy) * h / TAU
            })
            .sum()
    }

    #[test]
    fn arc_formula_matches_quadrature() {
        for &(z, t0, len) in &[
            ([0.0, 0.0], 0.3, 1.0),
            ([0.5, -0.2], 2.5, 2.0),
            ([-0.7, 0.1], 3.0, 0.5),
            ([0.1, 0.8], -3.1, 4.0),
        ] {
            assert!((disk_arc(z, t0, len) - poisson_quadrature(z, t0, len)).abs() < 1e-6);
        }
        assert!((disk_arc([0.0, 0.0], 1.0, PI / 3.0) - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn half_plane_and_green_values() {
        assert!((half_plane_interval(0.0, 1.0, -1.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((disk_green([0.0, 0.0], [0.5, 0.0]) - 2f64.ln() / TAU).abs() < 1e-15);
        let (p, q) = ([0.3, 0.1], [-0.2, 0.4]);
        assert!((disk_green(p, q) - disk_green(q, p)).abs() < 1e-15);
    }
}
