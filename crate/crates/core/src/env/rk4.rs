//! Classic fixed-step fourth-order Runge-Kutta for small state vectors.

/// One RK4 step of size `dt` for the autonomous system `dx/dt = f(x)`.
pub fn rk4_step<const D: usize>(f: &dyn Fn(&[f64; D]) -> [f64; D], x: &[f64; D], dt: f64) -> [f64; D] {
    let k1 = f(x);
    let k2 = f(&offset(x, &k1, dt * 0.5));
    let k3 = f(&offset(x, &k2, dt * 0.5));
    let k4 = f(&offset(x, &k3, dt));
    let mut out = *x;
    for i in 0..D {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrate over `substeps` equal RK4 steps covering `duration`.
pub fn rk4_integrate<const D: usize>(
    f: &dyn Fn(&[f64; D]) -> [f64; D],
    x: &[f64; D],
    duration: f64,
    substeps: usize,
) -> [f64; D] {
    let dt = duration / substeps as f64;
    let mut state = *x;
    for _ in 0..substeps {
        state = rk4_step(f, &state, dt);
    }
    state
}

fn offset<const D: usize>(x: &[f64; D], k: &[f64; D], h: f64) -> [f64; D] {
    let mut y = *x;
    for i in 0..D {
        y[i] += h * k[i];
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn harmonic_oscillator_period() {
        // x'' = -x, analytic solution cos(t)
        let f = |s: &[f64; 2]| [s[1], -s[0]];
        let out = rk4_integrate(&f, &[1.0, 0.0], std::f64::consts::TAU, 1000);
        assert_abs_diff_eq!(out[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(out[1], 0.0, epsilon = 1e-9);
    }
}
