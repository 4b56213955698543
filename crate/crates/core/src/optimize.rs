//! Derivative-free minimizers: golden-section search and a compass pattern search.

/// Golden-section search on `[a, b]`; returns `(x_min, f(x_min))`.
///
/// Stops once the bracket is shorter than `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[derive(Debug, Clone)]
pub struct PatternSearchOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    /// Best value after each outer iteration (non-increasing).
    pub trace: Vec<f64>,
    pub iterations: usize,
}

/// Compass search: try `x ± step·e_k` for every coordinate, accept the first
/// strict improvement, halve the step when no move helps.
pub fn pattern_search<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    initial_step: f64,
    min_step: f64,
    max_iters: usize,
) -> PatternSearchOutcome {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut step = initial_step;
    let mut trace = vec![fx];
    let mut iterations = 0;
    while iterations < max_iters && step >= min_step {
        iterations += 1;
        let mut improved = false;
        for k in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[k] += sign * step;
                let fy = f(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
        trace.push(fx);
    }
    PatternSearchOutcome { x, value: fx, trace, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        // a smooth minimum is only located to about sqrt(machine epsilon)
        let (x, v) = golden_section(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
        let (x, _) = golden_section(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn pattern_search_is_monotone() {
        let out = pattern_search(|x| (x[0] - 1.0).abs() + 2.0 * (x[1] + 0.5).abs(), &[0.0, 0.0], 0.25, 1e-8, 10_000);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!((out.x[0] - 1.0).abs() < 1e-7 && (out.x[1] + 0.5).abs() < 1e-7);
    }
}
