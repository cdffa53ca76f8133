//! Gauss–Jacobi rules on [−1, 1] by the Golub–Welsch eigenvalue method.

use crate::specfun::{gamma, ln_gamma};
use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

/// Nodes and weights for ∫₋₁¹ (1−t)^α (1+t)^β g(t) dt ≈ Σ wᵢ g(tᵢ).
///
/// `one_plus` and `one_minus` hold 1 + tᵢ and 1 − tᵢ so callers can form
/// distances to the endpoints without cancellation.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub one_plus: Vec<f64>,
    pub one_minus: Vec<f64>,
    pub weights: Vec<f64>,
}

fn jacobi_mass(alpha: f64, beta: f64) -> f64 {
    if alpha + beta + 2.0 < 100.0 {
        2f64.powf(alpha + beta + 1.0) * gamma(alpha + 1.0).unwrap() * gamma(beta + 1.0).unwrap()
            / gamma(alpha + beta + 2.0).unwrap()
    } else {
        ((alpha + beta + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0).unwrap()
            + ln_gamma(beta + 1.0).unwrap()
            - ln_gamma(alpha + beta + 2.0).unwrap())
        .exp()
    }
}

/// m-point Gauss–Jacobi rule for weight (1−t)^α (1+t)^β, α, β > −1.
pub fn gauss_jacobi(m: usize, alpha: f64, beta: f64) -> GaussRule {
    assert!(m >= 1 && alpha > -1.0 && beta > -1.0);
    let ab = alpha + beta;
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m];
    diag[0] = (beta - alpha) / (ab + 2.0);
    for (k, d) in diag.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        let t = 2.0 * kf + ab;
        *d = (beta * beta - alpha * alpha) / (t * (t + 2.0));
    }
    for k in 1..m {
        let kf = k as f64;
        let t = 2.0 * kf + ab;
        let b = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (t * t * (t + 1.0) * (t - 1.0))
        };
        off[k - 1] = b.sqrt();
    }
    let mut first = vec![0.0; m];
    first[0] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut first);

    let mass = jacobi_mass(alpha, beta);
    let mut pairs: Vec<(f64, f64)> =
        diag.iter().zip(&first).map(|(&t, &v)| (t, mass * v * v)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let nodes: Vec<f64> = pairs.iter().map(|p| p.0.clamp(-1.0, 1.0)).collect();
    GaussRule {
        one_plus: nodes.iter().map(|t| 1.0 + t).collect(),
        one_minus: nodes.iter().map(|t| 1.0 - t).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        nodes,
    }
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
///
/// On return `diag` holds the eigenvalues and `first` the first component of
/// each normalised eigenvector. `off[i]` couples rows i and i+1.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], first: &mut [f64]) {
    let n = diag.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 100, "tridiagonal eigenvalue iteration failed to converge");
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let fz = first[i + 1];
                first[i + 1] = s * first[i] + c * fz;
                first[i] = c * first[i] - s * fz;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

thread_local! {
    static CACHE: RefCell<HashMap<(usize, u64, u64), Rc<GaussRule>>> = RefCell::new(HashMap::new());
}

/// Cached rule; the cache is per thread so lookups never contend.
pub(crate) fn cached_rule(m: usize, alpha: f64, beta: f64) -> Rc<GaussRule> {
    let key = (m, alpha.to_bits(), beta.to_bits());
    CACHE.with(|c| {
        if let Some(rule) = c.borrow().get(&key) {
            return rule.clone();
        }
        let rule = Rc::new(gauss_jacobi(m, alpha, beta));
        c.borrow_mut().insert(key, rule.clone());
        rule
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::beta as beta_fn;

    #[test]
    fn legendre_three_point() {
        let r = gauss_jacobi(3, 0.0, 0.0);
        let x = (0.6f64).sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-15 && r.nodes[1].abs() < 1e-15);
        assert!((r.weights[0] - 5.0 / 9.0).abs() < 1e-15);
        assert!((r.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_weights() {
        // α = β = −1/2 gives equal weights π/m
        let r = gauss_jacobi(7, -0.5, -0.5);
        for w in &r.weights {
            assert!((w - std::f64::consts::PI / 7.0).abs() < 1e-14);
        }
    }

    #[test]
    fn moments_of_one_plus_t() {
        let (a, b) = (0.3, -0.7);
        let r = gauss_jacobi(12, a, b);
        for k in 0..24 {
            let exact = 2f64.powf(a + b + k as f64 + 1.0) * beta_fn(a + 1.0, b + k as f64 + 1.0).unwrap();
            let got: f64 = r.weights.iter().zip(&r.one_plus).map(|(w, p)| w * p.powi(k)).sum();
            assert!((got - exact).abs() <= 1e-13 * exact, "k = {k}");
        }
    }
}
