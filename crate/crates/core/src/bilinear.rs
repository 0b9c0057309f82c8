//! Levenberg-Marquardt refinement for bilinear residuals `r_k = xᵀ C_k y`.
//!
//! Both searches end in a zero-residual least-squares problem of this shape
//! (the overlap `Σ_ab |⟨K_b φ|K_a ψ⟩|²` and the distance `‖W†(a⊗b)‖²` to a
//! subspace), where plain alternating updates slow to a linear crawl.
//! Steps are only accepted when the normalised objective decreases.

use crate::linalg::{c, CMat, CVec};

pub(crate) struct Polished {
    pub x: CVec,
    pub y: CVec,
    pub value: f64,
}

fn residuals(cs: &[CMat], x: &CVec, y: &CVec) -> CVec {
    CVec::from_iterator(cs.len(), cs.iter().map(|m| (x.transpose() * m * y)[(0, 0)]))
}

/// `Σ_k |xᵀ C_k y|²` for unit `x`, `y`.
pub(crate) fn objective(cs: &[CMat], x: &CVec, y: &CVec) -> f64 {
    residuals(cs, x, y).norm_squared()
}

pub(crate) fn polish(cs: &[CMat], x0: CVec, y0: CVec, max_iter: usize) -> Polished {
    let dx = x0.len();
    let dy = y0.len();
    let mut x = &x0 / c(x0.norm(), 0.0);
    let mut y = &y0 / c(y0.norm(), 0.0);
    let mut value = objective(cs, &x, &y);
    let mut lambda = 1e-3;
    for _ in 0..max_iter {
        if value <= 1e-300 || lambda > 1e12 {
            break;
        }
        let r = residuals(cs, &x, &y);
        let mut j = CMat::zeros(cs.len(), dx + dy);
        for (k, m) in cs.iter().enumerate() {
            let jx = m * &y;
            let jy = m.transpose() * &x;
            for i in 0..dx {
                j[(k, i)] = jx[i];
            }
            for i in 0..dy {
                j[(k, dx + i)] = jy[i];
            }
        }
        let jh = j.adjoint();
        let normal = &jh * &j;
        let rhs = -(&jh * &r);
        let scale = (0..dx + dy).map(|i| normal[(i, i)].re).fold(0.0, f64::max).max(1e-300);
        let mut damped = normal.clone();
        for i in 0..dx + dy {
            damped[(i, i)] += c(lambda * scale, 0.0);
        }
        let Some(step) = damped.lu().solve(&rhs) else {
            lambda *= 10.0;
            continue;
        };
        let xn = &x + step.rows(0, dx);
        let yn = &y + step.rows(dx, dy);
        let (nx, ny) = (xn.norm(), yn.norm());
        if nx == 0.0 || ny == 0.0 {
            lambda *= 10.0;
            continue;
        }
        let xn = xn / c(nx, 0.0);
        let yn = yn / c(ny, 0.0);
        let trial = objective(cs, &xn, &yn);
        if trial < value {
            let gain = value - trial;
            x = xn;
            y = yn;
            value = trial;
            lambda = (lambda / 3.0).max(1e-12);
            if gain <= 1e-15 * value {
                break;
            }
        } else {
            lambda *= 4.0;
        }
    }
    Polished { x, y, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_gaussian_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn converges_to_planted_zero() {
        // r_k = xᵀ C_k y vanishes at (x*, y*) when every C_k kills y* against x*.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs = crate::linalg::random_unit_vector(&mut rng, 3);
        let ys = crate::linalg::random_unit_vector(&mut rng, 3);
        let cs: Vec<CMat> = (0..4)
            .map(|_| {
                let g = random_gaussian_matrix(&mut rng, 3, 3);
                let val = (xs.transpose() * &g * &ys)[(0, 0)];
                // rank-one correction so that xsᵀ C ys = 0
                let fix = crate::linalg::conj_vec(&xs) * ys.adjoint() * val;
                g - fix
            })
            .collect();
        assert!(objective(&cs, &xs, &ys) < 1e-24);
        let x0 = &xs + crate::linalg::random_unit_vector(&mut rng, 3) * c(0.05, 0.0);
        let y0 = &ys + crate::linalg::random_unit_vector(&mut rng, 3) * c(0.05, 0.0);
        let start = objective(&cs, &(&x0 / c(x0.norm(), 0.0)), &(&y0 / c(y0.norm(), 0.0)));
        let p = polish(&cs, x0, y0, 100);
        assert!(p.value < 1e-20, "{} from {}", p.value, start);
    }
}
