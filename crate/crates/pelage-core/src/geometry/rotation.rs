//! Axis-angle (Rodrigues) rotations and their analytic derivatives.

use nalgebra::{Matrix3, Vector3};

/// Cross-product matrix `[w]_x` such that `skew(w) * v == w.cross(&v)`.
pub fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Rotation matrix for an axis-angle vector (angle = |w|, axis = w/|w|).
pub fn rodrigues(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = w.norm_squared();
    let k = skew(w);
    if theta2 < 1e-24 {
        // First-order expansion is exact to machine precision here.
        return Matrix3::identity() + k;
    }
    let theta = theta2.sqrt();
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    Matrix3::identity() + k * (s / theta) + k * k * ((1.0 - c) / theta2)
}

/// Analytic partial derivatives `dR/dw_i` of the Rodrigues map, i = 0..3.
///
/// Uses the closed form d(R)/dw_i = ((w_i [w]_x + [w x (I - R) e_i]_x) / |w|^2) R,
/// which degenerates to `[e_i]_x` at w = 0.
pub fn rodrigues_jacobian(w: &Vector3<f64>) -> [Matrix3<f64>; 3] {
    let r = rodrigues(w);
    let theta2 = w.norm_squared();
    let mut out = [Matrix3::zeros(); 3];
    if theta2 < 1e-20 {
        for (i, d) in out.iter_mut().enumerate() {
            let mut e = Vector3::zeros();
            e[i] = 1.0;
            *d = skew(&e);
        }
        return out;
    }
    let i_minus_r = Matrix3::identity() - r;
    for (i, d) in out.iter_mut().enumerate() {
        let mut e = Vector3::zeros();
        e[i] = 1.0;
        let v = w.cross(&(i_minus_r * e));
        *d = (skew(&v) + skew(w) * w[i]) * r / theta2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd_jacobian(w: &Vector3<f64>, i: usize) -> Matrix3<f64> {
        let h = 1e-6;
        let mut wp = *w;
        let mut wm = *w;
        wp[i] += h;
        wm[i] -= h;
        (rodrigues(&wp) - rodrigues(&wm)) / (2.0 * h)
    }

    #[test]
    fn rodrigues_matches_quarter_turn() {
        let r = rodrigues(&Vector3::new(0.0, 0.0, core::f64::consts::FRAC_PI_2));
        let v = r * Vector3::new(1.0, 0.0, 0.0);
        assert_relative_eq!(v, Vector3::new(0.0, 1.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let cases = [
            Vector3::new(0.3, -0.2, 0.9),
            Vector3::new(1.5, 0.0, 0.1),
            Vector3::new(-0.01, 0.02, 0.005),
            Vector3::new(0.0, 0.0, 0.0),
        ];
        for w in cases {
            let an = rodrigues_jacobian(&w);
            for i in 0..3 {
                let fd = fd_jacobian(&w, i);
                assert_relative_eq!(an[i], fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn rotation_is_orthonormal() {
        let r = rodrigues(&Vector3::new(0.7, -1.1, 0.4));
        assert_relative_eq!(r * r.transpose(), Matrix3::identity(), epsilon = 1e-12);
        assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-12);
    }
}
