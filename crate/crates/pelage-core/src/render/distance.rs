//! Exact Euclidean distance transform (Felzenszwalb–Huttenlocher).

use alloc::vec;
use alloc::vec::Vec;

/// Exact Euclidean distance (in pixels) from every pixel to the nearest
/// foreground pixel of `mask` (row-major, `width * height`).
///
/// Foreground pixels map to 0; if the mask has no foreground at all, every
/// entry is `f64::INFINITY`.
pub fn distance_transform(mask: &[bool], width: usize, height: usize) -> Vec<f64> {
    assert_eq!(mask.len(), width * height);
    // Squared distances, two separable 1D passes of the lower-envelope
    // algorithm: exact for the squared Euclidean metric.
    let mut sq = vec![f64::INFINITY; width * height];
    for (d, &m) in sq.iter_mut().zip(mask.iter()) {
        if m {
            *d = 0.0;
        }
    }

    // Columns.
    let mut f = vec![0.0f64; height.max(width)];
    let mut out1d = vec![0.0f64; height.max(width)];
    for x in 0..width {
        for y in 0..height {
            f[y] = sq[y * width + x];
        }
        edt_1d(&f[..height], &mut out1d[..height]);
        for y in 0..height {
            sq[y * width + x] = out1d[y];
        }
    }
    // Rows.
    for y in 0..height {
        f[..width].copy_from_slice(&sq[y * width..(y + 1) * width]);
        edt_1d(&f[..width], &mut out1d[..width]);
        sq[y * width..(y + 1) * width].copy_from_slice(&out1d[..width]);
    }

    for d in &mut sq {
        if d.is_finite() {
            *d = d.sqrt();
        }
    }
    sq
}

/// 1D squared distance transform under a sampled cost `f`:
/// `out[q] = min_p ((q - p)^2 + f[p])`.
fn edt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    // Indices of parabola vertices in the lower envelope and the boundaries
    // between consecutive parabolas.
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        if f[q].is_infinite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = if f[p].is_infinite() {
                // Any finite parabola dominates an infinite one everywhere.
                f64::NEG_INFINITY
            } else {
                ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64)
            };
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    let mut k = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        *o = if f[p].is_infinite() {
            f64::INFINITY
        } else {
            let d = q as f64 - p as f64;
            d * d + f[p]
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn brute_force(mask: &[bool], width: usize, height: usize) -> Vec<f64> {
        let mut out = vec![f64::INFINITY; width * height];
        for y in 0..height {
            for x in 0..width {
                let mut best = f64::INFINITY;
                for fy in 0..height {
                    for fx in 0..width {
                        if mask[fy * width + fx] {
                            let dx = x as f64 - fx as f64;
                            let dy = y as f64 - fy as f64;
                            best = best.min(dx * dx + dy * dy);
                        }
                    }
                }
                out[y * width + x] = if best.is_finite() { best.sqrt() } else { best };
            }
        }
        out
    }

    #[test]
    fn foreground_pixels_are_zero() {
        let mut mask = vec![false; 16];
        mask[5] = true;
        let d = distance_transform(&mask, 4, 4);
        assert_eq!(d[5], 0.0);
    }

    #[test]
    fn three_four_five() {
        // Single foreground pixel, query offset by (3,4) -> distance 5.
        let w = 16;
        let mut mask = vec![false; w * w];
        mask[2 * w + 2] = true;
        let d = distance_transform(&mask, w, w);
        assert_eq!(d[6 * w + 5], 5.0);
    }

    #[test]
    fn all_background_is_infinite() {
        let d = distance_transform(&[false; 64], 8, 8);
        assert!(d.iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn matches_brute_force_on_random_masks() {
        let mut rng = crate::rng::seeded(99);
        for case in 0..20 {
            let (w, h) = (rng.gen_range(1..=64), rng.gen_range(1..=64));
            let density: f64 = rng.gen_range(0.0..0.3);
            let mask: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(density.max(0.001))).collect();
            let fast = distance_transform(&mask, w, h);
            let slow = brute_force(&mask, w, h);
            for i in 0..w * h {
                let same = (fast[i] - slow[i]).abs() < 1e-9
                    || (fast[i].is_infinite() && slow[i].is_infinite());
                assert!(same, "case {case} pixel {i}: {} vs {}", fast[i], slow[i]);
            }
        }
    }
}
