//! Exact Euclidean distance transform on square grids.

/// 1-D squared distance transform of sampled function `f` (lower envelope
/// of parabolas rooted at the finite samples).
fn dt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let mut k: isize = -1;
    for q in 0..f.len() {
        if f[q].is_infinite() {
            continue;
        }
        let mut s = f64::NEG_INFINITY;
        while k >= 0 {
            let p = v[k as usize];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k as usize] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k as usize] = q;
        z[k as usize] = if k == 0 { f64::NEG_INFINITY } else { s };
        z[k as usize + 1] = f64::INFINITY;
    }
    if k < 0 {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut k = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Distance in pixels from every pixel center to the nearest pixel center
/// where `mask` is true; infinite when the mask is empty.
pub fn distance_transform(mask: &[bool], resolution: usize) -> Vec<f64> {
    let n = resolution;
    assert_eq!(mask.len(), n * n);
    let mut grid: Vec<f64> = mask.iter().map(|&m| if m { 0.0 } else { f64::INFINITY }).collect();
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for col in 0..n {
        for row in 0..n {
            f[row] = grid[row * n + col];
        }
        dt_1d(&f, &mut out, &mut v, &mut z);
        for row in 0..n {
            grid[row * n + col] = out[row];
        }
    }
    for row in 0..n {
        f.copy_from_slice(&grid[row * n..(row + 1) * n]);
        dt_1d(&f, &mut out, &mut v, &mut z);
        grid[row * n..(row + 1) * n].copy_from_slice(&out);
    }
    grid.iter_mut().for_each(|d| *d = d.sqrt());
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    fn brute(mask: &[bool], n: usize) -> Vec<f64> {
        let pts: Vec<(usize, usize)> = (0..n * n).filter(|&i| mask[i]).map(|i| (i % n, i / n)).collect();
        (0..n * n)
            .map(|i| {
                let (c, r) = (i % n, i / n);
                pts.iter()
                    .map(|&(pc, pr)| (pc as f64 - c as f64).hypot(pr as f64 - r as f64))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = seeded(3);
        for trial in 0..30 {
            let n = 1 + trial % 17;
            let density = rng.random_range(0.0..0.3);
            let mask: Vec<bool> = (0..n * n).map(|_| rng.random_bool(density)).collect();
            let fast = distance_transform(&mask, n);
            let slow = brute(&mask, n);
            for (a, b) in fast.iter().zip(&slow) {
                assert!(a == b || (a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn empty_mask_is_infinite() {
        assert!(distance_transform(&[false; 16], 4).iter().all(|d| d.is_infinite()));
    }
}
