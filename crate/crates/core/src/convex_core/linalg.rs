//! Banded Cholesky for the Newton systems.

/// Solve H x = rhs for symmetric positive definite H with half-bandwidth `bw`.
/// `h` is row-major n x n and is overwritten; the solution replaces `rhs`.
/// Jacobi equilibration first, then growing diagonal shifts if factorization fails.
pub fn solve_spd_banded(h: &mut [f64], n: usize, bw: usize, rhs: &mut [f64]) -> bool {
    let bw = bw.min(n.saturating_sub(1));
    let mut d = vec![1.0; n];
    for i in 0..n {
        let a = h[i * n + i];
        if a > 0.0 && a.is_finite() {
            d[i] = 1.0 / a.sqrt();
        }
    }
    for i in 0..n {
        let lo = i.saturating_sub(bw);
        let hi = (i + bw + 1).min(n);
        for j in lo..hi {
            h[i * n + j] *= d[i] * d[j];
        }
    }
    let scaled = h.to_vec();
    let mut shift = 0.0;
    loop {
        if shift > 0.0 {
            h.copy_from_slice(&scaled);
            for i in 0..n {
                h[i * n + i] += shift;
            }
        }
        if cholesky_banded(h, n, bw) {
            break;
        }
        shift = if shift == 0.0 { 1e-12 } else { shift * 100.0 };
        if shift > 1e2 {
            return false;
        }
    }
    for i in 0..n {
        rhs[i] *= d[i];
    }
    // forward: L y = b
    for i in 0..n {
        let lo = i.saturating_sub(bw);
        let mut s = rhs[i];
        for k in lo..i {
            s -= h[i * n + k] * rhs[k];
        }
        rhs[i] = s / h[i * n + i];
    }
    // backward: L^T x = y
    for i in (0..n).rev() {
        let hi = (i + bw + 1).min(n);
        let mut s = rhs[i];
        for k in i + 1..hi {
            s -= h[k * n + i] * rhs[k];
        }
        rhs[i] = s / h[i * n + i];
    }
    for i in 0..n {
        rhs[i] *= d[i];
    }
    rhs.iter().all(|v| v.is_finite())
}

/// In-place lower Cholesky factor within the band.
fn cholesky_banded(a: &mut [f64], n: usize, bw: usize) -> bool {
    for j in 0..n {
        let lo = j.saturating_sub(bw);
        let mut dj = a[j * n + j];
        for k in lo..j {
            dj -= a[j * n + k] * a[j * n + k];
        }
        if !(dj > 0.0) || !dj.is_finite() {
            return false;
        }
        let ljj = dj.sqrt();
        a[j * n + j] = ljj;
        let hi = (j + bw + 1).min(n);
        for i in j + 1..hi {
            let lo_i = i.saturating_sub(bw).max(lo);
            let mut s = a[i * n + j];
            for k in lo_i..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / ljj;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve() {
        let n = 6;
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            h[i * n + i] = 4.0;
            if i + 1 < n {
                h[i * n + i + 1] = -1.0;
                h[(i + 1) * n + i] = -1.0;
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                b[i] += h[i * n + j] * x_true[j];
            }
        }
        let mut hc = h.clone();
        assert!(solve_spd_banded(&mut hc, n, 1, &mut b));
        for i in 0..n {
            assert!((b[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn badly_scaled_dense_solve() {
        let n = 3;
        let s = [1e-6, 1.0, 1e8];
        let base = [[2.0, 0.5, 0.1], [0.5, 3.0, 0.2], [0.1, 0.2, 1.5]];
        let mut h = vec![0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                h[i * 3 + j] = base[i][j] * s[i] * s[j];
            }
        }
        let y = [1.0, -2.0, 3.0];
        let x_true: Vec<f64> = (0..3).map(|i| y[i] / s[i]).collect();
        let mut b = vec![0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += base[i][j] * y[j];
            }
            b[i] *= s[i];
        }
        let mut hc = h.clone();
        assert!(solve_spd_banded(&mut hc, n, 2, &mut b));
        for i in 0..3 {
            assert!((b[i] - x_true[i]).abs() < 1e-10 * x_true[i].abs());
        }
    }
}
