//! Symmetric banded LDLᵀ factorization without pivoting.
//!
//! The number of negative pivots equals the number of negative eigenvalues
//! (Sylvester's law of inertia), which is what the buckling monitor relies on.

use crate::error::{Error, Result};

/// Lower band storage: `data[i * (bw + 1) + (bw - (i - j))]` holds `a[i][j]` for
/// `i - bw <= j <= i`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> BandMatrix {
        let bw = bw.min(n.saturating_sub(1));
        BandMatrix {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn from_dense(a: &nalgebra::DMatrix<f64>) -> BandMatrix {
        let n = a.nrows();
        let mut m = BandMatrix::zeros(n, n.saturating_sub(1));
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, 0.5 * (a[(i, j)] + a[(j, i)]));
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (self.bw - (i - j))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    /// Adds `v` to `a[i][j]` (and implicitly `a[j][i]`). Off-diagonal entries
    /// must be added once per symmetric pair.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bw, "entry ({i},{j}) outside bandwidth {}", self.bw);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn shift_diagonal(&mut self, sigma: f64) {
        for i in 0..self.n {
            let k = self.idx(i, i);
            self.data[k] += sigma;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..i {
                let a = self.data[self.idx(i, j)];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += self.data[self.idx(i, i)] * x[i];
        }
        y
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        (0..self.n).map(|i| self.data[self.idx(i, i)].abs()).fold(0.0, f64::max)
    }

    /// Gershgorin lower bound on the smallest eigenvalue.
    pub fn gershgorin_lower(&self) -> f64 {
        let mut off = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..i {
                let a = self.data[self.idx(i, j)].abs();
                off[i] += a;
                off[j] += a;
            }
        }
        (0..self.n)
            .map(|i| self.data[self.idx(i, i)] - off[i])
            .fold(f64::INFINITY, f64::min)
    }

    /// Factorizes in place into `L D Lᵀ`.
    pub fn factorize(mut self) -> Result<LdlFactor> {
        let n = self.n;
        let bw = self.bw;
        let scale = self.max_abs_diagonal().max(f64::MIN_POSITIVE);
        let mut d = vec![0.0; n];
        // Row-oriented Doolittle on the band: l_ij = (a_ij - Σ_k l_ik d_k l_jk) / d_j.
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..i {
                let klo = lo.max(j.saturating_sub(bw));
                let mut s = self.data[self.idx(i, j)];
                for k in klo..j {
                    s -= self.data[self.idx(i, k)] * d[k] * self.data[self.idx(j, k)];
                }
                let l = s / d[j];
                let ij = self.idx(i, j);
                self.data[ij] = l;
            }
            let mut s = self.data[self.idx(i, i)];
            for k in lo..i {
                let l = self.data[self.idx(i, k)];
                s -= l * l * d[k];
            }
            if !s.is_finite() || s.abs() <= 1e-13 * scale {
                return Err(Error::SingularSystem(format!(
                    "zero pivot at equation {i} of {n} (pivot {s:.3e})"
                )));
            }
            d[i] = s;
            let ii = self.idx(i, i);
            self.data[ii] = 1.0;
        }
        Ok(LdlFactor { band: self, d })
    }
}

#[derive(Debug, Clone)]
pub struct LdlFactor {
    band: BandMatrix,
    d: Vec<f64>,
}

impl LdlFactor {
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.band.n;
        let bw = self.band.bw;
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = x[i];
            for k in lo..i {
                s -= self.band.data[self.band.idx(i, k)] * x[k];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = x[i];
            for k in (i + 1)..=hi {
                s -= self.band.data[self.band.idx(k, i)] * x[k];
            }
            x[i] = s;
        }
        x
    }
}

/// Smallest eigenvalue of a symmetric band matrix.
///
/// Positive definite matrices use inverse iteration on the factor; otherwise
/// the value is bracketed by bisection on inertia counts of `A - σI`.
pub fn smallest_eigenvalue(a: &BandMatrix) -> Result<f64> {
    let n = a.size();
    if n == 0 {
        return Ok(f64::INFINITY);
    }
    match a.clone().factorize() {
        Ok(f) if f.negative_pivots() == 0 => Ok(inverse_iteration(a, &f)),
        Ok(_) => bisect_smallest(a),
        // Exactly singular: zero is an eigenvalue; check whether anything is below it.
        Err(_) => bisect_smallest(a),
    }
}

fn inverse_iteration(a: &BandMatrix, f: &LdlFactor) -> f64 {
    let n = a.size();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    normalize(&mut x);
    let mut lambda = rayleigh(a, &x);
    for _ in 0..500 {
        let mut y = f.solve(&x);
        normalize(&mut y);
        let next = rayleigh(a, &y);
        x = y;
        if (next - lambda).abs() <= 1e-14 * next.abs().max(1e-300) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda
}

fn bisect_smallest(a: &BandMatrix) -> Result<f64> {
    let count_below = |sigma: f64| -> Option<usize> {
        let mut m = a.clone();
        m.shift_diagonal(-sigma);
        m.factorize().ok().map(|f| f.negative_pivots())
    };
    let scale = a.max_abs_diagonal().max(1e-300);
    let mut lo = a.gershgorin_lower() - 1e-9 * scale;
    let mut hi = 1e-12 * scale;
    for _ in 0..200 {
        if hi - lo <= 1e-12 * scale {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match count_below(mid) {
            Some(0) => lo = mid,
            Some(_) => hi = mid,
            // σ hit an eigenvalue exactly
            None => return Ok(mid),
        }
    }
    Ok(0.5 * (lo + hi))
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        for v in x {
            *v /= n;
        }
    }
}

fn rayleigh(a: &BandMatrix, x: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let num: f64 = x.iter().zip(&ax).map(|(p, q)| p * q).sum();
    let den: f64 = x.iter().map(|v| v * v).sum();
    num / den
}
