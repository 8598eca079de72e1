use crate::{Error, Result};

/// Band Cholesky factor `A = L Lᵀ`, `L` stored row-wise over its band.
#[derive(Debug, Clone)]
pub(crate) struct BandCholesky {
    n: usize,
    p: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    /// Factors the symmetric matrix with half-bandwidth `p`; only entries
    /// with `j <= i` are read.
    pub(crate) fn factor(n: usize, p: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let w = p + 1;
        let mut l = vec![0.0; n * w];
        for &(i, j, v) in entries {
            if j <= i {
                l[i * w + (j + p - i)] += v;
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(p);
            for j in lo..=i {
                let mut s = l[i * w + (j + p - i)];
                for k in lo.max(j.saturating_sub(p))..j {
                    s -= l[i * w + (k + p - i)] * l[j * w + (k + p - j)];
                }
                if i == j {
                    let a = l[i * w + p];
                    if !(s > 1e-13 * a.abs()) || !s.is_finite() {
                        return Err(Error::SingularPivot { index: i });
                    }
                    l[i * w + p] = s.sqrt();
                } else {
                    l[i * w + (j + p - i)] = s / l[j * w + p];
                }
            }
        }
        Ok(Self { n, p, l })
    }

    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let (n, p) = (self.n, self.p);
        let w = p + 1;
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(p)..i {
                s -= self.l[i * w + (k + p - i)] * b[k];
            }
            b[i] = s / self.l[i * w + p];
        }
        for i in (0..n).rev() {
            let bi = b[i] / self.l[i * w + p];
            b[i] = bi;
            for k in i.saturating_sub(p)..i {
                b[k] -= self.l[i * w + (k + p - i)] * bi;
            }
        }
    }
}
