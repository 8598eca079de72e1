//! Band LU with partial pivoting, in the LAPACK `gbtrf` storage layout.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    /// Factors the `n × n` matrix given by `entries` (duplicates are summed)
    /// with lower/upper bandwidths `kl`/`ku`.
    pub(crate) fn factor(n: usize, kl: usize, ku: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let ldab = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            ldab,
            ab: vec![0.0; ldab * n],
            ipiv: vec![0; n],
        };
        let mut scale: f64 = 0.0;
        for &(i, j, v) in entries {
            let k = lu.idx(i, j);
            lu.ab[k] += v;
        }
        for &v in &lu.ab {
            scale = scale.max(v.abs());
        }
        let tol = scale * f64::EPSILON * n.max(1) as f64 * 1e-3;
        lu.decompose(tol)?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let kv = self.kl + self.ku;
        debug_assert!(i + kv >= j && i <= j + self.kl, "({i}, {j}) outside band");
        j * self.ldab + (kv + i - j)
    }

    fn decompose(&mut self, tol: f64) -> Result<()> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0;
            let mut best = self.ab[self.idx(j, j)].abs();
            for i in 1..=km {
                let v = self.ab[self.idx(j + i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            self.ipiv[j] = j + p;
            if !(best > tol) {
                return Err(Error::SingularPivot { index: j });
            }
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    let a = self.idx(j, c);
                    let b = self.idx(j + p, c);
                    self.ab.swap(a, b);
                }
            }
            if km > 0 {
                let piv = self.ab[self.idx(j, j)];
                for i in 1..=km {
                    let k = self.idx(j + i, j);
                    self.ab[k] /= piv;
                }
                for c in j + 1..=ju {
                    let y = self.ab[self.idx(j, c)];
                    if y == 0.0 {
                        continue;
                    }
                    for i in 1..=km {
                        let l = self.ab[self.idx(j + i, j)];
                        let k = self.idx(j + i, c);
                        self.ab[k] -= l * y;
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let kv = self.kl + self.ku;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(p, j);
            }
            let bj = b[j];
            if bj != 0.0 {
                for i in 1..=self.kl.min(n - 1 - j) {
                    b[j + i] -= self.ab[self.idx(j + i, j)] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[self.idx(j, j)];
            let bj = b[j];
            if bj != 0.0 {
                for i in j.saturating_sub(kv)..j {
                    b[i] -= self.ab[self.idx(i, j)] * bj;
                }
            }
        }
    }
}
