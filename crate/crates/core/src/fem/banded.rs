use super::space::FemSpace;

/// Band matrix between two Lagrange spaces on the same mesh.
///
/// Row `i` and column `j` are tied to global node positions; entry `(i, j)`
/// is stored in the slot for the node offset `node(j) − node(i)`, which is
/// bounded by the element degree. For periodic spaces the offset is taken
/// cyclically, so the corner blocks are stored like any other band entry.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    nrows: usize,
    ncols: usize,
    half_bw: usize,
    row_offset: usize,
    col_offset: usize,
    cyclic: Option<usize>,
    data: Vec<f64>,
}

impl BandedMatrix {
    /// Zero matrix with rows indexed by `rows` DOFs and columns by `cols` DOFs.
    pub fn zeros(rows: &FemSpace, cols: &FemSpace) -> Self {
        let half_bw = rows.degree().max(cols.degree());
        let cyclic = (rows.is_periodic() && cols.is_periodic()).then(|| rows.dof_count());
        Self {
            nrows: rows.dof_count(),
            ncols: cols.dof_count(),
            half_bw,
            row_offset: rows.node_of_dof(0),
            col_offset: cols.node_of_dof(0),
            cyclic,
            data: vec![0.0; rows.dof_count() * (2 * half_bw + 1)],
        }
    }

    /// Square matrix from explicit entries, on a plain (non-periodic) band.
    /// Mostly useful for tests of the solvers.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut hb = 0;
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    hb = hb.max(i.abs_diff(j));
                }
            }
        }
        let mut m = Self {
            nrows: n,
            ncols: n,
            half_bw: hb,
            row_offset: 0,
            col_offset: 0,
            cyclic: None,
            data: vec![0.0; n * (2 * hb + 1)],
        };
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    m.add(i, j, v);
                }
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bw
    }

    /// True when the cyclic corner entries are present.
    pub fn periodic_wrap(&self) -> bool {
        self.cyclic.is_some()
    }

    /// Node position of row `i`.
    pub fn row_node(&self, i: usize) -> usize {
        i + self.row_offset
    }

    /// Node position of column `j`.
    pub fn col_node(&self, j: usize) -> usize {
        j + self.col_offset
    }

    /// Number of nodes around the cycle, for periodic matrices.
    pub fn cycle_len(&self) -> Option<usize> {
        self.cyclic
    }

    #[inline]
    fn width(&self) -> usize {
        2 * self.half_bw + 1
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let d = (j + self.col_offset) as isize - (i + self.row_offset) as isize;
        let hb = self.half_bw as isize;
        let off = match self.cyclic {
            Some(n) => {
                let m = d.rem_euclid(n as isize);
                if m <= hb {
                    m
                } else if m - n as isize >= -hb {
                    m - n as isize
                } else {
                    return None;
                }
            }
            None if d.abs() <= hb => d,
            None => return None,
        };
        Some(i * self.width() + (off + hb) as usize)
    }

    #[inline]
    fn slot_column(&self, i: usize, s: usize) -> Option<usize> {
        let node = (i + self.row_offset) as isize + s as isize - self.half_bw as isize;
        let node = match self.cyclic {
            Some(n) => node.rem_euclid(n as isize),
            None => node,
        };
        let j = node - self.col_offset as isize;
        (j >= 0 && (j as usize) < self.ncols).then_some(j as usize)
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside the band"));
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Visits every stored entry as `(row, col, value)`.
    pub fn for_each_entry(&self, mut f: impl FnMut(usize, usize, f64)) {
        let w = self.width();
        for i in 0..self.nrows {
            for s in 0..w {
                let v = self.data[i * w + s];
                if v != 0.0 {
                    if let Some(j) = self.slot_column(i, s) {
                        f(i, j, v);
                    }
                }
            }
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        let w = self.width();
        let hb = self.half_bw as isize;
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * w..(i + 1) * w];
            let base = (i + self.row_offset) as isize - hb - self.col_offset as isize;
            let mut acc = 0.0;
            match self.cyclic {
                None => {
                    for (s, &v) in row.iter().enumerate() {
                        let j = base + s as isize;
                        if v != 0.0 && j >= 0 && (j as usize) < self.ncols {
                            acc += v * x[j as usize];
                        }
                    }
                }
                Some(n) => {
                    for (s, &v) in row.iter().enumerate() {
                        if v != 0.0 {
                            let j = (base + s as isize).rem_euclid(n as isize) as usize;
                            acc += v * x[j];
                        }
                    }
                }
            }
            *yi = acc;
        }
    }

    /// `Aᵀ`, on the swapped pair of spaces.
    pub fn transpose(&self) -> Self {
        let mut t = Self {
            nrows: self.ncols,
            ncols: self.nrows,
            half_bw: self.half_bw,
            row_offset: self.col_offset,
            col_offset: self.row_offset,
            cyclic: self.cyclic,
            data: vec![0.0; self.ncols * self.width()],
        };
        self.for_each_entry(|i, j, v| t.add(j, i, v));
        t
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// `self + s·other`; both must share the same row/column spaces.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Self {
        assert!(
            self.nrows == other.nrows
                && self.ncols == other.ncols
                && self.half_bw == other.half_bw
                && self.row_offset == other.row_offset
                && self.col_offset == other.col_offset
                && self.cyclic == other.cyclic,
            "band structures differ"
        );
        let mut m = self.clone();
        m.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += s * b);
        m
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let mut ok = true;
        self.for_each_entry(|i, j, v| {
            if (v - self.get(j, i)).abs() > tol {
                ok = false;
            }
        });
        ok
    }

    /// Dense copy, for small test problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        self.for_each_entry(|i, j, v| d[i][j] += v);
        d
    }
}
