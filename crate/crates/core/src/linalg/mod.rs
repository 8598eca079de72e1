//! Direct solvers for the banded and saddle-point systems of the schemes.
//!
//! Every operator is turned into a list of entries tagged with the mesh node
//! each unknown sits on. Unknowns are ordered by node (interleaving the
//! blocks of a saddle system) so the bandwidth stays `O(r)`; for periodic
//! operators the node chain is first folded from both ends
//! (`0, n−1, 1, n−2, …`) which turns the cyclic band into an ordinary band
//! of roughly twice the width. Factorizations are computed once and reused.

mod band_lu;
mod cholesky;

use band_lu::BandLu;
use cholesky::BandCholesky;

use crate::fem::{assemble_coupling, assemble_mass, BandedMatrix, FemSpace};
use crate::{Error, Result};

/// Square system as tagged entries, ready to be ordered and factored.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    /// `(node position, block)` of each unknown.
    keys: Vec<(usize, usize)>,
    cyclic: Option<usize>,
    entries: Vec<(usize, usize, f64)>,
    symmetric: bool,
}

impl SparseSystem {
    pub fn dim(&self) -> usize {
        self.keys.len()
    }

    /// Row-major order of unknowns used by the factorization: `perm[new] = old`.
    fn ordering(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.keys.len()).collect();
        let pos = |node: usize| match self.cyclic {
            Some(n) if 2 * node < n => 2 * node,
            Some(n) => 2 * (n - 1 - node) + 1,
            None => node,
        };
        perm.sort_by_key(|&u| {
            let (node, block) = self.keys[u];
            (pos(node), block)
        });
        perm
    }
}

/// Anything that can be handed to [`factor`].
pub trait Factorable {
    fn system(&self) -> SparseSystem;
}

impl Factorable for BandedMatrix {
    fn system(&self) -> SparseSystem {
        assert_eq!(self.nrows(), self.ncols(), "only square matrices can be factored");
        let mut entries = Vec::new();
        self.for_each_entry(|i, j, v| entries.push((i, j, v)));
        SparseSystem {
            keys: (0..self.nrows()).map(|i| (self.row_node(i), 0)).collect(),
            cyclic: self.cycle_len(),
            entries,
            symmetric: self.is_symmetric(0.0),
        }
    }
}

/// 2×2 block operator `[[A11, A12], [A21, A22]]` over two Lagrange spaces.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub a11: BandedMatrix,
    pub a12: BandedMatrix,
    pub a21: BandedMatrix,
    pub a22: BandedMatrix,
}

impl BlockOperator {
    pub fn new(a11: BandedMatrix, a12: BandedMatrix, a21: BandedMatrix, a22: BandedMatrix) -> Result<Self> {
        let (n1, n2) = (a11.nrows(), a22.nrows());
        let shapes_ok = a11.ncols() == n1
            && a22.ncols() == n2
            && a12.nrows() == n1
            && a12.ncols() == n2
            && a21.nrows() == n2
            && a21.ncols() == n1;
        if !shapes_ok {
            return Err(Error::config("block operator shapes do not match"));
        }
        Ok(Self { a11, a12, a21, a22 })
    }

    pub fn n1(&self) -> usize {
        self.a11.nrows()
    }

    pub fn n2(&self) -> usize {
        self.a22.nrows()
    }

    pub fn dim(&self) -> usize {
        self.n1() + self.n2()
    }

    /// `y = K x` for the stacked vector `x = (x1, x2)`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n1 = self.n1();
        let (x1, x2) = x.split_at(n1);
        let mut y = self.a11.matvec(x1);
        let t = self.a12.matvec(x2);
        y.iter_mut().zip(&t).for_each(|(a, b)| *a += b);
        let mut y2 = self.a21.matvec(x1);
        let t = self.a22.matvec(x2);
        y2.iter_mut().zip(&t).for_each(|(a, b)| *a += b);
        y.extend(y2);
        y
    }
}

impl Factorable for BlockOperator {
    fn system(&self) -> SparseSystem {
        let n1 = self.n1();
        let mut keys: Vec<(usize, usize)> = (0..n1).map(|i| (self.a11.row_node(i), 0)).collect();
        keys.extend((0..self.n2()).map(|i| (self.a22.row_node(i), 1)));
        let mut entries = Vec::new();
        self.a11.for_each_entry(|i, j, v| entries.push((i, j, v)));
        self.a12.for_each_entry(|i, j, v| entries.push((i, n1 + j, v)));
        self.a21.for_each_entry(|i, j, v| entries.push((n1 + i, j, v)));
        self.a22.for_each_entry(|i, j, v| entries.push((n1 + i, n1 + j, v)));
        SparseSystem {
            keys,
            cyclic: self.a11.cycle_len(),
            entries,
            symmetric: false,
        }
    }
}

/// The mixed-formulation block `[[M_α, G/6], [Gᵀ/6, −M_β/6]]`, where the
/// first unknown lives in space α, the auxiliary (projected derivative) in
/// space β, and `G[i][j] = (χ_i′, ψ_j)`.
#[derive(Debug, Clone)]
pub struct SaddleOperator {
    block: BlockOperator,
}

impl SaddleOperator {
    pub fn new(alpha: &FemSpace, beta: &FemSpace) -> Result<Self> {
        let m_alpha = assemble_mass(alpha);
        let m_beta = assemble_mass(beta);
        let g = assemble_coupling(alpha, beta)?;
        let gt = g.transpose();
        let block = BlockOperator::new(
            m_alpha,
            g.scaled(1.0 / 6.0),
            gt.scaled(1.0 / 6.0),
            m_beta.scaled(-1.0 / 6.0),
        )?;
        Ok(Self { block })
    }

    pub fn block(&self) -> &BlockOperator {
        &self.block
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.block.apply(x)
    }
}

impl Factorable for SaddleOperator {
    fn system(&self) -> SparseSystem {
        self.block.system()
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Cholesky(BandCholesky),
    Lu(BandLu),
}

/// Reusable factorization of a square operator.
#[derive(Debug, Clone)]
pub struct FactoredOperator {
    perm: Vec<usize>,
    kind: Kind,
}

/// Factors `op`: band Cholesky when the operator is symmetric positive
/// definite, band LU with partial pivoting otherwise.
pub fn factor(op: &impl Factorable) -> Result<FactoredOperator> {
    FactoredOperator::new(&op.system())
}

impl FactoredOperator {
    pub fn new(sys: &SparseSystem) -> Result<Self> {
        let n = sys.dim();
        if n == 0 {
            return Err(Error::config("cannot factor an empty system"));
        }
        let perm = sys.ordering();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut kl = 0;
        let mut ku = 0;
        let entries: Vec<(usize, usize, f64)> = sys
            .entries
            .iter()
            .map(|&(i, j, v)| {
                let (pi, pj) = (inv[i], inv[j]);
                if pi > pj {
                    kl = kl.max(pi - pj);
                } else {
                    ku = ku.max(pj - pi);
                }
                (pi, pj, v)
            })
            .collect();
        if sys.symmetric {
            if let Ok(c) = BandCholesky::factor(n, kl.max(ku), &entries) {
                return Ok(Self {
                    perm,
                    kind: Kind::Cholesky(c),
                });
            }
        }
        let lu = BandLu::factor(n, kl, ku, &entries).map_err(|e| match e {
            Error::SingularPivot { index } => Error::SingularPivot { index: perm[index] },
            other => other,
        })?;
        Ok(Self {
            perm,
            kind: Kind::Lu(lu),
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Whether the symmetric positive definite path was taken.
    pub fn is_cholesky(&self) -> bool {
        matches!(self.kind, Kind::Cholesky(_))
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.dim()];
        self.solve_into(rhs, &mut x)?;
        Ok(x)
    }

    pub fn solve_into(&self, rhs: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.dim();
        if rhs.len() != n || out.len() != n {
            return Err(Error::usage(format!(
                "solve: expected vectors of length {n}, got rhs {} and out {}",
                rhs.len(),
                out.len()
            )));
        }
        let mut b: Vec<f64> = self.perm.iter().map(|&old| rhs[old]).collect();
        match &self.kind {
            Kind::Cholesky(c) => c.solve_in_place(&mut b),
            Kind::Lu(lu) => lu.solve_in_place(&mut b),
        }
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = b[new];
        }
        Ok(())
    }
}

/// Solves with a fresh factorization; convenient for one-off systems.
pub fn solve(op: &impl Factorable, rhs: &[f64]) -> Result<Vec<f64>> {
    factor(op)?.solve(rhs)
}
