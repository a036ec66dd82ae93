//! Fixed-pattern sparse matrices with precomputed element scatter maps, and
//! a reusable Cholesky factorisation.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::{CholeskyError, CscCholesky};
use nalgebra_sparse::pattern::SparsityPattern;
use nalgebra_sparse::CscMatrix;

/// Marks a local entry that maps to a constrained unknown.
pub const SKIP: usize = usize::MAX;

/// Square CSC pattern of a symmetric block and, per element, the value slot
/// of every local `(row, column)` pair.
#[derive(Debug, Clone)]
pub struct BlockPattern {
    pub pattern: SparsityPattern,
    /// Row-major local `n_local × n_local` slots per element.
    pub scatter: Vec<Vec<usize>>,
}

impl BlockPattern {
    /// Builds the pattern from the global row of every local unknown
    /// (`None` for eliminated unknowns).
    pub fn new(n: usize, element_rows: &[Vec<Option<usize>>]) -> Self {
        let mut columns: Vec<Vec<usize>> = vec![Vec::new(); n];
        for rows in element_rows {
            for &c in rows.iter().flatten() {
                columns[c].extend(rows.iter().flatten());
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        offsets.push(0);
        for col in &mut columns {
            col.sort_unstable();
            col.dedup();
            indices.extend_from_slice(col);
            offsets.push(indices.len());
        }
        let pattern = SparsityPattern::try_from_offsets_and_indices(n, n, offsets, indices)
            .expect("sorted unique indices form a valid pattern");
        let scatter = element_rows
            .iter()
            .map(|rows| {
                let mut slots = Vec::with_capacity(rows.len() * rows.len());
                for r in rows {
                    for c in rows {
                        slots.push(match (r, c) {
                            (Some(r), Some(c)) => {
                                let lane = pattern.lane(*c);
                                pattern.major_offsets()[*c] + lane.binary_search(r).expect("entry in pattern")
                            }
                            _ => SKIP,
                        });
                    }
                }
                slots
            })
            .collect();
        Self { pattern, scatter }
    }

    pub fn nnz(&self) -> usize {
        self.pattern.nnz()
    }

    pub fn dim(&self) -> usize {
        self.pattern.major_dim()
    }

    pub fn zero_values(&self) -> Vec<f64> {
        vec![0.0; self.nnz()]
    }

    /// Adds a row-major element matrix into `values`.
    pub fn scatter_add(&self, element: usize, local: &[f64], values: &mut [f64]) {
        for (&slot, &v) in self.scatter[element].iter().zip(local) {
            if slot != SKIP {
                values[slot] += v;
            }
        }
    }

    pub fn to_matrix(&self, values: Vec<f64>) -> CscMatrix<f64> {
        CscMatrix::try_from_pattern_and_values(self.pattern.clone(), values).expect("values match pattern")
    }
}

/// `y = A x` for a CSC matrix.
pub fn mul_vec(a: &CscMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    for (c, col) in a.col_iter().enumerate() {
        let xc = x[c];
        for (&r, &v) in col.row_indices().iter().zip(col.values()) {
            y[r] += v * xc;
        }
    }
    y
}

/// Cholesky factorisation that keeps its symbolic analysis across
/// refactorisations of matrices with the same pattern.
pub struct Factor {
    chol: Option<CscCholesky<f64>>,
    dim: usize,
}

impl Factor {
    pub fn new(a: &CscMatrix<f64>) -> Result<Self, CholeskyError> {
        if a.nrows() == 0 {
            return Ok(Self { chol: None, dim: 0 });
        }
        Ok(Self {
            chol: Some(CscCholesky::factor(a)?),
            dim: a.nrows(),
        })
    }

    pub fn refactor(&mut self, a: &CscMatrix<f64>) -> Result<(), CholeskyError> {
        match &mut self.chol {
            Some(c) => c.refactor(a.values()),
            None => Ok(()),
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.chol {
            Some(c) => {
                let rhs = DMatrix::from_column_slice(self.dim, 1, b);
                c.solve(&rhs).as_slice().to_vec()
            }
            None => Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl std::fmt::Debug for Factor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Factor {{ dim: {} }}", self.dim)
    }
}

pub fn to_dense(a: &CscMatrix<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.nrows(), a.ncols());
    for (r, c, v) in a.triplet_iter() {
        d[(r, c)] += *v;
    }
    d
}

pub fn norm(v: &[f64]) -> f64 {
    DVector::from_column_slice(v).norm()
}
