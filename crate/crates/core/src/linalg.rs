//! Linear solvers shared by the exact chain and the electrical network.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("matrix is singular")]
    Singular,
    #[error("iterative solve stopped after {iterations} iterations with residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Blocks up to this size use dense LU; larger ones Gauss-Seidel.
    pub dense_limit: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dense_limit: 5_000,
            tolerance: 1e-10,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Dense,
    Iterative,
    /// Dense for some blocks, iterative for others.
    Mixed,
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve_dense(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>, SolveError> {
    let x = a.lu().solve(&b).ok_or(SolveError::Singular)?;
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(SolveError::Singular)
    }
}

/// Expected steps to absorption, `h = 1 + Q h`.
///
/// `rows[s]` lists `(s', prob)` for transient targets only. `blocks` must
/// partition the transient states and be ordered so that every transition
/// leaving a block lands in an earlier block.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionSolution {
    pub values: Vec<f64>,
    /// Largest `|h_s - 1 - sum_s' Q(s, s') h_s'|` over transient states.
    pub residual: f64,
    pub method: SolveMethod,
}

pub fn solve_absorption(
    rows: &[Vec<(usize, f64)>],
    blocks: &[Vec<usize>],
    opts: &SolverOptions,
) -> Result<AbsorptionSolution, SolveError> {
    let t = rows.len();
    let mut h = vec![f64::NAN; t];
    let mut solved = vec![false; t];
    let mut local = vec![usize::MAX; t];
    let (mut used_dense, mut used_iter) = (false, false);

    for block in blocks {
        for (i, &s) in block.iter().enumerate() {
            local[s] = i;
        }
        let size = block.len();
        let mut rhs = vec![1.0; size];
        // In-block part of each row, as (local column, prob).
        let mut inner: Vec<Vec<(usize, f64)>> = vec![Vec::new(); size];
        for (i, &s) in block.iter().enumerate() {
            for &(c, prob) in &rows[s] {
                if solved[c] {
                    rhs[i] += prob * h[c];
                } else {
                    debug_assert!(local[c] != usize::MAX, "transition into an unsolved later block");
                    inner[i].push((local[c], prob));
                }
            }
        }

        let x = if size <= opts.dense_limit {
            used_dense = true;
            let mut a = DMatrix::<f64>::identity(size, size);
            for (i, row) in inner.iter().enumerate() {
                for &(j, prob) in row {
                    a[(i, j)] -= prob;
                }
            }
            solve_dense(a, DVector::from_vec(rhs))?.iter().copied().collect::<Vec<f64>>()
        } else {
            used_iter = true;
            gauss_seidel(&inner, &rhs, opts)?
        };

        for (i, &s) in block.iter().enumerate() {
            h[s] = x[i];
            solved[s] = true;
            local[s] = usize::MAX;
        }
    }
    assert!(solved.iter().all(|&s| s), "blocks must cover every transient state");

    let residual = rows
        .iter()
        .enumerate()
        .map(|(s, row)| {
            let rhs: f64 = 1.0 + row.iter().map(|&(c, prob)| prob * h[c]).sum::<f64>();
            (h[s] - rhs).abs()
        })
        .fold(0.0, f64::max);

    let method = match (used_dense, used_iter) {
        (_, false) => SolveMethod::Dense,
        (false, true) => SolveMethod::Iterative,
        (true, true) => SolveMethod::Mixed,
    };
    Ok(AbsorptionSolution {
        values: h,
        residual,
        method,
    })
}

/// Gauss-Seidel for `(I - Q) x = b` on a substochastic `Q`.
fn gauss_seidel(q: &[Vec<(usize, f64)>], b: &[f64], opts: &SolverOptions) -> Result<Vec<f64>, SolveError> {
    let n = b.len();
    let mut x = b.to_vec();
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        for i in 0..n {
            let mut diag = 1.0;
            let mut acc = b[i];
            for &(j, prob) in &q[i] {
                if j == i {
                    diag -= prob;
                } else {
                    acc += prob * x[j];
                }
            }
            if diag <= 0.0 {
                return Err(SolveError::Singular);
            }
            x[i] = acc / diag;
        }
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        residual = (0..n)
            .map(|i| {
                let qx: f64 = q[i].iter().map(|&(j, prob)| prob * x[j]).sum();
                (x[i] - qx - b[i]).abs()
            })
            .fold(0.0, f64::max);
        if residual <= opts.tolerance * scale {
            return Ok(x);
        }
    }
    Err(SolveError::NotConverged {
        iterations: opts.max_iterations,
        residual,
    })
}
