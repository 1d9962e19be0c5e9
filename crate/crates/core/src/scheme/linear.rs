use crate::error::{Error, Result};
use crate::linalg::{bicgstab, cg, CsrMatrix, Ilu0, Jacobi};

use super::SolverConfig;

/// What the unknowns of a [`LinearSystem`] represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownLayout {
    Cells { nx: usize, ny: usize },
    Faces { n: usize },
    Blocks { blocks: usize, per_block: usize },
    Plain { n: usize },
}

impl UnknownLayout {
    pub fn len(&self) -> usize {
        match *self {
            UnknownLayout::Cells { nx, ny } => nx * ny,
            UnknownLayout::Faces { n } | UnknownLayout::Plain { n } => n,
            UnknownLayout::Blocks { blocks, per_block } => blocks * per_block,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub layout: UnknownLayout,
    pub symmetric: bool,
    /// The operator annihilates constants; the solution is taken mean-free.
    pub constant_nullspace: bool,
}

/// Symmetric systems use Jacobi-preconditioned conjugate gradients (on
/// `-A` when `A` is negative definite); others use BiCGSTAB with ILU(0).
pub fn solve_linear(sys: &LinearSystem, cfg: &SolverConfig) -> Result<Vec<f64>> {
    let n = sys.matrix.n;
    if sys.rhs.len() != n || sys.layout.len() != n {
        return Err(Error::Config(format!(
            "linear system dimensions disagree: matrix {n}, rhs {}, layout {}",
            sys.rhs.len(),
            sys.layout.len()
        )));
    }
    let mut x = vec![0.0; n];
    if sys.symmetric {
        let negative = sys.matrix.diagonal().iter().sum::<f64>() < 0.0;
        let (a, b) = if negative {
            let mut a = sys.matrix.clone();
            a.vals.iter_mut().for_each(|v| *v = -*v);
            (a, sys.rhs.iter().map(|v| -v).collect::<Vec<_>>())
        } else {
            (sys.matrix.clone(), sys.rhs.clone())
        };
        cg(&a, &Jacobi::new(&a), &b, &mut x, cfg.lin_tol, cfg.lin_max_iters, sys.constant_nullspace)?;
    } else {
        let ilu = Ilu0::new(&sys.matrix)?;
        bicgstab(&sys.matrix, &ilu, &sys.rhs, &mut x, cfg.lin_tol, cfg.lin_max_iters)?;
        if sys.constant_nullspace {
            let m = x.iter().sum::<f64>() / n as f64;
            x.iter_mut().for_each(|v| *v -= m);
        }
    }
    Ok(x)
}
