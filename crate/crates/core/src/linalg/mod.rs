//! Sparse matrices, preconditioners, Krylov solvers and a fast
//! diagonalization solver for separable constant-coefficient operators.

mod krylov;
mod separable;
mod sparse;
mod stencil;

pub use krylov::{bicgstab, cg, gmres, KrylovStats, LinearOperator};
pub use separable::{laplacian_1d, SeparableSolver};
pub use stencil::cell_laplacian;
pub use sparse::{CsrMatrix, Identity, Ilu0, Jacobi, Preconditioner, TripletBuilder};
