use super::sparse::{CsrMatrix, TripletBuilder};
use crate::grid::{Bc, Grid, SideBcs};

/// Matrix of the homogeneous five-point cell Laplacian; `A x` equals
/// `laplacian` with all Dirichlet data set to zero.
pub fn cell_laplacian(grid: &Grid, bc: &SideBcs) -> CsrMatrix {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut b = TripletBuilder::new(nx * ny);
    let sx = 1.0 / (grid.hx * grid.hx);
    let sy = 1.0 / (grid.hy * grid.hy);
    let couple = |b: &mut TripletBuilder, row: usize, nb: Option<usize>, side: Bc, s: f64| match nb {
        Some(col) => {
            b.add(row, col, s);
            b.add(row, row, -s);
        }
        None => match side {
            Bc::Dirichlet(_) => b.add(row, row, -2.0 * s),
            _ => b.add(row, row, 0.0),
        },
    };
    for j in 0..ny {
        for i in 0..nx {
            let row = j * nx + i;
            let west = if i > 0 {
                Some(row - 1)
            } else if bc.left.is_periodic() {
                Some(j * nx + nx - 1)
            } else {
                None
            };
            let east = if i + 1 < nx {
                Some(row + 1)
            } else if bc.right.is_periodic() {
                Some(j * nx)
            } else {
                None
            };
            couple(&mut b, row, west, bc.left, sx);
            couple(&mut b, row, east, bc.right, sx);
            if ny > 1 {
                let south = if j > 0 {
                    Some(row - nx)
                } else if bc.bottom.is_periodic() {
                    Some((ny - 1) * nx + i)
                } else {
                    None
                };
                let north = if j + 1 < ny {
                    Some(row + nx)
                } else if bc.top.is_periodic() {
                    Some(i)
                } else {
                    None
                };
                couple(&mut b, row, south, bc.bottom, sy);
                couple(&mut b, row, north, bc.top, sy);
            }
        }
    }
    b.build()
}
