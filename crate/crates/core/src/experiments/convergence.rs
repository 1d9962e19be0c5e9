use crate::error::{Error, Result};
use crate::grid::{FaceVectorField, Grid, ScalarField};

/// Discrete L2 and L-infinity norms of a set of values with weight `w` each.
fn norms(diffs: impl Iterator<Item = f64>, w: f64) -> (f64, f64) {
    let (mut s, mut m) = (0.0, 0.0f64);
    for d in diffs {
        s += d * d * w;
        m = m.max(d.abs());
    }
    (s.sqrt(), m)
}

fn check_refinement(coarse: &Grid, fine: &Grid) -> Result<()> {
    let ok = fine.nx == 2 * coarse.nx
        && (fine.ny == 2 * coarse.ny || (coarse.ny == 1 && fine.ny == 1))
        && coarse.x_min == fine.x_min
        && coarse.x_max == fine.x_max
        && coarse.y_min == fine.y_min
        && coarse.y_max == fine.y_max;
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "grid {}x{} is not the 2x refinement of {}x{}",
            fine.nx, fine.ny, coarse.nx, coarse.ny
        )))
    }
}

/// Average of the fine cells covering each coarse cell.
pub fn restrict_cells(fine: &ScalarField, coarse: &Grid) -> Result<ScalarField> {
    check_refinement(coarse, &fine.grid)?;
    let one_d = coarse.ny == 1 && fine.grid.ny == 1;
    Ok(ScalarField::from_vec(
        *coarse,
        (0..coarse.ny)
            .flat_map(|j| (0..coarse.nx).map(move |i| (i, j)))
            .map(|(i, j)| {
                if one_d {
                    0.5 * (fine.get(2 * i, 0) + fine.get(2 * i + 1, 0))
                } else {
                    0.25 * (fine.get(2 * i, 2 * j)
                        + fine.get(2 * i + 1, 2 * j)
                        + fine.get(2 * i, 2 * j + 1)
                        + fine.get(2 * i + 1, 2 * j + 1))
                }
            })
            .collect(),
    ))
}

/// Cauchy difference of cell-centered fields: `(L2, Linf)` of
/// `coarse - restrict(fine)`.
pub fn cauchy_error(coarse: &ScalarField, fine: &ScalarField) -> Result<(f64, f64)> {
    let r = restrict_cells(fine, &coarse.grid)?;
    Ok(norms(
        coarse.data.iter().zip(&r.data).map(|(a, b)| a - b),
        coarse.grid.cell_area(),
    ))
}

/// Cauchy difference of face velocities; each coarse face is compared with
/// the mean of the two fine faces lying on it. Returns `(u, v)` errors.
pub fn cauchy_error_velocity(
    coarse: &FaceVectorField,
    fine: &FaceVectorField,
) -> Result<((f64, f64), (f64, f64))> {
    let (cg, fg) = (coarse.grid, fine.grid);
    check_refinement(&cg, &fg)?;
    let w = cg.cell_area();
    let eu = norms(
        (0..cg.ny).flat_map(|j| (0..=cg.nx).map(move |i| (i, j))).map(|(i, j)| {
            let f = if cg.is_1d() {
                fine.u_at(2 * i, 0)
            } else {
                0.5 * (fine.u_at(2 * i, 2 * j) + fine.u_at(2 * i, 2 * j + 1))
            };
            coarse.u_at(i, j) - f
        }),
        w,
    );
    if cg.is_1d() {
        return Ok((eu, (0.0, 0.0)));
    }
    let ev = norms(
        (0..=cg.ny).flat_map(|j| (0..cg.nx).map(move |i| (i, j))).map(|(i, j)| {
            let f = 0.5 * (fine.v_at(2 * i, 2 * j) + fine.v_at(2 * i + 1, 2 * j));
            coarse.v_at(i, j) - f
        }),
        w,
    );
    Ok((eu, ev))
}

/// One row of a rate table: error between grids `n` and `2n`, and the
/// observed rate against the previous row.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub n: usize,
    pub h: f64,
    pub l2: f64,
    pub linf: f64,
    pub rate_l2: Option<f64>,
    pub rate_linf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    /// Variable name and its rows, coarsest first.
    pub variables: Vec<(String, Vec<RateRow>)>,
}

impl RateTable {
    pub fn rows(&self, var: &str) -> Option<&[RateRow]> {
        self.variables.iter().find(|(n, _)| n == var).map(|(_, r)| r.as_slice())
    }

    /// All observed L2 rates.
    pub fn l2_rates(&self) -> impl Iterator<Item = (&str, f64)> {
        self.variables
            .iter()
            .flat_map(|(n, rows)| rows.iter().filter_map(move |r| r.rate_l2.map(|x| (n.as_str(), x))))
    }
}

impl std::fmt::Display for RateTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (name, rows) in &self.variables {
            writeln!(f, "{name}:")?;
            writeln!(f, "  {:>6} {:>12} {:>6} {:>12} {:>6}", "grid", "L2", "rate", "Linf", "rate")?;
            for r in rows {
                let fmt_rate = |x: Option<f64>| x.map_or("--".to_string(), |v| format!("{v:.2}"));
                writeln!(
                    f,
                    "  {:>6} {:>12.3e} {:>6} {:>12.3e} {:>6}",
                    r.n,
                    r.l2,
                    fmt_rate(r.rate_l2),
                    r.linf,
                    fmt_rate(r.rate_linf)
                )?;
            }
        }
        Ok(())
    }
}

/// `rate_k = log2(e_{k-1} / e_k)` for spacings halving between entries.
pub fn convergence_rates(errors: &[(f64, f64)]) -> Result<Vec<f64>> {
    for w in errors.windows(2) {
        let (h0, h1) = (w[0].0, w[1].0);
        if (h0 / h1 - 2.0).abs() > 1e-9 {
            return Err(Error::Config(format!("spacings must halve: {h0} -> {h1}")));
        }
    }
    if let Some(&(_, e)) = errors.iter().find(|(_, e)| !(*e > 0.0)) {
        return Err(Error::Config(format!("errors must be positive, got {e}")));
    }
    Ok(errors.windows(2).map(|w| (w[0].1 / w[1].1).log2()).collect())
}

/// Builds the rows for one variable from `(n, l2, linf)` triples.
pub fn rate_rows(errs: &[(usize, f64, f64, f64)]) -> Result<Vec<RateRow>> {
    let l2 = convergence_rates(&errs.iter().map(|e| (e.1, e.2)).collect::<Vec<_>>())?;
    let li = convergence_rates(&errs.iter().map(|e| (e.1, e.3)).collect::<Vec<_>>())?;
    Ok(errs
        .iter()
        .enumerate()
        .map(|(k, &(n, h, a, b))| RateRow {
            n,
            h,
            l2: a,
            linf: b,
            rate_l2: (k > 0).then(|| l2[k - 1]),
            rate_linf: (k > 0).then(|| li[k - 1]),
        })
        .collect())
}
