use std::fmt;

use crate::error::{Error, Result};

/// Boundary condition on one side of the domain.
///
/// For velocity, `Dirichlet(0.0)` is the no-slip wall and `MovingWall`
/// prescribes the tangential wall speed; the wall-normal component is always
/// zero on a non-periodic side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bc {
    Neumann,
    Dirichlet(f64),
    Periodic,
    MovingWall(f64),
}

impl Bc {
    pub fn is_periodic(&self) -> bool {
        matches!(self, Bc::Periodic)
    }

    /// Prescribed tangential wall velocity for a velocity side.
    pub fn wall_speed(&self) -> f64 {
        match *self {
            Bc::Dirichlet(v) | Bc::MovingWall(v) => v,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Bc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bc::Neumann => write!(f, "neumann"),
            Bc::Dirichlet(v) => write!(f, "dirichlet({v:e})"),
            Bc::Periodic => write!(f, "periodic"),
            Bc::MovingWall(v) => write!(f, "moving({v:e})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    Phi,
    Mu,
    C,
    Velocity,
    Pressure,
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variable::Phi => "phi",
            Variable::Mu => "mu",
            Variable::C => "c",
            Variable::Velocity => "velocity",
            Variable::Pressure => "pressure",
        };
        f.write_str(s)
    }
}

/// Boundary conditions on the four sides for one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideBcs {
    pub left: Bc,
    pub right: Bc,
    pub bottom: Bc,
    pub top: Bc,
}

impl SideBcs {
    pub const fn uniform(bc: Bc) -> Self {
        Self {
            left: bc,
            right: bc,
            bottom: bc,
            top: bc,
        }
    }

    pub const fn periodic() -> Self {
        Self::uniform(Bc::Periodic)
    }

    pub const fn neumann() -> Self {
        Self::uniform(Bc::Neumann)
    }

    /// Periodic in x, `bottom`/`top` in y.
    pub const fn periodic_x(bottom: Bc, top: Bc) -> Self {
        Self {
            left: Bc::Periodic,
            right: Bc::Periodic,
            bottom,
            top,
        }
    }

    /// `left`/`right` in x, homogeneous Neumann in y (used by 1D cases).
    pub const fn x_sides(left: Bc, right: Bc) -> Self {
        Self {
            left,
            right,
            bottom: Bc::Neumann,
            top: Bc::Neumann,
        }
    }

    pub fn periodic_in_x(&self) -> bool {
        self.left.is_periodic()
    }

    pub fn periodic_in_y(&self) -> bool {
        self.bottom.is_periodic()
    }

    pub fn sides(&self) -> [Bc; 4] {
        [self.left, self.right, self.bottom, self.top]
    }

    pub fn validate(&self, var: Variable) -> Result<()> {
        if self.left.is_periodic() != self.right.is_periodic()
            || self.bottom.is_periodic() != self.top.is_periodic()
        {
            return Err(Error::Config(format!(
                "{var}: periodic must be declared on both opposing sides"
            )));
        }
        for bc in self.sides() {
            let ok = match var {
                Variable::Phi | Variable::Mu | Variable::C => {
                    matches!(bc, Bc::Neumann | Bc::Dirichlet(_) | Bc::Periodic)
                }
                Variable::Pressure => matches!(bc, Bc::Neumann | Bc::Periodic),
                Variable::Velocity => match bc {
                    Bc::Dirichlet(v) => v == 0.0,
                    Bc::MovingWall(_) | Bc::Periodic => true,
                    Bc::Neumann => false,
                },
            };
            if !ok {
                return Err(Error::Config(format!("{var}: boundary condition {bc} is not admissible")));
            }
            if let Bc::Dirichlet(v) | Bc::MovingWall(v) = bc {
                if !v.is_finite() {
                    return Err(Error::Config(format!("{var}: non-finite boundary value")));
                }
            }
        }
        Ok(())
    }

    /// Same periodic/wall pattern in both directions as `other`.
    pub fn same_topology(&self, other: &SideBcs) -> bool {
        self.periodic_in_x() == other.periodic_in_x() && self.periodic_in_y() == other.periodic_in_y()
    }

    /// Same boundary kind (ignoring values) on every side.
    pub fn same_kinds(&self, other: &SideBcs) -> bool {
        self.sides()
            .iter()
            .zip(other.sides().iter())
            .all(|(a, b)| std::mem::discriminant(a) == std::mem::discriminant(b))
    }
}

/// Boundary conditions for every solution variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySpec {
    pub phi: SideBcs,
    pub mu: SideBcs,
    pub c: SideBcs,
    pub vel: SideBcs,
    pub p: SideBcs,
}

impl BoundarySpec {
    pub const fn all_periodic() -> Self {
        Self {
            phi: SideBcs::periodic(),
            mu: SideBcs::periodic(),
            c: SideBcs::periodic(),
            vel: SideBcs::periodic(),
            p: SideBcs::periodic(),
        }
    }

    /// Closed box: no-flux scalars, no-slip walls.
    pub const fn closed_box() -> Self {
        Self {
            phi: SideBcs::neumann(),
            mu: SideBcs::neumann(),
            c: SideBcs::neumann(),
            vel: SideBcs::uniform(Bc::Dirichlet(0.0)),
            p: SideBcs::neumann(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.phi.validate(Variable::Phi)?;
        self.mu.validate(Variable::Mu)?;
        self.c.validate(Variable::C)?;
        self.vel.validate(Variable::Velocity)?;
        self.p.validate(Variable::Pressure)?;
        let topo = [&self.phi, &self.mu, &self.c, &self.p];
        if !topo.iter().all(|s| s.same_topology(&self.vel)) {
            return Err(Error::Config(
                "all variables must share the same periodic directions".into(),
            ));
        }
        Ok(())
    }

    /// True when no mass can cross the boundary (no-flux or periodic for
    /// the given scalar).
    pub fn closed_for(bcs: &SideBcs) -> bool {
        bcs.sides()
            .iter()
            .all(|b| matches!(b, Bc::Neumann | Bc::Periodic))
    }
}
