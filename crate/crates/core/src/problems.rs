//! Dirichlet problems on a centered interval (−L, L), the linear solver and
//! the end-to-end drivers. Every problem is computed on (0, 2L); the shift
//! x = y − L is recorded in the result.

use nalgebra::DVector;

use crate::assembly::{assemble_frac, assemble_log, SymMatrix};
use crate::error::{Error, Result};
use crate::mesh::{FemFunction, Mesh};
use crate::quadrature::{
    eval_loglap, eval_loglap_truncated, load_vector, mass_weighted_load, QuadParams, SingularEnd, Support,
    ENDPOINT_TRUNCATION,
};
use crate::special::{gamma, rho1};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operator {
    Log,
    /// Fractional Laplacian of order s ∈ (0, 1/2).
    Frac(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemName {
    /// Right-hand side 1.
    Torsion,
    /// χ_(−L,L)
    U1,
    /// x·χ_(−L,L)
    U2,
    /// (L² − x²)_+
    U3,
    /// χ / √(−ln((1 − (x/L)²)/2)), right-hand side built from nodal samples of L_Δu
    Udef,
}

impl ProblemName {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "torsion" => ProblemName::Torsion,
            "u1" => ProblemName::U1,
            "u2" => ProblemName::U2,
            "u3" => ProblemName::U3,
            "udef" => ProblemName::Udef,
            other => return Err(Error::arg(format!("unknown problem {other:?}"))),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemName::Torsion => "torsion",
            ProblemName::U1 => "u1",
            ProblemName::U2 => "u2",
            ProblemName::U3 => "u3",
            ProblemName::Udef => "udef",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub operator: Operator,
    pub name: ProblemName,
    /// Half-length L of the domain (−L, L).
    pub half_length: f64,
}

fn h_omega(l: f64, x: f64) -> f64 {
    -((l - x) * (l + x)).ln()
}

impl ProblemSpec {
    pub fn new(operator: Operator, name: ProblemName, half_length: f64) -> Result<Self> {
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::arg(format!("half-length must be positive, got {half_length}")));
        }
        if let Operator::Frac(s) = operator {
            if !(s > 0.0 && s < 0.5) {
                return Err(Error::Domain {
                    what: "fractional order",
                    value: s,
                    domain: "(0, 1/2)",
                });
            }
            if name != ProblemName::Torsion {
                return Err(Error::arg("only the torsion problem is available for the fractional operator"));
            }
        }
        Ok(ProblemSpec {
            operator,
            name,
            half_length,
        })
    }

    pub fn torsion(operator: Operator, half_length: f64) -> Result<Self> {
        Self::new(operator, ProblemName::Torsion, half_length)
    }

    /// Shift between centered and computational coordinates, x = y − shift.
    pub fn shift(&self) -> f64 {
        self.half_length
    }

    /// Length of the computational interval (0, 2L).
    pub fn length(&self) -> f64 {
        2.0 * self.half_length
    }

    /// Exact solution in centered coordinates, zero outside (−L, L).
    pub fn exact_centered(&self, x: f64) -> Option<f64> {
        let l = self.half_length;
        // closed interval, so the sup norm sees the one-sided limits at ±L
        let inside = x >= -l && x <= l;
        let v = match (self.operator, self.name) {
            (Operator::Frac(s), ProblemName::Torsion) => {
                if inside {
                    ((l - x) * (l + x)).powf(s) / gamma(1.0 + 2.0 * s)
                } else {
                    0.0
                }
            }
            (Operator::Log, ProblemName::Torsion) => return None,
            (_, ProblemName::U1) => f64::from(u8::from(inside)),
            (_, ProblemName::U2) => {
                if inside {
                    x
                } else {
                    0.0
                }
            }
            (_, ProblemName::U3) => ((l - x) * (l + x)).max(0.0),
            (_, ProblemName::Udef) => {
                if inside {
                    let r = x / l;
                    1.0 / (-((1.0 - r) * (1.0 + r) / 2.0).ln()).sqrt()
                } else {
                    0.0
                }
            }
        };
        Some(v)
    }

    /// Exact solution on the computational interval.
    pub fn exact(&self, y: f64) -> Option<f64> {
        self.exact_centered(y - self.shift())
    }

    pub fn has_exact(&self) -> bool {
        self.exact_centered(0.0).is_some()
    }

    /// Right-hand side in centered coordinates; `None` for the nodal pipeline.
    pub fn rhs_centered(&self, x: f64) -> Option<f64> {
        let l = self.half_length;
        let r1 = rho1();
        Some(match self.name {
            ProblemName::Torsion => 1.0,
            ProblemName::U1 => h_omega(l, x) + r1,
            ProblemName::U2 => x * (2.0 + h_omega(l, x) + r1),
            ProblemName::U3 => l * l - 3.0 * x * x + (h_omega(l, x) + r1) * (l - x) * (l + x),
            ProblemName::Udef => return None,
        })
    }

    /// Right-hand side on the computational interval. The log factor uses the
    /// distances y and 2L − y so that it stays finite next to the ends.
    pub fn rhs(&self, y: f64) -> Option<f64> {
        let l = self.half_length;
        let x = y - l;
        let w = -(y * (2.0 * l - y)).ln() + rho1();
        Some(match self.name {
            ProblemName::Torsion => 1.0,
            ProblemName::U1 => w,
            ProblemName::U2 => x * (2.0 + w),
            ProblemName::U3 => l * l - 3.0 * x * x + w * y * (2.0 * l - y),
            ProblemName::Udef => return None,
        })
    }

    fn rhs_singular(&self) -> SingularEnd {
        match self.name {
            ProblemName::Torsion => SingularEnd::None,
            _ => SingularEnd::Both,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solution: FemFunction,
    /// ‖Aα − F‖_∞
    pub residual_norm: f64,
    pub rhs_norm: f64,
    pub problem: ProblemSpec,
    /// x = y − shift maps computational to centered coordinates.
    pub shift: f64,
    /// Smallest pivot relative to ‖A‖_max fell below 1e−8.
    pub near_singular: bool,
}

impl SolveResult {
    /// Nodes in centered coordinates paired with the coefficients.
    pub fn centered_nodes(&self) -> Vec<(f64, f64)> {
        let m = self.solution.mesh();
        m.nodes()
            .into_iter()
            .zip(self.solution.coeffs())
            .map(|(y, a)| (y - self.shift, *a))
            .collect()
    }

    /// Largest-magnitude interior coefficient, keeping its sign.
    pub fn extreme_value(&self) -> f64 {
        let c = self.solution.coeffs();
        c[1..c.len() - 1]
            .iter()
            .copied()
            .fold(0.0, |acc: f64, v| if v.abs() > acc.abs() { v } else { acc })
    }

    pub fn sup_norm(&self) -> f64 {
        self.solution.coeffs().iter().fold(0.0, |a: f64, v| a.max(v.abs()))
    }
}

/// Outcome of [`linear_solve_detailed`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    /// min |U_ii| / ‖A‖_max of the LU factor.
    pub pivot_ratio: f64,
}

/// Solves A x = F for the symmetric, possibly indefinite A.
pub fn linear_solve(a: &SymMatrix, f: &[f64]) -> Result<Vec<f64>> {
    linear_solve_detailed(a, f).map(|s| s.x)
}

/// LU with partial pivoting plus one step of iterative refinement. A pivot
/// below 1e−14·‖A‖_max is reported as singular.
pub fn linear_solve_detailed(a: &SymMatrix, f: &[f64]) -> Result<LinearSolution> {
    let n = a.order();
    if f.len() != n {
        return Err(Error::arg(format!("right-hand side has length {}, expected {n}", f.len())));
    }
    let norm = a.max_abs();
    if norm == 0.0 {
        return Err(Error::Singular { index: 0, magnitude: 0.0 });
    }
    let lu = a.matrix().clone().lu();
    let u = lu.u();
    let mut min_pivot = f64::INFINITY;
    for i in 0..n {
        let p = u[(i, i)].abs();
        if p < 1e-14 * norm {
            return Err(Error::Singular { index: i, magnitude: p });
        }
        min_pivot = min_pivot.min(p);
    }
    let b = DVector::from_column_slice(f);
    let mut x = lu.solve(&b).ok_or(Error::Singular { index: 0, magnitude: 0.0 })?;
    let r = &b - a.matrix() * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    let residual = (&b - a.matrix() * &x).amax();
    Ok(LinearSolution {
        x: x.iter().copied().collect(),
        residual_norm: residual,
        pivot_ratio: min_pivot / norm,
    })
}

/// Stiffness matrix of the problem's operator on `mesh`.
pub fn stiffness(operator: Operator, mesh: &Mesh) -> Result<SymMatrix> {
    match operator {
        Operator::Log => Ok(assemble_log(mesh)),
        Operator::Frac(s) => assemble_frac(mesh, s),
    }
}

/// Nodal samples of L_Δu at every node of `mesh`, endpoints truncated.
const ENDPOINT_TOL: f64 = 1e-7;

pub fn nodal_loglap<F: Fn(f64) -> f64 + Sync>(u: F, mesh: &Mesh, breaks: Vec<f64>, tol: f64) -> Result<Vec<f64>> {
    let sup = Support::with_breaks(0.0, mesh.length(), breaks);
    let nodes = mesh.nodes();
    let last = nodes.len() - 1;
    let eval = |(i, y): (usize, &f64)| {
        if i == 0 || i == last {
            // the truncated value is only meaningful to about the cut size anyway
            eval_loglap_truncated(&u, &sup, *y, tol.max(ENDPOINT_TOL), ENDPOINT_TRUNCATION)
        } else {
            eval_loglap(&u, &sup, *y, tol)
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        nodes.par_iter().enumerate().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        nodes.iter().enumerate().map(eval).collect()
    }
}

/// Load vector of `problem` on `mesh`.
pub fn problem_load(problem: &ProblemSpec, mesh: &Mesh) -> Result<Vec<f64>> {
    match problem.name {
        ProblemName::Udef => {
            let u = |y: f64| problem.exact(y).unwrap_or(0.0);
            let g = nodal_loglap(u, mesh, Vec::new(), 1e-9)?;
            mass_weighted_load(mesh, &g)
        }
        _ => {
            let f = |y: f64| problem.rhs(y).unwrap_or(0.0);
            load_vector(mesh, f, problem.rhs_singular(), QuadParams::default())
        }
    }
}

/// Assembles and solves `problem` with N interior nodes.
pub fn solve_dirichlet(problem: &ProblemSpec, n: usize) -> Result<SolveResult> {
    let mesh = Mesh::new(problem.length(), n)?;
    let a = stiffness(problem.operator, &mesh)?;
    let f = problem_load(problem, &mesh)?;
    let sol = linear_solve_detailed(&a, &f)?;
    let rhs_norm = f.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    Ok(SolveResult {
        solution: FemFunction::new(mesh, sol.x)?,
        residual_norm: sol.residual_norm,
        rhs_norm,
        problem: *problem,
        shift: problem.shift(),
        near_singular: sol.pivot_ratio < 1e-8,
    })
}

/// Manufactured solution `name` of the logarithmic problem on (−L, L).
pub fn solve_manufactured(name: ProblemName, half_length: f64, n: usize) -> Result<SolveResult> {
    if name == ProblemName::Torsion {
        return Err(Error::arg("torsion has no manufactured solution"));
    }
    solve_dirichlet(&ProblemSpec::new(Operator::Log, name, half_length)?, n)
}

/// Solves A α = M g for nodal data g, e.g. to test a pipeline without quadrature.
pub fn solve_with_nodal_rhs(a: &SymMatrix, mesh: &Mesh, nodal: &[f64]) -> Result<Vec<f64>> {
    let f = mass_weighted_load(mesh, nodal)?;
    linear_solve(a, &f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_mass;
    use crate::quadrature::error_l2;

    #[test]
    fn linear_solve_examples() {
        let m = Mesh::new(1.0, 1).unwrap();
        let mass = assemble_mass(&m);
        let x = linear_solve(&mass, &[0.25, 0.5, 0.25]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let d = SymMatrix::from_upper(2, |i, j| match (i, j) {
            (0, 0) => 2.0,
            (1, 1) => -3.0,
            _ => 0.0,
        });
        let x = linear_solve(&d, &[2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, -1.0]);
    }

    #[test]
    fn linear_solve_detects_singularity() {
        let z = SymMatrix::from_upper(3, |i, j| if i == j && i < 2 { 1.0 } else { 0.0 });
        assert!(matches!(linear_solve(&z, &[1.0, 1.0, 1.0]), Err(Error::Singular { index: 2, .. })));
        assert!(linear_solve(&z, &[1.0]).is_err());
    }

    #[test]
    fn problem_validation() {
        assert!(ProblemSpec::new(Operator::Frac(0.6), ProblemName::Torsion, 1.0).is_err());
        assert!(ProblemSpec::new(Operator::Frac(0.1), ProblemName::U1, 1.0).is_err());
        assert!(ProblemSpec::new(Operator::Log, ProblemName::U1, 0.0).is_err());
        assert_eq!(ProblemName::parse("u3").unwrap(), ProblemName::U3);
        assert!(ProblemName::parse("u9").is_err());
    }

    #[test]
    fn manufactured_right_hand_sides_match_pointwise_operator() {
        // closed forms against direct evaluation of L_Δ at L = 2
        let l = 2.0;
        for name in [ProblemName::U1, ProblemName::U2, ProblemName::U3] {
            let p = ProblemSpec::new(Operator::Log, name, l).unwrap();
            let sup = Support::interval(0.0, 2.0 * l);
            let u = |y: f64| p.exact(y).unwrap();
            for k in 1..8 {
                let y = 2.0 * l * k as f64 / 8.0;
                let v = eval_loglap(u, &sup, y, 1e-10).unwrap();
                let e = p.rhs_centered(y - l).unwrap();
                assert!((v - e).abs() < 1e-7, "{name:?} y={y}: {v} vs {e}");
            }
        }
    }

    #[test]
    fn torsion_signs_small_and_unit_interval() {
        let pos = solve_dirichlet(&ProblemSpec::torsion(Operator::Log, 0.1).unwrap(), 128).unwrap();
        let c = pos.solution.coeffs();
        assert!(c[1..c.len() - 1].iter().all(|&v| v > 0.0));
        let neg = solve_dirichlet(&ProblemSpec::torsion(Operator::Log, 1.0).unwrap(), 128).unwrap();
        let c = neg.solution.coeffs();
        assert!(c[1..c.len() - 1].iter().all(|&v| v < 0.0));
        assert!(neg.residual_norm < 1e-10 * neg.rhs_norm);
    }

    #[test]
    fn fractional_torsion_improves_with_refinement() {
        let p = ProblemSpec::torsion(Operator::Frac(0.1), 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for n in [31, 63, 127] {
            let r = solve_dirichlet(&p, n).unwrap();
            let e = error_l2(|y| p.exact(y).unwrap(), &r.solution, None);
            assert!(e < prev, "N={n}: {e} vs {prev}");
            prev = e;
        }
    }

    #[test]
    fn odd_data_gives_odd_solution() {
        let r = solve_manufactured(ProblemName::U2, 1.0, 32).unwrap();
        let c = r.solution.coeffs();
        let n = c.len();
        for i in 0..n {
            assert!((c[i] + c[n - 1 - i]).abs() < 1e-9);
        }
    }

    #[test]
    fn centered_nodes_use_the_shift() {
        let r = solve_dirichlet(&ProblemSpec::torsion(Operator::Log, 0.5).unwrap(), 3).unwrap();
        let pts = r.centered_nodes();
        assert_eq!(pts.first().unwrap().0, -0.5);
        assert_eq!(pts.last().unwrap().0, 0.5);
        assert_eq!(r.shift, 0.5);
        assert!(!r.near_singular);
    }
}
