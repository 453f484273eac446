//! Eigenvalues of the stiffness matrix, condition scans in L, and the lengths
//! L_k at which zero is an eigenvalue.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::assembly::{assemble_log, assemble_mass, SymMatrix};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::report::Table;

/// Ascending eigenvalues and, on request, matching orthonormal columns
/// (M-orthonormal for a pencil).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, k: usize) -> Option<DVector<f64>> {
        self.eigenvectors.as_ref().map(|v| v.column(k).into_owned())
    }
}

fn sweep_budget(n: usize) -> usize {
    100 * n.max(10)
}

fn sorted_spectrum(values: DVector<f64>, vectors: Option<DMatrix<f64>>) -> Result<Spectrum> {
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Convergence {
            what: "symmetric eigensolver",
            estimate: *bad,
            achieved: f64::NAN,
        });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let eigenvectors = vectors.map(|v| {
        let mut out = DMatrix::zeros(v.nrows(), v.ncols());
        for (dst, &src) in order.iter().enumerate() {
            let mut col = v.column(src).into_owned();
            // fixed sign: largest component positive, first one on ties
            let mut big = 0;
            for r in 1..col.len() {
                if col[r].abs() > col[big].abs() * (1.0 + 1e-12) {
                    big = r;
                }
            }
            if col[big] < 0.0 {
                col.neg_mut();
            }
            out.set_column(dst, &col);
        }
        out
    });
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

fn eig_dense(m: DMatrix<f64>, want_vectors: bool) -> Result<Spectrum> {
    let n = m.nrows();
    if want_vectors {
        let e = SymmetricEigen::try_new(m, f64::EPSILON, sweep_budget(n)).ok_or(Error::Convergence {
            what: "symmetric eigensolver",
            estimate: f64::NAN,
            achieved: f64::NAN,
        })?;
        sorted_spectrum(e.eigenvalues, Some(e.eigenvectors))
    } else {
        sorted_spectrum(m.symmetric_eigenvalues(), None)
    }
}

/// Full spectrum of a symmetric matrix.
pub fn eig_sym(a: &SymMatrix, want_vectors: bool) -> Result<Spectrum> {
    eig_dense(a.matrix().clone(), want_vectors)
}

/// Spectrum of the pencil (A, M), reduced to standard form with the
/// Cholesky factor of M.
pub fn eig_generalized(a: &SymMatrix, m: &SymMatrix, want_vectors: bool) -> Result<Spectrum> {
    if a.order() != m.order() {
        return Err(Error::arg(format!(
            "pencil orders differ: {} and {}",
            a.order(),
            m.order()
        )));
    }
    let chol = m
        .matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::arg("second matrix of the pencil is not positive definite"))?;
    let l = chol.l();
    let la = l
        .solve_lower_triangular(a.matrix())
        .ok_or_else(|| Error::arg("singular Cholesky factor"))?;
    let c = l
        .solve_lower_triangular(&la.transpose())
        .ok_or_else(|| Error::arg("singular Cholesky factor"))?;
    let c = (&c + c.transpose()) * 0.5;
    let mut s = eig_dense(c, want_vectors)?;
    if let Some(y) = s.eigenvectors.take() {
        let x = l
            .transpose()
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::arg("singular Cholesky factor"))?;
        s.eigenvectors = Some(x);
    }
    Ok(s)
}

/// max|λ| / min|λ|; +∞ when the smallest magnitude is zero.
pub fn condition_number(a: &SymMatrix) -> Result<f64> {
    let s = eig_sym(a, false)?;
    Ok(cond_of(&s.eigenvalues))
}

fn cond_of(values: &[f64]) -> f64 {
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let min = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min == 0.0 || min <= max * f64::EPSILON * values.len() as f64 * 1e-3 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Stiffness matrix of L_Δ on (−L, L) with N interior nodes.
pub fn centered_stiffness(half_length: f64, n: usize) -> Result<SymMatrix> {
    Ok(assemble_log(&Mesh::new(2.0 * half_length, n)?))
}

fn cond_at(half_length: f64, n: usize) -> Result<f64> {
    condition_number(&centered_stiffness(half_length, n)?)
}

fn min_abs_eig_at(half_length: f64, n: usize) -> Result<f64> {
    let s = eig_sym(&centered_stiffness(half_length, n)?, false)?;
    Ok(s.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub n: usize,
    pub lengths: Vec<f64>,
    pub cond_values: Vec<f64>,
}

impl ScanResult {
    /// Interior grid indices whose value exceeds `ratio` times both neighbours.
    pub fn local_maxima(&self, ratio: f64) -> Vec<usize> {
        let c = &self.cond_values;
        (1..c.len().saturating_sub(1))
            .filter(|&i| c[i] > ratio * c[i - 1] && c[i] > ratio * c[i + 1])
            .collect()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["L", "cond"]);
        for (l, c) in self.lengths.iter().zip(&self.cond_values) {
            t.push_values(&[*l, *c]);
        }
        t
    }
}

/// The `steps` grid points of [L_min, L_max], endpoints included.
pub fn scan_grid(l_min: f64, l_max: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                l_max
            } else {
                l_min + (l_max - l_min) * (i as f64 / (steps - 1) as f64)
            }
        })
        .collect()
}

/// cond(A^L) for L on a uniform grid; each point is assembled on its own.
pub fn scan_condition(n: usize, l_min: f64, l_max: f64, steps: usize) -> Result<ScanResult> {
    if !(l_min > 0.0 && l_min < l_max && l_max.is_finite()) {
        return Err(Error::arg(format!("need 0 < L_min < L_max, got {l_min}, {l_max}")));
    }
    if steps < 2 {
        return Err(Error::arg("a scan needs at least two points"));
    }
    let lengths = scan_grid(l_min, l_max, steps);
    #[cfg(feature = "parallel")]
    let cond_values = {
        use rayon::prelude::*;
        lengths.par_iter().map(|&l| cond_at(l, n)).collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let cond_values = lengths.iter().map(|&l| cond_at(l, n)).collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        n,
        lengths,
        cond_values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LkTable {
    pub k: usize,
    pub lk: f64,
    pub n: usize,
    pub bracket: (f64, f64),
}

pub fn lk_csv(tables: &[LkTable]) -> Table {
    let mut t = Table::new(["k", "N", "L_k"]).integer_columns(&["k", "N"]);
    for r in tables {
        t.push_values(&[r.k as f64, r.n as f64, r.lk]);
    }
    t
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const BRACKET_CHECK: usize = 5;

/// Golden-section maximization of `f` on (a, b) down to width `tol`;
/// returns the final midpoint.
fn golden_max<F: Fn(f64) -> Result<f64>>(f: F, bracket: (f64, f64), tol: f64) -> Result<f64> {
    let (mut a, mut b) = bracket;
    let edge = f(a)?.max(f(b)?);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut best = fc.max(fd);
    let mut iter = 0;
    while b - a >= tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            best = best.max(fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            best = best.max(fd);
        }
        iter += 1;
        if iter == BRACKET_CHECK && !(best > edge) {
            return Err(Error::Bracket {
                a: bracket.0,
                b: bracket.1,
                reason: "no interior point beats the bracket ends".into(),
            });
        }
    }
    Ok(0.5 * (a + b))
}

fn check_bracket(bracket: (f64, f64), tol: f64) -> Result<()> {
    let (a, b) = bracket;
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::arg(format!("bad bracket [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::arg("tolerance must be positive"));
    }
    Ok(())
}

/// Locates the spike of L ↦ cond(A^L) inside `bracket`. The index k is the
/// number of negative eigenvalues at the right end of the bracket.
pub fn find_lk(n: usize, bracket: (f64, f64), tol: f64) -> Result<LkTable> {
    check_bracket(bracket, tol)?;
    let lk = golden_max(|l| cond_at(l, n), bracket, tol)?;
    let right = eig_sym(&centered_stiffness(bracket.1, n)?, false)?;
    let k = right.eigenvalues.iter().filter(|v| **v < 0.0).count();
    Ok(LkTable { k, lk, n, bracket })
}

/// Same search minimizing the smallest |λ| instead of maximizing cond.
pub fn find_lk_min_eig(n: usize, bracket: (f64, f64), tol: f64) -> Result<f64> {
    check_bracket(bracket, tol)?;
    golden_max(|l| min_abs_eig_at(l, n).map(|v| -v), bracket, tol)
}

/// λ_k of L_Δ on (−L, L) from the zero-eigenvalue length: 2 ln(L_k / L).
pub fn eigenvalue_by_scaling(half_length: f64, k: usize, lk: &LkTable) -> Result<f64> {
    if lk.k != k {
        return Err(Error::arg(format!("table holds L_{}, not L_{k}", lk.k)));
    }
    if !(half_length > 0.0) {
        return Err(Error::arg("half-length must be positive"));
    }
    Ok(2.0 * (lk.lk / half_length).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenKind {
    /// Eigenvalues of A itself.
    Raw,
    /// Eigenvalues of the pencil (A, M).
    Pencil,
}

/// The `count` smallest discrete eigenvalues on (−L, L).
pub fn discrete_eigenvalues(half_length: f64, n: usize, count: usize, kind: EigenKind) -> Result<Vec<f64>> {
    let mesh = Mesh::new(2.0 * half_length, n)?;
    let a = assemble_log(&mesh);
    let s = match kind {
        EigenKind::Raw => eig_sym(&a, false)?,
        EigenKind::Pencil => eig_generalized(&a, &assemble_mass(&mesh), false)?,
    };
    Ok(s.eigenvalues.into_iter().take(count).collect())
}

/// Pencil eigenpairs on (−L, L), with the mesh for plotting the vectors.
pub fn eigenfunctions(half_length: f64, n: usize) -> Result<(Mesh, Spectrum)> {
    let mesh = Mesh::new(2.0 * half_length, n)?;
    let s = eig_generalized(&assemble_log(&mesh), &assemble_mass(&mesh), true)?;
    Ok((mesh, s))
}

/// λ_k^s of the fractional Laplacian on (−1, 1) for k = 1, 2, 3.
const FRAC_REFERENCE: [(f64, [f64; 3]); 3] = [
    (0.005, [0.997, 1.009, 1.014]),
    (0.05, [0.973, 1.092, 1.148]),
    (0.1, [0.957, 1.197, 1.320]),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallSRow {
    pub k: usize,
    pub s: f64,
    pub reference: f64,
    /// 1 + s·λ_k
    pub computed: f64,
}

/// First-order comparison λ_k^s ≈ 1 + s·λ_k on (−1, 1), with λ_k taken
/// from each table by scaling.
pub fn frac_small_s_table(s: f64, tables: &[LkTable]) -> Result<Vec<SmallSRow>> {
    let refs = FRAC_REFERENCE
        .iter()
        .find(|(rs, _)| *rs == s)
        .ok_or_else(|| Error::arg(format!("no reference values for s = {s}")))?;
    tables
        .iter()
        .map(|t| {
            if !(1..=3).contains(&t.k) {
                return Err(Error::arg(format!("no reference value for k = {}", t.k)));
            }
            let lambda = eigenvalue_by_scaling(1.0, t.k, t)?;
            Ok(SmallSRow {
                k: t.k,
                s,
                reference: refs.1[t.k - 1],
                computed: 1.0 + s * lambda,
            })
        })
        .collect()
}
