//! Uniform meshes on (0, L), the hat basis with boundary half-hats, and
//! finite element functions built from it.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Uniform partition of (0, L) into N+1 elements, with interior nodes x_1..x_N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    length: f64,
    interior: usize,
    h: f64,
}

impl Mesh {
    pub fn new(length: f64, interior: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::arg(format!("mesh length must be positive, got {length}")));
        }
        if interior < 1 {
            return Err(Error::arg("mesh needs at least one interior node"));
        }
        Ok(Mesh {
            length,
            interior,
            h: length / (interior as f64 + 1.0),
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of interior nodes N.
    pub fn interior(&self) -> usize {
        self.interior
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of basis functions, N+2.
    pub fn dim(&self) -> usize {
        self.interior + 2
    }

    pub fn elements(&self) -> usize {
        self.interior + 1
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.interior + 1 {
            self.length
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.node(i)).collect()
    }

    /// Element containing `x` under the left-closed convention [x_i, x_{i+1});
    /// `x = L` belongs to the last element. `None` outside [0, L].
    pub fn element_of(&self, x: f64) -> Option<usize> {
        if !(0.0..=self.length).contains(&x) {
            return None;
        }
        let e = ((x / self.h).floor() as usize).min(self.interior);
        // guard against rounding right at a node
        if e < self.interior && x >= self.node(e + 1) {
            Some(e + 1)
        } else if e > 0 && x < self.node(e) {
            Some(e - 1)
        } else {
            Some(e)
        }
    }

    /// Support [a, b] of basis function `i`.
    pub fn support(&self, i: usize) -> (f64, f64) {
        let a = if i == 0 { 0.0 } else { self.node(i - 1) };
        let b = if i == self.interior + 1 {
            self.length
        } else {
            self.node(i + 1)
        };
        (a, b)
    }

    /// Evaluates φ_i(x). Half-hats at both ends; everything vanishes outside [0, L].
    pub fn basis(&self, i: usize, x: f64) -> Result<f64> {
        if i >= self.dim() {
            return Err(Error::arg(format!(
                "basis index {i} out of range 0..={}",
                self.interior + 1
            )));
        }
        Ok(self.basis_unchecked(i, x))
    }

    pub(crate) fn basis_unchecked(&self, i: usize, x: f64) -> f64 {
        let Some(e) = self.element_of(x) else {
            return 0.0;
        };
        if x == self.node(e) {
            return if i == e { 1.0 } else { 0.0 };
        }
        if x == self.node(e + 1) {
            return if i == e + 1 { 1.0 } else { 0.0 };
        }
        let t = (x - self.node(e)) / self.h;
        if i == e {
            1.0 - t
        } else if i == e + 1 {
            t
        } else {
            0.0
        }
    }

    /// ∫ φ_i over (0, L).
    pub fn basis_integral(&self, i: usize) -> f64 {
        if i == 0 || i == self.interior + 1 {
            0.5 * self.h
        } else {
            self.h
        }
    }
}

/// Coefficient vector over the N+2 basis functions of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FemFunction {
    mesh: Mesh,
    coeffs: Vec<f64>,
}

impl FemFunction {
    pub fn new(mesh: Mesh, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != mesh.dim() {
            return Err(Error::arg(format!(
                "expected {} coefficients, got {}",
                mesh.dim(),
                coeffs.len()
            )));
        }
        Ok(FemFunction { mesh, coeffs })
    }

    pub fn zero(mesh: Mesh) -> Self {
        FemFunction {
            coeffs: vec![0.0; mesh.dim()],
            mesh,
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Σ α_i φ_i(x); exactly zero outside [0, L].
    pub fn eval(&self, x: f64) -> f64 {
        match self.mesh.element_of(x) {
            None => 0.0,
            Some(e) => {
                let (a, b) = (self.mesh.node(e), self.mesh.node(e + 1));
                if x == a {
                    return self.coeffs[e];
                }
                if x == b {
                    return self.coeffs[e + 1];
                }
                let t = (x - a) / self.mesh.h;
                self.coeffs[e] * (1.0 - t) + self.coeffs[e + 1] * t
            }
        }
    }
}

/// Builds the finite element function whose coefficients are `values`.
pub fn nodal_interpolate(values: &[f64], mesh: Mesh) -> Result<FemFunction> {
    FemFunction::new(mesh, values.to_vec())
}

/// Quasi-interpolator with coefficients a_k = ∫ v φ_k / ∫ φ_k.
///
/// Numerators use Gauss–Legendre of order `quad_order` on each element; the
/// denominators are the exact values h/2 (half-hats) and h.
pub fn quasi_interpolate<F>(v: F, mesh: Mesh, quad_order: usize) -> Result<FemFunction>
where
    F: Fn(f64) -> f64,
{
    if quad_order < 1 {
        return Err(Error::arg("quadrature order must be at least 1"));
    }
    let rule = gauss_legendre(quad_order)?;
    let h = mesh.h();
    let mut num = vec![0.0; mesh.dim()];
    for e in 0..mesh.elements() {
        let a = mesh.node(e);
        for (t, w) in rule.nodes().iter().zip(rule.weights()) {
            let s = 0.5 * (t + 1.0);
            let fx = v(a + s * h) * w * 0.5 * h;
            num[e] += fx * (1.0 - s);
            num[e + 1] += fx * s;
        }
    }
    let coeffs = num
        .iter()
        .enumerate()
        .map(|(k, n)| n / mesh.basis_integral(k))
        .collect();
    FemFunction::new(mesh, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_mesh_examples() {
        let m = Mesh::new(1.0, 3).unwrap();
        assert_eq!(m.h(), 0.25);
        assert_eq!(m.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let m = Mesh::new(2.0, 1).unwrap();
        assert_eq!(m.h(), 1.0);
        assert_eq!(m.nodes(), vec![0.0, 1.0, 2.0]);
        let m = Mesh::new(1.0, 1 << 10).unwrap();
        assert_eq!(m.h(), 1.0 / 1025.0);
        assert_eq!(m.node(1025), 1.0);
    }

    #[test]
    fn build_mesh_rejects_bad_arguments() {
        assert!(Mesh::new(0.0, 3).is_err());
        assert!(Mesh::new(-1.0, 3).is_err());
        assert!(Mesh::new(1.0, 0).is_err());
    }

    #[test]
    fn half_hat_ramp() {
        let m = Mesh::new(1.0, 3).unwrap();
        assert_eq!(m.basis(0, 0.125).unwrap(), 0.5);
        assert_eq!(m.basis(4, 0.875).unwrap(), 0.5);
        assert_eq!(m.basis(0, -0.1).unwrap(), 0.0);
        assert!(m.basis(5, 0.5).is_err());
    }

    #[test]
    fn nodal_duality_exhaustive() {
        for n in 1..=64 {
            let m = Mesh::new(1.3, n).unwrap();
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    let v = m.basis(i, m.node(j)).unwrap();
                    assert_eq!(v, if i == j { 1.0 } else { 0.0 }, "n={n} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn fem_eval_examples() {
        let m = Mesh::new(2.0, 5).unwrap();
        let ones = FemFunction::new(m, vec![1.0; 7]).unwrap();
        assert!((ones.eval(0.37 * 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(ones.eval(-0.5), 0.0);
        assert_eq!(ones.eval(2.5), 0.0);

        let m = Mesh::new(1.0, 3).unwrap();
        let lin = nodal_interpolate(&m.nodes(), m).unwrap();
        assert!((lin.eval(0.125) - 0.125).abs() < 1e-15);
        // x = L comes from the last element
        assert_eq!(lin.eval(1.0), 1.0);
    }

    #[test]
    fn nodal_interpolate_examples() {
        let m = Mesh::new(1.0, 3).unwrap();
        let z = nodal_interpolate(&[0.0; 5], m).unwrap();
        assert!(z.coeffs().iter().all(|&c| c == 0.0));
        let sq: Vec<f64> = m.nodes().iter().map(|x| x * x).collect();
        let f = nodal_interpolate(&sq, m).unwrap();
        for (x, y) in m.nodes().iter().zip(&sq) {
            assert_eq!(f.eval(*x), *y);
        }
        let m1 = Mesh::new(1.0, 1).unwrap();
        let one = nodal_interpolate(&[1.0, 1.0, 1.0], m1).unwrap();
        for k in 0..=20 {
            assert!((one.eval(k as f64 / 20.0) - 1.0).abs() < 1e-15);
        }
        assert!(nodal_interpolate(&[1.0, 2.0], m1).is_err());
    }

    #[test]
    fn quasi_interpolate_linear_function() {
        // a_0 = (∫_0^{1/2} x (1 − 2x) dx) / (1/4) = 1/6, a_1 = 1/2, a_2 = 5/6
        let m = Mesh::new(1.0, 1).unwrap();
        let f = quasi_interpolate(|x| x, m, 4).unwrap();
        let c = f.coeffs();
        assert!((c[0] - 1.0 / 6.0).abs() < 1e-14);
        assert!((c[1] - 0.5).abs() < 1e-14);
        assert!((c[2] - 5.0 / 6.0).abs() < 1e-14);
        assert!(quasi_interpolate(|x| x, m, 0).is_err());
    }

    #[test]
    fn quasi_interpolate_preserves_constants() {
        for c in [1.0, -3.5, 1e6] {
            let m = Mesh::new(0.7, 17).unwrap();
            let f = quasi_interpolate(|_| c, m, 3).unwrap();
            for a in f.coeffs() {
                assert!((a - c).abs() <= 1e-12 * c.abs().max(1.0), "{a} vs {c}");
            }
        }
    }

    #[test]
    fn quasi_interpolate_sup_stable() {
        let m = Mesh::new(1.0, 50).unwrap();
        let f = quasi_interpolate(|x: f64| (10.0 * x).sin(), m, 8).unwrap();
        let max = f.coeffs().iter().fold(0.0f64, |a, c| a.max(c.abs()));
        assert!(max <= 1.0);
    }
}
