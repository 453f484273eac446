//! Browser bindings: torsion profiles, condition scans and eigenfunctions of
//! the logarithmic Laplacian on (−L, L), returned as flat `f64` arrays.

use loglap::problems::{solve_dirichlet, Operator, ProblemSpec};
use loglap::spectral::{condition_number, centered_stiffness, eigenfunctions as pencil_eigenfunctions, scan_grid};
use wasm_bindgen::prelude::*;

/// Largest mesh the page accepts; dense solves beyond this stall the tab.
pub const MAX_NODES: usize = 512;
pub const MAX_STEPS: usize = 400;

fn check_size(n: usize, max: usize, what: &str) -> Result<(), String> {
    if n == 0 || n > max {
        return Err(format!("{what} must lie in 1..={max}, got {n}"));
    }
    Ok(())
}

/// Nodal values of the torsion solution; nodes are −L + i·h, i = 0..N+1.
pub fn torsion_profile(half_length: f64, n: usize) -> Result<Vec<f64>, String> {
    check_size(n, MAX_NODES, "N")?;
    let spec = ProblemSpec::torsion(Operator::Log, half_length).map_err(|e| e.to_string())?;
    let r = solve_dirichlet(&spec, n).map_err(|e| e.to_string())?;
    Ok(r.solution.into_coeffs())
}

/// log10 cond(A^L) on `steps` points of [L_min, L_max].
pub fn condition_profile(n: usize, l_min: f64, l_max: f64, steps: usize) -> Result<Vec<f64>, String> {
    check_size(n, 128, "N")?;
    check_size(steps, MAX_STEPS, "steps")?;
    if !(l_min > 0.0 && l_min < l_max) {
        return Err(format!("need 0 < L_min < L_max, got {l_min}, {l_max}"));
    }
    scan_grid(l_min, l_max, steps.max(2))
        .into_iter()
        .map(|l| {
            let a = centered_stiffness(l, n).map_err(|e| e.to_string())?;
            let c = condition_number(&a).map_err(|e| e.to_string())?;
            Ok(c.log10().min(300.0))
        })
        .collect()
}

/// `count` pencil eigenvalues followed by the matching eigenvectors (N + 2
/// values each), every vector scaled to unit maximum.
pub fn eigen_profile(half_length: f64, n: usize, count: usize) -> Result<Vec<f64>, String> {
    check_size(n, MAX_NODES, "N")?;
    let (mesh, s) = pencil_eigenfunctions(half_length, n).map_err(|e| e.to_string())?;
    let count = count.min(mesh.dim());
    let mut out: Vec<f64> = s.eigenvalues[..count].to_vec();
    for k in 0..count {
        let v = s.vector(k).ok_or("eigenvectors missing")?;
        let scale = v.amax();
        out.extend(v.iter().map(|x| x / scale));
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn torsion(half_length: f64, n: usize) -> Result<Vec<f64>, JsError> {
    torsion_profile(half_length, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn condition_scan(n: usize, l_min: f64, l_max: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    condition_profile(n, l_min, l_max, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn eigenfunctions(half_length: f64, n: usize, count: usize) -> Result<Vec<f64>, JsError> {
    eigen_profile(half_length, n, count).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torsion_signs() {
        let small = torsion_profile(0.1, 64).unwrap();
        assert_eq!(small.len(), 66);
        assert!(small[1..65].iter().all(|v| *v > 0.0));
        let unit = torsion_profile(1.0, 64).unwrap();
        assert!(unit[1..65].iter().all(|v| *v < 0.0));
    }

    #[test]
    fn scan_peaks_near_first_length() {
        let c = condition_profile(32, 0.5, 1.0, 51).unwrap();
        let top = (0..c.len()).max_by(|&i, &j| c[i].total_cmp(&c[j])).unwrap();
        let l = 0.5 + 0.5 * top as f64 / 50.0;
        assert!((l - 0.709).abs() < 0.011, "{l}");
    }

    #[test]
    fn eigen_layout() {
        let out = eigen_profile(8.0, 32, 2).unwrap();
        assert_eq!(out.len(), 2 + 2 * 34);
        assert!(out[0] < out[1]);
        let first = &out[2..36];
        assert!(first.iter().all(|v| *v > 0.0));
        assert!(first.contains(&1.0));
    }

    #[test]
    fn limits() {
        assert!(torsion_profile(1.0, 0).is_err());
        assert!(torsion_profile(1.0, MAX_NODES + 1).is_err());
        assert!(condition_profile(8, 1.0, 0.5, 10).is_err());
        assert!(torsion_profile(-1.0, 8).is_err());
    }
}
