//! CSV tables and convergence studies.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::problems::{solve_dirichlet, ProblemSpec};
use crate::quadrature::{error_l2, error_sup};

/// Scientific notation with 17 significant digits, which round-trips every f64.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Header plus numeric rows; empty cells stand for missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    integer: Vec<bool>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        let header: Vec<String> = header.into_iter().map(Into::into).collect();
        let integer = vec![false; header.len()];
        Table {
            header,
            rows: Vec::new(),
            integer,
        }
    }

    /// Prints the named columns as integers instead of in scientific notation.
    pub fn integer_columns(mut self, names: &[&str]) -> Self {
        for (flag, h) in self.integer.iter_mut().zip(&self.header) {
            *flag = names.contains(&h.as_str());
        }
        self
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        self.rows.push(row);
    }

    pub fn push_values(&mut self, row: &[f64]) {
        self.rows.push(row.iter().copied().map(Some).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&self.integer)
                .map(|(c, int)| match c {
                    Some(v) if *int && v.fract() == 0.0 => format!("{v:.0}"),
                    Some(v) => fmt17(*v),
                    None => String::new(),
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::arg("empty CSV"))?
            .split(',')
            .map(str::to_string)
            .collect::<Vec<_>>();
        let mut table = Table::new(header);
        for line in lines.filter(|l| !l.is_empty()) {
            let row = line
                .split(',')
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>()
                            .map(Some)
                            .map_err(|e| Error::arg(format!("bad CSV cell {c:?}: {e}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != table.header.len() {
                return Err(Error::arg("CSV row length differs from header"));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_csv())
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::arg(format!("cannot write {}: {e}", path.display())))
}

/// One mesh level of a convergence study. Slopes compare with the previous
/// row, log(e_prev/e_cur)/log(h_prev/h_cur), and are absent on the first row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub l2_err: f64,
    pub l2_slope: Option<f64>,
    pub l2loc_err: f64,
    pub l2loc_slope: Option<f64>,
    pub linf_err: f64,
    pub linf_slope: Option<f64>,
    /// Same quotient for L² against 1/|ln h| in place of h.
    pub l2_log_slope: Option<f64>,
}

pub const CONVERGENCE_HEADER: [&str; 9] = [
    "N",
    "h",
    "l2_err",
    "l2_slope",
    "l2loc_err",
    "l2loc_slope",
    "linf_err",
    "linf_slope",
    "l2_log_slope",
];

fn slope(e_prev: f64, e_cur: f64, x_prev: f64, x_cur: f64) -> f64 {
    (e_prev / e_cur).ln() / (x_prev / x_cur).ln()
}

/// Errors a_h (L² on the whole domain), b_h (L² on `window`, centered
/// coordinates) and c_h (sampled sup norm) for each N.
pub fn convergence_table(problem: &ProblemSpec, ns: &[usize], window: (f64, f64)) -> Result<Vec<ConvergenceRow>> {
    if !problem.has_exact() {
        return Err(Error::arg(format!(
            "problem {} has no exact solution to compare with",
            problem.name.as_str()
        )));
    }
    if window.0 >= window.1 {
        return Err(Error::arg("empty error window"));
    }
    let exact = |y: f64| problem.exact(y).unwrap_or(0.0);
    let shift = problem.shift();
    let win = (window.0 + shift, window.1 + shift);
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ns.len());
    for &n in ns {
        let r = solve_dirichlet(problem, n)?;
        let h = r.solution.mesh().h();
        let l2 = error_l2(exact, &r.solution, None);
        let loc = error_l2(exact, &r.solution, Some(win));
        let sup = error_sup(exact, &r.solution, 9)?;
        let prev = rows.last();
        rows.push(ConvergenceRow {
            n,
            h,
            l2_err: l2,
            l2_slope: prev.map(|p| slope(p.l2_err, l2, p.h, h)),
            l2loc_err: loc,
            l2loc_slope: prev.map(|p| slope(p.l2loc_err, loc, p.h, h)),
            linf_err: sup,
            linf_slope: prev.map(|p| slope(p.linf_err, sup, p.h, h)),
            l2_log_slope: prev.map(|p| slope(p.l2_err, l2, 1.0 / p.h.ln().abs(), 1.0 / h.ln().abs())),
        });
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> Table {
    let mut t = Table::new(CONVERGENCE_HEADER).integer_columns(&["N"]);
    for r in rows {
        t.push(vec![
            Some(r.n as f64),
            Some(r.h),
            Some(r.l2_err),
            r.l2_slope,
            Some(r.l2loc_err),
            r.l2loc_slope,
            Some(r.linf_err),
            r.linf_slope,
            r.l2_log_slope,
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Operator, ProblemName};

    #[test]
    fn fmt17_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn table_round_trip_with_gaps() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![Some(1.0), None]);
        t.push_values(&[0.1, 2.0 / 3.0]);
        let back = Table::from_csv(&t.to_csv()).unwrap();
        assert_eq!(t, back);
        let ints = Table::new(["N", "x"]).integer_columns(&["N"]);
        let mut ints = ints;
        ints.push_values(&[25.0, 25.0]);
        assert_eq!(ints.to_csv(), "N,x\n25,2.5000000000000000e1\n");
        assert_eq!(back.column("b").unwrap(), vec![None, Some(2.0 / 3.0)]);
        assert!(Table::from_csv("a,b\n1\n").is_err());
    }

    #[test]
    fn slopes_follow_the_row_convention() {
        let p = ProblemSpec::new(Operator::Log, ProblemName::U3, 1.0).unwrap();
        let rows = convergence_table(&p, &[15, 31], (-0.9, 0.9)).unwrap();
        assert!(rows[0].l2_slope.is_none());
        let r = rows[1];
        let expect = (rows[0].l2_err / r.l2_err).ln() / (rows[0].h / r.h).ln();
        assert_eq!(r.l2_slope.unwrap(), expect);
    }

    #[test]
    fn full_window_equals_global_error() {
        let p = ProblemSpec::new(Operator::Log, ProblemName::U3, 1.0).unwrap();
        let rows = convergence_table(&p, &[15, 31], (-1.0, 1.0)).unwrap();
        for r in rows {
            assert_eq!(r.l2_err, r.l2loc_err);
        }
    }

    #[test]
    fn torsion_without_exact_solution_is_rejected() {
        let p = ProblemSpec::torsion(Operator::Log, 1.0).unwrap();
        assert!(convergence_table(&p, &[7], (-0.5, 0.5)).is_err());
    }
}
