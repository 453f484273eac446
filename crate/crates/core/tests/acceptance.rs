//! Acceptance run: one PASS/FAIL line per criterion, then a single assert.

use std::time::Instant;

use loglap::assembly::{assemble_frac, assemble_log, assemble_log_fd_oracle, assemble_mass, quad_oracle_el};
use loglap::mesh::Mesh;
use loglap::problems::{solve_dirichlet, Operator, ProblemName, ProblemSpec};
use loglap::report::convergence_table;
use loglap::spectral::{
    discrete_eigenvalues, eigenfunctions, eigenvalue_by_scaling, find_lk, frac_small_s_table, EigenKind, LkTable,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fd_identity() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (len, n) in [(1.0, 8), (2.0, 16), (0.5, 4)] {
        let mesh = Mesh::new(len, n).unwrap();
        let a = assemble_log(&mesh);
        let d1 = a.max_abs_diff(&assemble_log_fd_oracle(&mesh, 1e-3).unwrap());
        let d2 = a.max_abs_diff(&assemble_log_fd_oracle(&mesh, 5e-4).unwrap());
        let ratio = d1 / d2;
        pass &= d1 < 1e-4 * mesh.h() && (3.0..=5.0).contains(&ratio);
        parts.push(format!("(L={len},N={n}) dev/h={:.2e} halving ratio={ratio:.2}", d1 / mesh.h()));
    }
    outcome(pass, parts.join("; "))
}

fn mass_limit() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (len, n) in [(1.0, 8), (2.0, 16), (0.5, 4)] {
        let mesh = Mesh::new(len, n).unwrap();
        let m = assemble_mass(&mesh);
        let dev: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&s| assemble_frac(&mesh, s).unwrap().max_abs_diff(&m))
            .collect();
        let r1 = dev[0] / dev[1];
        let r2 = dev[1] / dev[2];
        pass &= dev[1] < 1e-2 * mesh.h() && (8.0..=12.0).contains(&r1) && (8.0..=12.0).contains(&r2);
        parts.push(format!(
            "(L={len},N={n}) dev(1e-3)/h={:.2e} ratios {r1:.2},{r2:.2}",
            dev[1] / mesh.h()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn oracle_equivalence() -> Outcome {
    let mesh = Mesh::new(1.0, 8).unwrap();
    let a = assemble_log(&mesh);
    let mut worst: f64 = 0.0;
    for i in 0..mesh.dim() {
        for j in 0..mesh.dim() {
            let q = quad_oracle_el(&mesh, i, j, 1e-6).unwrap();
            worst = worst.max((a.get(i, j) - q).abs());
        }
    }
    outcome(worst < 1e-3, format!("max deviation {worst:.2e} over 100 entries"))
}

fn lk_reproduction(at256: &[LkTable], l1_1024: &LkTable) -> Outcome {
    let expected = [0.7092, 2.3796, 3.9127];
    let mut pass = true;
    let mut parts = Vec::new();
    for (t, e) in at256.iter().zip(expected) {
        let ok = (t.lk - e).abs() <= 1e-3;
        pass &= ok;
        parts.push(format!("N=256 L_{}={:.6} (want {e}±1e-3) {}", t.k, t.lk, if ok { "ok" } else { "off" }));
    }
    let ok = (l1_1024.lk - 0.7090).abs() <= 5e-4;
    pass &= ok;
    parts.push(format!("N=1024 L_1={:.6} (want 0.7090±5e-4)", l1_1024.lk));
    outcome(pass, parts.join("; "))
}

fn eigenvalues_by_scaling(at1024: &[LkTable]) -> Outcome {
    let expected = [-0.6878, 1.7331, 2.7275];
    let mut pass = true;
    let mut parts = Vec::new();
    for (t, e) in at1024.iter().zip(expected) {
        let lam = eigenvalue_by_scaling(1.0, t.k, t).unwrap();
        pass &= (lam - e).abs() <= 2e-3;
        parts.push(format!("lambda_{}={lam:.4} (want {e})", t.k));
    }
    outcome(pass, parts.join("; "))
}

fn small_s_cross_check(l1_1024: &LkTable) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (s, want) in [(0.005, 0.996), (0.05, 0.965), (0.1, 0.931)] {
        let row = frac_small_s_table(s, &[*l1_1024]).unwrap()[0];
        let rounded = (row.computed * 1000.0).round() / 1000.0;
        pass &= (rounded - want).abs() <= 1e-3 + 1e-9;
        parts.push(format!("s={s}: 1+s*lambda_1={:.5} -> {rounded:.3} (want {want})", row.computed));
    }
    outcome(pass, parts.join("; "))
}

fn scaling_law() -> Outcome {
    let mut worst: f64 = 0.0;
    for r in [0.5, 2.0, 10.0] {
        let small = Mesh::new(1.0, 32).unwrap();
        let big = Mesh::new(r, 32).unwrap();
        let predicted = assemble_log(&small).combine(r, &assemble_mass(&big), -2.0 * f64::ln(r));
        worst = worst.max(assemble_log(&big).max_abs_diff(&predicted));
    }
    outcome(worst < 1e-12, format!("max deviation {worst:.2e}"))
}

fn torsion_signs() -> Outcome {
    let interior = |l: f64| {
        let r = solve_dirichlet(&ProblemSpec::torsion(Operator::Log, l).unwrap(), 256).unwrap();
        let c = r.solution.coeffs().to_vec();
        c[1..c.len() - 1].to_vec()
    };
    let small = interior(0.1).iter().all(|v| *v > 0.0);
    let unit = interior(1.0).iter().all(|v| *v < 0.0);
    let wide = interior(8.0);
    let mixed = wide.iter().any(|v| *v > 0.0) && wide.iter().any(|v| *v < 0.0);
    outcome(
        small && unit && mixed,
        format!("L=0.1 positive: {small}; L=1 negative: {unit}; L=8 both signs: {mixed}"),
    )
}

fn blow_up() -> Outcome {
    let solve = |l: f64| solve_dirichlet(&ProblemSpec::torsion(Operator::Log, l).unwrap(), 1024).unwrap();
    let near = solve(0.7089);
    let far = solve(0.7040);
    let past = solve(0.7091);
    let ratio = near.sup_norm() / far.sup_norm();
    let pass = ratio > 10.0 && near.extreme_value() > 0.0 && past.extreme_value() < 0.0;
    outcome(
        pass,
        format!(
            "sup ratio {ratio:.1}; extreme at 0.7089 {:.4e}, at 0.7091 {:.4e}",
            near.extreme_value(),
            past.extreme_value()
        ),
    )
}

fn sign_changes(v: &[f64]) -> usize {
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let s: Vec<f64> = v.iter().filter(|x| x.abs() > 1e-9 * scale).map(|x| x.signum()).collect();
    s.windows(2).filter(|w| w[0] != w[1]).count()
}

fn eigenfunction_shapes() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for half in [0.1, 8.0] {
        let (_, s) = eigenfunctions(half, 128).unwrap();
        let first: Vec<f64> = s.vector(0).unwrap().iter().copied().collect();
        let second: Vec<f64> = s.vector(1).unwrap().iter().copied().collect();
        let one_sign = first.iter().all(|x| *x > 0.0) || first.iter().all(|x| *x < 0.0);
        let scale = second.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let anti = second
            .iter()
            .zip(second.iter().rev())
            .fold(0.0_f64, |m, (a, b)| m.max((a + b).abs()))
            / scale;
        let changes = sign_changes(&second);
        pass &= one_sign && anti < 1e-6 && changes == 1;
        parts.push(format!(
            "L={half}: first single-signed {one_sign}, second antisymmetry {anti:.1e}, sign changes {changes}"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn convergence_properties() -> Outcome {
    let ns = [25, 50, 100, 200, 400];
    let mut pass = true;
    let mut parts = Vec::new();
    for name in [ProblemName::Udef, ProblemName::U1, ProblemName::U2, ProblemName::U3] {
        let p = ProblemSpec::new(Operator::Log, name, 1.0).unwrap();
        let rows = convergence_table(&p, &ns, (-0.9, 0.9)).unwrap();
        let a: Vec<f64> = rows.iter().map(|r| r.l2_err).collect();
        let b: Vec<f64> = rows.iter().map(|r| r.l2loc_err).collect();
        let c: Vec<f64> = rows.iter().map(|r| r.linf_err).collect();
        let ok = strictly_decreasing(&a) && strictly_decreasing(&b) && strictly_decreasing(&c);
        pass &= ok;
        parts.push(format!(
            "{}: a_h {:.2e}..{:.2e} decreasing {}",
            name.as_str(),
            a[0],
            a[4],
            if ok { "yes" } else { "no" }
        ));
        if name == ProblemName::U3 {
            // log-log slope of the error against N
            let slopes: Vec<f64> = rows.iter().filter_map(|r| r.l2_slope).map(|s| -s).collect();
            let ok = slopes.iter().all(|s| *s <= -0.5);
            pass &= ok;
            parts.push(format!("u3 slopes vs N {:?}", slopes.iter().map(|s| format!("{s:.2}")).collect::<Vec<_>>()));
        }
    }
    let p = ProblemSpec::torsion(Operator::Frac(0.1), 1.0).unwrap();
    let rows = convergence_table(&p, &ns, (-0.9, 0.9)).unwrap();
    let a: Vec<f64> = rows.iter().map(|r| r.l2_err).collect();
    let ok = strictly_decreasing(&a);
    pass &= ok;
    parts.push(format!("frac torsion {:.2e}..{:.2e} decreasing {ok}", a[0], a[4]));
    outcome(pass, parts.join("; "))
}

fn min_max_monotone(l1_1024: &LkTable) -> Outcome {
    let lams: Vec<f64> = [32, 64, 128, 256]
        .iter()
        .map(|&n| discrete_eigenvalues(1.0, n, 1, EigenKind::Pencil).unwrap()[0])
        .collect();
    let bound = 2.0 * l1_1024.lk.ln() - 0.05;
    let monotone = lams.windows(2).all(|w| w[1] <= w[0]);
    let above = lams.iter().all(|l| *l >= bound);
    outcome(
        monotone && above,
        format!(
            "lambda_1h {:?}, lower bound {bound:.4}",
            lams.iter().map(|l| format!("{l:.6}")).collect::<Vec<_>>()
        ),
    )
}

#[test]
fn acceptance() {
    let total = Instant::now();
    let brackets = [(0.6, 0.8), (2.3, 2.5), (3.8, 4.0)];
    // the six golden-section searches dominate; run them side by side
    let (at256, at1024) = std::thread::scope(|s| {
        let h256: Vec<_> = brackets.iter().map(|&b| s.spawn(move || find_lk(256, b, 1e-5).unwrap())).collect();
        let h1024: Vec<_> = brackets.iter().map(|&b| s.spawn(move || find_lk(1024, b, 1e-5).unwrap())).collect();
        (
            h256.into_iter().map(|h| h.join().unwrap()).collect::<Vec<_>>(),
            h1024.into_iter().map(|h| h.join().unwrap()).collect::<Vec<_>>(),
        )
    });
    println!("L_k searches: {:.1?}", total.elapsed());

    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let checks: Vec<(&str, Check)> = vec![
        ("stiffness-derivative identity", Box::new(fd_identity)),
        ("s->0 mass limit", Box::new(mass_limit)),
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("L_k reproduction", Box::new(|| lk_reproduction(&at256, &at1024[0]))),
        ("eigenvalues by scaling", Box::new(|| eigenvalues_by_scaling(&at1024))),
        ("small-s cross-check", Box::new(|| small_s_cross_check(&at1024[0]))),
        ("matrix scaling law", Box::new(scaling_law)),
        ("torsion sign structure", Box::new(torsion_signs)),
        ("blow-up near L_1", Box::new(blow_up)),
        ("eigenfunction structure", Box::new(eigenfunction_shapes)),
        ("convergence properties", Box::new(convergence_properties)),
        ("discrete min-max monotonicity", Box::new(|| min_max_monotone(&at1024[0]))),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in checks.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:2} {tag} {name} [{:.2?}]: {}", k + 1, t.elapsed(), o.detail);
        if !o.pass {
            failed.push(k + 1);
        }
    }
    println!("total {:.1?}", total.elapsed());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
