//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p nlhelm --test acceptance`; pass criterion numbers
//! after `--` to run a subset. The process fails if any criterion outside
//! [`EXPECTED_FAILURES`] fails, or if an expected failure starts passing.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use common::{asymptotic_variation, random_perturbation, random_spectrum, source_corpus};
use nlhelm::angular::AngularSpectrum;
use nlhelm::farfield::{
    default_window, extract_outgoing, flux_balance, pairing_flux, FarFieldReport,
};
use nlhelm::fields::{
    apply_helmholtz, module_norm, Cutoff, Domain, Field, NormSpec, RadialGrid, Sign,
};
use nlhelm::flow::{check_weight, hamilton_flow, limits_many, Limit, PhasePoint, WeightSpec};
use nlhelm::lineig::{linear_eigenfunction, scattering_matrix, split_incoming};
use nlhelm::nonlin::{admissible, evaluate, minimal_admissible_p, NonlinearitySpec};
use nlhelm::resolvent::{Potential, Resolvent};
use nlhelm::solver::{
    contraction_probe, uniqueness_check, Solution, Solver, SolverConfig, RATIO_FLOOR,
};
use nlhelm::specialfn::{cylinder_ladder, cylinder_pair};
use nlhelm::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria known to fail, with the reason printed next to the FAIL line.
const EXPECTED_FAILURES: &[(usize, &str)] = &[(
    2,
    "the literal constant i^{(n-1)/2} is off by a factor i for n = 3; \
     the large-argument phase of J_ν gives g₀ = e^{−iπ(n−1)/2} f(−ω), checked in the same run",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn domain(dim: usize, nodes: usize, r_max: f64, big_l: usize) -> Arc<Domain> {
    Domain::new(
        1.0,
        RadialGrid::uniform(1.0, r_max, nodes).unwrap(),
        dim,
        big_l,
    )
    .unwrap()
}

fn bracket(strength: f64) -> Potential {
    Potential::Bracket {
        strength,
        exponent: 2.0,
    }
}

fn quintic(alpha: Complex64) -> NonlinearitySpec {
    NonlinearitySpec::gauge_power(alpha, 5).unwrap()
}

fn sized(solver: &Solver, f: &AngularSpectrum, eta: f64) -> AngularSpectrum {
    f.scaled(Complex64::new(eta / solver.data_size(f), 0.0))
}

fn relative_diff(a: &AngularSpectrum, b: &AngularSpectrum) -> f64 {
    let scale = a.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    a.max_abs_diff(b) / scale
}

fn special_functions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let log_uniform = |rng: &mut ChaCha8Rng| {
        (1e-3f64.ln() + rng.gen::<f64>() * (500f64.ln() - 1e-3f64.ln())).exp()
    };
    let (mut wronskian, mut recurrence, mut overflow) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..4000 {
        let nu = rng.gen_range(0.0..60.0);
        let x = log_uniform(&mut rng);
        match cylinder_pair(nu, x) {
            Ok(e) => wronskian = wronskian.max(e.wronskian_residual()),
            Err(Error::Range(_)) if nu / x > 1e3 => overflow += 1,
            Err(e) => return Outcome::new(false, format!("ν = {nu}, x = {x}: {e}")),
        }
        if nu >= 1.0 && nu <= 59.0 {
            if let (Ok(lo), Ok(mid), Ok(hi)) = (
                cylinder_pair(nu - 1.0, x),
                cylinder_pair(nu, x),
                cylinder_pair(nu + 1.0, x),
            ) {
                let lhs = lo.j + hi.j;
                let rhs = 2.0 * nu / x * mid.j;
                let scale = lo.j.abs().max(hi.j.abs()).max(rhs.abs());
                recurrence = recurrence.max((lhs - rhs).abs() / scale);
            }
        }
    }
    for &x in &[0.7, 3.0, 99.0, 400.0] {
        for e in cylinder_ladder(0.5, 30, x).unwrap() {
            wronskian = wronskian.max(e.wronskian_residual());
        }
    }
    let mut closed = 0.0f64;
    for &x in &[1e-3, 0.1, 1.0, PI / 2.0, 5.5, 31.0, 250.0, 500.0] {
        let amp = (2.0 / (PI * x)).sqrt();
        let e = Complex64::from_polar(1.0, x);
        let half = Complex64::new(0.0, -1.0) * amp * e;
        let three_halves = -amp * e * Complex64::new(1.0, 1.0 / x);
        let a = cylinder_pair(0.5, x).unwrap();
        let b = cylinder_pair(1.5, x).unwrap();
        closed = closed.max((a.h1 - half).norm() / half.norm());
        closed = closed.max((b.h1 - three_halves).norm() / three_halves.norm());
        closed = closed.max((a.j - amp * x.sin()).abs() / amp);
    }
    let j_half = cylinder_pair(0.5, PI / 2.0).unwrap().j;
    closed = closed.max((j_half - 2.0 / PI).abs() / (2.0 / PI));
    let worst = wronskian.max(recurrence).max(closed);
    Outcome::new(
        worst <= 1e-9,
        format!(
            "wronskian {wronskian:.1e}, recurrence {recurrence:.1e}, half-integer {closed:.1e} \
             (overflow reported at {overflow} extreme ν/x samples)"
        ),
    )
}

fn linear_scattering() -> Outcome {
    let n = 3;
    let d = domain(n, 4096, 200.0, 8);
    let res = Resolvent::new(&d, None).unwrap();
    let chi = Cutoff::new(2.0, d.grid()).unwrap();
    let literal = Complex64::new(0.0, 1.0).powf((n as f64 - 1.0) / 2.0);
    let derived = Complex64::from_polar(1.0, -PI * (n as f64 - 1.0) / 2.0);
    let (mut err_literal, mut err_derived, mut worst_exp, mut flux) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for seed in 0..20 {
        let f = random_spectrum(n, 8, 8, 1000 + seed);
        let lin = linear_eigenfunction(&f, &res).unwrap();
        let rep = extract_outgoing(&lin.u0, &f, &res, &chi, default_window(&lin.u0)).unwrap();
        let per_mode = |c: Complex64| {
            let expect = f.antipodal().scaled(c);
            rep.g
                .coeffs
                .iter()
                .zip(&expect.coeffs)
                .map(|(g, e)| (g - e).norm() / e.norm())
                .fold(0.0, f64::max)
        };
        err_literal = err_literal.max(per_mode(literal));
        err_derived = err_derived.max(per_mode(derived));
        worst_exp = worst_exp.max((rep.eps_prime - 1.0).abs());
        flux = flux.max(flux_balance(&f, &rep.g).unwrap());
    }
    Outcome::new(
        err_literal <= 1e-4 && worst_exp <= 0.15,
        format!(
            "per-mode error vs i^((n-1)/2) f(-ω) {err_literal:.2e}; vs e^(-iπ(n-1)/2) f(-ω) {err_derived:.2e}; \
             |ε′ − 1| ≤ {worst_exp:.3}; flux {flux:.1e}"
        ),
    )
}

fn resolvent_identity(potential: Option<Potential>) -> (bool, String) {
    let d = domain(3, 4096, 200.0, 6);
    let res = Resolvent::new(&d, potential).unwrap();
    let v = res.potential_samples();
    let band = d.grid().interior(3);
    let (mut worst, mut out_var, mut in_var) = (0.0f64, 0.0f64, f64::INFINITY);
    for f in source_corpus(&d, 10, 4, 2024) {
        let u = res.outgoing(&f).unwrap();
        let pu = apply_helmholtz(&u, v.as_deref()).unwrap();
        let rel = pu.sub(&f).unwrap().weighted_l2_on(0.4, band.clone())
            / f.weighted_l2_on(0.4, band.clone());
        worst = worst.max(rel);
        out_var = out_var.max(asymptotic_variation(&u, 1.0));
        in_var = in_var.min(asymptotic_variation(&u, -1.0));
    }
    (
        worst <= 1e-4 && out_var < 1e-2 && in_var > 0.5,
        format!("residual {worst:.1e}, outgoing-stripped variation {out_var:.1e}, incoming-stripped variation {in_var:.2}"),
    )
}

fn admissibility() -> Outcome {
    let found: Vec<u32> = (2..=6).map(minimal_admissible_p).collect();
    let sharp = (2..=6).all(|n| !admissible(minimal_admissible_p(n) - 1, n));
    Outcome::new(
        found == [6, 4, 3, 3, 2] && sharp,
        format!("minimal p for n = 2..6: {found:?}"),
    )
}

struct SolveRun {
    sol: Solution,
    far: FarFieldReport,
    res_window: Vec<f64>,
}

fn solve_quintic(
    nodes: usize,
    big_l: usize,
    f: &AngularSpectrum,
    potential: Option<Potential>,
) -> SolveRun {
    let d = domain(3, nodes, 200.0, big_l);
    let res = Resolvent::new(&d, potential).unwrap();
    let config = SolverConfig {
        k: Some(2),
        ..Default::default()
    };
    let solver = Solver::new(&res, quintic(Complex64::new(1.0, 0.0)), config).unwrap();
    let f = f.resized(big_l);
    let sol = solver.solve(&f, None).unwrap();
    let far = extract_outgoing(&sol.u, &f, &res, solver.cutoff(), default_window(&sol.u)).unwrap();
    let res_window = [(0.5, 0.85), (0.7, 0.95)]
        .iter()
        .map(|&(a, b)| {
            extract_outgoing(&sol.u, &f, &res, solver.cutoff(), (a * 200.0, b * 200.0))
                .unwrap()
                .eps_prime
        })
        .collect();
    SolveRun {
        sol,
        far,
        res_window,
    }
}

fn nonlinear_solve(potential: Option<Potential>) -> (bool, String) {
    let base_domain = domain(3, 4096, 200.0, 8);
    let res = Resolvent::new(&base_domain, potential).unwrap();
    let solver = Solver::new(
        &res,
        quintic(Complex64::new(1.0, 0.0)),
        SolverConfig {
            k: Some(2),
            ..Default::default()
        },
    )
    .unwrap();
    let f = sized(&solver, &random_spectrum(3, 8, 4, 55), 1e-2);
    let base = solve_quintic(4096, 8, &f, potential);
    let fine = solve_quintic(8192, 8, &f, potential);
    let wide = solve_quintic(4096, 12, &f, potential);
    let rep = &base.sol.report;
    let monotone = rep.converged && rep.is_monotone_after(0, RATIO_FLOOR);
    let residual = rep.final_residual();
    let dg = relative_diff(&base.far.g, &fine.far.g)
        .max(relative_diff(&base.far.g.resized(12), &wide.far.g));
    let eps = base.far.eps_prime;
    let shift = base
        .res_window
        .iter()
        .map(|e| (e / eps - 1.0).abs())
        .fold(0.0, f64::max);
    (
        monotone && residual <= 1e-4 && dg <= 1e-3 && eps > 0.0 && shift <= 0.2,
        format!(
            "steps [{}], residual {residual:.1e}, g refinement change {dg:.1e}, ε′ {eps:.3} (window shift {:.0}%)",
            rep.step_norms.iter().map(|s| format!("{s:.1e}")).collect::<Vec<_>>().join(", "),
            100.0 * shift
        ),
    )
}

fn contraction_scaling() -> Outcome {
    let d = domain(3, 2048, 100.0, 4);
    let res = Resolvent::new(&d, None).unwrap();
    let config = SolverConfig::default();
    let spec = quintic(Complex64::new(1.0, 0.0));
    let solver = Solver::new(&res, spec.clone(), config.clone()).unwrap();
    let unit = sized(&solver, &random_spectrum(3, 4, 3, 3), 1.0);
    let scales: Vec<f64> = (0..5).map(|j| 15.0 * 10f64.powf(j as f64 / 4.0)).collect();
    let table = contraction_probe(&res, &spec, &config, &unit, &scales).unwrap();
    let all = table.rows.iter().all(|r| r.converged && r.ratio.is_some());
    let slope = table.slope.unwrap_or(f64::NAN);
    Outcome::new(
        all && (slope / 4.0 - 1.0).abs() <= 0.2,
        format!(
            "η {:.0}..{:.0}, ratios [{}], slope {slope:.3} (p − 1 = 4)",
            table.rows[0].eta,
            table.rows.last().unwrap().eta,
            table
                .rows
                .iter()
                .map(|r| r.ratio.map_or("-".into(), |q| format!("{q:.1e}")))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn flux() -> Outcome {
    let lin_d = domain(3, 4096, 200.0, 8);
    let lin_res = Resolvent::new(&lin_d, None).unwrap();
    let chi = Cutoff::new(2.0, lin_d.grid()).unwrap();
    let mut linear = 0.0f64;
    for seed in 0..5 {
        let f = random_spectrum(3, 8, 8, 300 + seed);
        let lin = linear_eigenfunction(&f, &lin_res).unwrap();
        let rep = extract_outgoing(&lin.u0, &f, &lin_res, &chi, default_window(&lin.u0)).unwrap();
        linear = linear.max(flux_balance(&f, &rep.g).unwrap());
    }
    let d = domain(3, 4096, 200.0, 4);
    let res = Resolvent::new(&d, None).unwrap();
    let run = |alpha: Complex64, eta: f64| {
        let spec = quintic(alpha);
        let solver = Solver::new(&res, spec.clone(), SolverConfig::default()).unwrap();
        let f = sized(&solver, &random_spectrum(3, 4, 2, 7), eta);
        let sol = solver.solve(&f, None).unwrap();
        let rep =
            extract_outgoing(&sol.u, &f, &res, solver.cutoff(), default_window(&sol.u)).unwrap();
        let predicted = pairing_flux(&sol.u, &evaluate(&spec, &sol.u).unwrap()).unwrap();
        let measured = rep.g.l2_norm().powi(2) - f.l2_norm().powi(2);
        (flux_balance(&f, &rep.g).unwrap(), measured, predicted)
    };
    let real = [20.0, 60.0]
        .map(|eta| run(Complex64::new(1.0, 0.0), eta).0)
        .into_iter()
        .fold(0.0, f64::max);
    let (_, measured, predicted) = run(Complex64::new(0.0, 1.0), 60.0);
    let agree = measured != 0.0 && predicted != 0.0 && measured.signum() == predicted.signum();
    Outcome::new(
        linear <= 1e-8 && real <= 1e-3 && agree,
        format!(
            "linear {linear:.1e}, real α {real:.1e}, α = i: ‖g‖² − ‖f‖² = {measured:.3e} vs pairing {predicted:.3e}"
        ),
    )
}

fn uniqueness() -> Outcome {
    let d = domain(3, 2048, 100.0, 4);
    let res = Resolvent::new(&d, None).unwrap();
    let config = SolverConfig::default();
    let spec = quintic(Complex64::new(1.0, 0.0));
    let solver = Solver::new(&res, spec.clone(), config.clone()).unwrap();
    let f = sized(&solver, &random_spectrum(3, 4, 3, 9), 10.0);
    let starts: Vec<Field> = (0..5)
        .map(|s| random_perturbation(&d, 1e-3, 500 + s))
        .collect();
    match uniqueness_check(&res, &spec, &config, &f, &starts) {
        Ok(rep) => Outcome::new(
            rep.distances.iter().all(|&x| x <= rep.tolerance),
            format!(
                "distances [{}] (tolerance {:.0e})",
                rep.distances
                    .iter()
                    .map(|x| format!("{x:.1e}"))
                    .collect::<Vec<_>>()
                    .join(", "),
                rep.tolerance
            ),
        ),
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

fn module_dichotomy() -> Outcome {
    let plus = NormSpec {
        s: 0,
        ell: -0.6,
        kappa: 1,
        k: 1,
        sign: Sign::Plus,
    };
    let f = random_spectrum(3, 2, 2, 1);
    let mut rows = Vec::new();
    for r_max in [50.0, 100.0, 200.0] {
        let d = domain(3, (r_max * 20.0) as usize, r_max, 2);
        let res = Resolvent::new(&d, None).unwrap();
        let lin = linear_eigenfunction(&f, &res).unwrap();
        let chi = Cutoff::new(2.0, d.grid()).unwrap();
        let split = split_incoming(&lin, &chi, &res).unwrap();
        let source = &source_corpus(&d, 1, 2, 77)[0];
        let outgoing = res.outgoing(source).unwrap();
        rows.push([
            module_norm(&split.u_minus, &plus).unwrap(),
            module_norm(&split.u_plus, &plus).unwrap(),
            module_norm(&outgoing, &plus).unwrap(),
        ]);
    }
    let growth = |j: usize| (rows[1][j] / rows[0][j], rows[2][j] / rows[1][j]);
    let (m1, m2) = growth(0);
    let (p1, p2) = growth(1);
    let (o1, o2) = growth(2);
    let diverges = m1 > 1.5 && m2 > 1.5;
    let stable = [p1, p2, o1, o2].iter().all(|&g| g < 1.1);
    Outcome::new(
        diverges && stable,
        format!(
            "norm growth per doubling of r_max: u₋ {m1:.2}, {m2:.2}; u₊ {p1:.3}, {p2:.3}; R F {o1:.3}, {o2:.3}"
        ),
    )
}

fn random_sigma_point(rng: &mut ChaCha8Rng, dim: usize, lambda: f64) -> PhasePoint {
    let omega: Vec<f64> = loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 0.1 && len < 1.0 {
            break v.iter().map(|x| x / len).collect();
        }
    };
    let tangent: Vec<f64> = loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let along: f64 = v.iter().zip(&omega).map(|(a, b)| a * b).sum();
        let t: Vec<f64> = v.iter().zip(&omega).map(|(a, b)| a - along * b).collect();
        if t.iter().map(|x| x * x).sum::<f64>() > 1e-2 {
            break t;
        }
    };
    let nu = rng.gen_range(-0.95..0.95) * lambda;
    PhasePoint::from_sphere(
        0.0,
        &omega,
        &tangent,
        nu,
        (lambda * lambda - nu * nu).sqrt(),
    )
    .unwrap()
}

fn flow_suite() -> Outcome {
    let lambda = 1.0;
    let horizon = 20.0;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let points: Vec<PhasePoint> = (0..100)
        .map(|j| random_sigma_point(&mut rng, 2 + j % 2, lambda))
        .collect();
    let found = limits_many(&points, horizon, lambda).unwrap();
    let classified = found
        .iter()
        .filter(|&&l| l == (Limit::RMinus, Limit::RPlus))
        .count();
    let standard = WeightSpec::standard(0.05);
    let reversed = WeightSpec::Interpolated {
        delta: 0.05,
        flat: 0.1,
        reversed: true,
    };
    let (mut drift, mut monotone, mut varying, mut rejected) = (0.0f64, 0usize, 0usize, 0usize);
    for p in &points {
        for span in [(0.0, horizon), (0.0, -horizon)] {
            let traj = hamilton_flow(p, span, lambda).unwrap();
            drift = drift.max(traj.energy_drift());
            if let Ok(report) = check_weight(&standard, &traj, lambda) {
                monotone += 1;
                let (lo, hi) = report
                    .l_plus
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                        (a.min(v), b.max(v))
                    });
                // Trajectories that stay inside a flat end cannot tell the two specs apart.
                if hi - lo > 1e-6 {
                    varying += 1;
                    rejected += matches!(
                        check_weight(&reversed, &traj, lambda),
                        Err(Error::WeightNotMonotone { .. })
                    ) as usize;
                }
            }
        }
    }
    let total = 2 * points.len();
    Outcome::new(
        drift <= 1e-8
            && classified == points.len()
            && monotone == total
            && varying > 0
            && rejected == varying,
        format!(
            "energy drift {drift:.1e}; {classified}/100 backward→R₋ forward→R₊; \
             standard weight monotone on {monotone}/{total}; reversed rejected on {rejected}/{varying} \
             trajectories where the weight varies"
        ),
    )
}

fn potential_extension() -> Outcome {
    let d = domain(3, 1600, 80.0, 4);
    let free = scattering_matrix(&Resolvent::new(&d, None).unwrap()).unwrap();
    let phases =
        |c: f64| scattering_matrix(&Resolvent::new(&d, Some(bracket(c))).unwrap()).unwrap();
    let full = phases(0.1);
    let half = phases(0.05);
    let unitarity = full
        .iter()
        .chain(&half)
        .map(|s| (s.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let born = full
        .iter()
        .zip(&half)
        .zip(&free)
        .map(|((a, b), f)| ((a / f).arg() / (b / f).arg() / 2.0 - 1.0).abs())
        .fold(0.0, f64::max);
    let (res_ok, res_detail) = resolvent_identity(Some(bracket(0.1)));
    let (solve_ok, solve_detail) = nonlinear_solve(Some(bracket(0.1)));
    Outcome::new(
        unitarity <= 1e-6 && born <= 0.1 && res_ok && solve_ok,
        format!(
            "||σ_l| − 1| {unitarity:.1e}, Born halving off by {:.1}%; resolvent: {res_detail}; solve: {solve_detail}",
            100.0 * born
        ),
    )
}

fn main() -> ExitCode {
    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "special functions", Box::new(special_functions)),
        (2, "flat linear scattering", Box::new(linear_scattering)),
        (
            3,
            "resolvent identity and outgoing selection",
            Box::new(|| {
                let (ok, detail) = resolvent_identity(None);
                Outcome::new(ok, detail)
            }),
        ),
        (4, "admissibility table", Box::new(admissibility)),
        (
            5,
            "nonlinear solve",
            Box::new(|| {
                let (ok, detail) = nonlinear_solve(None);
                Outcome::new(ok, detail)
            }),
        ),
        (6, "contraction-rate scaling", Box::new(contraction_scaling)),
        (7, "flux balance", Box::new(flux)),
        (8, "uniqueness by initialization", Box::new(uniqueness)),
        (9, "module-norm dichotomy", Box::new(module_dichotomy)),
        (10, "flow suite", Box::new(flow_suite)),
        (11, "potential extension", Box::new(potential_extension)),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut unexpected = 0;
    for (id, name, run) in &criteria {
        if !selected.is_empty() && !selected.contains(id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        let expected = EXPECTED_FAILURES.iter().find(|e| e.0 == *id);
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {verdict}: {name} ({:.1} s): {}",
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        match (outcome.pass, expected) {
            (false, Some((_, why))) => println!("             expected failure: {why}"),
            (true, Some(_)) => {
                println!("             listed as an expected failure but passed");
                unexpected += 1;
            }
            (false, None) => unexpected += 1,
            (true, None) => {}
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
