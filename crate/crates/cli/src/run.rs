//! The six subcommands.

use std::io::Write;
use std::path::PathBuf;

use nlhelm::farfield::{
    default_window, extract_outgoing, pairing_flux, write_pattern_csv, write_pattern_samples_csv,
    FarFieldReport,
};
use nlhelm::fields::io::read_field;
use nlhelm::fields::{Cutoff, Field};
use nlhelm::flow::{check_weight, classify_limit, hamilton_flow, Limit, PhasePoint, Trajectory};
use nlhelm::lineig::{
    implied_global_constant, linear_eigenfunction, scattering_matrix, split_incoming,
};
use nlhelm::nonlin::{evaluate, validate_with_delta, AdmissibilityReport};
use nlhelm::resolvent::Resolvent;
use nlhelm::solver::{contraction_probe, IterationReport, Solver};
use nlhelm::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::{Emitter, FarFieldSummary, RunManifest};

/// Validates the configuration and the admissibility of the nonlinearity.
pub fn check(cfg: &RunConfig) -> CliResult<AdmissibilityReport> {
    cfg.validate()?;
    let spec = cfg.nonlinearity.spec()?;
    let n = cfg.problem.n;
    let report = validate_with_delta(&spec, n, cfg.solver.delta)?;
    if !report.condition_ok {
        return Err(Error::Config(format!(
            "p = {} is not admissible for n = {n}: (p − 1)(n − 1)/2 = {} must exceed 2",
            report.p,
            (report.p as f64 - 1.0) * (n as f64 - 1.0) / 2.0
        ))
        .into());
    }
    Ok(report)
}

fn write_iterations(report: &IterationReport, out: &mut Vec<u8>) -> CliResult<()> {
    writeln!(out, "step,step_norm,relative_step,ratio,residual")?;
    for (j, s) in report.step_norms.iter().enumerate() {
        let ratio = j
            .checked_sub(1)
            .and_then(|i| report.ratios.get(i))
            .map(|q| format!("{q:e}"))
            .unwrap_or_default();
        let residual = report
            .residuals
            .get(j)
            .map(|r| format!("{r:e}"))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{s:e},{:e},{ratio},{residual}",
            j + 1,
            report.relative_steps[j]
        )?;
    }
    Ok(())
}

fn write_far_field(
    em: &mut Emitter,
    prefix: &str,
    rep: &FarFieldReport,
    field: &Field,
) -> CliResult<()> {
    em.csv(&format!("{prefix}.csv"), |out| {
        Ok(write_pattern_csv(&rep.g, out)?)
    })?;
    em.csv(&format!("{prefix}_samples.csv"), |out| {
        Ok(write_pattern_samples_csv(
            &rep.g,
            field.domain().sphere(),
            out,
        )?)
    })?;
    em.csv("residual_curve.csv", |out| {
        writeln!(out, "r,residual")?;
        for (r, v) in &rep.residual_curve {
            writeln!(out, "{r:e},{v:e}")?;
        }
        Ok(())
    })
}

fn window(cfg: &RunConfig, u: &Field) -> (f64, f64) {
    cfg.farfield.window.unwrap_or_else(|| default_window(u))
}

pub fn linear(cfg: &RunConfig, serial: bool) -> CliResult<RunManifest> {
    cfg.validate()?;
    let domain = cfg.domain()?;
    let f = cfg.incoming()?;
    let mut em = Emitter::new("linear", cfg, serial)?;
    let res = em.time("resolvent", || {
        Resolvent::new(&domain, cfg.problem.potential)
    })?;
    let (lin, phases) = em.time("eigenfunction", || -> CliResult<_> {
        Ok((linear_eigenfunction(&f, &res)?, scattering_matrix(&res)?))
    })?;
    let chi = Cutoff::new(cfg.discretization.r0, domain.grid())?;
    let split = em.time("split", || split_incoming(&lin, &chi, &res))?;
    let rep = em.time("farfield", || {
        extract_outgoing(&lin.u0, &f, &res, &chi, window(cfg, &lin.u0))
    })?;
    em.field("u0.hfld", &lin.u0)?;
    em.csv("g0.csv", |out| Ok(write_pattern_csv(&lin.g0, out)?))?;
    em.csv("phases.csv", |out| {
        writeln!(out, "l,re,im,abs,arg")?;
        for (l, s) in phases.iter().enumerate() {
            writeln!(
                out,
                "{l},{:e},{:e},{:e},{:e}",
                s.re,
                s.im,
                s.norm(),
                s.arg()
            )?;
        }
        Ok(())
    })?;
    write_far_field(&mut em, "pattern", &rep, &lin.u0)?;
    let c = implied_global_constant(&phases);
    em.manifest.farfield = Some(FarFieldSummary::new(&rep, &f)?);
    em.manifest.summary = json!({
        "split_cross_check": split.cross_check,
        "extracted_vs_exact_g0": rep.g.max_abs_diff(&lin.g0),
        "implied_global_constant": [c.re, c.im],
    });
    em.finish()
}

pub fn solve(cfg: &RunConfig, serial: bool) -> CliResult<RunManifest> {
    cfg.validate()?;
    let domain = cfg.domain()?;
    let f = cfg.incoming()?;
    let spec = cfg.nonlinearity.spec()?;
    let mut em = Emitter::new("solve", cfg, serial)?;
    let res = em.time("resolvent", || {
        Resolvent::new(&domain, cfg.problem.potential)
    })?;
    let solver = Solver::new(&res, spec.clone(), cfg.solver_config())?;
    let sol = em.time("solve", || solver.solve(&f, None))?;
    let rep = em.time("farfield", || {
        extract_outgoing(&sol.u, &f, &res, solver.cutoff(), window(cfg, &sol.u))
    })?;
    let n_u = evaluate(&spec, &sol.u)?;
    let pairing = pairing_flux(&sol.u, &n_u)?;
    em.field("u.hfld", &sol.u)?;
    em.field("w.hfld", &sol.w)?;
    em.csv("iterations.csv", |out| write_iterations(&sol.report, out))?;
    write_far_field(&mut em, "pattern", &rep, &sol.u)?;
    em.manifest.tail_bound = Some(sol.report.tail_bound);
    em.manifest.iteration = Some(sol.report.clone());
    em.manifest.farfield = Some(FarFieldSummary::new(&rep, &f)?);
    em.manifest.summary = json!({
        "admissibility": solver.admissibility(),
        "eta": solver.data_size(&f),
        "pairing_flux": pairing,
        "measured_flux": rep.g.l2_norm().powi(2) - f.l2_norm().powi(2),
        "split_cross_check": sol.split.cross_check,
    });
    em.finish()
}

/// Extracts `g` from a stored field; `input` overrides `farfield.input`.
pub fn farfield(cfg: &RunConfig, input: Option<PathBuf>, serial: bool) -> CliResult<RunManifest> {
    cfg.validate()?;
    let path = input
        .or_else(|| cfg.farfield.input.clone())
        .unwrap_or_else(|| cfg.outputs.directory.join("u.hfld"));
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "field file {} does not exist",
            path.display()
        )));
    }
    let u = read_field(&path)?;
    let domain = u.domain().clone();
    if domain.dim() != cfg.problem.n || domain.lambda() != cfg.problem.lambda {
        return Err(Error::Config(format!(
            "{} holds n = {}, λ = {} but the config has n = {}, λ = {}",
            path.display(),
            domain.dim(),
            domain.lambda(),
            cfg.problem.n,
            cfg.problem.lambda
        ))
        .into());
    }
    let f = cfg.incoming()?;
    let modes = f.modes;
    if (0..modes.count()).any(|k| modes.degree(k) > domain.max_degree() && f.coeffs[k].norm() > 0.0)
    {
        return Err(Error::Config(format!(
            "incoming data has content above the band limit {} of the stored field",
            domain.max_degree()
        ))
        .into());
    }
    let f = f.resized(domain.max_degree());
    let mut em = Emitter::new("farfield", cfg, serial)?;
    let res = em.time("resolvent", || {
        Resolvent::new(&domain, cfg.problem.potential)
    })?;
    let chi = Cutoff::new(cfg.discretization.r0, domain.grid())?;
    let rep = em.time("farfield", || {
        extract_outgoing(&u, &f, &res, &chi, window(cfg, &u))
    })?;
    write_far_field(&mut em, "pattern", &rep, &u)?;
    em.manifest.farfield = Some(FarFieldSummary::new(&rep, &f)?);
    em.manifest.summary = json!({ "input": path.display().to_string() });
    em.finish()
}

fn random_start(
    rng: &mut ChaCha8Rng,
    dim: usize,
    lambda: f64,
    x_max: f64,
) -> CliResult<PhasePoint> {
    let unit =
        |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect() };
    let omega: Vec<f64> = loop {
        let v = unit(rng);
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 0.1 && len <= 1.0 {
            break v.iter().map(|x| x / len).collect();
        }
    };
    let tangent: Vec<f64> = loop {
        let v = unit(rng);
        let along: f64 = v.iter().zip(&omega).map(|(a, b)| a * b).sum();
        let t: Vec<f64> = v.iter().zip(&omega).map(|(a, b)| a - along * b).collect();
        if t.iter().map(|x| x * x).sum::<f64>() > 1e-2 {
            break t;
        }
    };
    let nu = rng.gen_range(-0.95..0.95) * lambda;
    let x = if x_max > 0.0 {
        rng.gen_range(0.0..x_max)
    } else {
        0.0
    };
    Ok(PhasePoint::from_sphere(
        x,
        &omega,
        &tangent,
        nu,
        (lambda * lambda - nu * nu).sqrt(),
    )?)
}

fn limit_name(l: Limit) -> &'static str {
    match l {
        Limit::RPlus => "r_plus",
        Limit::RMinus => "r_minus",
        Limit::Interior => "interior",
        Limit::Undecided => "undecided",
    }
}

pub fn flow(cfg: &RunConfig, serial: bool) -> CliResult<RunManifest> {
    cfg.validate()?;
    let fl = &cfg.flow;
    let lambda = cfg.problem.lambda;
    let mut rng = ChaCha8Rng::seed_from_u64(fl.seed);
    let starts: Vec<PhasePoint> = (0..fl.starts)
        .map(|_| random_start(&mut rng, cfg.problem.n, lambda, fl.x_max))
        .collect::<CliResult<_>>()?;
    let mut em = Emitter::new("flow", cfg, serial)?;
    let runs: Vec<(Trajectory, Trajectory)> = em.time("integrate", || {
        starts
            .par_iter()
            .map(|p| {
                Ok((
                    hamilton_flow(p, (0.0, -fl.horizon), lambda)?,
                    hamilton_flow(p, (0.0, fl.horizon), lambda)?,
                ))
            })
            .collect::<nlhelm::Result<_>>()
    })?;
    let mut first_violation = None;
    let mut rows = Vec::with_capacity(runs.len());
    let (mut drift, mut classified, mut monotone) = (0.0f64, 0usize, 0usize);
    for (back, fwd) in &runs {
        let limits = (classify_limit(back, lambda), classify_limit(fwd, lambda));
        classified += (limits == (Limit::RMinus, Limit::RPlus)) as usize;
        let d = back.energy_drift().max(fwd.energy_drift());
        drift = drift.max(d);
        let checks = [
            check_weight(&fl.weight, back, lambda),
            check_weight(&fl.weight, fwd, lambda),
        ];
        let ok = checks.iter().all(|c| c.is_ok());
        monotone += ok as usize;
        if first_violation.is_none() {
            first_violation = checks.into_iter().find_map(|c| c.err());
        }
        rows.push((limits, d, ok));
    }
    em.csv("limits.csv", |out| {
        writeln!(out, "index,backward,forward,energy_drift,weight_monotone")?;
        for (j, ((b, f), d, ok)) in rows.iter().enumerate() {
            writeln!(out, "{j},{},{},{d:e},{ok}", limit_name(*b), limit_name(*f))?;
        }
        Ok(())
    })?;
    for (j, (back, fwd)) in runs.iter().take(fl.dump).enumerate() {
        for (tag, traj) in [("backward", back), ("forward", fwd)] {
            em.csv(&format!("trajectories/{j:03}_{tag}.csv"), |out| {
                Ok(traj.write_csv(&fl.weight, lambda, out)?)
            })?;
        }
    }
    em.manifest.summary = json!({
        "starts": runs.len(),
        "incoming_to_outgoing": classified,
        "max_energy_drift": drift,
        "weight_monotone": monotone,
    });
    let manifest = em.finish()?;
    match first_violation {
        Some(e) => Err(e.into()),
        None => Ok(manifest),
    }
}

pub fn probe(cfg: &RunConfig, serial: bool) -> CliResult<RunManifest> {
    cfg.validate()?;
    let domain = cfg.domain()?;
    let f = cfg.incoming()?;
    let spec = cfg.nonlinearity.spec()?;
    let mut em = Emitter::new("probe", cfg, serial)?;
    let res = em.time("resolvent", || {
        Resolvent::new(&domain, cfg.problem.potential)
    })?;
    let table = em.time("probe", || {
        contraction_probe(&res, &spec, &cfg.solver_config(), &f, &cfg.probe.scales)
    })?;
    em.csv("probe.csv", |out| {
        writeln!(out, "scale,eta,ratio,iterations,converged")?;
        for r in &table.rows {
            let ratio = r.ratio.map(|q| format!("{q:e}")).unwrap_or_default();
            writeln!(
                out,
                "{:e},{:e},{ratio},{},{}",
                r.scale, r.eta, r.iterations, r.converged
            )?;
        }
        Ok(())
    })?;
    let p = spec.min_degree();
    em.manifest.summary = json!({
        "slope": table.slope,
        "expected_slope": p as f64 - 1.0,
        "rows": table.rows,
    });
    em.finish()
}
