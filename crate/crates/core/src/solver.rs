//! Fixed-point iteration `w ↦ u₊ + R(λ + i0) N[u₋ + w]` and its diagnostics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::AngularSpectrum;
use crate::error::{Error, Result};
use crate::fields::{apply_helmholtz, module_norm, Cutoff, Field, NormSpec, Sign};
use crate::linalg::solve_dense;
use crate::lineig::{linear_eigenfunction, split_incoming, IncomingSplit, LinearEigenfunction};
use crate::nonlin::{evaluate, validate_with_delta, AdmissibilityReport, NonlinearitySpec};
use crate::resolvent::{Direction, Resolvent};

/// Consecutive non-contracting steps that abort the iteration.
pub const DIVERGENCE_RUN: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// `δ ∈ (0, 1/(4p)]`; the largest value when absent.
    pub delta: Option<f64>,
    pub tol_step: f64,
    /// Bound on `‖Pu − N[u]‖ / ‖N[u]‖` in `H^{0,ℓ+1}` over interior nodes.
    pub tol_residual: f64,
    pub max_iter: usize,
    /// Angular module order; the smallest integer above `(n − 1)/2` when absent.
    pub k: Option<u32>,
    /// Inner radius `R0` of the cutoff defining `u₋`.
    pub r0: f64,
    /// History length for Anderson mixing; 0 is plain Picard.
    pub anderson: usize,
    /// Warn when `‖f‖_{H^{k+2}}` exceeds this.
    pub smallness_budget: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            delta: None,
            tol_step: 1e-10,
            tol_residual: 1e-6,
            max_iter: 60,
            k: None,
            r0: 2.0,
            anderson: 0,
            smallness_budget: None,
        }
    }
}

impl SolverConfig {
    pub fn module_order(&self, n: usize) -> u32 {
        self.k.unwrap_or((n as u32 - 1) / 2 + 1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    /// `‖w_{j+1} − w_j‖` in the `H₊^{2,ℓ;1,k}` module norm.
    pub step_norms: Vec<f64>,
    /// Step norms divided by `‖w_{j+1}‖`.
    pub relative_steps: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Relative residual `‖Pu − N[u]‖_{0,ℓ+1} / ‖N[u]‖_{0,ℓ+1}` after each step.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub accelerated: bool,
    /// Largest resolvent tail bound seen.
    pub tail_bound: f64,
}

impl IterationReport {
    pub fn iterations(&self) -> usize {
        self.step_norms.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }

    /// Contraction ratio measured before rounding noise takes over: the last
    /// ratio whose step is still above `floor` relative to the iterate. The
    /// step out of the initial iterate is not counted.
    pub fn asymptotic_ratio(&self, floor: f64) -> Option<f64> {
        (2..self.step_norms.len())
            .filter(|&j| self.relative_steps[j] > floor && self.step_norms[j - 1] > 0.0)
            .map(|j| self.ratios[j - 1])
            .last()
    }

    /// Whether step norms decrease strictly after the first `skip` steps, until
    /// they reach `floor` relative to the iterate.
    pub fn is_monotone_after(&self, skip: usize, floor: f64) -> bool {
        (skip + 1..self.step_norms.len())
            .filter(|&j| self.relative_steps[j] > floor)
            .all(|j| self.step_norms[j] < self.step_norms[j - 1])
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: Field,
    pub w: Field,
    pub linear: LinearEigenfunction,
    pub split: IncomingSplit,
    /// `r^{(n−1)/2} e^{−iλr} w` at the outermost interior node.
    pub g_preview: AngularSpectrum,
    pub report: IterationReport,
    pub admissibility: AdmissibilityReport,
}

pub struct Solver<'a> {
    res: &'a Resolvent,
    spec: NonlinearitySpec,
    config: SolverConfig,
    chi: Cutoff,
    norm: NormSpec,
    admissibility: AdmissibilityReport,
}

impl<'a> Solver<'a> {
    pub fn new(res: &'a Resolvent, spec: NonlinearitySpec, config: SolverConfig) -> Result<Self> {
        let d = res.domain();
        let n = d.dim();
        let admissibility = validate_with_delta(&spec, n, config.delta)?;
        if !admissibility.condition_ok {
            return Err(Error::Config(format!(
                "degree p = {} is not admissible for n = {n}: need (p-1)(n-1)/2 > 2",
                admissibility.p
            )));
        }
        if !(config.tol_step > 0.0 && config.tol_residual > 0.0) {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        if config.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        let k = config.module_order(n);
        if (k as f64) <= (n as f64 - 1.0) / 2.0 {
            return Err(Error::Config(format!(
                "module order k = {k} must exceed (n-1)/2 = {}",
                (n as f64 - 1.0) / 2.0
            )));
        }
        let chi = Cutoff::new(config.r0, d.grid())?;
        let norm = NormSpec {
            s: 2,
            ell: admissibility.ell,
            kappa: 1,
            k,
            sign: Sign::Plus,
        };
        Ok(Self {
            res,
            spec,
            config,
            chi,
            norm,
            admissibility,
        })
    }

    pub fn norm(&self) -> &NormSpec {
        &self.norm
    }

    pub fn admissibility(&self) -> &AdmissibilityReport {
        &self.admissibility
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.chi
    }

    /// `‖f‖_{H^{k+2}(S^{n−1})}`.
    pub fn data_size(&self, f: &AngularSpectrum) -> f64 {
        f.sobolev_norm(self.norm.k as f64 + 2.0)
    }

    /// `‖P v − N[u]‖ / ‖N[u]‖` with `v = w − u₊`, since `P u₀ = 0` and `P u = P v + P u₀`.
    fn residual(&self, v: &Field, n_u: &Field) -> Result<f64> {
        let d = self.res.domain();
        let pot = self.res.potential_samples();
        let pu = apply_helmholtz(v, pot.as_deref())?;
        let band = d.grid().interior(3);
        let ell = self.admissibility.ell + 1.0;
        let scale = n_u.weighted_l2_on(ell, band.clone());
        let res = pu.sub(n_u)?.weighted_l2_on(ell, band);
        Ok(if scale > 0.0 { res / scale } else { res })
    }

    pub fn solve(&self, f: &AngularSpectrum, w_init: Option<&Field>) -> Result<Solution> {
        let d = self.res.domain();
        if let Some(budget) = self.config.smallness_budget {
            let size = self.data_size(f);
            if size > budget {
                log::warn!(
                    "incoming data size {size:.3e} exceeds the smallness budget {budget:.3e}"
                );
            }
        }
        let linear = linear_eigenfunction(f, self.res)?;
        let split = split_incoming(&linear, &self.chi, self.res)?;
        let (u_minus, u_plus) = (&split.u_minus, &split.u_plus);
        // Iterate on v = w − u₊ so that small corrections are not lost against u₊.
        let mut v = match w_init {
            Some(w0) => {
                if !w0.domain().same_as(d) {
                    return Err(Error::Shape(
                        "initial iterate lives on a different domain".into(),
                    ));
                }
                w0.sub(u_plus)?
            }
            None => u_plus.scale(Complex64::new(-1.0, 0.0)),
        };
        let u0 = u_minus.add(u_plus)?;
        let mut report = IterationReport {
            accelerated: self.config.anderson > 0,
            ..Default::default()
        };
        let mut mixer = Anderson::new(self.config.anderson);
        let mut run = 0usize;
        for _ in 0..self.config.max_iter {
            let n_u = evaluate(&self.spec, &u0.add(&v)?)?;
            let out = self.res.apply(&n_u, Direction::Outgoing)?;
            report.tail_bound = report.tail_bound.max(out.tail_bound);
            let next = if self.config.anderson > 0 {
                let mixed = mixer.mix(v.modes(), out.field.modes());
                Field::from_modes(d, mixed)?
            } else {
                out.field
            };
            let diff = next.sub(&v)?;
            let step = module_norm(&diff, &self.norm)?;
            let size = module_norm(&u_plus.add(&next)?, &self.norm)?;
            let rel = if size > 0.0 { step / size } else { step };
            if let Some(&prev) = report.step_norms.last() {
                let ratio = if !step.is_finite() {
                    f64::INFINITY
                } else if prev > 0.0 {
                    step / prev
                } else {
                    0.0
                };
                report.ratios.push(ratio);
                run = if ratio >= 1.0 { run + 1 } else { 0 };
            }
            report.step_norms.push(step);
            report.relative_steps.push(rel);
            v = next;
            let n_u = evaluate(&self.spec, &u0.add(&v)?)?;
            report.residuals.push(self.residual(&v, &n_u)?);
            if rel <= self.config.tol_step {
                report.converged = true;
                break;
            }
            if run >= DIVERGENCE_RUN {
                return Err(Error::NonContraction {
                    eta: self.data_size(f),
                    last_ratio: *report.ratios.last().unwrap(),
                    consecutive: run,
                });
            }
        }
        let w = u_plus.add(&v)?;
        if !report.converged {
            return Err(Error::NotConverged {
                max_iter: self.config.max_iter,
                last_step: report.relative_steps.last().copied().unwrap_or(f64::NAN),
            });
        }
        if report.final_residual() > self.config.tol_residual {
            log::warn!(
                "fixed point reached but residual {:.2e} exceeds tol_residual {:.0e}",
                report.final_residual(),
                self.config.tol_residual
            );
        }
        if report.tail_bound > 1e-6 * w.max_abs() {
            log::warn!(
                "resolvent tail bound {:.2e} during iteration",
                report.tail_bound
            );
        }
        let u = u_minus.add(&w)?;
        let g_preview = stripped_slice(&w, d.grid().interior(3).end - 1)?;
        Ok(Solution {
            u,
            w,
            linear,
            split,
            g_preview,
            report,
            admissibility: self.admissibility,
        })
    }
}

/// `r^{(n−1)/2} e^{−iλr} w(r_i, ·)` as a spectrum.
pub fn stripped_slice(w: &Field, i: usize) -> Result<AngularSpectrum> {
    let d = w.domain();
    let r = d.nodes()[i];
    let factor = Complex64::from_polar(r.powf((d.dim() as f64 - 1.0) / 2.0), -d.lambda() * r);
    Ok(w.spectrum_at(i).scaled(factor))
}

/// Type-II Anderson mixing on flattened iterates.
struct Anderson {
    depth: usize,
    xs: Vec<Vec<Complex64>>,
    gs: Vec<Vec<Complex64>>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Self {
            depth,
            xs: Vec::new(),
            gs: Vec::new(),
        }
    }

    fn mix(&mut self, x: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
        self.xs.push(x.to_vec());
        self.gs.push(g.to_vec());
        if self.xs.len() > self.depth + 1 {
            self.xs.remove(0);
            self.gs.remove(0);
        }
        let m = self.xs.len() - 1;
        if m == 0 {
            return g.to_vec();
        }
        let res = |j: usize| -> Vec<Complex64> {
            self.gs[j]
                .iter()
                .zip(&self.xs[j])
                .map(|(a, b)| a - b)
                .collect()
        };
        let f_last = res(m);
        let df: Vec<Vec<Complex64>> = (0..m)
            .map(|j| {
                let fj = res(j);
                let fj1 = res(j + 1);
                fj1.iter().zip(&fj).map(|(a, b)| a - b).collect()
            })
            .collect();
        let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
            a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
        };
        let mut gram = vec![vec![Complex64::new(0.0, 0.0); m]; m];
        let mut rhs = vec![Complex64::new(0.0, 0.0); m];
        let mut trace = 0.0;
        for i in 0..m {
            for j in 0..m {
                gram[i][j] = dot(&df[i], &df[j]);
            }
            rhs[i] = dot(&df[i], &f_last);
            trace += gram[i][i].re;
        }
        for (i, row) in gram.iter_mut().enumerate() {
            row[i] += 1e-12 * trace.max(f64::MIN_POSITIVE);
        }
        let Some(gamma) = solve_dense(gram, rhs) else {
            return g.to_vec();
        };
        let mut out = g.to_vec();
        for (j, gj) in gamma.iter().enumerate() {
            for (idx, o) in out.iter_mut().enumerate() {
                *o -= gj * (self.gs[j + 1][idx] - self.gs[j][idx]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub scale: f64,
    /// `‖f‖_{H^{k+2}}` of the scaled data.
    pub eta: f64,
    pub ratio: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    /// Least-squares slope of `log ratio` against `log η` over converged rows.
    pub slope: Option<f64>,
}

/// Relative step below which ratios are treated as rounding noise.
pub const RATIO_FLOOR: f64 = 1e-14;

/// Solves at each scale of `f` with plain Picard and fits `log ratio` against `log η`.
pub fn contraction_probe(
    res: &Resolvent,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    f: &AngularSpectrum,
    scales: &[f64],
) -> Result<ProbeTable> {
    let config = SolverConfig {
        anderson: 0,
        ..config.clone()
    };
    let solver = Solver::new(res, spec.clone(), config)?;
    let mut rows = Vec::with_capacity(scales.len());
    for &scale in scales {
        let fs = f.scaled(Complex64::new(scale, 0.0));
        let eta = solver.data_size(&fs);
        match solver.solve(&fs, None) {
            Ok(sol) => rows.push(ProbeRow {
                scale,
                eta,
                ratio: sol.report.asymptotic_ratio(RATIO_FLOOR),
                iterations: sol.report.iterations(),
                converged: true,
            }),
            Err(e @ (Error::NonContraction { .. } | Error::NotConverged { .. })) => {
                log::warn!("probe scale {scale}: {e}");
                rows.push(ProbeRow {
                    scale,
                    eta,
                    ratio: None,
                    iterations: 0,
                    converged: false,
                });
            }
            Err(e) => return Err(e),
        }
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.converged)
        .filter_map(|r| r.ratio.filter(|&q| q > 0.0).map(|q| (r.eta.ln(), q.ln())))
        .collect();
    Ok(ProbeTable {
        slope: fit_slope(&pts),
        rows,
    })
}

/// Least-squares slope through `(x, y)` pairs.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    /// `‖u_i − u_ref‖ / ‖u_ref‖` in the module norm, per initial iterate.
    pub distances: Vec<f64>,
    pub tolerance: f64,
}

/// Solves from `w = 0` and from each perturbation, and compares the fixed points.
pub fn uniqueness_check(
    res: &Resolvent,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    f: &AngularSpectrum,
    perturbations: &[Field],
) -> Result<UniquenessReport> {
    let solver = Solver::new(res, spec.clone(), config.clone())?;
    let reference = solver.solve(f, None)?;
    let scale = module_norm(&reference.w, solver.norm())?;
    let tolerance = 10.0 * config.tol_step;
    let mut distances = Vec::with_capacity(perturbations.len());
    for (index, w0) in perturbations.iter().enumerate() {
        let sol = solver.solve(f, Some(w0))?;
        let dist = module_norm(&sol.w.sub(&reference.w)?, solver.norm())?;
        let rel = if scale > 0.0 { dist / scale } else { dist };
        if rel > tolerance {
            return Err(Error::Uniqueness {
                index,
                distance: rel,
            });
        }
        distances.push(rel);
    }
    Ok(UniquenessReport {
        distances,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anderson_accelerates_a_linear_contraction() {
        // x ↦ 0.9 x + 1 has fixed point 10; depth 1 mixing finds it in two steps.
        let mut mix = Anderson::new(1);
        let mut x = vec![Complex64::new(0.0, 0.0)];
        for _ in 0..3 {
            let g = vec![x[0] * 0.9 + 1.0];
            x = mix.mix(&x, &g);
        }
        assert!((x[0] - 10.0).norm() < 1e-9);
    }

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 4.0 * i as f64 - 1.0)).collect();
        assert!((fit_slope(&pts).unwrap() - 4.0).abs() < 1e-14);
        assert!(fit_slope(&pts[..1]).is_none());
    }
}
