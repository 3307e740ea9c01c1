//! Mode-by-mode outgoing resolvent `R(λ + i0)` for `Δ + V − λ²` with radial `V`.
//!
//! Each degree `l` has a regular solution `phi` and an outgoing solution `psi`
//! of the radial equation; the kernel is `phi(r_<) psi(r_>) / C` against
//! `r^{n−1} dr`. The contribution of `F` beyond `r_max` is estimated from a
//! two-exponent fit of `F` over the outer tenth of the grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::gauss_legendre;
use crate::error::{Error, Result};
use crate::fields::{Domain, Field, RadialGrid};
use crate::linalg::solve_dense;
use crate::ode::{integrate, Tolerances};
use crate::specialfn::{cylinder_ladder, cylinder_pair};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const TAIL_NODES: usize = 48;
/// Largest allowed relative variation of the discrete Wronskian in the potential case.
pub const WRONSKIAN_DRIFT_TOL: f64 = 1e-4;

/// Radial potential `V(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// `strength · ⟨r⟩^{−exponent}`
    Bracket { strength: f64, exponent: f64 },
    /// `strength · exp(−r²/width²)`
    Gaussian { strength: f64, width: f64 },
}

impl Potential {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Potential::Bracket { strength, exponent } => {
                if !(strength.is_finite() && exponent.is_finite()) {
                    return Err(Error::Config("potential parameters must be finite".into()));
                }
                if exponent < 2.0 {
                    return Err(Error::Config(format!(
                        "potential must decay like r^-2 or faster; exponent {exponent} < 2"
                    )));
                }
            }
            Potential::Gaussian { strength, width } => {
                if !(strength.is_finite() && width.is_finite() && width > 0.0) {
                    return Err(Error::Config(format!(
                        "gaussian potential needs a positive width, got {width}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Potential::Bracket { strength, exponent } => {
                strength * (1.0 + r * r).powf(-exponent / 2.0)
            }
            Potential::Gaussian { strength, width } => strength * (-(r / width).powi(2)).exp(),
        }
    }

    /// `∫_r^∞ V(s) ds` via `t = 1/s` and Gauss–Legendre.
    pub fn tail_integral(&self, r: f64) -> f64 {
        let (x, w) = gauss_legendre(64);
        let b = 1.0 / r;
        x.iter()
            .zip(&w)
            .map(|(&x, &w)| {
                let t = 0.5 * b * (x + 1.0);
                w * 0.5 * b * self.value(1.0 / t) / (t * t)
            })
            .sum()
    }

    pub fn samples(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.nodes().iter().map(|&r| self.value(r)).collect()
    }

    pub fn scaled(&self, factor: f64) -> Potential {
        match *self {
            Potential::Bracket { strength, exponent } => Potential::Bracket {
                strength: strength * factor,
                exponent,
            },
            Potential::Gaussian { strength, width } => Potential::Gaussian {
                strength: strength * factor,
                width,
            },
        }
    }
}

/// Which boundary condition at infinity the resolvent selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `R(λ + i0)`
    Outgoing,
    /// `R(λ − i0)`
    Incoming,
}

/// Outgoing solution sampled beyond `r_max` for the tail integral.
#[derive(Debug, Clone)]
struct Tail {
    /// `s_j` and weights for `∫_{r_max}^∞ · ds`.
    s: Vec<f64>,
    w: Vec<f64>,
    /// `psi(s_j) e^{−iλ s_j} s_j^{n−1}`.
    h_measure: Vec<Complex64>,
    /// `h = psi e^{−iλr}` and its first two derivatives at `r_max`.
    h_end: [Complex64; 3],
}

/// Regular and outgoing radial solutions of one degree.
#[derive(Debug, Clone)]
pub struct ModeGreens {
    pub degree: usize,
    pub order: f64,
    pub dim: usize,
    pub lambda: f64,
    pub phi: Vec<Complex64>,
    pub phi_prime: Vec<Complex64>,
    pub psi: Vec<Complex64>,
    pub psi_prime: Vec<Complex64>,
    /// `C` with `G(r, r′) = phi(r_<) psi(r_>) / C`.
    pub wronskian_c: Complex64,
    /// Largest relative deviation of the discrete Wronskian from `C`.
    pub wronskian_drift: f64,
    tail: Tail,
}

fn order_of(degree: usize, dim: usize) -> f64 {
    degree as f64 + (dim as f64 - 2.0) / 2.0
}

/// Free outgoing solution `r^{−(n−2)/2} H_ν(λr)` and its derivative.
fn free_psi(order: f64, dim: usize, lambda: f64, r: f64) -> Result<(Complex64, Complex64)> {
    let e = cylinder_pair(order, lambda * r)?;
    let a = (dim as f64 - 2.0) / 2.0;
    let pre = r.powf(-a);
    Ok((e.h1 * pre, e.h1_prime * lambda * pre - e.h1 * (a * pre / r)))
}

fn tail_nodes(r_max: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(TAIL_NODES);
    let b = 1.0 / r_max;
    x.iter()
        .zip(&w)
        .map(|(&x, &w)| {
            let t = 0.5 * b * (x + 1.0);
            (1.0 / t, w * 0.5 * b / (t * t))
        })
        .unzip()
}

impl ModeGreens {
    fn build_tail(
        order: f64,
        dim: usize,
        lambda: f64,
        grid: &RadialGrid,
        potential: Option<&Potential>,
        psi_end: Complex64,
        psi_prime_end: Complex64,
    ) -> Result<Tail> {
        let r_max = grid.r_max();
        let (s, w) = tail_nodes(r_max);
        let theta = |r: f64| potential.map_or(0.0, |v| v.tail_integral(r) / (2.0 * lambda));
        let h_measure = s
            .iter()
            .map(|&sj| {
                let (p, _) = free_psi(order, dim, lambda, sj)?;
                Ok(p * Complex64::from_polar(1.0, theta(sj) - lambda * sj)
                    * sj.powi(dim as i32 - 1))
            })
            .collect::<Result<Vec<_>>>()?;
        let v = potential.map_or(0.0, |p| p.value(r_max));
        let mu = order * order - ((dim as f64 - 2.0) / 2.0).powi(2);
        let nn = dim as f64 - 1.0;
        let psi2 =
            -psi_prime_end * (nn / r_max) - psi_end * (lambda * lambda - v - mu / (r_max * r_max));
        let e = Complex64::from_polar(1.0, -lambda * r_max);
        let h_end = [
            psi_end * e,
            (psi_prime_end - I * lambda * psi_end) * e,
            (psi2 - I * 2.0 * lambda * psi_prime_end - psi_end * lambda * lambda) * e,
        ];
        Ok(Tail {
            s,
            w,
            h_measure,
            h_end,
        })
    }

    fn finish(
        degree: usize,
        dim: usize,
        lambda: f64,
        grid: &RadialGrid,
        potential: Option<&Potential>,
        phi: Vec<Complex64>,
        phi_prime: Vec<Complex64>,
        psi: Vec<Complex64>,
        psi_prime: Vec<Complex64>,
    ) -> Result<Self> {
        let order = order_of(degree, dim);
        let n = grid.len();
        let tail = Self::build_tail(
            order,
            dim,
            lambda,
            grid,
            potential,
            psi[n - 1],
            psi_prime[n - 1],
        )?;
        let mut g = ModeGreens {
            degree,
            order,
            dim,
            lambda,
            phi,
            phi_prime,
            psi,
            psi_prime,
            wronskian_c: Complex64::new(0.0, 0.0),
            wronskian_drift: 0.0,
            tail,
        };
        let w = g.wronskian_profile(grid);
        let c = w.iter().sum::<Complex64>() / n as f64;
        g.wronskian_drift = w
            .iter()
            .map(|x| (x - c).norm() / c.norm())
            .fold(0.0, f64::max);
        g.wronskian_c = c;
        Ok(g)
    }

    /// `−r^{n−1}(phi psi′ − phi′ psi)` at every node.
    pub fn wronskian_profile(&self, grid: &RadialGrid) -> Vec<Complex64> {
        grid.nodes()
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                -(self.phi[i] * self.psi_prime[i] - self.phi_prime[i] * self.psi[i])
                    * r.powi(self.dim as i32 - 1)
            })
            .collect()
    }

    /// Applies the kernel to one mode profile. Returns the solution and a
    /// bound on the error of the tail estimate, in the units of the solution.
    /// Applies the kernel to one mode column. Without `with_tail` the source is
    /// treated as vanishing beyond `r_max`.
    pub fn apply_column(
        &self,
        f: &[Complex64],
        grid: &RadialGrid,
        direction: Direction,
        with_tail: bool,
    ) -> (Vec<Complex64>, f64) {
        let n = grid.len();
        let r = grid.nodes();
        let pw = self.dim as i32 - 1;
        let outgoing = direction == Direction::Outgoing;
        let psi = |i: usize| {
            if outgoing {
                self.psi[i]
            } else {
                self.psi[i].conj()
            }
        };
        let c = if outgoing {
            self.wronskian_c
        } else {
            self.wronskian_c.conj()
        };
        let g_phi: Vec<Complex64> = (0..n).map(|i| self.phi[i] * f[i] * r[i].powi(pw)).collect();
        let g_psi: Vec<Complex64> = (0..n).map(|i| psi(i) * f[i] * r[i].powi(pw)).collect();
        let a = grid.cumulative(&g_phi);
        let b = grid.cumulative_from_right(&g_psi);
        let (t, bound) = if with_tail {
            self.tail_integral(f, grid, direction)
        } else {
            (Complex64::new(0.0, 0.0), 0.0)
        };
        let u = (0..n)
            .map(|i| (psi(i) * a[i] + self.phi[i] * (b[i] + t)) / c)
            .collect();
        let phi_max = self.phi.iter().map(|p| p.norm()).fold(0.0, f64::max);
        (u, bound * phi_max / c.norm())
    }

    /// Estimate of `∫_{r_max}^∞ psi F s^{n−1} ds` with its error bound.
    fn tail_integral(
        &self,
        f: &[Complex64],
        grid: &RadialGrid,
        direction: Direction,
    ) -> (Complex64, f64) {
        let Some(fit) = TailFit::fit(f, grid, self.lambda) else {
            return (Complex64::new(0.0, 0.0), 0.0);
        };
        let outgoing = direction == Direction::Outgoing;
        let sigma = if outgoing { 1 } else { -1 };
        let hm = |j: usize| {
            if outgoing {
                self.tail.h_measure[j]
            } else {
                self.tail.h_measure[j].conj()
            }
        };
        let he = |k: usize| {
            if outgoing {
                self.tail.h_end[k]
            } else {
                self.tail.h_end[k].conj()
            }
        };
        let n = self.dim as f64;
        let r_max = grid.r_max();
        let (h0, h1, h2) = (he(0), he(1), he(2));
        let mut total = Complex64::new(0.0, 0.0);
        let mut remainder = 0.0;
        let mut divergent = false;
        // psi_dir · c e^{imλs} s^{−q} s^{n−1} = h_dir(s) s^{n−1−q} e^{i(σ+m)λs}
        for term in &fit.terms {
            if term.amplitude.norm() == 0.0 {
                continue;
            }
            let q = term.exponent;
            if term.harmonic + sigma == 0 {
                if q <= (n + 1.0) / 2.0 {
                    divergent = true;
                    continue;
                }
                let full: Complex64 = (0..TAIL_NODES)
                    .map(|j| hm(j) * self.tail.s[j].powf(-q) * self.tail.w[j])
                    .sum();
                total += full * term.amplitude;
            } else {
                let omega = (term.harmonic + sigma) as f64 * self.lambda;
                let m = n - 1.0 - q;
                let g0 = h0 * r_max.powf(m);
                let g1 = h1 * r_max.powf(m) + h0 * (m * r_max.powf(m - 1.0));
                let g2 = h2 * r_max.powf(m)
                    + h1 * (2.0 * m * r_max.powf(m - 1.0))
                    + h0 * (m * (m - 1.0) * r_max.powf(m - 2.0));
                let iw = I * omega;
                total -= Complex64::from_polar(1.0, omega * r_max)
                    * (g0 / iw - g1 / (iw * iw) + g2 / (iw * iw * iw))
                    * term.amplitude;
                remainder +=
                    (g2.norm() / omega.abs().powi(3)) * term.amplitude.norm() / (1.0 + r_max);
            }
        }
        if divergent {
            return (total, f64::INFINITY);
        }
        (total, fit.misfit * total.norm() + remainder)
    }
}

/// One term `amplitude · e^{i·harmonic·λr} r^{−exponent}` of a tail model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailTerm {
    pub harmonic: i32,
    pub amplitude: Complex64,
    pub exponent: f64,
}

/// Least-squares model `Σ_m c_m e^{imλr} r^{−q_m}` of a profile over the outer
/// tenth of the grid. Harmonics `m = ±1` carry their own exponents; the others
/// share one.
#[derive(Debug, Clone)]
pub struct TailFit {
    pub terms: Vec<TailTerm>,
    /// Relative L² misfit over the window.
    pub misfit: f64,
}

/// Columns whose outer-window content is below this fraction of the largest
/// column's get no tail correction.
pub const TAIL_NOISE_FLOOR: f64 = 1e-10;
const FIT_POINTS: usize = 48;
const MAX_HARMONIC: i32 = 7;
const MAX_TERMS: usize = 8;
const Q_MAX: f64 = 12.0;

struct FitWindow {
    ln_r: Vec<f64>,
    phases: Vec<(i32, Vec<Complex64>)>,
    y: Vec<Complex64>,
}

fn group(m: i32) -> usize {
    match m {
        -1 => 0,
        1 => 1,
        _ => 2,
    }
}

impl FitWindow {
    fn phase(&self, m: i32) -> &[Complex64] {
        &self
            .phases
            .iter()
            .find(|p| p.0 == m)
            .expect("harmonic in range")
            .1
    }

    fn column(&self, m: i32, q: f64) -> Vec<Complex64> {
        self.phase(m)
            .iter()
            .zip(&self.ln_r)
            .map(|(p, l)| p * (-q * l).exp())
            .collect()
    }

    /// Coefficients and squared residual of the linear least-squares problem.
    fn solve(&self, harmonics: &[i32], q: &[f64; 3]) -> (Vec<Complex64>, Vec<Complex64>, f64) {
        let k = harmonics.len();
        let cols: Vec<Vec<Complex64>> = harmonics
            .iter()
            .map(|&m| self.column(m, q[group(m)]))
            .collect();
        let mut gram = vec![vec![Complex64::new(0.0, 0.0); k]; k];
        let mut rhs = vec![Complex64::new(0.0, 0.0); k];
        let mut trace = 0.0;
        for a in 0..k {
            for b in a..k {
                let v: Complex64 = cols[a]
                    .iter()
                    .zip(&cols[b])
                    .map(|(x, z)| x.conj() * z)
                    .sum();
                gram[a][b] = v;
                gram[b][a] = v.conj();
            }
            rhs[a] = cols[a].iter().zip(&self.y).map(|(x, z)| x.conj() * z).sum();
            trace += gram[a][a].re;
        }
        for (a, row) in gram.iter_mut().enumerate() {
            row[a] += 1e-14 * trace;
        }
        let c = solve_dense(gram, rhs).unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); k]);
        let resid: Vec<Complex64> = (0..self.y.len())
            .map(|j| {
                self.y[j]
                    - cols
                        .iter()
                        .zip(&c)
                        .map(|(col, cm)| col[j] * cm)
                        .sum::<Complex64>()
            })
            .collect();
        let res = resid.iter().map(|v| v.norm_sqr()).sum();
        (c, resid, res)
    }

    /// Minimizes the residual over the exponents of `groups`, one at a time.
    fn optimize(
        &self,
        harmonics: &[i32],
        mut q: [f64; 3],
        groups: &[usize],
        cycles: usize,
    ) -> ([f64; 3], f64) {
        let eval = |q: &[f64; 3]| self.solve(harmonics, q).2;
        let mut best = eval(&q);
        for _ in 0..cycles {
            for &g in groups {
                let mut trial = q;
                let mut at = |x: f64| {
                    trial[g] = x;
                    eval(&trial)
                };
                let (mut x_best, mut f_best) = (q[g], best);
                let coarse = 0.5;
                let mut j = 0.0;
                while j <= Q_MAX {
                    let v = at(j);
                    if v < f_best {
                        f_best = v;
                        x_best = j;
                    }
                    j += coarse;
                }
                let (mut lo, mut hi) = ((x_best - coarse).max(0.0), (x_best + coarse).min(Q_MAX));
                let phi = 0.5 * (5f64.sqrt() - 1.0);
                let mut x1 = hi - phi * (hi - lo);
                let mut x2 = lo + phi * (hi - lo);
                let (mut f1, mut f2) = (at(x1), at(x2));
                while hi - lo > 1e-4 {
                    if f1 < f2 {
                        hi = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = hi - phi * (hi - lo);
                        f1 = at(x1);
                    } else {
                        lo = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = lo + phi * (hi - lo);
                        f2 = at(x2);
                    }
                }
                for (x, v) in [(x1, f1), (x2, f2)] {
                    if v < f_best {
                        f_best = v;
                        x_best = x;
                    }
                }
                if f_best < best {
                    best = f_best;
                    q[g] = x_best;
                }
            }
        }
        (q, best)
    }
}

impl TailFit {
    pub fn fit(f: &[Complex64], grid: &RadialGrid, lambda: f64) -> Option<TailFit> {
        let n = grid.len();
        let start = grid
            .index_at_or_above(0.9 * grid.r_max())
            .min(n.saturating_sub(16));
        let count = n - start;
        let stride = count.div_ceil(FIT_POINTS).max(1);
        let idx: Vec<usize> = (start..n).step_by(stride).collect();
        let r: Vec<f64> = idx.iter().map(|&i| grid.nodes()[i]).collect();
        let y: Vec<Complex64> = idx.iter().map(|&i| f[i]).collect();
        let yy: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        if yy == 0.0 || !yy.is_finite() {
            return None;
        }
        let spacing = (r[r.len() - 1] - r[0]) / (r.len() - 1).max(1) as f64;
        let top = if spacing > 0.0 {
            MAX_HARMONIC
                .min((0.9 * std::f64::consts::PI / (lambda * spacing)).floor() as i32)
                .max(1)
        } else {
            1
        };
        let window = FitWindow {
            ln_r: r.iter().map(|x| x.ln()).collect(),
            phases: (-top..=top)
                .map(|m| {
                    (
                        m,
                        r.iter()
                            .map(|&x| Complex64::from_polar(1.0, m as f64 * lambda * x))
                            .collect(),
                    )
                })
                .collect(),
            y,
        };
        let groups_of = |h: &[i32]| -> Vec<usize> {
            (0..3)
                .filter(|&g| h.iter().any(|&m| group(m) == g))
                .collect()
        };

        // Forward selection; candidates are scored with the exponent of the non-principal group.
        let mut harmonics = vec![-1];
        let (mut q, mut res) = window.optimize(&harmonics, [0.0; 3], &[0], 1);
        q = [q[0]; 3];
        while harmonics.len() < MAX_TERMS && res > 1e-24 * yy {
            let (_, resid, _) = window.solve(&harmonics, &q);
            let gain = |m: i32| {
                let col = window.column(m, q[2]);
                let num: Complex64 = col.iter().zip(&resid).map(|(c, e)| c.conj() * e).sum();
                let den: f64 = col.iter().map(|c| c.norm_sqr()).sum();
                num.norm_sqr() / den
            };
            let Some((m, g)) = (-top..=top)
                .filter(|m| !harmonics.contains(m))
                .map(|m| (m, gain(m)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
            else {
                break;
            };
            if g < 0.05 * res {
                break;
            }
            let mut trial = harmonics.clone();
            trial.push(m);
            trial.sort_unstable();
            let (tq, tres) = window.optimize(&trial, q, &groups_of(&trial), 1);
            if tres > 0.9 * res {
                break;
            }
            harmonics = trial;
            q = tq;
            if group(m) != 2 && !harmonics.iter().any(|&h| group(h) == 2) {
                q[2] = q[group(m)];
            }
            res = tres;
        }
        let (q, _) = window.optimize(&harmonics, q, &groups_of(&harmonics), 2);
        let (c, _, res) = window.solve(&harmonics, &q);
        Some(TailFit {
            terms: harmonics
                .iter()
                .zip(c)
                .map(|(&m, amplitude)| TailTerm {
                    harmonic: m,
                    amplitude,
                    exponent: q[group(m)],
                })
                .collect(),
            misfit: (res / yy).sqrt(),
        })
    }
}

/// Free-space Green's data for degree `l`.
pub fn mode_greens_free(l: usize, n: usize, lambda: f64, grid: &RadialGrid) -> Result<ModeGreens> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!(
            "resolvent needs lambda > 0, got {lambda}"
        )));
    }
    let order = order_of(l, n);
    let a = (n as f64 - 2.0) / 2.0;
    let mut phi = Vec::with_capacity(grid.len());
    let mut phi_prime = Vec::with_capacity(grid.len());
    let mut psi = Vec::with_capacity(grid.len());
    let mut psi_prime = Vec::with_capacity(grid.len());
    for &r in grid.nodes() {
        let e = cylinder_pair(order, lambda * r)?;
        let pre = r.powf(-a);
        phi.push(Complex64::new(e.j * pre, 0.0));
        phi_prime.push(Complex64::new(
            e.j_prime * lambda * pre - e.j * a * pre / r,
            0.0,
        ));
        psi.push(e.h1 * pre);
        psi_prime.push(e.h1_prime * lambda * pre - e.h1 * (a * pre / r));
    }
    ModeGreens::finish(l, n, lambda, grid, None, phi, phi_prime, psi, psi_prime)
}

/// Free-space Green's data for degrees `0..=max_degree`, sharing one order ladder per node.
pub fn mode_greens_free_set(
    max_degree: usize,
    n: usize,
    lambda: f64,
    grid: &RadialGrid,
) -> Result<Vec<ModeGreens>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!(
            "resolvent needs lambda > 0, got {lambda}"
        )));
    }
    let a = (n as f64 - 2.0) / 2.0;
    let ladders = grid
        .nodes()
        .par_iter()
        .map(|&r| cylinder_ladder(a, max_degree + 1, lambda * r))
        .collect::<Result<Vec<_>>>()?;
    (0..=max_degree)
        .into_par_iter()
        .map(|l| {
            let m = grid.len();
            let (mut phi, mut phi_prime, mut psi, mut psi_prime) = (
                Vec::with_capacity(m),
                Vec::with_capacity(m),
                Vec::with_capacity(m),
                Vec::with_capacity(m),
            );
            for (ladder, &r) in ladders.iter().zip(grid.nodes()) {
                let e = &ladder[l];
                let pre = r.powf(-a);
                phi.push(Complex64::new(e.j * pre, 0.0));
                phi_prime.push(Complex64::new(
                    e.j_prime * lambda * pre - e.j * a * pre / r,
                    0.0,
                ));
                psi.push(e.h1 * pre);
                psi_prime.push(e.h1_prime * lambda * pre - e.h1 * (a * pre / r));
            }
            ModeGreens::finish(l, n, lambda, grid, None, phi, phi_prime, psi, psi_prime)
        })
        .collect()
}

/// Green's data for degree `l` with a radial potential, by ODE integration.
pub fn mode_greens_potential(
    l: usize,
    n: usize,
    lambda: f64,
    potential: &Potential,
    grid: &RadialGrid,
) -> Result<ModeGreens> {
    potential.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!(
            "resolvent needs lambda > 0, got {lambda}"
        )));
    }
    let order = order_of(l, n);
    let mu = (l * (l + n - 2)) as f64;
    let nn = n as f64 - 1.0;
    let lam2 = lambda * lambda;
    let rhs = |r: f64, y: &[Complex64; 2]| -> [Complex64; 2] {
        let q = lam2 - potential.value(r) - mu / (r * r);
        [y[1], -y[1] * (nn / r) - y[0] * q]
    };
    let tol = Tolerances {
        h_max: 0.3 / lambda,
        ..Default::default()
    };
    let nodes = grid.nodes();
    let r0 = nodes[0];
    let e0 = cylinder_pair(order, lambda * r0)?;
    let a = (n as f64 - 2.0) / 2.0;
    let pre = r0.powf(-a);
    let phi0 = [
        Complex64::new(e0.j * pre, 0.0),
        Complex64::new(e0.j_prime * lambda * pre - e0.j * a * pre / r0, 0.0),
    ];
    let phi_states = integrate(rhs, phi0, nodes, &tol)?;
    let r_max = grid.r_max();
    let (h, hp) = free_psi(order, n, lambda, r_max)?;
    let theta = potential.tail_integral(r_max) / (2.0 * lambda);
    let rot = Complex64::from_polar(1.0, theta);
    let v_end = potential.value(r_max);
    let psi_end = [h * rot, (hp - I * (v_end / (2.0 * lambda)) * h) * rot];
    let reversed: Vec<f64> = nodes.iter().rev().copied().collect();
    let mut psi_states = integrate(rhs, psi_end, &reversed, &tol)?;
    psi_states.reverse();
    let g = ModeGreens::finish(
        l,
        n,
        lambda,
        grid,
        Some(potential),
        phi_states.iter().map(|s| s[0]).collect(),
        phi_states.iter().map(|s| s[1]).collect(),
        psi_states.iter().map(|s| s[0]).collect(),
        psi_states.iter().map(|s| s[1]).collect(),
    )?;
    if g.wronskian_drift > WRONSKIAN_DRIFT_TOL {
        return Err(Error::Accuracy(format!(
            "Wronskian drift {:.2e} for degree {l} exceeds {WRONSKIAN_DRIFT_TOL:.0e}",
            g.wronskian_drift
        )));
    }
    Ok(g)
}

/// Result of applying the resolvent, with the tail-truncation bound.
#[derive(Debug, Clone)]
pub struct ResolventOutput {
    pub field: Field,
    /// Bound on the error from the part of `F` beyond `r_max`, in absolute units of the field.
    pub tail_bound: f64,
}

/// Green's data for every degree of a domain.
#[derive(Debug, Clone)]
pub struct Resolvent {
    domain: Arc<Domain>,
    potential: Option<Potential>,
    greens: Vec<ModeGreens>,
}

impl Resolvent {
    pub fn new(domain: &Arc<Domain>, potential: Option<Potential>) -> Result<Self> {
        let grid = domain.grid();
        let (n, lambda, big_l) = (domain.dim(), domain.lambda(), domain.max_degree());
        let greens = match &potential {
            None => mode_greens_free_set(big_l, n, lambda, grid)?,
            Some(v) => (0..=big_l)
                .into_par_iter()
                .map(|l| mode_greens_potential(l, n, lambda, v, grid))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(Self {
            domain: domain.clone(),
            potential,
            greens,
        })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn potential(&self) -> Option<&Potential> {
        self.potential.as_ref()
    }

    pub fn potential_samples(&self) -> Option<Vec<f64>> {
        self.potential.map(|v| v.samples(self.domain.grid()))
    }

    pub fn greens(&self, degree: usize) -> &ModeGreens {
        &self.greens[degree]
    }

    pub fn apply(&self, f: &Field, direction: Direction) -> Result<ResolventOutput> {
        if !f.domain().same_as(&self.domain) {
            return Err(Error::Shape("resolvent and field domains differ".into()));
        }
        let d = &self.domain;
        let nm = d.mode_count();
        let modes = d.modes();
        let grid = d.grid();
        let start = grid.index_at_or_above(0.9 * grid.r_max());
        let raw: Vec<Vec<Complex64>> = (0..nm).map(|k| f.mode_column(k)).collect();
        let window_max: Vec<f64> = raw
            .iter()
            .map(|c| c[start..].iter().map(|v| v.norm()).fold(0.0, f64::max))
            .collect();
        let floor = TAIL_NOISE_FLOOR * window_max.iter().copied().fold(0.0, f64::max);
        let columns: Vec<(Vec<Complex64>, f64)> = raw
            .into_par_iter()
            .enumerate()
            .map(|(k, col)| {
                if col.iter().all(|c| c.norm_sqr() == 0.0) {
                    return (col, 0.0);
                }
                self.greens[modes.degree(k)].apply_column(
                    &col,
                    grid,
                    direction,
                    window_max[k] > floor,
                )
            })
            .collect();
        let tail_bound = columns.iter().map(|c| c.1).fold(0.0, f64::max);
        let cols: Vec<Vec<Complex64>> = columns.into_iter().map(|c| c.0).collect();
        let field = Field::from_columns(d, &cols)?;
        Ok(ResolventOutput { field, tail_bound })
    }

    /// `R(λ + i0) F`, logging a warning when the tail bound is not small.
    pub fn outgoing(&self, f: &Field) -> Result<Field> {
        let out = self.apply(f, Direction::Outgoing)?;
        let scale = out.field.max_abs();
        if out.tail_bound > 1e-6 * scale {
            log::warn!(
                "resolvent tail beyond r_max = {} bounded by {:.2e} (field scale {:.2e})",
                self.domain.grid().r_max(),
                out.tail_bound,
                scale
            );
        }
        Ok(out.field)
    }
}

/// `√(2/(πλ))·e^{−i(νπ/2 + π/4)}`: the coefficient of `r^{−(n−1)/2} e^{iλr}` in the free outgoing solution.
pub fn outgoing_amplitude(order: f64, lambda: f64) -> Complex64 {
    Complex64::from_polar((2.0 / (PI * lambda)).sqrt(), -(order * PI / 2.0 + PI / 4.0))
}
