//! Rescaled Hamilton flow of `Δ − λ²` at spatial infinity, in the coordinates
//! `(x, y, ν, μ)` with `x = 1/r`, `y` stereographic on `S^{n−1}`, and the
//! variable spatial weight `𝗅₊` along its trajectories.
//!
//! In either stereographic chart the round metric is `h^{jk} = ρ δ^{jk}` with
//! `ρ = (1 + |y|²)²/4`, so the field reads
//! `ẋ = −2νx`, `ẏ = 2ρμ`, `ν̇ = 2ρ|μ|²`, `μ̇ = −2νμ − (1 + |y|²) y |μ|²`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::smoothstep;
use crate::ode::dopri_step;

/// Integration tolerance (relative and absolute).
pub const FLOW_TOL: f64 = 1e-10;
/// Distance to a radial set below which a limit is decided.
pub const LIMIT_TOL: f64 = 1e-6;
/// `x` beyond which a trajectory has left the boundary collar.
pub const INTERIOR_X: f64 = 1.0;
/// Slack allowed in weight monotonicity.
pub const WEIGHT_SLACK: f64 = 1e-10;
/// Charts are swapped once `|y|` exceeds this.
const CHART_SWITCH: f64 = 1.5;

/// Stereographic projection from the north (`y = ω′/(1 − ω_n)`) or south (`y = ω′/(1 + ω_n)`) pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    North,
    South,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub chart: Chart,
    pub y: Vec<f64>,
    pub nu: f64,
    pub mu: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn conformal(y: &[f64]) -> f64 {
    let s = 1.0 + dot(y, y);
    0.25 * s * s
}

impl PhasePoint {
    /// Dimension `n` of the ambient space.
    pub fn dim(&self) -> usize {
        self.y.len() + 1
    }

    /// `|μ|²_y`.
    pub fn mu_norm_sqr(&self) -> f64 {
        conformal(&self.y) * dot(&self.mu, &self.mu)
    }

    pub fn mu_norm(&self) -> f64 {
        self.mu_norm_sqr().sqrt()
    }

    /// `ν² + |μ|²_y`, equal to `λ²` on the characteristic set.
    pub fn energy(&self) -> f64 {
        self.nu * self.nu + self.mu_norm_sqr()
    }

    /// The point of `S^{n−1} ⊂ Rⁿ`.
    pub fn direction(&self) -> Vec<f64> {
        let s = dot(&self.y, &self.y);
        let mut out: Vec<f64> = self.y.iter().map(|v| 2.0 * v / (1.0 + s)).collect();
        let last = (s - 1.0) / (s + 1.0);
        out.push(match self.chart {
            Chart::North => last,
            Chart::South => -last,
        });
        out
    }

    /// Builds a point from `ω ∈ S^{n−1}` and a tangent vector `v` at `ω`; `μ`
    /// is the covector dual to `v`, rescaled so that `|μ|_y = mu_norm`.
    pub fn from_sphere(
        x: f64,
        omega: &[f64],
        tangent: &[f64],
        nu: f64,
        mu_norm: f64,
    ) -> Result<Self> {
        let n = omega.len();
        if n < 2 || tangent.len() != n {
            return Err(Error::Shape(
                "direction and tangent must both lie in R^n with n >= 2".into(),
            ));
        }
        let len = dot(omega, omega).sqrt();
        if (len - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("direction has length {len}, not 1")));
        }
        if dot(omega, tangent).abs() > 1e-9 * dot(tangent, tangent).sqrt().max(1.0) {
            return Err(Error::Domain(
                "tangent vector is not orthogonal to the direction".into(),
            ));
        }
        let wn = omega[n - 1];
        let (chart, sign) = if wn <= 0.0 {
            (Chart::North, 1.0)
        } else {
            (Chart::South, -1.0)
        };
        let denom = 1.0 - sign * wn;
        let y: Vec<f64> = omega[..n - 1].iter().map(|v| v / denom).collect();
        let ydot: Vec<f64> = (0..n - 1)
            .map(|j| tangent[j] / denom + sign * omega[j] * tangent[n - 1] / (denom * denom))
            .collect();
        let rho = conformal(&y);
        let mut mu: Vec<f64> = ydot.iter().map(|v| v / rho).collect();
        let norm = (rho * dot(&mu, &mu)).sqrt();
        if norm > 0.0 {
            mu.iter_mut().for_each(|m| *m *= mu_norm / norm);
        } else if mu_norm != 0.0 {
            return Err(Error::Domain(
                "a nonzero |μ| needs a nonzero tangent vector".into(),
            ));
        }
        Ok(Self {
            x,
            chart,
            y,
            nu,
            mu,
        })
    }

    /// A radial-set point `x = 0`, `μ = 0`, `ν = ±λ` above `ω`.
    pub fn radial(omega: &[f64], lambda: f64, outgoing: bool) -> Result<Self> {
        let zero = vec![0.0; omega.len()];
        Self::from_sphere(
            0.0,
            omega,
            &zero,
            if outgoing { lambda } else { -lambda },
            0.0,
        )
    }

    /// The same point in the other chart.
    pub fn switch_chart(&self) -> Self {
        let s = dot(&self.y, &self.y);
        let y: Vec<f64> = self.y.iter().map(|v| v / s).collect();
        let yhat_mu = dot(&self.y, &self.mu) / s;
        let mu: Vec<f64> = self
            .mu
            .iter()
            .zip(&self.y)
            .map(|(m, v)| s * (m - 2.0 * yhat_mu * v))
            .collect();
        Self {
            x: self.x,
            chart: match self.chart {
                Chart::North => Chart::South,
                Chart::South => Chart::North,
            },
            y,
            nu: self.nu,
            mu,
        }
    }

    fn pack(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.y.len() + 2);
        v.push(self.x);
        v.extend_from_slice(&self.y);
        v.push(self.nu);
        v.extend_from_slice(&self.mu);
        v
    }

    fn unpack(chart: Chart, v: &[f64]) -> Self {
        let m = (v.len() - 2) / 2;
        Self {
            x: v[0],
            chart,
            y: v[1..1 + m].to_vec(),
            nu: v[1 + m],
            mu: v[2 + m..].to_vec(),
        }
    }
}

/// The rescaled Hamilton field on packed coordinates `(x, y, ν, μ)`; the same in both charts.
pub fn hamilton_field(v: &[f64]) -> Vec<f64> {
    let m = (v.len() - 2) / 2;
    let (x, y, nu, mu) = (v[0], &v[1..1 + m], v[1 + m], &v[2 + m..]);
    let s = 1.0 + dot(y, y);
    let rho = 0.25 * s * s;
    let mm = dot(mu, mu);
    let mut out = Vec::with_capacity(v.len());
    out.push(-2.0 * nu * x);
    out.extend(mu.iter().map(|u| 2.0 * rho * u));
    out.push(2.0 * rho * mm);
    out.extend(mu.iter().zip(y).map(|(u, w)| -2.0 * nu * u - s * w * mm));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// The integration stopped early because `x` reached [`INTERIOR_X`].
    pub left_collar: bool,
}

impl Trajectory {
    pub fn last(&self) -> &PhasePoint {
        self.points
            .last()
            .expect("trajectories hold at least the initial point")
    }

    /// Largest `|E(t) − E(0)|` with `E = ν² + |μ|²_y`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.points[0].energy();
        self.points
            .iter()
            .map(|p| (p.energy() - e0).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `t,x,chart,y_1..,nu,mu_1..,mu_norm,l_plus` rows.
    pub fn write_csv(&self, weight: &WeightSpec, lambda: f64, mut out: impl Write) -> Result<()> {
        let m = self.points[0].y.len();
        let ys: Vec<String> = (1..=m).map(|j| format!("y{j}")).collect();
        let mus: Vec<String> = (1..=m).map(|j| format!("mu{j}")).collect();
        writeln!(
            out,
            "t,x,chart,{},nu,{},mu_norm,l_plus",
            ys.join(","),
            mus.join(",")
        )?;
        for (t, p) in self.times.iter().zip(&self.points) {
            let chart = match p.chart {
                Chart::North => "north",
                Chart::South => "south",
            };
            let y: Vec<String> = p.y.iter().map(|v| format!("{v:.15e}")).collect();
            let mu: Vec<String> = p.mu.iter().map(|v| format!("{v:.15e}")).collect();
            writeln!(
                out,
                "{t:.15e},{:.15e},{chart},{},{:.15e},{},{:.15e},{:.15e}",
                p.x,
                y.join(","),
                p.nu,
                mu.join(","),
                p.mu_norm(),
                weight.l_plus(p.nu, p.mu_norm(), lambda)
            )?;
        }
        Ok(())
    }
}

/// Integrates the rescaled Hamilton field from `q0` at `t_span.0` to `t_span.1`
/// (either direction), recording every accepted step. Stops early once `x`
/// reaches [`INTERIOR_X`].
pub fn hamilton_flow(q0: &PhasePoint, t_span: (f64, f64), lambda: f64) -> Result<Trajectory> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("λ must be positive, got {lambda}")));
    }
    if q0.mu.len() != q0.y.len() || q0.y.is_empty() {
        return Err(Error::Shape(
            "y and μ must have the same length n − 1 ≥ 1".into(),
        ));
    }
    if q0.x < 0.0 {
        return Err(Error::Domain(format!(
            "x must be nonnegative, got {}",
            q0.x
        )));
    }
    let (t0, t1) = t_span;
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut chart = q0.chart;
    let mut y = q0.pack();
    let mut t = t0;
    let mut h = (0.01 / lambda).min((t1 - t0).abs()).max(1e-12);
    let mut traj = Trajectory {
        times: vec![t0],
        points: vec![q0.clone()],
        left_collar: false,
    };
    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::Integrator(format!(
                "step budget exhausted near t = {t}"
            )));
        }
        let step = h.min((t1 - t).abs());
        let (next, err) = dopri_step(|_, v| hamilton_field(v), t, &y, step * dir);
        let e = next
            .iter()
            .zip(&y)
            .zip(&err)
            .map(|((a, b), d)| d.abs() / (FLOW_TOL + FLOW_TOL * a.abs().max(b.abs())))
            .fold(0.0, f64::max);
        if !e.is_finite() {
            return Err(Error::Integrator(format!("non-finite state near t = {t}")));
        }
        if e <= 1.0 {
            t = if step >= (t1 - t).abs() {
                t1
            } else {
                t + step * dir
            };
            y = next;
            let mut p = PhasePoint::unpack(chart, &y);
            if dot(&p.y, &p.y).sqrt() > CHART_SWITCH {
                p = p.switch_chart();
                chart = p.chart;
                y = p.pack();
            }
            traj.times.push(t);
            traj.points.push(p);
            if y[0] >= INTERIOR_X {
                traj.left_collar = true;
                break;
            }
        }
        let factor = if e == 0.0 {
            5.0
        } else {
            (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = step * factor;
        if h < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::Integrator(format!(
                "step size underflow near t = {t}"
            )));
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    RPlus,
    RMinus,
    Interior,
    Undecided,
}

/// Classifies where a trajectory ends: at a radial set (`|μ|_y`, `x` and
/// `ν ∓ λ` all below [`LIMIT_TOL`]), in the interior, or undecided.
pub fn classify_limit(traj: &Trajectory, lambda: f64) -> Limit {
    if traj.left_collar {
        return Limit::Interior;
    }
    let p = traj.last();
    if p.x > LIMIT_TOL || p.mu_norm() > LIMIT_TOL {
        return Limit::Undecided;
    }
    if (p.nu - lambda).abs() <= LIMIT_TOL {
        Limit::RPlus
    } else if (p.nu + lambda).abs() <= LIMIT_TOL {
        Limit::RMinus
    } else {
        Limit::Undecided
    }
}

/// Backward and forward limits of the trajectory through `q0`, integrating for time `horizon` each way.
pub fn limits(q0: &PhasePoint, horizon: f64, lambda: f64) -> Result<(Limit, Limit)> {
    let back = hamilton_flow(q0, (0.0, -horizon), lambda)?;
    let fwd = hamilton_flow(q0, (0.0, horizon), lambda)?;
    Ok((classify_limit(&back, lambda), classify_limit(&fwd, lambda)))
}

/// [`limits`] for many initial points in parallel.
pub fn limits_many(
    points: &[PhasePoint],
    horizon: f64,
    lambda: f64,
) -> Result<Vec<(Limit, Limit)>> {
    points
        .par_iter()
        .map(|q| limits(q, horizon, lambda))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialLinearization {
    /// Finite-difference Jacobian of the field in packed coordinates.
    pub jacobian: Vec<Vec<f64>>,
    /// `∂ẋ/∂x`, the eigenvalue of the decoupled `x` direction.
    pub x_eigenvalue: f64,
}

/// Central-difference linearization of the field at the radial set above `ω`.
pub fn linearize_at_radial_set(
    omega: &[f64],
    lambda: f64,
    outgoing: bool,
) -> Result<RadialLinearization> {
    let p = PhasePoint::radial(omega, lambda, outgoing)?.pack();
    let eps = 1e-6;
    let dim = p.len();
    let mut jacobian = vec![vec![0.0; dim]; dim];
    for j in 0..dim {
        let (mut a, mut b) = (p.clone(), p.clone());
        a[j] += eps;
        b[j] -= eps;
        let (fa, fb) = (hamilton_field(&a), hamilton_field(&b));
        for i in 0..dim {
            jacobian[i][j] = (fa[i] - fb[i]) / (2.0 * eps);
        }
    }
    let x_eigenvalue = jacobian[0][0];
    if jacobian[0]
        .iter()
        .skip(1)
        .zip(1..)
        .any(|(v, j)| j != p.len() / 2 && v.abs() > 1e-12)
    {
        return Err(Error::Accuracy(
            "x direction does not decouple at the radial set".into(),
        ));
    }
    Ok(RadialLinearization {
        jacobian,
        x_eigenvalue,
    })
}

/// The spatial weight `𝗅₊` on the characteristic set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Constant {
        value: f64,
    },
    /// `−1/2 + δ` for `ν/λ ≤ −1 + flat`, `−1/2 − δ` for `ν/λ ≥ 1 − flat`,
    /// smooth and monotone in `ν` between; `reversed` swaps the two ends.
    Interpolated {
        delta: f64,
        flat: f64,
        reversed: bool,
    },
}

impl WeightSpec {
    pub fn standard(delta: f64) -> Self {
        Self::Interpolated {
            delta,
            flat: 0.1,
            reversed: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Constant { value } if !value.is_finite() => {
                Err(Error::Config("weight must be finite".into()))
            }
            Self::Interpolated { delta, flat, .. }
                if !(delta > 0.0 && (0.0..1.0).contains(&flat)) =>
            {
                Err(Error::Config(format!(
                    "weight needs δ > 0 and flat width in [0, 1), got δ = {delta}, flat = {flat}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// `𝗅₊(ν, |μ|)`; the interpolated weights depend on `ν` only.
    pub fn l_plus(&self, nu: f64, _mu_norm: f64, lambda: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Interpolated {
                delta,
                flat,
                reversed,
            } => {
                let t = (nu / lambda + 1.0 - flat) / (2.0 - 2.0 * flat);
                let s = smoothstep(t);
                let s = if reversed { 1.0 - s } else { s };
                -0.5 + delta * (1.0 - 2.0 * s)
            }
        }
    }

    /// `𝗅₋ = −1 − 𝗅₊`.
    pub fn l_minus(&self, nu: f64, mu_norm: f64, lambda: f64) -> f64 {
        -1.0 - self.l_plus(nu, mu_norm, lambda)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub l_plus: Vec<f64>,
    pub l_minus: Vec<f64>,
    /// Largest increase of `𝗅₊` between consecutive samples, in the direction of the flow.
    pub worst_increase: f64,
}

/// Checks that `𝗅₊` is nonincreasing and `𝗅₋` nondecreasing along the flow
/// direction of `traj`, up to [`WEIGHT_SLACK`].
pub fn check_weight(weight: &WeightSpec, traj: &Trajectory, lambda: f64) -> Result<WeightReport> {
    weight.validate()?;
    let l_plus: Vec<f64> = traj
        .points
        .iter()
        .map(|p| weight.l_plus(p.nu, p.mu_norm(), lambda))
        .collect();
    let l_minus: Vec<f64> = l_plus.iter().map(|v| -1.0 - v).collect();
    // Samples are stored in integration order; flip when integrating backward.
    let backward = traj.times.len() > 1 && traj.times[1] < traj.times[0];
    let mut worst = f64::NEG_INFINITY;
    for j in 1..l_plus.len() {
        let (a, b) = if backward { (j, j - 1) } else { (j - 1, j) };
        let increase = l_plus[b] - l_plus[a];
        let decrease_minus = l_minus[a] - l_minus[b];
        let change = increase.max(decrease_minus);
        worst = worst.max(change);
        if change > WEIGHT_SLACK {
            let (t_start, t_end) = (traj.times[a], traj.times[b]);
            return Err(Error::WeightNotMonotone {
                t_start,
                t_end,
                change,
            });
        }
    }
    Ok(WeightReport {
        l_plus,
        l_minus,
        worst_increase: worst.max(0.0),
    })
}
