//! Radiation pattern `g` of a solution, the decay exponent of the stripped
//! remainder, and the flux balance `‖g‖² − ‖f‖²`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::{AngularSpectrum, SphereGrid};
use crate::error::{Error, Result};
use crate::fields::{Cutoff, Field};
use crate::resolvent::{outgoing_amplitude, Resolvent};
use crate::solver::fit_slope;

/// Default fit window as fractions of `r_max`.
pub const DEFAULT_WINDOW: (f64, f64) = (0.6, 0.95);
/// Residuals below this fraction of the pattern size count as exact; `ε′` is then infinite.
pub const ROUNDING_FLOOR: f64 = 1e-11;
/// Nodes on each side used in the local projection onto outgoing and incoming solutions.
const PROJECTION_HALF_WIDTH: usize = 8;
/// Nodes sampled for the pattern fit.
const PATTERN_SAMPLES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldReport {
    pub g: AngularSpectrum,
    /// Decay exponent of the stripped remainder, `−d log residual / d log r`.
    pub eps_prime: f64,
    pub fit_window: (f64, f64),
    /// `(r, ‖r^{(n−1)/2} e^{−iλr} w₊(r, ·) − g‖)`, each an RMS over one period of `e^{2iλr}`.
    pub residual_curve: Vec<(f64, f64)>,
    pub residual_monotone: bool,
    /// `‖f‖_{L²}`.
    pub flux_in: f64,
    /// `‖g‖_{L²}`.
    pub flux_out: f64,
}

/// `[0.6 r_max, 0.95 r_max]`.
pub fn default_window(u: &Field) -> (f64, f64) {
    let r_max = u.domain().grid().r_max();
    (DEFAULT_WINDOW.0 * r_max, DEFAULT_WINDOW.1 * r_max)
}

/// Extracts `g` from `u = u₋ + w₊` given the incoming data `f`.
///
/// Per mode, `u` is projected onto the outgoing and incoming radial solutions
/// of the resolvent; the outgoing coefficient is fitted as `a + b r^{−ε′}`
/// across the window and `g = a`. The residual curve uses the plain stripped
/// remainder `r^{(n−1)/2} e^{−iλr}(u − u₋)`.
pub fn extract_outgoing(
    u: &Field,
    f: &AngularSpectrum,
    res: &Resolvent,
    chi: &Cutoff,
    window: (f64, f64),
) -> Result<FarFieldReport> {
    let d = res.domain();
    if !u.domain().same_as(d) {
        return Err(Error::Shape("field and resolvent domains differ".into()));
    }
    if f.dim() != d.dim() {
        return Err(Error::Shape(
            "incoming data and field dimensions differ".into(),
        ));
    }
    let grid = d.grid();
    let (lo, hi) = window;
    if !(lo < hi && hi <= grid.r_max()) {
        return Err(Error::Config(format!(
            "fit window [{lo}, {hi}] is not inside the grid"
        )));
    }
    if lo < 2.0 * chi.r0() {
        return Err(Error::Config(format!(
            "fit window starts at {lo}, inside the cutoff transition ending at {}",
            2.0 * chi.r0()
        )));
    }
    let f = f.resized(d.max_degree());
    let nodes = grid.nodes();
    let start = grid.index_at_or_above(lo);
    let end = grid.index_at_or_above(hi).min(grid.len() - 1);
    if end < start + 8 {
        return Err(Error::Config("fit window holds fewer than 8 nodes".into()));
    }
    let a = (d.dim() as f64 - 1.0) / 2.0;
    let lambda = d.lambda();
    let modes = d.modes();
    let nm = d.mode_count();
    let incoming = |r: f64| Complex64::from_polar(r.powf(-a), -lambda * r);

    // Stripped remainder r^a e^{−iλr} w₊ at every window node.
    let stripped: Vec<Vec<Complex64>> = (start..=end)
        .map(|i| {
            let r = nodes[i];
            let strip = Complex64::from_polar(r.powf(a), -lambda * r);
            let row = &u.modes()[i * nm..(i + 1) * nm];
            (0..nm)
                .map(|k| (row[k] - incoming(r) * f.coeffs[k]) * strip)
                .collect()
        })
        .collect();

    // Outgoing coefficient of u per mode: local least squares on {psi, conj psi}
    // around each sampled node.
    let stride = (end - start + 1).div_ceil(PATTERN_SAMPLES).max(1);
    let sample: Vec<usize> = (start..=end).step_by(stride).collect();
    let last = grid.len() - 1;
    let projected: Vec<Vec<Complex64>> = (0..nm)
        .into_par_iter()
        .map(|k| {
            let greens = res.greens(modes.degree(k));
            let column = u.mode_column(k);
            let amp = outgoing_amplitude(greens.order, lambda);
            sample
                .iter()
                .map(|&i| {
                    let lo = i.saturating_sub(PROJECTION_HALF_WIDTH);
                    let hi = (i + PROJECTION_HALF_WIDTH).min(last);
                    let (mut g11, mut g12, mut g22) = (0.0, Complex64::new(0.0, 0.0), 0.0);
                    let (mut b1, mut b2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                    for j in lo..=hi {
                        let p = greens.psi[j];
                        let q = p.conj();
                        g11 += p.norm_sqr();
                        g22 += q.norm_sqr();
                        g12 += p.conj() * q;
                        b1 += p.conj() * column[j];
                        b2 += q.conj() * column[j];
                    }
                    let det = g11 * g22 - g12.norm_sqr();
                    amp * (b1 * g22 - g12 * b2) / det
                })
                .collect()
        })
        .collect();

    let block = ((PI / lambda) / grid.max_spacing()).ceil().max(1.0) as usize;
    let curve_of = |g: &AngularSpectrum| -> Vec<(f64, f64)> {
        stripped
            .chunks(block)
            .filter(|c| c.len() == block)
            .enumerate()
            .map(|(j, c)| {
                let i0 = start + j * block;
                let r_mid = 0.5 * (nodes[i0] + nodes[i0 + block - 1]);
                let ms: f64 = c
                    .iter()
                    .map(|row| {
                        row.iter()
                            .zip(&g.coeffs)
                            .map(|(s, gk)| (s - gk).norm_sqr())
                            .sum::<f64>()
                    })
                    .sum::<f64>()
                    / block as f64;
                (r_mid, ms.sqrt())
            })
            .collect()
    };
    let slope_of = |curve: &[(f64, f64)]| -> Option<f64> {
        let pts: Vec<(f64, f64)> = curve
            .iter()
            .filter(|p| p.1 > 0.0)
            .map(|p| (p.0.ln(), p.1.ln()))
            .collect();
        fit_slope(&pts).map(|s| -s)
    };

    let sample_r: Vec<f64> = sample.iter().map(|&i| nodes[i]).collect();
    let plain = AngularSpectrum::from_coeffs(
        modes,
        projected
            .iter()
            .map(|p| p.iter().sum::<Complex64>() / p.len() as f64)
            .collect(),
    )?;
    let eps_first = slope_of(&curve_of(&plain)).unwrap_or(f64::NAN);
    let g = if eps_first.is_finite() && eps_first > 0.0 {
        AngularSpectrum::from_coeffs(
            modes,
            projected
                .iter()
                .map(|p| limit_fit(&sample_r, p, eps_first))
                .collect(),
        )?
    } else {
        plain
    };
    let residual_curve = curve_of(&g);
    let scale = g.l2_norm().max(f.l2_norm());
    let at_rounding = residual_curve.iter().all(|p| p.1 <= ROUNDING_FLOOR * scale);
    let eps_prime = if at_rounding {
        f64::INFINITY
    } else {
        slope_of(&residual_curve).unwrap_or(f64::NAN)
    };
    if !(eps_prime > 0.0) {
        return Err(Error::Accuracy(format!(
            "stripped remainder does not decay over [{lo}, {hi}]: fitted exponent {eps_prime:.3}"
        )));
    }
    let residual_monotone = at_rounding || residual_curve.windows(2).all(|w| w[1].1 <= w[0].1);
    if !residual_monotone {
        log::warn!("far-field residual is not monotone over [{lo}, {hi}]; the ε′ fit is rough");
    }
    Ok(FarFieldReport {
        flux_in: f.l2_norm(),
        flux_out: g.l2_norm(),
        g,
        eps_prime,
        fit_window: (nodes[start], nodes[end]),
        residual_curve,
        residual_monotone,
    })
}

/// `a` from the least-squares fit `y ≈ a + b r^{−κ}`.
fn limit_fit(r: &[f64], y: &[Complex64], kappa: f64) -> Complex64 {
    let x: Vec<f64> = r.iter().map(|v| v.powf(-kappa)).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<Complex64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return my;
    }
    let sxy: Complex64 = x.iter().zip(y).map(|(v, w)| (w - my) * (v - mx)).sum();
    my - sxy / sxx * mx
}

/// `|‖f‖² − ‖g‖²| / ‖f‖²`.
pub fn flux_balance(f: &AngularSpectrum, g: &AngularSpectrum) -> Result<f64> {
    if f.modes != g.modes {
        return Err(Error::Shape(
            "incoming and outgoing patterns have different mode sets".into(),
        ));
    }
    let fi = f.l2_norm().powi(2);
    let go = g.l2_norm().powi(2);
    Ok(if fi > 0.0 { (fi - go).abs() / fi } else { go })
}

/// `−Im ∫ ū N / λ` over the grid, the value of `‖g‖² − ‖f‖²` implied by `Pu = N`.
pub fn pairing_flux(u: &Field, n_u: &Field) -> Result<f64> {
    let d = u.domain();
    if !n_u.domain().same_as(d) {
        return Err(Error::Shape("field domains differ".into()));
    }
    let nm = d.mode_count();
    let (um, nmod) = (u.modes(), n_u.modes());
    let density: Vec<Complex64> = (0..d.radial_count())
        .map(|i| {
            let r = d.nodes()[i];
            let s: Complex64 = (i * nm..(i + 1) * nm).map(|j| um[j].conj() * nmod[j]).sum();
            s * r.powi(d.dim() as i32 - 1)
        })
        .collect();
    Ok(-d.grid().integrate(&density).im / d.lambda())
}

/// Writes `l,m,re,im` rows.
pub fn write_pattern_csv(g: &AngularSpectrum, mut out: impl Write) -> Result<()> {
    writeln!(out, "l,m,re,im")?;
    for (k, c) in g.coeffs.iter().enumerate() {
        let (l, m) = g.modes.mode(k);
        writeln!(out, "{l},{m},{:.17e},{:.17e}", c.re, c.im)?;
    }
    Ok(())
}

/// Writes the pattern sampled on the sphere grid as `theta,phi,re,im,abs` rows.
pub fn write_pattern_samples_csv(
    g: &AngularSpectrum,
    sphere: &SphereGrid,
    mut out: impl Write,
) -> Result<()> {
    if sphere.modes() != g.modes {
        return Err(Error::Shape(
            "sphere grid and pattern have different mode sets".into(),
        ));
    }
    let values = sphere.inverse(g)?;
    writeln!(out, "theta,phi,re,im,abs")?;
    for ((t, p), v) in sphere.angles().iter().zip(&values) {
        writeln!(
            out,
            "{t:.17e},{p:.17e},{:.17e},{:.17e},{:.17e}",
            v.re,
            v.im,
            v.norm()
        )?;
    }
    Ok(())
}
