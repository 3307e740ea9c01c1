//! Linear eigenfunctions with prescribed incoming data, per-mode scattering
//! phases, and the incoming/outgoing split `u₀ = u₋ + u₊`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::angular::AngularSpectrum;
use crate::error::{Error, Result};
use crate::fields::{Cutoff, Domain, Field, RadialGrid};
use crate::resolvent::{ModeGreens, Potential, Resolvent};

/// Largest relative variation of the projected coefficients across the matching window.
pub const PHASE_DRIFT_TOL: f64 = 1e-3;
/// Largest allowed `‖u₊ + R(P u₋)‖ / ‖u₊‖`.
pub const SPLIT_CHECK_TOL: f64 = 1e-3;

/// Coefficients of `r^{−(n−1)/2} e^{∓iλr}` in the large-`r` expansion of the regular solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeAsymptotics {
    pub c_in: Complex64,
    pub c_out: Complex64,
}

impl ModeAsymptotics {
    /// `σ_l = c_out / c_in`.
    pub fn sigma(&self) -> Complex64 {
        self.c_out / self.c_in
    }
}

/// `J_ν(λr) r^{−(n−2)/2} ~ √(2/(πλ)) r^{−(n−1)/2} cos(λr − νπ/2 − π/4)`.
pub fn free_asymptotics(order: f64, lambda: f64) -> ModeAsymptotics {
    let amp = 0.5 * (2.0 / (PI * lambda)).sqrt();
    let phase = order * PI / 2.0 + PI / 4.0;
    ModeAsymptotics {
        c_in: Complex64::from_polar(amp, phase),
        c_out: Complex64::from_polar(amp, -phase),
    }
}

fn wronskian(
    r: f64,
    dim: usize,
    x: Complex64,
    xp: Complex64,
    y: Complex64,
    yp: Complex64,
) -> Complex64 {
    -(x * yp - xp * y) * r.powi(dim as i32 - 1)
}

/// Projects `phi = a·psi + b·conj(psi)` on `[0.7 r_max, r_max]` and converts
/// to asymptotic coefficients. Requires `psi ~ H_ν(λr) r^{−(n−2)/2}` at infinity.
pub fn projected_asymptotics(greens: &ModeGreens, grid: &RadialGrid) -> Result<ModeAsymptotics> {
    let start = grid.index_at_or_above(0.7 * grid.r_max());
    let nodes = grid.nodes();
    let n = greens.dim;
    let (mut a_all, mut b_all) = (Vec::new(), Vec::new());
    for (i, &r) in nodes.iter().enumerate().skip(start) {
        let (phi, dphi) = (greens.phi[i], greens.phi_prime[i]);
        let (psi, dpsi) = (greens.psi[i], greens.psi_prime[i]);
        let w_out_in = wronskian(r, n, psi, dpsi, psi.conj(), dpsi.conj());
        a_all.push(wronskian(r, n, phi, dphi, psi.conj(), dpsi.conj()) / w_out_in);
        b_all.push(-wronskian(r, n, phi, dphi, psi, dpsi) / w_out_in);
    }
    let mean = |v: &[Complex64]| v.iter().sum::<Complex64>() / v.len() as f64;
    let (a, b) = (mean(&a_all), mean(&b_all));
    let drift = a_all
        .iter()
        .map(|x| (x - a).norm() / a.norm())
        .chain(b_all.iter().map(|x| (x - b).norm() / b.norm()))
        .fold(0.0, f64::max);
    if drift > PHASE_DRIFT_TOL || !drift.is_finite() {
        return Err(Error::Accuracy(format!(
            "asymptotic matching for degree {} drifts by {drift:.2e} across [0.7 r_max, r_max]",
            greens.degree
        )));
    }
    let free = free_asymptotics(greens.order, greens.lambda);
    // Free: phi = (psi + conj psi)/2, so a = b = 1/2.
    Ok(ModeAsymptotics {
        c_in: free.c_in * (2.0 * b),
        c_out: free.c_out * (2.0 * a),
    })
}

/// Asymptotic coefficients for every degree `0..=L` of the resolvent's domain.
pub fn mode_asymptotics(res: &Resolvent) -> Result<Vec<ModeAsymptotics>> {
    let d = res.domain();
    (0..=d.max_degree())
        .into_par_iter()
        .map(|l| {
            let g = res.greens(l);
            match res.potential() {
                None => Ok(free_asymptotics(g.order, g.lambda)),
                Some(_) => projected_asymptotics(g, d.grid()),
            }
        })
        .collect()
}

/// Per-degree phases `σ_l` relating outgoing to incoming data, `g_{lm} = σ_l f_{lm}`.
pub fn scattering_matrix(res: &Resolvent) -> Result<Vec<Complex64>> {
    Ok(mode_asymptotics(res)?
        .iter()
        .map(ModeAsymptotics::sigma)
        .collect())
}

/// Mean of `σ_l (−1)^l`, the constant `c` in `g(ω) = c·f(−ω)` when the phases are of that form.
pub fn implied_global_constant(phases: &[Complex64]) -> Complex64 {
    let sum: Complex64 = phases
        .iter()
        .enumerate()
        .map(|(l, s)| if l % 2 == 0 { *s } else { -*s })
        .sum();
    sum / phases.len().max(1) as f64
}

#[derive(Debug, Clone)]
pub struct LinearEigenfunction {
    pub f: AngularSpectrum,
    pub g0: AngularSpectrum,
    pub u0: Field,
    /// Multiplier of the regular solution in each mode.
    pub amplitudes: Vec<Complex64>,
    pub asymptotics: Vec<ModeAsymptotics>,
}

fn check_spectrum(f: &AngularSpectrum, domain: &Domain) -> Result<AngularSpectrum> {
    if f.dim() != domain.dim() {
        return Err(Error::Shape(format!(
            "incoming data on S^{} for an n = {} domain",
            f.dim() - 1,
            domain.dim()
        )));
    }
    let big_l = domain.max_degree();
    if f.max_degree() > big_l {
        let modes = f.modes;
        if let Some(k) =
            (0..modes.count()).find(|&k| modes.degree(k) > big_l && f.coeffs[k].norm() > 0.0)
        {
            return Err(Error::Config(format!(
                "incoming data has degree {} content above the band limit {big_l}",
                modes.degree(k)
            )));
        }
    }
    Ok(f.resized(big_l))
}

/// The eigenfunction `u₀ = Σ a_lm phi_l Y_lm` whose incoming coefficient is `f`.
pub fn linear_eigenfunction(f: &AngularSpectrum, res: &Resolvent) -> Result<LinearEigenfunction> {
    let d = res.domain();
    let f = check_spectrum(f, d)?;
    let asymptotics = mode_asymptotics(res)?;
    let modes = d.modes();
    let amplitudes: Vec<Complex64> = (0..modes.count())
        .map(|k| f.coeffs[k] / asymptotics[modes.degree(k)].c_in)
        .collect();
    let g0 = f.map_by_degree(|l, c| c * asymptotics[l].sigma());
    let profiles: Vec<Vec<Complex64>> = (0..=d.max_degree())
        .map(|l| res.greens(l).phi.clone())
        .collect();
    let unit = AngularSpectrum::from_coeffs(modes, amplitudes.clone())?;
    let u0 = Field::from_degree_profiles(d, &unit, &profiles)?;
    Ok(LinearEigenfunction {
        f,
        g0,
        u0,
        amplitudes,
        asymptotics,
    })
}

/// `u₋ = χ(r) r^{−(n−1)/2} e^{−iλr} f(ω)`.
pub fn incoming_part(f: &AngularSpectrum, chi: &Cutoff, domain: &Arc<Domain>) -> Result<Field> {
    let f = check_spectrum(f, domain)?;
    let a = (domain.dim() as f64 - 1.0) / 2.0;
    let lam = domain.lambda();
    Ok(Field::from_profiles(domain, |r, k| {
        f.coeffs[k] * Complex64::from_polar(chi.value(r) * r.powf(-a), -lam * r)
    }))
}

/// `P u₋` from the exact derivatives of the radial profile.
pub fn incoming_source(
    f: &AngularSpectrum,
    chi: &Cutoff,
    domain: &Arc<Domain>,
    potential: Option<&Potential>,
) -> Result<Field> {
    let f = check_spectrum(f, domain)?;
    let n = domain.dim() as f64;
    let a = (n - 1.0) / 2.0;
    let lam = domain.lambda();
    let mu = domain.eigenvalues();
    let i = Complex64::new(0.0, 1.0);
    Ok(Field::from_profiles(domain, |r, k| {
        // h = χ·w with w = r^{−a} e^{−iλr}, w′ = p w, w″ = (p² + p′) w.
        let w = Complex64::from_polar(r.powf(-a), -lam * r);
        let p = -a / r - i * lam;
        let wp = p * w;
        let wpp = (p * p + a / (r * r)) * w;
        let (c, c1, c2) = (chi.value(r), chi.d1(r), chi.d2(r));
        let h = w * c;
        let hp = wp * c + w * c1;
        let hpp = wpp * c + wp * (2.0 * c1) + w * c2;
        let v = potential.map_or(0.0, |v| v.value(r));
        f.coeffs[k] * (-hpp - hp * ((n - 1.0) / r) + h * (mu[k] / (r * r) + v - lam * lam))
    }))
}

#[derive(Debug, Clone)]
pub struct IncomingSplit {
    pub u_minus: Field,
    pub u_plus: Field,
    /// `‖u₊ + R(P u₋)‖ / ‖u₊‖`.
    pub cross_check: f64,
}

/// `u₋ = χ r^{−(n−1)/2} e^{−iλr} f` and `u₊ = u₀ − u₋`, verified against `u₊ = −R(P u₋)`.
pub fn split_incoming(
    lin: &LinearEigenfunction,
    chi: &Cutoff,
    res: &Resolvent,
) -> Result<IncomingSplit> {
    let d = res.domain();
    let u_minus = incoming_part(&lin.f, chi, d)?;
    let u_plus = lin.u0.sub(&u_minus)?;
    let scale = u_plus.weighted_l2(0.0);
    if scale == 0.0 {
        return Ok(IncomingSplit {
            u_minus,
            u_plus,
            cross_check: 0.0,
        });
    }
    let source = incoming_source(&lin.f, chi, d, res.potential())?;
    let r = res.outgoing(&source)?;
    let cross_check = u_plus.add(&r)?.weighted_l2(0.0) / scale;
    if !(cross_check <= SPLIT_CHECK_TOL) {
        return Err(Error::Accuracy(format!(
            "u₊ + R(P u₋) is {cross_check:.2e} of u₊; resolvent and grid disagree"
        )));
    }
    Ok(IncomingSplit {
        u_minus,
        u_plus,
        cross_check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_phases_have_unit_modulus() {
        for order in [0.0, 0.5, 1.5, 4.0, 7.5] {
            let s = free_asymptotics(order, 1.3).sigma();
            assert!((s.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn three_dimensional_free_phase() {
        // ν = l + 1/2: σ = e^{−i(lπ + π)} = −(−1)^l.
        for l in 0..6 {
            let s = free_asymptotics(l as f64 + 0.5, 1.0).sigma();
            let expect = if l % 2 == 0 { -1.0 } else { 1.0 };
            assert!((s - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn global_constant_of_alternating_phases() {
        let c = Complex64::new(0.0, -1.0);
        let phases: Vec<Complex64> = (0..5).map(|l| if l % 2 == 0 { c } else { -c }).collect();
        assert!((implied_global_constant(&phases) - c).norm() < 1e-15);
    }
}
