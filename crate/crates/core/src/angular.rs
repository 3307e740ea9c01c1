//! Harmonic analysis on the sphere at infinity `S^{n-1}` for `n = 2, 3`.
//!
//! Bases: `e^{ilθ}/√(2π)` on the circle, orthonormal complex spherical
//! harmonics with the Condon–Shortley phase on `S²`. Every mode is labelled
//! by `(l, m)`; on the circle `l` is the signed frequency and `m = 0`.
//!
//! The `S²` grid is Gauss–Legendre in `cos θ` (`L + 1` rings) times `2L + 2`
//! equispaced longitudes, exact for polynomials of degree `2L + 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let nf = count as f64;
    for i in 0..(count + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..count {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        // Recompute the derivative at the converged node for the weight.
        let mut p1 = 1.0;
        let mut p2 = 0.0;
        for j in 0..count {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
        }
        if z * z < 1.0 {
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[count - 1 - i] = z;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    (nodes, weights)
}

/// The set of harmonic modes of degree at most `max_degree` on `S^{dim-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeSet {
    pub dim: usize,
    pub max_degree: usize,
}

impl ModeSet {
    pub fn new(dim: usize, max_degree: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Config(format!(
                "sphere transforms are available for n = 2, 3 only, got n = {dim}"
            )));
        }
        Ok(Self { dim, max_degree })
    }

    pub fn count(&self) -> usize {
        match self.dim {
            2 => 2 * self.max_degree + 1,
            _ => (self.max_degree + 1) * (self.max_degree + 1),
        }
    }

    /// Flat index of mode `(l, m)`, if it belongs to the set.
    pub fn index(&self, l: i64, m: i64) -> Option<usize> {
        let big_l = self.max_degree as i64;
        match self.dim {
            2 => (m == 0 && l.abs() <= big_l).then(|| (l + big_l) as usize),
            _ => (l >= 0 && l <= big_l && m.abs() <= l).then(|| (l * l + l + m) as usize),
        }
    }

    /// `(l, m)` of a flat index.
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        match self.dim {
            2 => (idx as i64 - self.max_degree as i64, 0),
            _ => {
                let l = (idx as f64).sqrt() as i64;
                let l = if (l + 1) * (l + 1) <= idx as i64 {
                    l + 1
                } else {
                    l
                };
                (l, idx as i64 - l * l - l)
            }
        }
    }

    /// Harmonic degree `|l|` of a flat index.
    pub fn degree(&self, idx: usize) -> usize {
        self.mode(idx).0.unsigned_abs() as usize
    }

    /// Eigenvalue `l(l + n − 2)` of the sphere Laplacian on degree `l`.
    pub fn eigenvalue_of_degree(&self, l: usize) -> f64 {
        let l = l as f64;
        l * (l + self.dim as f64 - 2.0)
    }

    pub fn eigenvalue(&self, idx: usize) -> f64 {
        self.eigenvalue_of_degree(self.degree(idx))
    }

    /// Measure of the unit sphere `S^{dim-1}`.
    pub fn sphere_measure(&self) -> f64 {
        if self.dim == 2 {
            2.0 * PI
        } else {
            4.0 * PI
        }
    }
}

/// Coefficients of a function on `S^{n-1}` in the orthonormal harmonic basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularSpectrum {
    pub modes: ModeSet,
    pub coeffs: Vec<Complex64>,
}

impl AngularSpectrum {
    pub fn zeros(dim: usize, max_degree: usize) -> Result<Self> {
        let modes = ModeSet::new(dim, max_degree)?;
        Ok(Self {
            modes,
            coeffs: vec![Complex64::new(0.0, 0.0); modes.count()],
        })
    }

    pub fn from_coeffs(modes: ModeSet, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != modes.count() {
            return Err(Error::Shape(format!(
                "{} coefficients supplied for {} modes",
                coeffs.len(),
                modes.count()
            )));
        }
        Ok(Self { modes, coeffs })
    }

    /// Spectrum with the listed `(l, m, value)` entries and zeros elsewhere.
    pub fn from_modes(
        dim: usize,
        max_degree: usize,
        entries: &[(i64, i64, Complex64)],
    ) -> Result<Self> {
        let mut s = Self::zeros(dim, max_degree)?;
        for &(l, m, c) in entries {
            s.set(l, m, c)?;
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.modes.dim
    }

    pub fn max_degree(&self) -> usize {
        self.modes.max_degree
    }

    pub fn get(&self, l: i64, m: i64) -> Complex64 {
        self.modes
            .index(l, m)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn set(&mut self, l: i64, m: i64, value: Complex64) -> Result<()> {
        let idx = self.modes.index(l, m).ok_or_else(|| {
            Error::Shape(format!(
                "mode ({l}, {m}) is outside the n = {} band of degree {}",
                self.dim(),
                self.max_degree()
            ))
        })?;
        self.coeffs[idx] = value;
        Ok(())
    }

    /// Zero-padded or truncated copy at a different band limit.
    pub fn resized(&self, max_degree: usize) -> Self {
        let modes = ModeSet {
            dim: self.modes.dim,
            max_degree,
        };
        let coeffs = (0..modes.count())
            .map(|i| {
                let (l, m) = modes.mode(i);
                self.get(l, m)
            })
            .collect();
        Self { modes, coeffs }
    }

    /// Spectrum of `ω ↦ f(−ω)`: degree-`l` coefficients pick up `(−1)^l`.
    pub fn antipodal(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| if self.modes.degree(i) % 2 == 1 { -c } else { c })
            .collect();
        Self {
            modes: self.modes,
            coeffs,
        }
    }

    /// `H^k(S^{n-1})` norm with multiplier `(1 + l(l+n−2))^{k/2}`.
    pub fn sobolev_norm(&self, k: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (1.0 + self.modes.eigenvalue(i)).powf(k) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            modes: self.modes,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Pointwise map of coefficients by degree.
    pub fn map_by_degree(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Self {
            modes: self.modes,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| f(self.modes.degree(i), c))
                .collect(),
        }
    }

    /// Largest coefficient-wise distance to `other` (padded to a common band).
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let big_l = self.max_degree().max(other.max_degree());
        let a = self.resized(big_l);
        let b = other.resized(big_l);
        a.coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

/// Quadrature grid on `S^{n-1}` matched to a band limit, with transform tables.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    modes: ModeSet,
    /// Colatitudes (`n = 3`) or angles (`n = 2`) of the rings.
    theta: Vec<f64>,
    sin_theta: Vec<f64>,
    /// Longitudes (`n = 3` only).
    phi: Vec<f64>,
    ring_weights: Vec<f64>,
    weights: Vec<f64>,
    /// `P̄_l^m(cos θ_i)` for `m ≥ 0`, indexed `[i][l(l+1)/2 + m]`.
    legendre: Vec<Vec<f64>>,
    /// `d/dθ P̄_l^m(cos θ_i)`, same layout.
    legendre_dtheta: Vec<Vec<f64>>,
    legendre_d2theta: Vec<Vec<f64>>,
    /// `e^{i m φ_j}` for `m = −L..=L`, indexed `[m + L][j]`.
    phase: Vec<Vec<Complex64>>,
}

fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Normalised associated Legendre functions `P̄_l^m(x)`, `0 ≤ m ≤ l ≤ max_l`,
/// with `Y_l^m(θ, φ) = P̄_l^m(cos θ) e^{imφ}` orthonormal on `S²`.
pub fn normalized_legendre(max_l: usize, x: f64) -> Vec<f64> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut p = vec![0.0; tri(max_l, max_l) + 1];
    p[0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=max_l {
        let mf = m as f64;
        p[tri(m, m)] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[tri(m - 1, m - 1)];
    }
    for m in 0..max_l {
        let mf = m as f64;
        p[tri(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * x * p[tri(m, m)];
        for l in (m + 2)..=max_l {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            p[tri(l, m)] = a * (x * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    p
}

/// `d/dθ P̄_l^m(cos θ)` from the ladder relation in `m`, given the table at the same point.
fn legendre_dtheta(max_l: usize, p: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; p.len()];
    for l in 0..=max_l {
        let lf = l as f64;
        for m in 0..=l {
            let mf = m as f64;
            let up = if m < l {
                ((lf - mf) * (lf + mf + 1.0)).sqrt() * p[tri(l, m + 1)]
            } else {
                0.0
            };
            let down = if m == 0 {
                // P̄_l^{-1} = −P̄_l^1
                if l >= 1 {
                    -(lf * (lf + 1.0)).sqrt() * p[tri(l, 1)]
                } else {
                    0.0
                }
            } else {
                ((lf + mf) * (lf - mf + 1.0)).sqrt() * p[tri(l, m - 1)]
            };
            d[tri(l, m)] = 0.5 * (up - down);
        }
    }
    d
}

impl SphereGrid {
    pub fn new(dim: usize, max_degree: usize) -> Result<Self> {
        let modes = ModeSet::new(dim, max_degree)?;
        let big_l = max_degree;
        if dim == 2 {
            let count = 2 * big_l + 2;
            let theta: Vec<f64> = (0..count)
                .map(|j| 2.0 * PI * j as f64 / count as f64)
                .collect();
            let w = 2.0 * PI / count as f64;
            let phase = (0..=2 * big_l)
                .map(|k| {
                    let m = k as f64 - big_l as f64;
                    theta
                        .iter()
                        .map(|&t| Complex64::from_polar(1.0, m * t))
                        .collect()
                })
                .collect();
            return Ok(Self {
                modes,
                sin_theta: vec![0.0; count],
                phi: Vec::new(),
                ring_weights: vec![w; count],
                weights: vec![w; count],
                theta,
                legendre: Vec::new(),
                legendre_dtheta: Vec::new(),
                legendre_d2theta: Vec::new(),
                phase,
            });
        }
        let (x, wx) = gauss_legendre(big_l + 1);
        let nphi = 2 * big_l + 2;
        let phi: Vec<f64> = (0..nphi)
            .map(|j| 2.0 * PI * j as f64 / nphi as f64)
            .collect();
        let dphi = 2.0 * PI / nphi as f64;
        let theta: Vec<f64> = x.iter().map(|&c| c.acos()).collect();
        let sin_theta: Vec<f64> = x.iter().map(|&c| (1.0 - c * c).sqrt()).collect();
        let legendre: Vec<Vec<f64>> = x.iter().map(|&c| normalized_legendre(big_l, c)).collect();
        let legendre_dtheta: Vec<Vec<f64>> =
            legendre.iter().map(|p| legendre_dtheta(big_l, p)).collect();
        // Second derivative from the associated Legendre equation.
        let legendre_d2theta = (0..x.len())
            .map(|i| {
                let (s, c) = (sin_theta[i], x[i]);
                let mut d2 = vec![0.0; legendre[i].len()];
                for l in 0..=big_l {
                    for m in 0..=l {
                        let (lf, mf) = (l as f64, m as f64);
                        d2[tri(l, m)] = -c / s * legendre_dtheta[i][tri(l, m)]
                            + (mf * mf / (s * s) - lf * (lf + 1.0)) * legendre[i][tri(l, m)];
                    }
                }
                d2
            })
            .collect();
        let mut weights = Vec::with_capacity(x.len() * nphi);
        for &w in &wx {
            for _ in 0..nphi {
                weights.push(w * dphi);
            }
        }
        let phase = (0..=2 * big_l)
            .map(|k| {
                let m = k as f64 - big_l as f64;
                phi.iter()
                    .map(|&p| Complex64::from_polar(1.0, m * p))
                    .collect()
            })
            .collect();
        Ok(Self {
            modes,
            theta,
            sin_theta,
            phi,
            ring_weights: wx,
            weights,
            legendre,
            legendre_dtheta,
            legendre_d2theta,
            phase,
        })
    }

    pub fn modes(&self) -> ModeSet {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.modes.dim
    }

    pub fn max_degree(&self) -> usize {
        self.modes.max_degree
    }

    pub fn point_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn nphi(&self) -> usize {
        if self.dim() == 2 {
            self.theta.len()
        } else {
            self.phi.len()
        }
    }

    /// Unit vectors of the grid points (in `R²` or `R³`).
    pub fn points(&self) -> Vec<Vec<f64>> {
        if self.dim() == 2 {
            return self.theta.iter().map(|t| vec![t.cos(), t.sin()]).collect();
        }
        let mut out = Vec::with_capacity(self.point_count());
        for (i, &t) in self.theta.iter().enumerate() {
            for &p in &self.phi {
                out.push(vec![
                    self.sin_theta[i] * p.cos(),
                    self.sin_theta[i] * p.sin(),
                    t.cos(),
                ]);
            }
        }
        out
    }

    /// Spherical coordinates `(θ, φ)` of each point; on the circle `(θ, 0)`.
    pub fn angles(&self) -> Vec<(f64, f64)> {
        if self.dim() == 2 {
            return self.theta.iter().map(|&t| (t, 0.0)).collect();
        }
        let mut out = Vec::with_capacity(self.point_count());
        for &t in &self.theta {
            for &p in &self.phi {
                out.push((t, p));
            }
        }
        out
    }

    fn check_samples(&self, samples: &[Complex64]) -> Result<()> {
        if samples.len() != self.point_count() {
            return Err(Error::Shape(format!(
                "{} samples given for a grid of {} points (band limit {})",
                samples.len(),
                self.point_count(),
                self.max_degree()
            )));
        }
        Ok(())
    }

    fn check_coeffs(&self, coeffs: &[Complex64]) -> Result<()> {
        if coeffs.len() != self.modes.count() {
            return Err(Error::Shape(format!(
                "{} coefficients given for {} modes",
                coeffs.len(),
                self.modes.count()
            )));
        }
        Ok(())
    }

    /// Quadrature projection onto the harmonic basis, written into `out`.
    pub fn forward_into(&self, samples: &[Complex64], out: &mut [Complex64]) {
        let big_l = self.max_degree();
        if self.dim() == 2 {
            let norm = 1.0 / (2.0 * PI).sqrt();
            for (k, o) in out.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, s) in samples.iter().enumerate() {
                    acc += s * self.phase[k][j].conj() * self.weights[j];
                }
                *o = acc * norm;
            }
            return;
        }
        let nphi = self.nphi();
        let dphi = 2.0 * PI / nphi as f64;
        for o in out.iter_mut() {
            *o = Complex64::new(0.0, 0.0);
        }
        let mut ring = vec![Complex64::new(0.0, 0.0); 2 * big_l + 1];
        for (i, p) in self.legendre.iter().enumerate() {
            let row = &samples[i * nphi..(i + 1) * nphi];
            for (k, r) in ring.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, s) in row.iter().enumerate() {
                    acc += s * self.phase[k][j].conj();
                }
                *r = acc * (dphi * self.ring_weights[i]);
            }
            for l in 0..=big_l {
                for m in -(l as i64)..=(l as i64) {
                    let ma = m.unsigned_abs() as usize;
                    let sign = if m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
                    let idx = (l * l + l) as i64 + m;
                    out[idx as usize] += ring[(m + big_l as i64) as usize] * (sign * p[tri(l, ma)]);
                }
            }
        }
    }

    pub fn forward(&self, samples: &[Complex64]) -> Result<AngularSpectrum> {
        self.check_samples(samples)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.modes.count()];
        self.forward_into(samples, &mut coeffs);
        AngularSpectrum::from_coeffs(self.modes, coeffs)
    }

    /// Legendre sums `Σ_l c_lm T_l^m(cos θ_i)` for every `m` on one ring.
    fn ring_sums(&self, coeffs: &[Complex64], table: &[f64], ring: &mut [Complex64]) {
        let big_l = self.max_degree();
        ring.fill(Complex64::new(0.0, 0.0));
        for l in 0..=big_l {
            for m in -(l as i64)..=(l as i64) {
                let ma = m.unsigned_abs() as usize;
                let sign = if m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
                let c = coeffs[((l * l + l) as i64 + m) as usize];
                ring[(m + big_l as i64) as usize] += c * (sign * table[tri(l, ma)]);
            }
        }
    }

    fn ring_synthesis(&self, ring: &[Complex64], out: &mut [Complex64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, r) in ring.iter().enumerate() {
                acc += r * self.phase[k][j];
            }
            *o = acc;
        }
    }

    pub fn inverse_into(&self, coeffs: &[Complex64], out: &mut [Complex64]) {
        self.synthesize_word_unchecked(&[], coeffs, out);
    }

    pub fn inverse(&self, spec: &AngularSpectrum) -> Result<Vec<Complex64>> {
        if spec.modes != self.modes {
            return Err(Error::Shape(format!(
                "spectrum (n = {}, L = {}) does not match grid (n = {}, L = {})",
                spec.dim(),
                spec.max_degree(),
                self.dim(),
                self.max_degree()
            )));
        }
        self.check_coeffs(&spec.coeffs)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.point_count()];
        self.inverse_into(&spec.coeffs, &mut out);
        Ok(out)
    }

    /// Number of orthonormal tangent frame components, `n − 1`.
    pub fn frame_components(&self) -> usize {
        self.dim() - 1
    }

    /// Point values of a frame word applied to the function with coefficients
    /// `coeffs`. Letters are applied left to right. On the circle letter 0 is
    /// `∂_θ`; on `S²` letter 0 is `∂_θ` and letter 1 is `(sin θ)^{-1} ∂_φ`.
    /// Words have length at most two.
    pub fn synthesize_word_into(
        &self,
        word: &[usize],
        coeffs: &[Complex64],
        out: &mut [Complex64],
    ) -> Result<()> {
        if word.len() > 2 || word.iter().any(|&c| c >= self.frame_components()) {
            return Err(Error::Shape(format!(
                "angular word {word:?} is not supported on S^{}",
                self.dim() - 1
            )));
        }
        self.check_coeffs(coeffs)?;
        if out.len() != self.point_count() {
            return Err(Error::Shape(format!(
                "output buffer of {} for a grid of {} points",
                out.len(),
                self.point_count()
            )));
        }
        self.synthesize_word_unchecked(word, coeffs, out);
        Ok(())
    }

    fn synthesize_word_unchecked(
        &self,
        word: &[usize],
        coeffs: &[Complex64],
        out: &mut [Complex64],
    ) {
        let big_l = self.max_degree();
        let zero = Complex64::new(0.0, 0.0);
        if self.dim() == 2 {
            let norm = 1.0 / (2.0 * PI).sqrt();
            let weighted: Vec<Complex64> = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let l = k as f64 - big_l as f64;
                    c * Complex64::new(0.0, l).powu(word.len() as u32) * norm
                })
                .collect();
            self.ring_synthesis(&weighted, out);
            return;
        }
        let nphi = self.nphi();
        let nm = 2 * big_l + 1;
        let mut g0 = vec![zero; nm];
        let mut g1 = vec![zero; nm];
        let mut g2 = vec![zero; nm];
        let mut h = vec![zero; nm];
        for i in 0..self.theta.len() {
            let s = self.sin_theta[i];
            let cos = self.theta[i].cos();
            match word {
                [] | [1] | [1, 1] => self.ring_sums(coeffs, &self.legendre[i], &mut g0),
                [0] | [0, 1] => self.ring_sums(coeffs, &self.legendre_dtheta[i], &mut g1),
                [0, 0] => self.ring_sums(coeffs, &self.legendre_d2theta[i], &mut g2),
                _ => {
                    self.ring_sums(coeffs, &self.legendre[i], &mut g0);
                    self.ring_sums(coeffs, &self.legendre_dtheta[i], &mut g1);
                }
            }
            for (k, hk) in h.iter_mut().enumerate() {
                let im = Complex64::new(0.0, k as f64 - big_l as f64);
                *hk = match word {
                    [] => g0[k],
                    [0] => g1[k],
                    [1] => im * g0[k] / s,
                    [0, 0] => g2[k],
                    [0, 1] => im * g1[k] / s,
                    [1, 0] => im * (g1[k] / s - cos * g0[k] / (s * s)),
                    _ => im * im * g0[k] / (s * s),
                };
            }
            self.ring_synthesis(&h, &mut out[i * nphi..(i + 1) * nphi]);
        }
    }

    /// Quadrature integral of `f` over the sphere.
    pub fn integrate(&self, samples: &[Complex64]) -> Complex64 {
        samples.iter().zip(&self.weights).map(|(s, w)| s * *w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for k in 0..=13 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 {
                0.0
            } else {
                2.0 / (k as f64 + 1.0)
            };
            assert!((q - exact).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn mode_indexing_round_trips() {
        for dim in [2, 3] {
            let set = ModeSet::new(dim, 6).unwrap();
            for i in 0..set.count() {
                let (l, m) = set.mode(i);
                assert_eq!(set.index(l, m), Some(i));
            }
        }
        assert!(ModeSet::new(4, 3).is_err());
    }

    #[test]
    fn constant_on_two_sphere() {
        let grid = SphereGrid::new(3, 5).unwrap();
        let spec = grid.forward(&vec![c(1.0); grid.point_count()]).unwrap();
        assert!((spec.get(0, 0) - c((4.0 * PI).sqrt())).norm() < 1e-13);
        for (i, v) in spec.coeffs.iter().enumerate().skip(1) {
            assert!(v.norm() < 1e-13, "mode {:?}", spec.modes.mode(i));
        }
    }

    #[test]
    fn y21_samples_give_unit_coefficient() {
        let grid = SphereGrid::new(3, 4).unwrap();
        // Y_2^1 = −√(15/8π) sin θ cos θ e^{iφ}
        let samples: Vec<Complex64> = grid
            .angles()
            .iter()
            .map(|&(t, p)| {
                -(15.0 / (8.0 * PI)).sqrt() * t.sin() * t.cos() * Complex64::from_polar(1.0, p)
            })
            .collect();
        let spec = grid.forward(&samples).unwrap();
        for i in 0..spec.coeffs.len() {
            let expected = if spec.modes.mode(i) == (2, 1) {
                1.0
            } else {
                0.0
            };
            assert!(
                (spec.coeffs[i] - c(expected)).norm() < 1e-12,
                "{:?}",
                spec.modes.mode(i)
            );
        }
    }

    #[test]
    fn cos_three_theta_on_circle() {
        // Oracle: fine midpoint rule for ∫ cos 3θ e^{-3iθ} dθ / √(2π).
        let n = 20_000;
        let oracle: Complex64 = (0..n)
            .map(|j| {
                let t = 2.0 * PI * (j as f64 + 0.5) / n as f64;
                (3.0 * t).cos() * Complex64::from_polar(1.0, -3.0 * t)
            })
            .sum::<Complex64>()
            * (2.0 * PI / n as f64)
            / (2.0 * PI).sqrt();
        assert!((oracle - c(0.5 * (2.0 * PI).sqrt())).norm() < 1e-12);

        let grid = SphereGrid::new(2, 5).unwrap();
        let samples: Vec<Complex64> = grid
            .angles()
            .iter()
            .map(|&(t, _)| c((3.0 * t).cos()))
            .collect();
        let spec = grid.forward(&samples).unwrap();
        for l in -5i64..=5 {
            let expected = if l.abs() == 3 { oracle } else { c(0.0) };
            assert!((spec.get(l, 0) - expected).norm() < 1e-13, "l = {l}");
        }
        let back = grid.inverse(&spec).unwrap();
        for (a, b) in back.iter().zip(&samples) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn antipodal_parity() {
        let s = AngularSpectrum::from_modes(3, 3, &[(0, 0, c(2.0)), (1, 0, c(1.0))]).unwrap();
        let a = s.antipodal();
        assert_eq!(a.get(0, 0), c(2.0));
        assert_eq!(a.get(1, 0), c(-1.0));
        assert_eq!(a.antipodal(), s);
    }

    #[test]
    fn antipodal_matches_point_reflection() {
        let grid = SphereGrid::new(3, 4).unwrap();
        let s = AngularSpectrum::from_modes(
            3,
            4,
            &[
                (1, -1, c(0.3)),
                (2, 2, Complex64::new(0.1, 0.7)),
                (3, 0, c(-0.4)),
                (4, 3, c(0.25)),
            ],
        )
        .unwrap();
        let a = s.antipodal();
        // Evaluate both at ω and −ω directly from the Legendre tables.
        let eval = |spec: &AngularSpectrum, t: f64, p: f64| {
            let table = normalized_legendre(4, t.cos());
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, cc) in spec.coeffs.iter().enumerate() {
                let (l, m) = spec.modes.mode(i);
                let ma = m.unsigned_abs() as usize;
                let sign = if m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
                acc += cc
                    * sign
                    * table[tri(l as usize, ma)]
                    * Complex64::from_polar(1.0, m as f64 * p);
            }
            acc
        };
        for &(t, p) in grid.angles().iter().step_by(7) {
            let direct = eval(&s, PI - t, p + PI);
            assert!((eval(&a, t, p) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn sobolev_norm_examples() {
        let constant = AngularSpectrum::from_modes(3, 2, &[(0, 0, c((4.0 * PI).sqrt()))]).unwrap();
        for k in [0.0, 1.0, 3.0] {
            assert!((constant.sobolev_norm(k) - (4.0 * PI).sqrt()).abs() < 1e-13);
        }
        let y10 = AngularSpectrum::from_modes(3, 2, &[(1, 0, c(1.0))]).unwrap();
        assert!((y10.sobolev_norm(1.0) - 3f64.sqrt()).abs() < 1e-14);
        let e1 = AngularSpectrum::from_modes(2, 2, &[(1, 0, c(1.0))]).unwrap();
        assert!((e1.sobolev_norm(2.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn laplace_beltrami_eigenvalue_of_y10_by_finite_differences() {
        // (1/sinθ) ∂θ(sinθ ∂θ Y) at sample colatitudes; Y10 ∝ cos θ.
        let h = 1e-4;
        for &t in &[0.3, 0.9, 1.7, 2.4] {
            let f = |t: f64| t.cos();
            let g = |t: f64| t.sin() * (f(t + h) - f(t - h)) / (2.0 * h);
            let lap = (g(t + h) - g(t - h)) / (2.0 * h) / t.sin();
            let eig = -lap / f(t);
            assert!((eig - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn gradient_of_y10_has_norm_sqrt_two() {
        let grid = SphereGrid::new(3, 3).unwrap();
        let s = AngularSpectrum::from_modes(3, 3, &[(1, 0, c(1.0))]).unwrap();
        let mut total = 0.0;
        for comp in 0..2 {
            let mut out = vec![Complex64::new(0.0, 0.0); grid.point_count()];
            grid.synthesize_word_into(&[comp], &s.coeffs, &mut out)
                .unwrap();
            total += out
                .iter()
                .zip(grid.weights())
                .map(|(v, w)| v.norm_sqr() * w)
                .sum::<f64>();
        }
        assert!((total - 2.0).abs() < 1e-12);
    }

    #[test]
    fn theta_derivative_matches_finite_differences() {
        let big_l = 6;
        let grid = SphereGrid::new(3, big_l).unwrap();
        for l in 0..=big_l {
            for m in 0..=l {
                let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.modes().count()];
                coeffs[l * l + l + m] = c(1.0);
                let mut out = vec![Complex64::new(0.0, 0.0); grid.point_count()];
                grid.synthesize_word_into(&[0], &coeffs, &mut out).unwrap();
                let nphi = 2 * big_l + 2;
                for (i, &t) in grid.theta.iter().enumerate() {
                    let h = 1e-5;
                    let fd = (normalized_legendre(big_l, (t + h).cos())[tri(l, m)]
                        - normalized_legendre(big_l, (t - h).cos())[tri(l, m)])
                        / (2.0 * h);
                    assert!((out[i * nphi].re - fd).abs() < 1e-7, "l={l} m={m}");
                }
            }
        }
    }

    #[test]
    fn second_order_words_match_finite_differences() {
        let big_l = 5;
        let grid = SphereGrid::new(3, big_l).unwrap();
        let modes = grid.modes();
        let coeffs: Vec<Complex64> = (0..modes.count())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let eval = |t: f64, p: f64| {
            let table = normalized_legendre(big_l, t.cos());
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, cc) in coeffs.iter().enumerate() {
                let (l, m) = modes.mode(i);
                let ma = m.unsigned_abs() as usize;
                let sign = if m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
                acc += cc
                    * sign
                    * table[tri(l as usize, ma)]
                    * Complex64::from_polar(1.0, m as f64 * p);
            }
            acc
        };
        let h = 1e-4;
        let d_theta = |f: &dyn Fn(f64, f64) -> Complex64, t: f64, p: f64| {
            (f(t + h, p) - f(t - h, p)) / (2.0 * h)
        };
        let d_phi = |f: &dyn Fn(f64, f64) -> Complex64, t: f64, p: f64| {
            (f(t, p + h) - f(t, p - h)) / (2.0 * h) / t.sin()
        };
        let e0 = |t: f64, p: f64| d_theta(&eval, t, p);
        let e1 = |t: f64, p: f64| d_phi(&eval, t, p);
        let words: [(&[usize], Box<dyn Fn(f64, f64) -> Complex64>); 4] = [
            (&[0, 0], Box::new(|t, p| d_theta(&e0, t, p))),
            (&[0, 1], Box::new(|t, p| d_phi(&e0, t, p))),
            (&[1, 0], Box::new(|t, p| d_theta(&e1, t, p))),
            (&[1, 1], Box::new(|t, p| d_phi(&e1, t, p))),
        ];
        for (word, oracle) in words.iter() {
            let mut out = vec![Complex64::new(0.0, 0.0); grid.point_count()];
            grid.synthesize_word_into(word, &coeffs, &mut out).unwrap();
            for (k, &(t, p)) in grid.angles().iter().enumerate().step_by(5) {
                let o = oracle(t, p);
                assert!(
                    (out[k] - o).norm() < 1e-5 * (1.0 + o.norm()),
                    "word {word:?}: {} vs {}",
                    out[k],
                    o
                );
            }
        }
    }

    #[test]
    fn circle_words_are_fourier_multipliers() {
        let grid = SphereGrid::new(2, 4).unwrap();
        let s = AngularSpectrum::from_modes(2, 4, &[(3, 0, c(1.0))]).unwrap();
        let mut out = vec![Complex64::new(0.0, 0.0); grid.point_count()];
        grid.synthesize_word_into(&[0, 0], &s.coeffs, &mut out)
            .unwrap();
        for (v, &(t, _)) in out.iter().zip(grid.angles().iter()) {
            let expected = -9.0 * Complex64::from_polar(1.0, 3.0 * t) / (2.0 * PI).sqrt();
            assert!((v - expected).norm() < 1e-12);
        }
        assert!(grid
            .synthesize_word_into(&[1], &s.coeffs, &mut out)
            .is_err());
    }
}
