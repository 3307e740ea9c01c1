use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::RadialGrid;
use crate::angular::{AngularSpectrum, ModeSet, SphereGrid};
use crate::error::{Error, Result};

/// Largest admissible `λ · max spacing`; finer resolution of `e^{iλr}` is required.
pub const MAX_LAMBDA_SPACING: f64 = 0.3;

/// Frequency, radial grid and angular grid shared by every field of a computation.
#[derive(Debug)]
pub struct Domain {
    lambda: f64,
    grid: RadialGrid,
    sphere: SphereGrid,
}

impl Domain {
    pub fn new(lambda: f64, grid: RadialGrid, dim: usize, max_degree: usize) -> Result<Arc<Self>> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::Config(format!(
                "lambda must be finite and nonnegative, got {lambda}"
            )));
        }
        let h = grid.max_spacing();
        if lambda * h > MAX_LAMBDA_SPACING {
            return Err(Error::Config(format!(
                "radial grid too coarse: lambda * spacing = {:.3} exceeds {MAX_LAMBDA_SPACING} \
                 (lambda = {lambda}, max spacing = {h:.4}); add nodes",
                lambda * h
            )));
        }
        let sphere = SphereGrid::new(dim, max_degree)?;
        Ok(Arc::new(Self {
            lambda,
            grid,
            sphere,
        }))
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn sphere(&self) -> &SphereGrid {
        &self.sphere
    }

    pub fn dim(&self) -> usize {
        self.sphere.dim()
    }

    pub fn max_degree(&self) -> usize {
        self.sphere.max_degree()
    }

    pub fn modes(&self) -> ModeSet {
        self.sphere.modes()
    }

    pub fn mode_count(&self) -> usize {
        self.modes().count()
    }

    pub fn point_count(&self) -> usize {
        self.sphere.point_count()
    }

    pub fn radial_count(&self) -> usize {
        self.grid.len()
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    /// `l(l + n − 2)` for every mode index.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.modes();
        (0..m.count()).map(|k| m.eigenvalue(k)).collect()
    }

    /// Quadrature weights for `∫ ⟨r⟩^{2ℓ} f r^{n−1} dr`.
    pub fn weighted_measure(&self, ell: f64) -> Vec<f64> {
        self.grid
            .measure_weights(self.dim())
            .iter()
            .zip(self.grid.nodes())
            .map(|(w, r)| w * (1.0 + r * r).powf(ell))
            .collect()
    }

    pub fn same_as(&self, other: &Domain) -> bool {
        std::ptr::eq(self, other)
            || (self.lambda == other.lambda
                && self.grid == other.grid
                && self.modes() == other.modes())
    }
}

/// A complex function on `[r_min, r_max] × S^{n−1}`, held as per-radius
/// harmonic coefficients, point values, or both. Storage is row-major by radius.
#[derive(Clone)]
pub struct Field {
    domain: Arc<Domain>,
    modes: OnceLock<Vec<Complex64>>,
    values: OnceLock<Vec<Complex64>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("n", &self.domain.dim())
            .field("L", &self.domain.max_degree())
            .field("radii", &self.domain.radial_count())
            .field("has_modes", &self.has_modes())
            .field("has_values", &self.has_values())
            .finish()
    }
}

fn cell<T>(v: T) -> OnceLock<T> {
    let c = OnceLock::new();
    let _ = c.set(v);
    c
}

impl Field {
    pub fn zeros(domain: &Arc<Domain>) -> Self {
        let len = domain.radial_count() * domain.mode_count();
        Self {
            domain: domain.clone(),
            modes: cell(vec![Complex64::new(0.0, 0.0); len]),
            values: OnceLock::new(),
        }
    }

    pub fn from_modes(domain: &Arc<Domain>, modes: Vec<Complex64>) -> Result<Self> {
        let want = domain.radial_count() * domain.mode_count();
        if modes.len() != want {
            return Err(Error::Shape(format!(
                "{} mode coefficients given, domain needs {want}",
                modes.len()
            )));
        }
        Ok(Self {
            domain: domain.clone(),
            modes: cell(modes),
            values: OnceLock::new(),
        })
    }

    pub fn from_values(domain: &Arc<Domain>, values: Vec<Complex64>) -> Result<Self> {
        let want = domain.radial_count() * domain.point_count();
        if values.len() != want {
            return Err(Error::Shape(format!(
                "{} point values given, domain needs {want}",
                values.len()
            )));
        }
        Ok(Self {
            domain: domain.clone(),
            modes: OnceLock::new(),
            values: cell(values),
        })
    }

    /// Point values from `f(r, (θ, φ))`.
    pub fn from_fn(domain: &Arc<Domain>, f: impl Fn(f64, (f64, f64)) -> Complex64 + Sync) -> Self {
        let angles = domain.sphere().angles();
        let np = angles.len();
        let mut values = vec![Complex64::new(0.0, 0.0); domain.radial_count() * np];
        values
            .par_chunks_mut(np)
            .zip(domain.nodes().par_iter())
            .for_each(|(row, &r)| {
                for (v, &a) in row.iter_mut().zip(&angles) {
                    *v = f(r, a);
                }
            });
        Self {
            domain: domain.clone(),
            modes: OnceLock::new(),
            values: cell(values),
        }
    }

    /// Mode coefficients `c_k(r) = f(r, k)`.
    pub fn from_profiles(domain: &Arc<Domain>, f: impl Fn(f64, usize) -> Complex64 + Sync) -> Self {
        let nm = domain.mode_count();
        let mut modes = vec![Complex64::new(0.0, 0.0); domain.radial_count() * nm];
        modes
            .par_chunks_mut(nm)
            .zip(domain.nodes().par_iter())
            .for_each(|(row, &r)| {
                for (k, v) in row.iter_mut().enumerate() {
                    *v = f(r, k);
                }
            });
        Self {
            domain: domain.clone(),
            modes: cell(modes),
            values: OnceLock::new(),
        }
    }

    /// `Σ_k h_{deg(k)}(r_i) f_k Y_k` from per-degree radial profiles `h[deg][i]`.
    pub fn from_degree_profiles(
        domain: &Arc<Domain>,
        spectrum: &AngularSpectrum,
        h: &[Vec<Complex64>],
    ) -> Result<Self> {
        if spectrum.dim() != domain.dim() {
            return Err(Error::Shape(format!(
                "spectrum on S^{} used with an n = {} domain",
                spectrum.dim() - 1,
                domain.dim()
            )));
        }
        let spec = spectrum.resized(domain.max_degree());
        let modes = domain.modes();
        if h.len() <= domain.max_degree() {
            return Err(Error::Shape(format!(
                "need profiles for degrees 0..={}",
                domain.max_degree()
            )));
        }
        let nm = modes.count();
        let mut out = vec![Complex64::new(0.0, 0.0); domain.radial_count() * nm];
        out.par_chunks_mut(nm).enumerate().for_each(|(i, row)| {
            for (k, v) in row.iter_mut().enumerate() {
                *v = h[modes.degree(k)][i] * spec.coeffs[k];
            }
        });
        Self::from_modes(domain, out)
    }

    /// Columns indexed `[mode][radius]`.
    pub fn from_columns(domain: &Arc<Domain>, columns: &[Vec<Complex64>]) -> Result<Self> {
        let nm = domain.mode_count();
        let nr = domain.radial_count();
        if columns.len() != nm || columns.iter().any(|c| c.len() != nr) {
            return Err(Error::Shape(format!(
                "expected {nm} columns of length {nr}"
            )));
        }
        let mut modes = vec![Complex64::new(0.0, 0.0); nr * nm];
        for (k, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                modes[i * nm + k] = *v;
            }
        }
        Self::from_modes(domain, modes)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn has_modes(&self) -> bool {
        self.modes.get().is_some()
    }

    pub fn has_values(&self) -> bool {
        self.values.get().is_some()
    }

    /// Mode coefficients, computed from point values on first use.
    pub fn modes(&self) -> &[Complex64] {
        self.modes.get_or_init(|| {
            let d = &self.domain;
            let (nm, np) = (d.mode_count(), d.point_count());
            let values = self.values.get().expect("field holds a representation");
            let mut out = vec![Complex64::new(0.0, 0.0); d.radial_count() * nm];
            out.par_chunks_mut(nm)
                .zip(values.par_chunks(np))
                .for_each(|(o, v)| d.sphere().forward_into(v, o));
            out
        })
    }

    /// Point values, synthesized from mode coefficients on first use.
    pub fn values(&self) -> &[Complex64] {
        self.values.get_or_init(|| {
            let d = &self.domain;
            let (nm, np) = (d.mode_count(), d.point_count());
            let modes = self.modes.get().expect("field holds a representation");
            let mut out = vec![Complex64::new(0.0, 0.0); d.radial_count() * np];
            out.par_chunks_mut(np)
                .zip(modes.par_chunks(nm))
                .for_each(|(o, c)| d.sphere().inverse_into(c, o));
            out
        })
    }

    /// Consumes the field, keeping only the mode representation.
    pub fn into_modes(self) -> Vec<Complex64> {
        self.modes();
        self.modes.into_inner().expect("modes computed")
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values();
        self.values.into_inner().expect("values computed")
    }

    /// Copy of one mode's radial profile.
    pub fn mode_column(&self, k: usize) -> Vec<Complex64> {
        let nm = self.domain.mode_count();
        self.modes().iter().skip(k).step_by(nm).copied().collect()
    }

    /// Angular spectrum at radial node `i`.
    pub fn spectrum_at(&self, i: usize) -> AngularSpectrum {
        let nm = self.domain.mode_count();
        AngularSpectrum {
            modes: self.domain.modes(),
            coeffs: self.modes()[i * nm..(i + 1) * nm].to_vec(),
        }
    }

    fn check_same(&self, other: &Field) -> Result<()> {
        if self.domain.same_as(&other.domain) {
            Ok(())
        } else {
            Err(Error::Shape("fields live on different domains".into()))
        }
    }

    /// `a·self + b·other`, in the mode representation when both have it.
    pub fn combine(&self, a: Complex64, other: &Field, b: Complex64) -> Result<Field> {
        self.check_same(other)?;
        let lin = |x: &[Complex64], y: &[Complex64]| -> Vec<Complex64> {
            x.par_iter()
                .zip(y.par_iter())
                .map(|(x, y)| x * a + y * b)
                .collect()
        };
        if self.has_modes() && other.has_modes() || !(self.has_values() && other.has_values()) {
            Field::from_modes(&self.domain, lin(self.modes(), other.modes()))
        } else {
            Field::from_values(&self.domain, lin(self.values(), other.values()))
        }
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, a: Complex64) -> Field {
        let scale = |x: &[Complex64]| x.iter().map(|v| v * a).collect::<Vec<_>>();
        Field {
            domain: self.domain.clone(),
            modes: self.modes.get().map(|m| cell(scale(m))).unwrap_or_default(),
            values: self
                .values
                .get()
                .map(|v| cell(scale(v)))
                .unwrap_or_default(),
        }
    }

    /// Multiplication by a radial function sampled at the nodes.
    pub fn mul_radial(&self, f: &[Complex64]) -> Result<Field> {
        if f.len() != self.domain.radial_count() {
            return Err(Error::Shape(format!(
                "radial factor of length {} for {} nodes",
                f.len(),
                self.domain.radial_count()
            )));
        }
        let apply = |x: &[Complex64], width: usize| -> Vec<Complex64> {
            let mut out = x.to_vec();
            out.par_chunks_mut(width)
                .zip(f.par_iter())
                .for_each(|(row, g)| {
                    for v in row.iter_mut() {
                        *v *= g;
                    }
                });
            out
        };
        let nm = self.domain.mode_count();
        let np = self.domain.point_count();
        Ok(Field {
            domain: self.domain.clone(),
            modes: self
                .modes
                .get()
                .map(|m| cell(apply(m, nm)))
                .unwrap_or_default(),
            values: self
                .values
                .get()
                .map(|v| cell(apply(v, np)))
                .unwrap_or_default(),
        })
    }

    pub fn mul_radial_real(&self, f: &[f64]) -> Result<Field> {
        let c: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.mul_radial(&c)
    }

    /// `g(i, k, c)` applied to every mode coefficient (radius `i`, mode `k`).
    pub fn map_modes_indexed(
        &self,
        g: impl Fn(usize, usize, Complex64) -> Complex64 + Sync,
    ) -> Field {
        let nm = self.domain.mode_count();
        let mut out = self.modes().to_vec();
        out.par_chunks_mut(nm).enumerate().for_each(|(i, row)| {
            for (k, v) in row.iter_mut().enumerate() {
                *v = g(i, k, *v);
            }
        });
        Field {
            domain: self.domain.clone(),
            modes: cell(out),
            values: OnceLock::new(),
        }
    }

    pub fn map_values(&self, g: impl Fn(Complex64) -> Complex64 + Sync) -> Field {
        Field {
            domain: self.domain.clone(),
            modes: OnceLock::new(),
            values: cell(self.values().par_iter().map(|&v| g(v)).collect()),
        }
    }

    /// Pointwise product of point values.
    pub fn mul_pointwise(&self, other: &Field) -> Result<Field> {
        self.check_same(other)?;
        let v = self
            .values()
            .par_iter()
            .zip(other.values().par_iter())
            .map(|(a, b)| a * b)
            .collect();
        Field::from_values(&self.domain, v)
    }

    pub fn conj(&self) -> Field {
        self.map_values(|v| v.conj())
    }

    /// Per-radius sums of `|·|²` over the sphere, exact for the representation held.
    pub fn sphere_energy(&self) -> Vec<f64> {
        let d = &self.domain;
        if let Some(m) = self.modes.get() {
            m.par_chunks(d.mode_count())
                .map(|row| row.iter().map(|c| c.norm_sqr()).sum())
                .collect()
        } else {
            let w = d.sphere().weights();
            self.values()
                .par_chunks(d.point_count())
                .map(|row| row.iter().zip(w).map(|(v, w)| v.norm_sqr() * w).sum())
                .collect()
        }
    }

    /// `‖⟨r⟩^ℓ u‖_{L²(r^{n−1}dr dω)}`; uses point values when those are primary.
    pub fn weighted_l2(&self, ell: f64) -> f64 {
        let w = self.domain.weighted_measure(ell);
        self.sphere_energy()
            .iter()
            .zip(&w)
            .map(|(e, w)| e * w)
            .sum::<f64>()
            .sqrt()
    }

    /// Same as [`Field::weighted_l2`], restricted to radial nodes in `range`.
    pub fn weighted_l2_on(&self, ell: f64, range: std::ops::Range<usize>) -> f64 {
        let w = self.domain.weighted_measure(ell);
        let e = self.sphere_energy();
        range.map(|i| e[i] * w[i]).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        let src = if self.has_values() {
            self.values()
        } else {
            self.modes()
        };
        src.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn domain(dim: usize, l: usize) -> Arc<Domain> {
        Domain::new(1.0, RadialGrid::uniform(1.0, 5.0, 40).unwrap(), dim, l).unwrap()
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let grid = RadialGrid::uniform(1.0, 100.0, 64).unwrap();
        assert!(matches!(
            Domain::new(2.0, grid, 3, 4),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn representations_agree() {
        for dim in [2, 3] {
            let d = domain(dim, 6);
            let u = Field::from_profiles(&d, |r, k| Complex64::new(r.sin() * k as f64, 1.0 / r));
            let v = Field::from_values(&d, u.values().to_vec()).unwrap();
            let back = v.modes();
            for (a, b) in back.iter().zip(u.modes()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_matches_in_both_representations() {
        let d = domain(3, 4);
        let u = Field::from_fn(&d, |r, (t, p)| {
            Complex64::new(r * t.cos(), (2.0 * p).sin() * t.sin().powi(2))
        });
        let from_values = u.weighted_l2(0.0);
        let from_modes = Field::from_modes(&d, u.modes().to_vec())
            .unwrap()
            .weighted_l2(0.0);
        assert!((from_values - from_modes).abs() < 1e-12 * from_values);
    }

    #[test]
    fn single_cell_norm_is_cell_measure() {
        let d = domain(3, 2);
        let i = 10;
        let r = d.nodes()[i];
        let u = Field::from_fn(&d, |rr, _| {
            Complex64::new(if rr == r { 1.0 } else { 0.0 }, 0.0)
        });
        let expected = (d.grid().weights()[i] * r * r * 4.0 * PI).sqrt();
        assert!((u.weighted_l2(0.0) - expected).abs() < 1e-13);
    }

    #[test]
    fn weight_cancels() {
        let d = domain(2, 3);
        let u = Field::from_profiles(&d, |r, k| Complex64::new(1.0 / r, k as f64));
        let ell = -0.7;
        let scaled = u
            .mul_radial_real(
                &d.nodes()
                    .iter()
                    .map(|r| (1.0 + r * r).powf(-ell / 2.0))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
        assert!((scaled.weighted_l2(ell) - u.weighted_l2(0.0)).abs() < 1e-12);
    }

    #[test]
    fn combine_prefers_modes_and_checks_domains() {
        let d = domain(3, 2);
        let e = domain(3, 2);
        let a = Field::from_profiles(&d, |r, _| Complex64::new(r, 0.0));
        let b = a.scale(Complex64::new(2.0, 0.0));
        let c = a.sub(&b).unwrap();
        assert!(c.has_modes());
        assert!((c.add(&a).unwrap().max_abs()) < 1e-15);
        // Structurally equal domains are compatible.
        let f = Field::zeros(&e);
        assert!(a.add(&f).is_ok());
        let g = Field::zeros(&domain(3, 3));
        assert!(matches!(a.add(&g), Err(Error::Shape(_))));
    }
}
