use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_RADIAL_NODES: usize = 16;

/// Placement of radial nodes: `r(s) = r_min + (r_max − r_min)·g(s)` with `s` uniform on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grading {
    #[default]
    Uniform,
    /// `g(s) = (e^{γs} − 1)/(e^γ − 1)`; spacing grows geometrically away from `r_min`.
    Exponential { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    grading: Grading,
    nodes: Vec<f64>,
    ds: f64,
    /// `dr/ds` at the nodes.
    jac: Vec<f64>,
    /// `d²r/ds²` at the nodes.
    jac2: Vec<f64>,
    weights: Vec<f64>,
}

const D1_LEFT: [[f64; 5]; 2] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
];
/// Sixth-order weights (×1440) for one cell from six consecutive samples.
const CUM_CENTER: [f64; 6] = [11.0, -93.0, 802.0, 802.0, -93.0, 11.0];
const CUM_EDGE: [[f64; 6]; 2] = [
    [475.0, 1427.0, -798.0, 482.0, -173.0, 27.0],
    [-27.0, 637.0, 1022.0, -258.0, 77.0, -11.0],
];
const D1_CENTER: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D2_LEFT: [[f64; 6]; 2] = [
    [45.0, -154.0, 214.0, -156.0, 61.0, -10.0],
    [10.0, -15.0, -4.0, 14.0, -6.0, 1.0],
];
const D2_CENTER: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const GREGORY_END: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, count: usize, grading: Grading) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite() && r_min > 0.0 && r_max > r_min) {
            return Err(Error::Config(format!(
                "radial bounds must satisfy 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if count < MIN_RADIAL_NODES {
            return Err(Error::Config(format!(
                "radial grid needs at least {MIN_RADIAL_NODES} nodes, got {count}"
            )));
        }
        let span = r_max - r_min;
        let ds = 1.0 / (count - 1) as f64;
        let (nodes, jac, jac2): (Vec<f64>, Vec<f64>, Vec<f64>) = match grading {
            Grading::Uniform => (
                (0..count).map(|i| r_min + span * i as f64 * ds).collect(),
                vec![span; count],
                vec![0.0; count],
            ),
            Grading::Exponential { gamma } => {
                if !(gamma.is_finite() && gamma > 0.0 && gamma < 50.0) {
                    return Err(Error::Config(format!(
                        "exponential grading needs 0 < gamma < 50, got {gamma}"
                    )));
                }
                let denom = gamma.exp_m1();
                let s = |i: usize| i as f64 * ds;
                (
                    (0..count)
                        .map(|i| r_min + span * (gamma * s(i)).exp_m1() / denom)
                        .collect(),
                    (0..count)
                        .map(|i| span * gamma * (gamma * s(i)).exp() / denom)
                        .collect(),
                    (0..count)
                        .map(|i| span * gamma * gamma * (gamma * s(i)).exp() / denom)
                        .collect(),
                )
            }
        };
        let mut nodes = nodes;
        nodes[count - 1] = r_max;
        let mut weights: Vec<f64> = vec![ds; count];
        for (k, &g) in GREGORY_END.iter().enumerate() {
            weights[k] = g * ds;
            weights[count - 1 - k] = g * ds;
        }
        for (w, j) in weights.iter_mut().zip(&jac) {
            *w *= j;
        }
        Ok(Self {
            r_min,
            r_max,
            grading,
            nodes,
            ds,
            jac,
            jac2,
            weights,
        })
    }

    pub fn uniform(r_min: f64, r_max: f64, count: usize) -> Result<Self> {
        Self::new(r_min, r_max, count, Grading::Uniform)
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature weights for `∫ f dr`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature weights for `∫ f r^{n−1} dr`.
    pub fn measure_weights(&self, dim: usize) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.nodes)
            .map(|(w, r)| w * r.powi(dim as i32 - 1))
            .collect()
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index range excluding `band` nodes at each end.
    pub fn interior(&self, band: usize) -> std::ops::Range<usize> {
        band.min(self.len())..self.len().saturating_sub(band)
    }

    /// First node index with `r ≥ value`.
    pub fn index_at_or_above(&self, value: f64) -> usize {
        self.nodes.partition_point(|&r| r < value)
    }

    pub fn integrate(&self, f: &[Complex64]) -> Complex64 {
        f.iter().zip(&self.weights).map(|(v, w)| v * *w).sum()
    }

    pub fn integrate_real(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// `∫_{r_0}^{r_i} g dr` at every node, sixth order.
    pub fn cumulative(&self, g: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let h: Vec<Complex64> = g.iter().zip(&self.jac).map(|(v, j)| v * *j).collect();
        let c = self.ds / 1440.0;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        let dot = |w: &[f64; 6], start: usize, rev: bool| -> Complex64 {
            w.iter()
                .enumerate()
                .map(|(k, &wk)| h[if rev { start - k } else { start + k }] * wk)
                .sum::<Complex64>()
        };
        for i in 0..n - 1 {
            let seg = if i < 2 {
                dot(&CUM_EDGE[i], 0, false)
            } else if i + 3 >= n {
                dot(&CUM_EDGE[n - 2 - i], n - 1, true)
            } else {
                dot(&CUM_CENTER, i - 2, false)
            };
            out[i + 1] = out[i] + seg * c;
        }
        out
    }

    /// `∫_{r_i}^{r_max} g dr` at every node.
    pub fn cumulative_from_right(&self, g: &[Complex64]) -> Vec<Complex64> {
        let left = self.cumulative(g);
        let total = left[left.len() - 1];
        left.iter().map(|v| total - v).collect()
    }

    fn stencil_rows(&self, u: &[Complex64], width: usize, second: bool) -> Vec<Complex64> {
        let n = self.len();
        assert_eq!(u.len(), n * width, "radial stencil shape");
        let ds = self.ds;
        let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
        let row = |i: usize| &u[i * width..(i + 1) * width];
        // Derivatives in s at row i, then chain rule to r.
        let ds_row = |i: usize, acc: &mut [Complex64]| {
            acc.fill(Complex64::new(0.0, 0.0));
            let (coeffs, start, flip): (&[f64], usize, bool) = if i < 2 {
                (&D1_LEFT[i], 0, false)
            } else if i >= n - 2 {
                (&D1_LEFT[n - 1 - i], 0, true)
            } else {
                (&D1_CENTER, i - 2, false)
            };
            for (k, &c) in coeffs.iter().enumerate() {
                let (idx, c) = if flip {
                    (n - 1 - k, -c)
                } else {
                    (start + k, c)
                };
                for (a, v) in acc.iter_mut().zip(row(idx)) {
                    *a += v * c;
                }
            }
            for a in acc.iter_mut() {
                *a /= 12.0 * ds;
            }
        };
        let dss_row = |i: usize, acc: &mut [Complex64]| {
            acc.fill(Complex64::new(0.0, 0.0));
            let (coeffs, start, flip): (&[f64], usize, bool) = if i < 2 {
                (&D2_LEFT[i], 0, false)
            } else if i >= n - 2 {
                (&D2_LEFT[n - 1 - i], 0, true)
            } else {
                (&D2_CENTER, i - 2, false)
            };
            for (k, &c) in coeffs.iter().enumerate() {
                let idx = if flip { n - 1 - k } else { start + k };
                for (a, v) in acc.iter_mut().zip(row(idx)) {
                    *a += v * c;
                }
            }
            for a in acc.iter_mut() {
                *a /= 12.0 * ds * ds;
            }
        };
        out.par_chunks_mut(width)
            .with_min_len(64)
            .enumerate()
            .for_each(|(i, o)| {
                let j = self.jac[i];
                if second {
                    let mut first = vec![Complex64::new(0.0, 0.0); width];
                    dss_row(i, o);
                    if self.jac2[i] != 0.0 {
                        ds_row(i, &mut first);
                        let corr = self.jac2[i] / j;
                        for (a, f) in o.iter_mut().zip(&first) {
                            *a -= f * corr;
                        }
                    }
                    for a in o.iter_mut() {
                        *a /= j * j;
                    }
                } else {
                    ds_row(i, o);
                    for a in o.iter_mut() {
                        *a /= j;
                    }
                }
            });
        out
    }

    /// `∂_r` of `width` interleaved profiles stored row-major by radius.
    pub fn d1_rows(&self, u: &[Complex64], width: usize) -> Vec<Complex64> {
        self.stencil_rows(u, width, false)
    }

    /// `∂_r²` of `width` interleaved profiles stored row-major by radius.
    pub fn d2_rows(&self, u: &[Complex64], width: usize) -> Vec<Complex64> {
        self.stencil_rows(u, width, true)
    }

    pub fn derivative(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.d1_rows(u, 1)
    }

    pub fn second_derivative(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.d2_rows(u, 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_spacing() {
        let g = RadialGrid::uniform(1.0, 2.0, 17).unwrap();
        for w in g.nodes().windows(2) {
            assert!((w[1] - w[0] - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(matches!(
            RadialGrid::uniform(0.0, 2.0, 32),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RadialGrid::uniform(3.0, 2.0, 32),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RadialGrid::uniform(1.0, 2.0, 8),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn quartic_moment_in_three_dimensions() {
        let g = RadialGrid::uniform(1.0, 10.0, 512).unwrap();
        let w = g.measure_weights(3);
        let q: f64 = g.nodes().iter().zip(&w).map(|(r, w)| r * r * w).sum();
        let exact = (1e5 - 1.0) / 5.0;
        assert!(((q - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn graded_grid_clusters_at_r_min() {
        let g = RadialGrid::new(1.0, 50.0, 256, Grading::Exponential { gamma: 2.0 }).unwrap();
        let n = g.len();
        let first = g.nodes()[1] - g.nodes()[0];
        let last = g.nodes()[n - 1] - g.nodes()[n - 2];
        assert!(last / first > 1.0);
        let q = g.integrate_real(&g.nodes().iter().map(|r| r.powi(3)).collect::<Vec<_>>());
        let exact = (50f64.powi(4) - 1.0) / 4.0;
        assert!(((q - exact) / exact).abs() < 1e-7);
    }

    #[test]
    fn derivatives_are_fourth_order() {
        let lambda = 2.0;
        let mut errs = Vec::new();
        for &count in &[101usize, 201] {
            for grading in [Grading::Uniform, Grading::Exponential { gamma: 1.5 }] {
                let g = RadialGrid::new(1.0, 6.0, count, grading).unwrap();
                let u: Vec<Complex64> = g
                    .nodes()
                    .iter()
                    .map(|&r| Complex64::from_polar(1.0 / r, lambda * r))
                    .collect();
                let d1 = g.derivative(&u);
                let d2 = g.second_derivative(&u);
                let mut e1: f64 = 0.0;
                let mut e2: f64 = 0.0;
                for (i, &r) in g.nodes().iter().enumerate() {
                    let e = Complex64::from_polar(1.0, lambda * r);
                    let x1 = e * Complex64::new(-1.0 / (r * r), lambda / r);
                    let x2 = e * Complex64::new(
                        2.0 / r.powi(3) - lambda * lambda / r,
                        -2.0 * lambda / (r * r),
                    );
                    e1 = e1.max((d1[i] - x1).norm());
                    e2 = e2.max((d2[i] - x2).norm());
                }
                errs.push((e1, e2));
            }
        }
        for k in 0..2 {
            let (a, b) = (errs[k], errs[k + 2]);
            // Fourth order in the interior; one-sided closures lose one order for ∂².
            assert!(a.0 / b.0 > 12.0, "first derivative rate {}", a.0 / b.0);
            assert!(a.1 / b.1 > 6.0, "second derivative rate {}", a.1 / b.1);
        }
    }

    #[test]
    fn cumulative_integral_of_oscillation() {
        let g = RadialGrid::uniform(1.0, 20.0, 1200).unwrap();
        let f: Vec<Complex64> = g
            .nodes()
            .iter()
            .map(|&r| Complex64::from_polar(1.0, 3.0 * r))
            .collect();
        let cum = g.cumulative(&f);
        let right = g.cumulative_from_right(&f);
        for (i, &r) in g.nodes().iter().enumerate() {
            let exact = (Complex64::from_polar(1.0, 3.0 * r) - Complex64::from_polar(1.0, 3.0))
                / Complex64::new(0.0, 3.0);
            assert!((cum[i] - exact).norm() < 1e-6);
            assert!((cum[i] + right[i] - cum[g.len() - 1]).norm() < 1e-12);
        }
        assert!((g.integrate(&f) - cum[g.len() - 1]).norm() < 1e-6);
    }
}
