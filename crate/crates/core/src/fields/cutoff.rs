use super::grid::RadialGrid;
use crate::error::{Error, Result};

/// `e^{−1/t}` and its first two derivatives, zero for `t ≤ 0`.
fn flat(t: f64) -> [f64; 3] {
    if t <= 0.0 {
        return [0.0; 3];
    }
    let f = (-1.0 / t).exp();
    let t2 = t * t;
    [f, f / t2, f * (1.0 - 2.0 * t) / (t2 * t2)]
}

/// `C^∞` step `e^{−1/t} / (e^{−1/t} + e^{−1/(1−t)})`, clamped to `[0, 1]`, with two derivatives.
fn step(t: f64) -> [f64; 3] {
    if t <= 0.0 {
        return [0.0; 3];
    }
    if t >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let [f, f1, f2] = flat(t);
    let [g, mg1, g2] = flat(1.0 - t);
    let g1 = -mg1;
    let d = f + g;
    let num = f1 * g - f * g1;
    let num1 = f2 * g - f * g2;
    [
        f / d,
        num / (d * d),
        (num1 * d - 2.0 * num * (f1 + g1)) / (d * d * d),
    ]
}

pub fn smoothstep(t: f64) -> f64 {
    step(t)[0]
}

pub fn smoothstep_d1(t: f64) -> f64 {
    step(t)[1]
}

pub fn smoothstep_d2(t: f64) -> f64 {
    step(t)[2]
}

/// `χ(r) = S((r − R0)/R0)`: zero below `R0`, one above `2R0`, smooth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    r0: f64,
}

impl Cutoff {
    pub fn new(r0: f64, grid: &RadialGrid) -> Result<Self> {
        if !(r0.is_finite() && r0 >= grid.r_min()) {
            return Err(Error::Config(format!(
                "cutoff radius R0 = {r0} must be at least r_min = {}",
                grid.r_min()
            )));
        }
        if 2.0 * r0 > grid.r_max() {
            return Err(Error::Config(format!(
                "cutoff transition ends at 2 R0 = {} beyond r_max = {}",
                2.0 * r0,
                grid.r_max()
            )));
        }
        Ok(Self { r0 })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn value(&self, r: f64) -> f64 {
        smoothstep((r - self.r0) / self.r0)
    }

    pub fn d1(&self, r: f64) -> f64 {
        smoothstep_d1((r - self.r0) / self.r0) / self.r0
    }

    pub fn d2(&self, r: f64) -> f64 {
        smoothstep_d2((r - self.r0) / self.r0) / (self.r0 * self.r0)
    }

    pub fn samples(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.nodes().iter().map(|&r| self.value(r)).collect()
    }
}

/// Samples of `χ` on the grid.
pub fn cutoff_chi(grid: &RadialGrid, r0: f64) -> Result<Vec<f64>> {
    Ok(Cutoff::new(r0, grid)?.samples(grid))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_midpoint() {
        let g = RadialGrid::uniform(1.0, 10.0, 64).unwrap();
        let c = Cutoff::new(3.0, &g).unwrap();
        assert_eq!(c.value(3.0), 0.0);
        assert_eq!(c.value(6.0), 1.0);
        assert_eq!(c.value(2.0), 0.0);
        assert_eq!(c.value(9.0), 1.0);
        assert!((c.value(4.5) - 0.5).abs() < 1e-15);
        assert_eq!(c.d1(3.0), 0.0);
        assert_eq!(c.d1(6.0), 0.0);
        assert_eq!(c.d2(3.0), 0.0);
        assert_eq!(c.d2(6.0), 0.0);
    }

    #[test]
    fn monotone_and_derivatives_consistent() {
        let g = RadialGrid::uniform(1.0, 10.0, 64).unwrap();
        let c = Cutoff::new(2.0, &g).unwrap();
        let h = 1e-5;
        let mut prev = 0.0;
        for k in 0..=200 {
            let r = 2.0 + 2.0 * k as f64 / 200.0;
            let v = c.value(r);
            assert!(v >= prev);
            prev = v;
            if k == 0 || k == 200 {
                continue;
            }
            let fd1 = (c.value(r + h) - c.value(r - h)) / (2.0 * h);
            let fd2 = (c.d1(r + h) - c.d1(r - h)) / (2.0 * h);
            assert!((fd1 - c.d1(r)).abs() < 1e-8);
            assert!(
                (fd2 - c.d2(r)).abs() < 1e-7,
                "r={r} fd={fd2} exact={}",
                c.d2(r)
            );
        }
    }

    #[test]
    fn transition_must_fit() {
        let g = RadialGrid::uniform(1.0, 10.0, 64).unwrap();
        assert!(matches!(cutoff_chi(&g, 6.0), Err(Error::Config(_))));
        assert!(matches!(cutoff_chi(&g, 0.5), Err(Error::Config(_))));
    }
}
