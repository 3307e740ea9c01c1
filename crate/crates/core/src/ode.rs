//! Adaptive Dormand–Prince 5(4) for small complex first-order systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type State<const N: usize> = [Complex64; N];

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |step|.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step of size `h` for a real system: the fifth-order
/// update and the difference to the embedded fourth-order solution.
pub fn dopri_step(
    f: impl Fn(f64, &[f64]) -> Vec<f64>,
    t: f64,
    y: &[f64],
    h: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(f(t, y));
    for s in 1..7 {
        let mut ys = y.to_vec();
        for (j, kj) in k.iter().enumerate() {
            let a = A[s][j];
            if a != 0.0 {
                for (yi, ki) in ys.iter_mut().zip(kj) {
                    *yi += a * h * ki;
                }
            }
        }
        k.push(f(t + C[s] * h, &ys));
    }
    let mut y5 = y.to_vec();
    let mut err = vec![0.0; n];
    for i in 0..n {
        let (mut d5, mut d4) = (0.0, 0.0);
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        err[i] = h * (d5 - d4);
    }
    (y5, err)
}

/// Integrates `y′ = f(t, y)` from `ts[0]` through every point of `ts`
/// (monotone, either direction) and returns the state at each.
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &State<N>) -> State<N>,
    y0: State<N>,
    ts: &[f64],
    tol: &Tolerances,
) -> Result<Vec<State<N>>> {
    let mut out = Vec::with_capacity(ts.len());
    let Some(&t_first) = ts.first() else {
        return Ok(out);
    };
    out.push(y0);
    let mut t = t_first;
    let mut y = y0;
    let span = ts.last().map_or(0.0, |&e| (e - t_first).abs());
    let mut h = (span / ts.len().max(1) as f64)
        .min(tol.h_max)
        .max(f64::MIN_POSITIVE);
    let mut steps = 0usize;
    for &target in &ts[1..] {
        let dir = if target >= t { 1.0 } else { -1.0 };
        while (target - t) * dir > 0.0 {
            steps += 1;
            if steps > tol.max_steps {
                return Err(Error::Integrator(format!(
                    "step budget exhausted near t = {t}"
                )));
            }
            let remaining = (target - t).abs();
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let mut k = [[Complex64::new(0.0, 0.0); N]; 7];
            k[0] = f(t, &y);
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        for (yi, ki) in ys.iter_mut().zip(kj) {
                            *yi += ki * (a * step * dir);
                        }
                    }
                }
                k[s] = f(t + C[s] * step * dir, &ys);
            }
            let mut y5 = y;
            let mut err = 0.0f64;
            for i in 0..N {
                let mut d5 = Complex64::new(0.0, 0.0);
                let mut d4 = Complex64::new(0.0, 0.0);
                for s in 0..7 {
                    d5 += k[s][i] * B5[s];
                    d4 += k[s][i] * B4[s];
                }
                y5[i] += d5 * (step * dir);
                let scale = tol.atol + tol.rtol * y[i].norm().max(y5[i].norm());
                err = err.max(((d5 - d4) * step).norm() / scale);
            }
            if !err.is_finite() {
                return Err(Error::Integrator(format!("non-finite state near t = {t}")));
            }
            if err <= 1.0 {
                t = if last { target } else { t + step * dir };
                y = y5;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !(last && err <= 1.0) {
                h = (step * factor).min(tol.h_max);
            } else {
                h = h.max(step * factor).min(tol.h_max);
            }
            if h < 1e-14 * (1.0 + t.abs()) {
                return Err(Error::Integrator(format!(
                    "step size underflow near t = {t}"
                )));
            }
        }
        out.push(y);
    }
    Ok(out)
}
