//! Cylinder functions `J_ν`, `Y_ν` and `H_ν^{(1)} = J_ν + i Y_ν` of real order
//! `ν ≥ 0` at positive real argument.
//!
//! The evaluator follows Steed's method: the continued fraction for
//! `J_ν'/J_ν` fixes the ratio at the requested order, downward recurrence
//! carries it to an order `μ` with `|μ| ≤ 1/2` (or close to the argument),
//! and the absolute normalisation comes either from Temme's series for
//! `Y_μ` (argument below [`SERIES_CROSSOVER`]) or from the complex continued
//! fraction for `(H_μ^{(1)})'/H_μ^{(1)}` (argument at or above it). The
//! Wronskian `J Y' − J' Y = 2/(π x)` is built into the normalisation, so it
//! holds to rounding for every returned value.
//!
//! Upward recurrence is used only for `Y`, where it is stable.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Arguments below this use Temme's series for the second solution.
pub const SERIES_CROSSOVER: f64 = 2.0;

const EPS: f64 = 1.0e-16;
const FPMIN: f64 = 1.0e-300;

/// Taylor coefficients of `1/Γ(z) = Σ c_k z^k`, `k = 1..=26`.
const RGAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Values of `J_ν`, `H_ν^{(1)}` and their derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderEval {
    pub order: f64,
    pub argument: f64,
    pub j: f64,
    pub j_prime: f64,
    pub h1: Complex64,
    pub h1_prime: Complex64,
}

impl CylinderEval {
    /// Bessel function of the second kind, `Im H^{(1)}`.
    pub fn y(&self) -> f64 {
        self.h1.im
    }

    pub fn y_prime(&self) -> f64 {
        self.h1_prime.im
    }

    /// `(j h1' − j' h1 − 2i/(πx)) · πx/2`, which vanishes for exact values.
    pub fn wronskian_residual(&self) -> f64 {
        let w = self.h1_prime * self.j - self.h1 * self.j_prime;
        let expected = Complex64::new(0.0, 2.0 / (PI * self.argument));
        ((w - expected) * (PI * self.argument / 2.0)).norm()
    }
}

/// `(gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ))` for `|μ| ≤ 1/2`, where
/// `gam1 = (1/Γ(1−μ) − 1/Γ(1+μ)) / (2μ)` and `gam2 = (1/Γ(1−μ) + 1/Γ(1+μ)) / 2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mut gampl = 0.0;
    let mut gammi = 0.0;
    let mut gam1 = 0.0;
    let mut gam2 = 0.0;
    // Horner from the top: the k-th coefficient multiplies μ^{k-1}.
    for &c in RGAMMA.iter().rev() {
        gampl = gampl * mu + c;
        gammi = gammi * (-mu) + c;
    }
    // Even-k coefficients give gam1 (as a series in μ²), odd-k give gam2.
    let mu2 = mu * mu;
    for idx in (0..RGAMMA.len()).rev() {
        let k = idx + 1;
        if k % 2 == 0 {
            gam1 = gam1 * mu2 - RGAMMA[idx];
        } else {
            gam2 = gam2 * mu2 + RGAMMA[idx];
        }
    }
    (gam1, gam2, gampl, gammi)
}

/// `(J_ν(x), Y_ν(x), J_ν'(x), Y_ν'(x))`.
pub fn bessel_jy(order: f64, x: f64) -> Result<(f64, f64, f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "cylinder functions need a positive finite argument, got {x}"
        )));
    }
    if !(order >= 0.0) || !order.is_finite() {
        return Err(Error::Domain(format!(
            "cylinder functions need a nonnegative finite order, got {order}"
        )));
    }
    let max_iter = 10_000 + (4.0 * x) as usize;
    let nl = if x < SERIES_CROSSOVER {
        (order + 0.5) as usize
    } else {
        (order - x + 1.5).max(0.0) as usize
    };
    let xmu = order - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: J'_ν / J_ν by the modified Lentz method.
    let mut isign = 1.0;
    let mut h = (order * xi).max(FPMIN);
    let mut b = xi2 * order;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..max_iter {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Range(format!(
            "continued fraction for J'/J did not converge at order {order}, argument {x}"
        )));
    }

    // Downward recurrence from the requested order to xmu, unnormalised.
    let init = isign * 1.0e-30;
    let mut rjl = init;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let rjp1 = rjpl;
    let mut fact = order * xi;
    let mut rescale = 1.0_f64;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        // Keep the recurrence representable; remember the accumulated scale.
        if rjl.abs() > 1.0e250 {
            rjl *= 1.0e-250;
            rjpl *= 1.0e-250;
            rescale *= 1.0e-250;
        }
    }
    // Normalisations are taken from the Wronskian of the unnormalised pair
    // (rjl, rjpl) so that a zero of J_μ does not divide zero by zero.
    let (norm, rymu, rymup, ry1): (f64, f64, f64, f64);
    if x < SERIES_CROSSOVER {
        // Temme's series for Y_μ, Y_{μ+1}.
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS {
            1.0
        } else {
            pimu / pimu.sin()
        };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = 2.0 / PI * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let e = e.exp();
        let mut p = e / (gampl * PI);
        let mut q = 1.0 / (e * PI * gammi);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < EPS {
            1.0
        } else {
            pimu2.sin() / pimu2
        };
        let r = PI * pimu2 * fact3 * fact3;
        let mut c = 1.0;
        let d = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..max_iter {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= d / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * (ff + r * q);
            sum += del;
            let del1 = c * p - fi * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Range(format!(
                "Temme series did not converge at order {order}, argument {x}"
            )));
        }
        let ymu = -sum;
        let y1 = -sum1 * xi2;
        let ymup = xmu * xi * ymu - y1;
        norm = w / (ymup * rjl - rjpl * ymu);
        rymu = ymu;
        rymup = ymup;
        ry1 = y1;
    } else {
        // CF2: p + iq = (H_μ^{(1)})' / H_μ^{(1)} by Steed's algorithm.
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let mut dlr = cr * dr - ci * di;
        let mut dli = cr * di + ci * dr;
        let mut temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        let mut ok = false;
        for i in 2..max_iter {
            a += 2.0 * (i as f64 - 1.0);
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < FPMIN {
                dr = FPMIN;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < FPMIN {
                cr = FPMIN;
            }
            den = dr * dr + di * di;
            dr /= den;
            di /= -den;
            dlr = cr * dr - ci * di;
            dli = cr * di + ci * dr;
            temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Range(format!(
                "continued fraction for H'/H did not converge at order {order}, argument {x}"
            )));
        }
        // J_μ = norm·rjl, Y_μ = J_μ (p − J′/J)/q, and the Wronskian fixes norm > 0.
        let gap = p * rjl - rjpl;
        norm = (w * q).sqrt() / (gap * gap + q * q * rjl * rjl).sqrt();
        let jmu = norm * rjl;
        let ymu = norm * gap / q;
        let ymup = p * ymu + q * jmu;
        rymu = ymu;
        rymup = ymup;
        ry1 = xmu * xi * ymu - ymup;
    }

    // Undo the unnormalised scale, including any rescaling during recurrence.
    let j = rjl1 * rescale * norm;
    let jp = rjp1 * rescale * norm;

    let mut ymu_cur = rymu;
    let mut y1_cur = ry1;
    for i in 1..=nl {
        let ytemp = (xmu + i as f64) * xi2 * y1_cur - ymu_cur;
        ymu_cur = y1_cur;
        y1_cur = ytemp;
        if !ytemp.is_finite() {
            return Err(Error::Range(format!(
                "Y_ν overflows at order {order}, argument {x} (reached order {})",
                xmu + i as f64 + 1.0
            )));
        }
    }
    let y = if nl == 0 { rymu } else { ymu_cur };
    let yp = if nl == 0 {
        rymup
    } else {
        order * xi * ymu_cur - y1_cur
    };
    if !(j.is_finite() && jp.is_finite() && y.is_finite() && yp.is_finite()) {
        return Err(Error::Range(format!(
            "cylinder functions not representable at order {order}, argument {x}: \
             J = {j:e}, Y = {y:e}"
        )));
    }
    Ok((j, y, jp, yp))
}

/// `J_ν`, `H_ν^{(1)}` and derivatives at `(order, argument)`.
pub fn cylinder_pair(order: f64, argument: f64) -> Result<CylinderEval> {
    let (j, y, jp, yp) = bessel_jy(order, argument)?;
    Ok(CylinderEval {
        order,
        argument,
        j,
        j_prime: jp,
        h1: Complex64::new(j, y),
        h1_prime: Complex64::new(jp, yp),
    })
}

/// Evaluations at orders `order0, order0 + 1, …, order0 + count − 1`.
///
/// `J` comes down from the top order, `Y` goes up from the bottom one, so
/// only two direct evaluations are needed per argument.
pub fn cylinder_ladder(order0: f64, count: usize, x: f64) -> Result<Vec<CylinderEval>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let top = order0 + (count - 1) as f64;
    let (j_top, _, jp_top, _) = bessel_jy(top, x)?;
    let (_, y0, _, yp0) = bessel_jy(order0, x)?;

    let mut j = vec![0.0; count];
    j[count - 1] = j_top;
    if count > 1 {
        j[count - 2] = top / x * j_top + jp_top;
        for k in (0..count - 2).rev() {
            let nu = order0 + (k + 1) as f64;
            j[k] = 2.0 * nu / x * j[k + 1] - j[k + 2];
        }
    }
    let mut y = vec![0.0; count];
    y[0] = y0;
    if count > 1 {
        y[1] = order0 / x * y0 - yp0;
        for k in 2..count {
            let nu = order0 + (k - 1) as f64;
            y[k] = 2.0 * nu / x * y[k - 1] - y[k - 2];
            if !y[k].is_finite() {
                return Err(Error::Range(format!(
                    "Y ladder overflows at order {}, argument {x}",
                    order0 + k as f64
                )));
            }
        }
    }

    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let nu = order0 + k as f64;
        let (jp, yp) = if k == count - 1 {
            if k == 0 {
                (jp_top, yp0)
            } else {
                (j[k - 1] - nu / x * j[k], y[k - 1] - nu / x * y[k])
            }
        } else if k == 0 {
            (nu / x * j[0] - j[1], yp0)
        } else {
            (j[k - 1] - nu / x * j[k], y[k - 1] - nu / x * y[k])
        };
        out.push(CylinderEval {
            order: nu,
            argument: x,
            j: j[k],
            j_prime: jp,
            h1: Complex64::new(j[k], y[k]),
            h1_prime: Complex64::new(jp, yp),
        });
    }
    Ok(out)
}

/// Leading large-argument form `√(2/(πx)) e^{i(x − νπ/2 − π/4)}` of `H_ν^{(1)}`.
pub fn hankel_leading(order: f64, x: f64) -> Complex64 {
    let phase = x - order * PI / 2.0 - PI / 4.0;
    Complex64::from_polar((2.0 / (PI * x)).sqrt(), phase)
}
