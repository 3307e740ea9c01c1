use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::Field;
use crate::error::{Error, Result};

/// One letter of a frame-derivative word: `∂_r` or the `j`-th component of `r^{-1}∂_ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FrameDir {
    Radial,
    Angular(usize),
}

impl fmt::Display for FrameDir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameDir::Radial => write!(f, "r"),
            FrameDir::Angular(j) => write!(f, "w{j}"),
        }
    }
}

impl FromStr for FrameDir {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(FrameDir::Radial),
            _ => s
                .strip_prefix('w')
                .and_then(|j| j.parse().ok())
                .map(FrameDir::Angular)
                .ok_or_else(|| {
                    Error::Spec(format!(
                        "unknown frame derivative {s:?}; use \"r\", \"w0\" or \"w1\""
                    ))
                }),
        }
    }
}

impl TryFrom<String> for FrameDir {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FrameDir> for String {
    fn from(d: FrameDir) -> String {
        d.to_string()
    }
}

/// Applies a word of frame derivatives (letters applied left to right, length ≤ 2).
///
/// Purely radial words keep the mode representation; words with an angular
/// letter return point values.
pub fn frame_derivative(u: &Field, word: &[FrameDir]) -> Result<Field> {
    let d = u.domain();
    let nm = d.mode_count();
    let np = d.point_count();
    let grid = d.grid();
    let r = d.nodes();
    if word.len() > 2 {
        return Err(Error::Spec(format!(
            "derivative words have length at most 2, got {}",
            word.len()
        )));
    }
    for w in word {
        if let FrameDir::Angular(j) = w {
            if *j >= d.dim() - 1 {
                return Err(Error::Spec(format!(
                    "angular component {j} does not exist for n = {}",
                    d.dim()
                )));
            }
        }
    }
    use FrameDir::*;
    let c = u.modes();
    let (coeffs, angular, power): (Vec<Complex64>, Vec<usize>, i32) = match *word {
        [] => return Ok(u.clone()),
        [Radial] => return Field::from_modes(d, grid.d1_rows(c, nm)),
        [Radial, Radial] => return Field::from_modes(d, grid.d2_rows(c, nm)),
        [Angular(a)] => (c.to_vec(), vec![a], 1),
        [Radial, Angular(a)] => (grid.d1_rows(c, nm), vec![a], 1),
        // ∂_r (r^{-1} e_a u) = e_a (u′/r − u/r²)
        [Angular(a), Radial] => {
            let d1 = grid.d1_rows(c, nm);
            let mut out = d1;
            out.par_chunks_mut(nm)
                .zip(c.par_chunks(nm))
                .zip(r.par_iter())
                .for_each(|((o, ci), &ri)| {
                    for (ok, ck) in o.iter_mut().zip(ci) {
                        *ok = *ok / ri - ck / (ri * ri);
                    }
                });
            (out, vec![a], 0)
        }
        [Angular(a), Angular(b)] => (c.to_vec(), vec![a, b], 2),
        _ => unreachable!(),
    };
    let sphere = d.sphere();
    let mut values = vec![Complex64::new(0.0, 0.0); d.radial_count() * np];
    values
        .par_chunks_mut(np)
        .zip(coeffs.par_chunks(nm))
        .zip(r.par_iter())
        .try_for_each(|((o, ci), &ri)| -> Result<()> {
            sphere.synthesize_word_into(&angular, ci, o)?;
            let f = ri.powi(-power);
            for v in o.iter_mut() {
                *v *= f;
            }
            Ok(())
        })?;
    Field::from_values(d, values)
}

/// `Pu = (Δ + V − λ²)u` per mode: `−c″ − (n−1)/r c′ + μ_l/r² c + V c − λ² c`.
/// The two nodes nearest each end use one-sided stencils.
pub fn apply_helmholtz(u: &Field, potential: Option<&[f64]>) -> Result<Field> {
    let d = u.domain();
    let nm = d.mode_count();
    let nr = d.radial_count();
    if let Some(v) = potential {
        if v.len() != nr {
            return Err(Error::Shape(format!(
                "potential has {} samples for {nr} nodes",
                v.len()
            )));
        }
    }
    let c = u.modes();
    let grid = d.grid();
    let d1 = grid.d1_rows(c, nm);
    let mut out = grid.d2_rows(c, nm);
    let mu = d.eigenvalues();
    let lam2 = d.lambda() * d.lambda();
    let nn = d.dim() as f64 - 1.0;
    let r = d.nodes();
    out.par_chunks_mut(nm).enumerate().for_each(|(i, o)| {
        let ri = r[i];
        let v = potential.map_or(0.0, |p| p[i]);
        for k in 0..nm {
            let ck = c[i * nm + k];
            o[k] = -o[k] - d1[i * nm + k] * (nn / ri) + ck * (mu[k] / (ri * ri) + v - lam2);
        }
    });
    Field::from_modes(d, out)
}
