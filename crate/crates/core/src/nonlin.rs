//! Polynomial nonlinearities in `u`, `ū` and their frame derivatives.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{frame_derivative, Field, FrameDir};

/// Radial profile multiplying a monomial, a smooth function of `1/⟨r⟩`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    #[default]
    Constant,
    /// `⟨r⟩^{−q}`
    Bracket { q: f64 },
    /// `P(s)/Q(s)` with `s = 1/⟨r⟩`, coefficients in ascending powers.
    Rational {
        numerator: Vec<f64>,
        denominator: Vec<f64>,
    },
}

impl Profile {
    pub fn value(&self, r: f64) -> f64 {
        let bracket = (1.0 + r * r).sqrt();
        match self {
            Profile::Constant => 1.0,
            Profile::Bracket { q } => bracket.powf(-q),
            Profile::Rational {
                numerator,
                denominator,
            } => {
                let s = 1.0 / bracket;
                let horner = |c: &[f64]| c.iter().rev().fold(0.0, |acc, &a| acc * s + a);
                horner(numerator) / horner(denominator)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Profile::Constant => Ok(()),
            Profile::Bracket { q } if q.is_finite() => Ok(()),
            Profile::Bracket { q } => {
                Err(Error::Spec(format!("bracket exponent {q} is not finite")))
            }
            Profile::Rational {
                numerator,
                denominator,
            } => {
                if denominator.is_empty() || numerator.is_empty() {
                    return Err(Error::Spec(
                        "rational profile needs numerator and denominator".into(),
                    ));
                }
                // The denominator must not vanish for s in (0, 1/⟨r_min⟩] ⊂ (0, 1].
                let samples = (0..=256).map(|j| j as f64 / 256.0);
                let horner = |s: f64| denominator.iter().rev().fold(0.0, |acc, &a| acc * s + a);
                let first = horner(0.0);
                if first == 0.0 || samples.map(horner).any(|v| v * first <= 0.0) {
                    return Err(Error::Spec(
                        "rational profile denominator vanishes on [0, 1]".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// One factor `D u` or `D ū`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Factor {
    #[serde(default)]
    pub conj: bool,
    #[serde(default)]
    pub word: Vec<FrameDir>,
}

impl Factor {
    pub fn plain() -> Self {
        Self::default()
    }

    pub fn conjugate() -> Self {
        Self {
            conj: true,
            word: Vec::new(),
        }
    }

    pub fn derivative(conj: bool, word: &[FrameDir]) -> Self {
        Self {
            conj,
            word: word.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coefficient: Complex64,
    #[serde(default)]
    pub profile: Profile,
    pub factors: Vec<Factor>,
}

impl Monomial {
    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn conjugate_count(&self) -> usize {
        self.factors.iter().filter(|f| f.conj).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub monomials: Vec<Monomial>,
    pub declared_p: u32,
}

impl NonlinearitySpec {
    /// `α |u|^{p−1} u` for odd `p ≥ 3`.
    pub fn gauge_power(alpha: Complex64, p: u32) -> Result<Self> {
        if p < 3 || p % 2 == 0 {
            return Err(Error::Spec(format!("|u|^(p-1) u needs odd p ≥ 3, got {p}")));
        }
        let q = (p as usize - 1) / 2;
        let mut factors = vec![Factor::plain(); q + 1];
        factors.extend(std::iter::repeat_n(Factor::conjugate(), q));
        Ok(Self {
            monomials: vec![Monomial {
                coefficient: alpha,
                profile: Profile::Constant,
                factors,
            }],
            declared_p: p,
        })
    }

    /// `α u^p`.
    pub fn pure_power(alpha: Complex64, p: u32) -> Self {
        Self {
            monomials: vec![Monomial {
                coefficient: alpha,
                profile: Profile::Constant,
                factors: vec![Factor::plain(); p as usize],
            }],
            declared_p: p,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut s = self.clone();
        for m in &mut s.monomials {
            m.coefficient *= factor;
        }
        s
    }

    /// Every monomial has `(degree − 1)/2` conjugated factors.
    pub fn is_gauge_invariant(&self) -> bool {
        self.monomials
            .iter()
            .all(|m| m.degree() % 2 == 1 && m.conjugate_count() == (m.degree() - 1) / 2)
    }

    /// Whether any factor carries a derivative.
    pub fn has_derivatives(&self) -> bool {
        self.monomials
            .iter()
            .flat_map(|m| &m.factors)
            .any(|f| !f.word.is_empty())
    }

    /// Smallest monomial degree, or the declared degree when there are no monomials.
    pub fn min_degree(&self) -> u32 {
        self.monomials
            .iter()
            .map(|m| m.degree() as u32)
            .min()
            .unwrap_or(self.declared_p)
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if self.declared_p < 2 {
            return Err(Error::Spec(format!(
                "declared degree {} is below 2",
                self.declared_p
            )));
        }
        for (j, m) in self.monomials.iter().enumerate() {
            if m.factors.is_empty() {
                return Err(Error::Spec(format!("monomial {j} has no factors")));
            }
            if m.degree() < 2 {
                return Err(Error::Spec(format!(
                    "monomial {j} has degree {} < 2",
                    m.degree()
                )));
            }
            if (m.degree() as u32) < self.declared_p {
                return Err(Error::Spec(format!(
                    "monomial {j} has degree {} below the declared {}",
                    m.degree(),
                    self.declared_p
                )));
            }
            if !(m.coefficient.re.is_finite() && m.coefficient.im.is_finite()) {
                return Err(Error::Spec(format!(
                    "monomial {j} has a non-finite coefficient"
                )));
            }
            m.profile.validate()?;
            for f in &m.factors {
                if f.word.len() > 2 {
                    return Err(Error::Spec(format!(
                        "monomial {j}: derivative words have length at most 2"
                    )));
                }
                if let Some(FrameDir::Angular(a)) = f
                    .word
                    .iter()
                    .find(|d| matches!(d, FrameDir::Angular(a) if *a + 1 >= dim))
                {
                    return Err(Error::Spec(format!(
                        "monomial {j}: no angular direction w{a} for n = {dim}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `(p − 1)(n − 1)/2 > 2`.
pub fn admissible(p: u32, n: usize) -> bool {
    (p as f64 - 1.0) * (n as f64 - 1.0) / 2.0 > 2.0
}

/// Smallest admissible degree in dimension `n ≥ 2`.
pub fn minimal_admissible_p(n: usize) -> u32 {
    (2..).find(|&p| admissible(p, n)).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub n: usize,
    pub p: u32,
    pub condition_ok: bool,
    pub delta_max: f64,
    pub delta: f64,
    pub ell: f64,
}

/// Admissibility with the largest allowed `δ = 1/(4p)`.
pub fn validate(spec: &NonlinearitySpec, n: usize) -> Result<AdmissibilityReport> {
    validate_with_delta(spec, n, None)
}

pub fn validate_with_delta(
    spec: &NonlinearitySpec,
    n: usize,
    delta: Option<f64>,
) -> Result<AdmissibilityReport> {
    if n < 2 {
        return Err(Error::Config(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    spec.check(n)?;
    let p = spec.min_degree();
    let delta_max = 1.0 / (4.0 * p as f64);
    let delta = delta.unwrap_or(delta_max);
    if !(delta > 0.0 && delta <= delta_max) {
        return Err(Error::Config(format!(
            "δ = {delta} must lie in (0, 1/(4p)] = (0, {delta_max}]"
        )));
    }
    Ok(AdmissibilityReport {
        n,
        p,
        condition_ok: admissible(p, n),
        delta_max,
        delta,
        ell: -0.5 - delta,
    })
}

/// `N[u]` evaluated pointwise; the result holds point values.
pub fn evaluate(spec: &NonlinearitySpec, u: &Field) -> Result<Field> {
    let d = u.domain();
    spec.check(d.dim())?;
    let np = d.point_count();
    let mut words: HashMap<Vec<FrameDir>, Field> = HashMap::new();
    for f in spec.monomials.iter().flat_map(|m| &m.factors) {
        if !words.contains_key(&f.word) {
            let v = frame_derivative(u, &f.word)?;
            v.values();
            words.insert(f.word.clone(), v);
        }
    }
    let factor_values: Vec<Vec<(&[Complex64], bool)>> = spec
        .monomials
        .iter()
        .map(|m| {
            m.factors
                .iter()
                .map(|f| (words[&f.word].values(), f.conj))
                .collect()
        })
        .collect();
    let nodes = d.nodes();
    let mut out = vec![Complex64::new(0.0, 0.0); d.radial_count() * np];
    out.par_chunks_mut(np).enumerate().for_each(|(i, row)| {
        let r = nodes[i];
        for (m, facs) in spec.monomials.iter().zip(&factor_values) {
            let c = m.coefficient * m.profile.value(r);
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, o) in row.iter_mut().enumerate() {
                let idx = i * np + j;
                let mut prod = c;
                for (vals, conj) in facs {
                    let v = vals[idx];
                    prod *= if *conj { v.conj() } else { v };
                }
                *o += prod;
            }
        }
    });
    Field::from_values(d, out)
}
