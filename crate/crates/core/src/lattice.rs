//! The periodic one-dimensional lattice model.
//!
//! The single-particle Hamiltonian is `h = -Δ + U` where `-Δ` is the 3-point
//! periodic second difference scaled by `(d / period)^2`. The pair
//! interaction is stored as samples `V(r)` over lattice displacements
//! `r = 0..d`. Fourier convention: `V(r) = Σ_q V̂(q) exp(2πi q r / d)`, so
//! `V̂(q) = (1/d) Σ_r V(r) exp(-2πi q r / d)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ZERO};

/// Catalog of potential shapes, evaluated either on sites (external
/// potential) or on displacements (pair interaction). All shapes are even
/// under `r -> d - r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Shape {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude * cos(2π harmonic r / d) + offset`
    Cosine {
        amplitude: f64,
        #[serde(default = "default_harmonic")]
        harmonic: u32,
        #[serde(default)]
        offset: f64,
    },
    /// `amplitude * exp(-x^2 / (2 width^2))` with `x` the torus distance
    /// `min(r, d - r) * period / d`.
    Gaussian { amplitude: f64, width: f64 },
}

fn default_harmonic() -> u32 {
    1
}

impl Shape {
    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("shape parameter `{name}` is not finite")))
            }
        };
        match *self {
            Shape::Zero => Ok(()),
            Shape::Constant { value } => finite(value, "value"),
            Shape::Cosine {
                amplitude, offset, ..
            } => {
                finite(amplitude, "amplitude")?;
                finite(offset, "offset")
            }
            Shape::Gaussian { amplitude, width } => {
                finite(amplitude, "amplitude")?;
                finite(width, "width")?;
                if width <= 0.0 {
                    return Err(Error::InvalidArgument("gaussian width must be positive".into()));
                }
                Ok(())
            }
        }
    }

    /// Value at lattice offset `r` (site index or displacement).
    pub fn sample(&self, r: usize, d: usize, period: f64) -> f64 {
        let r = r % d;
        let folded = r.min(d - r);
        match *self {
            Shape::Zero => 0.0,
            Shape::Constant { value } => value,
            Shape::Cosine {
                amplitude,
                harmonic,
                offset,
            } => {
                let phase = TAU * ((harmonic as usize * folded) % d) as f64 / d as f64;
                amplitude * phase.cos() + offset
            }
            Shape::Gaussian { amplitude, width } => {
                let x = folded as f64 * period / d as f64;
                amplitude * (-x * x / (2.0 * width * width)).exp()
            }
        }
    }

    pub fn samples(&self, d: usize, period: f64) -> Vec<f64> {
        (0..d).map(|r| self.sample(r, d, period)).collect()
    }
}

/// Derived interaction constants entering every envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionNorms {
    /// `max_r |V(r)|`
    pub sup_norm: f64,
    /// `Σ_q |V̂(q)|`
    pub fourier_l1: f64,
    /// `1 + fourier_l1 / sup_norm`; `None` when the interaction vanishes.
    pub lambda_v: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LatticeModel {
    d: usize,
    period: f64,
    u_samples: Vec<f64>,
    v_samples: Vec<f64>,
    kinetic: CMat,
    v_hat: Vec<C64>,
    norms: InteractionNorms,
}

/// Builds the lattice model from catalog shapes.
pub fn build_lattice(d: usize, period: f64, u: &Shape, v: &Shape) -> Result<LatticeModel> {
    if d == 0 {
        return Err(Error::InvalidArgument("lattice needs at least one site".into()));
    }
    if !period.is_finite() || period <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "period must be positive and finite, got {period}"
        )));
    }
    u.validate()?;
    v.validate()?;
    LatticeModel::from_samples(period, u.samples(d, period), v.samples(d, period))
}

pub fn interaction_norms(model: &LatticeModel) -> InteractionNorms {
    model.norms
}

/// `V̂(q) = (1/d) Σ_r V(r) exp(-2πi q r / d)` by direct summation.
pub fn fourier_coefficients(v: &[f64]) -> Vec<C64> {
    let d = v.len();
    (0..d)
        .map(|q| {
            let mut acc = ZERO;
            for (r, &vr) in v.iter().enumerate() {
                let angle = -TAU * ((q * r) % d) as f64 / d as f64;
                acc += C64::from_polar(vr, angle);
            }
            acc / d as f64
        })
        .collect()
}

impl LatticeModel {
    /// Model from raw samples. `v` must be even under `r -> (d - r) mod d`.
    pub fn from_samples(period: f64, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let d = u.len();
        if d == 0 {
            return Err(Error::InvalidArgument("lattice needs at least one site".into()));
        }
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("potential samples"));
        }
        let scale = v.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for r in 0..d {
            let mirror = (d - r) % d;
            if (v[r] - v[mirror]).abs() > 1e-14 * scale {
                return Err(Error::InvalidArgument(format!(
                    "interaction samples are not even: V({r}) = {} but V({mirror}) = {}",
                    v[r], v[mirror]
                )));
            }
        }

        let hop = (d as f64 / period).powi(2);
        let mut kinetic = CMat::zeros(d, d);
        for p in 0..d {
            kinetic[(p, p)] += C64::new(2.0 * hop + u[p], 0.0);
            kinetic[(p, (p + 1) % d)] -= C64::new(hop, 0.0);
            kinetic[(p, (p + d - 1) % d)] -= C64::new(hop, 0.0);
        }

        let v_hat = fourier_coefficients(&v);
        let sup_norm = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let fourier_l1 = v_hat.iter().map(|c| c.norm()).sum();
        let lambda_v = (sup_norm > 0.0).then(|| 1.0 + fourier_l1 / sup_norm);

        Ok(Self {
            d,
            period,
            u_samples: u,
            v_samples: v,
            kinetic,
            v_hat,
            norms: InteractionNorms {
                sup_norm,
                fourier_l1,
                lambda_v,
            },
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Single-particle Hamiltonian `-Δ + U`.
    pub fn kinetic(&self) -> &CMat {
        &self.kinetic
    }

    pub fn u_samples(&self) -> &[f64] {
        &self.u_samples
    }

    pub fn v_samples(&self) -> &[f64] {
        &self.v_samples
    }

    /// `V(p - q)` with periodic wrap.
    #[inline]
    pub fn v_between(&self, p: usize, q: usize) -> f64 {
        self.v_samples[(p + self.d - q) % self.d]
    }

    pub fn fourier(&self) -> &[C64] {
        &self.v_hat
    }

    pub fn norms(&self) -> InteractionNorms {
        self.norms
    }

    pub fn interaction_vanishes(&self) -> bool {
        self.norms.sup_norm == 0.0
    }

    /// Lattice circular convolution `(V * f)(x) = Σ_y V(x - y) f(y)`.
    pub fn convolve(&self, f: &[f64]) -> Vec<f64> {
        (0..self.d)
            .map(|x| (0..self.d).map(|y| self.v_between(x, y) * f[y]).sum())
            .collect()
    }
}
