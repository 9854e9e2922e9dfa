//! Leading-order asymptotic fields at a sharp re-entrant corner.
//!
//! Angles are measured from the notch bisector, so the traction-free faces sit
//! at `φ = ±α/2`. Displacements and stresses are Cartesian.

use std::f64::consts::PI;

use nalgebra::{Point2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::elasticity::Material;
use crate::error::{Error, Result};

/// Symmetric (I) or antisymmetric (II) eigenfield about the bisector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    I,
    II,
}

fn characteristic(alpha: f64, lambda: f64, mode: Mode) -> f64 {
    match mode {
        Mode::I => (lambda * alpha).sin() + lambda * alpha.sin(),
        Mode::II => (lambda * alpha).sin() - lambda * alpha.sin(),
    }
}

/// Smallest positive root of the mode's characteristic equation that carries a
/// non-trivial eigenfunction.
///
/// The bracket `(0.1, 1.999)` is scanned on 400 uniform intervals and each sign
/// change is bisected to 1e-14.
pub fn solve_singularity_eigenvalue(alpha: f64, mode: Mode) -> Result<f64> {
    if !(alpha > PI && alpha <= 2.0 * PI + 1e-12) {
        return Err(Error::InvalidInput(format!("notch angle must lie in (π, 2π], got {alpha}")));
    }
    let (lo, hi, intervals) = (0.1, 1.999, 400);
    let f = |l: f64| characteristic(alpha, l, mode);
    let step = (hi - lo) / intervals as f64;
    let mut candidates = Vec::new();
    let mut prev = (lo, f(lo));
    for k in 1..=intervals {
        let x = lo + step * k as f64;
        let fx = f(x);
        if prev.1 == 0.0 {
            candidates.push(prev.0);
        } else if prev.1.signum() != fx.signum() && fx != 0.0 {
            candidates.push(bisect(&f, prev.0, x));
        }
        prev = (x, fx);
    }
    for lambda in candidates {
        if characteristic(alpha, lambda, mode).abs() >= 1e-12 {
            continue;
        }
        if !eigenfunction_vanishes(alpha, lambda, mode) {
            return Ok(lambda);
        }
    }
    Err(Error::NoEigenvalue {
        alpha,
        detail: format!("mode {mode:?}: no admissible sign change in (0.1, 1.999)"),
    })
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    while b - a > 1e-14 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    // pick the endpoint with the smaller residual
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

fn eigenfunction_vanishes(alpha: f64, lambda: f64, mode: Mode) -> bool {
    let Ok(q) = q_constant(alpha, lambda, mode) else {
        return false;
    };
    let field = Eigenfield {
        mode,
        lambda,
        q: q.value,
    };
    let max = (0..=16)
        .map(|k| -0.5 * alpha + alpha * k as f64 / 16.0)
        .map(|phi| field.stress_shape(phi).amax())
        .fold(0.0, f64::max);
    max < 1e-8
}

/// Notch constant `Q`, possibly obtained as a limit along the eigencurve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QConstant {
    pub value: f64,
    /// True when the closed form was 0/0 and the value was extrapolated.
    pub limit: bool,
}

fn q_closed_form(alpha: f64, lambda: f64, mode: Mode) -> (f64, f64) {
    match mode {
        Mode::I => (
            -((lambda - 1.0) * alpha / 2.0).cos(),
            ((lambda + 1.0) * alpha / 2.0).cos(),
        ),
        Mode::II => (
            -((lambda - 1.0) * alpha / 2.0).sin(),
            ((lambda + 1.0) * alpha / 2.0).sin(),
        ),
    }
}

/// `Q` for the eigenvalue `lambda` of `mode` at notch angle `alpha`.
///
/// When the denominator vanishes (e.g. mode I at α = 2π) the value is
/// Richardson-extrapolated from perturbed angles `α(1 - δ)` and flagged.
pub fn q_constant(alpha: f64, lambda: f64, mode: Mode) -> Result<QConstant> {
    let (num, den) = q_closed_form(alpha, lambda, mode);
    if den.abs() >= 1e-14 {
        return Ok(QConstant {
            value: num / den,
            limit: false,
        });
    }
    let perturbed = |delta: f64| -> Result<f64> {
        let a = alpha * (1.0 - delta);
        let l = solve_singularity_eigenvalue(a, mode)?;
        let (n, d) = q_closed_form(a, l, mode);
        if d.abs() < 1e-14 {
            return Err(Error::DegenerateAngle {
                alpha,
                detail: "perturbed denominator also vanishes".into(),
            });
        }
        Ok(n / d)
    };
    let degenerate = |detail: String| Error::DegenerateAngle { alpha, detail };
    let q1 = perturbed(1e-4).map_err(|e| degenerate(e.to_string()))?;
    let q2 = perturbed(5e-5).map_err(|e| degenerate(e.to_string()))?;
    let q4 = perturbed(2.5e-5).map_err(|e| degenerate(e.to_string()))?;
    let r1 = 2.0 * q2 - q1;
    let r2 = 2.0 * q4 - q2;
    if (r1 - r2).abs() > 1e-6 * r1.abs().max(1.0) {
        return Err(degenerate(format!(
            "Q has no stable limit ({r1} vs {r2}); the angle is degenerate for mode {mode:?}"
        )));
    }
    log::warn!("Q for mode {mode:?} at alpha = {alpha} evaluated as a limit: {r2}");
    Ok(QConstant {
        value: r2,
        limit: true,
    })
}

/// One eigenfield `r^λ Ψ(φ)` / `λ r^(λ-1) Φ(φ)`. Dual (extraction) fields use
/// a negative exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenfield {
    pub mode: Mode,
    pub lambda: f64,
    pub q: f64,
}

impl Eigenfield {
    pub fn new(alpha: f64, mode: Mode) -> Result<Self> {
        let lambda = solve_singularity_eigenvalue(alpha, mode)?;
        let q = q_constant(alpha, lambda, mode)?.value;
        Ok(Self { mode, lambda, q })
    }

    /// Extraction field with exponent `-λ`. Substituting `-λ` in the closed form
    /// gives exactly `1/Q`, which avoids re-evaluating a 0/0 form at α = 2π.
    pub fn dual(&self) -> Self {
        Self {
            mode: self.mode,
            lambda: -self.lambda,
            q: 1.0 / self.q,
        }
    }

    /// Angular displacement shape `Ψ(φ)`, including the `1/(2μ)` factor.
    pub fn displacement_shape(&self, phi: f64, mu: f64, kappa: f64) -> Vector2<f64> {
        let (l, q) = (self.lambda, self.q);
        let c = 1.0 / (2.0 * mu);
        match self.mode {
            Mode::I => Vector2::new(
                c * ((kappa - q * (l + 1.0)) * (l * phi).cos() - l * ((l - 2.0) * phi).cos()),
                c * ((kappa + q * (l + 1.0)) * (l * phi).sin() + l * ((l - 2.0) * phi).sin()),
            ),
            Mode::II => Vector2::new(
                c * ((kappa - q * (l + 1.0)) * (l * phi).sin() - l * ((l - 2.0) * phi).sin()),
                c * (-(kappa + q * (l + 1.0)) * (l * phi).cos() - l * ((l - 2.0) * phi).cos()),
            ),
        }
    }

    /// Angular stress shape `Φ(φ)` as `(xx, yy, xy)`.
    pub fn stress_shape(&self, phi: f64) -> Vector3<f64> {
        let (l, q) = (self.lambda, self.q);
        let a = (l - 1.0) * phi;
        let b = (l - 3.0) * phi;
        match self.mode {
            Mode::I => Vector3::new(
                (2.0 - q * (l + 1.0)) * a.cos() - (l - 1.0) * b.cos(),
                (2.0 + q * (l + 1.0)) * a.cos() + (l - 1.0) * b.cos(),
                q * (l + 1.0) * a.sin() + (l - 1.0) * b.sin(),
            ),
            Mode::II => Vector3::new(
                (2.0 - q * (l + 1.0)) * a.sin() - (l - 1.0) * b.sin(),
                (2.0 + q * (l + 1.0)) * a.sin() + (l - 1.0) * b.sin(),
                -q * (l + 1.0) * a.cos() - (l - 1.0) * b.cos(),
            ),
        }
    }

    pub fn displacement(&self, r: f64, phi: f64, mu: f64, kappa: f64) -> Vector2<f64> {
        r.powf(self.lambda) * self.displacement_shape(phi, mu, kappa)
    }

    pub fn stress(&self, r: f64, phi: f64) -> Vector3<f64> {
        self.lambda * r.powf(self.lambda - 1.0) * self.stress_shape(phi)
    }
}

/// Two-mode asymptotic solution with its stress intensity factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularSolution {
    pub alpha: f64,
    pub mode_i: Eigenfield,
    pub mode_ii: Eigenfield,
    pub k_i: f64,
    pub k_ii: f64,
    pub material: Material,
    /// Position of the singular vertex.
    pub vertex: Point2<f64>,
}

impl SingularSolution {
    pub fn new(alpha: f64, material: Material, k_i: f64, k_ii: f64) -> Result<Self> {
        material.validate()?;
        Ok(Self {
            alpha,
            mode_i: Eigenfield::new(alpha, Mode::I)?,
            mode_ii: Eigenfield::new(alpha, Mode::II)?,
            k_i,
            k_ii,
            material,
            vertex: Point2::origin(),
        })
    }

    pub fn with_gsifs(mut self, k_i: f64, k_ii: f64) -> Self {
        self.k_i = k_i;
        self.k_ii = k_ii;
        self
    }

    pub fn eigenfield(&self, mode: Mode) -> &Eigenfield {
        match mode {
            Mode::I => &self.mode_i,
            Mode::II => &self.mode_ii,
        }
    }

    fn check(&self, r: f64, phi: f64) -> Result<()> {
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
        }
        if phi.abs() > 0.5 * self.alpha + 1e-9 {
            return Err(Error::InvalidInput(format!(
                "angle {phi} outside the material wedge [-{a}, {a}]",
                a = 0.5 * self.alpha
            )));
        }
        Ok(())
    }

    pub fn williams_displacement(&self, r: f64, phi: f64) -> Result<Vector2<f64>> {
        self.check(r, phi)?;
        Ok(self.displacement_polar(r, phi))
    }

    pub fn williams_stress(&self, r: f64, phi: f64) -> Result<Vector3<f64>> {
        self.check(r, phi)?;
        Ok(self.stress_polar(r, phi))
    }

    fn displacement_polar(&self, r: f64, phi: f64) -> Vector2<f64> {
        let (mu, kappa) = self.material.elastic_constants();
        self.k_i * self.mode_i.displacement(r, phi, mu, kappa)
            + self.k_ii * self.mode_ii.displacement(r, phi, mu, kappa)
    }

    fn stress_polar(&self, r: f64, phi: f64) -> Vector3<f64> {
        self.k_i * self.mode_i.stress(r, phi) + self.k_ii * self.mode_ii.stress(r, phi)
    }

    /// Polar coordinates of `p` relative to the vertex.
    pub fn polar(&self, p: &Point2<f64>) -> (f64, f64) {
        let d = p - self.vertex;
        (d.norm(), d.y.atan2(d.x))
    }

    /// Displacement at a Cartesian point. The vertex itself maps to zero.
    pub fn displacement_at(&self, p: &Point2<f64>) -> Vector2<f64> {
        let (r, phi) = self.polar(p);
        if r == 0.0 {
            return Vector2::zeros();
        }
        self.displacement_polar(r, phi)
    }

    /// Stress at a Cartesian point (`r > 0` assumed).
    pub fn stress_at(&self, p: &Point2<f64>) -> Vector3<f64> {
        let (r, phi) = self.polar(p);
        self.stress_polar(r, phi)
    }
}
