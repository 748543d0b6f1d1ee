//! The diagonal Hilbert-field model over `S = ℂ`.
//!
//! Fibers carry an orthonormal basis `φ_0, φ_1, …`; a section is a finite sum
//! `Σ a_l φ_l` with polynomial coefficients. The connection is determined by a
//! single polynomial `k`:
//!
//! ```text
//! ∇_{∂/∂s} φ_j = (j+1) k φ_j,     ∇_{∂/∂s̄} φ_j = -(j+1) k̄ φ_j
//! ```
//!
//! extended to all sections by the Leibniz rule.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::FieldError;
use crate::poly::{Direction, WirtingerPolynomial};

/// Finitely supported section `Σ_l a_l φ_l`; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(
    into = "Vec<(usize, WirtingerPolynomial)>",
    from = "Vec<(usize, WirtingerPolynomial)>"
)]
pub struct FieldSection {
    coeffs: BTreeMap<usize, WirtingerPolynomial>,
}

impl FieldSection {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The basis section `φ_j`.
    pub fn basis(j: usize) -> Self {
        Self::single(j, WirtingerPolynomial::one())
    }

    /// `a · φ_j`.
    pub fn single(j: usize, a: WirtingerPolynomial) -> Self {
        let mut coeffs = BTreeMap::new();
        if !a.is_zero() {
            coeffs.insert(j, a);
        }
        Self { coeffs }
    }

    pub fn from_coeffs<I>(coeffs: I) -> Self
    where
        I: IntoIterator<Item = (usize, WirtingerPolynomial)>,
    {
        let mut out = Self::zero();
        for (l, a) in coeffs {
            out.add_coeff(l, a);
        }
        out
    }

    fn add_coeff(&mut self, l: usize, a: WirtingerPolynomial) {
        if a.is_zero() {
            return;
        }
        let sum = match self.coeffs.remove(&l) {
            Some(prev) => &prev + &a,
            None => a,
        };
        if !sum.is_zero() {
            self.coeffs.insert(l, sum);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, l: usize) -> WirtingerPolynomial {
        self.coeffs.get(&l).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (usize, &WirtingerPolynomial)> {
        self.coeffs.iter().map(|(l, a)| (*l, a))
    }

    pub fn support(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    /// `f · φ` for a scalar function `f`.
    pub fn scale(&self, f: &WirtingerPolynomial) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|(l, a)| (*l, f * a)))
    }
}

impl Add for &FieldSection {
    type Output = FieldSection;
    fn add(self, rhs: &FieldSection) -> FieldSection {
        let mut out = self.clone();
        for (l, a) in &rhs.coeffs {
            out.add_coeff(*l, a.clone());
        }
        out
    }
}

impl Sub for &FieldSection {
    type Output = FieldSection;
    fn sub(self, rhs: &FieldSection) -> FieldSection {
        self + &(-rhs)
    }
}

impl Neg for &FieldSection {
    type Output = FieldSection;
    fn neg(self) -> FieldSection {
        FieldSection {
            coeffs: self.coeffs.iter().map(|(l, a)| (*l, -a)).collect(),
        }
    }
}

impl From<FieldSection> for Vec<(usize, WirtingerPolynomial)> {
    fn from(s: FieldSection) -> Self {
        s.coeffs.into_iter().collect()
    }
}

impl From<Vec<(usize, WirtingerPolynomial)>> for FieldSection {
    fn from(v: Vec<(usize, WirtingerPolynomial)>) -> Self {
        FieldSection::from_coeffs(v)
    }
}

/// The connection data: the polynomial `k`, optionally derived from a
/// real-valued potential `g` with `k = ∂g/∂s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ConnectionWire", try_from = "ConnectionWire")]
pub struct ConnectionSpec {
    k: WirtingerPolynomial,
    g: Option<WirtingerPolynomial>,
}

impl ConnectionSpec {
    pub fn from_k(k: WirtingerPolynomial) -> Self {
        Self { k, g: None }
    }

    /// `k = ∂g/∂s`; fails unless `g` is real-valued.
    pub fn from_potential(g: WirtingerPolynomial) -> Result<Self, FieldError> {
        if !g.is_real_valued() {
            return Err(FieldError::PotentialNotReal);
        }
        Ok(Self {
            k: g.derivative(Direction::D),
            g: Some(g),
        })
    }

    /// The zero connection.
    pub fn flat() -> Self {
        Self::from_k(WirtingerPolynomial::zero())
    }

    pub fn k(&self) -> &WirtingerPolynomial {
        &self.k
    }

    pub fn potential(&self) -> Option<&WirtingerPolynomial> {
        self.g.as_ref()
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if let Some(g) = &self.g {
            if !g.is_real_valued() {
                return Err(FieldError::PotentialNotReal);
            }
            if g.derivative(Direction::D) != self.k {
                return Err(FieldError::PotentialMismatch);
            }
        }
        Ok(())
    }

    /// `a(∂/∂s) = (j+1)k`, `a(∂/∂s̄) = -(j+1)k̄`.
    pub fn coefficient(&self, j: usize, d: Direction) -> WirtingerPolynomial {
        let n = j as i64 + 1;
        match d {
            Direction::D => self.k.scale_int(n),
            Direction::Dbar => self.k.conjugate().scale_int(-n),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ConnectionWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<WirtingerPolynomial>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<WirtingerPolynomial>,
}

impl From<ConnectionSpec> for ConnectionWire {
    fn from(c: ConnectionSpec) -> Self {
        ConnectionWire {
            k: Some(c.k),
            g: c.g,
        }
    }
}

impl TryFrom<ConnectionWire> for ConnectionSpec {
    type Error = String;
    fn try_from(w: ConnectionWire) -> Result<Self, String> {
        let spec = match (w.k, w.g) {
            (Some(k), g) => ConnectionSpec { k, g },
            (None, Some(g)) => ConnectionSpec::from_potential(g).map_err(|e| e.to_string())?,
            (None, None) => return Err("connection needs `k` or `g`".into()),
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

pub fn connection_coefficient(
    conn: &ConnectionSpec,
    j: usize,
    d: Direction,
) -> WirtingerPolynomial {
    conn.coefficient(j, d)
}

/// `∇_d φ`: per index `l`, `a_l ↦ ∂_d a_l + a(d; l) a_l`.
pub fn covariant_derivative(
    phi: &FieldSection,
    d: Direction,
    conn: &ConnectionSpec,
) -> FieldSection {
    FieldSection::from_coeffs(
        phi.coeffs()
            .map(|(l, a)| (l, &a.derivative(d) + &(&conn.coefficient(l, d) * a))),
    )
}

/// `∇_{dirs[m-1]} ⋯ ∇_{dirs[0]} φ`; `dirs[0]` is applied first.
pub fn iterated_covariant(
    phi: &FieldSection,
    dirs: &[Direction],
    conn: &ConnectionSpec,
) -> FieldSection {
    dirs.iter()
        .fold(phi.clone(), |acc, &d| covariant_derivative(&acc, d, conn))
}

/// `h(φ, ψ) = Σ_l a_l · conj(b_l)`, the basis being orthonormal.
pub fn metric_pair(phi: &FieldSection, psi: &FieldSection) -> WirtingerPolynomial {
    phi.coeffs()
        .filter_map(|(l, a)| psi.coeffs.get(&l).map(|b| a * &b.conjugate()))
        .fold(WirtingerPolynomial::zero(), |acc, t| &acc + &t)
}

/// `h(φ, φ)^{1/2}` at `s`. Rounding can push the real, nonnegative value
/// slightly below zero; such values are clamped.
pub fn metric_norm_at(phi: &FieldSection, s: Complex64) -> f64 {
    let v = metric_pair(phi, phi).evaluate(s);
    debug_assert!(v.im.abs() <= 1e-9 * v.norm().max(1.0));
    debug_assert!(v.re >= -1e-9 * v.norm().max(1.0));
    v.re.max(0.0).sqrt()
}

/// `∇_d(fφ) = (∂_d f)φ + f∇_dφ`, compared exactly.
pub fn check_leibniz(
    conn: &ConnectionSpec,
    f: &WirtingerPolynomial,
    phi: &FieldSection,
    d: Direction,
) -> bool {
    let lhs = covariant_derivative(&phi.scale(f), d, conn);
    let rhs = &phi.scale(&f.derivative(d)) + &covariant_derivative(phi, d, conn).scale(f);
    lhs == rhs
}

/// `∂_d h(φ, ψ) = h(∇_d φ, ψ) + h(φ, ∇_{d̄} ψ)`, compared exactly.
pub fn check_metric_compat(
    conn: &ConnectionSpec,
    phi: &FieldSection,
    psi: &FieldSection,
    d: Direction,
) -> bool {
    let lhs = metric_pair(phi, psi).derivative(d);
    let rhs = &metric_pair(&covariant_derivative(phi, d, conn), psi)
        + &metric_pair(phi, &covariant_derivative(psi, d.opposite(), conn));
    (&lhs - &rhs).is_zero()
}

/// `R(∂/∂s, ∂/∂s̄)φ = ∇_D∇_Dbar φ − ∇_Dbar∇_D φ`; the coordinate bracket vanishes.
pub fn curvature_apply(conn: &ConnectionSpec, phi: &FieldSection) -> FieldSection {
    let d_dbar = iterated_covariant(phi, &[Direction::Dbar, Direction::D], conn);
    let dbar_d = iterated_covariant(phi, &[Direction::D, Direction::Dbar], conn);
    &d_dbar - &dbar_d
}

/// `-(j+1)(∂k̄/∂s + ∂k/∂s̄)`, a cross-check for the commutator.
pub fn curvature_closed_form(conn: &ConnectionSpec, j: usize) -> WirtingerPolynomial {
    let k = conn.k();
    let sum = &k.conjugate().derivative(Direction::D) + &k.derivative(Direction::Dbar);
    sum.scale_int(-(j as i64 + 1))
}

/// The eigenvalue `λ_j` with `R φ_j = λ_j φ_j`, read off the commutator after
/// verifying the result is supported on `{j}`. With a potential present it
/// must also equal `-(j+1)Δg/2`.
pub fn curvature_eigenvalue(
    conn: &ConnectionSpec,
    j: usize,
) -> Result<WirtingerPolynomial, FieldError> {
    let image = curvature_apply(conn, &FieldSection::basis(j));
    if image.coeffs().any(|(l, _)| l != j) {
        return Err(FieldError::NotDiagonal(j));
    }
    let lambda = image.coeff(j);
    if let Some(g) = conn.potential() {
        let expected = g
            .laplacian()
            .scale(&crate::scalar::GaussianRational::from_ratio(
                -(j as i64 + 1),
                2,
            ));
        if expected != lambda {
            return Err(FieldError::ClosedFormMismatch(j));
        }
    }
    Ok(lambda)
}
