//! Polynomials in the independent symbols `s` and `s̄` with Gaussian-rational
//! coefficients, together with the two Wirtinger derivations.
//!
//! A [`WirtingerPolynomial`] denotes `Σ c_{p,q} s^p s̄^q`. The term map never
//! stores a zero coefficient, so structural equality is mathematical equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{GridError, ParseError};
use crate::grid::CompactRectangle;
use crate::scalar::{rational_from_wire, rational_to_wire, GaussianRational};

/// One of the two coordinate derivations `∂/∂s` and `∂/∂s̄`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    /// `∂/∂s`
    D,
    /// `∂/∂s̄`
    Dbar,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::D, Direction::Dbar];

    /// `D ↔ Dbar`; the conjugate vector field.
    pub fn opposite(self) -> Direction {
        match self {
            Direction::D => Direction::Dbar,
            Direction::Dbar => Direction::D,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::D => "D",
            Direction::Dbar => "Dbar",
        }
    }

    /// All `2^m` sequences of length `m`, in binary order with `D` as 0.
    pub fn sequences(m: usize) -> impl Iterator<Item = Vec<Direction>> {
        (0u64..(1u64 << m)).map(move |bits| {
            (0..m)
                .map(|i| {
                    if bits >> i & 1 == 0 {
                        Direction::D
                    } else {
                        Direction::Dbar
                    }
                })
                .collect()
        })
    }

    pub fn format_sequence(dirs: &[Direction]) -> String {
        dirs.iter().map(|d| d.label()).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Exponent pair `(p, q)` of the monomial `s^p s̄^q`.
pub type Exponent = (u32, u32);

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "PolyRecords", try_from = "PolyRecords")]
pub struct WirtingerPolynomial {
    terms: BTreeMap<Exponent, GaussianRational>,
}

impl WirtingerPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn from_integer(n: i64) -> Self {
        Self::constant(GaussianRational::from_integer(n))
    }

    pub fn monomial(p: u32, q: u32, c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((p, q), c);
        }
        Self { terms }
    }

    /// The coordinate function `s`.
    pub fn s() -> Self {
        Self::monomial(1, 0, GaussianRational::one())
    }

    /// The conjugate coordinate `s̄`.
    pub fn sbar() -> Self {
        Self::monomial(0, 1, GaussianRational::one())
    }

    /// Sums repeated exponents and drops zeros.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponent, GaussianRational)>,
    {
        let mut out = Self::zero();
        for (e, c) in terms {
            out.add_term(e, &c);
        }
        out
    }

    fn add_term(&mut self, e: Exponent, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(GaussianRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, p: u32, q: u32) -> GaussianRational {
        self.terms.get(&(p, q)).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest `p + q` over stored terms; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(p, q)| p + q).max()
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&GaussianRational::from_integer(n))
    }

    /// `Σ conj(c_{p,q}) s^q s̄^p`: the pointwise complex conjugate.
    pub fn conjugate(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(p, q), c)| ((q, p), c.conj()))
                .collect(),
        }
    }

    /// `c_{p,q} = conj(c_{q,p})` for every pair.
    pub fn is_real_valued(&self) -> bool {
        *self == self.conjugate()
    }

    pub fn derivative(&self, d: Direction) -> Self {
        let mut out = Self::zero();
        for (&(p, q), c) in &self.terms {
            match d {
                Direction::D if p > 0 => out.add_term((p - 1, q), &c.scale_int(p as i64)),
                Direction::Dbar if q > 0 => out.add_term((p, q - 1), &c.scale_int(q as i64)),
                _ => {}
            }
        }
        out
    }

    /// Applies `dirs[0]` first.
    pub fn derivatives(&self, dirs: &[Direction]) -> Self {
        dirs.iter().fold(self.clone(), |acc, &d| acc.derivative(d))
    }

    /// `Δ = 4 ∂²/∂s∂s̄`.
    pub fn laplacian(&self) -> Self {
        self.derivative(Direction::Dbar)
            .derivative(Direction::D)
            .scale_int(4)
    }

    pub fn evaluate(&self, s: Complex64) -> Complex64 {
        let sb = s.conj();
        self.terms
            .iter()
            .map(|(&(p, q), c)| c.to_complex64() * s.powu(p) * sb.powu(q))
            .sum()
    }

    /// Floating-point term list for repeated evaluation.
    pub fn to_numeric(&self) -> NumericPolynomial {
        NumericPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(&(p, q), c)| (p as usize, q as usize, c.to_complex64()))
                .collect(),
        }
    }

    /// Maximum of `|a(s)|` over the grid points of `rect`. A lower bound for
    /// the supremum over the whole rectangle.
    pub fn sup_norm_on_grid(&self, rect: &CompactRectangle) -> Result<f64, GridError> {
        rect.validate()?;
        let numeric = self.to_numeric();
        Ok(rect
            .points()
            .iter()
            .map(|&z| numeric.evaluate(z).norm())
            .fold(0.0, f64::max))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polynomial serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A polynomial with `f64` coefficients; evaluation only.
#[derive(Clone, Debug, Default)]
pub struct NumericPolynomial {
    terms: Vec<(usize, usize, Complex64)>,
}

impl NumericPolynomial {
    pub fn evaluate(&self, s: Complex64) -> Complex64 {
        let sb = s.conj();
        self.terms
            .iter()
            .map(|&(p, q, c)| c * s.powu(p as u32) * sb.powu(q as u32))
            .sum()
    }

    /// Evaluation from precomputed power tables `s^p` and `s̄^q`.
    pub fn evaluate_with_powers(&self, s_pow: &[Complex64], sbar_pow: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|&(p, q, c)| c * s_pow[p] * sbar_pow[q])
            .sum()
    }

    pub fn max_exponent(&self) -> usize {
        self.terms
            .iter()
            .map(|&(p, q, _)| p.max(q))
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Add for &WirtingerPolynomial {
    type Output = WirtingerPolynomial;
    fn add(self, rhs: &WirtingerPolynomial) -> WirtingerPolynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c);
        }
        out
    }
}

impl Add for WirtingerPolynomial {
    type Output = WirtingerPolynomial;
    fn add(self, rhs: WirtingerPolynomial) -> WirtingerPolynomial {
        &self + &rhs
    }
}

impl Sub for &WirtingerPolynomial {
    type Output = WirtingerPolynomial;
    fn sub(self, rhs: &WirtingerPolynomial) -> WirtingerPolynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, &-c);
        }
        out
    }
}

impl Sub for WirtingerPolynomial {
    type Output = WirtingerPolynomial;
    fn sub(self, rhs: WirtingerPolynomial) -> WirtingerPolynomial {
        &self - &rhs
    }
}

impl Mul for &WirtingerPolynomial {
    type Output = WirtingerPolynomial;
    fn mul(self, rhs: &WirtingerPolynomial) -> WirtingerPolynomial {
        let mut out = WirtingerPolynomial::zero();
        for (&(p1, q1), c1) in &self.terms {
            for (&(p2, q2), c2) in &rhs.terms {
                out.add_term((p1 + p2, q1 + q2), &(c1 * c2));
            }
        }
        out
    }
}

impl Mul for WirtingerPolynomial {
    type Output = WirtingerPolynomial;
    fn mul(self, rhs: WirtingerPolynomial) -> WirtingerPolynomial {
        &self * &rhs
    }
}

impl Neg for &WirtingerPolynomial {
    type Output = WirtingerPolynomial;
    fn neg(self) -> WirtingerPolynomial {
        WirtingerPolynomial {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Neg for WirtingerPolynomial {
    type Output = WirtingerPolynomial;
    fn neg(self) -> WirtingerPolynomial {
        -&self
    }
}

fn fmt_monomial(p: u32, q: u32) -> String {
    let mut parts = Vec::new();
    match p {
        0 => {}
        1 => parts.push("s".to_string()),
        _ => parts.push(format!("s^{p}")),
    }
    match q {
        0 => {}
        1 => parts.push("sbar".to_string()),
        _ => parts.push(format!("sbar^{q}")),
    }
    parts.join("*")
}

impl fmt::Display for WirtingerPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (&(p, q), c)) in self.terms.iter().enumerate() {
            // Real coefficients carry their sign into the separator.
            let negative = c.is_real() && c.re().is_negative();
            let c = if negative { -c } else { c.clone() };
            match (n, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mono = fmt_monomial(p, q);
            if mono.is_empty() {
                write!(f, "{c}")?;
            } else if c == GaussianRational::one() {
                f.write_str(&mono)?;
            } else {
                write!(f, "{c}*{mono}")?;
            }
        }
        Ok(())
    }
}

/// Wire form: a list of `[p, q, "re_num/re_den", "im_num/im_den"]` records.
#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct PolyRecords(Vec<(u32, u32, String, String)>);

impl From<WirtingerPolynomial> for PolyRecords {
    fn from(p: WirtingerPolynomial) -> Self {
        PolyRecords(
            p.terms
                .iter()
                .map(|(&(a, b), c)| (a, b, rational_to_wire(c.re()), rational_to_wire(c.im())))
                .collect(),
        )
    }
}

impl TryFrom<PolyRecords> for WirtingerPolynomial {
    type Error = ParseError;
    fn try_from(records: PolyRecords) -> Result<Self, ParseError> {
        let mut terms = Vec::with_capacity(records.0.len());
        for (p, q, re, im) in records.0 {
            let c = GaussianRational::new(rational_from_wire(&re)?, rational_from_wire(&im)?);
            terms.push(((p, q), c));
        }
        Ok(WirtingerPolynomial::from_terms(terms))
    }
}

impl fmt::Display for PolyRecords {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} records", self.0.len())
    }
}

/// `c · s^p s̄^q` with an integer coefficient; shorthand used throughout tests.
pub fn mono(c: i64, p: u32, q: u32) -> WirtingerPolynomial {
    WirtingerPolynomial::monomial(p, q, GaussianRational::from_integer(c))
}
