//! Analyticity certificates for the basis sections.
//!
//! A certificate `(ε, M)` witnesses
//!
//! ```text
//! sup (ε^m / m!) |η_1 ⋯ η_m h(s)| < M,     h ∈ {f, (j+1)k, -(j+1)k̄},
//! ```
//!
//! over all orders `m`, all sequences of coordinate derivations and all
//! points of a compact rectangle `K`. With `δ = ε / (2(1 + Mε))` every
//! iterated covariant derivative then satisfies
//!
//! ```text
//! (δ^m / m!) h(∇_{η_m} ⋯ ∇_{η_1} f φ_j)^{1/2}(s) ≤ (m+1) M 2^{-m}.
//! ```
//!
//! Polynomial inputs make the search finite: every derivative of order above
//! the total degree vanishes, so the supremum over `m` is attained by
//! `m ≤ 1 + deg`. Suprema over `K` are maxima over its grid, which is why the
//! search pads `M` by a safety factor.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AnalyticityError, ParseError};
use crate::expansion::splitting_term;
use crate::field::{covariant_derivative, ConnectionSpec, FieldSection};
use crate::grid::{CompactRectangle, PowerTable};
use crate::poly::{Direction, WirtingerPolynomial};
use crate::scalar::{rational_from_wire, rational_to_wire};
use crate::splitting::{factorial, KSplitting};

/// Relative slack on every floating-point bound comparison.
pub const BOUND_TOLERANCE: f64 = 1e-9;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `{f, (j+1)k, -(j+1)k̄}`.
pub fn h_set(f: &WirtingerPolynomial, conn: &ConnectionSpec, j: usize) -> Vec<WirtingerPolynomial> {
    vec![
        f.clone(),
        conn.coefficient(j, Direction::D),
        conn.coefficient(j, Direction::Dbar),
    ]
}

/// `ε / (2(1 + Mε))`, for `ε ∈ (0, 1)` and `M > 1`.
pub fn delta_from(
    epsilon: &BigRational,
    m_bound: &BigRational,
) -> Result<BigRational, AnalyticityError> {
    if *epsilon <= BigRational::zero() || *epsilon >= BigRational::one() {
        return Err(AnalyticityError::EpsilonOutOfRange);
    }
    if *m_bound <= BigRational::one() {
        return Err(AnalyticityError::MTooSmall);
    }
    let two = ratio(2, 1);
    Ok(epsilon / (two * (BigRational::one() + m_bound * epsilon)))
}

/// Max of `|η_1 ⋯ η_m h|` over all `2^m` derivation sequences and all grid
/// points of `rect`.
pub fn derivative_sup(
    h: &WirtingerPolynomial,
    m: usize,
    rect: &CompactRectangle,
) -> Result<f64, AnalyticityError> {
    rect.validate()?;
    let mut level: HashSet<WirtingerPolynomial> = HashSet::from([h.clone()]);
    for _ in 0..m {
        level = level
            .iter()
            .flat_map(|p| Direction::ALL.map(|d| p.derivative(d)))
            .collect();
    }
    let numerics: Vec<_> = level
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| p.to_numeric())
        .collect();
    if numerics.is_empty() {
        return Ok(0.0);
    }
    let max_exp = numerics.iter().map(|n| n.max_exponent()).max().unwrap_or(0);
    let table = PowerTable::new(&rect.points(), max_exp);
    Ok(numerics
        .iter()
        .map(|n| table.sup_abs(n))
        .fold(0.0, f64::max))
}

/// A certificate `(ε, M, δ)` together with the data it was issued for.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticityEstimate {
    pub epsilon: BigRational,
    pub m_bound: BigRational,
    pub delta: BigRational,
    /// Derivative orders checked; all derivatives of this order vanish.
    pub m_max: usize,
    pub rect: CompactRectangle,
    pub h_set: Vec<WirtingerPolynomial>,
    pub audited: bool,
}

impl AnalyticityEstimate {
    /// Builds an unaudited certificate; `δ` is derived, never supplied.
    pub fn new(
        epsilon: BigRational,
        m_bound: BigRational,
        rect: CompactRectangle,
        h_set: Vec<WirtingerPolynomial>,
    ) -> Result<Self, AnalyticityError> {
        let delta = delta_from(&epsilon, &m_bound)?;
        rect.validate()?;
        let m_max = 1 + h_set
            .iter()
            .filter_map(|h| h.total_degree())
            .max()
            .unwrap_or(0) as usize;
        Ok(Self {
            epsilon,
            m_bound,
            delta,
            m_max,
            rect,
            h_set,
            audited: false,
        })
    }

    pub fn epsilon_f64(&self) -> f64 {
        to_f64(&self.epsilon)
    }

    pub fn m_f64(&self) -> f64 {
        to_f64(&self.m_bound)
    }

    pub fn delta_f64(&self) -> f64 {
        to_f64(&self.delta)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CertificateWire::from(self))
            .expect("certificate serialization cannot fail")
    }

    /// Rebuilds a certificate for `(f, conn, j)` from its JSON form. The
    /// stored `δ` and `m_max` must agree with the recomputed ones; the result
    /// is unaudited.
    pub fn from_json(
        text: &str,
        f: &WirtingerPolynomial,
        conn: &ConnectionSpec,
        j: usize,
    ) -> Result<Self, ParseError> {
        let wire: CertificateWire = serde_json::from_str(text)?;
        let epsilon = rational_from_wire(&wire.epsilon)?;
        let m_bound = rational_from_wire(&wire.m)?;
        let delta = rational_from_wire(&wire.delta)?;
        let cert = Self::new(epsilon, m_bound, wire.k, h_set(f, conn, j))
            .map_err(|e| ParseError::Record(e.to_string()))?;
        if cert.delta != delta {
            return Err(ParseError::Record(
                "delta does not match epsilon/(2(1+M epsilon))".into(),
            ));
        }
        if cert.m_max != wire.m_max {
            return Err(ParseError::Record(format!(
                "m_max {} does not match the recomputed {}",
                wire.m_max, cert.m_max
            )));
        }
        Ok(cert)
    }
}

#[derive(Serialize, Deserialize)]
struct CertificateWire {
    epsilon: String,
    #[serde(rename = "M")]
    m: String,
    delta: String,
    m_max: usize,
    #[serde(rename = "K")]
    k: CompactRectangle,
    audited: bool,
}

impl From<&AnalyticityEstimate> for CertificateWire {
    fn from(c: &AnalyticityEstimate) -> Self {
        CertificateWire {
            epsilon: rational_to_wire(&c.epsilon),
            m: rational_to_wire(&c.m_bound),
            delta: rational_to_wire(&c.delta),
            m_max: c.m_max,
            k: c.rect.clone(),
            audited: c.audited,
        }
    }
}

/// Result of re-verifying a certificate from scratch.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub passed: bool,
    /// Largest `(ε^m/m!)|η h(s)|` found.
    pub worst_value: f64,
    /// `(index into h_set, derivation sequence)` attaining it.
    pub worst_at: Option<(usize, Vec<Direction>)>,
    pub tail_vanishes: bool,
    pub constants_valid: bool,
}

/// Exhaustive re-check of a certificate: each derivation sequence of order
/// `≤ m_max` is differentiated and evaluated on its own, and every order-
/// `m_max` derivative must vanish identically.
pub fn audit_certificate(cert: &AnalyticityEstimate) -> AuditReport {
    let constants_valid = delta_from(&cert.epsilon, &cert.m_bound)
        .map(|d| d == cert.delta)
        .unwrap_or(false);
    let eps = cert.epsilon_f64();
    let m_bound = cert.m_f64();
    let points = cert.rect.points();
    let mut worst_value = 0.0f64;
    let mut worst_at = None;
    let mut tail_vanishes = true;
    for (hi, h) in cert.h_set.iter().enumerate() {
        for m in 0..=cert.m_max {
            let weight =
                eps.powi(m as i32) / to_f64(&BigRational::from_integer(factorial(m).into()));
            for dirs in Direction::sequences(m) {
                let derived = h.derivatives(&dirs);
                if m == cert.m_max && !derived.is_zero() {
                    tail_vanishes = false;
                }
                let numeric = derived.to_numeric();
                for &z in &points {
                    let v = weight * numeric.evaluate(z).norm();
                    if v > worst_value {
                        worst_value = v;
                        worst_at = Some((hi, dirs.clone()));
                    }
                }
            }
        }
    }
    AuditReport {
        passed: constants_valid && tail_vanishes && worst_value < m_bound,
        worst_value,
        worst_at,
        tail_vanishes,
        constants_valid,
    }
}

#[derive(Clone, Debug)]
pub struct EstimateOptions {
    /// Multiplier applied to the grid supremum before rounding up; `≥ 1`.
    pub safety_factor: BigRational,
    /// Number of rungs `1/2, 1/4, …` tried for `ε`.
    pub ladder_len: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            safety_factor: ratio(2, 1),
            ladder_len: 8,
        }
    }
}

/// `M` is taken on the lattice `(1/8)ℤ`, strictly above the padded supremum.
const M_DENOMINATOR: i64 = 8;

fn round_up_strict(x: f64) -> BigRational {
    let n = (x * M_DENOMINATOR as f64).floor() as i64 + 1;
    ratio(n.max(M_DENOMINATOR + 1), M_DENOMINATOR)
}

/// Searches the `ε` ladder for the first `(ε, M)` that passes the audit.
pub fn estimate_eps_m(
    f: &WirtingerPolynomial,
    conn: &ConnectionSpec,
    j: usize,
    rect: &CompactRectangle,
    opts: &EstimateOptions,
) -> Result<AnalyticityEstimate, AnalyticityError> {
    if opts.safety_factor < BigRational::one() {
        return Err(AnalyticityError::BadSafetyFactor);
    }
    rect.validate()?;
    let hs = h_set(f, conn, j);
    let m_max = 1 + hs
        .iter()
        .filter_map(|h| h.total_degree())
        .max()
        .unwrap_or(0) as usize;
    // sups[m][h]
    let mut sups = vec![vec![0.0; hs.len()]; m_max + 1];
    for (m, row) in sups.iter_mut().enumerate() {
        for (slot, h) in row.iter_mut().zip(&hs) {
            *slot = derivative_sup(h, m, rect)?;
        }
    }
    let safety = to_f64(&opts.safety_factor);
    let mut epsilon = ratio(1, 2);
    for _ in 0..opts.ladder_len {
        let eps = to_f64(&epsilon);
        let raw = sups
            .iter()
            .enumerate()
            .flat_map(|(m, row)| {
                let w =
                    eps.powi(m as i32) / to_f64(&BigRational::from_integer(factorial(m).into()));
                row.iter().map(move |s| w * s)
            })
            .fold(0.0, f64::max);
        let m_bound = round_up_strict(safety * raw);
        let mut cert =
            AnalyticityEstimate::new(epsilon.clone(), m_bound, rect.clone(), hs.clone())?;
        if audit_certificate(&cert).passed {
            cert.audited = true;
            return Ok(cert);
        }
        epsilon /= ratio(2, 1);
    }
    Err(AnalyticityError::SearchExhausted)
}

/// `(m+1)! M ((1 + Mε)/ε)^m`.
pub fn chain_bound(m: usize, cert: &AnalyticityEstimate) -> f64 {
    let base = (BigRational::one() + &cert.m_bound * &cert.epsilon) / &cert.epsilon;
    let mut pow = BigRational::one();
    for _ in 0..m {
        pow *= &base;
    }
    to_f64(&(BigRational::from_integer(factorial(m + 1).into()) * &cert.m_bound * pow))
}

/// `(m+1) M 2^{-m}`.
pub fn scaled_bound(m: usize, cert: &AnalyticityEstimate) -> f64 {
    (m as f64 + 1.0) * cert.m_f64() * 0.5f64.powi(m as i32)
}

/// `δ^m / m!`.
pub fn delta_weight(m: usize, cert: &AnalyticityEstimate) -> f64 {
    let mut pow = BigRational::one();
    for _ in 0..m {
        pow *= &cert.delta;
    }
    to_f64(&(pow / BigRational::from_integer(factorial(m).into())))
}

fn within(value: f64, bound: f64) -> bool {
    value <= bound + BOUND_TOLERANCE * bound.abs()
}

/// Grid evaluation of section norms `h(φ, φ)^{1/2}`.
struct NormGrid {
    points: Vec<num_complex::Complex64>,
}

impl NormGrid {
    fn new(rect: &CompactRectangle) -> Self {
        Self {
            points: rect.points(),
        }
    }

    fn sup_many(&self, sections: &[FieldSection]) -> Vec<f64> {
        let max_exp = sections
            .iter()
            .flat_map(|s| s.coeffs().map(|(_, a)| a.to_numeric().max_exponent()))
            .max()
            .unwrap_or(0);
        let table = PowerTable::new(&self.points, max_exp);
        sections
            .par_iter()
            .map(|sec| {
                let numerics: Vec<_> = sec.coeffs().map(|(_, a)| a.to_numeric()).collect();
                (0..table.len())
                    .map(|i| {
                        numerics
                            .iter()
                            .map(|n| table.evaluate(n, i).norm_sqr())
                            .sum::<f64>()
                    })
                    .fold(0.0, f64::max)
                    .sqrt()
            })
            .collect()
    }

    fn sup(&self, section: &FieldSection) -> f64 {
        self.sup_many(std::slice::from_ref(section))[0]
    }
}

/// One row of the decay report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub m: usize,
    /// Max over sequences and grid of `h(∇…∇ fφ_j)^{1/2}`.
    pub sup_norm: f64,
    /// `δ^m/m!` times `sup_norm`.
    pub delta_scaled: f64,
    /// `(m+1) M 2^{-m}`.
    pub paper_bound: f64,
    pub pass: bool,
}

/// Rows `m = 0..=m_max`, each maximized over all `2^m` direction sequences.
pub fn decay_report(
    conn: &ConnectionSpec,
    j: usize,
    f: &WirtingerPolynomial,
    cert: &AnalyticityEstimate,
    m_max: usize,
) -> Vec<DecayRow> {
    let grid = NormGrid::new(&cert.rect);
    let mut level: Vec<FieldSection> = vec![FieldSection::single(j, f.clone())];
    let mut rows = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let sup_norm = grid.sup_many(&level).into_iter().fold(0.0, f64::max);
        let delta_scaled = delta_weight(m, cert) * sup_norm;
        let paper_bound = scaled_bound(m, cert);
        rows.push(DecayRow {
            m,
            sup_norm,
            delta_scaled,
            paper_bound,
            pass: within(delta_scaled, paper_bound),
        });
        if m < m_max {
            let next: HashSet<FieldSection> = level
                .par_iter()
                .flat_map_iter(|sec| Direction::ALL.map(|d| covariant_derivative(sec, d, conn)))
                .collect();
            let mut next: Vec<_> = next.into_iter().collect();
            next.sort_by_key(|s| s.support());
            level = next;
        }
    }
    rows
}

/// The `delta_scaled` column of [`decay_report`].
pub fn decay_profile(
    conn: &ConnectionSpec,
    j: usize,
    f: &WirtingerPolynomial,
    cert: &AnalyticityEstimate,
    m_max: usize,
) -> Vec<f64> {
    decay_report(conn, j, f, cert, m_max)
        .into_iter()
        .map(|r| r.delta_scaled)
        .collect()
}

/// Builds a length-`m_max` sequence one step at a time, always taking the
/// direction with the larger grid-sup norm (ties go to `D`), and reports the
/// row for every prefix.
pub fn greedy_worst_sequence(
    conn: &ConnectionSpec,
    j: usize,
    f: &WirtingerPolynomial,
    cert: &AnalyticityEstimate,
    m_max: usize,
) -> (Vec<Direction>, Vec<DecayRow>) {
    let grid = NormGrid::new(&cert.rect);
    let mut current = FieldSection::single(j, f.clone());
    let mut dirs = Vec::with_capacity(m_max);
    let mut rows = Vec::with_capacity(m_max + 1);
    let mut norm = grid.sup(&current);
    for m in 0..=m_max {
        let delta_scaled = delta_weight(m, cert) * norm;
        let paper_bound = scaled_bound(m, cert);
        rows.push(DecayRow {
            m,
            sup_norm: norm,
            delta_scaled,
            paper_bound,
            pass: within(delta_scaled, paper_bound),
        });
        if m == m_max {
            break;
        }
        let candidates = Direction::ALL.map(|d| covariant_derivative(&current, d, conn));
        let norms = grid.sup_many(&candidates);
        let pick = if norms[1] > norms[0] { 1 } else { 0 };
        dirs.push(Direction::ALL[pick]);
        norm = norms[pick];
        current = candidates[pick].clone();
    }
    (dirs, rows)
}

/// Both links of the bound chain for one direction sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundChainCheck {
    pub sup_norm: f64,
    pub chain_bound: f64,
    pub delta_scaled: f64,
    pub scaled_bound: f64,
    pub passed: bool,
}

pub fn bound_chain_check(
    conn: &ConnectionSpec,
    j: usize,
    f: &WirtingerPolynomial,
    cert: &AnalyticityEstimate,
    m: usize,
    dirs: &[Direction],
) -> Result<BoundChainCheck, AnalyticityError> {
    if dirs.len() != m {
        return Err(crate::error::ExpansionError::LengthMismatch {
            expected: m,
            got: dirs.len(),
        }
        .into());
    }
    let section = crate::field::iterated_covariant(&FieldSection::single(j, f.clone()), dirs, conn);
    let sup_norm = NormGrid::new(&cert.rect).sup(&section);
    let chain = chain_bound(m, cert);
    let delta_scaled = delta_weight(m, cert) * sup_norm;
    let scaled = scaled_bound(m, cert);
    Ok(BoundChainCheck {
        sup_norm,
        chain_bound: chain,
        delta_scaled,
        scaled_bound: scaled,
        passed: within(sup_norm, chain) && within(delta_scaled, scaled),
    })
}

pub fn verify_bound_chain(
    conn: &ConnectionSpec,
    j: usize,
    f: &WirtingerPolynomial,
    cert: &AnalyticityEstimate,
    m: usize,
    dirs: &[Direction],
) -> Result<bool, AnalyticityError> {
    Ok(bound_chain_check(conn, j, f, cert, m, dirs)?.passed)
}

/// `M^k / ε^{m+1-k} · (l_1 - 1)! ⋯ (l_k - 1)!` for the term type of `spl`.
pub fn term_type_bound(spl: &KSplitting, cert: &AnalyticityEstimate) -> f64 {
    let k = spl.k();
    let m = spl.m();
    let mut value = BigRational::from_integer(spl.term_type().factorial_weight().into());
    for _ in 0..k {
        value *= &cert.m_bound;
    }
    for _ in 0..(m + 1 - k) {
        value /= &cert.epsilon;
    }
    to_f64(&value)
}

/// Grid sup of one splitting term against its term-type bound.
pub fn verify_term_type_bound(
    spl: &KSplitting,
    dirs: &[Direction],
    conn: &ConnectionSpec,
    j: usize,
    f: &WirtingerPolynomial,
    cert: &AnalyticityEstimate,
) -> Result<bool, AnalyticityError> {
    let term = splitting_term(spl, dirs, conn, j, f)?;
    let sup = term.sup_norm_on_grid(&cert.rect)?;
    Ok(within(sup, term_type_bound(spl, cert)))
}
