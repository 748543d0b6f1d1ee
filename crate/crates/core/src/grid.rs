//! Axis-aligned compact rectangles in the `s`-plane and their sample grids.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::GridError;
use crate::poly::NumericPolynomial;
use crate::scalar::{rational_from_wire, rational_to_wire};

/// `[re_min, re_max] × [im_min, im_max]` sampled on a `grid_n × grid_n` lattice
/// that includes all four corners.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "RectangleWire", try_from = "RectangleWire")]
pub struct CompactRectangle {
    re_min: BigRational,
    re_max: BigRational,
    im_min: BigRational,
    im_max: BigRational,
    grid_n: usize,
}

impl CompactRectangle {
    pub fn new(
        re_min: BigRational,
        re_max: BigRational,
        im_min: BigRational,
        im_max: BigRational,
        grid_n: usize,
    ) -> Result<Self, GridError> {
        let rect = Self {
            re_min,
            re_max,
            im_min,
            im_max,
            grid_n,
        };
        rect.validate()?;
        Ok(rect)
    }

    pub fn from_ints(
        re_min: i64,
        re_max: i64,
        im_min: i64,
        im_max: i64,
        grid_n: usize,
    ) -> Result<Self, GridError> {
        let q = |v: i64| BigRational::from_integer(BigInt::from(v));
        Self::new(q(re_min), q(re_max), q(im_min), q(im_max), grid_n)
    }

    /// `[-half, half]²`.
    pub fn symmetric_square(half: i64, grid_n: usize) -> Result<Self, GridError> {
        Self::from_ints(-half, half, -half, half, grid_n)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.re_min > self.re_max || self.im_min > self.im_max {
            return Err(GridError::InvalidCompactSet("empty rectangle".into()));
        }
        if self.grid_n < 2 {
            return Err(GridError::InvalidCompactSet(format!(
                "grid resolution {} below 2",
                self.grid_n
            )));
        }
        Ok(())
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    pub fn with_grid(&self, grid_n: usize) -> Result<Self, GridError> {
        Self::new(
            self.re_min.clone(),
            self.re_max.clone(),
            self.im_min.clone(),
            self.im_max.clone(),
            grid_n,
        )
    }

    pub fn bounds(&self) -> [&BigRational; 4] {
        [&self.re_min, &self.re_max, &self.im_min, &self.im_max]
    }

    fn axis(lo: &BigRational, hi: &BigRational, n: usize) -> Vec<f64> {
        // Exact lattice coordinates, rounded once.
        let steps = BigInt::from(n - 1);
        (0..n)
            .map(|i| {
                let t = BigRational::new(BigInt::from(i), steps.clone());
                (lo + (hi - lo) * t).to_f64().unwrap_or(f64::NAN)
            })
            .collect()
    }

    /// Row-major lattice points; corners included.
    pub fn points(&self) -> Vec<Complex64> {
        let xs = Self::axis(&self.re_min, &self.re_max, self.grid_n);
        let ys = Self::axis(&self.im_min, &self.im_max, self.grid_n);
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| Complex64::new(x, y)))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct RectangleWire {
    re_min: String,
    re_max: String,
    im_min: String,
    im_max: String,
    grid_n: usize,
}

impl From<CompactRectangle> for RectangleWire {
    fn from(r: CompactRectangle) -> Self {
        RectangleWire {
            re_min: rational_to_wire(&r.re_min),
            re_max: rational_to_wire(&r.re_max),
            im_min: rational_to_wire(&r.im_min),
            im_max: rational_to_wire(&r.im_max),
            grid_n: r.grid_n,
        }
    }
}

impl TryFrom<RectangleWire> for CompactRectangle {
    type Error = String;
    fn try_from(w: RectangleWire) -> Result<Self, String> {
        let q = |t: &str| rational_from_wire(t).map_err(|e| e.to_string());
        CompactRectangle::new(
            q(&w.re_min)?,
            q(&w.re_max)?,
            q(&w.im_min)?,
            q(&w.im_max)?,
            w.grid_n,
        )
        .map_err(|e| e.to_string())
    }
}

/// Grid points with cached powers `s^p`, `s̄^q`, for evaluating many
/// polynomials on the same lattice.
pub struct PowerTable {
    s_pow: Vec<Vec<Complex64>>,
    sbar_pow: Vec<Vec<Complex64>>,
    max_exp: usize,
}

impl PowerTable {
    pub fn new(points: &[Complex64], max_exp: usize) -> Self {
        let table = |z: Complex64| {
            let mut v = Vec::with_capacity(max_exp + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..=max_exp {
                v.push(acc);
                acc *= z;
            }
            v
        };
        Self {
            s_pow: points.iter().map(|&z| table(z)).collect(),
            sbar_pow: points.iter().map(|&z| table(z.conj())).collect(),
            max_exp,
        }
    }

    pub fn max_exp(&self) -> usize {
        self.max_exp
    }

    pub fn len(&self) -> usize {
        self.s_pow.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_pow.is_empty()
    }

    /// Value of `poly` at point `idx`. Panics if the polynomial's exponents
    /// exceed the table.
    pub fn evaluate(&self, poly: &NumericPolynomial, idx: usize) -> Complex64 {
        poly.evaluate_with_powers(&self.s_pow[idx], &self.sbar_pow[idx])
    }

    /// `max_idx |poly(s_idx)|`.
    pub fn sup_abs(&self, poly: &NumericPolynomial) -> f64 {
        if poly.is_zero() {
            return 0.0;
        }
        (0..self.len())
            .map(|i| self.evaluate(poly, i).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_contains_corners() {
        let r = CompactRectangle::symmetric_square(1, 64).unwrap();
        let pts = r.points();
        assert_eq!(pts.len(), 64 * 64);
        for corner in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
            assert!(pts.contains(&Complex64::new(corner.0, corner.1)));
        }
    }

    #[test]
    fn invalid_rectangles_rejected() {
        assert!(CompactRectangle::from_ints(0, -1, 0, 1, 4).is_err());
        assert!(CompactRectangle::from_ints(0, 1, 2, 1, 4).is_err());
        assert!(CompactRectangle::from_ints(0, 1, 0, 1, 1).is_err());
        // A degenerate segment is still compact.
        assert!(CompactRectangle::from_ints(0, 0, -1, 1, 3).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let r = CompactRectangle::from_ints(0, 1, -2, 3, 7).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(
            text,
            r#"{"re_min":"0/1","re_max":"1/1","im_min":"-2/1","im_max":"3/1","grid_n":7}"#
        );
        let back: CompactRectangle = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        let bad = r#"{"re_min":"2","re_max":"1","im_min":"0","im_max":"1","grid_n":7}"#;
        assert!(serde_json::from_str::<CompactRectangle>(bad).is_err());
    }

    #[test]
    fn power_table_matches_direct_evaluation() {
        use crate::poly::mono;
        let p = &(&mono(3, 2, 1) + &mono(-1, 0, 3)) + &mono(2, 0, 0);
        let pts = CompactRectangle::symmetric_square(2, 5).unwrap().points();
        let table = PowerTable::new(&pts, 3);
        let numeric = p.to_numeric();
        for (i, &z) in pts.iter().enumerate() {
            assert!((table.evaluate(&numeric, i) - p.evaluate(z)).norm() < 1e-12);
        }
    }
}
