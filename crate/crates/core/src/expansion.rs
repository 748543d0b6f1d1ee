//! Closed-form expansion of iterated covariant derivatives of `f φ_j` as a
//! sum over k-splittings, and the checks tying it to the step-by-step
//! recursion.
//!
//! For directions `η_1, …, η_m` (with `η_i = dirs[i-1]`) and
//! `a_i = a(η_i)` the connection coefficient at index `j`,
//!
//! ```text
//! T^m = Σ_{k=1}^{m+1} Σ_{k-splittings} (η_{I_1} a_{i_1}) ⋯ (η_{I_{k-1}} a_{i_{k-1}}) η_{I_k} f
//! ```
//!
//! and `∇_{η_m} ⋯ ∇_{η_1}(f φ_j) = T^m φ_j`.

use std::collections::HashMap;

use crate::error::ExpansionError;
use crate::field::{iterated_covariant, ConnectionSpec, FieldSection};
use crate::poly::{Direction, WirtingerPolynomial};
use crate::splitting::{KSplitting, SplittingTable, SplittingType};

fn check_len(expected: usize, dirs: &[Direction]) -> Result<(), ExpansionError> {
    if dirs.len() != expected {
        return Err(ExpansionError::LengthMismatch {
            expected,
            got: dirs.len(),
        });
    }
    Ok(())
}

/// Applies `η_I` for a decreasingly sorted index block: the largest index is
/// outermost, so the smallest is applied first.
fn apply_block(
    block: &[usize],
    dirs: &[Direction],
    arg: &WirtingerPolynomial,
) -> WirtingerPolynomial {
    block
        .iter()
        .rev()
        .fold(arg.clone(), |acc, &i| acc.derivative(dirs[i - 1]))
}

/// One summand `(η_{I_1} a_{i_1}) ⋯ (η_{I_{k-1}} a_{i_{k-1}}) η_{I_k} f`.
pub fn splitting_term(
    spl: &KSplitting,
    dirs: &[Direction],
    conn: &ConnectionSpec,
    j: usize,
    f: &WirtingerPolynomial,
) -> Result<WirtingerPolynomial, ExpansionError> {
    check_len(spl.m(), dirs)?;
    let k = spl.k();
    let mut acc = apply_block(&spl.blocks()[k - 1], dirs, f);
    for (block, &marker) in spl.blocks().iter().zip(spl.markers()) {
        if acc.is_zero() {
            break;
        }
        let a = conn.coefficient(j, dirs[marker - 1]);
        acc = &acc * &apply_block(block, dirs, &a);
    }
    Ok(acc)
}

/// Identifies a factor `η_I a_i` (`base = Some(dir of i)`) or `η_I f`
/// (`base = None`) by the derivative directions in application order.
type FactorKey = (Option<Direction>, Vec<Direction>);

/// Evaluates sums of splitting terms, memoizing factors and merging
/// splittings whose factor multisets coincide.
pub struct Expander {
    table: SplittingTable,
}

impl Expander {
    pub fn new(m_max: usize) -> Self {
        Self {
            table: SplittingTable::build(m_max),
        }
    }

    pub fn table(&self) -> &SplittingTable {
        &self.table
    }

    fn ensure(&self, m: usize) -> Option<SplittingTable> {
        (m > self.table.m_max()).then(|| SplittingTable::build(m))
    }

    /// `Σ splitting_term` over `spls`, all splittings of `dirs.len()`.
    fn sum_terms<'a, I>(
        spls: I,
        dirs: &[Direction],
        conn: &ConnectionSpec,
        j: usize,
        f: &WirtingerPolynomial,
    ) -> WirtingerPolynomial
    where
        I: IntoIterator<Item = &'a KSplitting>,
    {
        let key_of = |base: Option<Direction>, block: &[usize]| -> FactorKey {
            (base, block.iter().rev().map(|&i| dirs[i - 1]).collect())
        };
        let mut groups: HashMap<Vec<FactorKey>, i64> = HashMap::new();
        for spl in spls {
            let k = spl.k();
            let mut keys: Vec<FactorKey> = spl
                .blocks()
                .iter()
                .zip(spl.markers())
                .map(|(block, &marker)| key_of(Some(dirs[marker - 1]), block))
                .collect();
            keys.push(key_of(None, &spl.blocks()[k - 1]));
            keys.sort();
            *groups.entry(keys).or_insert(0) += 1;
        }

        let mut factors: HashMap<FactorKey, WirtingerPolynomial> = HashMap::new();
        let mut factor = |key: &FactorKey| -> WirtingerPolynomial {
            factors
                .entry(key.clone())
                .or_insert_with(|| {
                    let base = match key.0 {
                        Some(d) => conn.coefficient(j, d),
                        None => f.clone(),
                    };
                    base.derivatives(&key.1)
                })
                .clone()
        };

        let mut ordered: Vec<_> = groups.into_iter().collect();
        ordered.sort();
        let mut total = WirtingerPolynomial::zero();
        for (keys, multiplicity) in ordered {
            let mut prod = WirtingerPolynomial::one();
            for key in &keys {
                prod = &prod * &factor(key);
                if prod.is_zero() {
                    break;
                }
            }
            if !prod.is_zero() {
                total = &total + &prod.scale_int(multiplicity);
            }
        }
        total
    }

    /// `T^m` for `m = dirs.len()`.
    pub fn expansion(
        &self,
        dirs: &[Direction],
        conn: &ConnectionSpec,
        j: usize,
        f: &WirtingerPolynomial,
    ) -> WirtingerPolynomial {
        let m = dirs.len();
        let extra = self.ensure(m);
        let table = extra.as_ref().unwrap_or(&self.table);
        Self::sum_terms(table.all(m), dirs, conn, j, f)
    }

    /// `(S_1, S_2)` for `m = dirs.len() ≥ 1`: the sums over type-1 and type-2
    /// splittings of `m`.
    pub fn type_sums(
        &self,
        dirs: &[Direction],
        conn: &ConnectionSpec,
        j: usize,
        f: &WirtingerPolynomial,
    ) -> (WirtingerPolynomial, WirtingerPolynomial) {
        let m = dirs.len();
        assert!(m >= 1, "type sums need a nonempty direction sequence");
        let extra = self.ensure(m);
        let table = extra.as_ref().unwrap_or(&self.table);
        let of_type = |t: SplittingType| {
            let spls = table.all(m).filter(move |s| s.classify() == Ok(t));
            Self::sum_terms(spls, dirs, conn, j, f)
        };
        (of_type(SplittingType::Type1), of_type(SplittingType::Type2))
    }
}

/// `T^m`, the sum of [`splitting_term`] over every splitting of `m`.
pub fn expansion_t(
    m: usize,
    dirs: &[Direction],
    conn: &ConnectionSpec,
    j: usize,
    f: &WirtingerPolynomial,
) -> Result<WirtingerPolynomial, ExpansionError> {
    check_len(m, dirs)?;
    Ok(Expander::new(m).expansion(dirs, conn, j, f))
}

/// `∇_{η_m} ⋯ ∇_{η_1}(f φ_j) == T^m φ_j`, exactly.
pub fn verify_identity(
    m: usize,
    dirs: &[Direction],
    conn: &ConnectionSpec,
    j: usize,
    f: &WirtingerPolynomial,
) -> Result<bool, ExpansionError> {
    let t = expansion_t(m, dirs, conn, j, f)?;
    Ok(identity_holds(&t, dirs, conn, j, f))
}

/// Compares a candidate `T^m` against the step-by-step covariant derivative.
pub fn identity_holds(
    candidate: &WirtingerPolynomial,
    dirs: &[Direction],
    conn: &ConnectionSpec,
    j: usize,
    f: &WirtingerPolynomial,
) -> bool {
    let direct = iterated_covariant(&FieldSection::single(j, f.clone()), dirs, conn);
    direct == FieldSection::single(j, candidate.clone())
}

/// Outcome of comparing the type sums of `m + 1` against `T^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursionReport {
    /// `S_1^{m+1} = a_{m+1} T^m`
    pub type1_matches: bool,
    /// `S_2^{m+1} = η_{m+1} T^m`
    pub type2_matches: bool,
    /// `T^{m+1} = S_1^{m+1} + S_2^{m+1}`
    pub split_matches: bool,
}

impl RecursionReport {
    pub fn passed(&self) -> bool {
        self.type1_matches && self.type2_matches && self.split_matches
    }
}

pub fn recursion_report(
    m: usize,
    dirs: &[Direction],
    conn: &ConnectionSpec,
    j: usize,
    f: &WirtingerPolynomial,
) -> Result<RecursionReport, ExpansionError> {
    check_len(m + 1, dirs)?;
    let expander = Expander::new(m + 1);
    let t_m = expander.expansion(&dirs[..m], conn, j, f);
    let t_next = expander.expansion(dirs, conn, j, f);
    let (s1, s2) = expander.type_sums(dirs, conn, j, f);
    let last = dirs[m];
    Ok(RecursionReport {
        type1_matches: s1 == &conn.coefficient(j, last) * &t_m,
        type2_matches: s2 == t_m.derivative(last),
        split_matches: t_next == &s1 + &s2,
    })
}

pub fn recursion_check_s1_s2(
    m: usize,
    dirs: &[Direction],
    conn: &ConnectionSpec,
    j: usize,
    f: &WirtingerPolynomial,
) -> Result<bool, ExpansionError> {
    Ok(recursion_report(m, dirs, conn, j, f)?.passed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::mono;
    use crate::splitting::enumerate_splittings;
    use Direction::{Dbar, D};

    fn sbar_conn() -> ConnectionSpec {
        ConnectionSpec::from_k(WirtingerPolynomial::sbar())
    }

    #[test]
    fn splitting_term_examples() {
        let f = mono(3, 2, 1);
        assert_eq!(
            splitting_term(&KSplitting::empty(), &[], &sbar_conn(), 0, &f).unwrap(),
            f
        );
        let marker = KSplitting::new(1, vec![vec![], vec![]], vec![1]).unwrap();
        assert_eq!(
            splitting_term(&marker, &[D], &sbar_conn(), 0, &WirtingerPolynomial::one()).unwrap(),
            WirtingerPolynomial::sbar()
        );
        let block = KSplitting::new(1, vec![vec![1]], vec![]).unwrap();
        assert_eq!(
            splitting_term(&block, &[D], &sbar_conn(), 0, &mono(1, 1, 1)).unwrap(),
            WirtingerPolynomial::sbar()
        );
        assert_eq!(
            splitting_term(&block, &[D, D], &sbar_conn(), 0, &f),
            Err(ExpansionError::LengthMismatch {
                expected: 1,
                got: 2
            })
        );
    }

    #[test]
    fn grouped_sum_matches_plain_sum() {
        let conn = ConnectionSpec::from_k(mono(1, 1, 2));
        let f = &mono(1, 1, 1) + &mono(2, 0, 1);
        let expander = Expander::new(5);
        for dirs in Direction::sequences(5) {
            let plain = (1..=6)
                .flat_map(|k| enumerate_splittings(5, k))
                .map(|s| splitting_term(&s, &dirs, &conn, 2, &f).unwrap())
                .fold(WirtingerPolynomial::zero(), |a, b| &a + &b);
            assert_eq!(expander.expansion(&dirs, &conn, 2, &f), plain);
        }
    }

    #[test]
    fn low_order_expansions() {
        let f = &mono(1, 2, 1) + &mono(-1, 0, 1);
        let conn = sbar_conn();
        assert_eq!(expansion_t(0, &[], &conn, 3, &f).unwrap(), f);
        for d in [D, Dbar] {
            let want = &f.derivative(d) + &(&conn.coefficient(3, d) * &f);
            assert_eq!(expansion_t(1, &[d], &conn, 3, &f).unwrap(), want);
        }
        assert!(expansion_t(2, &[D], &conn, 0, &f).is_err());
    }

    #[test]
    fn identity_small_cases() {
        assert!(verify_identity(0, &[], &sbar_conn(), 0, &mono(5, 1, 0)).unwrap());
        for d in [D, Dbar] {
            assert!(
                verify_identity(1, &[d], &sbar_conn(), 0, &WirtingerPolynomial::one()).unwrap()
            );
        }
        assert!(
            verify_identity(2, &[D, Dbar], &sbar_conn(), 1, &WirtingerPolynomial::s()).unwrap()
        );
        let direct = iterated_covariant(
            &FieldSection::single(1, WirtingerPolynomial::s()),
            &[D, Dbar],
            &sbar_conn(),
        );
        assert_eq!(
            FieldSection::single(
                1,
                expansion_t(2, &[D, Dbar], &sbar_conn(), 1, &WirtingerPolynomial::s()).unwrap()
            ),
            direct
        );
    }

    #[test]
    fn corrupted_candidate_is_rejected() {
        let conn = sbar_conn();
        let f = WirtingerPolynomial::s();
        let t = expansion_t(3, &[D, Dbar, D], &conn, 1, &f).unwrap();
        assert!(identity_holds(&t, &[D, Dbar, D], &conn, 1, &f));
        assert!(!identity_holds(&-&t, &[D, Dbar, D], &conn, 1, &f));
    }

    #[test]
    fn recursion_examples() {
        let f = mono(1, 1, 1);
        let r = recursion_report(0, &[D], &sbar_conn(), 0, &f).unwrap();
        assert!(r.passed());
        assert!(recursion_check_s1_s2(
            2,
            &[D, Dbar, D],
            &sbar_conn(),
            2,
            &WirtingerPolynomial::s()
        )
        .unwrap());
        assert!(recursion_check_s1_s2(1, &[D], &sbar_conn(), 2, &f).is_err());
    }

    #[test]
    fn flat_connection_has_no_type1_contribution() {
        let expander = Expander::new(4);
        let f = &mono(1, 3, 1) + &mono(2, 0, 2);
        for dirs in Direction::sequences(4) {
            let (s1, s2) = expander.type_sums(&dirs, &ConnectionSpec::flat(), 3, &f);
            assert!(s1.is_zero());
            let t_prev = expander.expansion(&dirs[..3], &ConnectionSpec::flat(), 3, &f);
            assert_eq!(s2, t_prev.derivative(dirs[3]));
            assert_eq!(
                expander.expansion(&dirs, &ConnectionSpec::flat(), 3, &f),
                f.derivatives(&dirs)
            );
        }
    }
}
