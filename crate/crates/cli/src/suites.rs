//! The verification suites. Each returns a [`SuiteOutcome`]: a pass flag,
//! a one-line summary and the report artifacts, all assembled in a fixed
//! order so that identical configs give byte-identical reports.

use hfield::analyticity::{
    audit_certificate, bound_chain_check, decay_report, estimate_eps_m, greedy_worst_sequence,
    AnalyticityEstimate, DecayRow, EstimateOptions,
};
use hfield::expansion::Expander;
use hfield::field::{curvature_closed_form, curvature_eigenvalue};
use hfield::scalar::rational_to_wire;
use hfield::splitting::{
    brute_force_splittings, type1_bijection_in, type2_correspondence_in, SplittingTable,
};
use hfield::{ConnectionSpec, Direction, GaussianRational, SplittingType, WirtingerPolynomial};
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::report::{csv_text, json_text, Artifact, Formats};
use crate::ConfigError;

/// Computes the candidate `T^m` for one sweep cell. The suite compares it
/// against the step-by-step covariant derivative, so substituting a faulty
/// implementation here must make the suite fail.
pub type ExpansionFn = dyn Fn(&Expander, &[Direction], &ConnectionSpec, usize, &WirtingerPolynomial) -> WirtingerPolynomial
    + Sync;

pub fn standard_expansion(
    expander: &Expander,
    dirs: &[Direction],
    conn: &ConnectionSpec,
    j: usize,
    f: &WirtingerPolynomial,
) -> WirtingerPolynomial {
    expander.expansion(dirs, conn, j, f)
}

#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub artifacts: Vec<Artifact>,
}

// ---------------------------------------------------------------- identity

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCell {
    pub m: usize,
    pub dirs: String,
    pub j: usize,
    pub f: String,
    pub pass: bool,
}

#[derive(Serialize)]
struct IdentityReport<'a> {
    suite: &'static str,
    k: String,
    m_max: usize,
    total: usize,
    failed: usize,
    passed: bool,
    cells: &'a [IdentityCell],
}

/// Every `(m, sequence, j, f)` with `m ≤ m_identity` and all `2^m`
/// direction sequences.
pub fn verify_identity(cfg: &RunConfig, formats: Formats, expansion: &ExpansionFn) -> SuiteOutcome {
    let conn = &cfg.connection;
    let expander = Expander::new(cfg.m_identity);
    let mut jobs = Vec::new();
    for m in 0..=cfg.m_identity {
        for dirs in Direction::sequences(m) {
            for &j in &cfg.indices {
                for f in &cfg.functions {
                    jobs.push((dirs.clone(), j, f));
                }
            }
        }
    }
    let cells: Vec<IdentityCell> = jobs
        .par_iter()
        .map(|(dirs, j, f)| {
            let candidate = expansion(&expander, dirs, conn, *j, f);
            IdentityCell {
                m: dirs.len(),
                dirs: Direction::format_sequence(dirs),
                j: *j,
                f: f.to_string(),
                pass: hfield::expansion::identity_holds(&candidate, dirs, conn, *j, f),
            }
        })
        .collect();
    let failed = cells.iter().filter(|c| !c.pass).count();
    let report = IdentityReport {
        suite: "verify-identity",
        k: conn.k().to_string(),
        m_max: cfg.m_identity,
        total: cells.len(),
        failed,
        passed: failed == 0,
        cells: &cells,
    };
    let mut artifacts = Vec::new();
    if formats.json {
        artifacts.push(Artifact::new("identity.json", json_text(&report)));
    }
    if formats.csv {
        artifacts.push(Artifact::new("identity.csv", csv_text(&cells)));
    }
    SuiteOutcome {
        name: "verify-identity",
        passed: failed == 0,
        summary: format!(
            "{} cells, {} failed (m <= {})",
            cells.len(),
            failed,
            cfg.m_identity
        ),
        artifacts,
    }
}

// -------------------------------------------------------------- splittings

#[derive(Clone, Debug, Serialize)]
pub struct CountRow {
    pub m: usize,
    /// A block count, or `all` for the per-`m` aggregate.
    pub k: String,
    pub total: u64,
    /// Blank for `m = 0`, where the classification is undefined.
    pub type1: Option<u64>,
    pub type2: Option<u64>,
    pub recursion: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrespondenceCheck {
    pub kind: &'static str,
    pub m: usize,
    pub k: usize,
    pub pass: bool,
    pub detail: String,
}

#[derive(Serialize)]
struct SplittingReport<'a> {
    suite: &'static str,
    m_max: usize,
    passed: bool,
    rows: &'a [CountRow],
    checks: &'a [CorrespondenceCheck],
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

/// Largest `m` cross-checked against the brute-force labeling enumeration.
const BRUTE_FORCE_CAP: usize = 6;

pub fn splittings(cfg: &RunConfig, formats: Formats) -> SuiteOutcome {
    let cap = cfg.m_splittings;
    let table = SplittingTable::build(cap + 1);
    let count = |m: usize, k: usize| table.get(m, k).len() as u64;

    let mut rows = Vec::new();
    for m in 0..=cap {
        let mut all_ok = true;
        let (mut sum, mut sum1, mut sum2) = (0, 0, 0);
        for k in 1..=m + 1 {
            let total = count(m, k);
            let ok = if m == 0 {
                total == 1
            } else {
                total == count(m - 1, k - 1) + k as u64 * count(m - 1, k)
            };
            let (type1, type2) = if m == 0 {
                (None, None)
            } else {
                let t1 = table
                    .get(m, k)
                    .iter()
                    .filter(|s| s.classify() == Ok(SplittingType::Type1))
                    .count() as u64;
                (Some(t1), Some(total - t1))
            };
            all_ok &= ok;
            sum += total;
            sum1 += type1.unwrap_or(0);
            sum2 += type2.unwrap_or(0);
            rows.push(CountRow {
                m,
                k: k.to_string(),
                total,
                type1,
                type2,
                recursion: verdict(ok),
            });
        }
        let (type1, type2) = if m == 0 {
            (None, None)
        } else {
            (Some(sum1), Some(sum2))
        };
        rows.push(CountRow {
            m,
            k: "all".into(),
            total: sum,
            type1,
            type2,
            recursion: verdict(all_ok),
        });
    }

    let mut checks = Vec::new();
    for m in 0..cap {
        for k in 2..=m + 2 {
            let res = type1_bijection_in(&table, m, k);
            checks.push(CorrespondenceCheck {
                kind: "type1-bijection",
                m,
                k,
                pass: res.is_ok(),
                detail: match res {
                    Ok(pairs) => format!("{} pairs", pairs.len()),
                    Err(e) => e.to_string(),
                },
            });
        }
        for k in 1..=m + 1 {
            let res = type2_correspondence_in(&table, m, k);
            checks.push(CorrespondenceCheck {
                kind: "type2-cover",
                m,
                k,
                pass: res.is_ok(),
                detail: match res {
                    Ok(fibers) => format!("{} fibers of size {}", fibers.len(), k),
                    Err(e) => e.to_string(),
                },
            });
        }
    }
    for m in 0..=cap.min(BRUTE_FORCE_CAP) {
        for k in 1..=m + 1 {
            let mut brute = brute_force_splittings(m, k);
            let mut built = table.get(m, k).to_vec();
            brute.sort();
            built.sort();
            let ok = brute == built;
            checks.push(CorrespondenceCheck {
                kind: "brute-force",
                m,
                k,
                pass: ok,
                detail: format!("{} enumerated, {} built", brute.len(), built.len()),
            });
        }
    }

    let failed_rows = rows.iter().filter(|r| r.recursion != "pass").count();
    let failed_checks = checks.iter().filter(|c| !c.pass).count();
    let passed = failed_rows == 0 && failed_checks == 0;
    let mut artifacts = Vec::new();
    if formats.csv {
        artifacts.push(Artifact::new("splittings.csv", csv_text(&rows)));
    }
    if formats.json {
        let report = SplittingReport {
            suite: "splittings",
            m_max: cap,
            passed,
            rows: &rows,
            checks: &checks,
        };
        artifacts.push(Artifact::new("splittings.json", json_text(&report)));
    }
    SuiteOutcome {
        name: "splittings",
        passed,
        summary: format!(
            "m <= {cap}: {failed_rows} recursion failures, {failed_checks} of {} correspondence checks failed",
            checks.len()
        ),
        artifacts,
    }
}

// --------------------------------------------------------------- curvature

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumRow {
    pub j: usize,
    pub point_re: String,
    pub point_im: String,
    pub lambda: String,
    pub abs_value: f64,
    pub closed_form_match: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub point_re: String,
    pub point_im: String,
    pub laplacian: String,
    /// `|λ_j(s₀)|` strictly increasing in `j`; expected iff `Δg(s₀) ≠ 0`.
    pub growth: bool,
    /// `λ_j(s₀) = 0` for every `j`; expected iff `Δg(s₀) = 0`.
    pub all_zero: bool,
    pub consistent: bool,
}

#[derive(Serialize)]
struct CurvatureReport<'a> {
    suite: &'static str,
    g: String,
    laplacian: String,
    j_max: usize,
    passed: bool,
    spectrum: &'a [SpectrumRow],
    growth: &'a [GrowthRow],
}

/// Exact value of `p` at `z`, treating `s̄` as the conjugate of `z`.
pub fn evaluate_exact(p: &WirtingerPolynomial, z: &GaussianRational) -> GaussianRational {
    let zbar = z.conj();
    let pow = |base: &GaussianRational, n: u32| {
        (0..n).fold(GaussianRational::one(), |acc, _| &acc * base)
    };
    p.terms()
        .fold(GaussianRational::zero(), |acc, (&(a, b), c)| {
            &acc + &(&(c * &pow(z, a)) * &pow(&zbar, b))
        })
}

fn gaussian_text(z: &GaussianRational) -> String {
    if z.is_real() {
        rational_to_wire(z.re())
    } else {
        format!("{}+{}i", rational_to_wire(z.re()), rational_to_wire(z.im()))
    }
}

pub fn curvature(cfg: &RunConfig, formats: Formats) -> Result<SuiteOutcome, ConfigError> {
    let g = cfg.potential()?.clone();
    let points = cfg.curvature_points()?;
    let conn = &cfg.connection;
    let laplacian = g.laplacian();

    let eigen: Vec<(Option<WirtingerPolynomial>, bool)> = (0..=cfg.curvature.j_max)
        .into_par_iter()
        .map(|j| match curvature_eigenvalue(conn, j) {
            Ok(lambda) => {
                let matches = lambda == curvature_closed_form(conn, j);
                (Some(lambda), matches)
            }
            Err(_) => (None, false),
        })
        .collect();

    let mut spectrum = Vec::new();
    let mut growth = Vec::new();
    for z in &points {
        let (re, im) = (rational_to_wire(z.re()), rational_to_wire(z.im()));
        let values: Vec<Option<GaussianRational>> = eigen
            .iter()
            .map(|(l, _)| l.as_ref().map(|l| evaluate_exact(l, z)))
            .collect();
        for (j, ((lambda, matches), value)) in eigen.iter().zip(&values).enumerate() {
            spectrum.push(SpectrumRow {
                j,
                point_re: re.clone(),
                point_im: im.clone(),
                lambda: lambda
                    .as_ref()
                    .map_or_else(|| "error".into(), |l| l.to_string()),
                abs_value: value.as_ref().map_or(f64::NAN, |v| v.to_complex64().norm()),
                closed_form_match: *matches,
            });
        }
        let norms: Option<Vec<_>> = values
            .iter()
            .map(|v| v.as_ref().map(|v| v.norm_sqr()))
            .collect();
        let lap_value = evaluate_exact(&laplacian, z);
        let (increasing, all_zero) = match &norms {
            Some(n) => (
                n.windows(2).all(|w| w[0] < w[1]),
                n.iter().all(Zero::is_zero),
            ),
            None => (false, false),
        };
        let consistent = if lap_value.is_zero() {
            all_zero
        } else {
            increasing
        };
        growth.push(GrowthRow {
            point_re: re,
            point_im: im,
            laplacian: gaussian_text(&lap_value),
            growth: increasing,
            all_zero,
            consistent,
        });
    }

    let mismatches = eigen.iter().filter(|(_, ok)| !ok).count();
    let inconsistent = growth.iter().filter(|r| !r.consistent).count();
    let passed = mismatches == 0 && inconsistent == 0;
    let mut artifacts = Vec::new();
    if formats.csv {
        artifacts.push(Artifact::new("curvature.csv", csv_text(&spectrum)));
        artifacts.push(Artifact::new("curvature_growth.csv", csv_text(&growth)));
    }
    if formats.json {
        let report = CurvatureReport {
            suite: "curvature",
            g: g.to_string(),
            laplacian: laplacian.to_string(),
            j_max: cfg.curvature.j_max,
            passed,
            spectrum: &spectrum,
            growth: &growth,
        };
        artifacts.push(Artifact::new("curvature.json", json_text(&report)));
    }
    Ok(SuiteOutcome {
        name: "curvature",
        passed,
        summary: format!(
            "j <= {}: {mismatches} closed-form mismatches, {inconsistent} of {} points with inconsistent growth",
            cfg.curvature.j_max,
            points.len()
        ),
        artifacts,
    })
}

// ------------------------------------------------------------- analyticity

#[derive(Clone, Debug, Serialize)]
pub struct GreedyRow {
    pub m: usize,
    /// Direction taken to reach this order; blank at `m = 0`.
    pub step: String,
    pub sup_norm: f64,
    pub delta_scaled: f64,
    pub paper_bound: f64,
    pub pass: bool,
    pub chain_bound: f64,
    pub chain_pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateSummary {
    pub j: usize,
    pub f: String,
    pub epsilon: Option<String>,
    #[serde(rename = "M")]
    pub m_bound: Option<String>,
    pub delta: Option<String>,
    pub audited: bool,
    pub round_trip: bool,
    pub decay_pass: bool,
    pub greedy_pass: bool,
    pub chain_pass: bool,
    pub error: Option<String>,
}

impl CertificateSummary {
    pub fn passed(&self) -> bool {
        self.audited && self.round_trip && self.decay_pass && self.greedy_pass && self.chain_pass
    }
}

#[derive(Serialize)]
struct AnalyticitySummary<'a> {
    suite: &'static str,
    m_decay: usize,
    m_greedy: usize,
    passed: bool,
    certificates: &'a [CertificateSummary],
}

struct PairOutcome {
    summary: CertificateSummary,
    certificate: Option<AnalyticityEstimate>,
    decay: Vec<DecayRow>,
    greedy: Vec<GreedyRow>,
}

fn analyze_pair(
    cfg: &RunConfig,
    opts: &EstimateOptions,
    j: usize,
    f: &WirtingerPolynomial,
) -> PairOutcome {
    let conn = &cfg.connection;
    let mut summary = CertificateSummary {
        j,
        f: f.to_string(),
        epsilon: None,
        m_bound: None,
        delta: None,
        audited: false,
        round_trip: false,
        decay_pass: false,
        greedy_pass: false,
        chain_pass: false,
        error: None,
    };
    let cert = match estimate_eps_m(f, conn, j, &cfg.rect, opts) {
        Ok(c) => c,
        Err(e) => {
            summary.error = Some(e.to_string());
            return PairOutcome {
                summary,
                certificate: None,
                decay: Vec::new(),
                greedy: Vec::new(),
            };
        }
    };
    summary.epsilon = Some(rational_to_wire(&cert.epsilon));
    summary.m_bound = Some(rational_to_wire(&cert.m_bound));
    summary.delta = Some(rational_to_wire(&cert.delta));
    summary.audited = cert.audited;
    summary.round_trip = AnalyticityEstimate::from_json(&cert.to_json(), f, conn, j)
        .map(|back| {
            back == AnalyticityEstimate {
                audited: false,
                ..cert.clone()
            } && audit_certificate(&back).passed
        })
        .unwrap_or(false);

    let decay = decay_report(conn, j, f, &cert, cfg.m_decay);
    summary.decay_pass = decay.iter().all(|r| r.pass);

    let (dirs, rows) = greedy_worst_sequence(conn, j, f, &cert, cfg.m_greedy);
    let mut greedy = Vec::with_capacity(rows.len());
    for row in rows {
        let chain = bound_chain_check(conn, j, f, &cert, row.m, &dirs[..row.m]);
        let (chain_bound, chain_pass) = match chain {
            Ok(c) => (c.chain_bound, c.passed),
            Err(_) => (f64::NAN, false),
        };
        greedy.push(GreedyRow {
            m: row.m,
            step: if row.m == 0 {
                String::new()
            } else {
                dirs[row.m - 1].label().into()
            },
            sup_norm: row.sup_norm,
            delta_scaled: row.delta_scaled,
            paper_bound: row.paper_bound,
            pass: row.pass,
            chain_bound,
            chain_pass,
        });
    }
    summary.greedy_pass = greedy.iter().all(|r| r.pass);
    summary.chain_pass = greedy.iter().all(|r| r.chain_pass);
    PairOutcome {
        summary,
        certificate: Some(cert),
        decay,
        greedy,
    }
}

pub fn analyticity(cfg: &RunConfig, formats: Formats) -> Result<SuiteOutcome, ConfigError> {
    let opts = EstimateOptions {
        safety_factor: cfg.safety_factor()?,
        ..EstimateOptions::default()
    };
    let mut pairs = Vec::new();
    for &j in &cfg.indices {
        for (fi, f) in cfg.functions.iter().enumerate() {
            pairs.push((j, fi, f));
        }
    }
    let outcomes: Vec<PairOutcome> = pairs
        .par_iter()
        .map(|&(j, _, f)| analyze_pair(cfg, &opts, j, f))
        .collect();

    let mut artifacts = Vec::new();
    for (&(j, fi, _), out) in pairs.iter().zip(&outcomes) {
        let stem = format!("j{j}_f{fi}");
        if formats.json {
            if let Some(cert) = &out.certificate {
                artifacts.push(Artifact::new(
                    format!("certificate_{stem}.json"),
                    cert.to_json(),
                ));
            }
        }
        if formats.csv && out.certificate.is_some() {
            artifacts.push(Artifact::new(
                format!("decay_{stem}.csv"),
                csv_text(&out.decay),
            ));
            artifacts.push(Artifact::new(
                format!("greedy_{stem}.csv"),
                csv_text(&out.greedy),
            ));
        }
    }
    let summaries: Vec<CertificateSummary> = outcomes.into_iter().map(|o| o.summary).collect();
    let failed = summaries.iter().filter(|s| !s.passed()).count();
    let passed = failed == 0;
    if formats.json {
        let report = AnalyticitySummary {
            suite: "analyticity",
            m_decay: cfg.m_decay,
            m_greedy: cfg.m_greedy,
            passed,
            certificates: &summaries,
        };
        artifacts.push(Artifact::new("analyticity.json", json_text(&report)));
    }
    Ok(SuiteOutcome {
        name: "analyticity",
        passed,
        summary: format!(
            "{} (j, f) pairs, {failed} failed (decay m <= {}, greedy m <= {})",
            summaries.len(),
            cfg.m_decay,
            cfg.m_greedy
        ),
        artifacts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hfield::poly::mono;

    fn small() -> RunConfig {
        RunConfig::from_json(r#"{"m_identity": 3, "m_splittings": 4, "m_decay": 4, "m_greedy": 5}"#)
            .unwrap()
    }

    #[test]
    fn exact_evaluation_uses_conjugate() {
        let z = GaussianRational::from_integer(1) + GaussianRational::i();
        // s s̄ = |z|² = 2; s² = 2i
        assert_eq!(
            evaluate_exact(&mono(1, 1, 1), &z),
            GaussianRational::from_integer(2)
        );
        assert_eq!(
            evaluate_exact(&mono(1, 2, 0), &z),
            GaussianRational::i().scale_int(2)
        );
    }

    #[test]
    fn identity_suite_detects_a_sign_flip() {
        let cfg = small();
        assert!(verify_identity(&cfg, Formats::BOTH, &standard_expansion).passed);
        let flipped = |e: &Expander,
                       d: &[Direction],
                       c: &ConnectionSpec,
                       j: usize,
                       f: &WirtingerPolynomial| { -e.expansion(d, c, j, f) };
        assert!(!verify_identity(&cfg, Formats::BOTH, &flipped).passed);
    }

    #[test]
    fn splitting_rows_carry_totals() {
        let out = splittings(&small(), Formats::CSV);
        assert!(out.passed);
        let csv = &out.artifacts[0].contents;
        assert!(csv.starts_with("m,k,total,type1,type2,recursion\n0,1,1,,,pass\n"));
        assert!(csv.contains("\n2,all,5,"));
        assert!(csv.contains("\n3,all,15,"));
    }

    #[test]
    fn analyticity_suite_passes_on_defaults_at_small_caps() {
        let out = analyticity(&small(), Formats::BOTH).unwrap();
        assert!(out.passed, "{}", out.summary);
    }
}
