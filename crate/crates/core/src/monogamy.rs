//! Trade-off bounds between a box's CHSH values with two different partners.
//!
//! Each bound is a non-increasing function `f` on CHSH values: when Alice
//! and Bob certify `beta_ab`, no eavesdropper sharing the same physics can
//! reach a CHSH value with Alice above `f(beta_ab)`. Three families are
//! supported: the no-signaling bound `3/2 - beta`, the quantum bound
//! `sqrt(1/8 - (beta - 1/2)^2) + 1/2` (defined up to the quantum maximum),
//! and a one-parameter `p`-norm family `((1 - (2 beta - 1)^p)^(1/p) + 1)/2`
//! that interpolates outward from the no-signaling case at `p = 1`.
//!
//! Security of the key-distribution protocol reduces to comparing `f`
//! against the line `beta/2 + 1/4`: wherever `f` sits below the line, the
//! eavesdropper's guessing probability trails Bob's. The crossing point is
//! the critical CHSH value computed by [`MonogamyFunction::critical_beta`].

use crate::boxes::{PartyPair, TripartiteBox, TSIRELSON_CHSH};
use crate::error::{Error, Result};
use crate::tolerance::PROB_TOL;
use serde::Serialize;

/// Bob's-guess line `beta/2 + 1/4`: a monogamy bound strictly below this
/// line at `beta` makes the protocol secure at that CHSH value.
pub fn sufficient_line(beta: f64) -> f64 {
    0.5 * beta + 0.25
}

fn check_beta_domain(beta: f64, hi: f64) -> Result<()> {
    if !(0.5..=hi).contains(&beta) {
        return Err(Error::domain(format!(
            "CHSH value {beta} outside the bound's domain [0.5, {hi}]"
        )));
    }
    Ok(())
}

/// No-signaling bound `3/2 - beta` on `[1/2, 1]`.
pub fn mono_ns(beta: f64) -> Result<f64> {
    check_beta_domain(beta, 1.0)?;
    Ok(1.5 - beta)
}

/// Quantum bound `sqrt(1/8 - (beta - 1/2)^2) + 1/2` on `[1/2, Tsirelson]`.
/// Values above the quantum maximum are a hard error: no quantum box
/// produces them, so the bound has nothing to say there.
pub fn mono_qm(beta: f64) -> Result<f64> {
    if beta > TSIRELSON_CHSH {
        return Err(Error::OutOfTheoryRange {
            beta,
            max: TSIRELSON_CHSH,
        });
    }
    check_beta_domain(beta, TSIRELSON_CHSH)?;
    let centered = beta - 0.5;
    Ok((0.125 - centered * centered).max(0.0).sqrt() + 0.5)
}

/// `p`-norm bound `((1 - (2 beta - 1)^p)^(1/p) + 1)/2` on `[1/2, 1]` for
/// exponent `p >= 1`. At `p = 1` this is exactly [`mono_ns`]; larger
/// exponents give strictly weaker (higher) bounds.
pub fn mono_p(p: f64, beta: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::domain(format!("norm exponent {p} must be >= 1")));
    }
    check_beta_domain(beta, 1.0)?;
    let u = 2.0 * beta - 1.0;
    Ok(0.5 * ((1.0 - u.powf(p)).max(0.0).powf(1.0 / p) + 1.0))
}

/// One monogamy bound family, selectable at run time. Parsed from and
/// printed as the selector grammar `"ns" | "qm" | "p:<exponent>"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonogamyFunction {
    NoSignaling,
    Quantum,
    PNorm(f64),
}

impl MonogamyFunction {
    /// The closed interval of CHSH values the bound is defined on.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            MonogamyFunction::Quantum => (0.5, TSIRELSON_CHSH),
            _ => (0.5, 1.0),
        }
    }

    /// Evaluates the bound. Inputs in `[0, 1/2)` are reflected through
    /// `beta -> 1 - beta` first (relabeling one party's outcome maps the two
    /// halves of the interval onto each other), so callers may pass any
    /// CHSH value a box can produce. Rounding spill just outside `[0, 1]`
    /// is absorbed.
    pub fn eval(&self, beta: f64) -> Result<f64> {
        if !beta.is_finite() {
            return Err(Error::domain("CHSH value is not finite".to_string()));
        }
        let beta = if beta > 1.0 && beta <= 1.0 + PROB_TOL {
            1.0
        } else if beta < 0.0 && beta >= -PROB_TOL {
            0.0
        } else {
            beta
        };
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::domain(format!("CHSH value {beta} outside [0, 1]")));
        }
        let beta = if beta < 0.5 { 1.0 - beta } else { beta };
        match self {
            MonogamyFunction::NoSignaling => mono_ns(beta),
            MonogamyFunction::Quantum => mono_qm(beta),
            MonogamyFunction::PNorm(p) => mono_p(*p, beta),
        }
    }

    /// How far the bound sits below Bob's-guess line at `beta`; positive
    /// means secure at that CHSH value.
    pub fn security_margin(&self, beta: f64) -> Result<f64> {
        Ok(sufficient_line(beta) - self.eval(beta)?)
    }

    /// Whether honest parties certifying `beta_honest` beat an eavesdropper
    /// who is only constrained by *this* bound — e.g. quantum users against
    /// a no-signaling adversary.
    pub fn cross_theory_secure(&self, beta_honest: f64) -> Result<bool> {
        Ok(self.security_margin(beta_honest)? > 0.0)
    }

    /// The CHSH value above which the protocol under this bound becomes
    /// secure: the root of `f(beta) = beta/2 + 1/4` on the bound's domain,
    /// found by bisection to width 1e-12.
    pub fn critical_beta(&self) -> Result<CriticalBeta> {
        let (lo, hi) = self.domain();
        let gap = |beta: f64| -> Result<f64> { Ok(self.eval(beta)? - sufficient_line(beta)) };
        critical_from_gap(lo, hi, gap)
    }
}

impl std::str::FromStr for MonogamyFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ns" => Ok(MonogamyFunction::NoSignaling),
            "qm" => Ok(MonogamyFunction::Quantum),
            _ => {
                let exponent = s
                    .strip_prefix("p:")
                    .and_then(|raw| raw.parse::<f64>().ok())
                    .filter(|p| p.is_finite() && *p >= 1.0)
                    .ok_or_else(|| Error::InvalidSelector(s.to_string()))?;
                Ok(MonogamyFunction::PNorm(exponent))
            }
        }
    }
}

impl std::fmt::Display for MonogamyFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MonogamyFunction::NoSignaling => f.write_str("ns"),
            MonogamyFunction::Quantum => f.write_str("qm"),
            MonogamyFunction::PNorm(p) => write!(f, "p:{p}"),
        }
    }
}

/// Where the bound crosses Bob's-guess line, if it does.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "beta")]
pub enum CriticalBeta {
    /// The crossing point: secure strictly above, insecure at or below.
    Value(f64),
    /// The bound sits below the line on its whole domain.
    SecureEverywhere,
    /// The bound sits above the line on its whole domain.
    NeverSecureInDomain,
}

/// Classifies the sign pattern of `gap = f - line` on `[lo, hi]` and
/// bisects for the root when the sign changes. The bounds used here are
/// non-increasing while the line increases, so `gap` is strictly decreasing
/// and a sign change pins down a unique root.
fn critical_from_gap(lo: f64, hi: f64, gap: impl Fn(f64) -> Result<f64>) -> Result<CriticalBeta> {
    const WIDTH: f64 = 1e-12;
    const MAX_ITER: u32 = 200;
    let glo = gap(lo)?;
    let ghi = gap(hi)?;
    if glo <= 0.0 && ghi <= 0.0 {
        return Ok(CriticalBeta::SecureEverywhere);
    }
    if glo > 0.0 && ghi > 0.0 {
        return Ok(CriticalBeta::NeverSecureInDomain);
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..MAX_ITER {
        if hi - lo <= WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CriticalBeta::Value(0.5 * (lo + hi)))
}

/// Outcome of checking one tripartite box against a monogamy bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonogamyReport {
    /// Worst-case AB CHSH value across the eavesdropper's settings.
    pub beta_ab: f64,
    /// Worst-case AE CHSH value across Bob's settings.
    pub beta_ae: f64,
    /// The bound evaluated at `beta_ab`.
    pub bound: f64,
    /// `bound - beta_ae`; negative means the box violates the bound.
    pub slack: f64,
    /// `beta_ae <= bound` up to the probability tolerance.
    pub satisfied: bool,
}

/// Evaluates a tripartite box against a bound, using the worst case over
/// the uninvolved party's setting for both pairs.
pub fn check_monogamy(tri: &TripartiteBox, f: &MonogamyFunction) -> Result<MonogamyReport> {
    let beta_ab = tri.chsh_worst_case(PartyPair::AB);
    let beta_ae = tri.chsh_worst_case(PartyPair::AE);
    let bound = f.eval(beta_ab)?;
    Ok(MonogamyReport {
        beta_ab,
        beta_ae,
        bound,
        slack: bound - beta_ae,
        satisfied: beta_ae <= bound + PROB_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{eve_example_box, white_noise_tripartite};
    use crate::tolerance::{CRITICAL_TOL, EXACT_TOL};

    #[test]
    fn no_signaling_critical_point_is_five_sixths() {
        let crit = MonogamyFunction::NoSignaling.critical_beta().unwrap();
        // Closed form: 3/2 - beta = beta/2 + 1/4 at beta = 5/6.
        match crit {
            CriticalBeta::Value(v) => assert!((v - 5.0 / 6.0).abs() <= CRITICAL_TOL),
            other => panic!("expected a crossing, got {other:?}"),
        }
    }

    #[test]
    fn quantum_critical_point_matches_closed_form() {
        // sqrt(1/8 - t^2) = t/2 has the root t = 1/sqrt(10), so the
        // crossing sits at 1/2 + 1/sqrt(10).
        let expect = 0.5 + 10.0f64.sqrt().recip();
        match MonogamyFunction::Quantum.critical_beta().unwrap() {
            CriticalBeta::Value(v) => assert!((v - expect).abs() <= CRITICAL_TOL),
            other => panic!("expected a crossing, got {other:?}"),
        }
    }

    #[test]
    fn p_norm_critical_point_matches_closed_form() {
        // Solving ((1 - u^p)^(1/p) + 1)/2 = u/4 + 1/2 for u = 2 beta - 1
        // gives u = (1 + 2^-p)^(-1/p).
        let p = 1.1;
        let u = (1.0 + 2.0f64.powf(-p)).powf(-1.0 / p);
        let expect = 0.5 * (1.0 + u);
        match MonogamyFunction::PNorm(p).critical_beta().unwrap() {
            CriticalBeta::Value(v) => {
                assert!((v - expect).abs() <= CRITICAL_TOL);
                assert!((v - 0.8530).abs() <= 5e-4);
                // The crossing sits a fraction of a percent below the
                // quantum maximum, squeezing the insecure window.
                let gap = (TSIRELSON_CHSH - v) / TSIRELSON_CHSH;
                assert!(gap >= 5e-4 && gap <= 9e-4, "relative gap {gap}");
            }
            other => panic!("expected a crossing, got {other:?}"),
        }
    }

    #[test]
    fn critical_points_sit_on_the_line() {
        for f in [
            MonogamyFunction::NoSignaling,
            MonogamyFunction::Quantum,
            MonogamyFunction::PNorm(1.1),
            MonogamyFunction::PNorm(3.0),
        ] {
            if let CriticalBeta::Value(v) = f.critical_beta().unwrap() {
                assert!(
                    (f.eval(v).unwrap() - sufficient_line(v)).abs() <= CRITICAL_TOL,
                    "crossing for {f} drifted off the line"
                );
            } else {
                panic!("every built-in bound crosses the line");
            }
        }
    }

    #[test]
    fn gap_classifier_reports_one_sided_curves() {
        // Exercised with synthetic gap curves since every built-in bound
        // crosses the line inside its domain.
        assert_eq!(
            critical_from_gap(0.5, 1.0, |_| Ok(-0.1)).unwrap(),
            CriticalBeta::SecureEverywhere
        );
        assert_eq!(
            critical_from_gap(0.5, 1.0, |_| Ok(0.1)).unwrap(),
            CriticalBeta::NeverSecureInDomain
        );
        match critical_from_gap(0.0, 1.0, |x| Ok(0.25 - x)).unwrap() {
            CriticalBeta::Value(v) => assert!((v - 0.25).abs() <= 1e-11),
            other => panic!("expected root, got {other:?}"),
        }
    }

    #[test]
    fn exponent_one_reproduces_the_no_signaling_bound() {
        let mut beta = 0.5;
        while beta <= 1.0 {
            assert!((mono_p(1.0, beta).unwrap() - mono_ns(beta).unwrap()).abs() <= EXACT_TOL);
            beta += 1e-3;
        }
    }

    #[test]
    fn bounds_are_ordered_and_non_increasing() {
        let fs = [
            MonogamyFunction::Quantum,
            MonogamyFunction::NoSignaling,
            MonogamyFunction::PNorm(1.1),
        ];
        let mut beta = 0.5f64;
        let mut prev = [f64::INFINITY; 3];
        while beta <= 1.0 + 1e-9 {
            let b = beta.min(1.0);
            for (k, f) in fs.iter().enumerate() {
                let (_, hi) = f.domain();
                if b > hi {
                    continue;
                }
                let v = f.eval(b).unwrap();
                assert!(v <= prev[k] + EXACT_TOL, "{f} increased at {b}");
                assert!((0.0..=1.0 + EXACT_TOL).contains(&v));
                prev[k] = v;
            }
            // Quantum <= no-signaling <= p-norm(1.1) wherever all defined.
            if b <= TSIRELSON_CHSH {
                let qm = mono_qm(b).unwrap();
                let ns = mono_ns(b).unwrap();
                assert!(qm <= ns + EXACT_TOL);
            }
            let ns = mono_ns(b).unwrap();
            let p11 = mono_p(1.1, b).unwrap();
            assert!(ns <= p11 + EXACT_TOL);
            beta += 1e-3;
        }
    }

    #[test]
    fn evaluation_reflects_the_lower_half_interval() {
        for f in [
            MonogamyFunction::NoSignaling,
            MonogamyFunction::Quantum,
            MonogamyFunction::PNorm(1.7),
        ] {
            // Reflection computes 1 - beta, which lands an ulp or two away
            // from the literal mirror point, so compare approximately.
            assert!((f.eval(0.3).unwrap() - f.eval(0.7).unwrap()).abs() <= 1e-15);
            assert!((f.eval(0.18).unwrap() - f.eval(0.82).unwrap()).abs() <= 1e-15);
        }
        // The reflection maps 0 onto the far end of the domain, so the
        // quantum bound still rejects it while the others accept it.
        assert_eq!(
            MonogamyFunction::NoSignaling.eval(0.0).unwrap(),
            MonogamyFunction::NoSignaling.eval(1.0).unwrap()
        );
        assert!(MonogamyFunction::Quantum.eval(0.0).is_err());
    }

    #[test]
    fn quantum_bound_rejects_super_quantum_values() {
        assert!(matches!(
            mono_qm(0.86),
            Err(Error::OutOfTheoryRange { .. })
        ));
        assert!(matches!(
            MonogamyFunction::Quantum.eval(0.86),
            Err(Error::OutOfTheoryRange { .. })
        ));
        // At the quantum maximum itself the bound bottoms out at 1/2. The
        // discriminant lands one ulp from zero and the square root
        // amplifies that to ~5e-9, so the tolerance is wider here.
        assert!((mono_qm(TSIRELSON_CHSH).unwrap() - 0.5).abs() <= 1e-8);
    }

    #[test]
    fn domain_errors_outside_the_unit_interval() {
        for f in [MonogamyFunction::NoSignaling, MonogamyFunction::Quantum] {
            assert!(f.eval(-0.1).is_err());
            assert!(f.eval(1.2).is_err());
            assert!(f.eval(f64::NAN).is_err());
        }
        assert!(mono_ns(0.4).is_err());
        assert!(mono_p(0.9, 0.8).is_err());
    }

    #[test]
    fn selector_grammar_round_trips() {
        for (text, expect) in [
            ("ns", MonogamyFunction::NoSignaling),
            ("qm", MonogamyFunction::Quantum),
            ("p:1.1", MonogamyFunction::PNorm(1.1)),
            ("p:2", MonogamyFunction::PNorm(2.0)),
        ] {
            let parsed: MonogamyFunction = text.parse().unwrap();
            assert_eq!(parsed, expect);
            let round: MonogamyFunction = parsed.to_string().parse().unwrap();
            assert_eq!(round, expect);
        }
        for bad in ["", "quantum", "p:", "p:0.9", "p:nan", "NS", "p:-2"] {
            assert!(matches!(
                bad.parse::<MonogamyFunction>(),
                Err(Error::InvalidSelector(_))
            ));
        }
    }

    #[test]
    fn cross_theory_verdicts_at_reference_points() {
        // Quantum users certifying the quantum maximum stay ahead of a
        // no-signaling eavesdropper.
        assert!(MonogamyFunction::NoSignaling
            .cross_theory_secure(TSIRELSON_CHSH)
            .unwrap());
        assert!(MonogamyFunction::Quantum.cross_theory_secure(5.0 / 6.0).unwrap());
        assert!(MonogamyFunction::PNorm(1.1)
            .cross_theory_secure(TSIRELSON_CHSH)
            .unwrap());
        // At the no-signaling crossing the margin is exactly zero, which is
        // not secure.
        assert!(!MonogamyFunction::NoSignaling
            .cross_theory_secure(5.0 / 6.0 - 1e-12)
            .unwrap());
        // sqrt amplifies the one-ulp discriminant at the quantum maximum to
        // ~5e-9, hence the wider tolerance.
        let margin = MonogamyFunction::Quantum
            .security_margin(TSIRELSON_CHSH)
            .unwrap();
        assert!((margin - (sufficient_line(TSIRELSON_CHSH) - 0.5)).abs() <= 1e-8);
    }

    #[test]
    fn monogamy_reports_on_reference_boxes() {
        let quiet = white_noise_tripartite();
        let report = check_monogamy(&quiet, &MonogamyFunction::NoSignaling).unwrap();
        assert!(report.satisfied);
        assert!((report.beta_ab - 0.5).abs() <= EXACT_TOL);
        assert!((report.bound - 1.0).abs() <= EXACT_TOL);
        assert!((report.slack - 0.5).abs() <= EXACT_TOL);

        // The eavesdropping family saturates the no-signaling bound exactly.
        for &p in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let t = eve_example_box(p, 0.25, 0.1).unwrap();
            let report = check_monogamy(&t, &MonogamyFunction::NoSignaling).unwrap();
            assert!(report.satisfied);
            assert!(report.slack.abs() <= EXACT_TOL);
        }

        // Against the tighter quantum bound the family overshoots at every
        // mixing weight except p = 1/2, where the straight trade-off line
        // is tangent to the quantum circle at (3/4, 3/4).
        let t = eve_example_box(0.25, 0.0, 0.0).unwrap();
        let report = check_monogamy(&t, &MonogamyFunction::Quantum).unwrap();
        assert!(!report.satisfied);
        assert!(report.slack < -0.04);

        let tangent = eve_example_box(0.5, 0.0, 0.0).unwrap();
        let report = check_monogamy(&tangent, &MonogamyFunction::Quantum).unwrap();
        assert!(report.satisfied);
        assert!(report.slack.abs() <= 1e-9);
    }
}
