//! Independent oracles for the eavesdropper's reach.
//!
//! The monogamy bounds in [`crate::monogamy`] are closed-form claims. This
//! module re-derives the no-signaling one numerically: a linear program
//! maximizes the AE CHSH value over the full tripartite no-signaling
//! polytope subject to a floor on the AB value, which certifies that
//! `3/2 - beta` is not just valid but tight. A brute-force walk over
//! deterministic strategies pins the classical CHSH bound the same way,
//! and a grid search over eavesdropper procedures cross-checks the
//! closed-form guessing cap from [`crate::security`].

use crate::boxes::TripartiteBox;
use crate::error::{Error, Result};
use crate::monogamy::MonogamyFunction;
use crate::security::EveProcedure;
use crate::simplex::{maximize, LpOutcome, StandardForm};
use crate::tolerance::LP_TOL;
use rayon::prelude::*;

/// Number of entries in a tripartite table; LP variables 0..64 are the
/// entries, variable 64 is the surplus on the AB floor constraint.
const VARS: usize = 65;

/// A solved trade-off query: the largest AE CHSH value compatible with the
/// constraints, and a box that attains it.
#[derive(Debug, Clone)]
pub struct LpResult {
    pub optimum: f64,
    pub argmax: TripartiteBox,
}

fn entry(a: usize, b: usize, e: usize, oa: usize, ob: usize, oe: usize) -> usize {
    a * 32 + b * 16 + e * 8 + oa * 4 + ob * 2 + oe
}

/// CHSH functional for the AB pair (eavesdropper setting pinned to 0) as a
/// coefficient vector over the 64 table entries.
fn chsh_ab_coefficients() -> Vec<f64> {
    let mut c = vec![0.0; VARS];
    for a in 0..2 {
        for b in 0..2 {
            for oa in 0..2 {
                for ob in 0..2 {
                    if oa ^ ob == a & b {
                        for oe in 0..2 {
                            c[entry(a, b, 0, oa, ob, oe)] += 0.25;
                        }
                    }
                }
            }
        }
    }
    c
}

/// CHSH functional for the AE pair (Bob's setting pinned to 0).
fn chsh_ae_coefficients() -> Vec<f64> {
    let mut c = vec![0.0; VARS];
    for a in 0..2 {
        for e in 0..2 {
            for oa in 0..2 {
                for oe in 0..2 {
                    if oa ^ oe == a & e {
                        for ob in 0..2 {
                            c[entry(a, 0, e, oa, ob, oe)] += 0.25;
                        }
                    }
                }
            }
        }
    }
    c
}

/// Assembles the equality system cutting out the no-signaling polytope with
/// an AB CHSH floor: normalization per settings block, marginal consistency
/// for every pair across the third party's setting and for every single
/// party across the other two (the latter rows are implied by the former
/// but harmless — the solver tolerates redundancy), and
/// `chsh_ab - surplus = b`.
fn no_signaling_program(b: f64) -> StandardForm {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();

    // Normalization of each settings block.
    for a in 0..2 {
        for bb in 0..2 {
            for e in 0..2 {
                let mut row = vec![0.0; VARS];
                for o in 0..8 {
                    row[entry(a, bb, e, o >> 2 & 1, o >> 1 & 1, o & 1)] = 1.0;
                }
                rows.push(row);
                rhs.push(1.0);
            }
        }
    }

    // Pairwise marginals must not depend on the remaining party's setting.
    // AB marginal across e:
    for a in 0..2 {
        for bb in 0..2 {
            for oa in 0..2 {
                for ob in 0..2 {
                    let mut row = vec![0.0; VARS];
                    for oe in 0..2 {
                        row[entry(a, bb, 0, oa, ob, oe)] += 1.0;
                        row[entry(a, bb, 1, oa, ob, oe)] -= 1.0;
                    }
                    rows.push(row);
                    rhs.push(0.0);
                }
            }
        }
    }
    // AE marginal across b:
    for a in 0..2 {
        for e in 0..2 {
            for oa in 0..2 {
                for oe in 0..2 {
                    let mut row = vec![0.0; VARS];
                    for ob in 0..2 {
                        row[entry(a, 0, e, oa, ob, oe)] += 1.0;
                        row[entry(a, 1, e, oa, ob, oe)] -= 1.0;
                    }
                    rows.push(row);
                    rhs.push(0.0);
                }
            }
        }
    }
    // BE marginal across a:
    for bb in 0..2 {
        for e in 0..2 {
            for ob in 0..2 {
                for oe in 0..2 {
                    let mut row = vec![0.0; VARS];
                    for oa in 0..2 {
                        row[entry(0, bb, e, oa, ob, oe)] += 1.0;
                        row[entry(1, bb, e, oa, ob, oe)] -= 1.0;
                    }
                    rows.push(row);
                    rhs.push(0.0);
                }
            }
        }
    }

    // Single-party marginals must not depend on either other setting.
    // Alice's, against the (b, e) = (0, 0) reference:
    for a in 0..2 {
        for oa in 0..2 {
            for (rb, re) in [(0, 1), (1, 0), (1, 1)] {
                let mut row = vec![0.0; VARS];
                for ob in 0..2 {
                    for oe in 0..2 {
                        row[entry(a, 0, 0, oa, ob, oe)] += 1.0;
                        row[entry(a, rb, re, oa, ob, oe)] -= 1.0;
                    }
                }
                rows.push(row);
                rhs.push(0.0);
            }
        }
    }
    // Bob's:
    for bb in 0..2 {
        for ob in 0..2 {
            for (ra, re) in [(0, 1), (1, 0), (1, 1)] {
                let mut row = vec![0.0; VARS];
                for oa in 0..2 {
                    for oe in 0..2 {
                        row[entry(0, bb, 0, oa, ob, oe)] += 1.0;
                        row[entry(ra, bb, re, oa, ob, oe)] -= 1.0;
                    }
                }
                rows.push(row);
                rhs.push(0.0);
            }
        }
    }
    // The eavesdropper's:
    for e in 0..2 {
        for oe in 0..2 {
            for (ra, rb) in [(0, 1), (1, 0), (1, 1)] {
                let mut row = vec![0.0; VARS];
                for oa in 0..2 {
                    for ob in 0..2 {
                        row[entry(0, 0, e, oa, ob, oe)] += 1.0;
                        row[entry(ra, rb, e, oa, ob, oe)] -= 1.0;
                    }
                }
                rows.push(row);
                rhs.push(0.0);
            }
        }
    }

    // AB CHSH floor: chsh_ab(x) - surplus = b. The floor form (rather than
    // equality) keeps the program feasible for every b in [1/2, 1] and
    // reaches the same frontier because the trade-off is non-increasing.
    let mut floor = chsh_ab_coefficients();
    floor[VARS - 1] = -1.0;
    rows.push(floor);
    rhs.push(b);

    StandardForm {
        n: VARS,
        rows,
        rhs,
        objective: chsh_ae_coefficients(),
    }
}

/// The largest AE CHSH value any no-signaling tripartite box can reach
/// while its AB pair certifies at least `b`, solved as a linear program
/// over the 64 table entries.
pub fn max_chsh_ae_given_ab(b: f64) -> Result<LpResult> {
    if !(0.5..=1.0).contains(&b) {
        return Err(Error::domain(format!(
            "AB CHSH floor {b} outside [1/2, 1]"
        )));
    }
    let program = no_signaling_program(b);
    match maximize(&program) {
        LpOutcome::Optimal { value, solution } => {
            // Basic solutions carry rounding dust; scrub it below the box
            // constructor's tolerance before rebuilding the table.
            let mut table = [0.0; 64];
            for (slot, &x) in table.iter_mut().zip(&solution[..64]) {
                *slot = x.max(0.0);
            }
            for block in table.chunks_mut(8) {
                let sum: f64 = block.iter().sum();
                if sum > 0.0 {
                    for v in block.iter_mut() {
                        *v /= sum;
                    }
                }
            }
            Ok(LpResult {
                optimum: value,
                argmax: TripartiteBox::from_table(table)?,
            })
        }
        LpOutcome::Infeasible => Err(Error::Infeasible),
        LpOutcome::Unbounded => Err(Error::Unbounded),
    }
}

/// One row of the trade-off certification table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightnessRow {
    /// The AB CHSH floor handed to the solver.
    pub b: f64,
    /// What the solver found.
    pub lp_optimum: f64,
    /// The closed-form trade-off `3/2 - b`.
    pub analytic_bound: f64,
    /// `|lp_optimum - analytic_bound|`.
    pub abs_error: f64,
    /// Whether the row agrees within the LP tolerance.
    pub pass: bool,
}

/// Sweeps the Bell-violating range `[3/4, 1]` of AB floors and compares
/// the solver against the closed-form no-signaling trade-off on every grid
/// point. Solves run in parallel; rows come back in grid order.
pub fn verify_ns_monogamy_tightness(grid_step: f64) -> Result<Vec<TightnessRow>> {
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(Error::domain(format!(
            "grid step {grid_step} outside (0, 0.1]"
        )));
    }
    let mut floors = Vec::new();
    let mut k = 0u32;
    loop {
        let b = 0.75 + f64::from(k) * grid_step;
        if b > 1.0 + grid_step * 0.5 {
            break;
        }
        floors.push(b.min(1.0));
        k += 1;
    }
    floors
        .par_iter()
        .map(|&b| {
            let lp = max_chsh_ae_given_ab(b)?;
            let analytic = 1.5 - b;
            let abs_error = (lp.optimum - analytic).abs();
            Ok(TightnessRow {
                b,
                lp_optimum: lp.optimum,
                analytic_bound: analytic,
                abs_error,
                pass: abs_error < LP_TOL,
            })
        })
        .collect()
}

/// Enumerates all 16 deterministic bipartite strategies (each party's
/// outcome an arbitrary function of its own setting) and returns the best
/// CHSH value along with how many strategies attain it.
pub fn brute_force_classical_bound() -> (f64, usize) {
    let outcome = |rule: usize, setting: usize| -> usize {
        // The four unary boolean functions, encoded as (constant, slope).
        (rule & 1) ^ ((rule >> 1) & setting)
    };
    let mut best = 0.0f64;
    let mut count = 0usize;
    for rule_a in 0..4 {
        for rule_b in 0..4 {
            let mut wins = 0;
            for x in 0..2 {
                for y in 0..2 {
                    if outcome(rule_a, x) ^ outcome(rule_b, y) == x & y {
                        wins += 1;
                    }
                }
            }
            let beta = f64::from(wins) / 4.0;
            if beta > best + 1e-15 {
                best = beta;
                count = 1;
            } else if (beta - best).abs() <= 1e-15 {
                count += 1;
            }
        }
    }
    (best, count)
}

/// Grid search for the strongest eavesdropper procedure a monogamy bound
/// admits at a certified AB value. Procedures are scanned over the
/// symmetric diagonal `p(0,0) = p(1,1) = t` (the off-diagonal entries never
/// enter the key-guessing rate and are left at coin-flip level); a grid
/// point is admissible when the strategy it induces stays within
/// `f(beta_ab)`. Returns the procedure and its guessing probability.
pub fn best_procedure_under_monogamy(
    f: &MonogamyFunction,
    beta_ab: f64,
    search_step: f64,
) -> Result<(EveProcedure, f64)> {
    if !(search_step > 0.0 && search_step <= 0.1) {
        return Err(Error::domain(format!(
            "search step {search_step} outside (0, 0.1]"
        )));
    }
    let bound = f.eval(beta_ab)?;
    let mut best = None;
    let mut k = 0u64;
    loop {
        let t = (k as f64 * search_step).min(1.0);
        let induced_beta_ae = 0.5 * t + 0.25;
        if induced_beta_ae <= bound + crate::tolerance::EXACT_TOL {
            best = Some(t);
        }
        if t >= 1.0 {
            break;
        }
        k += 1;
    }
    let t = best.ok_or_else(|| {
        Error::domain(format!(
            "no admissible procedure: even a blind guess exceeds the bound {bound}"
        ))
    })?;
    let procedure = EveProcedure::new([[t, 0.5], [0.5, t]])?;
    let p_e = procedure.eve_guess_prob();
    Ok((procedure, p_e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{eve_example_box, PartyPair};
    use crate::security::max_eve_prob;
    use crate::tolerance::EXACT_TOL;

    #[test]
    fn frontier_reference_points() {
        // A perfectly correlated AB pair forces the eavesdropper down to
        // coin-flip correlations.
        let r = max_chsh_ae_given_ab(1.0).unwrap();
        assert!((r.optimum - 0.5).abs() <= LP_TOL);
        // Partway up the violating range the trade-off is linear.
        let r = max_chsh_ae_given_ab(0.9).unwrap();
        assert!((r.optimum - 0.6).abs() <= LP_TOL);
        let r = max_chsh_ae_given_ab(5.0 / 6.0).unwrap();
        assert!((r.optimum - 2.0 / 3.0).abs() <= LP_TOL);
        // At the classical boundary both pairs can sit at 3/4 at once
        // (two independent deterministic boxes), meeting the line 3/2 - b.
        let r = max_chsh_ae_given_ab(0.75).unwrap();
        assert!((r.optimum - 0.75).abs() <= LP_TOL);
    }

    #[test]
    fn frontier_is_linear_across_the_whole_domain() {
        // The mixture family witnesses 3/2 - b everywhere on [1/2, 1]:
        // eve_example_box(2b - 1, 0, 0) is no-signaling with AB value
        // exactly b and AE value exactly 3/2 - b, so the solver must not
        // come back below the line — and the bound says it cannot exceed it.
        for &b in &[0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0] {
            let witness = eve_example_box(2.0 * b - 1.0, 0.0, 0.0).unwrap();
            assert!((witness.chsh(PartyPair::AB) - b).abs() <= EXACT_TOL);
            assert!((witness.chsh(PartyPair::AE) - (1.5 - b)).abs() <= EXACT_TOL);
            assert!(witness.signaling_deficit() <= 1e-9);
            let r = max_chsh_ae_given_ab(b).unwrap();
            assert!(
                (r.optimum - (1.5 - b)).abs() <= LP_TOL,
                "frontier off the line at b = {b}: {}",
                r.optimum
            );
        }
    }

    #[test]
    fn argmax_is_a_valid_box_attaining_the_optimum() {
        for &b in &[0.75, 0.8, 0.9, 1.0] {
            let r = max_chsh_ae_given_ab(b).unwrap();
            assert!(r.argmax.signaling_deficit() <= LP_TOL);
            assert!((r.argmax.chsh(PartyPair::AE) - r.optimum).abs() <= LP_TOL);
            assert!(r.argmax.chsh(PartyPair::AB) >= b - LP_TOL);
        }
    }

    #[test]
    fn frontier_is_concave_and_non_increasing_on_the_violating_range() {
        let rows = verify_ns_monogamy_tightness(0.05).unwrap();
        assert_eq!(rows.len(), 6);
        for w in rows.windows(2) {
            assert!(w[1].lp_optimum <= w[0].lp_optimum + LP_TOL);
        }
        for w in rows.windows(3) {
            let mid = 0.5 * (w[0].lp_optimum + w[2].lp_optimum);
            assert!(w[1].lp_optimum >= mid - LP_TOL);
        }
        assert!(rows.iter().all(|r| r.pass), "{rows:?}");
    }

    #[test]
    fn tightness_grid_rejects_bad_steps() {
        assert!(verify_ns_monogamy_tightness(0.0).is_err());
        assert!(verify_ns_monogamy_tightness(0.2).is_err());
        assert!(max_chsh_ae_given_ab(0.4).is_err());
        assert!(max_chsh_ae_given_ab(1.01).is_err());
    }

    #[test]
    fn classical_bound_by_enumeration() {
        let (best, count) = brute_force_classical_bound();
        assert_eq!(best, 0.75);
        assert_eq!(count, 8);
    }

    #[test]
    fn procedure_search_recovers_the_closed_form_cap() {
        let ns = MonogamyFunction::NoSignaling;
        for &beta in &[0.75, 5.0 / 6.0, 0.85, 0.9, 0.95, 1.0] {
            let (proc, p_e) = best_procedure_under_monogamy(&ns, beta, 1e-4).unwrap();
            let closed = max_eve_prob(&ns, beta).unwrap();
            assert!(
                (p_e - closed).abs() <= 1e-4 + EXACT_TOL,
                "grid {p_e} vs closed form {closed} at beta {beta}"
            );
            assert!((proc.eve_guess_prob() - p_e).abs() <= EXACT_TOL);
        }
        // Below the crossing the cap clamps at certainty and the grid tops
        // out at t = 1.
        let (_, p_e) = best_procedure_under_monogamy(&ns, 0.6, 1e-3).unwrap();
        assert!((p_e - 1.0).abs() <= EXACT_TOL);

        let qm = MonogamyFunction::Quantum;
        let (_, p_e) = best_procedure_under_monogamy(&qm, 0.8162277660, 1e-4).unwrap();
        assert!((p_e - max_eve_prob(&qm, 0.8162277660).unwrap()).abs() <= 1e-4 + EXACT_TOL);

        assert!(best_procedure_under_monogamy(&ns, 0.9, 0.0).is_err());
        assert!(best_procedure_under_monogamy(&ns, 0.9, 0.5).is_err());
    }
}
