//! From guessing probabilities to security verdicts.
//!
//! Bob's guess of Alice's outcome succeeds with probability equal to the
//! AB CHSH value itself (he outputs `B xor a.b`). An eavesdropper is
//! summarized by a 2x2 [`EveProcedure`]: entry `(i, a)` is the chance her
//! side-channel guess matches Alice's outcome when she feeds her apparatus
//! `i` and Alice measured `a`. Whatever machinery produced those numbers,
//! one of two deterministic strategies turns the procedure into a CHSH game
//! with Alice whose value is at least `P_E/2 + 1/4`, where
//! `P_E = (P_00 + P_11)/2` is her average guessing probability. Chaining
//! that against a monogamy bound caps `P_E` at `2 f(beta_ab) - 1/2`, and
//! the protocol is secure exactly when Bob's probability stays strictly
//! ahead.

use crate::error::{Error, Result};
use crate::monogamy::{CriticalBeta, MonogamyFunction};
use serde::Serialize;

/// An eavesdropper's guessing table: `p(i, a)` is the probability her guess
/// equals Alice's outcome when her own input is `i` and Alice's setting is
/// `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveProcedure {
    p: [[f64; 2]; 2],
}

impl EveProcedure {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self> {
        for row in &p {
            for &entry in row {
                if !entry.is_finite() || !(0.0..=1.0).contains(&entry) {
                    return Err(Error::domain(format!(
                        "guessing probability {entry} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(EveProcedure { p })
    }

    pub fn p(&self, eve_input: u8, alice_setting: u8) -> f64 {
        self.p[eve_input as usize][alice_setting as usize]
    }

    pub fn table(&self) -> [[f64; 2]; 2] {
        self.p
    }

    /// Average probability of guessing Alice's key bit: the key is read off
    /// matching settings, so only the diagonal matters.
    pub fn eve_guess_prob(&self) -> f64 {
        0.5 * (self.p[0][0] + self.p[1][1])
    }
}

/// How the eavesdropper's reported outcome is derived from her raw guess in
/// the induced CHSH game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputRule {
    /// Report the guess unchanged (`E = G`).
    Copy,
    /// Report the guess XORed with her own game setting (`E = G xor e`).
    XorSetting,
}

/// A deterministic way for the eavesdropper to play the CHSH game against
/// Alice, derived from a procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EveStrategy {
    /// Which input she always feeds her apparatus.
    pub eve_input: u8,
    /// How her reported outcome is derived from the raw guess.
    pub rule: OutputRule,
    /// The CHSH value with Alice the strategy achieves.
    pub beta_ae: f64,
}

/// Picks the better of the two canonical strategies for a procedure: feed
/// input 0 and copy the guess (value `P_00/2 + 1/4`), or feed input 1 and
/// XOR with the game setting (value `P_11/2 + 1/4`). Ties go to the first.
pub fn strategy_from_procedure(proc: &EveProcedure) -> EveStrategy {
    let p00 = proc.p(0, 0);
    let p11 = proc.p(1, 1);
    if p00 >= p11 {
        EveStrategy {
            eve_input: 0,
            rule: OutputRule::Copy,
            beta_ae: 0.5 * p00 + 0.25,
        }
    } else {
        EveStrategy {
            eve_input: 1,
            rule: OutputRule::XorSetting,
            beta_ae: 0.5 * p11 + 0.25,
        }
    }
}

/// Bob guesses Alice's outcome as `B xor a.b`; his success probability is
/// the AB CHSH value itself, defined for `beta_ab` in `[1/2, 1]`.
pub fn bob_guess_prob(beta_ab: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&beta_ab) {
        return Err(Error::domain(format!(
            "AB CHSH value {beta_ab} outside [1/2, 1]"
        )));
    }
    Ok(beta_ab)
}

/// Any eavesdropper guessing Alice's key bit with probability `p_e` can be
/// turned into a CHSH game with Alice of value at least `p_e/2 + 1/4`.
pub fn eve_chsh_lower_bound(p_e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_e) {
        return Err(Error::domain(format!(
            "guessing probability {p_e} outside [0, 1]"
        )));
    }
    Ok(0.5 * p_e + 0.25)
}

/// The largest key-guessing probability a monogamy bound leaves open at a
/// certified AB CHSH value: inverting the strategy bound against
/// `f(beta_ab)` gives `2 f(beta_ab) - 1/2`, clamped into `[0, 1]`.
pub fn max_eve_prob(f: &MonogamyFunction, beta_ab: f64) -> Result<f64> {
    Ok((2.0 * f.eval(beta_ab)? - 0.5).clamp(0.0, 1.0))
}

/// The full comparison behind a security decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecurityVerdict {
    /// Bob's guessing probability (the AB CHSH value).
    pub p_b: f64,
    /// Cap on any eavesdropper's guessing probability under the bound.
    pub p_e_max: f64,
    /// `p_b - p_e_max`; the protocol distills key only when positive.
    pub margin: f64,
    /// `margin > 0`.
    pub secure: bool,
    /// Where the security region begins for this bound.
    pub critical_beta: CriticalBeta,
}

/// Decides security of the protocol at a certified AB CHSH value under a
/// monogamy bound: secure exactly when Bob's guessing probability strictly
/// exceeds the eavesdropper's cap.
pub fn secure(f: &MonogamyFunction, beta_ab: f64) -> Result<SecurityVerdict> {
    let p_b = bob_guess_prob(beta_ab)?;
    let p_e_max = max_eve_prob(f, beta_ab)?;
    let margin = p_b - p_e_max;
    Ok(SecurityVerdict {
        p_b,
        p_e_max,
        margin,
        secure: margin > 0.0,
        critical_beta: f.critical_beta()?,
    })
}

/// Binary entropy `-x log2 x - (1-x) log2 (1-x)`, with the `0 log 0 = 0`
/// convention at the endpoints.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("entropy argument {x} outside [0, 1]")));
    }
    let term = |t: f64| if t == 0.0 { 0.0 } else { -t * t.log2() };
    Ok(term(x) + term(1.0 - x))
}

/// One-way key-rate figure of merit `h(p_e) - h(p_b)` for guessing
/// probabilities in `[1/2, 1]`: positive whenever Bob's guess is cleaner
/// than the eavesdropper's cap.
pub fn key_rate_proxy(p_b: f64, p_e: f64) -> Result<f64> {
    for (label, v) in [("p_b", p_b), ("p_e", p_e)] {
        if !(0.5..=1.0).contains(&v) {
            return Err(Error::domain(format!(
                "{label} = {v} outside [1/2, 1]"
            )));
        }
    }
    Ok(binary_entropy(p_e)? - binary_entropy(p_b)?)
}
