//! Monte Carlo simulation of the key-distribution protocol.
//!
//! Alice and Bob share `rounds` copies of a bipartite box. Each round they
//! pick settings uniformly at random and record outcomes. A random subset
//! of rounds (per-round Bernoulli draw) is announced and used to estimate
//! the CHSH value; Alice's outcomes on the remaining rounds form the raw
//! key, which Bob decodes as `B xor (a and b)`. The empirical estimate is
//! then compared against the adversary's monogamy-derived guessing cap.
//!
//! # Reproducibility
//!
//! Every round owns an independent ChaCha8 stream: the generator is seeded
//! with `seed` and its stream index set to the round number. Within a
//! round the draw order is fixed — estimation flag, Alice's setting, Bob's
//! setting, one uniform variate for the outcome pair, and (only when an
//! attack is simulated, only on key rounds) one uniform variate for the
//! eavesdropper's guess. Statistics are aggregated as integer counters, so
//! reports are byte-identical regardless of how rounds are partitioned
//! across threads, and the base statistics do not shift when an attack is
//! bolted on.

use crate::boxes::BipartiteBox;
use crate::error::{Error, Result};
use crate::monogamy::MonogamyFunction;
use crate::security::{key_rate_proxy, secure, EveProcedure, SecurityVerdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Step used when searching for the strongest admissible eavesdropper
/// procedure during an attack simulation; fine enough that the grid error
/// is invisible next to Monte Carlo noise.
const ATTACK_SEARCH_STEP: f64 = 1e-4;

/// Full description of one simulation: the shared device, how long the
/// protocol runs, how much of it is sacrificed for estimation, the RNG
/// seed, and which theory constrains the eavesdropper.
#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub source: BipartiteBox,
    pub rounds: u64,
    pub estimation_fraction: f64,
    pub seed: u64,
    pub adversary: MonogamyFunction,
}

impl ProtocolConfig {
    /// Rejects configurations too small to estimate anything: at least 100
    /// rounds, a fraction strictly inside (0, 1), and an expected
    /// estimation subset of at least 30 rounds.
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 100 {
            return Err(Error::domain(format!(
                "rounds = {} but at least 100 are required",
                self.rounds
            )));
        }
        if !(self.estimation_fraction > 0.0 && self.estimation_fraction < 1.0) {
            return Err(Error::domain(format!(
                "estimation fraction {} outside (0, 1)",
                self.estimation_fraction
            )));
        }
        let expected = self.rounds as f64 * self.estimation_fraction;
        if expected < 30.0 {
            return Err(Error::domain(format!(
                "expected estimation rounds {expected:.1} < 30; raise rounds or the fraction"
            )));
        }
        Ok(())
    }
}

/// One protocol round: both settings, both outcomes, and whether the round
/// was sacrificed for estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub setting_a: u8,
    pub setting_b: u8,
    pub outcome_a: u8,
    pub outcome_b: u8,
    pub is_estimation: bool,
}

impl RoundRecord {
    /// Whether the outcomes win the CHSH game at these settings.
    pub fn chsh_win(&self) -> bool {
        self.outcome_a ^ self.outcome_b == self.setting_a & self.setting_b
    }
}

/// Draws one round from the box: settings uniform and independent, the
/// outcome pair from the box's conditional distribution at those settings.
/// The estimation flag is left `false`; the protocol driver owns it.
pub fn sample_round<R: Rng + ?Sized>(source: &BipartiteBox, rng: &mut R) -> RoundRecord {
    let a = rng.gen::<bool>() as u8;
    let b = rng.gen::<bool>() as u8;
    let u = rng.gen::<f64>();
    let table = source.table();
    let base = (a as usize) * 8 + (b as usize) * 4;
    let mut acc = 0.0;
    let mut chosen = None;
    let mut last_support = 0;
    for k in 0..4 {
        let p = table[base + k];
        if p > 0.0 {
            last_support = k;
        }
        acc += p;
        if u < acc {
            chosen = Some(k);
            break;
        }
    }
    // If rounding left the block summing a hair under 1 and u landed in the
    // gap, fall back to the last outcome the box actually supports.
    let k = chosen.unwrap_or(last_support);
    RoundRecord {
        setting_a: a,
        setting_b: b,
        outcome_a: (k >> 1) as u8,
        outcome_b: (k & 1) as u8,
        is_estimation: false,
    }
}

/// What the eavesdropper achieved in an attack simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    /// The guess matrix `p(i, a)` the attack used.
    pub procedure: [[f64; 2]; 2],
    /// That procedure's guessing probability, `(p(0,0) + p(1,1)) / 2`.
    pub p_e_procedure: f64,
    /// Number of key rounds attacked.
    pub attacked_rounds: u64,
    /// Empirical fraction of key rounds where the guess was right.
    pub eve_hat: f64,
    /// Binomial standard error of `eve_hat`.
    pub eve_stderr: f64,
}

/// Everything a simulation reports. `p_e_bound`, `verdict`, and
/// `key_rate_proxy` are absent when the estimated CHSH value falls outside
/// the adversary's theory (`out_of_range` is then set instead of aborting:
/// finite samples are allowed to fluctuate past a theory's edge).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub beta_hat: f64,
    pub beta_stderr: f64,
    pub estimation_rounds: u64,
    pub key_bits: u64,
    pub p_b_hat: f64,
    pub p_e_bound: Option<f64>,
    pub verdict: Option<SecurityVerdict>,
    pub out_of_range: bool,
    pub key_rate_proxy: Option<f64>,
    pub attack: Option<AttackReport>,
}

fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

#[derive(Default, Clone, Copy)]
struct Tally {
    estimation: u64,
    estimation_wins: u64,
    key: u64,
    key_decoded: u64,
    eve_correct: u64,
}

impl Tally {
    fn merge(self, other: Tally) -> Tally {
        Tally {
            estimation: self.estimation + other.estimation,
            estimation_wins: self.estimation_wins + other.estimation_wins,
            key: self.key + other.key,
            key_decoded: self.key_decoded + other.key_decoded,
            eve_correct: self.eve_correct + other.eve_correct,
        }
    }
}

fn run(cfg: &ProtocolConfig, attack: Option<&EveProcedure>) -> Result<SimulationReport> {
    cfg.validate()?;
    let tally = (0..cfg.rounds)
        .into_par_iter()
        .map(|round| {
            let mut rng = round_rng(cfg.seed, round);
            let is_estimation = rng.gen_bool(cfg.estimation_fraction);
            let mut rec = sample_round(&cfg.source, &mut rng);
            rec.is_estimation = is_estimation;
            let mut t = Tally::default();
            if is_estimation {
                t.estimation = 1;
                t.estimation_wins = u64::from(rec.chsh_win());
            } else {
                t.key = 1;
                // Bob decodes Alice's bit as B xor ab; he is right exactly
                // when the round wins the CHSH game.
                t.key_decoded = u64::from(rec.chsh_win());
                if let Some(proc) = attack {
                    let a = rec.setting_a;
                    t.eve_correct = u64::from(rng.gen::<f64>() < proc.p(a, a));
                }
            }
            t
        })
        .reduce(Tally::default, Tally::merge);

    if tally.estimation == 0 || tally.key == 0 {
        return Err(Error::domain(
            "sampled zero estimation or zero key rounds; raise rounds".to_string(),
        ));
    }

    let n_est = tally.estimation as f64;
    let beta_hat = tally.estimation_wins as f64 / n_est;
    let beta_stderr = (beta_hat * (1.0 - beta_hat) / n_est).sqrt();
    let p_b_hat = tally.key_decoded as f64 / tally.key as f64;

    let verdict = secure(&cfg.adversary, beta_hat).ok();
    let p_e_bound = verdict.as_ref().map(|v| v.p_e_max);
    let out_of_range = verdict.is_none();
    let rate = p_e_bound.and_then(|cap| key_rate_proxy(p_b_hat, cap).ok());

    let attack_report = attack.map(|proc| {
        let n = tally.key as f64;
        let eve_hat = tally.eve_correct as f64 / n;
        AttackReport {
            procedure: proc.table(),
            p_e_procedure: proc.eve_guess_prob(),
            attacked_rounds: tally.key,
            eve_hat,
            eve_stderr: (eve_hat * (1.0 - eve_hat) / n).sqrt(),
        }
    });

    Ok(SimulationReport {
        beta_hat,
        beta_stderr,
        estimation_rounds: tally.estimation,
        key_bits: tally.key,
        p_b_hat,
        p_e_bound,
        verdict,
        out_of_range,
        key_rate_proxy: rate,
        attack: attack_report,
    })
}

/// Runs the protocol without an eavesdropper and reports the estimates
/// alongside the monogamy verdict at the estimated CHSH value.
pub fn run_protocol(cfg: &ProtocolConfig) -> Result<SimulationReport> {
    run(cfg, None)
}

/// Runs the protocol with the strongest eavesdropper procedure the
/// adversary theory admits at the source's true CHSH value. On each key
/// round the guess is right with probability `p(a, a)` — the eavesdropper
/// always feeds her device Alice's announced setting. Estimation rounds
/// and key statistics are drawn exactly as in [`run_protocol`].
pub fn simulate_attack(cfg: &ProtocolConfig) -> Result<SimulationReport> {
    let mut beta_source = cfg.source.chsh();
    // A source built to sit exactly on the adversary's domain edge can
    // measure a few ulps past it; absorb that rounding spill rather than
    // refusing the attack.
    let (_, hi) = cfg.adversary.domain();
    if beta_source > hi && beta_source <= hi + crate::tolerance::PROB_TOL {
        beta_source = hi;
    }
    let (procedure, _) = crate::attack_opt::best_procedure_under_monogamy(
        &cfg.adversary,
        beta_source,
        ATTACK_SEARCH_STEP,
    )?;
    run(cfg, Some(&procedure))
}

/// Regenerates the full per-round record stream for a configuration,
/// byte-for-byte the rounds that [`run_protocol`] aggregates.
pub fn round_records(cfg: &ProtocolConfig) -> Result<Vec<RoundRecord>> {
    cfg.validate()?;
    Ok((0..cfg.rounds)
        .into_par_iter()
        .map(|round| {
            let mut rng = round_rng(cfg.seed, round);
            let is_estimation = rng.gen_bool(cfg.estimation_fraction);
            let mut rec = sample_round(&cfg.source, &mut rng);
            rec.is_estimation = is_estimation;
            rec
        })
        .collect())
}
