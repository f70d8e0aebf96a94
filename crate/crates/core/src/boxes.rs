//! Conditional-probability boxes with binary settings and binary outcomes.
//!
//! A box is a table `P(outcomes | settings)`. Two shapes appear here: the
//! two-party [`BipartiteBox`] (16 entries) and the three-party
//! [`TripartiteBox`] (64 entries) used when an eavesdropper holds the third
//! system. Tables are stored flat, settings-major then outcomes-minor, so
//! the bipartite entry `P(X, Y | x, y)` lives at `x*8 + y*4 + X*2 + Y` and
//! the tripartite entry `P(A, B, E | a, b, e)` at
//! `a*32 + b*16 + e*8 + A*4 + B*2 + E`.
//!
//! The CHSH value used throughout is the game form
//! `beta = 1/4 * sum_{x,y} P(X xor Y = x.y | x, y)`, so the classical bound
//! is 3/4, the quantum maximum is `(1 + 1/sqrt(2))/2`, and the algebraic
//! maximum is 1.

use crate::error::{Error, Result};
use crate::tolerance::{NEGATIVITY_FLOOR, PROB_TOL};
use serde::{Deserialize, Serialize};

/// Largest CHSH value reachable with shared randomness alone.
pub const CLASSICAL_CHSH: f64 = 0.75;

/// Largest CHSH value reachable by measuring quantum states
/// (`(1 + 1/sqrt(2)) / 2`).
pub const TSIRELSON_CHSH: f64 = 0.5 * (1.0 + std::f64::consts::FRAC_1_SQRT_2);

/// One party of a box. Bipartite boxes have parties `A` and `B`; tripartite
/// boxes add the eavesdropper `E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    A,
    B,
    E,
}

/// An ordered pair of parties in a tripartite box. The first party takes the
/// row role in the pair's CHSH value, the second the column role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartyPair {
    AB,
    AE,
    BE,
}

impl PartyPair {
    pub fn parties(self) -> (Party, Party) {
        match self {
            PartyPair::AB => (Party::A, Party::B),
            PartyPair::AE => (Party::A, Party::E),
            PartyPair::BE => (Party::B, Party::E),
        }
    }

    /// The party left out of the pair.
    pub fn third(self) -> Party {
        match self {
            PartyPair::AB => Party::E,
            PartyPair::AE => Party::B,
            PartyPair::BE => Party::A,
        }
    }
}

impl std::str::FromStr for PartyPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ab" => Ok(PartyPair::AB),
            "ae" => Ok(PartyPair::AE),
            "be" => Ok(PartyPair::BE),
            other => Err(Error::domain(format!(
                "unknown party pair {other:?} (expected ab, ae, or be)"
            ))),
        }
    }
}

impl std::fmt::Display for PartyPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PartyPair::AB => "ab",
            PartyPair::AE => "ae",
            PartyPair::BE => "be",
        })
    }
}

/// Checks finiteness, negativity, and per-settings-block normalization of a
/// flat table for `parties` binary-setting/binary-outcome parties, clamping
/// tiny negative entries to zero. Violations are reported in scan order:
/// entries first (ascending flat index), then normalization blocks.
fn validate_table(table: &mut [f64], parties: usize) -> Result<()> {
    for (index, entry) in table.iter_mut().enumerate() {
        if !entry.is_finite() {
            return Err(Error::NonFiniteEntry { index });
        }
        if *entry < -NEGATIVITY_FLOOR {
            return Err(Error::NegativeProbability {
                index,
                value: *entry,
            });
        }
        if *entry < 0.0 {
            *entry = 0.0;
        }
    }
    let block = 1usize << parties;
    for setting in 0..block {
        let sum: f64 = table[setting * block..(setting + 1) * block].iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::Normalization { setting, sum });
        }
    }
    Ok(())
}

/// Maximum signaling violation of a flat table: over every proper non-empty
/// subset of parties, every assignment of that subset's settings and
/// outcomes, and every pair of assignments to the remaining settings, the
/// largest difference between the subset's marginal probabilities. Zero (up
/// to rounding) exactly when each subset's marginal is independent of the
/// other parties' settings.
fn signaling_deficit_table(table: &[f64], parties: usize) -> f64 {
    let full = 1usize << parties;
    let mut worst = 0.0f64;
    for subset in 1..full - 1 {
        let comp = !subset & (full - 1);
        for s_sub in 0..full {
            if s_sub & comp != 0 {
                continue;
            }
            for o_sub in 0..full {
                if o_sub & comp != 0 {
                    continue;
                }
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for s_comp in 0..full {
                    if s_comp & subset != 0 {
                        continue;
                    }
                    let mut marginal = 0.0;
                    for o_comp in 0..full {
                        if o_comp & subset != 0 {
                            continue;
                        }
                        marginal += table[((s_sub | s_comp) << parties) | o_sub | o_comp];
                    }
                    lo = lo.min(marginal);
                    hi = hi.max(marginal);
                }
                worst = worst.max(hi - lo);
            }
        }
    }
    worst
}

fn mix_tables<const N: usize>(a: &[f64; N], b: &[f64; N], weight: f64) -> Result<[f64; N]> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::domain(format!(
            "mixing weight {weight} outside [0, 1]"
        )));
    }
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = weight * a[i] + (1.0 - weight) * b[i];
    }
    Ok(out)
}

/// A two-party box `P(X, Y | x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteBox {
    probs: [f64; 16],
}

impl BipartiteBox {
    /// Builds a box from a flat table (`x*8 + y*4 + X*2 + Y`), validating
    /// normalization and negativity and clamping rounding-level negatives.
    pub fn from_table(mut probs: [f64; 16]) -> Result<Self> {
        validate_table(&mut probs, 2)?;
        Ok(BipartiteBox { probs })
    }

    pub fn prob(&self, x: u8, y: u8, ox: u8, oy: u8) -> f64 {
        self.probs[Self::index(x, y, ox, oy)]
    }

    pub fn index(x: u8, y: u8, ox: u8, oy: u8) -> usize {
        debug_assert!(x < 2 && y < 2 && ox < 2 && oy < 2);
        (x as usize) * 8 + (y as usize) * 4 + (ox as usize) * 2 + oy as usize
    }

    pub fn table(&self) -> &[f64; 16] {
        &self.probs
    }

    /// CHSH value `1/4 * sum_{x,y} P(X xor Y = x.y | x, y)`.
    pub fn chsh(&self) -> f64 {
        let mut total = 0.0;
        for x in 0..2u8 {
            for y in 0..2u8 {
                let target = x & y;
                for ox in 0..2u8 {
                    let oy = ox ^ target;
                    total += self.prob(x, y, ox, oy);
                }
            }
        }
        total / 4.0
    }

    /// Convex combination `weight * self + (1 - weight) * other`.
    pub fn mix(&self, other: &Self, weight: f64) -> Result<Self> {
        Ok(BipartiteBox {
            probs: mix_tables(&self.probs, &other.probs, weight)?,
        })
    }

    /// Relabels one party's outcome bit (`0 <-> 1`).
    pub fn flip_outcome(&self, party: Party) -> Result<Self> {
        let mut probs = [0.0; 16];
        for x in 0..2u8 {
            for y in 0..2u8 {
                for ox in 0..2u8 {
                    for oy in 0..2u8 {
                        let (fx, fy) = match party {
                            Party::A => (ox ^ 1, oy),
                            Party::B => (ox, oy ^ 1),
                            Party::E => {
                                return Err(Error::domain(
                                    "a bipartite box has no third party to flip",
                                ))
                            }
                        };
                        probs[Self::index(x, y, fx, fy)] = self.prob(x, y, ox, oy);
                    }
                }
            }
        }
        Ok(BipartiteBox { probs })
    }

    /// Largest dependence of one party's marginal on the other's setting.
    pub fn signaling_deficit(&self) -> f64 {
        signaling_deficit_table(&self.probs, 2)
    }
}

/// A three-party box `P(A, B, E | a, b, e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripartiteBox {
    probs: [f64; 64],
}

impl TripartiteBox {
    /// Builds a box from a flat table (`a*32 + b*16 + e*8 + A*4 + B*2 + E`),
    /// with the same validation as [`BipartiteBox::from_table`].
    pub fn from_table(mut probs: [f64; 64]) -> Result<Self> {
        validate_table(&mut probs, 3)?;
        Ok(TripartiteBox { probs })
    }

    pub fn prob(&self, a: u8, b: u8, e: u8, oa: u8, ob: u8, oe: u8) -> f64 {
        self.probs[Self::index(a, b, e, oa, ob, oe)]
    }

    pub fn index(a: u8, b: u8, e: u8, oa: u8, ob: u8, oe: u8) -> usize {
        debug_assert!(a < 2 && b < 2 && e < 2 && oa < 2 && ob < 2 && oe < 2);
        (a as usize) * 32
            + (b as usize) * 16
            + (e as usize) * 8
            + (oa as usize) * 4
            + (ob as usize) * 2
            + oe as usize
    }

    pub fn table(&self) -> &[f64; 64] {
        &self.probs
    }

    /// CHSH value of a pair with the remaining party's setting pinned to
    /// `third_setting`. The remaining party's outcome is summed out, which is
    /// well defined even for signaling tables (each settings block is
    /// normalized on its own).
    pub fn chsh_with_third(&self, pair: PartyPair, third_setting: u8) -> f64 {
        let mut total = 0.0;
        for s1 in 0..2u8 {
            for s2 in 0..2u8 {
                let target = s1 & s2;
                for o1 in 0..2u8 {
                    let o2 = o1 ^ target;
                    for o3 in 0..2u8 {
                        let p = match pair {
                            PartyPair::AB => self.prob(s1, s2, third_setting, o1, o2, o3),
                            PartyPair::AE => self.prob(s1, third_setting, s2, o1, o3, o2),
                            PartyPair::BE => self.prob(third_setting, s1, s2, o3, o1, o2),
                        };
                        total += p;
                    }
                }
            }
        }
        total / 4.0
    }

    /// CHSH value of a pair with the remaining party's setting pinned to 0.
    pub fn chsh(&self, pair: PartyPair) -> f64 {
        self.chsh_with_third(pair, 0)
    }

    /// CHSH value of a pair for both choices of the remaining party's
    /// setting, indexed by that setting.
    pub fn chsh_by_third_setting(&self, pair: PartyPair) -> [f64; 2] {
        [
            self.chsh_with_third(pair, 0),
            self.chsh_with_third(pair, 1),
        ]
    }

    /// The larger of the pair's two CHSH values across the remaining party's
    /// settings — the value a monogamy check has to survive.
    pub fn chsh_worst_case(&self, pair: PartyPair) -> f64 {
        let [s0, s1] = self.chsh_by_third_setting(pair);
        s0.max(s1)
    }

    /// Convex combination `weight * self + (1 - weight) * other`.
    pub fn mix(&self, other: &Self, weight: f64) -> Result<Self> {
        Ok(TripartiteBox {
            probs: mix_tables(&self.probs, &other.probs, weight)?,
        })
    }

    /// Relabels one party's outcome bit.
    pub fn flip_outcome(&self, party: Party) -> Self {
        let mut probs = [0.0; 64];
        for idx in 0..64 {
            let (a, b, e) = ((idx >> 5) & 1, (idx >> 4) & 1, (idx >> 3) & 1);
            let (oa, ob, oe) = ((idx >> 2) & 1, (idx >> 1) & 1, idx & 1);
            let (fa, fb, fe) = match party {
                Party::A => (oa ^ 1, ob, oe),
                Party::B => (oa, ob ^ 1, oe),
                Party::E => (oa, ob, oe ^ 1),
            };
            probs[Self::index(a as u8, b as u8, e as u8, fa as u8, fb as u8, fe as u8)] =
                self.probs[idx];
        }
        TripartiteBox { probs }
    }

    /// Largest dependence of any strict subset's marginal on the remaining
    /// parties' settings.
    pub fn signaling_deficit(&self) -> f64 {
        signaling_deficit_table(&self.probs, 3)
    }
}

/// The correlated-outcome box with an adjustable one-sided bias:
/// `P(X, Y | x, y) = (1/2 + (-1)^Y * q)` when `X xor Y = x.y`, zero
/// otherwise, for `q` in `[0, 1/2]`. Its CHSH value is 1 for every `q`; it
/// is no-signaling only at `q = 0`, where it reduces to the standard
/// maximally nonlocal box.
pub fn pr_box(q: f64) -> Result<BipartiteBox> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::domain(format!("bias {q} outside [0, 1/2]")));
    }
    let mut probs = [0.0; 16];
    for x in 0..2u8 {
        for y in 0..2u8 {
            for oy in 0..2u8 {
                let ox = oy ^ (x & y);
                let sign = if oy == 0 { 1.0 } else { -1.0 };
                probs[BipartiteBox::index(x, y, ox, oy)] = 0.5 + sign * q;
            }
        }
    }
    BipartiteBox::from_table(probs)
}

/// The uniformly random two-party box (every entry 1/4). Its CHSH value is
/// 1/2.
pub fn white_noise() -> BipartiteBox {
    BipartiteBox { probs: [0.25; 16] }
}

/// The uniformly random three-party box (every entry 1/8).
pub fn white_noise_tripartite() -> TripartiteBox {
    TripartiteBox { probs: [0.125; 64] }
}

/// Mixture of the unbiased correlated box and white noise chosen so the CHSH
/// value is exactly `beta`, for `beta` in `[1/2, 1]`.
pub fn isotropic_box(beta: f64) -> Result<BipartiteBox> {
    if !(0.5..=1.0).contains(&beta) {
        return Err(Error::domain(format!(
            "isotropic CHSH target {beta} outside [1/2, 1]"
        )));
    }
    pr_box(0.0)?.mix(&white_noise(), 2.0 * beta - 1.0)
}

/// Embeds a two-party box as the given pair of a three-party box; the
/// remaining party outputs an independent fair coin and ignores its setting.
/// The pair's first party takes the bipartite box's first side.
pub fn extend_with_noise(bip: &BipartiteBox, pair: PartyPair) -> TripartiteBox {
    let mut probs = [0.0; 64];
    for a in 0..2u8 {
        for b in 0..2u8 {
            for e in 0..2u8 {
                for oa in 0..2u8 {
                    for ob in 0..2u8 {
                        for oe in 0..2u8 {
                            let p = match pair {
                                PartyPair::AB => bip.prob(a, b, oa, ob),
                                PartyPair::AE => bip.prob(a, e, oa, oe),
                                PartyPair::BE => bip.prob(b, e, ob, oe),
                            } * 0.5;
                            probs[TripartiteBox::index(a, b, e, oa, ob, oe)] = p;
                        }
                    }
                }
            }
        }
    }
    TripartiteBox { probs }
}

/// The eavesdropping showcase box: with probability `p` the biased
/// correlated box `pr_box(q1)` sits between A and B (E is noise), and with
/// probability `1 - p` the box `pr_box(q2)` sits between A and E (B is
/// noise). Its pairwise CHSH values are `(1 + p)/2` for AB and `1 - p/2`
/// for AE, summing to exactly 3/2 for every parameter choice, while the
/// table is signaling whenever either bias is nonzero (and `p` is not
/// degenerate).
pub fn eve_example_box(p: f64, q1: f64, q2: f64) -> Result<TripartiteBox> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("mixing weight {p} outside [0, 1]")));
    }
    let ab = extend_with_noise(&pr_box(q1)?, PartyPair::AB);
    let ae = extend_with_noise(&pr_box(q2)?, PartyPair::AE);
    ab.mix(&ae, p)
}

/// A box of either supported arity, as read from a box file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyBox {
    Bipartite(BipartiteBox),
    Tripartite(TripartiteBox),
}

impl AnyBox {
    pub fn parties(&self) -> usize {
        match self {
            AnyBox::Bipartite(_) => 2,
            AnyBox::Tripartite(_) => 3,
        }
    }

    pub fn signaling_deficit(&self) -> f64 {
        match self {
            AnyBox::Bipartite(b) => b.signaling_deficit(),
            AnyBox::Tripartite(t) => t.signaling_deficit(),
        }
    }

    /// Convex combination of two boxes of the same arity.
    pub fn mix(&self, other: &Self, weight: f64) -> Result<Self> {
        match (self, other) {
            (AnyBox::Bipartite(a), AnyBox::Bipartite(b)) => {
                Ok(AnyBox::Bipartite(a.mix(b, weight)?))
            }
            (AnyBox::Tripartite(a), AnyBox::Tripartite(b)) => {
                Ok(AnyBox::Tripartite(a.mix(b, weight)?))
            }
            _ => Err(Error::ArityMismatch),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct BoxFile {
    arity: u8,
    probs: Vec<f64>,
}

/// Parses a box from its JSON file form
/// `{"arity": 2 | 3, "probs": [<16 or 64 reals>]}` and validates it. The
/// first violated invariant is reported with its flat index.
pub fn read_box_json(text: &str) -> Result<AnyBox> {
    let file: BoxFile =
        serde_json::from_str(text).map_err(|e| Error::BoxFile(e.to_string()))?;
    let expected = match file.arity {
        2 => 16,
        3 => 64,
        other => {
            return Err(Error::BoxFile(format!(
                "arity {other} is not supported (expected 2 or 3)"
            )))
        }
    };
    if file.probs.len() != expected {
        return Err(Error::BoxFile(format!(
            "expected {expected} probabilities for arity {}, found {}",
            file.arity,
            file.probs.len()
        )));
    }
    if file.arity == 2 {
        let mut table = [0.0; 16];
        table.copy_from_slice(&file.probs);
        Ok(AnyBox::Bipartite(BipartiteBox::from_table(table)?))
    } else {
        let mut table = [0.0; 64];
        table.copy_from_slice(&file.probs);
        Ok(AnyBox::Tripartite(TripartiteBox::from_table(table)?))
    }
}

/// Serializes a box to the JSON file form accepted by [`read_box_json`].
pub fn write_box_json(b: &AnyBox) -> String {
    let file = match b {
        AnyBox::Bipartite(b) => BoxFile {
            arity: 2,
            probs: b.table().to_vec(),
        },
        AnyBox::Tripartite(t) => BoxFile {
            arity: 3,
            probs: t.table().to_vec(),
        },
    };
    serde_json::to_string(&file).expect("box file serialization cannot fail")
}
