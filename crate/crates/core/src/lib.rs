//! Analysis toolkit for device-independent key distribution built on the
//! monogamy of CHSH violations.
//!
//! The crate models two- and three-party conditional probability tables
//! ([`boxes`]), the trade-off curves limiting how strongly an eavesdropper
//! can correlate with a pair that certifies a given CHSH value
//! ([`monogamy`]), the reduction from those curves to guessing
//! probabilities and security margins ([`security`]), numeric oracles that
//! re-derive the closed forms by linear programming and enumeration
//! ([`attack_opt`]), and a reproducible protocol simulator ([`protocol`]).

pub mod attack_opt;
pub mod boxes;
pub mod cli;
pub mod error;
pub mod monogamy;
pub mod protocol;
pub mod security;
mod simplex;
pub mod tolerance;

pub use boxes::{
    eve_example_box, extend_with_noise, isotropic_box, pr_box, read_box_json, white_noise,
    white_noise_tripartite, write_box_json, AnyBox, BipartiteBox, Party, PartyPair, TripartiteBox,
    CLASSICAL_CHSH, TSIRELSON_CHSH,
};
pub use error::{Error, Result};
pub use monogamy::{
    check_monogamy, mono_ns, mono_p, mono_qm, sufficient_line, CriticalBeta, MonogamyFunction,
    MonogamyReport,
};
pub use protocol::{
    round_records, run_protocol, sample_round, simulate_attack, AttackReport, ProtocolConfig,
    RoundRecord, SimulationReport,
};
pub use security::{
    binary_entropy, bob_guess_prob, eve_chsh_lower_bound, key_rate_proxy, max_eve_prob, secure,
    strategy_from_procedure, EveProcedure, EveStrategy, OutputRule, SecurityVerdict,
};
