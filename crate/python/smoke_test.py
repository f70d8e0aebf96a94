"""Smoke test for the chshmon_py extension module.

Exercises every exposed class and function against known reference values.
Run via run_smoke_test.sh, which builds and stages the extension first.
"""

import json
import math

import chshmon_py as m


def approx(a, b, tol=1e-12):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


# Module constants.
approx(m.CLASSICAL_CHSH, 0.75)
approx(m.TSIRELSON_CHSH, 0.5 * (1 + 1 / math.sqrt(2)))

# Critical thresholds.
approx(m.critical_beta("ns"), 5 / 6, 1e-10)
approx(m.critical_beta("qm"), 0.5 + 1 / math.sqrt(10), 1e-10)
approx(m.critical_beta("p:1.1"), 0.8530205990728525, 1e-10)
try:
    m.critical_beta("nope")
    raise AssertionError("bad selector must raise")
except ValueError:
    pass

# Monogamy bounds and the sufficiency line.
approx(m.monogamy_eval("ns", 0.9), 0.6)
approx(m.sufficient_line(5 / 6), m.monogamy_eval("ns", 5 / 6), 1e-12)
approx(m.max_eve_prob("ns", 0.9), 0.7)

# Boxes.
pr = m.BipartiteBox.pr(0.0)
approx(pr.chsh(), 1.0)
assert pr.signaling_deficit() <= 1e-9
noise = m.BipartiteBox.white_noise()
approx(noise.chsh(), 0.5)
iso = m.BipartiteBox.isotropic(0.85)
approx(iso.chsh(), 0.85)
mixed = pr.mix(noise, 0.7)
approx(mixed.chsh(), 0.7 * 1.0 + 0.3 * 0.5)
rebuilt = m.BipartiteBox(pr.table())
approx(rebuilt.chsh(), 1.0)

ext = pr.extend("ab")
approx(ext.chsh("ab"), 1.0)
assert ext.signaling_deficit() <= 1e-9

tri = m.TripartiteBox.eve_example(0.5, 0.25, 0.1)
approx(tri.chsh("ab"), 0.75)
approx(tri.chsh("ae"), 0.75)
assert tri.signaling_deficit() > 1e-3
check = tri.check_monogamy("ns")
assert check["satisfied"]
approx(check["slack"], 0.0)

roundtrip = m.box_from_json(tri.to_json())
approx(roundtrip.chsh("ab"), 0.75)

# Security reduction.
proc = m.EveProcedure([[0.9, 0.5], [0.5, 0.9]])
approx(proc.eve_guess_prob(), 0.9)
strat = proc.strategy()
approx(strat["beta_ae"], 0.9 / 2 + 0.25)
verdict = m.secure("ns", 0.9)
assert verdict["secure"]
approx(verdict["p_e_max"], 0.7)
approx(m.binary_entropy(0.5), 1.0)
approx(m.key_rate_proxy(1.0, 0.5), 1.0)

best_proc, p_e = m.best_procedure_under_monogamy("ns", 0.9, 1e-4)
approx(p_e, 0.7, 1e-4)
approx(best_proc.eve_guess_prob(), p_e)

# Linear-programming oracles.
optimum, argmax = m.max_chsh_ae_given_ab(0.9)
approx(optimum, 0.6, 1e-7)
approx(argmax.chsh("ae"), optimum, 1e-7)
rows = m.verify_ns_monogamy_tightness(0.05)
assert len(rows) == 6 and all(r[4] for r in rows)
bound, count = m.brute_force_classical_bound()
approx(bound, 0.75)
assert count == 8

# Protocol simulation: deterministic, statistically sound, attackable.
report = json.loads(m.simulate(beta=0.9, rounds=20000, seed=7, adversary="ns"))
assert abs(report["beta_hat"] - 0.9) < 5 * report["beta_stderr"]
assert report["verdict"]["secure"]
again = json.loads(m.simulate(beta=0.9, rounds=20000, seed=7, adversary="ns"))
assert report == again

attacked = json.loads(
    m.simulate(beta=0.9, rounds=20000, seed=7, adversary="ns", attack=True)
)
eve = attacked["attack"]
assert abs(eve["eve_hat"] - 0.7) < 5 * eve["eve_stderr"]
assert attacked["beta_hat"] == report["beta_hat"]

print("smoke test passed")
