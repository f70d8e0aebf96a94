//! Python bindings for the CHSH monogamy analysis crate.
//!
//! Boxes and eavesdropper procedures are wrapped as classes; monogamy
//! selectors are passed as strings ("ns" | "qm" | "p:<x>"); simulation
//! reports come back as JSON strings ready for `json.loads`.

use chsh_monogamy as core;
use core::boxes::PartyPair;
use core::monogamy::CriticalBeta;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn selector(text: &str) -> PyResult<core::MonogamyFunction> {
    text.parse().map_err(err)
}

fn pair(text: &str) -> PyResult<PartyPair> {
    text.parse().map_err(err)
}

/// Two-party conditional probability table P(X, Y | x, y).
#[pyclass(name = "BipartiteBox", from_py_object)]
#[derive(Clone)]
struct PyBipartiteBox {
    inner: core::BipartiteBox,
}

#[pymethods]
impl PyBipartiteBox {
    /// Build from 16 probabilities, flat index x*8 + y*4 + X*2 + Y.
    #[new]
    fn new(probs: Vec<f64>) -> PyResult<Self> {
        let table: [f64; 16] = probs
            .try_into()
            .map_err(|v: Vec<f64>| PyValueError::new_err(format!("need 16 entries, got {}", v.len())))?;
        Ok(Self {
            inner: core::BipartiteBox::from_table(table).map_err(err)?,
        })
    }

    /// The winning distribution with local bias q.
    #[staticmethod]
    fn pr(q: f64) -> PyResult<Self> {
        Ok(Self {
            inner: core::pr_box(q).map_err(err)?,
        })
    }

    /// Uniform outcomes regardless of settings.
    #[staticmethod]
    fn white_noise() -> Self {
        Self {
            inner: core::white_noise(),
        }
    }

    /// The PR/white-noise mixture with the given CHSH value.
    #[staticmethod]
    fn isotropic(beta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: core::isotropic_box(beta).map_err(err)?,
        })
    }

    fn chsh(&self) -> f64 {
        self.inner.chsh()
    }

    fn signaling_deficit(&self) -> f64 {
        self.inner.signaling_deficit()
    }

    fn table(&self) -> Vec<f64> {
        self.inner.table().to_vec()
    }

    fn mix(&self, other: &Self, weight: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.mix(&other.inner, weight).map_err(err)?,
        })
    }

    /// Extend with an uncorrelated third party; `embed_as` names the pair
    /// this box becomes ("ab" or "ae").
    fn extend(&self, embed_as: &str) -> PyResult<PyTripartiteBox> {
        Ok(PyTripartiteBox {
            inner: core::extend_with_noise(&self.inner, pair(embed_as)?),
        })
    }

    fn to_json(&self) -> String {
        core::write_box_json(&core::AnyBox::Bipartite(self.inner.clone()))
    }

    fn __repr__(&self) -> String {
        format!("BipartiteBox(chsh={:.6})", self.inner.chsh())
    }
}

/// Three-party conditional probability table P(A, B, E | a, b, e).
#[pyclass(name = "TripartiteBox", skip_from_py_object)]
#[derive(Clone)]
struct PyTripartiteBox {
    inner: core::TripartiteBox,
}

#[pymethods]
impl PyTripartiteBox {
    /// Build from 64 probabilities, flat index
    /// a*32 + b*16 + e*8 + A*4 + B*2 + E.
    #[new]
    fn new(probs: Vec<f64>) -> PyResult<Self> {
        let table: [f64; 64] = probs
            .try_into()
            .map_err(|v: Vec<f64>| PyValueError::new_err(format!("need 64 entries, got {}", v.len())))?;
        Ok(Self {
            inner: core::TripartiteBox::from_table(table).map_err(err)?,
        })
    }

    /// The signaling mixture: weight p of a q1-biased winning box shared
    /// with Bob, weight 1-p of a q2-biased one shared with the
    /// eavesdropper.
    #[staticmethod]
    fn eve_example(p: f64, q1: f64, q2: f64) -> PyResult<Self> {
        Ok(Self {
            inner: core::eve_example_box(p, q1, q2).map_err(err)?,
        })
    }

    /// CHSH value of a pair ("ab" | "ae" | "be") with the third party's
    /// setting pinned to 0.
    fn chsh(&self, of: &str) -> PyResult<f64> {
        Ok(self.inner.chsh(pair(of)?))
    }

    /// CHSH value of a pair, minimized over the third party's setting.
    fn chsh_worst_case(&self, of: &str) -> PyResult<f64> {
        Ok(self.inner.chsh_worst_case(pair(of)?))
    }

    fn signaling_deficit(&self) -> f64 {
        self.inner.signaling_deficit()
    }

    fn table(&self) -> Vec<f64> {
        self.inner.table().to_vec()
    }

    /// Check the AE pair against the monogamy bound at the AB value.
    fn check_monogamy<'py>(&self, py: Python<'py>, adversary: &str) -> PyResult<Bound<'py, PyDict>> {
        let report = core::check_monogamy(&self.inner, &selector(adversary)?).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("beta_ab", report.beta_ab)?;
        d.set_item("beta_ae", report.beta_ae)?;
        d.set_item("bound", report.bound)?;
        d.set_item("slack", report.slack)?;
        d.set_item("satisfied", report.satisfied)?;
        Ok(d)
    }

    fn to_json(&self) -> String {
        core::write_box_json(&core::AnyBox::Tripartite(self.inner.clone()))
    }

    fn __repr__(&self) -> String {
        format!(
            "TripartiteBox(chsh_ab={:.6}, chsh_ae={:.6})",
            self.inner.chsh(PartyPair::AB),
            self.inner.chsh(PartyPair::AE)
        )
    }
}

/// The eavesdropper's device: p(i, a) is the probability her raw guess
/// matches Alice's outcome when she inputs i and Alice's setting is a.
#[pyclass(name = "EveProcedure", skip_from_py_object)]
#[derive(Clone)]
struct PyEveProcedure {
    inner: core::EveProcedure,
}

#[pymethods]
impl PyEveProcedure {
    #[new]
    fn new(matrix: [[f64; 2]; 2]) -> PyResult<Self> {
        Ok(Self {
            inner: core::EveProcedure::new(matrix).map_err(err)?,
        })
    }

    fn p(&self, eve_input: u8, alice_setting: u8) -> f64 {
        self.inner.p(eve_input, alice_setting)
    }

    fn table(&self) -> [[f64; 2]; 2] {
        self.inner.table()
    }

    /// Her key-guessing probability (p(0,0) + p(1,1)) / 2.
    fn eve_guess_prob(&self) -> f64 {
        self.inner.eve_guess_prob()
    }

    /// The strategy this procedure induces, as a dict with its CHSH value.
    fn strategy<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = core::strategy_from_procedure(&self.inner);
        let d = PyDict::new(py);
        d.set_item("eve_input", s.eve_input)?;
        d.set_item(
            "rule",
            match s.rule {
                core::OutputRule::Copy => "copy",
                core::OutputRule::XorSetting => "xor-setting",
            },
        )?;
        d.set_item("beta_ae", s.beta_ae)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("EveProcedure({:?})", self.inner.table())
    }
}

/// Critical CHSH value above which key distribution is secure against the
/// selected adversary ("ns" | "qm" | "p:<x>").
#[pyfunction]
fn critical_beta(adversary: &str) -> PyResult<f64> {
    match selector(adversary)?.critical_beta().map_err(err)? {
        CriticalBeta::Value(beta) => Ok(beta),
        other => Err(PyValueError::new_err(format!(
            "no crossing in the domain: {other:?}"
        ))),
    }
}

/// Evaluate the adversary's monogamy bound at a CHSH value.
#[pyfunction]
fn monogamy_eval(adversary: &str, beta: f64) -> PyResult<f64> {
    selector(adversary)?.eval(beta).map_err(err)
}

/// The sufficiency line beta/2 + 1/4 the bound must stay below.
#[pyfunction]
fn sufficient_line(beta: f64) -> f64 {
    core::sufficient_line(beta)
}

/// The eavesdropper's maximum key-guessing probability at a certified
/// CHSH value.
#[pyfunction]
fn max_eve_prob(adversary: &str, beta: f64) -> PyResult<f64> {
    core::max_eve_prob(&selector(adversary)?, beta).map_err(err)
}

/// Full security verdict at a certified CHSH value.
#[pyfunction]
fn secure<'py>(py: Python<'py>, adversary: &str, beta: f64) -> PyResult<Bound<'py, PyDict>> {
    let v = core::secure(&selector(adversary)?, beta).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("p_b", v.p_b)?;
    d.set_item("p_e_max", v.p_e_max)?;
    d.set_item("margin", v.margin)?;
    d.set_item("secure", v.secure)?;
    Ok(d)
}

/// Shannon entropy of a bit with this probability.
#[pyfunction]
fn binary_entropy(p: f64) -> PyResult<f64> {
    core::binary_entropy(p).map_err(err)
}

/// One-way key-rate proxy h(p_e) - h(p_b) on [1/2, 1]^2.
#[pyfunction]
fn key_rate_proxy(p_b: f64, p_e: f64) -> PyResult<f64> {
    core::key_rate_proxy(p_b, p_e).map_err(err)
}

/// Largest AE CHSH value a no-signaling box allows when AB certifies at
/// least `b`; returns (optimum, argmax TripartiteBox).
#[pyfunction]
fn max_chsh_ae_given_ab(b: f64) -> PyResult<(f64, PyTripartiteBox)> {
    let r = core::attack_opt::max_chsh_ae_given_ab(b).map_err(err)?;
    Ok((r.optimum, PyTripartiteBox { inner: r.argmax }))
}

/// Compare the LP oracle against the closed-form trade-off over [3/4, 1];
/// returns rows of (b, lp_optimum, analytic_bound, abs_error, pass).
#[pyfunction]
fn verify_ns_monogamy_tightness(grid_step: f64) -> PyResult<Vec<(f64, f64, f64, f64, bool)>> {
    Ok(core::attack_opt::verify_ns_monogamy_tightness(grid_step)
        .map_err(err)?
        .into_iter()
        .map(|r| (r.b, r.lp_optimum, r.analytic_bound, r.abs_error, r.pass))
        .collect())
}

/// Best CHSH value over deterministic two-party strategies and how many
/// strategies attain it.
#[pyfunction]
fn brute_force_classical_bound() -> (f64, usize) {
    core::attack_opt::brute_force_classical_bound()
}

/// Strongest eavesdropper procedure the monogamy bound admits at a
/// certified CHSH value; returns (procedure, guess probability).
#[pyfunction]
fn best_procedure_under_monogamy(
    adversary: &str,
    beta: f64,
    search_step: f64,
) -> PyResult<(PyEveProcedure, f64)> {
    let (proc, p_e) =
        core::attack_opt::best_procedure_under_monogamy(&selector(adversary)?, beta, search_step)
            .map_err(err)?;
    Ok((PyEveProcedure { inner: proc }, p_e))
}

/// Run the key-distribution protocol Monte Carlo; returns the report as a
/// JSON string. The source is the isotropic box at `beta` unless a
/// bipartite box is passed explicitly.
#[pyfunction]
#[pyo3(signature = (beta=None, source=None, rounds=100_000, estimation_fraction=0.5, seed=0, adversary="ns", attack=false))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    beta: Option<f64>,
    source: Option<PyBipartiteBox>,
    rounds: u64,
    estimation_fraction: f64,
    seed: u64,
    adversary: &str,
    attack: bool,
) -> PyResult<String> {
    let source = match (beta, source) {
        (Some(beta), None) => core::isotropic_box(beta).map_err(err)?,
        (None, Some(b)) => b.inner,
        _ => {
            return Err(PyValueError::new_err(
                "pass exactly one of beta or source",
            ))
        }
    };
    let cfg = core::ProtocolConfig {
        source,
        rounds,
        estimation_fraction,
        seed,
        adversary: selector(adversary)?,
    };
    let report = if attack {
        core::simulate_attack(&cfg)
    } else {
        core::run_protocol(&cfg)
    }
    .map_err(err)?;
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

/// Parse a box file written by `to_json` / the CLI; returns a
/// BipartiteBox or TripartiteBox by arity.
#[pyfunction]
fn box_from_json(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    match core::read_box_json(text).map_err(err)? {
        core::AnyBox::Bipartite(b) => Ok(PyBipartiteBox { inner: b }.into_pyobject(py)?.into_any().unbind()),
        core::AnyBox::Tripartite(t) => Ok(PyTripartiteBox { inner: t }.into_pyobject(py)?.into_any().unbind()),
    }
}

#[pymodule]
fn chshmon_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBipartiteBox>()?;
    m.add_class::<PyTripartiteBox>()?;
    m.add_class::<PyEveProcedure>()?;
    m.add_function(wrap_pyfunction!(critical_beta, m)?)?;
    m.add_function(wrap_pyfunction!(monogamy_eval, m)?)?;
    m.add_function(wrap_pyfunction!(sufficient_line, m)?)?;
    m.add_function(wrap_pyfunction!(max_eve_prob, m)?)?;
    m.add_function(wrap_pyfunction!(secure, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(key_rate_proxy, m)?)?;
    m.add_function(wrap_pyfunction!(max_chsh_ae_given_ab, m)?)?;
    m.add_function(wrap_pyfunction!(verify_ns_monogamy_tightness, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_classical_bound, m)?)?;
    m.add_function(wrap_pyfunction!(best_procedure_under_monogamy, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(box_from_json, m)?)?;
    m.add("TSIRELSON_CHSH", core::TSIRELSON_CHSH)?;
    m.add("CLASSICAL_CHSH", core::CLASSICAL_CHSH)?;
    Ok(())
}
