//! Python bindings: codes, channels, the detector, both relay decoders, CRC
//! framing and the Monte-Carlo sweep.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pnc_core::detector::{BMac, DetectorOptions};
use pnc_core::framesync::{self, zero_pad_interference};
use pnc_core::gfcode::{LlrVec4, LogSumMode};
use pnc_core::jointdec::{self, Schedule};
use pnc_core::ldpc::{self, GeneratorForm, ParityCheckMatrix};
use pnc_core::macchannel::{self, Boundary, ChannelRealization, PulseShape, Sample, DEFAULT_SRRC_SPAN};
use pnc_core::sim::{self, SimConfig, Simulator};

fn err(e: pnc_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

// Vec<u8> would otherwise surface as `bytes`.
fn bit_list<'py>(py: Python<'py>, bits: &[u8]) -> PyResult<Bound<'py, PyList>> {
    PyList::new(py, bits)
}

/// Binary LDPC code with its encoder.
#[pyclass(module = "pnc_relay", frozen)]
struct Code {
    h: ParityCheckMatrix,
    g: GeneratorForm,
}

#[pymethods]
impl Code {
    /// Random (3,6)-regular code without 4-cycles.
    #[staticmethod]
    #[pyo3(signature = (n, seed = 1))]
    fn regular(n: usize, seed: u64) -> PyResult<Self> {
        let h = ldpc::build_regular_code(n, 3, 6, 6, seed).map_err(err)?;
        let g = GeneratorForm::for_code(&h).map_err(err)?;
        Ok(Code { h, g })
    }

    /// Cyclic Euclidean-geometry code, `n` in {15, 63, 255, 1023}.
    #[staticmethod]
    fn cyclic_eg(n: usize) -> PyResult<Self> {
        let (h, g) = sim::CodeSpec::CyclicEg { n }.build().map_err(err)?;
        Ok(Code { h, g })
    }

    #[staticmethod]
    fn from_alist(text: &str) -> PyResult<Self> {
        let h = ldpc::load_alist(text).map_err(err)?;
        let g = GeneratorForm::for_code(&h).map_err(err)?;
        Ok(Code { h, g })
    }

    #[getter]
    fn n(&self) -> usize {
        self.h.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.g.k()
    }

    #[getter]
    fn m(&self) -> usize {
        self.h.m()
    }

    #[getter]
    fn is_cyclic(&self) -> bool {
        self.h.is_cyclic()
    }

    #[getter]
    fn fingerprint(&self) -> String {
        self.h.fingerprint()
    }

    fn to_alist(&self) -> String {
        ldpc::emit_alist(&self.h)
    }

    fn encode<'py>(&self, py: Python<'py>, message: Vec<u8>) -> PyResult<Bound<'py, PyList>> {
        bit_list(py, &self.g.encode(&message).map_err(err)?)
    }

    fn extract_message<'py>(&self, py: Python<'py>, codeword: Vec<u8>) -> PyResult<Bound<'py, PyList>> {
        bit_list(py, &self.g.extract_message(&codeword).map_err(err)?)
    }

    /// True when every parity check is satisfied.
    fn check(&self, word: Vec<u8>) -> PyResult<bool> {
        ldpc::syndrome(&self.h, &word).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Code(n={}, k={}, cyclic={})", self.h.n(), self.g.k(), self.h.is_cyclic())
    }
}

/// Two-user asynchronous MAC after the whitened matched filter.
#[pyclass(module = "pnc_relay", frozen)]
struct Channel {
    inner: ChannelRealization,
}

#[pymethods]
impl Channel {
    #[new]
    #[pyo3(signature = (pulse = "srrc", rolloff = 1.0, eps = 0.5, delta_theta = std::f64::consts::FRAC_PI_4, sigma2 = 0.5))]
    fn new(pulse: &str, rolloff: f64, eps: f64, delta_theta: f64, sigma2: f64) -> PyResult<Self> {
        let shape = match pulse {
            "rect" => PulseShape::rectangular(),
            "srrc" => PulseShape::srrc(rolloff, DEFAULT_SRRC_SPAN).map_err(err)?,
            other => return Err(PyValueError::new_err(format!("unknown pulse {other:?}"))),
        };
        let inner = ChannelRealization::new(shape, eps, delta_theta, 0, sigma2)
            .map_err(err)?
            .with_boundary(Boundary::Continuous);
        Ok(Channel { inner })
    }

    #[getter]
    fn sigma2(&self) -> f64 {
        self.inner.sigma2()
    }

    /// Spectral-factorization residual on the unit circle.
    #[getter]
    fn residual(&self) -> f64 {
        self.inner.factor().residual
    }

    /// `Ψ_l` as nested lists `[l][row][col]`.
    fn taps(&self) -> Vec<[[Complex64; 2]; 2]> {
        self.inner
            .taps()
            .iter()
            .map(|t| [[t[(0, 0)], t[(0, 1)]], [t[(1, 0)], t[(1, 1)]]])
            .collect()
    }

    /// Whitened-domain observations `r(k) = [r_1, r_2]` for one frame pair.
    #[pyo3(signature = (c_a, c_b, iota = 0, seed = 0))]
    fn simulate(&self, c_a: Vec<u8>, c_b: Vec<u8>, iota: i64, seed: u64) -> PyResult<Vec<[Complex64; 2]>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = macchannel::simulate_whitened(&c_a, &c_b, &self.inner.with_iota(iota), &mut rng).map_err(err)?;
        Ok(r.iter().map(|s| [s[0], s[1]]).collect())
    }

    /// Per-symbol GF(4) log-posteriors from one detector pass.
    fn posteriors(&self, r: Vec<[Complex64; 2]>) -> PyResult<Vec<[f64; 4]>> {
        let bmac = BMac::new(&self.inner, DetectorOptions::default()).map_err(err)?;
        let ap = bmac.run_plain(&to_samples(&r)).map_err(err)?;
        Ok(ap.posterior.iter().map(|p| p.0).collect())
    }
}

fn to_samples(r: &[[Complex64; 2]]) -> Vec<Sample> {
    r.iter().map(|s| Sample::new(s[0], s[1])).collect()
}

fn result_dict<'py>(py: Python<'py>, d: &jointdec::DecodeResult) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("xor_codeword", bit_list(py, &d.xor_codeword)?)?;
    out.set_item("converged", d.converged)?;
    out.set_item("outer_iters", d.outer_iters_used)?;
    out.set_item("inner_iters", d.inner_iters_used)?;
    match &d.pair_codewords {
        Some((a, b)) => {
            out.set_item("c_a", bit_list(py, a)?)?;
            out.set_item("c_b", bit_list(py, b)?)?;
        }
        None => {
            out.set_item("c_a", py.None())?;
            out.set_item("c_b", py.None())?;
        }
    }
    Ok(out)
}

/// Joint Log-G-SPA decoding of `c_a ⊕ c_b^{(ι)}`.
#[pyfunction]
#[pyo3(signature = (code, channel, r, outer = 4, inner = 5, iota_max = 0))]
fn decode_gspa<'py>(
    py: Python<'py>,
    code: &Code,
    channel: &Channel,
    r: Vec<[Complex64; 2]>,
    outer: usize,
    inner: usize,
    iota_max: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let bmac = BMac::new(&channel.inner, DetectorOptions::default()).map_err(err)?;
    let obs = zero_pad_interference(&to_samples(&r), iota_max).map_err(err)?;
    let schedule = Schedule::new(outer, inner).map_err(err)?;
    let d = jointdec::log_g_spa(&code.h, &bmac, &obs, schedule).map_err(err)?;
    result_dict(py, &d)
}

/// Disjoint baseline: XOR-bit LLRs, then binary sum-product.
#[pyfunction]
#[pyo3(signature = (code, channel, r, iters = 20))]
fn decode_jcnc<'py>(
    py: Python<'py>,
    code: &Code,
    channel: &Channel,
    r: Vec<[Complex64; 2]>,
    iters: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let bmac = BMac::new(&channel.inner, DetectorOptions::default()).map_err(err)?;
    let ap = bmac.run_plain(&to_samples(&r)).map_err(err)?;
    let d = jointdec::jcnc_decode(&code.h, &ap.posterior, iters, LogSumMode::Exact).map_err(err)?;
    result_dict(py, &d)
}

/// `ln((p_0 + p_3) / (p_1 + p_2))` of a GF(4) log-posterior.
#[pyfunction]
fn xor_llr(v: [f64; 4]) -> f64 {
    jointdec::xor_llr_from_joint(&LlrVec4(v))
}

/// CRC-16/CCITT-FALSE of a bit list.
#[pyfunction]
fn crc16(bits: Vec<u8>) -> u16 {
    framesync::crc16(&bits)
}

/// `message ∥ crc` as bits.
#[pyfunction]
fn crc16_append(py: Python<'_>, bits: Vec<u8>) -> PyResult<Bound<'_, PyList>> {
    bit_list(py, &framesync::crc16_append(&bits).map_err(err)?.bits())
}

#[pyfunction]
fn crc16_check(bits: Vec<u8>) -> bool {
    framesync::crc16_check(&bits)
}

#[pyfunction]
fn snr_loss_db(n: usize, iota: usize) -> PyResult<f64> {
    framesync::snr_loss_db(n, iota).map_err(err)
}

#[pyfunction]
fn ebn0_to_sigma2(ebn0_db: f64, rate: f64) -> PyResult<f64> {
    sim::ebn0_to_sigma2(ebn0_db, rate).map_err(err)
}

/// Default simulation configuration as JSON.
#[pyfunction]
fn default_config() -> PyResult<String> {
    serde_json::to_string_pretty(&SimConfig::default()).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs a sweep from a JSON configuration and returns one dict per point.
#[pyfunction]
fn run_sweep<'py>(py: Python<'py>, config_json: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg: SimConfig = serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let points = py
        .detach(|| Simulator::new(cfg).and_then(|s| sim::sweep(&s)))
        .map_err(err)?;
    points
        .iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("ebn0_db", p.ebn0_db)?;
            d.set_item("frames", p.frames_run)?;
            d.set_item("xor_bit_errors", p.xor_bit_errors)?;
            d.set_item("xor_ber", p.xor_ber)?;
            d.set_item("frame_errors", p.frame_errors)?;
            d.set_item("fer", p.fer)?;
            d.set_item("mean_outer_iters", p.mean_outer_iters)?;
            d.set_item("mean_inner_iters", p.mean_inner_iters)?;
            d.set_item("delay_res_attempts", p.delay_resolution_attempts)?;
            d.set_item("delay_res_success", p.delay_resolution_successes)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn pnc_relay(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Code>()?;
    m.add_class::<Channel>()?;
    m.add_function(wrap_pyfunction!(decode_gspa, m)?)?;
    m.add_function(wrap_pyfunction!(decode_jcnc, m)?)?;
    m.add_function(wrap_pyfunction!(xor_llr, m)?)?;
    m.add_function(wrap_pyfunction!(crc16, m)?)?;
    m.add_function(wrap_pyfunction!(crc16_append, m)?)?;
    m.add_function(wrap_pyfunction!(crc16_check, m)?)?;
    m.add_function(wrap_pyfunction!(snr_loss_db, m)?)?;
    m.add_function(wrap_pyfunction!(ebn0_to_sigma2, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
