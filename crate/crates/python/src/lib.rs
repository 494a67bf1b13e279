//! Python bindings: datasets, the detector, Ring Law reference values and
//! the synthetic generators.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;

use rmt_anomaly::detector::{self, DetectorState};
use rmt_anomaly::io::Dataset as CoreDataset;
use rmt_anomaly::linalg::{eigen_general, sample_haar_unitary, seeded, EigenConfig};
use rmt_anomaly::rmt::{self, RingLawModel as CoreModel};
use rmt_anomaly::synth::{self, ScenarioSpec, SpikeSpec};
use rmt_anomaly::{ComplexMatrix, Error, C64};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::OutOfRange(_) => PyIndexError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix_from_rows(rows: Vec<Vec<C64>>) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(to_py)
}

fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<C64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

#[pyclass(name = "RingLawModel", frozen)]
struct RingLawModel {
    inner: CoreModel,
}

#[pymethods]
impl RingLawModel {
    #[new]
    fn new(c: f64, depth: usize) -> PyResult<Self> {
        Ok(Self {
            inner: CoreModel::new(c, depth).map_err(to_py)?,
        })
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth
    }

    #[getter]
    fn inner_radius(&self) -> f64 {
        self.inner.inner_radius()
    }

    #[getter]
    fn outer_radius(&self) -> f64 {
        self.inner.outer_radius()
    }

    fn mean_radius(&self) -> f64 {
        rmt::ring_mean_radius(&self.inner)
    }

    fn density(&self, z: C64) -> f64 {
        self.inner.density(z)
    }

    fn radial_cdf(&self, r: f64) -> f64 {
        self.inner.radial_cdf(r)
    }

    /// Conformance of a spectrum: dict with `in_annulus_fraction`,
    /// `outliers`, `ks_distance`, `msr` and `analytic_msr`.
    #[pyo3(signature = (eigenvalues, margin = rmt::DEFAULT_MARGIN))]
    fn conformance<'py>(&self, py: Python<'py>, eigenvalues: Vec<C64>, margin: f64) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let sample = rmt::SpectralSample {
            msr: rmt::mean_spectral_radius(&eigenvalues),
            eigenvalues,
            c: self.inner.c,
            depth: self.inner.depth,
        };
        let r = rmt::ring_conformance(&sample, &self.inner, margin);
        let d = pyo3::types::PyDict::new(py);
        d.set_item("in_annulus_fraction", r.in_annulus_fraction)?;
        d.set_item(
            "outliers",
            r.outliers.iter().map(|&(a, b)| C64::new(a, b)).collect::<Vec<_>>(),
        )?;
        d.set_item("ks_distance", r.ks_distance)?;
        d.set_item("msr", r.msr)?;
        d.set_item("analytic_msr", r.analytic_msr)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("RingLawModel(c={}, depth={})", self.inner.c, self.inner.depth)
    }
}

#[pyclass(name = "DetectorConfig", frozen)]
struct DetectorConfig {
    inner: detector::DetectorConfig,
}

#[pymethods]
impl DetectorConfig {
    #[new]
    #[pyo3(signature = (window = detector::DEFAULT_WINDOW, depth = 1, history = detector::DEFAULT_HISTORY,
                        threshold = detector::DEFAULT_THRESHOLD, sigma_min = rmt::DEFAULT_SIGMA_MIN,
                        seed = 0, jitter = false))]
    fn new(window: usize, depth: usize, history: usize, threshold: f64, sigma_min: f64, seed: u64, jitter: bool) -> PyResult<Self> {
        let inner = detector::DetectorConfig {
            window,
            depth,
            history,
            threshold,
            sigma_min,
            seed,
            jitter,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn window(&self) -> usize {
        self.inner.window
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth
    }

    #[getter]
    fn history(&self) -> usize {
        self.inner.history
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.inner.threshold
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn jitter(&self) -> bool {
        self.inner.jitter
    }

    fn first_msr(&self) -> usize {
        self.inner.first_msr()
    }

    fn first_eta(&self) -> usize {
        self.inner.first_eta()
    }

    fn first_confidence(&self) -> usize {
        self.inner.first_confidence()
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "DetectorConfig(window={}, depth={}, history={}, threshold={}, seed={}, jitter={})",
            c.window, c.depth, c.history, c.threshold, c.seed, c.jitter
        )
    }
}

#[pyclass(name = "DetectionRecord", frozen, get_all)]
struct DetectionRecord {
    t: usize,
    msr: Option<f64>,
    eta: Option<f64>,
    eta_hat: Option<f64>,
    confidence: Option<f64>,
    anomaly: Option<bool>,
    error: Option<String>,
}

impl From<detector::DetectionRecord> for DetectionRecord {
    fn from(r: detector::DetectionRecord) -> Self {
        Self {
            t: r.t,
            msr: r.msr,
            eta: r.eta,
            eta_hat: r.eta_hat,
            confidence: r.confidence,
            anomaly: r.anomaly,
            error: r.error,
        }
    }
}

#[pymethods]
impl DetectionRecord {
    fn __repr__(&self) -> String {
        format!(
            "DetectionRecord(t={}, msr={:?}, eta={:?}, confidence={:?}, anomaly={:?})",
            self.t, self.msr, self.eta, self.confidence, self.anomaly
        )
    }
}

#[pyclass(name = "Dataset", frozen)]
struct Dataset {
    inner: CoreDataset,
}

#[pymethods]
impl Dataset {
    /// Channels-by-samples values; channels `ch1..` and samples `1..N`.
    #[staticmethod]
    fn from_values(values: Vec<Vec<C64>>) -> PyResult<Self> {
        Ok(Self {
            inner: CoreDataset::from_matrix(matrix_from_rows(values)?),
        })
    }

    #[staticmethod]
    fn load_csv(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: CoreDataset::load_csv(&path).map_err(to_py)?,
        })
    }

    fn save_csv(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save_csv(&path).map_err(to_py)
    }

    #[getter]
    fn channels(&self) -> usize {
        self.inner.channels()
    }

    #[getter]
    fn samples(&self) -> usize {
        self.inner.samples()
    }

    #[getter]
    fn channel_ids(&self) -> Vec<String> {
        self.inner.channel_ids().to_vec()
    }

    #[getter]
    fn timestamps(&self) -> Vec<String> {
        self.inner.timestamps().iter().map(|t| t.to_string()).collect()
    }

    fn values(&self) -> Vec<Vec<C64>> {
        matrix_to_rows(self.inner.values())
    }

    /// Columns `t - n + 1 ..= t` (1-based).
    fn window(&self, t: usize, n: usize) -> PyResult<Vec<Vec<C64>>> {
        let w = detector::extract_window(&self.inner, t, n).map_err(to_py)?;
        Ok(matrix_to_rows(&w))
    }

    fn __repr__(&self) -> String {
        format!("Dataset(channels={}, samples={})", self.inner.channels(), self.inner.samples())
    }
}

/// Streaming detector; call `step` with consecutive sample indices.
#[pyclass(name = "Detector")]
struct Detector {
    state: DetectorState,
}

#[pymethods]
impl Detector {
    #[new]
    fn new(config: PyRef<'_, DetectorConfig>, channels: usize) -> PyResult<Self> {
        Ok(Self {
            state: DetectorState::new(config.inner.clone(), channels).map_err(to_py)?,
        })
    }

    fn step(&mut self, data: PyRef<'_, Dataset>, t: usize) -> PyResult<DetectionRecord> {
        Ok(self.state.step(&data.inner, t).map_err(to_py)?.into())
    }
}

/// Records for every sample from `n + L - 1` on.
#[pyfunction]
fn run(py: Python<'_>, data: PyRef<'_, Dataset>, config: PyRef<'_, DetectorConfig>) -> PyResult<Vec<DetectionRecord>> {
    let (d, c) = (&data.inner, &config.inner);
    let records = py.detach(|| detector::run(d, c)).map_err(to_py)?;
    Ok(records.into_iter().map(Into::into).collect())
}

/// `(eigenvalues, msr)` of the standardized product at sample `t`.
#[pyfunction]
fn spectrum_at(data: PyRef<'_, Dataset>, t: usize, config: PyRef<'_, DetectorConfig>) -> PyResult<(Vec<C64>, f64)> {
    let s = detector::spectrum_at(&data.inner, t, &config.inner).map_err(to_py)?;
    Ok((s.eigenvalues, s.msr))
}

#[pyfunction]
fn t_cdf(x: f64, dof: usize) -> PyResult<f64> {
    if dof == 0 {
        return Err(PyValueError::new_err("dof must be at least 1"));
    }
    Ok(detector::t_cdf(x, dof))
}

/// `(eta_hat, confidence)` for the last value against the whole history.
#[pyfunction]
fn eta_stat(etas: Vec<f64>) -> PyResult<(f64, f64)> {
    if etas.len() < 2 {
        return Err(PyValueError::new_err("need at least two values"));
    }
    Ok(detector::eta_stat(&etas))
}

#[pyfunction]
fn ring_mean_radius(c: f64, depth: usize) -> PyResult<f64> {
    Ok(rmt::ring_mean_radius(&CoreModel::new(c, depth).map_err(to_py)?))
}

/// Eigenvalues of a square complex matrix.
#[pyfunction]
fn eigvals(matrix: Vec<Vec<C64>>) -> PyResult<Vec<C64>> {
    let m = matrix_from_rows(matrix)?;
    Ok(eigen_general(&m, &EigenConfig::values_only()).map_err(to_py)?.values)
}

#[pyfunction]
fn haar_unitary(order: usize, seed: u64) -> PyResult<Vec<Vec<C64>>> {
    if order == 0 {
        return Err(PyValueError::new_err("order must be positive"));
    }
    Ok(matrix_to_rows(&sample_haar_unitary(order, &mut seeded(seed))))
}

/// `(eigenvalues, msr)` of a pipeline run on `depth` real Ginibre windows.
#[pyfunction]
#[pyo3(signature = (p, n, depth = 1, seed = 0))]
fn ginibre_spectrum(py: Python<'_>, p: usize, n: usize, depth: usize, seed: u64) -> PyResult<(Vec<C64>, f64)> {
    let run = py.detach(|| -> rmt_anomaly::Result<_> {
        let mut rng = detector::window_rng(seed, 0);
        let windows: Vec<_> = (0..depth)
            .map(|_| rmt_anomaly::linalg::sample_ginibre(p, n, &mut rng, rmt_anomaly::linalg::Field::Real))
            .collect();
        rmt::analyze_windows(&windows, rmt::DEFAULT_SIGMA_MIN, &mut rng)
    });
    let s = run.map_err(to_py)?;
    Ok((s.eigenvalues, s.msr))
}

/// Eigenvalues of the noise equivalent plus `diag(spikes)`.
#[pyfunction]
#[pyo3(signature = (p, n, spikes, seed = 0))]
fn spiked_spectrum(py: Python<'_>, p: usize, n: usize, spikes: Vec<C64>, seed: u64) -> PyResult<Vec<C64>> {
    let spec = SpikeSpec::new(spikes);
    let out = py.detach(|| -> rmt_anomaly::Result<_> {
        let mut rng = seeded(seed);
        let s = synth::make_signal_plus_noise(p, n, &spec, &mut rng)?;
        let z = s.equivalent(&mut rng)?;
        Ok(eigen_general(&z, &EigenConfig::values_only())?.values)
    });
    out.map_err(to_py)
}

#[pyfunction]
fn product_spike_reference(specs: Vec<Vec<C64>>) -> PyResult<Vec<C64>> {
    let specs: Vec<SpikeSpec> = specs.into_iter().map(SpikeSpec::new).collect();
    synth::product_spike_reference(&specs).map_err(to_py)
}

/// Builds the dataset described by a scenario spec text (key-value format).
/// Returns the dataset and the noise scale gamma.
#[pyfunction]
fn generate_scenario(spec: &str) -> PyResult<(Dataset, f64)> {
    let spec = ScenarioSpec::parse(spec, std::path::Path::new("<spec>")).map_err(to_py)?;
    let s = synth::generate_scenario(&spec).map_err(to_py)?;
    Ok((Dataset { inner: s.dataset }, s.truth.gamma))
}

#[pymodule]
pub fn rmt_anomaly_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", rmt_anomaly::VERSION)?;
    m.add_class::<RingLawModel>()?;
    m.add_class::<DetectorConfig>()?;
    m.add_class::<DetectionRecord>()?;
    m.add_class::<Dataset>()?;
    m.add_class::<Detector>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_at, m)?)?;
    m.add_function(wrap_pyfunction!(t_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(eta_stat, m)?)?;
    m.add_function(wrap_pyfunction!(ring_mean_radius, m)?)?;
    m.add_function(wrap_pyfunction!(eigvals, m)?)?;
    m.add_function(wrap_pyfunction!(haar_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(ginibre_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(spiked_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(product_spike_reference, m)?)?;
    m.add_function(wrap_pyfunction!(generate_scenario, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip() {
        let rows = vec![vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0)], vec![C64::new(3.0, 0.0), C64::new(4.0, 4.0)]];
        assert_eq!(matrix_to_rows(&matrix_from_rows(rows.clone()).unwrap()), rows);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(matrix_from_rows(vec![vec![C64::new(1.0, 0.0)], vec![]]).is_err());
    }

    #[test]
    fn plain_functions() {
        assert!((t_cdf(1.0, 1).unwrap() - 0.75).abs() < 1e-12);
        assert!(t_cdf(1.0, 0).is_err());
        assert!((ring_mean_radius(0.8, 1).unwrap() - 0.758798).abs() < 1e-6);
        let r = product_spike_reference(vec![vec![C64::new(2.0, 0.0)], vec![C64::new(0.0, 1.0)]]).unwrap();
        assert!((r[0] - C64::new(0.0, 2.0)).norm() < 1e-12);
    }
}
