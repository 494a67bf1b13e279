use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

fn with_module(code: &str) {
    Python::initialize();
    Python::attach(|py| {
        let m = wrap_pymodule!(rmt_anomaly_py::rmt_anomaly_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("rm", m).unwrap();
        let code = std::ffi::CString::new(code).unwrap();
        py.run(&code, Some(&globals), None).unwrap();
    });
}

#[test]
fn module_exposes_detector_and_ring_law() {
    with_module(
        r#"
assert abs(rm.ring_mean_radius(0.8, 1) - 0.758798) < 1e-6
m = rm.RingLawModel(0.8, 2)
assert abs(m.inner_radius - 0.2) < 1e-12
cfg = rm.DetectorConfig(window=30, depth=1, history=10, seed=3)
ds = rm.Dataset.from_values([[float((i * 7 + j * 13) % 11) for j in range(60)] for i in range(6)])
recs = rm.run(ds, cfg)
assert recs[0].t == 30
assert all(r.msr > 0 for r in recs)
"#,
    );
}

#[test]
fn errors_become_python_exceptions() {
    with_module(
        r#"
try:
    rm.RingLawModel(1.5, 1)
except ValueError:
    pass
else:
    raise AssertionError("expected ValueError")
"#,
    );
}
