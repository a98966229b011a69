use pyo3::prelude::*;
use pyo3::types::PyDict;

use gpswf_py::gpswf_py as gpswf_py_module;

#[test]
fn module_round_trip() {
    pyo3::append_to_inittab!(gpswf_py_module);
    Python::initialize();
    Python::attach(|py| {
        let locals = PyDict::new(py);
        py.run(
            cr#"
import json, gpswf_py
b = gpswf_py.Basis(0.0, 2.0, 6)
sp = gpswf_py.spectrum(b)
lam = [e["lambda"] for e in sp]
ok = all(p > q for p, q in zip(lam, lam[1:]))
same = gpswf_py.Basis.from_bytes(b.to_bytes()) == b
p = gpswf_py.project(b, json.dumps({"kind": "jacobi_mode", "k": 0, "alpha": 0.0}), 6)
try:
    gpswf_py.Basis(0.0, -1.0, 3)
    raised = False
except ValueError:
    raised = True
"#,
            None,
            Some(&locals),
        )
        .unwrap();
        for key in ["ok", "same", "raised"] {
            let v: bool = locals.get_item(key).unwrap().unwrap().extract().unwrap();
            assert!(v, "{key}");
        }
    });
}
