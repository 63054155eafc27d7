use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

fn run(code: &std::ffi::CStr) {
    Python::attach(|py| {
        let m = wrap_pymodule!(shiftlab_py::shiftlab_module)(py);
        let g = PyDict::new(py);
        g.set_item("shiftlab", m).unwrap();
        py.run(code, Some(&g), None)
            .map_err(|e| e.display(py))
            .unwrap();
    });
}

#[test]
fn weights_and_composition() {
    run(c"
from fractions import Fraction
s = shiftlab.Space.classic(2)
assert s.kind == 'classic_bargmann' and s.p == 2
assert s.weight(1) is None
# ω_{2,2} = ω_2 ω_1² ω_0² = √3 · 2 · 1
assert abs(float(s.weight(2)) - 2 * 3 ** 0.5) < 1e-15
w = s.weights(2, 6, digits=30)
assert len(w) == 5 and all(float(a) < float(b) for a, b in zip(w, w[1:]))
");
}

#[test]
fn certify_returns_certificate_json() {
    run(c"
import json
c = json.loads(shiftlab.certify(shiftlab.Space.classic(1), 'hyp3', lambda_abs='2', hi=5000))
assert c['verdict'] == 'pass' and c['threshold_n0'] >= 3
t = json.loads(shiftlab.certify(shiftlab.Space.theta('2pi', '0'), 'hyp3', gamma='theta_geometric', beta_prime='3', hi=500))
assert t['verdict'] == 'pass'
try:
    shiftlab.certify(shiftlab.Space.classic(1), 'hyp9')
    raise AssertionError('accepted unknown hypothesis')
except ValueError:
    pass
");
}

#[test]
fn recurrence_and_periodic_points() {
    run(c"
u = shiftlab.solve_recurrence(shiftlab.Space.classic(1), 0.5 + 0.25j, 30)
assert len(u) == 31 and u[0] == 1
coeffs, residual, exact = shiftlab.periodic_point_hp(shiftlab.Space.disk('3/2', 1), 2, 3, 20)
assert exact is True and residual < 1e-40 and coeffs[1] == 1, (exact, residual, coeffs[:3])
v = shiftlab.basis_inner_product(shiftlab.Space.generalized('3'), 4, 4)
assert abs(v - 1) < 1e-12
try:
    shiftlab.Space.disk('1/2')
    raise AssertionError('accepted nu = 1/2')
except ValueError:
    pass
");
}
