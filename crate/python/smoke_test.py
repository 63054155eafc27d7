"""Smoke test for the shiftlab extension module.

Build and install it first:

    pip install maturin
    pip install --no-build-isolation ./crates/py
"""

import json
import math
import sys

import shiftlab


def check(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'} {name} {detail}".rstrip())
    return ok


def main():
    results = []

    s = shiftlab.Space.classic(1)
    w = [float(x) for x in s.weights(1, 5, digits=30)]
    # ω_{n,1} = ω_n ω_{n-1}² with ω_n = √(n+1)
    want = [math.sqrt(n + 1) * n for n in range(1, 6)]
    results.append(check("classic p=1 weights", all(abs(a - b) < 1e-12 * b for a, b in zip(w, want))))

    c = json.loads(shiftlab.certify(s, "hyp3", lambda_abs="1", hi=5000))
    results.append(check("classic p=1 Hyp3", c["verdict"] == "pass", f"threshold_n0={c.get('threshold_n0')}"))

    t = json.loads(
        shiftlab.certify(shiftlab.Space.theta("2pi", "0"), "hyp3", gamma="theta_geometric", beta_prime="3", hi=500)
    )
    results.append(check("theta p=0 Hyp3", t["verdict"] == "pass"))

    # u_2 = λ/w_1
    u = shiftlab.solve_recurrence(s, 0.5j, 10)
    w1 = float(s.weight(1))
    results.append(check("recurrence start", abs(u[1] - 0.5j / w1) < 1e-15))

    coeffs, residual, exact = shiftlab.periodic_point_hp(shiftlab.Space.disk("3/2", 1), 2, 3, 20)
    results.append(check("disk periodic point", exact is True, f"residual={residual:.1e}"))

    v = shiftlab.basis_inner_product(shiftlab.Space.generalized("3"), 5, 5)
    results.append(check("generalized beta=3 norm", abs(v - 1) < 1e-12, f"{abs(v - 1):.1e}"))

    try:
        shiftlab.Space.disk("1/2")
        results.append(check("disk nu=1/2 rejected", False))
    except ValueError:
        results.append(check("disk nu=1/2 rejected", True))

    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
