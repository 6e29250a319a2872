"""Smoke test for the pysgwave extension.

Build and run:

    cargo build --release -p sgwave-py --features extension-module
    cp target/release/libpysgwave.so python/pysgwave.so
    python3 python/smoke_test.py
"""

import math
import sys

import pysgwave as sg


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b, tol)


def main():
    mu = sg.hat_mu(0.1)
    lo, hi = sg.hat_mu_bounds(0.1)
    assert lo <= mu <= hi
    close(mu, 0.0786602702, 1e-9)

    s = sg.Wave.soliton(0.1, alpha=1.0)
    assert s.family == "soliton"
    close(s.v, 0.0783, 1e-3)
    assert s.balance_residual <= 1e-8
    rows = s.sample(-10.0, 10.0, 41)
    assert len(rows) == 41 and all(b[1] > a[1] for a, b in zip(rows, rows[1:]))
    phi, phi_x, phi_t = s.field(0.3, 1.0)
    close(phi_t, -s.v * phi_x, 1e-12)
    assert 1.9 <= s.residual_report()["observed_order"] <= 2.1

    c = sg.Wave.constant(0.5)
    close(c.phi(1.0, 2.0), -math.pi / 6, 1e-15)
    assert not sg.Wave.constant(0.5, unstable=True).stable

    a = sg.Wave.array(2.0, mu=math.inf)
    close(a.xi_period, 2 * math.pi / math.sqrt(3), 1e-8)
    b = sg.Wave.array(0.5, zm=0.5, helicity=-1)
    assert b.family == "antiarray" and b.v < 0
    assert b.metadata()["periodicity_residual"] <= 1e-8

    h = sg.Wave.half_array(0.1, 0.5 * mu)
    assert h.metadata()["merge"]["decay_rate"] > 0
    assert h.asymptotic_check()["pass"]

    close(sg.velocity_from_mu(sg.mu_from_velocity(0.4, 2.0), 2.0), 0.4, 1e-12)
    rows = sg.bounds_sweep([0.05, 0.5])
    assert all(r["within_bounds"] for r in rows)

    fp = sg.fixed_point(0.1)
    close(fp["mu"], mu, 1e-7)
    close(fp["lambda"], 0.2753, 1e-4)

    assert sg.property_suite(seed=1, cases=10)["suites"][0]["failures"] == 0

    try:
        sg.Wave.array(0.5, mu=math.inf)
    except sg.SgwaveError as e:
        assert e.args[0] == "mu_infinity_requires_gamma_above_one"
    else:
        raise AssertionError("expected SgwaveError")

    try:
        sg.fixed_point(0.2)
    except sg.SgwaveError as e:
        assert e.args[0] == "not_contractive"
    else:
        raise AssertionError("expected SgwaveError")

    print("smoke test passed")


if __name__ == "__main__":
    sys.exit(main())
