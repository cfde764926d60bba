"""Smoke test for the genkf Python bindings.

Build and install first:
    pip install --no-build-isolation -e crates/genkf-py
"""

import json
import math
import sys

import genkf_py as gk


def check(cond, msg):
    if not cond:
        print(f"FAIL {msg}")
        sys.exit(1)
    print(f"ok   {msg}")


def main():
    check(gk.SCHEMA_VERSION == "1.0", "schema version exposed")

    code, report, text, err = gk.run(["verify", "--grid", "16", "--trials", "20"])
    data = json.loads(report)
    check(code == 0 and err is None, "verify on a 16^2 grid passes")
    check(data["summary"]["failed"] == 0 and len(data["checks"]) >= 40, "verify report lists its checks")
    check("checks passed" in text, "verify text summary")

    code, report, _, _ = gk.run(["solve", "--grid", "16"])
    trace = json.loads(report)["data"]["trace"]
    check(code == 0 and trace["final_residual"] < 1e-8, "line-bundle solve converges")

    code, report, _, err = gk.run(["solve", "--rank", "2"])
    check(code == 2 and report is None and "non-goal" in err, "rank-2 solve is refused")

    code, _, _, err = gk.run(["symbols", "--theta", "0,0"])
    check(code == 2 and "zero covector" in err, "zero covector is an input error")

    rep = json.loads(gk.symbol_exactness(2, 2, [0.3, -0.7, 0.1, 0.5]))
    check(all(rep["exact"]) and rep["alternating_sum"] == 0, "symbol sequence exact at n=2, r=2")

    # Clifford relation e.e = <e,e> on the unit form, n = 1.
    e = [0.5, -1.0, 2.0, 0.25]
    one = [1, 0, 0, 0]
    ee = gk.clifford_act(1, e, gk.clifford_act(1, e, one))
    pair = e[2] * e[0] + e[3] * e[1]
    check(abs(ee[0] - pair) < 1e-12 and max(abs(z) for z in ee[1:]) < 1e-12, "clifford square is the pairing")

    a = [1, 2j, -1, 0.5]
    b = [0.25, 1, 1j, 3]
    check(abs(gk.mukai_pair(1, a, b) + gk.mukai_pair(1, b, a)) < 1e-12, "mukai pairing is antisymmetric at n=1")

    try:
        gk.run(["verify", "--no-such-flag"])
        check(False, "bad flag rejected")
    except ValueError:
        check(True, "bad flag rejected")

    check(math.isfinite(json.loads(gk.run(["curvature", "--grid", "16"])[1])["data"]["lambda"]), "curvature reports lambda")
    print("smoke test passed")


if __name__ == "__main__":
    main()
