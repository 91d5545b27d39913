#!/usr/bin/env python3
"""Exercises the `qbl` extension module against the shipped fixtures.

Build the module first, then run from anywhere:

    cargo build -p qbl-py
    python3 python/smoke_test.py
"""

import importlib.machinery
import importlib.util
import math
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "debug" / "libqbl.so",
        ROOT / "target" / "release" / "libqbl.so",
    ]
    for so in candidates:
        if so.exists():
            loader = importlib.machinery.ExtensionFileLoader("qbl", str(so))
            spec = importlib.util.spec_from_loader("qbl", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("libqbl.so not found; run `cargo build -p qbl-py` first")


qbl = load_module()
fixtures = ROOT / "fixtures"


def close(a, b, tol=1e-6):
    assert abs(a - b) <= tol, f"{a} vs {b}"


# Round trip: the fixture files are stored in canonical serialized form.
text = (fixtures / "two_scalings.qbl").read_text()
datum = qbl.Datum(text)
assert datum.serialize() == text
assert datum.source_dims == [1] and datum.target_dims == [1]
assert datum.alphas == [2] and datum.exponents == ["1/2"]

# Gaussian constant of the (1x, 2x) pair: sqrt(2/5).
est = datum.gaussian_constant()
assert est["status"] == "converged"
close(est["value"], math.sqrt(0.4))

# The scaling identity and both dimension checks on the overlapping pair
# of coordinate projections.
overlap = qbl.Datum.from_file(str(fixtures / "overlapping_projections.qbl"))
scaling = overlap.scaling()
assert scaling["ok"] and scaling["lhs"] == "3" == scaling["rhs"]

per_arrow = overlap.check_dimension("per-arrow")
assert per_arrow["status"] == "violated"
assert per_arrow["witness"] == [[["1"], ["0"], ["0"]]]
assert per_arrow["witness_lhs"] == "1" and per_arrow["witness_rhs"] == "3/4"

joint = overlap.check_dimension("cd")
assert joint["status"] == "holds-on-searched-lattice"
assert overlap.gaussian_constant()["status"] == "converged"
close(overlap.gaussian_constant()["value"], 2.0 * (2.0 / 3.0) ** 1.5)

# The violated count drives a blow-up with exact exponent 1/4.
radii = [10.0 ** (2.0 + 0.5 * k) for k in range(9)]
growth = overlap.counterexample(per_arrow["witness_json"], radii)
assert growth["containment_verified"]
assert growth["expected_slope"] == "1/4"
close(growth["fitted_slope"], 0.25, tol=0.01)

# Closed form for the convolution triple at p = (3/2, 3/2, 3/2).
close(qbl.young_closed_form(["2/3", "2/3", "2/3"], 1), math.sqrt(3.0) / 2.0, tol=1e-12)

# Identity Gaussians on the coordinate-projection pair: the exact ratio 1.
pair = qbl.Datum.from_file(str(fixtures / "fubini.qbl"))
assert qbl.ratio_gaussian(pair, [[[1.0]], [[1.0]]])["ratio"] == 1.0

# Sandwich bracket around the duplicated functional.
cs = qbl.Datum.from_file(str(fixtures / "cauchy_schwarz.qbl"))
bracket = cs.sandwich()
close(bracket["bl"], 1.0)
assert bracket["alphas"] == [2]
close(bracket["lower"], 0.25)
close(bracket["upper"], 1.0)

# Splitting separates independent sources.
fan = qbl.Datum.from_file(str(fixtures / "two_source_fan.qbl"))
parts = fan.split()
assert len(parts) == 2
assert all(p.num_sources == 1 for p in parts)
close(parts[0].subspace_constant()["value"], 1.0)

# Exact box-chain oracle and its Monte Carlo cross-check.
chain = qbl.ratio_boxes_chain(10)
assert chain["lhs_exact"] == "109"
assert chain["area_exact"] == "19"
assert chain["rhs_squared_exact"] == "6859"
close(chain["ratio"], 109.0 / 19.0 ** 1.5, tol=1e-9)

mc = qbl.ratio_monte_carlo_cross(overlap, 10, 200_000, 0)
assert abs(mc["ratio"] - chain["ratio"]) <= 4.0 * mc["stderr"]

# Power-law ratio beats the Gaussian optimum exactly when |b1| != |b2|.
power = qbl.ratio_powerlaw(1.0, 2.0, 1.001)
close(power["ratio"], 1.0 / math.sqrt(2.0), tol=0.01)
assert power["ratio"] > est["value"]

# Bad input surfaces as ValueError, not a crash.
try:
    qbl.Datum("{ not json")
except ValueError:
    pass
else:
    raise AssertionError("malformed text must raise ValueError")

print("smoke test passed")
