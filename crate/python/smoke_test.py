#!/usr/bin/env python3
"""Smoke test for the mtc_detect_py extension module.

Builds the cdylib if needed, imports it from the cargo target directory,
and checks a few known-answer values plus sweep determinism.
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent


def load_module():
    so = REPO_ROOT / "target" / "debug" / "libmtc_detect_py.so"
    if not so.exists():
        subprocess.run(
            ["cargo", "build", "-p", "mtc-detect-py"], cwd=REPO_ROOT, check=True
        )
    # Python wants the module file named exactly mtc_detect_py.so
    stage = Path(tempfile.mkdtemp(prefix="mtc-detect-py-"))
    shutil.copy(so, stage / "mtc_detect_py.so")
    sys.path.insert(0, str(stage))
    import mtc_detect_py

    return mtc_detect_py


def main():
    m = load_module()

    # activity profile: lambda = ln((1 - p) * |A| / p); p = 0.2, |A| = 4 -> ln 16
    profile = m.make_activity_profile([0.2, 0.5], 4)
    assert abs(profile.lambdas[0] - math.log(16.0)) < 1e-12, profile.lambdas
    assert abs(profile.lambdas[1] - math.log(4.0)) < 1e-12, profile.lambdas
    assert profile.p == [0.2, 0.5]

    # quantization over the zero-augmented QPSK alphabet
    s = math.sqrt(0.5)
    point, dist = m.quantize(0.1 + 0.05j)
    assert point == 0 and abs(dist - abs(0.1 + 0.05j)) < 1e-12
    point, dist = m.quantize(0.9 + 0.8j)
    assert abs(point - (s + s * 1j)) < 1e-12
    point, _ = m.quantize(-0.6 + 0.7j)
    assert abs(point - (-s + s * 1j)) < 1e-12

    # reliability radius: 1/lambda near zero, 1 - 1/lambda otherwise
    lam = math.log(16.0)
    assert abs(m.sac_threshold(lam, True) - 1.0 / lam) < 1e-12
    assert abs(m.sac_threshold(lam, False) - (1.0 - 1.0 / lam)) < 1e-12
    assert m.sac_threshold(-1.0, True) == 1.0
    assert m.sac_threshold(-1.0, False) == 0.0

    # closed-form complexity counts
    low, high = m.table1_count("mmse", 128, 64)
    assert low == high == 49281.0
    low, high = m.table1_count("aa-mf-sic", 128, 64)
    assert high == low + 10 * 128 * 128
    try:
        m.table1_count("smap-oracle", 4, 4)
        raise AssertionError("smap-oracle should have no closed-form entry")
    except ValueError:
        pass

    # single-shot detection on a noiseless identity channel
    h = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]]
    x = [s + s * 1j, 0, -s - s * 1j]
    y = [x[0], x[1], x[2], 0]
    for detector in ["mmse", "ordered-sa-sic", "sa-sic-asqrd", "aa-mf-sic", "k-best"]:
        r = m.detect(detector, y, h, [0.2, 0.2, 0.2], 200.0)
        assert r["x_hat"] == x, (detector, r["x_hat"])
        assert r["complex_mult_count"] > 0
    r = m.detect("oracle-mmse", y, h, [0.2, 0.2, 0.2], 200.0, active_set=[0, 2])
    assert r["x_hat"] == x

    # Monte Carlo sweep: deterministic rows for a fixed spec
    spec = {
        "n_devices": 8,
        "spreading": 4,
        "detectors": ["ordered-sa-sic", "aa-mf-sic"],
        "axis_name": "snr_db",
        "points": [
            {"axis_value": 16.0, "snr_db": 16.0, "csi_error_var": 0.0, "fixed_p": None}
        ],
        "trials": 50,
        "master_seed": 42,
        "nser_mode": "active_only",
        "p_redraw": "per_experiment",
        "p_range": [0.1, 0.3],
        "kbest_k": 4,
        "mf_candidates": 5,
    }
    a = json.loads(m.run_sweep(json.dumps(spec)))
    b = json.loads(m.run_sweep(json.dumps(spec)))
    assert a["rows"] == b["rows"]
    assert len(a["rows"]) == 2
    for row in a["rows"]:
        assert row["trials"] > 0
        assert 0.0 <= row["nser"] <= 1.0
        assert row["symbol_errors"] <= row["active_symbols"]

    print("smoke test passed")


if __name__ == "__main__":
    main()
