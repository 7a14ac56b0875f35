"""Smoke test for the qaixi_py extension module.

Build and run from the repository root:

    cargo build --release -p qaixi-python --features extension-module
    cp target/release/libqaixi_py.so python/qaixi_py.so
    PYTHONPATH=python python3 python/smoke_test.py
"""

import json
import math
import tempfile

import qaixi_py as q


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    plus = q.DensityOperator([[0.5, 0.5], [0.5, 0.5]])
    zero = q.DensityOperator.basis(2, 0)
    mixed = q.DensityOperator.maximally_mixed(2)
    assert close(plus.purity(), 1.0)
    assert close(q.trace_distance(zero, mixed), 0.5)
    assert close(q.relative_entropy(zero, mixed), math.log(2))
    assert math.isinf(q.relative_entropy(mixed, zero))
    joint = zero.tensor(plus)
    assert joint.dims == [2, 2]
    assert close(q.trace_distance(joint.partial_trace([1]), plus), 0.0)

    chsh = q.builtin_class("chsh")
    quantum = chsh[0]
    win = sum(
        sum(p for k, p in enumerate(quantum.distribution(a)) if (k in (0, 3)) != (a == "x1y1"))
        for a in quantum.action_ids()
    ) / 4
    assert close(win, math.cos(math.pi / 8) ** 2)
    assert q.lhv_max_win_rate() == 0.75

    again = q.Environment.from_json(quantum.to_json())
    assert again.name == quantum.name

    mix = q.Mixture(q.builtin_class("converge"))
    assert close(sum(mix.weights()), 1.0)
    g, d0 = mix.gap("coin-p050")
    assert close(g, 3.5)
    mix = mix.update("observe", 0)
    assert close(sum(mix.weights()), 1.0)

    sure = q.Mixture(q.builtin_class("deterministic"))
    assert close(q.plan_value(sure, 3, 0.5), 1.75)
    action, qs = q.plan(sure, 3, 0.5)
    assert action == qs[0][0]

    colourable, assignments = q.ks_check()
    assert not colourable and assignments == 0

    with tempfile.TemporaryDirectory() as out:
        report = json.loads(q.run("converge", 7, out, episodes=10, cycles=50))
        assert report["violations"] == 0

    try:
        q.plan(sure, 7, 0.5)
    except RuntimeError:
        pass
    else:
        raise AssertionError("horizon 7 should be rejected")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
