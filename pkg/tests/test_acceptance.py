"""Acceptance suite: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import math
import os
import statistics
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

from conftest import EXAMPLE, basis, ghz  # noqa: E402
from limqsp.circuit import counts  # noqa: E402
from limqsp.dd import build_from_statevector, stats  # noqa: E402
from limqsp.iso import GroupKind  # noqa: E402
from limqsp.simulator import (  # noqa: E402
    fidelity_up_to_phase,
    random_cliffordT_state,
    random_product_state,
    run_main,
)
from limqsp.synth import (  # noqa: E402
    baseline_ucr_with_blocks,
    prepare_state,
    state_pre_1,
    state_pre_2,
    state_pre_3,
    state_pre_4,
)

ALGOS = [("noanc", None), ("one", None), ("full", None), ("budget", 4)]
PROPERTY_MODULES = ["test_lim.py", "test_iso.py", "test_dd.py", "test_circuit.py", "test_transpile.py",
                    "test_simulator.py", "test_synth.py", "test_cli.py"]


def _report(num, title, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title} ({detail})")
    return ok


def criterion_1():
    t = time.perf_counter()
    s = stats(build_from_statevector(EXAMPLE, 3, GroupKind.XP))
    dt = time.perf_counter() - t
    ok = s.total_nodes == 6 and s.reduced_paths == 3 and dt < 1
    return ok, f"total_nodes={s.total_nodes} reduced_paths={s.reduced_paths} in {dt:.3f}s"


def criterion_2():
    t = time.perf_counter()
    dd = build_from_statevector(EXAMPLE)
    worst = 1.0
    for c in (state_pre_1(dd), state_pre_2(dd), state_pre_3(dd), state_pre_4(dd, 4)):
        out, leak = run_main(c, EXAMPLE)
        worst = min(worst, abs(out[0]) - leak)
    dt = time.perf_counter() - t
    return worst >= 1 - 1e-10 and dt < 1, f"worst fidelity {worst:.12f} in {dt:.3f}s"


def criterion_3():
    t = time.perf_counter()
    worst, cases = 1.0, 0
    for n in range(2, 11):
        for seed in range(20):
            psi = random_cliffordT_state(n, None, seed)
            for group in GroupKind:
                for algo, m in ALGOS:
                    c = prepare_state(psi, algo, m, group)
                    out, leak = run_main(c, basis(n))
                    worst = min(worst, fidelity_up_to_phase(out, psi) - leak)
                    cases += 1
    dt = time.perf_counter() - t
    return worst >= 1 - 1e-8 and dt < 300, f"{cases} cases, worst fidelity {worst:.12f} in {dt:.1f}s"


def criterion_4():
    n = 12
    rng = np.random.default_rng(2024)
    worst = [0, 0, 0]
    for _ in range(50):
        by = counts(state_pre_1(build_from_statevector(random_product_state(n, rng)))).by_arity
        worst[0] = max(worst[0], by.get(1, 0))
        worst[1] = max(worst[1], by.get(2, 0))
        worst[2] = max(worst[2], sum(v for k, v in by.items() if k > 2))
    ok = worst[0] <= 2 * n and worst[1] <= n * (n - 1) // 2 and worst[2] == 0
    return ok, f"max single={worst[0]}/{2 * n} two={worst[1]}/{n * (n - 1) // 2} higher={worst[2]}"


def criterion_5():
    bad, cases = [], 0
    for n in range(4, 11):
        for seed in range(20):
            dd = build_from_statevector(random_cliffordT_state(n, None, seed))
            m = stats(dd).non_terminal
            by = counts(state_pre_3(dd)).by_arity
            cases += 1
            if not (by.get(3, 0) <= (3 * n + 4) * m and by.get(2, 0) <= m and by.get(1, 0) <= n and max(by) <= 3):
                bad.append((n, seed))
    return not bad, f"{cases} instances, violations {bad[:5]}"


def criterion_6():
    bad = []
    for n in range(4, 17):
        for group in (GroupKind.XP, GroupKind.PAULI):
            dd = build_from_statevector(ghz(n), n, group)
            s = stats(dd)
            size = len(state_pre_1(dd).gates)
            if s.total_nodes != n + 1 or s.reduced_paths != 1 or size > 4 * n:
                bad.append((n, group.value, s.total_nodes, s.reduced_paths, size))
    return not bad, f"n=4..16, violations {bad[:5]}"


def criterion_7():
    t = time.perf_counter()
    n = 12
    multi, blocks = [], []
    for seed in range(20):
        psi = random_cliffordT_state(n, None, seed)
        multi.append(counts(state_pre_1(build_from_statevector(psi))).multi_qubit)
        blocks.append(baseline_ucr_with_blocks(psi).blocks)
    med = statistics.median(multi)
    dt = time.perf_counter() - t
    ok = min(blocks) >= 2**n - 1 and 20 * med <= min(blocks) and dt < 120
    ratio = min(blocks) / med if med else math.inf
    return ok, f"median multi-qubit {med}, baseline blocks {min(blocks)}, ratio {ratio:.0f}x in {dt:.1f}s"


def criterion_8():
    cmd = [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", "-rf"]
    cmd += [str(HERE / m) for m in PROPERTY_MODULES]
    r = subprocess.run(cmd, capture_output=True, text=True, cwd=HERE.parent, env={**os.environ})
    tail = r.stdout.strip().splitlines()
    failed = [ln.split(" - ")[0].replace("FAILED ", "") for ln in tail if ln.startswith("FAILED")]
    summary = tail[-1] if tail else r.stderr.strip()[-200:]
    return r.returncode == 0, summary + (f"; failing: {', '.join(failed)}" if failed else "")


CRITERIA = [
    (1, "golden worked example", criterion_1),
    (2, "worked-example circuits", criterion_2),
    (3, "round-trip preparation", criterion_3),
    (4, "tower-form bound", criterion_4),
    (5, "full-ancilla gate bounds", criterion_5),
    (6, "GHZ compression", criterion_6),
    (7, "baseline comparison at n=12", criterion_7),
    (8, "property suites", criterion_8),
]


@pytest.mark.parametrize("num,title,fn", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, title, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print()
        _report(num, title, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    results = [_report(num, title, *fn()) for num, title, fn in CRITERIA]
    sys.exit(0 if all(results) else 1)
