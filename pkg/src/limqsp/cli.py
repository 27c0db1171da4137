"""Command line: ``synth``, ``bench`` and ``inspect``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, CircuitError, counts, from_json, inverse, to_json, to_qasm
from .dd import StateFormatError, ZeroStateError, build_from_statevector, stats, to_dot
from .iso import GroupKind
from .simulator import SimulationError, random_cliffordT_state, run_main, verify_cap
from .stateio import StateFileError, load_state
from .synth import SynthesisError, baseline_ucr_with_blocks, disentangle, residual_scalar
from .transpile import transpile

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
FIDELITY_TOL = 1e-8

BENCH_COLUMNS = [
    "n", "sample", "seed", "algo", "group",
    "total_nodes", "non_terminal", "branch_nodes", "reduced_paths",
    "ancillas", "pre_gates", "pre_arity1", "pre_arity2", "pre_arity3plus", "pre_depth",
    "post_cx", "post_single", "post_depth",
    "synth_ms", "transpile_ms", "fidelity", "status",
    "baseline_blocks", "baseline_gates",
]


class UsageError(Exception):
    pass


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def preparation_fidelity(circ: Circuit, psi: np.ndarray) -> float:
    """Fidelity of ``circ |anc_init>|0>`` with ``|anc_init>|psi>``."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    zero = np.zeros(1 << circ.n, dtype=complex)
    zero[0] = 1
    out, _ = run_main(circ, zero)
    return float(min(1.0, abs(np.vdot(psi, out))))


def _parse_algo(spec: str) -> tuple[str, int | None]:
    if ":" in spec:
        name, m = spec.split(":", 1)
        if name != "budget":
            raise UsageError(f"only budget takes an ancilla count: {spec!r}")
        try:
            k = int(m)
        except ValueError as exc:
            raise UsageError(f"bad ancilla count in {spec!r}") from exc
        if k < 1:
            raise UsageError("budget needs at least 1 ancilla")
        return name, k
    if spec not in ("noanc", "one", "full", "budget"):
        raise UsageError(f"unknown algorithm {spec!r}")
    if spec == "budget":
        raise UsageError("budget needs an ancilla count, e.g. budget:4")
    return spec, None


def synthesize(psi: np.ndarray, algo: str, m: int | None, group: GroupKind):
    """Build, disentangle and invert; returns (diagram, preparation circuit)."""
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ZeroStateError("state vector is zero")
    dd = build_from_statevector(psi / norm, None, group)
    dis = disentangle(dd, algo, m)
    res = residual_scalar(dd)
    if abs(abs(res) - 1) > 1e-9:
        raise SynthesisError(f"residual scalar {res} does not have modulus 1")
    return dd, inverse(dis)


def cmd_synth(args: argparse.Namespace) -> int:
    if args.ancillas is not None and args.algo != "budget":
        return _fail(EXIT_USAGE, "--ancillas is only valid with --algo budget")
    if args.algo == "budget" and (args.ancillas is None or args.ancillas < 1):
        return _fail(EXIT_USAGE, "--algo budget needs --ancillas K with K >= 1")
    try:
        psi = load_state(args.input)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    except StateFileError as exc:
        return _fail(EXIT_IO, f"{args.input}: {exc}")
    n = len(psi).bit_length() - 1
    try:
        cap = verify_cap()
    except SimulationError as exc:
        return _fail(EXIT_USAGE, str(exc))
    if args.verify and n > cap:
        return _fail(EXIT_USAGE, f"--verify on {n} qubits exceeds the cap of {cap} (QSP_VERIFY_CAP)")
    try:
        dd, circ = synthesize(psi, args.algo, args.ancillas, GroupKind.parse(args.group))
    except (ZeroStateError, StateFormatError) as exc:
        return _fail(EXIT_IO, f"{args.input}: {exc}")
    tcirc = transpile(circ) if (args.transpile or args.qasm) else None
    out = tcirc if args.transpile else circ
    text = to_json(out)
    try:
        with open(args.output, "w") as fh:
            fh.write(text)
        if args.qasm:
            with open(args.qasm, "w") as fh:
                fh.write(to_qasm(tcirc))
        if args.stats:
            st = stats(dd).as_dict()
            st.update(num_qubits=dd.num_qubits, group=dd.group.value)
            pre = counts(circ)
            st["gates"] = {str(k): v for k, v in pre.by_arity.items()}
            st["depth"] = pre.depth
            st["ancillas"] = circ.ancillas
            with open(args.stats, "w") as fh:
                json.dump(st, fh, indent=2)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    c = counts(out)
    print(f"gates {c.total} depth {c.depth} ancillas {out.ancillas} by_arity {json.dumps(c.by_arity)}")
    if args.verify:
        fid = preparation_fidelity(from_json(text), psi)
        print(f"fidelity {fid:.12f}")
        if fid < 1 - FIDELITY_TOL:
            return _fail(EXIT_VERIFY, "verification failed")
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    try:
        psi = load_state(args.input)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    except StateFileError as exc:
        return _fail(EXIT_IO, f"{args.input}: {exc}")
    try:
        dd = build_from_statevector(psi, None, GroupKind.parse(args.group))
    except (ZeroStateError, StateFormatError) as exc:
        return _fail(EXIT_IO, f"{args.input}: {exc}")
    st = stats(dd)
    report = {"num_qubits": dd.num_qubits, "group": dd.group.value, **st.as_dict()}
    print(json.dumps(report))
    if args.dot:
        try:
            with open(args.dot, "w") as fh:
                fh.write(to_dot(dd))
        except OSError as exc:
            return _fail(EXIT_IO, str(exc))
    return EXIT_OK


@dataclass(frozen=True)
class _BenchTask:
    n: int
    sample: int
    seed: int
    depth: int | None
    algos: tuple[tuple[str, int | None], ...]
    group: str
    baseline: bool
    transpile: bool
    timings: bool
    cap: int


def _sample_seed(seed: int, n: int, sample: int) -> int:
    return int(np.random.SeedSequence([seed, n, sample]).generate_state(1)[0])


def _bench_rows(task: _BenchTask) -> list[dict]:
    psi = random_cliffordT_state(task.n, task.depth, task.seed)
    group = GroupKind.parse(task.group)
    base_blocks = base_gates = ""
    if task.baseline:
        ucr = baseline_ucr_with_blocks(psi)
        base_blocks, base_gates = ucr.blocks, len(ucr.circuit.gates)
    rows = []
    for algo, m in task.algos:
        t0 = time.perf_counter()
        dd, circ = synthesize(psi, algo, m, group)
        synth_ms = (time.perf_counter() - t0) * 1e3
        st = stats(dd)
        pre = counts(circ)
        row = {
            "n": task.n, "sample": task.sample, "seed": task.seed,
            "algo": algo if m is None else f"{algo}:{m}", "group": group.value,
            **st.as_dict(),
            "ancillas": circ.ancillas,
            "pre_gates": pre.total,
            "pre_arity1": pre.by_arity.get(1, 0),
            "pre_arity2": pre.by_arity.get(2, 0),
            "pre_arity3plus": sum(v for k, v in pre.by_arity.items() if k >= 3),
            "pre_depth": pre.depth,
            "post_cx": "", "post_single": "", "post_depth": "",
            "synth_ms": f"{synth_ms:.3f}" if task.timings else "",
            "transpile_ms": "",
            "baseline_blocks": base_blocks, "baseline_gates": base_gates,
        }
        if task.transpile:
            t0 = time.perf_counter()
            tc = transpile(circ)
            t_ms = (time.perf_counter() - t0) * 1e3
            post = counts(tc)
            row.update(post_cx=post.by_arity.get(2, 0), post_single=post.by_arity.get(1, 0), post_depth=post.depth)
            if task.timings:
                row["transpile_ms"] = f"{t_ms:.3f}"
        if task.n <= task.cap:
            fid = preparation_fidelity(circ, psi)
            row["fidelity"] = f"{fid:.12f}"
            row["status"] = "ok" if fid >= 1 - FIDELITY_TOL else "failed"
        else:
            row["fidelity"], row["status"] = "", "unverified"
        rows.append(row)
    return rows


def _parse_range(text: str) -> range:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            return range(int(a), int(b) + 1)
        return range(int(text), int(text) + 1)
    except ValueError as exc:
        raise UsageError(f"bad qubit range {text!r}") from exc


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        qubits = _parse_range(args.qubits)
        algos = tuple(_parse_algo(a.strip()) for a in args.algos.split(",") if a.strip())
        cap = verify_cap()
    except (UsageError, SimulationError) as exc:
        return _fail(EXIT_USAGE, str(exc))
    if not algos or len(qubits) == 0 or qubits.start < 1 or args.samples < 1:
        return _fail(EXIT_USAGE, "need at least one algorithm, sample and qubit count >= 1")
    tasks = [
        _BenchTask(n, s, _sample_seed(args.seed, n, s), args.depth, algos, args.group,
                   args.baseline, args.transpile, args.timings, cap)
        for n in qubits
        for s in range(args.samples)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            batches = list(pool.map(_bench_rows, tasks))
    else:
        batches = [_bench_rows(t) for t in tasks]
    rows = [r for b in batches for r in b]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    try:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    for n in qubits:
        for algo, m in algos:
            name = algo if m is None else f"{algo}:{m}"
            sel = [r for r in rows if r["n"] == n and r["algo"] == name]
            med = statistics.median(r["pre_gates"] for r in sel)
            multi = statistics.median(r["pre_arity2"] + r["pre_arity3plus"] for r in sel)
            print(f"n={n} algo={name} median_gates={med} median_multi_qubit={multi}")
    failed = sum(1 for r in rows if r["status"] == "failed")
    if failed:
        return _fail(EXIT_VERIFY, f"{failed} records failed verification")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="limqsp", description="State preparation from LIM decision diagrams.")
    sub = p.add_subparsers(dest="command", required=True)
    groups = ["scalar", "pauli", "xp"]

    s = sub.add_parser("synth", help="synthesize a preparation circuit")
    s.add_argument("--input", required=True)
    s.add_argument("--algo", required=True, choices=["noanc", "one", "full", "budget"])
    s.add_argument("--ancillas", type=int)
    s.add_argument("--group", default="xp", choices=groups)
    s.add_argument("--transpile", action="store_true")
    s.add_argument("--verify", action="store_true")
    s.add_argument("--output", required=True)
    s.add_argument("--qasm")
    s.add_argument("--stats")
    s.set_defaults(func=cmd_synth)

    b = sub.add_parser("bench", help="benchmark on random Clifford+T states")
    b.add_argument("--qubits", required=True, help="range A..B")
    b.add_argument("--samples", type=int, default=20)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--depth", type=int, help="circuit depth of each random state (default 3n)")
    b.add_argument("--algos", default="noanc,one,full,budget:4")
    b.add_argument("--group", default="xp", choices=groups)
    b.add_argument("--baseline", action="store_true")
    b.add_argument("--transpile", action="store_true")
    b.add_argument("--timings", action="store_true", help="fill the wall-clock columns")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bench)

    i = sub.add_parser("inspect", help="print diagram statistics")
    i.add_argument("--input", required=True)
    i.add_argument("--group", default="xp", choices=groups)
    i.add_argument("--dot")
    i.set_defaults(func=cmd_inspect)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (CircuitError, SynthesisError) as exc:
        return _fail(EXIT_USAGE, str(exc))


if __name__ == "__main__":
    sys.exit(main())
