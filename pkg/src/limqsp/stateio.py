"""JSON state files: dense ``amplitudes`` or sparse ``entries`` keyed by bitstring."""

from __future__ import annotations

import json

import numpy as np


class StateFileError(ValueError):
    pass


def _complex(pair) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise StateFileError(f"amplitude must be [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def parse_state(data: dict) -> np.ndarray:
    if not isinstance(data, dict):
        raise StateFileError("state file must hold a JSON object")
    fmt = data.get("format", "dense")
    if fmt == "dense":
        if "amplitudes" not in data:
            raise StateFileError("dense state needs 'amplitudes'")
        amps = np.array([_complex(p) for p in data["amplitudes"]], dtype=complex)
        n = data.get("num_qubits")
        size = len(amps)
        if size == 0 or size & (size - 1):
            raise StateFileError(f"{size} amplitudes is not a power of two")
        if n is not None and 1 << int(n) != size:
            raise StateFileError(f"num_qubits={n} does not match {size} amplitudes")
        return amps
    if fmt == "sparse":
        entries = data.get("entries")
        if entries is None:
            raise StateFileError("sparse state needs 'entries'")
        n = data.get("num_qubits")
        if n is None:
            if not entries:
                raise StateFileError("empty sparse state needs 'num_qubits'")
            n = len(entries[0][0])
        amps = np.zeros(1 << int(n), dtype=complex)
        for bits, val in entries:
            if len(bits) != int(n) or set(bits) - {"0", "1"}:
                raise StateFileError(f"bad basis label {bits!r}")
            amps[int(bits, 2) if bits else 0] += _complex(val)
        return amps
    raise StateFileError(f"unknown state format {fmt!r}")


def load_state(path: str) -> np.ndarray:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StateFileError(f"{path}: {exc}") from exc
    return parse_state(data)


def dump_state(amps, sparse: bool = False) -> str:
    amps = np.asarray(amps, dtype=complex)
    n = len(amps).bit_length() - 1
    if sparse:
        entries = [
            [format(k, f"0{n}b") if n else "", [float(a.real), float(a.imag)]]
            for k, a in enumerate(amps)
            if a != 0
        ]
        return json.dumps({"num_qubits": n, "format": "sparse", "entries": entries})
    return json.dumps(
        {"num_qubits": n, "format": "dense", "amplitudes": [[float(a.real), float(a.imag)] for a in amps]}
    )
