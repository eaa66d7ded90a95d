"""Serialization: the JSON system schema and self-describing CSV files.

Complex numbers are carried as [re, im] pairs. CSV outputs start with one
``#``-prefixed line holding a JSON header (full parameters, seed, library
version) so every file documents the run that produced it without sidecar
files.
"""

from __future__ import annotations

import json

import numpy as np

from .models import MultiChannelSystem
from .spectral import QuantumSystem

__all__ = [
    "system_to_dict",
    "system_from_dict",
    "load_system",
    "save_system",
    "write_csv",
    "read_csv",
    "write_json",
    "read_json",
]


def _complex_to_pairs(array: np.ndarray):
    arr = np.asarray(array, dtype=complex)
    stacked = np.stack([arr.real, arr.imag], axis=-1)
    return stacked.tolist()


def _pairs_to_complex(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def system_to_dict(system) -> dict:
    """JSON-ready dict for a QuantumSystem or MultiChannelSystem."""
    out = {
        "hamiltonian": _complex_to_pairs(system.hamiltonian),
        "gamma": system.gamma,
    }
    if isinstance(system, MultiChannelSystem):
        out["channels"] = _complex_to_pairs(system.channels)
    else:
        out["decay_state"] = _complex_to_pairs(system.decay_state)
    return out


def system_from_dict(data: dict):
    """Inverse of ``system_to_dict``; channel presence picks the type."""
    hamiltonian = _pairs_to_complex(data["hamiltonian"])
    gamma = float(data["gamma"])
    if "channels" in data:
        return MultiChannelSystem(
            hamiltonian=hamiltonian,
            channels=_pairs_to_complex(data["channels"]),
            gamma=gamma,
        )
    return QuantumSystem(
        hamiltonian=hamiltonian,
        decay_state=_pairs_to_complex(data["decay_state"]),
        gamma=gamma,
    )


def save_system(system, path) -> None:
    write_json(path, system_to_dict(system))


def load_system(path):
    with open(path, "r", encoding="utf-8") as handle:
        return system_from_dict(json.load(handle))


def _json_line(data: dict) -> str:
    return json.dumps(data, sort_keys=True, separators=(", ", ": "))


def write_csv(path, header: dict, columns: dict) -> None:
    """Write named columns with a ``#``-prefixed JSON header line.

    Floats are rendered with repr (shortest round-trip form), so identical
    inputs give byte-identical files.
    """
    names = list(columns)
    arrays = [np.asarray(columns[name]) for name in names]
    lengths = {len(a) for a in arrays}
    if len(lengths) > 1:
        raise ValueError(f"columns differ in length: { {n: len(a) for n, a in zip(names, arrays)} }")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("# " + _json_line(header) + "\n")
        handle.write(",".join(names) + "\n")
        for row in zip(*arrays):
            handle.write(",".join(repr(float(x)) for x in row) + "\n")


def read_csv(path):
    """Read a header-carrying CSV back into (header, {name: array})."""
    with open(path, "r", encoding="utf-8") as handle:
        first = handle.readline()
        if not first.startswith("#"):
            raise ValueError(f"{path} lacks the JSON header line")
        header = json.loads(first[1:].strip())
        names = handle.readline().strip().split(",")
        rows = [line.strip().split(",") for line in handle if line.strip()]
    data = {
        name: np.array([float(row[i]) for row in rows])
        for i, name in enumerate(names)
    }
    return header, data


def write_json(path, data: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(data, handle, sort_keys=True, indent=2)
        handle.write("\n")


def read_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)
