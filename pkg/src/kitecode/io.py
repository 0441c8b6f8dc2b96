"""File formats: the code-spec file, bit/sample files and manifest-headed CSV."""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .kite import N_WINDOWS, KiteCodeSpec, PSequence

SPEC_SECTION = "kite"
COMMENT = "#"


class InputError(ValueError):
    """Malformed or inconsistent input file."""


def _q_keys():
    return [f"q{w}" for w in range(N_WINDOWS, 0, -1)]


def write_spec(path, spec: KiteCodeSpec) -> None:
    cp = configparser.ConfigParser()
    cp[SPEC_SECTION] = {"k": str(spec.k), "seed": str(spec.seed)}
    for key, q in zip(_q_keys(), spec.pseq.q):
        cp[SPEC_SECTION][key] = repr(q)
    with open(path, "w") as fh:
        cp.write(fh)


def read_spec(path) -> KiteCodeSpec:
    """Parse a code-spec file (INI-style ``[kite]`` section with k, seed, q9..q1)."""
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
        sec = cp[SPEC_SECTION]
        k = int(sec["k"])
        seed = int(sec.get("seed", "0"))
        q = tuple(float(sec[key]) for key in _q_keys())
        return KiteCodeSpec(k, seed, PSequence(q))
    except (KeyError, ValueError, configparser.Error) as exc:
        raise InputError(f"{path}: bad code-spec file ({exc})") from exc


def write_bits(path, bits) -> None:
    s = "".join("1" if b else "0" for b in np.asarray(bits).tolist())
    lines = [s[i : i + 64] for i in range(0, len(s), 64)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_bits(path) -> np.ndarray:
    with open(path) as fh:
        text = "".join(fh.read().split())
    if text.strip("01"):
        raise InputError(f"{path}: bit files may only contain 0, 1 and whitespace")
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


def write_samples(path, y) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(repr(float(v)) for v in np.asarray(y)) + "\n")


def read_samples(path) -> np.ndarray:
    try:
        y = np.loadtxt(path, dtype=float, ndmin=1)
    except ValueError as exc:
        raise InputError(f"{path}: unreadable sample file ({exc})") from exc
    if not np.all(np.isfinite(y)):
        raise InputError(f"{path}: samples must be finite")
    return y


def input_hash(config: dict, paths=()) -> str:
    """SHA-256 over the canonical JSON config plus the bytes of every input file."""
    h = hashlib.sha256(json.dumps(config, sort_keys=True, default=str).encode())
    for p in paths:
        with open(p, "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()


@dataclass
class Manifest:
    command: str
    config: dict
    seed: int | None = None
    outputs: list = field(default_factory=list)
    inputs: list = field(default_factory=list)
    version: str = __version__
    wall_clock: float = 0.0
    status: str = "OK"

    def lines(self) -> list[str]:
        return [
            f"command: {self.command}",
            f"config: {json.dumps(self.config, sort_keys=True, default=str)}",
            f"seed: {self.seed}",
            f"outputs: {','.join(map(str, self.outputs))}",
            f"version: {self.version}",
            f"wall_clock_s: {self.wall_clock:.3f}",
            f"input_hash: {input_hash(self.config, self.inputs)}",
            f"status: {self.status}",
        ]


def fmt(x) -> str:
    """Stable text form of a CSV cell."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def csv_text(columns, rows, manifest: Manifest | None = None) -> str:
    buf = io.StringIO()
    if manifest is not None:
        for line in manifest.lines():
            buf.write(f"{COMMENT} {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write_csv(path, columns, rows, manifest: Manifest | None = None) -> None:
    text = csv_text(columns, rows, manifest)
    if path is None or path == "-":
        print(text, end="")
        return
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def csv_body(path) -> str:
    """CSV content without the manifest comment lines."""
    with open(path) as fh:
        return "".join(line for line in fh if not line.startswith(COMMENT))


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    rows = list(csv.reader(io.StringIO(csv_body(path))))
    return rows[0], rows[1:]


def read_manifest(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith(COMMENT):
                break
            key, _, val = line[len(COMMENT) :].strip().partition(": ")
            out[key] = val
    return out
