"""Data ingestion and export: pole/residue model JSON, Touchstone
S-parameter files with the matched-port S-to-Z conversion, SPICE-like
netlists, CSV emitters, and provenance records.

All numeric text output uses shortest round-trip decimal formatting
(Python repr), so identical inputs and configuration produce byte-identical
files.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from .brune import (
    BruneCircuit,
    BruneStage,
    PreambleElement,
    PreambleKind,
)
from .foster import DroppedTerm, DropReason, FosterCircuit, FosterStage
from .quant import QuantizedSystem
from .ratmodel import TWO_PI, ModelInvariantError, PoleResidueModel
from .response import SweepRow

__all__ = [
    "TouchstoneData",
    "TouchstoneParseError",
    "SchemaError",
    "RunConfig",
    "load_model",
    "loads_model",
    "save_model",
    "bundled_model_path",
    "load_bundled_model",
    "read_touchstone",
    "write_touchstone",
    "s_to_z",
    "circuit_to_json",
    "circuit_from_json",
    "save_circuit",
    "load_circuit",
    "export_netlist",
    "write_sweep_csv",
    "write_impedance_csv",
    "system_to_json",
    "write_provenance",
]

_KNOWN_FREQ_UNITS = ("GHz_2pi",)


class SchemaError(ValueError):
    """JSON document does not match the expected schema."""


class TouchstoneParseError(ValueError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


# ---------------------------------------------------------------------------
# model JSON
# ---------------------------------------------------------------------------


def _complex_from_obj(obj, path):
    if not isinstance(obj, dict) or set(obj) != {"re", "im"}:
        raise SchemaError(f"{path}: expected an object with fields 're' and 'im'")
    return complex(float(obj["re"]), float(obj["im"]))


def loads_model(text: str) -> PoleResidueModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    for key in ("poles", "residues", "d", "e", "freq_unit"):
        if key not in doc:
            raise SchemaError(f"missing field '{key}'")
    if doc["freq_unit"] not in _KNOWN_FREQ_UNITS:
        raise SchemaError(
            f"freq_unit: unknown value {doc['freq_unit']!r}; expected one of "
            f"{_KNOWN_FREQ_UNITS}"
        )
    poles = tuple(
        _complex_from_obj(p, f"poles[{i}]") for i, p in enumerate(doc["poles"])
    )
    residues = tuple(
        _complex_from_obj(r, f"residues[{i}]") for i, r in enumerate(doc["residues"])
    )
    try:
        return PoleResidueModel(poles, residues, float(doc["d"]), float(doc["e"]))
    except ModelInvariantError as exc:
        raise SchemaError(str(exc)) from exc


def load_model(path) -> PoleResidueModel:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_model(fh.read())


def save_model(model: PoleResidueModel, path) -> None:
    doc = {
        "freq_unit": "GHz_2pi",
        "poles": [{"re": p.real, "im": p.imag} for p in model.poles],
        "residues": [{"re": r.real, "im": r.imag} for r in model.residues],
        "d": model.d,
        "e": model.e,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def bundled_model_path():
    """Path of the bundled 17-pole cavity-fit dataset (table1.json)."""
    return resources.files("brunequant").joinpath("data/table1.json")


def load_bundled_model() -> PoleResidueModel:
    return loads_model(bundled_model_path().read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Touchstone
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TouchstoneData:
    """Sampled n-port scattering data (n in {1, 3}); frequencies in GHz."""

    frequencies: tuple
    s_params: tuple  # per-frequency n x n complex matrices (nested tuples)
    z0: float = 50.0

    def __post_init__(self):
        freqs = tuple(float(f) for f in self.frequencies)
        object.__setattr__(self, "frequencies", freqs)
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("frequencies must be strictly increasing")
        n = self.num_ports
        for k, mat in enumerate(self.s_params):
            for row in mat:
                for v in row:
                    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                        raise ValueError(f"non-finite S entry at sample {k}")

    @property
    def num_ports(self) -> int:
        return len(self.s_params[0]) if self.s_params else 0


_UNIT_SCALE_TO_GHZ = {"hz": 1e-9, "khz": 1e-6, "mhz": 1e-3, "ghz": 1.0}


def read_touchstone(path) -> TouchstoneData:
    """Parse a version-1.x Touchstone file (1-port or 3-port, S-parameters,
    RI/MA/DB formats)."""
    n_ports = _ports_from_suffix(str(path))
    unit, fmt, z0 = "ghz", "ma", 50.0
    numbers = []
    option_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("!", 1)[0].strip()
            if not line:
                continue
            if line.startswith("#"):
                if option_seen:
                    raise TouchstoneParseError("duplicate option line", lineno)
                option_seen = True
                toks = line[1:].lower().split()
                i = 0
                while i < len(toks):
                    tok = toks[i]
                    if tok in _UNIT_SCALE_TO_GHZ:
                        unit = tok
                    elif tok in ("ma", "ri", "db"):
                        fmt = tok
                    elif tok == "s":
                        pass
                    elif tok == "r":
                        i += 1
                        try:
                            z0 = float(toks[i])
                        except (IndexError, ValueError):
                            raise TouchstoneParseError(
                                "malformed reference impedance", lineno
                            )
                    else:
                        raise TouchstoneParseError(
                            f"unsupported option token {tok!r}", lineno
                        )
                    i += 1
                continue
            try:
                numbers.extend(float(tok) for tok in line.split())
            except ValueError:
                raise TouchstoneParseError(f"malformed data {line!r}", lineno)
    per_sample = 1 + 2 * n_ports * n_ports
    if not numbers or len(numbers) % per_sample:
        raise TouchstoneParseError(
            f"expected {per_sample} numbers per sample for {n_ports} port(s); "
            f"got {len(numbers)} values total"
        )
    freqs, mats = [], []
    conv = {
        "ri": lambda a, b: complex(a, b),
        "ma": lambda a, b: a * complex(math.cos(math.radians(b)), math.sin(math.radians(b))),
        "db": lambda a, b: 10 ** (a / 20.0)
        * complex(math.cos(math.radians(b)), math.sin(math.radians(b))),
    }[fmt]
    scale = _UNIT_SCALE_TO_GHZ[unit]
    for k in range(0, len(numbers), per_sample):
        chunk = numbers[k : k + per_sample]
        freqs.append(chunk[0] * scale)
        vals = chunk[1:]
        mat = tuple(
            tuple(
                conv(vals[2 * (i * n_ports + j)], vals[2 * (i * n_ports + j) + 1])
                for j in range(n_ports)
            )
            for i in range(n_ports)
        )
        mats.append(mat)
    return TouchstoneData(tuple(freqs), tuple(mats), z0)


def _ports_from_suffix(path: str) -> int:
    lower = path.lower()
    for n in (1, 2, 3, 4):
        if lower.endswith(f".s{n}p"):
            if n not in (1, 3):
                raise TouchstoneParseError(f"{n}-port files are not supported")
            return n
    raise TouchstoneParseError("expected a .s1p or .s3p file suffix")


def write_touchstone(data: TouchstoneData, path) -> None:
    n = data.num_ports
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# GHZ S RI R {_fmt(data.z0)}\n")
        for f, mat in zip(data.frequencies, data.s_params):
            for i, row in enumerate(mat):
                head = _fmt(f) if i == 0 else " " * len(_fmt(f))
                cells = " ".join(f"{_fmt(v.real)} {_fmt(v.imag)}" for v in row)
                fh.write(f"{head} {cells}\n")


def s_to_z(ts: TouchstoneData, port: int = 0):
    """Port impedance with every other port terminated in the reference
    impedance: Z = Z0 (1 + S_pp)/(1 - S_pp) per sample.

    Returns (frequencies GHz, complex impedance array).  Samples with
    S_pp = 1 yield an infinite-impedance sentinel (inf+0j).
    """
    if not 0 <= port < ts.num_ports:
        raise IndexError(f"port {port} outside 0..{ts.num_ports - 1}")
    freqs = np.array(ts.frequencies)
    z = np.empty(len(freqs), dtype=complex)
    for k, mat in enumerate(ts.s_params):
        spp = mat[port][port]
        if spp == 1:
            z[k] = complex(math.inf, 0.0)
        else:
            z[k] = ts.z0 * (1 + spp) / (1 - spp)
    return freqs, z


# ---------------------------------------------------------------------------
# circuit JSON
# ---------------------------------------------------------------------------


def circuit_to_json(circuit) -> dict:
    if isinstance(circuit, BruneCircuit):
        return {
            "kind": "brune",
            "stages": [
                {
                    "R": st.R,
                    "C": st.C,
                    "L11": st.L11,
                    "L22": st.L22,
                    "M": st.M,
                    "t": st.t,
                    "degenerate": st.degenerate,
                    "inductive": st.inductive,
                    "L_shunt": st.L_shunt,
                    "t_triple": list(st.t_triple) if st.t_triple else None,
                }
                for st in circuit.stages
            ],
            "r_terminal": circuit.r_terminal,
            "preamble": [
                {"kind": el.kind.value, "L": el.L, "C": el.C, "omega0": el.omega0}
                for el in circuit.preamble
            ],
            "notes": list(circuit.notes),
        }
    if isinstance(circuit, FosterCircuit):
        return {
            "kind": "foster",
            "stages": [
                {
                    "R": st.R,
                    "L": st.L,
                    "C": st.C,
                    "omega0": st.omega0,
                    "Q": st.Q,
                    "b_ratio": st.b_ratio,
                    "source_pole_indices": list(st.source_pole_indices),
                }
                for st in circuit.stages
            ],
            "dropped": [
                {"pole_indices": list(d.pole_indices), "reason": d.reason.value}
                for d in circuit.dropped
            ],
        }
    raise TypeError(f"cannot serialize {type(circuit).__name__}")


def circuit_from_json(doc: dict):
    kind = doc.get("kind")
    if kind == "brune":
        stages = tuple(
            BruneStage(
                R=st["R"],
                C=st["C"],
                L11=st["L11"],
                L22=st["L22"],
                M=st["M"],
                t=st["t"],
                degenerate=st["degenerate"],
                inductive=st.get("inductive", False),
                L_shunt=st.get("L_shunt"),
                t_triple=tuple(st["t_triple"]) if st.get("t_triple") else None,
            )
            for st in doc["stages"]
        )
        preamble = tuple(
            PreambleElement(
                kind=PreambleKind(el["kind"]),
                L=el.get("L"),
                C=el.get("C"),
                omega0=el.get("omega0"),
            )
            for el in doc.get("preamble", ())
        )
        return BruneCircuit(
            stages=stages,
            r_terminal=doc["r_terminal"],
            preamble=preamble,
            notes=tuple(doc.get("notes", ())),
        )
    if kind == "foster":
        stages = tuple(
            FosterStage(
                R=st["R"],
                L=st["L"],
                C=st["C"],
                omega0=st["omega0"],
                Q=st["Q"],
                b_ratio=st.get("b_ratio", 0.0),
                source_pole_indices=tuple(st["source_pole_indices"]),
            )
            for st in doc["stages"]
        )
        dropped = tuple(
            DroppedTerm(
                pole_indices=tuple(d["pole_indices"]),
                reason=DropReason(d["reason"]),
            )
            for d in doc.get("dropped", ())
        )
        return FosterCircuit(stages=stages, dropped=dropped)
    raise SchemaError(f"unknown circuit kind {kind!r}")


def save_circuit(circuit, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(circuit_to_json(circuit), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_circuit(path):
    with open(path, "r", encoding="utf-8") as fh:
        return circuit_from_json(json.load(fh))


# ---------------------------------------------------------------------------
# netlist export
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def export_netlist(circuit, title: str = "synthesized one-port") -> str:
    """SPICE-like netlist text.  Node 0 is ground, node 1 the driven
    terminal, numbering increases into the ladder.  Coupled inductors are
    two L elements plus a K line with k = M/sqrt(L11*L22); inductances in
    henry, capacitances in farad."""
    lines = [f"* {title}"]
    node = 1
    next_node = 2

    def new_node():
        nonlocal next_node
        n = next_node
        next_node += 1
        return n

    if isinstance(circuit, FosterCircuit):
        for i, st in enumerate(circuit.stages, start=1):
            nxt = 0 if i == len(circuit.stages) else new_node()
            lines.append(f"R{i} {node} {nxt} {_fmt(st.R)}")
            lines.append(f"L{i} {node} {nxt} {_fmt(st.L * 1e-9)}")
            lines.append(f"C{i} {node} {nxt} {_fmt(st.C * 1e-9)}")
            node = nxt
        if not circuit.stages:
            lines.append(f"R1 {node} 0 0.0")
        lines.append(".END")
        return "\n".join(lines) + "\n"
    if not isinstance(circuit, BruneCircuit):
        raise TypeError(f"cannot export {type(circuit).__name__}")
    for i, el in enumerate(circuit.preamble, start=1):
        if el.kind is PreambleKind.SERIES_L:
            nxt = new_node()
            lines.append(f"LP{i} {node} {nxt} {_fmt(el.L * 1e-9)}")
            node = nxt
        elif el.kind is PreambleKind.SERIES_C:
            nxt = new_node()
            lines.append(f"CP{i} {node} {nxt} {_fmt(el.C * 1e-9)}")
            node = nxt
        elif el.kind is PreambleKind.SERIES_PARALLEL_LC:
            nxt = new_node()
            lines.append(f"LP{i} {node} {nxt} {_fmt(el.L * 1e-9)}")
            lines.append(f"CP{i} {node} {nxt} {_fmt(el.C * 1e-9)}")
            node = nxt
        elif el.kind is PreambleKind.SHUNT_C:
            lines.append(f"CP{i} {node} 0 {_fmt(el.C * 1e-9)}")
        elif el.kind is PreambleKind.SHUNT_L:
            lines.append(f"LP{i} {node} 0 {_fmt(el.L * 1e-9)}")
        elif el.kind is PreambleKind.SHUNT_SERIES_LC:
            mid = new_node()
            lines.append(f"LP{i} {node} {mid} {_fmt(el.L * 1e-9)}")
            lines.append(f"CP{i} {mid} 0 {_fmt(el.C * 1e-9)}")
    for i, st in enumerate(circuit.stages, start=1):
        after_r = new_node()
        lines.append(f"R{i} {node} {after_r} {_fmt(st.R)}")
        if st.degenerate:
            if st.inductive:
                lines.append(f"L{i} {after_r} 0 {_fmt(st.L_shunt * 1e-9)}")
            else:
                lines.append(f"C{i} {after_r} 0 {_fmt(st.C * 1e-9)}")
            node = after_r
        else:
            common = new_node()
            out = new_node()
            k = st.M / math.sqrt(st.L11 * st.L22)
            if abs(k - 1.0) < 1e-9:
                k = 1.0
            lines.append(f"L{i}A {after_r} {common} {_fmt(st.L11 * 1e-9)}")
            lines.append(f"L{i}B {out} {common} {_fmt(st.L22 * 1e-9)}")
            lines.append(f"K{i} L{i}A L{i}B {_fmt(k)}")
            lines.append(f"C{i} {common} 0 {_fmt(st.C * 1e-9)}")
            node = out
    lines.append(f"R{len(circuit.stages) + 1} {node} 0 {_fmt(circuit.r_terminal)}")
    lines.append(".END")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CSV emitters
# ---------------------------------------------------------------------------


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    """Columns: L_J_nH, f_qb_GHz, abs_re_s_qb, Q_qb, T1_ns, branch_jump."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("L_J_nH,f_qb_GHz,abs_re_s_qb,Q_qb,T1_ns,branch_jump\n")
        for row in rows:
            fh.write(
                ",".join(
                    (
                        _fmt(row.lj),
                        _fmt(row.pole.f_ghz),
                        _fmt(abs(row.pole.xi)),
                        _fmt(row.pole.q_factor),
                        _fmt(row.pole.t1_ns),
                        "1" if row.branch_jump else "0",
                    )
                )
                + "\n"
            )


def write_impedance_csv(freqs_ghz, z_values, path) -> None:
    """Columns: f_GHz, re_Z_ohm, im_Z_ohm."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("f_GHz,re_Z_ohm,im_Z_ohm\n")
        for f, z in zip(freqs_ghz, z_values):
            fh.write(f"{_fmt(f)},{_fmt(z.real)},{_fmt(z.imag)}\n")


def system_to_json(system: QuantizedSystem) -> dict:
    return {
        "dim": system.dim,
        "num_stages": system.num_stages,
        "degenerate_index": system.degenerate_index,
        "cap_matrix_nF": [[float(x) for x in row] for row in system.cap_matrix],
        "stiffness_per_nH": [[float(x) for x in row] for row in system.stiffness],
        "coupling_vectors": [
            [float(x) for x in vec] for vec in system.coupling_vectors
        ],
        "resistor_params": [
            {"R_ohm": r, "C_tail_nF": c} for r, c in system.resistor_params
        ],
        "junction": {
            "lj_nH": system.junction.lj,
            "cj_nF": system.junction.cj,
            "temperature_K": system.junction.temperature,
        },
    }


# ---------------------------------------------------------------------------
# configuration and provenance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    band_ghz: tuple = (3.0, 15.0)
    precision_bits: int = 256
    cancel_tol: float = 1e-10
    pr_rel_tol: float = 1e-5
    root_rel_tol: float = 1e-12
    foster_band_ghz: tuple = (3.0, 15.0)
    lj_start: float = 4.0
    lj_stop: float = 6.5
    lj_points: int = 26
    cj: float = 0.0
    temperature: float = 0.0
    outdir: str = "out"

    def __post_init__(self):
        if self.precision_bits <= 0 or self.cancel_tol <= 0 or self.root_rel_tol <= 0:
            raise ValueError("tolerances and precision must be positive")
        if not self.band_ghz or self.band_ghz[0] >= self.band_ghz[1]:
            raise ValueError("band must be a nonempty (lo, hi) pair")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_provenance(outdir, command: str, inputs: Sequence, config: dict) -> None:
    import mpmath
    import scipy

    from . import __version__

    doc = {
        "command": command,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "config": config,
        "versions": {
            "brunequant": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "mpmath": mpmath.__version__,
        },
    }
    path = f"{outdir}/provenance.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
