"""Command-line driver composing the synthesis and quantization pipeline.

Exit codes: 0 success, 2 validation error, 3 numerical failure, 64 usage.
Output directory and precision bits may also come from the environment
(BRUNEQUANT_OUTPUT_DIR, BRUNEQUANT_PRECISION_BITS).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .brune import (
    ConditioningError,
    NotPositiveRealError,
    SynthesisOptions,
    synthesize,
)
from .foster import build_foster
from .io import (
    SchemaError,
    TouchstoneParseError,
    bundled_model_path,
    circuit_from_json,
    export_netlist,
    load_circuit,
    load_model,
    save_circuit,
    system_to_json,
    write_impedance_csv,
    write_provenance,
    write_sweep_csv,
    read_touchstone,
    s_to_z,
)
from .quant import (
    JunctionParams,
    SingularCapacitanceError,
    UnsupportedCircuitError,
    build_system,
    harmonic_modes,
    relaxation_rates,
)
from .ratmodel import ScanSpec, TWO_PI, ModelInvariantError, check_pr, evaluate
from .response import (
    PoleSearchError,
    find_qubit_pole,
    ladder_impedance,
    sweep_lj,
)

USAGE_EXIT = 64
VALIDATION_EXIT = 2
NUMERICAL_EXIT = 3

_VALIDATION_ERRORS = (
    SchemaError,
    TouchstoneParseError,
    ModelInvariantError,
    NotPositiveRealError,
    UnsupportedCircuitError,
    SingularCapacitanceError,
    ValueError,
    IndexError,
    FileNotFoundError,
)
_NUMERICAL_ERRORS = (ConditioningError, PoleSearchError, ArithmeticError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_EXIT)


def _load_input(path):
    """Model or circuit JSON, detected by schema."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict) and "poles" in doc:
        return load_model(path), "model"
    if isinstance(doc, dict) and "stages" in doc:
        return circuit_from_json(doc), "circuit"
    raise SchemaError("input is neither a pole/residue model nor a circuit")


def _ensure_outdir(args):
    os.makedirs(args.outdir, exist_ok=True)
    return args.outdir


def _resolve_input_path(path):
    if path == "table1.json" and not os.path.exists(path):
        return str(bundled_model_path())
    return path


def _circuit_of(args, obj, what):
    if what == "circuit":
        return obj
    opts = SynthesisOptions(precision_bits=args.precision_bits)
    return synthesize(obj, opts)


def build_parser() -> _Parser:
    parser = _Parser(prog="brunequant", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("input", help="model or circuit JSON (table1.json = bundled)")
        p.add_argument(
            "-o",
            "--outdir",
            default=os.environ.get("BRUNEQUANT_OUTPUT_DIR", "out"),
        )
        p.add_argument(
            "--precision-bits",
            type=int,
            default=int(os.environ.get("BRUNEQUANT_PRECISION_BITS", "256")),
        )

    p = sub.add_parser("check-pr", help="positive-real classification")
    common(p)
    p.add_argument("--f-lo", type=float, default=0.01)
    p.add_argument("--f-hi", type=float, default=100.0)
    p.add_argument("--points", type=int, default=20000)

    p = sub.add_parser("synth-brune", help="exact cascade synthesis")
    common(p)
    p.add_argument("--max-stages", type=int, default=64)
    p.add_argument("--cancel-tol", type=float, default=1e-10)
    p.add_argument(
        "--force-preamble",
        action="store_true",
        help="extract near-axis poles as lossless preamble blocks",
    )

    p = sub.add_parser("synth-foster", help="approximate shunt-resonator synthesis")
    common(p)
    p.add_argument("--band", type=float, nargs=2, default=(3.0, 15.0))

    p = sub.add_parser("quantize", help="build the quantized-system matrices")
    common(p)
    p.add_argument("--lj", type=float, required=True, help="junction inductance (nH)")
    p.add_argument("--cj", type=float, default=0.0, help="junction capacitance (nF)")

    p = sub.add_parser("t1", help="per-resistor relaxation rates")
    common(p)
    p.add_argument("--lj", type=float, required=True)
    p.add_argument("--cj", type=float, default=0.0)
    p.add_argument("--temperature", type=float, default=0.0)

    p = sub.add_parser("qubit-pole", help="locate the shunted-network qubit pole")
    common(p)
    p.add_argument("--lj", type=float, required=True)
    p.add_argument("--fguess", type=float, default=None, help="seed frequency (GHz)")
    p.add_argument(
        "--cavity-ghz",
        type=float,
        nargs="*",
        default=(6.875,),
        help="known cavity resonances for mislabel warnings",
    )

    p = sub.add_parser("sweep-lj", help="qubit pole across a junction sweep")
    common(p)
    p.add_argument("--lj-start", type=float, default=4.0)
    p.add_argument("--lj-stop", type=float, default=6.5)
    p.add_argument("--lj-points", type=int, default=26)
    p.add_argument("--fguess", type=float, default=None)

    p = sub.add_parser("s2z", help="Touchstone port impedance table")
    common(p)
    p.add_argument("--port", type=int, default=0)

    p = sub.add_parser("export-netlist", help="SPICE-like netlist of a circuit")
    common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return _dispatch(args)
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT
    except _VALIDATION_ERRORS as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return VALIDATION_EXIT


def _dispatch(args) -> int:
    outdir = _ensure_outdir(args)
    input_path = _resolve_input_path(args.input)
    config = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("command", "input")
    }
    write_provenance(outdir, args.command, [input_path], config)

    if args.command == "s2z":
        ts = read_touchstone(input_path)
        freqs, z = s_to_z(ts, args.port)
        out = os.path.join(outdir, "impedance.csv")
        write_impedance_csv(freqs, z, out)
        print(f"wrote {out} ({len(freqs)} samples, port {args.port})")
        return 0

    obj, what = _load_input(input_path)

    if args.command == "check-pr":
        if what != "model":
            raise SchemaError("check-pr expects a pole/residue model")
        scan = ScanSpec(args.f_lo, args.f_hi, args.points)
        report = check_pr(obj, scan)
        doc = {
            "is_pr": report.is_pr,
            "min_re_z_ohm": report.min_re_z,
            "min_re_z_omega_rad_ns": report.min_re_z_omega,
            "violations": [
                {
                    "kind": v.kind.value,
                    "location": {"re": v.location.real, "im": v.location.imag},
                    "magnitude": v.magnitude,
                }
                for v in report.violations
            ],
        }
        out = os.path.join(outdir, "pr_report.json")
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"is_pr: {report.is_pr}  (min Re Z = {report.min_re_z:.6e} ohm)")
        return 0

    if args.command == "synth-brune":
        if what != "model":
            raise SchemaError("synth-brune expects a pole/residue model")
        opts = SynthesisOptions(
            precision_bits=args.precision_bits,
            max_stages=args.max_stages,
            cancel_tol=args.cancel_tol,
            force_preamble=args.force_preamble,
        )
        circuit = synthesize(obj, opts)
        save_circuit(circuit, os.path.join(outdir, "brune_circuit.json"))
        with open(os.path.join(outdir, "brune.cir"), "w", encoding="utf-8") as fh:
            fh.write(export_netlist(circuit, "brune cascade"))
        print(
            f"{circuit.num_stages} stages "
            f"(degenerate at {[i + 1 for i in circuit.degenerate_indices]}), "
            f"terminal R = {circuit.r_terminal:.6e} ohm"
        )
        for i, st in enumerate(circuit.stages, start=1):
            if st.degenerate:
                print(f"  stage {i}*: R={st.R:.6e}  C={st.C:.6e}")
            else:
                print(
                    f"  stage {i}: R={st.R:.6e}  C={st.C:.6e}  "
                    f"L11={st.L11:.6e}  L22={st.L22:.6e}"
                )
        for note in circuit.notes:
            print(f"  note: {note}")
        return 0

    if args.command == "synth-foster":
        if what != "model":
            raise SchemaError("synth-foster expects a pole/residue model")
        circuit = build_foster(obj, tuple(args.band))
        save_circuit(circuit, os.path.join(outdir, "foster_circuit.json"))
        with open(os.path.join(outdir, "foster.cir"), "w", encoding="utf-8") as fh:
            fh.write(export_netlist(circuit, "lossy Foster"))
        print(f"{circuit.num_stages} stages, {len(circuit.dropped)} dropped terms")
        for d in circuit.dropped:
            print(f"  dropped poles {list(d.pole_indices)}: {d.reason.value}")
        return 0

    if args.command in ("quantize", "t1"):
        circuit = _circuit_of(args, obj, what)
        jp = JunctionParams(
            lj=args.lj,
            cj=args.cj,
            temperature=getattr(args, "temperature", 0.0),
        )
        system = build_system(circuit, jp)
        with open(
            os.path.join(outdir, "quantized_system.json"), "w", encoding="utf-8"
        ) as fh:
            json.dump(system_to_json(system), fh, indent=2, sort_keys=True)
            fh.write("\n")
        modes = harmonic_modes(system)
        if args.command == "quantize":
            freqs = ", ".join(f"{m.f_ghz:.5f}" for m in modes)
            print(f"dim {system.dim}; mode frequencies (GHz): {freqs}")
            return 0
        report = relaxation_rates(system, modes)
        doc = {
            "per_resistor_per_ns": list(report.per_resistor),
            "total_per_ns": report.total,
            "t1_ns": report.t1_ns,
            "f_qb_ghz": report.omega_qb / TWO_PI,
            "qubit_mode_index": report.qubit_index,
        }
        with open(os.path.join(outdir, "rates.json"), "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(
            f"f_qb = {report.omega_qb / TWO_PI:.5f} GHz, total rate = "
            f"{report.total:.6e} /ns, T1 = {report.t1_ns:.6e} ns"
        )
        return 0

    if args.command == "qubit-pole":
        pole = find_qubit_pole(
            obj,
            args.lj,
            f_guess_ghz=args.fguess,
            known_cavity_freqs_ghz=tuple(args.cavity_ghz),
        )
        doc = {
            "f_qb_ghz": pole.f_ghz,
            "xi_rad_ns": pole.xi,
            "omega_rad_ns": pole.omega,
            "Q_qb": pole.q_factor,
            "T1_ns": pole.t1_ns,
        }
        with open(os.path.join(outdir, "qubit_pole.json"), "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(
            f"f_qb = {pole.f_ghz:.4f} GHz  |Re s| = {abs(pole.xi):.6e}  "
            f"Q = {pole.q_factor:.4e}  T1 = {pole.t1_ns:.4e} ns"
        )
        return 0

    if args.command == "sweep-lj":
        lj_values = np.linspace(args.lj_start, args.lj_stop, args.lj_points)
        sources = {"input": obj}
        if what == "model":
            opts = SynthesisOptions(precision_bits=args.precision_bits)
            sources = {
                "fit": obj,
                "brune": synthesize(obj, opts),
                "foster": build_foster(obj),
            }
        for name, source in sources.items():
            rows = sweep_lj(source, lj_values, f_guess_ghz=args.fguess)
            out = os.path.join(outdir, f"sweep_{name}.csv")
            write_sweep_csv(rows, out)
            print(f"wrote {out}")
        return 0

    if args.command == "export-netlist":
        if what != "circuit":
            raise SchemaError("export-netlist expects a circuit JSON")
        out = os.path.join(outdir, "circuit.cir")
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(export_netlist(obj))
        print(f"wrote {out}")
        return 0

    raise SchemaError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    raise SystemExit(main())
