"""Command-line front end.

Exit codes: 0 success, 2 parse error, 3 I/O error, 4 physics budget
violation (truncation, separability, dimension cap), 5 ill-conditioned
population inference.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import compiler as C
from . import fock, readout
from .evolution import prepare_qubit
from .hamiltonians import QubitPrep
from .errors import (
    DriveError,
    IllConditionedError,
    IntegrationError,
    LayoutError,
    SeparabilityError,
    TruncationError,
)

EXIT_OK, EXIT_PARSE, EXIT_IO, EXIT_BUDGET, EXIT_COND = 0, 2, 3, 4, 5


class CliParseError(Exception):
    pass


# -- helpers -----------------------------------------------------------------

def _f(v) -> str:
    return format(float(v), ".17g")


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _out_dir(args) -> Path | None:
    if args.out is None:
        return None
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _load_schedule(path: str):
    text = _read_text(path)
    if path.endswith(".json"):
        try:
            return C.schedule_from_json(text)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CliParseError(f"{path}: malformed schedule: {exc}") from None
    return C.compile_program(C.parse_program(text))


def dump_state(state: fock.StateVector) -> str:
    lay = state.layout
    buf = io.StringIO()
    buf.write(f"# layout n_modes={lay.n_modes} cutoff={lay.cutoff} guard={lay.guard}\n")
    buf.write("index,re,im\n")
    for i, a in enumerate(state.amplitudes):
        buf.write(f"{i},{_f(a.real)},{_f(a.imag)}\n")
    return buf.getvalue()


def load_state(text: str) -> fock.StateVector:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# layout"):
        raise CliParseError("state dump must start with a '# layout' line")
    kv = dict(tok.split("=") for tok in lines[0].split()[2:])
    layout = fock.HilbertLayout(int(kv["n_modes"]), int(kv["cutoff"]), int(kv["guard"]))
    amps = np.zeros(layout.total_dim, dtype=complex)
    for row in csv.DictReader(lines[1:]):
        amps[int(row["index"])] = complex(float(row["re"]), float(row["im"]))
    return fock.StateVector(amps, layout)


def _state_from_source(path: str, mode: str = "rwa"):
    """Final state and trap of a program/schedule, or a state dump (trap None)."""
    if path.endswith(".csv"):
        return load_state(_read_text(path)), None
    sched = _load_schedule(path)
    state, _ = C.execute(sched, mode)
    return state, sched


def _emit(args, rows: list, header: list, payload: dict) -> None:
    """Print a result in the selected format."""
    if args.format == "json":
        sys.stdout.write(C.dumps(payload) + "\n")
    elif args.format == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_f(v) if isinstance(v, float) else v for v in r])
    else:
        cells = [[str(h) for h in header]] + [
            [format(v, ".6g") if isinstance(v, float) else str(v) for v in r] for r in rows]
        widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
        for c in cells:
            sys.stdout.write("  ".join(s.rjust(wd) for s, wd in zip(c, widths)) + "\n")


# -- measurements embedded in programs ---------------------------------------

def reset_qubit(state: fock.StateVector) -> fock.StateVector:
    """Qubit back to ``|g>`` (the motion must be qubit-separable)."""
    return prepare_qubit(state, QubitPrep(None, -1))


def _measure(stmt, state, sched, rng):
    p = dict(stmt.params)
    if stmt.name != "wigner":
        state = reset_qubit(state)
    trap = sched.trap
    if stmt.name == "wigner":
        modes = list(stmt.modes) or list(fock.MODE_NAMES[: trap.n_modes])
        point = {m: (float(p.get(f"x_{m}", p.get("x", 0.0))), float(p.get(f"p_{m}", p.get("p", 0.0))))
                 for m in modes}
        return {"kind": "wigner", "modes": modes, "value": readout.wigner_point(state, point, modes)}
    if stmt.name == "parity":
        r = readout.parity_protocol(state, trap, float(p.get("Omega", sched.rabi)),
                                    None if "m" not in p else int(p["m"]))
        return {"kind": "parity", "p_excited": r.p_excited, "p_ground": r.p_ground,
                "w_estimate": r.w_estimate, "w_exact": r.w_exact, "t0_us": r.t0, "m": r.m}
    tr = readout.simulate_rabi(state, trap, float(p.get("Omega", sched.rabi)), float(p.get("T", 2000.0)),
                               float(p.get("dt", 1.0)))
    est = readout.infer_populations(tr, trap, int(p.get("cap", trap.truncation)))
    pops = {",".join(map(str, k)): v for k, v in est.populations.items() if v > 1e-12}
    return {"kind": "rabi", "populations": pops, "residual": est.residual, "condition": est.condition}


# -- verbs -------------------------------------------------------------------

def cmd_compile(args) -> int:
    text = _read_text(args.program)
    sched = C.compile_program(C.parse_program(text), prep_pulses=args.prep_pulses)
    out = C.schedule_to_json(sched)
    if args.out is None and args.output is None:
        sys.stdout.write(out)
        return EXIT_OK
    target = Path(args.output) if args.output else _out_dir(args) / "schedule.json"
    _write_text(target, out)
    return EXIT_OK


def cmd_run(args) -> int:
    sched = _load_schedule(args.program)
    rng = np.random.default_rng(args.seed)
    state, steps = C.execute(sched, args.mode, tol=args.tol)
    meas = [_measure(m, state, sched, rng) for m in sched.measurements]
    report = {
        "mode": args.mode,
        "steps": [{"step_index": s.index, "gate_kind": s.gate_kind, "duration_us": s.duration,
                   "fidelity": s.fidelity, "purity": s.purity, "leak": s.leak, "flagged": s.flagged}
                  for s in steps],
        "final": {"leak": state.leak, "purity": fock.qubit_separability(state), "norm": state.norm},
        "measurements": meas,
    }
    d = _out_dir(args)
    if d is not None:
        _write_text(d / "state.csv", dump_state(state))
        _write_text(d / "report.json", C.dumps(report) + "\n")
    rows = [[s.index, s.gate_kind, s.duration, s.fidelity, s.purity, s.leak] for s in steps]
    _emit(args, rows, ["step", "gate", "duration_us", "fidelity", "purity", "leak"], report)
    return EXIT_OK


def cmd_wigner(args) -> int:
    state, _ = _state_from_source(args.source)
    lo, hi, n = float(args.grid[0]), float(args.grid[1]), int(args.grid[2])
    if n < 2 or hi <= lo:
        raise CliParseError("--grid needs xmin < xmax and n >= 2")
    xs = np.linspace(lo, hi, n)
    w = readout.wigner_grid(state, xs, xs, args.mode_id)
    buf = io.StringIO()
    buf.write("x,p,w\n")
    for j, p in enumerate(xs):  # x fastest
        for i, x in enumerate(xs):
            buf.write(f"{_f(x)},{_f(p)},{_f(w[i, j])}\n")
    d = _out_dir(args)
    if d is None:
        sys.stdout.write(buf.getvalue())
        return EXIT_OK
    _write_text(d / "wigner.csv", buf.getvalue())
    mean, cov = readout.grid_moments(xs, xs, w)
    k = np.unravel_index(np.argmax(w), w.shape)
    step = xs[1] - xs[0]
    summary = {"max": float(w.max()), "argmax": [float(xs[k[0]]), float(xs[k[1]])],
               "integral": float(w.sum() * step * step / 4), "mean": [float(mean[0]), float(mean[1])],
               "var_x": float(cov[0, 0]), "var_p": float(cov[1, 1]), "cov_xp": float(cov[0, 1])}
    _emit(args, [[key, str(v)] for key, v in summary.items()], ["quantity", "value"], summary)
    return EXIT_OK


def cmd_readout(args) -> int:
    state, sched = _state_from_source(args.source)
    if sched is None:
        raise CliParseError("readout needs a program or schedule (trap parameters)")
    trap = sched.trap
    state = reset_qubit(state)
    rabi = args.rabi if args.rabi is not None else sched.rabi
    d = _out_dir(args)
    if args.protocol == "parity":
        r = readout.parity_protocol(state, trap, rabi, args.m, paper_norm=args.paper_norm)
        payload = {"protocol": "parity", "p_excited": r.p_excited, "p_ground": r.p_ground,
                   "w_estimate": r.w_estimate, "w_exact": r.w_exact, "t0_us": r.t0, "m": r.m}
        if d is not None:
            _write_text(d / "parity.json", C.dumps(payload) + "\n")
        _emit(args, [[k, str(v)] for k, v in payload.items()], ["quantity", "value"], payload)
        return EXIT_OK
    tr = readout.simulate_rabi(state, trap, rabi, args.T, args.dt)
    if args.noise > 0:
        rng = np.random.default_rng(args.seed)
        noisy = np.clip(tr.p_excited + rng.normal(0.0, args.noise, tr.p_excited.size), 0.0, 1.0)
        tr = readout.RabiTrace(tr.times, noisy, tr.rabi, tr.lamb_dicke)
    cap = args.cap if args.cap is not None else trap.truncation
    est = readout.infer_populations(tr, trap, cap)
    pops = {",".join(map(str, k)): v for k, v in est.populations.items() if v > 1e-12}
    payload = {"protocol": "rabi", "populations": pops, "residual": est.residual, "condition": est.condition}
    if d is not None:
        tr.to_csv(d / "rabi_trace.csv")
        _write_text(d / "populations.json", C.dumps(payload) + "\n")
    rows = [[k, v] for k, v in pops.items()]
    _emit(args, rows, ["n", "population"], payload)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    if args.ratio:
        try:
            parts = [float(x) for x in args.ratio.split(":")]
        except ValueError:
            raise CliParseError(f"bad --ratio {args.ratio!r}") from None
        freqs = [args.base * x for x in parts]
    elif args.freqs:
        freqs = args.freqs
    else:
        raise CliParseError("give --ratio or --freqs")
    rep = C.spectrum_check(freqs)
    payload = {"count": len(rep.detunings), "min_gap": rep.min_gap, "detunings": list(rep.detunings),
               "lines": {k: v for k, v in rep.labels}, "collisions": [list(c) for c in rep.collisions]}
    rows = [[k, v] for k, v in sorted(rep.labels, key=lambda kv: (kv[1], kv[0]))]
    _emit(args, rows, ["line", "detuning"], payload)
    if args.format == "table":
        sys.stdout.write(f"count {len(rep.detunings)}  min_gap {rep.min_gap:.6g}  collisions {len(rep.collisions)}\n")
    return EXIT_OK


def cmd_capacity(args) -> int:
    cap = C.capacity(phonons=args.phonons, eta=args.eta, length_ratio=args.length_ratio, modes=args.modes)
    payload = {"phonon_cap": cap.phonon_cap, "modes": cap.modes, "dim_paper": cap.dim_paper,
               "dim_exact": cap.dim_exact, "equivalent_qubits": cap.equivalent_qubits}
    rows = [[k, str(v) if isinstance(v, int) else v] for k, v in payload.items()]
    _emit(args, rows, ["quantity", "value"], payload)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for noise injection")
    common.add_argument("--format", choices=("table", "json", "csv"), default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")

    p = argparse.ArgumentParser(prog="ioncv", description="Trapped-ion CV gate simulator and pulse compiler")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.add_argument("--out", default=None)
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("compile", parents=[common], help="compile a DSL program to a pulse schedule")
    s.add_argument("program")
    s.add_argument("-o", "--output", default=None, help="schedule file (default: <out>/schedule.json or stdout)")
    s.add_argument("--prep-pulses", action="store_true", help="emit explicit carrier pi/2 prep pulses")
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("run", parents=[common], help="execute a program or schedule")
    s.add_argument("program")
    s.add_argument("--mode", choices=("rwa", "full"), default="rwa")
    s.add_argument("--tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("wigner", parents=[common], help="Wigner function on a grid")
    s.add_argument("source", help="program, schedule (.json) or state dump (.csv)")
    s.add_argument("--mode-id", default="a")
    s.add_argument("--grid", nargs=3, metavar=("XMIN", "XMAX", "N"), default=("-3", "3", "61"))
    s.set_defaults(func=cmd_wigner)

    s = sub.add_parser("readout", parents=[common], help="simulate a readout protocol")
    s.add_argument("source")
    s.add_argument("--protocol", choices=("rabi", "parity"), default="rabi")
    s.add_argument("--T", type=float, default=20000.0, help="trace length (us)")
    s.add_argument("--dt", type=float, default=2.0, help="sampling step (us)")
    s.add_argument("--cap", type=int, default=None, help="phonon cap of the population basis")
    s.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma on P_e")
    s.add_argument("--rabi", type=float, default=None, help="carrier Rabi frequency (default: program Omega)")
    s.add_argument("--m", type=int, default=None, help="commensurability integer (parity)")
    s.add_argument("--paper-norm", action="store_true", help="use 2/pi for any number of modes")
    s.set_defaults(func=cmd_readout)

    s = sub.add_parser("spectrum", parents=[common], help="gate detuning ledger of a trap")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--ratio", help="frequency ratio such as 7:5:4")
    g.add_argument("--freqs", type=float, nargs="+")
    s.add_argument("--base", type=float, default=1.0, help="unit multiplying --ratio")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("capacity", parents=[common], help="Hilbert-space capacity figures")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--phonons", type=int)
    g.add_argument("--eta", type=float)
    g.add_argument("--length-ratio", type=float)
    s.add_argument("--modes", type=int, default=3)
    s.set_defaults(func=cmd_capacity)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (C.DslError, CliParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except IllConditionedError as exc:
        print(f"error: {exc} (condition {exc.condition:.3g})", file=sys.stderr)
        return EXIT_COND
    except (TruncationError, SeparabilityError, DriveError, LayoutError, IntegrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
