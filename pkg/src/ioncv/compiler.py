"""Circuit DSL, pulse-schedule compiler, spectral ledger and capacity figures.

DSL (one statement per line, ``#`` starts a comment)::

    trap wa=7 wb=5 wc=4 eta=0.05 N=15 [Omega=1] [guard=8]
    prep qubit x+
    gate D a alpha=0.1+0.05i
    gate BS a b theta=pi/4 phi=0
    measure wigner a x=0 p=0

Numbers accept ``pi``, arithmetic (``+ - * / **``) and complex literals
written ``a+bi``.
"""

from __future__ import annotations

import ast
import itertools
import json
import math
import operator
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import fock
from .errors import DriveError, IonCVError, LayoutError, TruncationError
from .fock import DEFAULT_GUARD, DEFAULT_LEAK_TOL, HilbertLayout, TrapSpec
from .gates import GateParams, ideal_unitary, laser_to_gate
from .hamiltonians import (
    GAUSSIAN_KINDS,
    DriveConfig,
    LaserTone,
    QubitPrep,
    analyze_tones,
    drive_config,
    wrap_phase,
)

GATE_KINDS = {
    "D": ("displacement", 1),
    "S": ("squeezer", 1),
    "F": ("fourier", 1),
    "BS": ("beamsplitter", 2),
    "TMS": ("tms", 2),
    "CX": ("conditional", 2),
    "BLUE": ("blue", 1),
    "RED": ("red", 1),
}
GATE_KEYS = {
    "D": ({"alpha"},),
    "S": ({"xi"}, {"r", "theta"}),
    "F": ({"theta"},),
    "BS": ({"theta", "phi"}, {"theta"}),
    "TMS": ({"zeta"}, {"r", "phi"}, {"r"}),
    "CX": ({"s"}, {"s", "phi"}),
    "BLUE": ({"area"}, {"area", "phi"}, {"t"}, {"t", "phi"}),
    "RED": ({"area"}, {"area", "phi"}, {"t"}, {"t", "phi"}),
}
MEASURE_KINDS = ("wigner", "rabi", "parity")
QUBIT_AXES = {"x": 0.0, "y": np.pi / 2}


class DslError(IonCVError, ValueError):
    """Parse or validation error carrying a source position."""

    def __init__(self, message, line=None, column=None):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


# -- numbers -----------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_IMAG = re.compile(r"(?<![\w.])((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i\b|(?<![\w.])i\b")


def parse_number(text: str):
    """Evaluate a numeric literal: floats, ``pi``, arithmetic and ``a+bi`` complex."""
    src = _IMAG.sub(lambda m: f"{m.group(1)}j" if m.group(1) else "1j", text.strip())
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError:
        raise ValueError(f"bad number {text!r}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
                and not isinstance(node.value, bool):
            return node.value
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        raise ValueError(f"bad number {text!r}")

    try:
        val = ev(tree)
    except ZeroDivisionError:
        raise ValueError(f"division by zero in {text!r}") from None
    if isinstance(val, complex) and val.imag == 0:
        val = val.real
    return val


# -- program -----------------------------------------------------------------

@dataclass(frozen=True)
class Statement:
    kind: str  # prep | gate | measure
    name: str  # qubit axis, gate mnemonic or measurement kind
    modes: tuple
    params: tuple  # sorted (key, value)
    line: int

    def param(self, key, default=None):
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class CircuitProgram:
    trap: TrapSpec
    rabi: Optional[float]
    statements: tuple


def _tokens(line: str):
    """Whitespace tokens with 1-based columns."""
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _keyvals(tokens, lineno):
    out = {}
    for tok, col in tokens:
        if "=" not in tok:
            raise DslError(f"expected key=value, got {tok!r}", lineno, col)
        key, _, val = tok.partition("=")
        if not key or not val:
            raise DslError(f"malformed parameter {tok!r}", lineno, col)
        if key in out:
            raise DslError(f"duplicate parameter {key!r}", lineno, col)
        try:
            out[key] = parse_number(val)
        except ValueError as exc:
            raise DslError(str(exc), lineno, col + len(key) + 1) from None
    return out


def _real(v, key, lineno, col):
    if isinstance(v, complex):
        raise DslError(f"parameter {key!r} must be real", lineno, col)
    return float(v)


def _parse_trap(tokens, lineno):
    kv = _keyvals(tokens, lineno)
    col = tokens[0][1] if tokens else 1
    allowed = {"wa", "wb", "wc", "eta", "eta_a", "eta_b", "eta_c", "Omega", "N", "guard"}
    for k in kv:
        if k not in allowed:
            raise DslError(f"unknown trap parameter {k!r}", lineno, col)
    freqs = [kv[k] for k in ("wa", "wb", "wc") if k in kv]
    names = [k for k in ("wa", "wb", "wc") if k in kv]
    if not freqs or names != ["wa", "wb", "wc"][: len(names)]:
        raise DslError("trap needs mode frequencies wa[, wb[, wc]] in order", lineno, col)
    if "N" not in kv:
        raise DslError("trap needs the phonon truncation N", lineno, col)
    if "eta" in kv:
        if any(k in kv for k in ("eta_a", "eta_b", "eta_c")):
            raise DslError("give either eta or per-mode eta_a/eta_b/eta_c", lineno, col)
        etas = kv["eta"]
    else:
        keys = ["eta_" + "abc"[i] for i in range(len(freqs))]
        missing = [k for k in keys if k not in kv]
        if missing:
            raise DslError(f"missing Lamb-Dicke parameter(s) {missing}", lineno, col)
        etas = tuple(_real(kv[k], k, lineno, col) for k in keys)
    n = kv["N"]
    if isinstance(n, complex) or n != int(n):
        raise DslError("N must be an integer", lineno, col)
    guard = kv.get("guard", DEFAULT_GUARD)
    try:
        trap = TrapSpec(tuple(_real(f, "w", lineno, col) for f in freqs), etas, int(n), guard=int(guard))
    except (ValueError, LayoutError) as exc:
        raise DslError(str(exc), lineno, col) from None
    rabi = kv.get("Omega")
    if rabi is not None:
        rabi = _real(rabi, "Omega", lineno, col)
        if rabi <= 0:
            raise DslError("Omega must be positive", lineno, col)
    return trap, rabi


def parse_program(text: str) -> CircuitProgram:
    """Parse DSL text into a :class:`CircuitProgram`."""
    trap = rabi = None
    stmts = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        head, hcol = toks[0]
        if head == "trap":
            if trap is not None:
                raise DslError("duplicate trap declaration", lineno, hcol)
            if stmts:
                raise DslError("trap declaration must come first", lineno, hcol)
            trap, rabi = _parse_trap(toks[1:], lineno)
            continue
        if trap is None:
            raise DslError("missing trap declaration", lineno, hcol)
        modes_declared = fock.MODE_NAMES[: trap.n_modes]
        if head == "prep":
            if len(toks) != 3 or toks[1][0] != "qubit":
                raise DslError("expected 'prep qubit <x|y|z><+|->'", lineno, hcol)
            spec, col = toks[2]
            if len(spec) != 2 or spec[0] not in "xyz" or spec[1] not in "+-":
                raise DslError(f"bad qubit state {spec!r}", lineno, col)
            stmts.append(Statement("prep", spec, (), (), lineno))
        elif head == "gate":
            if len(toks) < 2:
                raise DslError("missing gate name", lineno, hcol)
            name, ncol = toks[1]
            if name not in GATE_KINDS:
                raise DslError(f"unknown gate {name!r}", lineno, ncol)
            arity = GATE_KINDS[name][1]
            mode_toks = [t for t in toks[2:] if "=" not in t[0]]
            kv_toks = [t for t in toks[2:] if "=" in t[0]]
            if toks[2:2 + len(mode_toks)] != mode_toks:
                raise DslError("modes must precede parameters", lineno, mode_toks[-1][1])
            if len(mode_toks) != arity:
                col = mode_toks[arity][1] if len(mode_toks) > arity else ncol
                raise DslError(f"gate {name} takes {arity} mode(s), got {len(mode_toks)}", lineno, col)
            for m, col in mode_toks:
                if m not in modes_declared:
                    raise DslError(f"undeclared mode {m!r}", lineno, col)
            if arity == 2 and mode_toks[0][0] == mode_toks[1][0]:
                raise DslError("identical modes", lineno, mode_toks[1][1])
            kv = _keyvals(kv_toks, lineno)
            if set(kv) not in GATE_KEYS[name]:
                options = " or ".join("{" + ", ".join(sorted(s)) + "}" for s in GATE_KEYS[name])
                raise DslError(f"gate {name} expects parameters {options}, got {sorted(kv)}", lineno, ncol)
            for k, v in kv.items():
                if k not in ("alpha", "xi", "zeta"):
                    _real(v, k, lineno, ncol)
            stmts.append(Statement("gate", name, tuple(m for m, _ in mode_toks), tuple(sorted(kv.items())), lineno))
        elif head == "measure":
            if len(toks) < 2 or toks[1][0] not in MEASURE_KINDS:
                col = toks[1][1] if len(toks) > 1 else hcol
                raise DslError(f"expected 'measure <{'|'.join(MEASURE_KINDS)}>'", lineno, col)
            rest = toks[2:]
            mode_toks = [t for t in rest if "=" not in t[0]]
            for m, col in mode_toks:
                if m not in modes_declared:
                    raise DslError(f"undeclared mode {m!r}", lineno, col)
            kv = _keyvals([t for t in rest if "=" in t[0]], lineno)
            stmts.append(Statement("measure", toks[1][0], tuple(m for m, _ in mode_toks),
                                   tuple(sorted(kv.items())), lineno))
        else:
            raise DslError(f"unknown statement {head!r}", lineno, hcol)
    if trap is None:
        raise DslError("missing trap declaration", 1, 1)
    return CircuitProgram(trap, rabi, tuple(stmts))


# -- schedule ----------------------------------------------------------------

@dataclass(frozen=True)
class ScheduleStep:
    """One pulse. ``config`` is None for a bare qubit preparation."""

    prep: Optional[QubitPrep]
    config: Optional[DriveConfig]
    gate_kind: str
    target: tuple = ()  # requested gate parameters, (key, value) pairs
    line: Optional[int] = None

    @property
    def duration(self) -> float:
        return 0.0 if self.config is None else self.config.duration


@dataclass(frozen=True)
class PulseSchedule:
    trap: TrapSpec
    rabi: float
    steps: tuple
    measurements: tuple = ()

    def ledger(self):
        """Per-step gate kind and detunings."""
        return [(s.gate_kind, tuple(t.detuning for t in s.config.tones) if s.config else ())
                for s in self.steps]


def _prep_from(spec: str) -> QubitPrep:
    axis, sign = spec[0], 1 if spec[1] == "+" else -1
    if axis == "z":
        return QubitPrep(None, sign)
    return QubitPrep(QUBIT_AXES[axis], sign)


def _signed(value):
    return (1, value) if value >= 0 else (-1, -value)


def _plan(stmt: Statement, trap: TrapSpec, rabi: float, paper_eta_power: bool):
    """(kind, modes, laser phase, duration, prep sign, lamb_dicke override, target) for a gate."""
    kind = GATE_KINDS[stmt.name][0]
    modes = stmt.modes
    p = dict(stmt.params)
    eta = [trap.eta(m) for m in modes]
    override = None
    if kind == "displacement":
        a = complex(p["alpha"])
        c = eta[0] ** (2 if paper_eta_power else 1)
        return kind, modes, np.angle(a) + np.pi / 2, abs(a) / (c * rabi), 1, None, (("alpha", a),)
    if kind == "squeezer":
        xi = complex(p["xi"]) if "xi" in p else p["r"] * np.exp(2j * p["theta"])
        return kind, modes, np.angle(xi) + np.pi / 2, abs(xi) / (eta[0] ** 2 * rabi), 1, None, (("xi", xi),)
    if kind == "fourier":
        theta = wrap_phase(float(p["theta"]))
        if abs(theta) < 1e-15:
            theta = 0.0
        sign, mag = _signed(theta)
        others = [m for m in fock.MODE_NAMES[: trap.n_modes] if m != modes[0]]
        override = tuple((m, 0.0) for m in others) or None
        return kind, modes, 0.0, 2 * mag / (eta[0] ** 2 * rabi), sign, override, (("theta", theta),)
    c2 = 2 * eta[0] * eta[1] if len(eta) == 2 else None
    if kind == "beamsplitter":
        sign, mag = _signed(float(p["theta"]))
        phi = float(p.get("phi", 0.0))
        return kind, modes, phi, mag / (c2 * rabi), sign, None, (("theta", float(p["theta"])), ("phi", phi))
    if kind == "tms":
        zeta = complex(p["zeta"]) if "zeta" in p else float(p["r"]) * np.exp(1j * float(p.get("phi", 0.0)))
        return kind, modes, np.angle(zeta) - np.pi / 2, abs(zeta) / (c2 * rabi), 1, None, (("zeta", zeta),)
    if kind == "conditional":
        sign, mag = _signed(float(p["s"]))
        phi = float(p.get("phi", np.pi / 2))
        return kind, modes, phi, mag / (c2 * rabi), sign, None, (("s", float(p["s"])), ("phi", phi))
    # sidebands
    phi = float(p.get("phi", 0.0))
    if "area" in p:
        area = float(p["area"])
        if area < 0:
            raise DslError("sideband area must be non-negative", stmt.line)
        t = area / (eta[0] * rabi)
    else:
        t = float(p["t"])
        if t < 0:
            raise DslError("sideband duration must be non-negative", stmt.line)
        area = eta[0] * rabi * t
    return kind, modes, phi, t, None, None, (("area", area), ("phi", phi))


def _budget_layout(trap: TrapSpec, n_modes: int) -> HilbertLayout:
    return HilbertLayout(n_modes, trap.truncation, trap.guard)


def compile_program(program: CircuitProgram, rabi_default: float = 1.0, *,
                    prep_pulses: bool = False, paper_eta_power: bool = False,
                    leak_tol: float = DEFAULT_LEAK_TOL) -> PulseSchedule:
    """Lower a program to a pulse schedule.

    Each Gaussian gate becomes one drive whose qubit preparation is the
    ``+1`` (or ``-1``) eigenstate of the Pauli operator its Hamiltonian
    carries; the laser phase and duration are solved so that
    :func:`laser_to_gate` returns the requested parameters. With
    ``prep_pulses`` the preparations are emitted as explicit carrier pi/2
    pulses, which requires the qubit state to be known at every Gaussian
    gate.
    """
    trap = program.trap
    rabi = program.rabi if program.rabi is not None else float(rabi_default)
    steps = []
    known = "g"  # qubit state tracking for explicit prep pulses: "g", QubitPrep, or None
    for st in program.statements:
        if st.kind == "measure":
            continue
        if st.kind == "prep":
            prep = _prep_from(st.name)
            steps.append(ScheduleStep(prep, None, "prep", (("state", st.name),), st.line))
            known = prep
            continue
        kind, modes, phase, t, sign, override, target = _plan(st, trap, rabi, paper_eta_power)
        t = float(t)
        if t == 0:
            continue
        if not np.isfinite(t):
            raise DriveError(f"line {st.line}: gate parameter not reachable (zero coupling)")
        phase = wrap_phase(phase)
        tmp = drive_config(kind, modes, rabi, phase, t, trap, lamb_dicke_override=override)
        prep = None
        if kind in GAUSSIAN_KINDS:
            axis = wrap_phase(analyze_tones(tmp, trap).axis)
            prep = QubitPrep(axis, sign)
        config = DriveConfig(tmp.tones, t, kind, modes, prep, override)
        if kind in GAUSSIAN_KINDS:
            params = laser_to_gate(config, trap, paper_eta_power)
            sub = _budget_layout(trap, len(modes))
            local = GateParams(**{**params.__dict__, "modes": tuple(fock.MODE_NAMES[: len(modes)])}) \
                if kind != "fourier" else GateParams("fourier", ("a",), theta=(("a", params.theta[0][1]),))
            try:
                ideal_unitary(local, sub, leak_tol)
            except TruncationError as exc:
                raise TruncationError(f"line {st.line}: {exc}", leak=exc.leak) from None
            if prep_pulses:
                if known is None:
                    raise DriveError(f"line {st.line}: explicit prep pulses need a known qubit state")
                steps.extend(_prep_pulse_steps(known, prep, trap, rabi, st.line))
                steps.append(ScheduleStep(None, config, kind, target, st.line))
                known = prep
                continue
        else:
            known = None
        steps.append(ScheduleStep(prep, config, kind, target, st.line))
    meas = tuple(s for s in program.statements if s.kind == "measure")
    return PulseSchedule(trap, rabi, tuple(steps), meas)


def _prep_pulse_steps(known, prep: QubitPrep, trap, rabi, line):
    """Carrier pi/2 pulses taking ``known`` (``'g'`` or an equatorial prep) to ``prep``."""
    eff = (1.0 - sum(e * e for e in trap.lamb_dicke)) * rabi
    dur = np.pi / (2 * eff)
    out = []

    def pulse(phase):
        cfg = DriveConfig((LaserTone(0.0, wrap_phase(phase), rabi),), dur, "carrier")
        return ScheduleStep(None, cfg, "carrier", (("area", np.pi / 2), ("phi", wrap_phase(phase))), line)

    if isinstance(known, QubitPrep):
        if known.angle is None:
            raise DriveError(f"line {line}: explicit prep pulses start from |g> or an equatorial state")
        if abs(wrap_phase(known.angle - prep.angle)) < 1e-12 and known.sign == prep.sign:
            return out
        # undo: the pi/2 pulse of phase psi maps |g> to the prep; phase psi + pi maps it back
        back = known.angle - np.pi / 2 if known.sign >= 0 else known.angle + np.pi / 2
        out.append(pulse(back + np.pi))
    fwd = prep.angle - np.pi / 2 if prep.sign >= 0 else prep.angle + np.pi / 2
    out.append(pulse(fwd))
    return out


# -- serialisation -----------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            raise ValueError("non-finite float in output")
        if v == 0:
            v = 0.0
        s = format(v, ".17g")
        return s if any(ch in s for ch in ".en") else s + ".0"
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    raise TypeError(f"cannot serialise {type(v).__name__}")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits and insertion-ordered keys."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, complex):
        obj = [obj.real, obj.imag]
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple, complex)) for x in obj):
            return "[" + ", ".join(_fmt(x) for x in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(x, indent, _level + 1) for x in obj) + "\n" + pad + "]"
    return _fmt(obj)


def _prep_dict(prep):
    if prep is None:
        return None
    if prep.angle is None:
        return {"axis": "z", "sign": int(prep.sign)}
    return {"angle": float(prep.angle), "sign": int(prep.sign)}


def _value(v):
    return [float(v.real), float(v.imag)] if isinstance(v, complex) else v


def schedule_to_dict(schedule: PulseSchedule) -> dict:
    trap = schedule.trap
    steps = []
    for i, s in enumerate(schedule.steps):
        cfg = s.config
        steps.append({
            "step_index": i,
            "prep": _prep_dict(s.prep),
            "tones": [{"detuning": t.detuning, "phase": t.phase, "rabi": t.rabi} for t in cfg.tones] if cfg else [],
            "duration_us": s.duration,
            "gate_kind": s.gate_kind,
            "modes": list(cfg.modes) if cfg else [],
            "lamb_dicke": {m: e for m, e in cfg.lamb_dicke_override} if cfg and cfg.lamb_dicke_override else None,
            "target": {k: _value(v) for k, v in s.target},
            "line": s.line,
        })
    return {
        "trap": {
            "mode_freqs": list(trap.mode_freqs),
            "lamb_dicke": list(trap.lamb_dicke),
            "truncation": trap.truncation,
            "guard": trap.guard,
            "rabi": schedule.rabi,
        },
        "steps": steps,
        "measurements": [
            {"kind": m.name, "modes": list(m.modes), "params": {k: _value(v) for k, v in m.params}, "line": m.line}
            for m in schedule.measurements
        ],
    }


def schedule_to_json(schedule: PulseSchedule) -> str:
    return dumps(schedule_to_dict(schedule)) + "\n"


def schedule_from_json(text: str) -> PulseSchedule:
    d = json.loads(text)
    tr = d["trap"]
    trap = TrapSpec(tuple(tr["mode_freqs"]), tuple(tr["lamb_dicke"]), int(tr["truncation"]), guard=int(tr["guard"]))
    steps = []
    for s in d["steps"]:
        pr = s["prep"]
        prep = None
        if pr is not None:
            prep = QubitPrep(None if pr.get("axis") == "z" else float(pr["angle"]), int(pr["sign"]))
        target = tuple((k, complex(*v) if isinstance(v, list) else v) for k, v in s["target"].items())
        cfg = None
        if s["tones"]:
            tones = tuple(LaserTone(t["detuning"], t["phase"], t["rabi"]) for t in s["tones"])
            ld = tuple(sorted(s["lamb_dicke"].items())) if s["lamb_dicke"] else None
            cfg = DriveConfig(tones, s["duration_us"], s["gate_kind"], tuple(s["modes"]), prep, ld)
        steps.append(ScheduleStep(prep, cfg, s["gate_kind"], target, s.get("line")))
    meas = tuple(Statement("measure", m["kind"], tuple(m["modes"]),
                           tuple(sorted((k, complex(*v) if isinstance(v, list) else v) for k, v in m["params"].items())),
                           m["line"]) for m in d["measurements"])
    return PulseSchedule(trap, float(tr["rabi"]), tuple(steps), meas)


# -- spectral ledger and capacity -------------------------------------------

@dataclass(frozen=True)
class SpectrumReport:
    detunings: tuple  # distinct values, ascending
    labels: tuple  # (label, value) for every gate line
    min_gap: float
    collisions: tuple  # ((label1, label2), ...)


def spectrum_check(trap_or_freqs, rtol: float = 1e-9) -> SpectrumReport:
    """Enumerate ``w_s, 2 w_s, |w_s - w_s'|, w_s + w_s'`` and report gaps and coincidences."""
    freqs = trap_or_freqs.mode_freqs if isinstance(trap_or_freqs, TrapSpec) else tuple(trap_or_freqs)
    if not 1 <= len(freqs) <= 3:
        raise LayoutError("spectrum check takes 1 to 3 modes")
    names = fock.MODE_NAMES
    lines = []
    for i, w in enumerate(freqs):
        lines.append((f"w_{names[i]}", float(w)))
    for i, w in enumerate(freqs):
        lines.append((f"2w_{names[i]}", 2.0 * w))
    for i, j in itertools.combinations(range(len(freqs)), 2):
        lines.append((f"|w_{names[i]}-w_{names[j]}|", abs(float(freqs[i] - freqs[j]))))
    for i, j in itertools.combinations(range(len(freqs)), 2):
        lines.append((f"w_{names[i]}+w_{names[j]}", float(freqs[i] + freqs[j])))
    scale = max(v for _, v in lines)
    collisions = tuple((a[0], b[0]) for a, b in itertools.combinations(lines, 2)
                       if abs(a[1] - b[1]) <= rtol * scale)
    distinct = []
    for v in sorted(v for _, v in lines):
        if not distinct or v - distinct[-1] > rtol * scale:
            distinct.append(v)
    gaps = np.diff(distinct)
    return SpectrumReport(tuple(distinct), tuple(lines), float(gaps.min()) if gaps.size else math.inf, collisions)


@dataclass(frozen=True)
class Capacity:
    phonon_cap: int
    modes: int
    dim_paper: int
    dim_exact: int
    equivalent_qubits: float


def capacity(phonons: Optional[int] = None, eta: Optional[float] = None,
             length_ratio: Optional[float] = None, modes: int = 3) -> Capacity:
    """Phonon cap and Hilbert-space size from exactly one sizing rule.

    ``eta`` uses ``N = 0.01 / eta^2``; ``length_ratio`` (``l / x_s``) uses
    ``N = (l/x_s)^2 - 1``. ``dim_paper = N^modes`` and
    ``dim_exact = (N + 1)^modes``; qubits are ``log2(dim_paper)``.
    """
    given = [x is not None for x in (phonons, eta, length_ratio)]
    if sum(given) != 1:
        raise ValueError("give exactly one of phonons, eta, length_ratio")
    if phonons is not None:
        n = int(phonons)
    elif eta is not None:
        if not 0 < eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        n = int(math.floor(0.01 / eta ** 2 + 1e-9))
    else:
        if length_ratio < 1:
            raise ValueError("length ratio must be >= 1")
        n = int(round(length_ratio ** 2)) - 1
    if n < 1:
        raise ValueError("phonon cap below 1")
    return Capacity(n, modes, n ** modes, (n + 1) ** modes, modes * math.log2(n))


# -- execution ---------------------------------------------------------------

@dataclass(frozen=True)
class StepResult:
    index: int
    gate_kind: str
    duration: float
    fidelity: float
    purity: float
    leak: float
    flagged: bool


def execute(schedule: PulseSchedule, mode: str = "rwa", *, tol: float = 1e-9,
            leak_tol: float = DEFAULT_LEAK_TOL, paper_eta_power: bool = False,
            layout: Optional[HilbertLayout] = None):
    """Run a schedule from ``|g> x vacuum``; returns ``(final_state, [StepResult])``.

    Each step's fidelity compares the evolved state with the ideal unitary
    (from :func:`laser_to_gate`) applied to the same input.
    """
    from .evolution import prepare_qubit, run_gate, state_fidelity

    trap = schedule.trap
    layout = layout or trap.layout()
    state = fock.basis_state("g", [0] * trap.n_modes, layout)
    results = []
    for i, step in enumerate(schedule.steps):
        if step.config is None:
            state = prepare_qubit(state, step.prep)
            results.append(StepResult(i, "prep", 0.0, 1.0, fock.qubit_separability(state), state.leak, False))
            continue
        cfg = step.config
        start = prepare_qubit(state, cfg.qubit_prep) if cfg.qubit_prep is not None else state
        try:
            rep = run_gate(cfg, trap, start, mode, tol=tol, leak_tol=leak_tol, paper_eta_power=paper_eta_power)
        except IonCVError as exc:
            named = type(exc)(f"step {i} ({step.gate_kind}, line {step.line}): {exc}")
            named.__dict__.update(exc.__dict__)
            raise named from None
        params = laser_to_gate(cfg, trap, paper_eta_power)
        u = ideal_unitary(params, layout, leak_tol=np.inf)
        ideal = fock.StateVector(u.matrix @ start.amplitudes, layout)
        results.append(StepResult(i, step.gate_kind, cfg.duration, state_fidelity(rep.final_state, ideal),
                                  rep.qubit_purity, rep.leak, rep.flagged))
        state = rep.final_state
    return state, results

