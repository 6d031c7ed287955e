"""Command-line front end.

Every run writes a table (CSV with a ``#`` metadata header) or a JSON
document ``{"metadata": ..., "result": ...}``. The metadata block echoes the
tool version, subcommand, seed, constants and every resolved parameter, and
contains nothing run-dependent, so identical inputs give identical bytes.

Parameters come from flags, then from ``--config FILE`` (``key = value``
lines), then from built-in defaults. Unknown keys are a usage error (exit 2);
errors raised by the simulation are reported on stderr as a JSON record and
exit with status 1.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .causal import game as cg
from .causal.gravity import (
    C_SI,
    CONVENTIONS,
    GravitationalScenario,
    gravitational_switch,
    metric_factor,
    signal_order,
    signal_threshold,
)
from .causal.switch import ClockBrokenOps, SwitchSpec, quantum_switch, quantum_switch_clock_broken
from .causal.temporal_bell import classical_order_chsh, temporal_bell_protocol
from .core import StateVector, apply, basis_state, make_rng
from .errors import PostSelectionError, QigravError
from .expr import ExpressionError, parse_grid, parse_operator, parse_scalar, parse_state
from .gates import compose, parse_circuit
from .gie import G_SI, HBAR_SI, GIEParams, gie_entanglement_sweep, gie_phi_sweep, param_grid
from .interferometry import MachZehnderConfig, SternGerlachChain, mz_sweep, stern_gerlach_chain
from .nonlocality import (
    QuantumCHSHResult,
    bell_state,
    chsh_value,
    classical_chsh_max,
    default_strategy,
    lhv_correlators,
    load_lhv_model,
    optimal_chsh_settings,
    quantum_chsh,
)

TOOL = "qigrav"
OUTPUT_DIR_ENV = "QIGRAV_OUTPUT_DIR"
EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2
# stream reserved for drawing a random strategy, away from the round streams
STRATEGY_STREAM = 2**31


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parameter declarations


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ExpressionError(f"{text!r} is not an integer") from None


def _pos_int(text: str) -> int:
    v = _int(text)
    if v < 1:
        raise ExpressionError(f"expected a positive integer, got {v}")
    return v


def _opt_pos_int(text: str) -> int | None:
    return None if text in ("", "none") else _pos_int(text)


def _opt_scalar(text: str) -> float | None:
    return None if text in ("", "none", "auto") else parse_scalar(text)


def _opt_grid(text: str):
    return None if text in ("", "none") else parse_grid(text)


def _choice(*options: str) -> Callable[[str], str]:
    def conv(text: str) -> str:
        if text not in options:
            raise ExpressionError(f"{text!r} is not one of {', '.join(options)}")
        return text

    return conv


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ExpressionError(f"{text!r} is not a boolean")


def _axes(text: str) -> tuple[str, ...]:
    return tuple(a.strip() for a in text.split(",") if a.strip())


def _str(text: str) -> str:
    return text


@dataclass(frozen=True)
class Param:
    name: str
    default: str | None
    conv: Callable[[str], Any]
    help: str

    @property
    def flag(self) -> str:
        return "--" + self.name.replace("_", "-")


@dataclass(frozen=True)
class Command:
    name: str
    help: str
    params: tuple[Param, ...]
    run: Callable[[dict, "Context"], "Output"]
    default_format: str = "csv"
    modes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Context:
    seed: int
    G: float
    hbar: float
    c: float


@dataclass
class Output:
    columns: list | None = None
    rows: list | None = None
    document: Any = None  # JSON payload; tables are converted when needed


# ---------------------------------------------------------------------------
# serialization


def _jsonable(x):
    if isinstance(x, StateVector):
        return _jsonable(x.amplitudes)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(float(x.real)), _jsonable(float(x.imag))]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _cell(x) -> str:
    x = _jsonable(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return ""
    if isinstance(x, (list, dict)):
        return json.dumps(x, separators=(",", ":"))
    return str(x)


def render(out: Output, fmt: str, metadata: dict) -> str:
    if fmt == "json":
        result = out.document
        if result is None:
            result = [dict(zip(out.columns, row)) for row in out.rows]
        doc = {"metadata": metadata, "result": result}
        return json.dumps(_jsonable(doc), indent=2) + "\n"
    if out.columns is None:
        raise UsageError("this result has no tabular form; use --format json")
    buf = io.StringIO()
    buf.write(f"# tool: {metadata['tool']} {metadata['version']}\n")
    buf.write(f"# subcommand: {metadata['subcommand']}\n")
    buf.write(f"# seed: {metadata['seed']}\n")
    buf.write(f"# constants: {json.dumps(_jsonable(metadata['constants']), sort_keys=True)}\n")
    buf.write(f"# parameters: {json.dumps(_jsonable(metadata['parameters']), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(out.columns)
    for row in out.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _state_doc(state: StateVector | None):
    return None if state is None else {"dims": list(state.dims), "amplitudes": state.amplitudes}


def _branches_doc(branches: dict) -> dict:
    return {k: {"probability": b.probability, "state": _state_doc(b.state)} for k, b in branches.items()}


# ---------------------------------------------------------------------------
# subcommands


def run_mz(p: dict, ctx: Context) -> Output:
    rows = mz_sweep(p["phi_grid"], MachZehnderConfig(p["shots"], ctx.seed))
    if p["shots"] is None:
        return Output(["phi", "p_d1", "p_d2"], [[r.phi, r.p_d1, r.p_d2] for r in rows])
    return Output(
        ["phi", "p_d1", "p_d2", "n_d1", "n_d2"], [[r.phi, r.p_d1, r.p_d2, r.n_d1, r.n_d2] for r in rows]
    )


def run_sg(p: dict, ctx: Context) -> Output:
    chain = SternGerlachChain(p["axes"], p["shots"], ctx.seed, parse_state(p["initial"]))
    res = stern_gerlach_chain(chain)
    return Output(
        ["stage", "axis", "outcome", "count", "frequency"],
        [[r.stage, r.axis, r.outcome, r.count, r.count / chain.n_shots] for r in res.rows],
    )


def _chsh_settings(state, name):
    return optimal_chsh_settings(state) if name == "optimal" else default_strategy(state)


def run_chsh(p: dict, ctx: Context) -> Output:
    mode = p["mode"]
    if mode == "classical-max":
        r = classical_chsh_max()
        return Output(["value", "n_strategies", "n_optimal"], [[r.value, r.n_strategies, len(r.argmax)]])
    if mode == "quantum":
        state = bell_state(p["state"])
        r = quantum_chsh(_chsh_settings(state, p["settings"]))
    else:
        if not p["file"]:
            raise UsageError("chsh lhv-file needs --file")
        corr = lhv_correlators(load_lhv_model(p["file"]))
        r = QuantumCHSHResult(corr, chsh_value(corr))
    c = r.correlators
    return Output(
        ["E00", "E01", "E10", "E11", "value"], [[c[0, 0], c[0, 1], c[1, 0], c[1, 1], r.value]]
    )


def run_circuit(p: dict, ctx: Context) -> Output:
    if p["file"]:
        text = Path(p["file"]).read_text()
    elif p["text"]:
        text = p["text"].replace(";", "\n")
    else:
        raise UsageError("circuit needs --file or --text")
    circ = parse_circuit(text)
    u = compose(circ)
    n = circ.n_qubits
    bits = p["input"] or "0" * n
    if len(bits) != n or set(bits) - {"0", "1"}:
        raise UsageError(f"--input must be a bit string of length {n}")
    state = apply(u, basis_state(int(bits, 2), (2,) * n))
    if p["show"] == "matrix":
        m = u.matrix
        return Output(
            ["row", "col", "re", "im"],
            [[i, j, m[i, j].real, m[i, j].imag] for i in range(m.shape[0]) for j in range(m.shape[1])],
            {"unitary": m, "final_state": _state_doc(state)},
        )
    a = state.amplitudes
    return Output(
        ["basis", "re", "im", "probability"],
        [[format(k, f"0{n}b"), a[k].real, a[k].imag, abs(a[k]) ** 2] for k in range(a.size)],
        {"unitary": u.matrix, "final_state": _state_doc(state)},
    )


def run_gie(p: dict, ctx: Context) -> Output:
    if p["phi_grid"] is not None:
        rows = gie_phi_sweep(p["phi_grid"], p["variant"])
    else:
        base = GIEParams(p["m"], p["d2"], p["t"], G=ctx.G, hbar=ctx.hbar)
        grid = param_grid(base, p["m_grid"], p["d2_grid"], p["t_grid"])
        rows = gie_entanglement_sweep(grid, p["variant"])
    cols = ["m", "d2", "t", "phi", "entropy", "negativity", "separable"]
    return Output(cols, [[getattr(r, k) for k in cols] for r in rows])


def _game_strategy(p: dict, ctx: Context) -> cg.CausalGameStrategy:
    name = p["strategy"]
    if name == "optimal":
        return cg.optimal_strategy(p["alphabet"], p["order"])
    if name == "random-guess":
        return cg.random_guess_strategy(p["alphabet"], 1.0 if p["order"] == cg.A_BEFORE_B else 0.0)
    return cg.random_strategy(make_rng(ctx.seed, STRATEGY_STREAM), p["alphabet"])


def run_causal_game(p: dict, ctx: Context) -> Output:
    backend = None if p["backend"] == "auto" else p["backend"]
    if p["mode"] == "max":
        r = cg.causal_game_classical_max(p["alphabet"], backend)
        rows = [
            [o.order, str(o.p_suc), float(o.p_suc), o.n_strategies, o.n_optimal] for o in r.per_order.values()
        ]
        rows.append(["any", str(r.p_suc), float(r.p_suc), r.n_strategies, ""])
        return Output(["order", "p_suc", "p_suc_float", "n_strategies", "n_optimal"], rows)
    strat = _game_strategy(p, ctx)
    sim = cg.causal_game_simulate(strat, p["rounds"], ctx.seed, p["workers"], backend)
    p0 = sim.wins_b0 / sim.n_b0 if sim.n_b0 else 0.0
    p1 = sim.wins_b1 / sim.n_b1 if sim.n_b1 else 0.0
    exact = cg.success_probability(strat)
    return Output(
        ["strategy", "rounds", "p_suc", "std_error", "p_suc_exact", "wins_b0", "n_b0", "wins_b1", "n_b1"],
        [
            [
                p["strategy"],
                sim.n_rounds,
                sim.p_suc,
                cg.standard_error(p0, p1, sim.n_rounds),
                float(exact),
                sim.wins_b0,
                sim.n_b0,
                sim.wins_b1,
                sim.n_b1,
            ]
        ],
    )


def _branch_rows(branches: dict) -> list:
    rows = []
    for label, b in branches.items():
        if b.state is None:
            rows.append([label, b.probability, "", "", ""])
            continue
        for k, amp in enumerate(b.state.amplitudes):
            rows.append([label, b.probability, k, amp.real, amp.imag])
    return rows


_BRANCH_COLS = ["branch", "probability", "index", "re", "im"]


def run_qswitch(p: dict, ctx: Context) -> Output:
    op_a, op_b = parse_operator(p["op_a"]), parse_operator(p["op_b"])
    control, target = parse_state(p["control"]), parse_state(p["target"])
    clock = [p[k] for k in ("a_early", "a_late", "b_early", "b_late")]
    if any(clock):
        ops = ClockBrokenOps(
            parse_operator(p["a_early"] or p["op_a"]),
            parse_operator(p["a_late"] or p["op_a"]),
            parse_operator(p["b_early"] or p["op_b"]),
            parse_operator(p["b_late"] or p["op_b"]),
        )
        res = quantum_switch_clock_broken(SwitchSpec(op_a, op_b, control, target, ops), p["renormalize"])
    else:
        res = quantum_switch(SwitchSpec(op_a, op_b, control, target), p["renormalize"])
    doc = {"joint": _state_doc(res.joint), "branches": _branches_doc(res.branches)}
    return Output(_BRANCH_COLS, _branch_rows(res.branches), doc)


def _scenario(p: dict, ctx: Context) -> GravitationalScenario:
    t_c = p["T_c"] if p["T_c"] is not None else abs(p["R_a"] - p["R_b"]) / ctx.c
    tau = p["tau_star"]
    if tau is None:
        # twice the larger of the two configurations' thresholds
        probe = GravitationalScenario(p["M"], p["R_a"], p["R_b"], t_c, 0.0, ctx.G, ctx.c)
        tau = 2 * max(signal_threshold(probe, p["convention"]), signal_threshold(probe.mirrored(), p["convention"]))
        if not math.isfinite(tau):
            tau = 0.0
    return GravitationalScenario(p["M"], p["R_a"], p["R_b"], t_c, tau, ctx.G, ctx.c)


def run_grav_switch(p: dict, ctx: Context) -> Output:
    s = _scenario(p, ctx)
    conv = p["convention"]
    summary = {
        "g_A": metric_factor(s.M, s.R_A, s.G, s.c),
        "g_B": metric_factor(s.M, s.R_B, s.G, s.c),
        "T_c": s.T_c,
        "tau_star": s.tau_star,
        "threshold": signal_threshold(s, conv),
        "order": signal_order(s, conv).value,
        "mirrored_threshold": signal_threshold(s.mirrored(), conv),
        "mirrored_order": signal_order(s.mirrored(), conv).value,
    }
    if p["order_only"]:
        return Output(list(summary), [list(summary.values())], {"scenario": summary})
    res = gravitational_switch(
        s, parse_operator(p["op_a"]), parse_operator(p["op_b"]), parse_state(p["target"]), conv, p["renormalize"]
    )
    doc = {
        "scenario": summary,
        "joint": _state_doc(res.joint),
        "branches": _branches_doc(res.branches),
        "order_branches": _branches_doc(res.order_branches),
    }
    return Output(_BRANCH_COLS, _branch_rows({**res.branches, **res.order_branches}), doc)


def run_temporal_bell(p: dict, ctx: Context) -> Output:
    op_a, op_b = parse_operator(p["op_a"]), parse_operator(p["op_b"])
    init = parse_state(p["init"])
    res = temporal_bell_protocol(op_a, op_b, init, p["settings"], p["renormalize"])
    branches = {}
    rows = []
    for label, b in res.branches.items():
        entry = {"probability": b.probability, "state": _state_doc(b.state)}
        if b.chsh is not None:
            c = b.chsh.correlators
            entry["chsh"] = {"value": b.chsh.value, "correlators": {f"E{i}{j}": v for (i, j), v in c.items()}}
            rows.append([label, b.probability, b.chsh.value, c[0, 0], c[0, 1], c[1, 0], c[1, 1]])
        else:
            entry["chsh"] = None
            rows.append([label, b.probability, "", "", "", "", ""])
        branches[label] = entry
    doc = {
        "joint": _state_doc(res.joint),
        "branches": branches,
        "classical_order_max_chsh": classical_order_chsh(op_a, op_b, init),
    }
    return Output(["branch", "probability", "chsh", "E00", "E01", "E10", "E11"], rows, doc)


_OP_PARAMS = (
    Param("op_a", "(I+X)/sqrt(2)", _str, "Alice's operation, e.g. '(I+X)/sqrt(2)'"),
    Param("op_b", "Z", _str, "Bob's operation"),
    Param("renormalize", "false", _bool, "rescale when the operations change the norm"),
)

COMMANDS = {
    c.name: c
    for c in (
        Command(
            "mz",
            "Mach-Zehnder detection probabilities over a phase grid",
            (
                Param("phi_grid", "0:2pi:64", parse_grid, "phases as start:end:count (end included) or a list"),
                Param("shots", "none", _opt_pos_int, "Monte Carlo shots per phase (none: analytic only)"),
            ),
            run_mz,
        ),
        Command(
            "sg",
            "sequential Stern-Gerlach measurements",
            (
                Param("axes", "z,x,z", _axes, "comma-separated measurement axes (z or x)"),
                Param("shots", "100000", _pos_int, "number of particles"),
                Param("initial", "up-z", _str, "initial spin state"),
            ),
            run_sg,
        ),
        Command(
            "chsh",
            "CHSH values: classical maximum, quantum strategy or an LHV model file",
            (
                Param("state", "phi+", _str, "Bell state for the quantum mode"),
                Param("settings", "standard", _choice("standard", "optimal"), "measurement settings"),
                Param("file", "", _str, "JSON LHV model for lhv-file mode"),
            ),
            run_chsh,
            modes=("classical-max", "quantum", "lhv-file"),
        ),
        Command(
            "circuit",
            "compose a gate circuit and apply it to a basis state",
            (
                Param("file", "", _str, "circuit file ('GATE w[,w]' per line)"),
                Param("text", "", _str, "inline circuit, lines separated by ';'"),
                Param("input", "", _str, "input bit string (default all zeros)"),
                Param("show", "state", _choice("state", "matrix"), "emit the final state or the unitary"),
            ),
            run_circuit,
        ),
        Command(
            "gie",
            "gravitationally induced entanglement sweep",
            (
                Param("variant", "path", _choice("path", "spin"), "which-path or spin encoding"),
                Param("phi_grid", "none", _opt_grid, "sweep raw phases instead of physical parameters"),
                Param("m", "1e-14", parse_scalar, "mass (kg)"),
                Param("d2", "2e-4", parse_scalar, "closest separation (m)"),
                Param("t", "2.5", parse_scalar, "interaction time (s)"),
                Param("m_grid", "none", _opt_grid, "grid over m"),
                Param("d2_grid", "none", _opt_grid, "grid over d2"),
                Param("t_grid", "none", _opt_grid, "grid over t"),
            ),
            run_gie,
        ),
        Command(
            "causal-game",
            "causal-inequality game: exhaustive classical maximum or Monte Carlo",
            (
                Param("alphabet", "2", _pos_int, "message alphabet size"),
                Param("strategy", "optimal", _choice("optimal", "random-guess", "random"), "strategy to simulate"),
                Param("order", cg.A_BEFORE_B, _choice(cg.A_BEFORE_B, cg.B_BEFORE_A), "order for the strategy"),
                Param("rounds", "100000", _pos_int, "Monte Carlo rounds"),
                Param("workers", "1", _pos_int, "independent random streams"),
                Param("backend", "auto", _choice("auto", "compiled", "python"), "kernel implementation"),
            ),
            run_causal_game,
            modes=("max", "simulate"),
        ),
        Command(
            "qswitch",
            "quantum switch with post-selected control branches",
            _OP_PARAMS
            + (
                Param("control", "+", _str, "control qubit state"),
                Param("target", "up-z", _str, "target qubit state"),
                Param("a_early", "", _str, "clock-dependent: A's operation when acting first"),
                Param("a_late", "", _str, "clock-dependent: A's operation when acting second"),
                Param("b_early", "", _str, "clock-dependent: B's operation when acting first"),
                Param("b_late", "", _str, "clock-dependent: B's operation when acting second"),
            ),
            run_qswitch,
            default_format="json",
        ),
        Command(
            "grav-switch",
            "signal ordering near a mass and the gravitational switch",
            _OP_PARAMS
            + (
                Param("M", "2e30", parse_scalar, "mass (kg)"),
                Param("R_a", "1e9", parse_scalar, "Alice's radial distance (m)"),
                Param("R_b", "1e7", parse_scalar, "Bob's radial distance (m)"),
                Param("T_c", "auto", _opt_scalar, "light travel time (s); auto: |R_a - R_b| / c"),
                Param("tau_star", "auto", _opt_scalar, "proper-time mark (s); auto: twice the larger threshold"),
                Param("convention", "sqrt", _choice(*CONVENTIONS), "threshold formula"),
                Param("target", "up-z", _str, "target qubit state"),
                Param("order_only", "false", _bool, "only report the ordering analysis"),
            ),
            run_grav_switch,
            default_format="json",
        ),
        Command(
            "temporal-bell",
            "Bell test for temporal order",
            _OP_PARAMS
            + (
                Param("init", "00", _str, "two-qubit product input, e.g. '00' or 'up-z,up-x'"),
                Param("settings", "optimal", _choice("optimal", "x-basis"), "CHSH settings per branch"),
            ),
            run_temporal_bell,
            default_format="json",
        ),
    )
}

GLOBAL_KEYS = ("seed", "format", "output", "G", "hbar", "c")


# ---------------------------------------------------------------------------
# argument handling


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=TOOL, description="Quantum information and gravity simulations.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND", parser_class=_Parser)
    sub.required = True
    for cmd in COMMANDS.values():
        sp = sub.add_parser(cmd.name, help=cmd.help, description=cmd.help)
        if cmd.modes:
            sp.add_argument("mode", choices=cmd.modes)
        sp.add_argument("--config", help="file of 'key = value' lines")
        sp.add_argument("--seed", help="64-bit unsigned seed (default 0)")
        sp.add_argument("--format", help=f"csv or json (default {cmd.default_format})")
        sp.add_argument("--output", "-o", help=f"output file (default stdout, or ${OUTPUT_DIR_ENV}/<name>)")
        sp.add_argument("--G", dest="G", help="gravitational constant override")
        sp.add_argument("--hbar", help="reduced Planck constant override")
        sp.add_argument("--c", dest="c", help="speed of light override")
        for prm in cmd.params:
            sp.add_argument(prm.flag, dest=prm.name, help=f"{prm.help} (default {prm.default!r})")
    return parser


def _normalize_key(key: str) -> str:
    return key.strip().replace("-", "_")


def load_config(path: str) -> dict[str, str]:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = _normalize_key(key)
        if key in out:
            raise UsageError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def _resolve(args: argparse.Namespace, cmd: Command) -> tuple[dict, dict, dict, Context]:
    config = load_config(args.config) if args.config else {}
    allowed = {p.name for p in cmd.params} | set(GLOBAL_KEYS)
    if cmd.modes:
        allowed.add("mode")
    unknown = sorted(set(config) - allowed)
    if unknown:
        raise UsageError(f"unknown config keys for {cmd.name}: {', '.join(unknown)}")

    def pick(name, default):
        value = getattr(args, name, None)
        if value is None:
            value = config.get(name, default)
        return value

    if cmd.modes and "mode" in config and config["mode"] != args.mode:
        raise UsageError(f"config mode {config['mode']!r} conflicts with {args.mode!r}")
    params, raw = {}, {}
    for prm in cmd.params:
        text = pick(prm.name, prm.default)
        try:
            params[prm.name] = prm.conv(text)
        except ExpressionError as exc:
            raise UsageError(f"{prm.flag}: {exc}") from None
        raw[prm.name] = text
    if cmd.modes:
        params["mode"] = raw["mode"] = args.mode
    try:
        seed = int(pick("seed", "0"))
    except ValueError:
        raise UsageError("--seed must be an integer") from None
    if not 0 <= seed < 2**64:
        raise UsageError("--seed must lie in [0, 2**64)")
    consts = {}
    for name, default in (("G", G_SI), ("hbar", HBAR_SI), ("c", C_SI)):
        text = pick(name, None)
        try:
            consts[name] = default if text is None else parse_scalar(text)
        except ExpressionError as exc:
            raise UsageError(f"--{name}: {exc}") from None
        if not consts[name] > 0:
            raise UsageError(f"--{name} must be positive")
    fmt = pick("format", cmd.default_format)
    if fmt not in ("csv", "json"):
        raise UsageError("--format must be csv or json")
    io_opts = {"format": fmt, "output": pick("output", None)}
    return params, raw, io_opts, Context(seed, consts["G"], consts["hbar"], consts["c"])


def _destination(output: str | None, cmd: Command, fmt: str) -> Path | None:
    base = os.environ.get(OUTPUT_DIR_ENV)
    if output is None:
        if not base:
            return None
        return Path(base) / f"{cmd.name}.{fmt}"
    path = Path(output)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def _error_record(exc: BaseException, subcommand: str | None) -> str:
    rec = {"error": type(exc).__name__, "message": str(exc), "subcommand": subcommand}
    if isinstance(exc, PostSelectionError):
        rec["probability"] = exc.probability
    return json.dumps(_jsonable(rec), sort_keys=True)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    subcommand = None
    try:
        args = parser.parse_args(argv)
        subcommand = args.subcommand
        cmd = COMMANDS[subcommand]
        params, raw, io_opts, ctx = _resolve(args, cmd)
        out = cmd.run(params, ctx)
        metadata = {
            "tool": TOOL,
            "version": __version__,
            "subcommand": subcommand,
            "seed": ctx.seed,
            "constants": {"G": ctx.G, "hbar": ctx.hbar, "c": ctx.c},
            "parameters": dict(sorted(raw.items())),
        }
        text = render(out, io_opts["format"], metadata)
        dest = _destination(io_opts["output"], cmd, io_opts["format"])
        if dest is None:
            sys.stdout.write(text)
        else:
            dest.parent.mkdir(parents=True, exist_ok=True)
            with open(dest, "w", newline="") as fh:
                fh.write(text)
    except UsageError as exc:
        print(_error_record(exc, subcommand), file=sys.stderr)
        return EXIT_USAGE
    except (QigravError, ValueError, ArithmeticError, OSError, KeyError) as exc:
        print(_error_record(exc, subcommand), file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
