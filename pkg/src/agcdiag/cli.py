"""Command-line pipeline: build -> discretize -> design -> attack ->
simulate -> report, driven by one JSON config.

Commands
--------
design      solve the filter design, write design_report.txt + filter.json
attack      compute the attacker's best reply, write attack.json
simulate    run the configured scenario, write trace.csv
report      split a trace into per-panel plot-data CSVs
sweep-pole  repeat simulate over a list of filter poles

Exit codes: 0 success, 2 bad config (field named on stderr), 3 infeasible
design, 1 anything else. Errors print one machine-readable line:
``error: code=<kind> field=<path> msg="..."``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import config as cfgmod
from . import dae as daemod
from .attacks import synthesize_attack
from .design import (FilterDesign, design_robust, design_steady_state,
                     feasible_basis, worst_case_alpha)
from .errors import AgcDiagError, ConfigError, InfeasibleDesignError
from .residual import realize_filter
from .simulate import simulate, write_trace_csv, read_trace_csv

DEFAULT_POLE_SWEEP = (0.1, 0.2, 0.4, 0.6, 0.98)


def _error_line(code: str, msg: str, field: str = "-") -> None:
    print(f'error: code={code} field={field} msg="{msg}"', file=sys.stderr)


class Pipeline:
    """Lazy single-config pipeline shared by all commands."""

    def __init__(self, cfg: dict, overrides: list[str]):
        self.cfg = cfg
        self.overrides = overrides
        self._cache: dict[str, object] = {}

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    @property
    def model(self):
        return self._get("model", lambda: cfgmod.build_model(self.cfg))

    @property
    def discrete(self):
        return self._get("discrete",
                         lambda: cfgmod.build_discrete(self.cfg, self.model))

    @property
    def dae(self):
        return self._get("dae", lambda: daemod.build_dae(self.discrete))

    @property
    def space(self):
        return self._get("space",
                         lambda: cfgmod.build_attack_space(self.cfg, self.model))

    @property
    def params(self) -> dict:
        return self._get("params", lambda: cfgmod.design_params(self.cfg))

    @property
    def basis(self):
        def make():
            p = self.params
            hbar = daemod.stack_hbar(self.dae, p["d_n"])
            return feasible_basis(hbar, p["eta"], p["d_n"], p["rank_tol"])
        return self._get("basis", make)

    @property
    def ffb(self):
        return self._get("ffb",
                         lambda: daemod.attack_gain(self.dae, self.space.basis))

    @property
    def design(self) -> FilterDesign:
        def make():
            p = self.params
            a_pol, b_pol = self.space.a, self.space.b
            if p["kind"] == "steady-state":
                fbar = daemod.build_fbar(self.dae, self.space.basis, p["d_n"])
                return design_steady_state(self.basis, fbar, a_pol, b_pol,
                                           p["pole"])
            return design_robust(self.basis, self.ffb, a_pol, b_pol,
                                 p["pole"])
        return self._get("design", make)

    def attack_vector(self):
        """Resolve the injected f per the attack section; may need a design."""
        atk = self.cfg["attack"]
        mode = atk.get("mode", "none")
        if mode == "none":
            return None, None
        if mode == "raw":
            raw = atk.get("raw_f")
            if raw is None:
                raise ConfigError("attack.raw_f", "mode 'raw' needs raw_f")
            return np.asarray(raw, dtype=float), None
        if mode == "alpha":
            alpha = np.asarray(atk.get("alpha"), dtype=float)
            return synthesize_attack(self.space, alpha), alpha
        if mode == "worst-case":
            design = self.design
            alpha, _ = worst_case_alpha(design.nbar, self.ffb, design.d_n,
                                        self.space.a, self.space.b)
            return synthesize_attack(self.space, alpha), alpha
        raise ConfigError("attack.mode",
                          f"unknown mode {mode!r} (none|raw|alpha|worst-case)")

    def out_dir(self) -> str:
        configured = self.cfg["output"].get("dir")
        path = configured or os.environ.get("AGCDIAG_OUTDIR") or "out"
        os.makedirs(path, exist_ok=True)
        return path


def format_design_report(design: FilterDesign, overrides: list[str]) -> str:
    lines = ["diagnosis filter design report", ""]
    lines.append(f"kind: {design.kind}")
    lines.append(f"degree d_N: {design.d_n}")
    lines.append(f"pole: {design.pole}")
    lines.append(f"gamma: {design.gamma:.12g}")
    if design.index is not None:
        lines.append(f"winning index: block {design.index[0]}, "
                     f"sign {design.index[1]:+d}")
    if design.diagnostic:
        lines.append(f"diagnostic: {design.diagnostic}")
    if overrides:
        lines.append("overrides: " + " ".join(overrides))
    lines.append("")
    lines.append("per-index LP results:")
    lines.append("  block  sign  status      gamma_i        wall_s")
    for row in design.table:
        block = f"{row.block:5d}" if row.block >= 0 else "   ss"
        sign = f"{row.sign:+4d}" if row.block >= 0 else "    "
        lines.append(f"  {block}  {sign}  {row.status:<10s}"
                     f"  {row.gamma:<13.6g}  {row.wall_time:.4f}")
    if design.multiplier is not None:
        mult = " ".join(format(v, ".12g") for v in np.atleast_1d(design.multiplier))
        lines.append("")
        lines.append(f"multiplier: {mult}")
    lines.append("")
    lines.append("stacked coefficients N_0..N_dN (row-major):")
    blocks = design.blocks()
    for j, block in enumerate(blocks):
        body = " ".join(format(v, ".12g") for v in block)
        lines.append(f"  N_{j}: {body}")
    return "\n".join(lines) + "\n"


def _write_filter(design: FilterDesign, eta: float, path: str) -> None:
    payload = {
        "kind": design.kind,
        "d_n": design.d_n,
        "pole": design.pole,
        "gamma": design.gamma,
        "eta": eta,
        "index": list(design.index) if design.index else None,
        "multiplier": (None if design.multiplier is None
                       else list(np.atleast_1d(design.multiplier))),
        "nbar": list(design.nbar),
        "diagnostic": design.diagnostic,
    }
    with open(path, "w", newline="\n") as handle:
        json.dump(payload, handle, indent=1)
        handle.write("\n")


def cmd_design(pipe: Pipeline) -> int:
    design = pipe.design
    out = pipe.out_dir()
    report = format_design_report(design, pipe.overrides)
    with open(os.path.join(out, "design_report.txt"), "w", newline="\n") as fh:
        fh.write(report)
    _write_filter(design, pipe.params["eta"], os.path.join(out, "filter.json"))
    sys.stdout.write(report)
    if design.gamma <= 0.0:
        raise InfeasibleDesignError(
            design.diagnostic or "design certificate is zero")
    return 0


def cmd_attack(pipe: Pipeline) -> int:
    design = pipe.design
    if design.gamma <= 0.0:
        raise InfeasibleDesignError(
            design.diagnostic or "design certificate is zero")
    alpha, payoff = worst_case_alpha(design.nbar, pipe.ffb, design.d_n,
                                     pipe.space.a, pipe.space.b)
    f_vec = synthesize_attack(pipe.space, alpha)
    out = pipe.out_dir()
    payload = {"alpha_star": list(alpha), "payoff": payoff, "f": list(f_vec),
               "gamma": design.gamma}
    with open(os.path.join(out, "attack.json"), "w", newline="\n") as handle:
        json.dump(payload, handle, indent=1)
        handle.write("\n")
    print(f"worst-case alpha: {alpha}  payoff: {payoff:.12g}")
    return 0


def _run_simulation(pipe: Pipeline, pole: float | None = None):
    f_vec, _ = pipe.attack_vector()
    scenario = cfgmod.build_scenario(pipe.cfg, pipe.discrete, f_vec)
    design = pipe.design
    if pole is not None:
        design = FilterDesign(design.nbar, design.d_n, pole, design.gamma,
                              design.kind, design.index, design.multiplier,
                              design.table, design.diagnostic)
    filt = realize_filter(design, pipe.dae.l)
    trace = simulate(pipe.discrete, scenario, filt)
    trace.metadata["overrides"] = list(pipe.overrides)
    trace.metadata["pole"] = design.pole
    return trace


def cmd_simulate(pipe: Pipeline) -> int:
    trace = _run_simulation(pipe)
    out = pipe.out_dir()
    path = os.path.join(out, "trace.csv")
    write_trace_csv(trace, path,
                    include_states=bool(pipe.cfg["output"].get("include_states")),
                    include_measurements=bool(
                        pipe.cfg["output"].get("include_measurements")))
    meta_path = os.path.join(out, "trace_meta.json")
    with open(meta_path, "w", newline="\n") as handle:
        json.dump(trace.metadata, handle, indent=1)
        handle.write("\n")
    print(f"wrote {path} ({trace.n_records} records)")
    return 0


def cmd_report(pipe: Pipeline, trace_path: str | None) -> int:
    out = pipe.out_dir()
    path = trace_path or os.path.join(out, "trace.csv")
    cols = read_trace_csv(path)
    t = cols["t"]

    def write_panel(name, fields):
        panel = os.path.join(out, name)
        header = ["t"] + fields
        lines = [",".join(header)]
        for i in range(t.size):
            lines.append(",".join(format(cols[f][i], ".12g")
                                  for f in ["t"] + fields))
        with open(panel, "w", newline="\n") as handle:
            handle.write("\n".join(lines) + "\n")
        return panel

    d_fields = sorted((k for k in cols if k.startswith("d_")),
                      key=lambda s: int(s.split("_")[1]))
    f_fields = sorted((k for k in cols if k.startswith("f_")),
                      key=lambda s: int(s.split("_")[1]))
    wrote = [
        write_panel("panel_load_attack.csv", d_fields + f_fields),
        write_panel("panel_static_residual.csv", ["rS_inf"]),
        write_panel("panel_dynamic_residual.csv", ["r_D"]),
    ]
    for p in wrote:
        print(f"wrote {p}")
    return 0


def cmd_sweep_pole(pipe: Pipeline, poles: list[float]) -> int:
    out = pipe.out_dir()
    for pole in poles:
        trace = _run_simulation(pipe, pole=pole)
        name = f"trace_p{pole:g}.csv"
        write_trace_csv(trace, os.path.join(out, name))
        print(f"wrote {os.path.join(out, name)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agcdiag",
        description="Design and evaluate dynamic diagnosis filters for "
                    "stealthy attacks on multi-area AGC systems.")
    parser.add_argument("--config", help="JSON run configuration "
                        "(built-in defaults when omitted)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SEC.KEY=VAL",
                        help="override a config entry (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("design", help="solve the filter design")
    sub.add_parser("attack", help="compute the worst-case attack coefficients")
    sub.add_parser("simulate", help="run the configured scenario")
    rep = sub.add_parser("report", help="emit per-panel plot CSVs from a trace")
    rep.add_argument("--trace", help="trace CSV (default <out>/trace.csv)")
    swp = sub.add_parser("sweep-pole", help="simulate over a list of poles")
    swp.add_argument("--poles", default=",".join(str(p) for p in DEFAULT_POLE_SWEEP),
                     help="comma-separated pole list")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = (cfgmod.load_config(args.config) if args.config
               else cfgmod.default_config())
        overrides = cfgmod.apply_overrides(cfg, args.overrides)
        pipe = Pipeline(cfg, overrides)
        if args.command == "design":
            return cmd_design(pipe)
        if args.command == "attack":
            return cmd_attack(pipe)
        if args.command == "simulate":
            return cmd_simulate(pipe)
        if args.command == "report":
            return cmd_report(pipe, args.trace)
        if args.command == "sweep-pole":
            poles = [float(p) for p in args.poles.split(",") if p]
            return cmd_sweep_pole(pipe, poles)
        raise AgcDiagError(f"unknown command {args.command}")
    except ConfigError as exc:
        _error_line("config", str(exc), exc.field)
        return 2
    except InfeasibleDesignError as exc:
        _error_line("infeasible", str(exc))
        return 3
    except AgcDiagError as exc:
        _error_line("runtime", str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
