"""Closed-loop simulation of the attacked sampled system with stochastic
loads and optional process/measurement noise.

Reproducibility contract: all randomness comes from one numpy PCG64
generator seeded from the scenario, drawn in a fixed order (loads, then
process noise, then measurement noise, each for the whole horizon), so a
(model, scenario, seed) triple maps to a bit-identical trace. Attacks never
consume random draws.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .discretize import DiscreteLtiModel
from .errors import DimensionError, DivergenceError, ValidationError
from .linalg import weighted_range_projector
from .residual import RealizedFilter

DIVERGENCE_GUARD = 1e6


@dataclass(frozen=True)
class Scenario:
    """One simulation experiment.

    ``load_std`` maps a disturbance label (``<area>.load``) to the standard
    deviation of its i.i.d. zero-mean Gaussian steps; unlisted channels stay
    zero. ``load_series`` (if given) overrides the stochastic model with an
    explicit (steps+1, n_d) array. Noise covariances are diagonal,
    label-keyed; ``attack_f`` is the constant injection applied strictly
    after ``onset_s`` seconds.
    """

    horizon_s: float
    t_s: float
    onset_s: float = 0.0
    attack_f: np.ndarray | None = None
    load_std: dict[str, float] = field(default_factory=dict)
    load_series: np.ndarray | None = None
    process_noise: dict[str, float] = field(default_factory=dict)
    measurement_noise: dict[str, float] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.horizon_s <= 0 or self.t_s <= 0:
            raise ValidationError("horizon and sampling period must be > 0")
        if not 0 <= self.onset_s <= self.horizon_s:
            raise ValidationError(
                f"attack onset {self.onset_s} outside [0, {self.horizon_s}]")
        for name, table in (("process_noise", self.process_noise),
                            ("measurement_noise", self.measurement_noise)):
            for lab, var in table.items():
                if var < 0:
                    raise ValidationError(f"{name}[{lab}] must be >= 0")
        if self.attack_f is not None:
            object.__setattr__(
                self, "attack_f",
                np.atleast_1d(np.asarray(self.attack_f, dtype=float)))

    @property
    def n_steps(self) -> int:
        return int(np.floor(self.horizon_s / self.t_s + 1e-9))

    def fingerprint(self) -> str:
        """Stable hash of the scenario content for trace metadata."""
        payload = {
            "horizon_s": self.horizon_s, "t_s": self.t_s,
            "onset_s": self.onset_s,
            "attack_f": None if self.attack_f is None else list(self.attack_f),
            "load_std": dict(sorted(self.load_std.items())),
            "load_series": None if self.load_series is None
            else np.asarray(self.load_series).tolist(),
            "process_noise": dict(sorted(self.process_noise.items())),
            "measurement_noise": dict(sorted(self.measurement_noise.items())),
            "seed": self.seed,
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class SimulationTrace:
    """Time-indexed record of one run; row k holds the signals at sample k."""

    t: np.ndarray
    d: np.ndarray
    f: np.ndarray
    x: np.ndarray
    y: np.ndarray
    rs_inf: np.ndarray
    r_d: np.ndarray
    metadata: dict

    @property
    def n_records(self) -> int:
        return self.t.size


def label_variances(table: dict[str, float], labels: tuple[str, ...],
                    what: str) -> np.ndarray:
    """Diagonal variance vector from a label->variance map.

    Keys may be exact labels or ``<area>.*`` patterns; the most specific
    (exact) entry wins. Unknown exact keys are rejected so typos do not
    silently drop noise.
    """
    out = np.zeros(len(labels))
    known = set(labels)
    areas = {lab.split(".", 1)[0] for lab in labels}
    for key in table:
        if key.endswith(".*"):
            if key[:-2] not in areas:
                raise ValidationError(f"{what}: pattern {key!r} matches no area")
        elif key not in known:
            raise ValidationError(f"{what}: unknown label {key!r}")
    for i, lab in enumerate(labels):
        area = lab.split(".", 1)[0]
        if lab in table:
            out[i] = table[lab]
        elif f"{area}.*" in table:
            out[i] = table[f"{area}.*"]
    return out


def gen_disturbance(scenario: Scenario, rng: np.random.Generator,
                    labels: tuple[str, ...]) -> np.ndarray:
    """Per-step disturbance matrix, (n_steps+1, n_d)."""
    steps = scenario.n_steps + 1
    if scenario.load_series is not None:
        series = np.asarray(scenario.load_series, dtype=float)
        if series.shape != (steps, len(labels)):
            raise DimensionError(
                f"load series has shape {series.shape}, expected "
                f"({steps}, {len(labels)})")
        return series.copy()
    stds = label_variances(
        {k: v ** 2 for k, v in scenario.load_std.items()}, labels,
        "load_std") ** 0.5
    return rng.standard_normal((steps, len(labels))) * stds


def simulate(model: DiscreteLtiModel, scenario: Scenario,
             dynamic_filter: RealizedFilter | None = None,
             weighted_static: bool = True) -> SimulationTrace:
    """Run the closed loop from the origin and record both residuals.

    The static residual is noise-weighted (covariance from the scenario)
    whenever measurement noise is configured and ``weighted_static`` is
    left on. The dynamic filter, if given, is reset before the run.
    """
    n_x, n_y = model.n_states, model.n_measurements
    n_d, n_f = model.n_disturbances, model.n_attacks
    if scenario.attack_f is not None and scenario.attack_f.size != n_f:
        raise DimensionError(
            f"attack vector has length {scenario.attack_f.size}, "
            f"model has {n_f} attack channels")

    steps = scenario.n_steps
    rng = np.random.default_rng(scenario.seed)
    d_series = gen_disturbance(scenario, rng, model.disturbance_labels)
    proc_var = label_variances(scenario.process_noise, model.state_labels,
                               "process_noise")
    meas_var = label_variances(scenario.measurement_noise,
                               model.measurement_labels, "measurement_noise")
    w_series = rng.standard_normal((steps + 1, n_x)) * np.sqrt(proc_var)
    v_series = rng.standard_normal((steps + 1, n_y)) * np.sqrt(meas_var)

    r_y = meas_var if (weighted_static and np.all(meas_var > 0)) else None
    static_weights = None if r_y is None else 1.0 / r_y
    proj = weighted_range_projector(model.c, static_weights)
    if dynamic_filter is not None:
        dynamic_filter.reset()

    f_active = (scenario.attack_f if scenario.attack_f is not None
                else np.zeros(n_f))
    f_zero = np.zeros(n_f)

    t = np.arange(steps + 1) * scenario.t_s
    d_log = np.zeros((steps + 1, n_d))
    f_log = np.zeros((steps + 1, n_f))
    x_log = np.zeros((steps + 1, n_x))
    y_log = np.zeros((steps + 1, n_y))
    rs_log = np.zeros(steps + 1)
    rd_log = np.zeros(steps + 1)

    x = np.zeros(n_x)
    for k in range(steps + 1):
        f_k = f_active if t[k] > scenario.onset_s else f_zero
        y = model.c @ x + model.d_f @ f_k + v_series[k]
        rs = y - proj @ y
        d_log[k] = d_series[k]
        f_log[k] = f_k
        x_log[k] = x
        y_log[k] = y
        rs_log[k] = np.abs(rs).max(initial=0.0)
        if dynamic_filter is not None:
            rd_log[k] = dynamic_filter.step(y)
        x = (model.a_cl @ x + model.b_d @ d_series[k]
             + model.b_f @ f_k + w_series[k])
        mag = np.abs(x).max(initial=0.0)
        if mag > DIVERGENCE_GUARD:
            raise DivergenceError(k + 1, mag)

    metadata = {
        "seed": scenario.seed,
        "scenario": scenario.fingerprint(),
        "t_s": scenario.t_s,
        "onset_s": scenario.onset_s,
        "warmup_samples": 0 if dynamic_filter is None else dynamic_filter.warmup,
        "weighted_static": r_y is not None,
        "state_labels": list(model.state_labels),
        "measurement_labels": list(model.measurement_labels),
        "attack_labels": list(model.attack_labels),
        "disturbance_labels": list(model.disturbance_labels),
    }
    return SimulationTrace(t, d_log, f_log, x_log, y_log, rs_log, rd_log,
                           metadata)


# --------------------------------------------------------------------------
# trace CSV round-trip
# --------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return format(value, ".12g")


def write_trace_csv(trace: SimulationTrace, path,
                    include_states: bool = False,
                    include_measurements: bool = False) -> None:
    """Write the canonical trace CSV (12 significant digits, LF endings)."""
    n_d = trace.d.shape[1]
    n_f = trace.f.shape[1]
    header = ["k", "t"]
    header += [f"d_{i + 1}" for i in range(n_d)]
    header += [f"f_{i + 1}" for i in range(n_f)]
    header += ["rS_inf", "r_D"]
    if include_states:
        header += [f"X_{lab}" for lab in trace.metadata["state_labels"]]
    if include_measurements:
        header += [f"Y_{lab}" for lab in trace.metadata["measurement_labels"]]
    lines = [",".join(header)]
    for k in range(trace.n_records):
        row = [str(k), _fmt(trace.t[k])]
        row += [_fmt(v) for v in trace.d[k]]
        row += [_fmt(v) for v in trace.f[k]]
        row += [_fmt(trace.rs_inf[k]), _fmt(trace.r_d[k])]
        if include_states:
            row += [_fmt(v) for v in trace.x[k]]
        if include_measurements:
            row += [_fmt(v) for v in trace.y[k]]
        lines.append(",".join(row))
    with open(path, "w", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def read_trace_csv(path) -> dict[str, np.ndarray]:
    """Parse a trace CSV back into column arrays keyed by header name."""
    with open(path, newline="\n") as handle:
        lines = [ln.rstrip("\n") for ln in handle if ln.strip()]
    header = lines[0].split(",")
    try:
        data = np.array([[float(v) for v in ln.split(",")]
                         for ln in lines[1:]])
    except ValueError as exc:
        raise ValidationError(f"malformed trace CSV {path}: {exc}")
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValidationError(f"malformed trace CSV: {path}")
    return {name: data[:, i] for i, name in enumerate(header)}
