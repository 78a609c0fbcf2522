"""
``holoq``: run declarative scenario files and write CSV.

    holoq run <scenario-file> [--out PATH] [--seed N] [--quiet]
    holoq validate <scenario-file>
    holoq list-scenarios

Exit codes: 0 success, 2 parse/validation error, 3 numerical error, 4 I/O.
``HOLOQ_MAX_THREADS`` caps how many sweep points run at once; rows are
always written in sweep order.
"""
from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .dynamics import EvolutionConfig, ab_scenario
from .errors import HolonomyLabError, NumericalError, ScenarioError
from .gauge import (LieAlgebraBasis, SU2, U1, apply_gauge_to_potential, apply_gauge_to_wavefunction,
                    nonabelian_flux_tube, random_band_limited_potential, random_smooth_gauge,
                    solenoid_potential)
from .gravity import ConeGeometry, gravitational_ab_expectation, loop_encloses_apex, poincare_transport
from .grid import (DensityMatrix, GridSpec, gaussian_packet, inner_product, mixture_trace,
                   momentum_moment, superpose, translate, translation_operator)
from .observables import (NonlocalOperatorSpec, build_ab_packets, closed_loop,
                          closed_loop_reduction_check, g_gamma_expectation)
from .transport import Curve, arc, circle, polyline, segment

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

# --- schema -------------------------------------------------------------------

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM, "minItems": 1, "maxItems": 2}

_CURVE_SCHEMA = {
    "oneOf": [
        {"type": "object", "additionalProperties": False, "required": ["points"],
         "properties": {"points": {"type": "array", "items": _VEC, "minItems": 2},
                        "closed": {"type": "boolean"}}},
        {"type": "object", "additionalProperties": False, "required": ["generator", "start", "end"],
         "properties": {"generator": {"const": "segment"}, "start": _VEC, "end": _VEC}},
        {"type": "object", "additionalProperties": False,
         "required": ["generator", "center", "radius", "start_angle", "end_angle"],
         "properties": {"generator": {"const": "arc"}, "center": _VEC, "radius": _NUM,
                        "start_angle": _NUM, "end_angle": _NUM,
                        "n": {"type": "integer", "minimum": 1}}},
        {"type": "object", "additionalProperties": False, "required": ["generator", "center", "radius"],
         "properties": {"generator": {"const": "circle"}, "center": _VEC, "radius": _NUM,
                        "n": {"type": "integer", "minimum": 3},
                        "winding": {"type": "integer"}, "start_angle": _NUM}},
    ]
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["double_slit", "ab_static", "ab_dynamic", "ab_nonabelian",
                          "josephson_two_path", "cosmic_string", "gauge_invariance_suite"]},
        "grid": {"type": "object", "additionalProperties": False,
                 "properties": {"dim": {"enum": [1, 2]}, "points": {"type": "integer"},
                                "spacing": _NUM, "origin": {"type": ["array", "null"], "items": _NUM}}},
        "params": {"type": "object"},
        "packets": {"type": "array", "items": {
            "type": "object", "additionalProperties": False, "required": ["center", "width"],
            "properties": {"center": _VEC, "width": _NUM, "momentum": _VEC, "phase": _NUM,
                           "spinor": {"type": "array", "items": _NUM}}}},
        "curves": {"type": "object", "additionalProperties": _CURVE_SCHEMA},
        "sweep": {"type": "object", "additionalProperties": False, "required": ["param", "values"],
                  "properties": {"param": {"type": "string"},
                                 "values": {"type": "array", "minItems": 1,
                                            "items": {"type": ["number", "string"]}}}},
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"path": {"type": "string"}, "format": {"const": "csv"}}},
        "seed": {"type": "integer"},
    },
}

_HALF_PI = math.pi / 2

# kind -> (description, grid defaults, param defaults, curve defaults, sweep params, default sweep)
KINDS: dict[str, dict] = {
    "double_slit": dict(
        doc="two disjoint packets; <exp(-i p l)>, moments and mixture trace versus relative phase",
        grid={"dim": 1, "points": 1024, "spacing": 0.05, "origin": None},
        params={"alpha": 0.0, "separation": 16.0, "width": 1.0},
        curves={}, sweeps=("alpha", "separation", "width"),
        sweep={"param": "alpha", "values": [0.0]}),
    "ab_static": dict(
        doc="packets above and below a solenoid; <g_gamma> for curves passing either side",
        grid={"dim": 2, "points": 256, "spacing": 0.2, "origin": None},
        params={"flux": _HALF_PI, "charge": 1.0, "core_radius": 0.5, "offset": 7.0, "width": 0.5},
        curves={"left": {"generator": "arc", "center": [0.0, 0.0], "radius": 7.0,
                         "start_angle": -_HALF_PI, "end_angle": -3 * _HALF_PI, "n": 32},
                "right": {"generator": "arc", "center": [0.0, 0.0], "radius": 7.0,
                          "start_angle": -_HALF_PI, "end_angle": _HALF_PI, "n": 32}},
        sweeps=("flux", "charge", "offset"),
        sweep={"param": "flux", "values": [_HALF_PI]}),
    "ab_dynamic": dict(
        doc="packet pair evolved past a solenoid; <g_gamma> time series and phase jump",
        grid={"dim": 2, "points": 512, "spacing": 0.1, "origin": [-22.0, -25.6]},
        params={"flux": _HALF_PI, "charge": 1.0, "core_radius": 0.5, "speed": 20.0,
                "impact_offset": 7.0, "width": 0.5, "start_x": -10.0, "dt": 0.01,
                "steps": 125, "record_every": 5, "scheme": "carrier", "support_tol": 1e-8},
        curves={"straight": {"generator": "segment", "start": [0.0, -7.0], "end": [0.0, 7.0]}},
        sweeps=("flux", "speed", "impact_offset"),
        sweep={"param": "flux", "values": [_HALF_PI]}),
    "ab_nonabelian": dict(
        doc="spinor packets around an SU(2) flux tube; <g_gamma> and its closed-loop form",
        grid={"dim": 2, "points": 256, "spacing": 0.2, "origin": None},
        params={"flux": math.pi, "direction": [0.0, 0.0, 1.0], "coupling": 1.0, "core_radius": 0.5,
                "offset": 7.0, "width": 0.5, "spinor": [1.0, 0.0]},
        curves={"left": {"generator": "arc", "center": [0.0, 0.0], "radius": 7.0,
                         "start_angle": -_HALF_PI, "end_angle": -3 * _HALF_PI, "n": 8},
                "right": {"generator": "arc", "center": [0.0, 0.0], "radius": 7.0,
                          "start_angle": -_HALF_PI, "end_angle": _HALF_PI, "n": 8}},
        sweeps=("flux", "coupling"),
        sweep={"param": "flux", "values": [math.pi]}),
    "josephson_two_path": dict(
        doc="packets left and right of a flux line joined over the top or under the bottom",
        grid={"dim": 2, "points": 256, "spacing": 0.2, "origin": None},
        params={"flux": 1.0, "charge": 1.0, "core_radius": 0.5, "offset": 7.0, "width": 0.5},
        curves={"over": {"generator": "arc", "center": [0.0, 0.0], "radius": 7.0,
                         "start_angle": math.pi, "end_angle": 0.0, "n": 32},
                "under": {"generator": "arc", "center": [0.0, 0.0], "radius": 7.0,
                          "start_angle": math.pi, "end_angle": 2 * math.pi, "n": 32}},
        sweeps=("flux", "charge"),
        sweep={"param": "flux", "values": [1.0]}),
    "cosmic_string": dict(
        doc="packets beside a cosmic string; gravitational <g_gamma> from the cone holonomy",
        grid={"dim": 2, "points": 256, "spacing": 0.1, "origin": None},
        params={"deficit_angle": math.pi / 6, "apex": [0.0, 0.0], "core_radius": 0.0,
                "seam_angle": math.pi, "width": 0.5, "packet_x": 3.0, "offset": 4.0,
                "base": [-6.0, 0.0], "detour_x": None},
        curves={"straight": {"generator": "segment", "start": [3.0, -4.0], "end": [3.0, 4.0]}},
        sweeps=("deficit_angle", "detour_x"),
        sweep={"param": "deficit_angle", "values": [math.pi / 6]}),
    "gauge_invariance_suite": dict(
        doc="<g_gamma> before and after random smooth gauge transformations",
        grid={"dim": 2, "points": 64, "spacing": 0.25, "origin": None},
        params={"group": "U1", "coupling": 1.0, "band_limit": 3, "amplitude": 0.4,
                "potential_amplitude": 0.3, "width": 0.5},
        curves={"straight": {"generator": "segment", "start": [-1.5, 0.0], "end": [1.5, 0.0]},
                "bent": {"points": [[-1.5, 0.0], [0.0, 1.0], [1.5, 0.0]], "closed": False}},
        sweeps=("trial",),
        sweep={"param": "trial", "values": [0, 1, 2, 3]}),
}


# --- scenario type ----------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    kind: str
    grid: dict
    params: dict
    packets: list
    curves: dict
    sweep: dict
    output: dict
    seed: int = 0
    source: str = field(default="", compare=False)

    def grid_spec(self) -> GridSpec:
        g = self.grid
        return GridSpec(g["dim"], g["points"], g["spacing"], g["origin"])

    def curve(self, label: str) -> Curve:
        return build_curve(self.curves[label], label)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "grid": self.grid, "params": self.params,
                "packets": self.packets, "curves": self.curves, "sweep": self.sweep,
                "output": self.output, "seed": self.seed}

    def dump(self) -> str:
        """Normalized JSON: defaults filled, keys sorted."""
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


_CURVE_DEFAULTS = {"arc": {"n": 32}, "circle": {"n": 64, "winding": 1, "start_angle": 0.0}}


def build_curve(spec: dict, label: str = "") -> Curve:
    gen = spec.get("generator")
    if gen is None:
        return polyline(spec["points"], spec.get("closed", False), label)
    if gen == "segment":
        return segment(spec["start"], spec["end"], label)
    if gen == "arc":
        c = arc(spec["center"], spec["radius"], spec["start_angle"], spec["end_angle"], spec["n"])
        return Curve(c.points, False, label)
    c = circle(spec["center"], spec["radius"], spec["n"], spec["winding"], spec["start_angle"])
    return Curve(c.points, True, label)


def _json_path(err: jsonschema.ValidationError) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def _unknown_key_message(err: jsonschema.ValidationError) -> str | None:
    if err.validator == "additionalProperties":
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(set(err.instance) - allowed)
        if extra:
            return f"unknown key {extra[0]!r} at {_json_path(err)}"
    return None


def _curve_branch_error(err: jsonschema.ValidationError) -> jsonschema.ValidationError:
    """Pick the error from the curve branch matching the document's ``generator``."""
    gen = err.instance.get("generator") if isinstance(err.instance, dict) else None
    branches = err.schema["oneOf"]
    want = next((i for i, b in enumerate(branches)
                 if b["properties"].get("generator", {}).get("const") == gen), None)
    if gen is None:
        want = 0
    picked = [e for e in err.context if e.relative_schema_path[0] == want]
    return picked[0] if picked else err


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    """Validate a scenario document and fill every default."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        if err.validator == "oneOf" and err.context:
            err = _curve_branch_error(err)
        msg = _unknown_key_message(err) or f"{err.message} at {_json_path(err)}"
        raise ScenarioError(f"{source}: {msg}")
    kind = doc["kind"]
    spec = KINDS[kind]

    grid = dict(spec["grid"])
    grid.update(doc.get("grid", {}))
    params = copy.deepcopy(spec["params"])
    for key, value in doc.get("params", {}).items():
        if key not in params:
            raise ScenarioError(f"{source}: unknown key {key!r} at $.params (kind {kind})")
        params[key] = value
    curves = copy.deepcopy(doc["curves"]) if "curves" in doc else copy.deepcopy(spec["curves"])
    for c in curves.values():
        for k, v in _CURVE_DEFAULTS.get(c.get("generator"), {}).items():
            c.setdefault(k, v)
        if "points" in c:
            c.setdefault("closed", False)
    packets = []
    for p in doc.get("packets", []):
        p = dict(p)
        dim = len(p["center"])
        p.setdefault("momentum", [0.0] * dim)
        p.setdefault("phase", 0.0)
        p.setdefault("spinor", None)
        packets.append(p)
    if packets and len(packets) != 2:
        raise ScenarioError(f"{source}: exactly two packets expected at $.packets")
    if "sweep" in doc:
        sweep = copy.deepcopy(doc["sweep"])
    else:
        # the default sweep is a single point at the (possibly overridden) parameter value
        param = spec["sweep"]["param"]
        values = [params[param]] if param in params else list(spec["sweep"]["values"])
        sweep = {"param": param, "values": values}
    if sweep["param"] not in spec["sweeps"] and sweep["param"] != "curve":
        raise ScenarioError(f"{source}: sweep parameter {sweep['param']!r} does not exist for "
                            f"kind {kind}; choose from {', '.join(spec['sweeps'])}")
    if sweep["param"] == "curve":
        for label in sweep["values"]:
            if label not in curves:
                raise ScenarioError(f"{source}: unresolved curve label {label!r} at $.sweep.values")
    elif any(isinstance(v, str) for v in sweep["values"]):
        raise ScenarioError(f"{source}: sweep values for {sweep['param']!r} must be numbers")
    output = {"path": "holoq_output.csv", "format": "csv"}
    output.update(doc.get("output", {}))
    s = Scenario(kind, grid, params, packets, curves, sweep, output, int(doc.get("seed", 0)), source)
    try:
        s.grid_spec()
        for label in curves:
            s.curve(label)
    except ValueError as exc:
        raise ScenarioError(f"{source}: {exc}") from None
    return s


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), str(path))


# --- runners ------------------------------------------------------------------------

def _phase(z: complex) -> float:
    """Argument in (-pi, pi]."""
    a = float(np.angle(z))
    return math.pi if a == -math.pi else a


def _cplx(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag, "modulus": abs(z), "phase": _phase(z)}


def _point_params(s: Scenario, value) -> dict:
    p = copy.deepcopy(s.params)
    if s.sweep["param"] in p:
        p[s.sweep["param"]] = value
    return p


def _curve_labels(s: Scenario, value) -> list[str]:
    return [value] if s.sweep["param"] == "curve" else list(s.curves)


def _packet_pair(s: Scenario, grid: GridSpec, centers, width, momentum=None, spinor=None):
    if s.packets:
        return [gaussian_packet(grid, p["center"], p["width"], p["momentum"], p["phase"], p["spinor"])
                for p in s.packets]
    return [gaussian_packet(grid, c, width, momentum if momentum is not None else 0.0, 0.0, spinor)
            for c in centers]


def _run_double_slit(s: Scenario, value, seed: int) -> list[dict]:
    p = _point_params(s, value)
    grid = s.grid_spec()
    if s.packets:
        shifted, base = _packet_pair(s, grid, None, None)
        ell = np.subtract(s.packets[0]["center"], s.packets[1]["center"])
    else:
        ell = np.full(grid.dim, float(p["separation"]))
        c = -0.5 * ell
        shifted = gaussian_packet(grid, c + ell, p["width"])
        base = gaussian_packet(grid, c, p["width"])
    psi = superpose(shifted, base, 2 ** -0.5, np.exp(1j * p["alpha"]) * 2 ** -0.5)
    s_val = inner_product(psi, translate(psi, ell))
    mix = mixture_trace(DensityMatrix.mixture([shifted, base]), translation_operator(ell))
    row = {"curve": "s", **_cplx(s_val), "mixture_re": mix.real, "mixture_im": mix.imag}
    for n in range(1, 5):
        row[f"moment_{n}"] = momentum_moment(psi, n)
    return [row]


def _abelian_pair(s: Scenario, p: dict, centers):
    grid = s.grid_spec()
    A = solenoid_potential((0.0, 0.0), p["flux"], p["core_radius"], coupling=p.get("charge", 1.0))
    phi1, phi2 = _packet_pair(s, grid, centers, p["width"])
    return grid, A, phi1, phi2


def _dressed_expectations(s, value, A, phi1, phi2, base) -> list[dict]:
    g1, g2 = segment(base, _center(phi1)), segment(base, _center(phi2))
    psi1, psi2 = build_ab_packets(phi1, phi2, g1, g2, A)
    psi = superpose(psi1, psi2, 2 ** -0.5, 2 ** -0.5)
    rows = []
    for label in _curve_labels(s, value):
        v = g_gamma_expectation(NonlocalOperatorSpec(s.curve(label), A), psi)
        rows.append({"curve": label, **_cplx(v)})
    return rows


def _center(psi) -> np.ndarray:
    rho = psi.density()
    x = psi.grid.coords()
    return np.tensordot(rho, x, axes=(tuple(range(rho.ndim)), tuple(range(rho.ndim)))) / rho.sum()


def _run_ab_static(s: Scenario, value, seed: int) -> list[dict]:
    p = _point_params(s, value)
    d = p["offset"]
    grid, A, upper, lower = _abelian_pair(s, p, [(0.0, d), (0.0, -d)])
    return _dressed_expectations(s, value, A, upper, lower, (-d - 6.0, 0.0))


def _run_josephson(s: Scenario, value, seed: int) -> list[dict]:
    p = _point_params(s, value)
    d = p["offset"]
    grid, A, right, left = _abelian_pair(s, p, [(d, 0.0), (-d, 0.0)])
    return _dressed_expectations(s, value, A, right, left, (-d, -d - 6.0))


def _run_ab_nonabelian(s: Scenario, value, seed: int) -> list[dict]:
    p = _point_params(s, value)
    grid = s.grid_spec()
    d = p["offset"]
    A = nonabelian_flux_tube((0.0, 0.0), p["direction"], p["flux"], p["core_radius"], p["coupling"])
    upper, lower = _packet_pair(s, grid, [(0.0, d), (0.0, -d)], p["width"], spinor=p["spinor"])
    base = np.array([-d - 6.0, 0.0])
    g1, g2 = segment(base, (0.0, d)), segment(base, (0.0, -d))
    rows = []
    for label in _curve_labels(s, value):
        lhs, rhs = closed_loop_reduction_check(upper, lower, g1, g2, s.curve(label), A)
        psi1, psi2 = build_ab_packets(upper, lower, g1, g2, A)
        psi = superpose(psi1, psi2, 2 ** -0.5, 2 ** -0.5)
        v = g_gamma_expectation(NonlocalOperatorSpec(s.curve(label), A), psi)
        rows.append({"curve": label, **_cplx(v), "loop_re": complex(rhs).real,
                     "loop_im": complex(rhs).imag, "cross_re": complex(lhs).real,
                     "cross_im": complex(lhs).imag})
    return rows


def _run_ab_dynamic(s: Scenario, value, seed: int) -> list[dict]:
    p = _point_params(s, value)
    cfg = EvolutionConfig(p["dt"], int(p["steps"]), record_every=int(p["record_every"]),
                          scheme=p["scheme"])
    labels = _curve_labels(s, value)
    res = ab_scenario(p["flux"], p["speed"], p["impact_offset"], [s.curve(lb) for lb in labels], cfg,
                      grid=s.grid_spec(), width=p["width"], start_x=p["start_x"],
                      core_radius=p["core_radius"], charge=p["charge"], support_tol=p["support_tol"])
    rows = []
    for i in range(len(res.times)):
        for j, label in enumerate(labels):
            v = res.values[i, j]
            rows.append({"curve": label, "step": int(res.steps[i]), "time": float(res.times[i]),
                         **_cplx(v), "straddling": int(res.straddling[i, j]),
                         "enclosed": int(res.enclosed[i, j]),
                         "crossing_step": -1 if res.crossing_step[j] is None else res.crossing_step[j],
                         "phase_jump": math.nan if res.phase_jump[j] is None else res.phase_jump[j]})
    return rows


def _run_cosmic_string(s: Scenario, value, seed: int) -> list[dict]:
    p = _point_params(s, value)
    grid = s.grid_spec()
    geom = ConeGeometry(tuple(p["apex"]), p["deficit_angle"], p["core_radius"], p["seam_angle"])
    x, d = p["packet_x"], p["offset"]
    upper, lower = _packet_pair(s, grid, [(x, d), (x, -d)], p["width"])
    centers = [_center(upper), _center(lower)]
    base = np.asarray(p["base"], dtype=float)
    g1, g2 = segment(base, centers[0]), segment(base, centers[1])
    width = s.packets[0]["width"] if s.packets else p["width"]
    if p["detour_x"] is not None:
        xd = p["detour_x"]
        gammas = [("detour", polyline([centers[1], (xd, centers[1][1]), (xd, centers[0][1]), centers[0]]))]
    else:
        gammas = [(lb, s.curve(lb)) for lb in _curve_labels(s, value)]
    rows = []
    for label, gam in gammas:
        v = gravitational_ab_expectation(upper, lower, g1, g2, gam, geom, packet_width=width)
        loop = closed_loop(g1, g2, gam)
        el = poincare_transport(geom, loop)
        rows.append({"curve": label, **_cplx(v), "enclosed": int(loop_encloses_apex(geom, loop)),
                     "rotation": el.rotation, "translation_x": el.translation[0],
                     "translation_y": el.translation[1]})
    return rows


def _run_gauge_suite(s: Scenario, value, seed: int) -> list[dict]:
    p = _point_params(s, value)
    grid = s.grid_spec()
    group = p["group"]
    if group not in (U1, SU2):
        raise ScenarioError(f"unknown group {group!r}")
    basis = LieAlgebraBasis(group, p["coupling"])
    trial_seed = seed + int(value) if s.sweep["param"] == "trial" else seed
    A = random_band_limited_potential(trial_seed, grid, basis, p["band_limit"], p["potential_amplitude"])
    g = random_smooth_gauge(trial_seed + 10_000, group, p["band_limit"], p["amplitude"], grid)
    spinor = None if group == U1 else [1.0, 0.5j]
    a, b = _packet_pair(s, grid, [(-1.5, 0.0), (1.5, 0.0)], p["width"], spinor=spinor)
    psi = superpose(a, b, 2 ** -0.5, 2 ** -0.5)
    psi_g = apply_gauge_to_wavefunction(psi, g, basis)
    A_g = apply_gauge_to_potential(A, g)
    rows = []
    for label in _curve_labels(s, value):
        gam = s.curve(label)
        v = g_gamma_expectation(NonlocalOperatorSpec(gam, A), psi)
        vg = g_gamma_expectation(NonlocalOperatorSpec(gam, A_g), psi_g)
        rows.append({"curve": label, **_cplx(v), "re_gauged": vg.real, "im_gauged": vg.imag,
                     "abs_difference": abs(v - vg), "seed": trial_seed})
    return rows


_RUNNERS = {
    "double_slit": _run_double_slit, "ab_static": _run_ab_static, "ab_dynamic": _run_ab_dynamic,
    "ab_nonabelian": _run_ab_nonabelian, "josephson_two_path": _run_josephson,
    "cosmic_string": _run_cosmic_string, "gauge_invariance_suite": _run_gauge_suite,
}


def _summary(s: Scenario, rows: list[dict]) -> dict:
    out: dict = {}
    first = rows[0] if rows else None
    if s.kind == "double_slit" and first:
        out.update(phase=first["phase"], modulus=first["modulus"])
    elif s.kind == "ab_dynamic":
        out["crossing_step"] = [r["crossing_step"] for r in rows if r["step"] == 0]
        out["phase_jump"] = [r["phase_jump"] for r in rows if r["step"] == 0]
    elif s.kind in ("ab_static", "ab_nonabelian", "josephson_two_path"):
        diffs = []
        for v in s.sweep["values"]:
            pts = [r for r in rows if r["sweep_param"] == v]
            if len(pts) >= 2:
                diffs.append(_phase(complex(pts[1]["re"], pts[1]["im"])
                                    / complex(pts[0]["re"], pts[0]["im"])))
        out["phase_difference"] = diffs
    elif s.kind == "cosmic_string" and first:
        out.update(modulus=first["modulus"], phase=first["phase"])
    elif s.kind == "gauge_invariance_suite":
        out["max_abs_difference"] = max(r["abs_difference"] for r in rows)
    return out


@dataclass
class RunReport:
    rows_written: int
    path: Path
    summary: dict


def max_threads() -> int:
    raw = os.environ.get("HOLOQ_MAX_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ScenarioError(f"HOLOQ_MAX_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ScenarioError(f"HOLOQ_MAX_THREADS must be a positive integer, got {raw!r}")
    return n


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def run_scenario(s: Scenario, out=None, seed: int | None = None) -> RunReport:
    """Run every sweep point and write the CSV (rows in sweep order)."""
    seed = s.seed if seed is None else seed
    runner = _RUNNERS[s.kind]
    param = s.sweep["param"]

    def point(value):
        try:
            rows = runner(s, value, seed)
        except HolonomyLabError as exc:
            raise type(exc)(f"scenario {s.kind} ({param}={value!r}): {exc}") from exc
        except ValueError as exc:
            raise ScenarioError(f"scenario {s.kind} ({param}={value!r}): {exc}") from exc
        return [{"sweep_param": value, **r} for r in rows]

    with ThreadPoolExecutor(max_workers=max_threads()) as pool:
        results = list(pool.map(point, s.sweep["values"]))
    rows = [r for chunk in results for r in chunk]
    path = Path(out if out is not None else s.output["path"])
    header = list(rows[0]) if rows else ["sweep_param"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in header])
    return RunReport(len(rows), path, _summary(s, rows))


# --- entry point ---------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="holoq", description="Run holonomy-lab scenarios.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file and write CSV")
    run.add_argument("scenario")
    run.add_argument("--out", help="CSV path (default: the scenario's output.path)")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--quiet", action="store_true")
    val = sub.add_parser("validate", help="check a scenario and print its normalized form")
    val.add_argument("scenario")
    sub.add_parser("list-scenarios", help="list scenario kinds")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list-scenarios":
            for kind, spec in KINDS.items():
                print(f"{kind:24s} {spec['doc']}  [sweep: {', '.join(spec['sweeps'])}, curve]")
            return EXIT_OK
        s = load_scenario(args.scenario)
        if args.command == "validate":
            sys.stdout.write(s.dump())
            return EXIT_OK
        report = run_scenario(s, args.out, args.seed)
        dump_path = report.path.with_suffix(".scenario.json")
        dump_path.write_text(s.dump(), encoding="utf-8")
        if not args.quiet:
            print(f"wrote {report.rows_written} rows to {report.path}")
            for k, v in report.summary.items():
                print(f"{k}: {v}")
        return EXIT_OK
    except ScenarioError as exc:
        print(f"holoq: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"holoq: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except HolonomyLabError as exc:
        print(f"holoq: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"holoq: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
