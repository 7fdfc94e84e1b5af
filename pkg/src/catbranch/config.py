"""Plain-text run configuration (``key = value`` with ``[section]`` headers) and presets."""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ParseError
from .model import CatSpec, OscillatorNetwork, ValidatedConfig, validate
from .reduced_density import Grid

SUMMARY_HEADER = "catbranch summary v1"
CONFIG_MARKER = "--- config ---"

DEFAULT_SIGMA = 0.5
DEFAULT_SNAPSHOTS = tuple(round(0.505 + 0.5 * k, 10) for k in range(12))
DEFAULT_SERIES_DT = 0.05
DEFAULT_CLASSICAL_DT = 0.005
DEFAULT_T_END = 6.005


def _three_body(k12: float, k31: float) -> dict:
    return {
        "masses": (1.5, 1.0, 1.0),
        "external_k": (2.5, 0.0, 0.0),
        "couplings": {(0, 1): k12, (1, 2): 1.02236, (2, 0): k31},
        "d": (-5.0, 6.0, 7.5),
        "hbar": 1.0,
    }


PRESETS: dict[str, dict] = {
    "weak": _three_body(0.01442, 0.01732),
    "strong": _three_body(0.1442, 0.1732),
    "decoupled": _three_body(0.0, 0.0),
}

PRESET_NOTES = {
    "weak": "three particles, weak system-environment springs (K12=0.01442, K31=0.01732)",
    "strong": "three particles, couplings to particle 1 ten times stronger (K12=0.1442, K31=0.1732)",
    "decoupled": "three particles, particle 1 detached from the environment (K12=K31=0)",
}


@dataclass(frozen=True)
class RunConfig:
    config: ValidatedConfig
    grid: Grid = Grid()
    snapshot_times: tuple[float, ...] = DEFAULT_SNAPSHOTS
    series_dt: float = DEFAULT_SERIES_DT
    t_end: float = DEFAULT_T_END
    classical_dt: float = DEFAULT_CLASSICAL_DT
    out_dir: str = "out"
    preset: str | None = None
    couplings: dict = field(default_factory=dict, compare=False)

    @property
    def network(self) -> OscillatorNetwork:
        return self.config.network

    @property
    def cat(self) -> CatSpec:
        return self.config.cat

    def series_times(self) -> np.ndarray:
        return sample_times(self.series_dt, self.t_end)

    def classical_times(self) -> np.ndarray:
        return sample_times(self.classical_dt, self.t_end)

    def with_network(self, network: OscillatorNetwork) -> "RunConfig":
        return replace(self, config=validate(network, self.cat))


def sample_times(dt: float, t_end: float) -> np.ndarray:
    """``0, dt, 2dt, ...`` up to ``t_end`` inclusive (``t_end`` appended if off-grid)."""
    n = int(np.floor(t_end / dt + 1e-9))
    ts = np.round(np.arange(n + 1) * dt, 12)
    if t_end - ts[-1] > 1e-12:
        ts = np.append(ts, t_end)
    return ts


def _floats(raw: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ParseError(f"key '{key}': {exc}") from None


def _float(raw: str, key: str) -> float:
    vals = _floats(raw, key)
    if len(vals) != 1:
        raise ParseError(f"key '{key}' expects one number, got {raw!r}")
    return vals[0]


def _int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"key '{key}' expects an integer, got {raw!r}") from None


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    if text.lstrip().startswith(SUMMARY_HEADER):
        if CONFIG_MARKER not in text:
            raise ParseError(f"{source}: summary has no config echo")
        text = text.split(CONFIG_MARKER, 1)[1]
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text, source=source)
    except configparser.Error as exc:
        raise ParseError(f"{source}: {exc}") from None

    known = {"run", "network", "couplings", "cat", "grid", "times", "output"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ParseError(f"{source}: unknown section(s) {sorted(unknown)}")

    def get(section, key):
        if parser.has_section(section) and parser.has_option(section, key):
            return parser.get(section, key)
        return None

    preset = get("run", "preset")
    if preset is not None and preset not in PRESETS:
        raise ParseError(f"key 'preset': unknown preset {preset!r} (choose from {sorted(PRESETS)})")
    base = PRESETS.get(preset, {})

    def required(section, key, conv):
        raw = get(section, key)
        if raw is not None:
            return conv(raw, key)
        if key in base:
            return base[key]
        raise ParseError(f"{source}: missing key '{key}' in [{section}]")

    masses = required("network", "masses", _floats)
    n = len(masses)
    external = get("network", "external_k")
    external_k = _floats(external, "external_k") if external is not None else base.get("external_k", (0.0,) * n)
    system = _int(get("network", "system") or "1", "system") - 1

    couplings = dict(base.get("couplings", {}))
    if parser.has_section("couplings"):
        for key, raw in parser.items("couplings"):
            try:
                i, j = (int(p) - 1 for p in key.split("-"))
            except ValueError:
                raise ParseError(f"coupling key {key!r} must look like 'i-j'") from None
            couplings = {p: v for p, v in couplings.items() if set(p) != {i, j}}
            couplings[(i, j)] = _float(raw, key)
    for (i, j) in couplings:
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ParseError(f"coupling '{i + 1}-{j + 1}' does not name two distinct particles of {n}")

    d = required("cat", "d", _floats)
    sigma_raw = get("cat", "sigma")
    sigma = _floats(sigma_raw, "sigma") if sigma_raw is not None else (DEFAULT_SIGMA,) * n
    if len(sigma) == 1 and n > 1:
        sigma = sigma * n
    hbar_raw = get("cat", "hbar")
    hbar = _float(hbar_raw, "hbar") if hbar_raw is not None else base.get("hbar", 1.0)

    for key, vals in (("external_k", external_k), ("d", d), ("sigma", sigma)):
        if len(vals) != n:
            raise ParseError(f"key '{key}' has {len(vals)} entries for {n} masses")

    grid = Grid(
        _float(get("grid", "x_min") or "-12", "x_min"),
        _float(get("grid", "x_max") or "12", "x_max"),
        _int(get("grid", "points") or "1201", "points"),
    )
    snaps_raw = get("times", "snapshots")
    snaps = _floats(snaps_raw, "snapshots") if snaps_raw is not None else DEFAULT_SNAPSHOTS
    series_dt = _float(get("times", "series_dt") or repr(DEFAULT_SERIES_DT), "series_dt")
    classical_dt = _float(get("times", "classical_dt") or repr(DEFAULT_CLASSICAL_DT), "classical_dt")
    t_end = _float(get("times", "t_end") or repr(DEFAULT_T_END), "t_end")
    out_dir = get("output", "dir") or "out"

    if any(t < 0 for t in snaps) or list(snaps) != sorted(snaps):
        raise ParseError("snapshot times must be non-negative and ascending")
    if series_dt <= 0 or classical_dt <= 0 or t_end < 0:
        raise ParseError("time steps must be positive and t_end non-negative")
    if grid.count < 3 or grid.x_max <= grid.x_min:
        raise ParseError("grid needs x_max > x_min and at least 3 points")

    network = OscillatorNetwork.from_pairs(masses, external_k, couplings, system)
    cat = CatSpec(d, sigma, hbar)
    return RunConfig(
        validate(network, cat), grid, tuple(snaps), series_dt, t_end, classical_dt, out_dir, preset, couplings
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return parse_config(text, str(path))


def preset_config(name: str, **overrides) -> RunConfig:
    rc = parse_config(f"preset = {name}\n")
    return replace(rc, **overrides) if overrides else rc


def _fmt(values) -> str:
    return ", ".join(repr(float(v)) for v in values)


def format_config(rc: RunConfig) -> str:
    """Config text that parses back to an identical ``RunConfig``."""
    net, cat = rc.network, rc.cat
    lines = []
    if rc.preset:
        lines.append(f"preset = {rc.preset}")
    lines += [
        "[network]",
        f"masses = {_fmt(net.masses)}",
        f"external_k = {_fmt(net.external_k)}",
        f"system = {net.system_index + 1}",
        "[couplings]",
    ]
    k = net.coupling_array()
    for i in range(net.n):
        for j in range(i + 1, net.n):
            if k[i, j] != 0 or (i, j) in rc.couplings or (j, i) in rc.couplings:
                lines.append(f"{i + 1}-{j + 1} = {float(k[i, j])!r}")
    lines += [
        "[cat]",
        f"d = {_fmt(cat.d)}",
        f"sigma = {_fmt(cat.sigma)}",
        f"hbar = {cat.hbar!r}",
        "[grid]",
        f"x_min = {rc.grid.x_min!r}",
        f"x_max = {rc.grid.x_max!r}",
        f"points = {rc.grid.count}",
        "[times]",
        f"snapshots = {_fmt(rc.snapshot_times)}",
        f"series_dt = {rc.series_dt!r}",
        f"classical_dt = {rc.classical_dt!r}",
        f"t_end = {rc.t_end!r}",
        "[output]",
        f"dir = {rc.out_dir}",
    ]
    return "\n".join(lines) + "\n"


def decoupled_baseline(rc: RunConfig) -> RunConfig:
    """Same run with every spring touching the system particle removed."""
    net = rc.network
    k = net.coupling_array()
    s = net.system_index
    k[s, :] = 0.0
    k[:, s] = 0.0
    return rc.with_network(OscillatorNetwork(net.masses, net.external_k, tuple(map(tuple, k)), s))
