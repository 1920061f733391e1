"""Scenario files: system parameters, channel specification, scheme and sweep grid.

Scenarios are YAML documents.  Powers may be written as plain numbers (watts) or as
strings such as ``"20 dBm"``; everything is converted to watts on load.

Example::

    name: case1
    system: {p_max: 20 dBm, zeta: 0.7, noise: -50 dBm}
    channel:
      kind: rician
      geometry: case1
      rician: {rician_factor: 3, c0: 0.01, xi: 3}
      seed: 1
      n_states: 2000
    scheme: FC
    sweep: {points: 15, max_fraction: 0.95}
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .channel import ChannelEnsemble, Geometry, RicianParams, fixed_awgn, sample_rician
from .model import SystemParams

SCHEME_NAMES = ("FC", "PC", "NC", "PAIRWISE", "EIA")

# Tx positions in a 5 m x 5 m square, transmitters in opposite corners.
GEOMETRIES = {
    "case1": ([(0.0, 0.0), (5.0, 5.0)], [(2.5, 2.5), (2.5, 2.5)]),
    "case2": ([(0.0, 0.0), (5.0, 5.0)], [(1.25, 1.25), (3.75, 3.75)]),
    # two well separated two-link clusters 15 m apart
    "clusters_k4": (
        [(0.0, 0.0), (0.0, 5.0), (15.0, 0.0), (15.0, 5.0)],
        [(2.4, 2.5), (2.6, 2.5), (12.4, 2.5), (12.6, 2.5)],
    ),
}

# Two-user static channels with about 30 dB attenuation per link.
FIXED_CHANNELS = {
    "awgn2": [
        [0.0307 * np.exp(1j * 1.7683), 0.0241 * np.exp(-1j * 2.6973)],
        [0.0349 * np.exp(-1j * 1.4011), 0.0258 * np.exp(1j * 2.8246)],
    ],
}

_POWER = re.compile(r"^\s*([-+0-9.eE]+)\s*(dBm|dBW|mW|W)?\s*$")


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(watts):
    return 10.0 * np.log10(np.asarray(watts, dtype=float)) + 30.0


def parse_power(value) -> float:
    """Number (watts) or string with a unit (``dBm``, ``dBW``, ``mW``, ``W``) to watts."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    m = _POWER.match(str(value))
    if not m:
        raise ValueError(f"cannot parse power {value!r}")
    x, unit = float(m.group(1)), m.group(2) or "W"
    return float({"dBm": dbm_to_watts(x), "dBW": dbm_to_watts(x + 30.0), "mW": x * 1e-3, "W": x}[unit])


@dataclass
class SweepSpec:
    points: int | list = 25
    max_fraction: float = 0.95
    equal_targets: bool = True
    mode: str = "targets"  # or "weights" for static-channel boundary tracing
    boundary: str = "ee"  # weight sweeps: "ee" (EH,EH) or "re" (ID,EH)
    weight_range: tuple = (0.0, 6.0)  # log10 range of mu_2 for "re" weight sweeps

    def __post_init__(self):
        if self.mode not in ("targets", "weights"):
            raise ValueError(f"unknown sweep mode {self.mode!r}")
        if self.boundary not in ("ee", "re"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        self.weight_range = tuple(float(v) for v in self.weight_range)

    def grid(self, bound: float) -> np.ndarray:
        if isinstance(self.points, (list, tuple)):
            values = np.asarray([parse_power(v) for v in self.points], dtype=float)
        else:
            values = np.linspace(0.0, self.max_fraction * bound, int(self.points))
        if values.size == 0:
            raise ValueError("sweep grid is empty")
        return np.sort(values)


@dataclass
class Scenario:
    name: str
    params: SystemParams
    noise_powers: np.ndarray
    channel: dict
    scheme: str = "FC"
    targets: np.ndarray | None = None
    sweep: SweepSpec = field(default_factory=SweepSpec)
    tol: float = 1e-8
    grouping: str | list = "greedy"
    single_beam: bool = False
    n_draws: int = 100
    raw: dict = field(default_factory=dict)

    @property
    def n_users(self) -> int:
        return len(self.noise_powers)

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        data = copy.deepcopy(data)
        system = data.get("system", {})
        channel = data.get("channel")
        if not isinstance(channel, dict) or "kind" not in channel:
            raise ValueError("scenario needs a channel section with a 'kind'")
        if channel["kind"] not in ("rician", "fixed"):
            raise ValueError(f"unknown channel kind {channel['kind']!r}")
        K = _channel_users(channel)
        noise = system.get("noise", 1e-8)
        noise = np.array([parse_power(v) for v in noise] if isinstance(noise, list) else [parse_power(noise)] * K)
        if noise.size != K:
            raise ValueError(f"{noise.size} noise powers given for {K} users")
        params = SystemParams(parse_power(system.get("p_max", 0.1)), float(system.get("zeta", 1.0)))
        scheme = str(data.get("scheme", "FC")).upper()
        if scheme not in SCHEME_NAMES:
            raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEME_NAMES}")
        targets = data.get("targets")
        if targets is not None:
            targets = np.broadcast_to(np.array([parse_power(t) for t in np.atleast_1d(targets)]), (K,)).copy()
        sweep = SweepSpec(**data.get("sweep", {}))
        solver = data.get("solver", {})
        return cls(
            name=str(data.get("name", "scenario")),
            params=params,
            noise_powers=noise,
            channel=channel,
            scheme=scheme,
            targets=targets,
            sweep=sweep,
            tol=float(solver.get("tol", 1e-8)),
            grouping=data.get("grouping", "greedy"),
            single_beam=bool(solver.get("single_beam", False)),
            n_draws=int(solver.get("n_draws", 100)),
            raw=data,
        )

    def with_overrides(self, seed=None, tol=None, single_beam=None, n_states=None) -> "Scenario":
        out = copy.copy(self)
        out.channel = dict(self.channel)
        if seed is not None:
            out.channel["seed"] = int(seed)
        if n_states is not None:
            out.channel["n_states"] = int(n_states)
        if tol is not None:
            out.tol = float(tol)
        if single_beam is not None:
            out.single_beam = bool(single_beam)
        return out

    def echo(self) -> dict:
        """Every number the run consumes, resolved to SI units."""
        ch = dict(self.channel)
        if ch["kind"] == "rician":
            tx, rx = _positions(ch)
            ch["tx_positions"], ch["rx_positions"] = tx, rx
            ch["rician"] = vars(RicianParams(**ch.get("rician", {})))
            ch.setdefault("seed", 0)
            ch.setdefault("n_states", 10_000)
        else:
            H = _fixed_matrix(ch)
            ch["matrix_re"], ch["matrix_im"] = H.real.tolist(), H.imag.tolist()
        return {
            "name": self.name,
            "p_max_w": self.params.p_max,
            "zeta": self.params.zeta,
            "noise_w": self.noise_powers.tolist(),
            "channel": ch,
            "scheme": self.scheme,
            "targets_w": None if self.targets is None else self.targets.tolist(),
            "sweep": vars(self.sweep),
            "tol": self.tol,
            "grouping": self.grouping,
            "single_beam": self.single_beam,
            "n_draws": self.n_draws,
        }


def _positions(channel):
    if "geometry" in channel:
        try:
            tx, rx = GEOMETRIES[channel["geometry"]]
        except KeyError:
            raise ValueError(f"unknown geometry preset {channel['geometry']!r}") from None
        return [list(p) for p in tx], [list(p) for p in rx]
    return channel["tx_positions"], channel["rx_positions"]


def _fixed_matrix(channel) -> np.ndarray:
    if "preset" in channel:
        return np.asarray(FIXED_CHANNELS[channel["preset"]], dtype=complex)
    re_part = np.asarray(channel["matrix_re"], dtype=float)
    im_part = np.asarray(channel.get("matrix_im", np.zeros_like(re_part)), dtype=float)
    return re_part + 1j * im_part


def _channel_users(channel) -> int:
    if channel["kind"] == "rician":
        return len(_positions(channel)[0])
    return _fixed_matrix(channel).shape[0]


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return Scenario.from_dict(yaml.safe_load(fh))


def build_ensemble(scenario: Scenario) -> ChannelEnsemble:
    ch = scenario.channel
    if ch["kind"] == "fixed":
        return fixed_awgn(_fixed_matrix(ch), scenario.noise_powers)
    tx, rx = _positions(ch)
    geometry = Geometry(np.asarray(tx, dtype=float), np.asarray(rx, dtype=float))
    return sample_rician(geometry, RicianParams(**ch.get("rician", {})), scenario.noise_powers,
                         seed=int(ch.get("seed", 0)), n_states=int(ch.get("n_states", 10_000)))


def scenario_dir() -> Path:
    """Directory of the scenario files shipped with the repository."""
    return Path(__file__).resolve().parents[2] / "scenarios"
