"""Optional JSON config file: ladder, Viterbi weights, and surface overrides.

Recognized keys (all optional)::

    {
      "resolutions": [360, 480, 720, 864, 1080],
      "frame_rates": [30, 40, ..., 120],
      "bitrates": [2000000, 3000000, 4000000],
      "viterbi": {
        "frame_rate_weights": [[...], ...],   # full matrix, row = from-state
        "resolution_weights": [[...], ...],
        "decision_period_s": 2.0,
        "emission_floor": 1e-12
      },
      "synthetic": {
        "alpha_temporal": 1.0, "alpha_spatial": 2.5, "alpha_coding": 1.5,
        "bpp_ref": 0.05, "spatial_exponent": 0.8, "content_detail": 0.5
      },
      "simulator": {"iframe_bit_multiplier": 4, "jitter_pct": 0.0}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

import numpy as np

from .controller import (DECISION_PERIOD_S, EMISSION_FLOOR, TransitionGraph,
                         default_transition_graph)
from .errors import ArgumentError, ConfigError
from .ladder import DEFAULT_LADDER, Ladder
from .quality import SyntheticQualityParams
from .simulator import IFRAME_BIT_MULTIPLIER


@dataclass(frozen=True)
class Config:
    ladder: Ladder = DEFAULT_LADDER
    graph: TransitionGraph = None
    synthetic_params: SyntheticQualityParams = SyntheticQualityParams()
    iframe_bit_multiplier: int = IFRAME_BIT_MULTIPLIER
    jitter_pct: float = 0.0

    def __post_init__(self):
        if self.graph is None:
            object.__setattr__(self, "graph", default_transition_graph(self.ladder))


DEFAULT_CONFIG = Config()


def _reject_unknown(section: dict, allowed, where: str) -> None:
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key {sorted(unknown)[0]!r}")


def load_config(path=None) -> Config:
    if path is None:
        return DEFAULT_CONFIG
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config root must be an object")
    _reject_unknown(raw, ("resolutions", "frame_rates", "bitrates",
                          "viterbi", "synthetic", "simulator"), str(path))

    try:
        ladder = Ladder(
            frame_rates_hz=tuple(int(f) for f in raw.get("frame_rates",
                                                         DEFAULT_LADDER.frame_rates_hz)),
            heights=tuple(int(r) for r in raw.get("resolutions",
                                                  DEFAULT_LADDER.heights)),
            bitrates_bps=tuple(float(b) for b in raw.get("bitrates",
                                                         DEFAULT_LADDER.bitrates_bps)),
        )
    except (ArgumentError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: bad ladder: {exc}") from None

    viterbi = raw.get("viterbi", {})
    _reject_unknown(viterbi, ("frame_rate_weights", "resolution_weights",
                              "decision_period_s", "emission_floor"),
                    f"{path}: viterbi")
    period = float(viterbi.get("decision_period_s", DECISION_PERIOD_S))
    floor = float(viterbi.get("emission_floor", EMISSION_FLOOR))
    default_graph = default_transition_graph(ladder, period)
    try:
        graph = TransitionGraph(
            frame_rate_weights=np.array(viterbi.get(
                "frame_rate_weights", default_graph.frame_rate_weights), dtype=float),
            resolution_weights=np.array(viterbi.get(
                "resolution_weights", default_graph.resolution_weights), dtype=float),
            decision_period_s=period,
            ladder=ladder,
            emission_floor=floor,
        )
    except ArgumentError as exc:
        raise ConfigError(f"{path}: bad viterbi section: {exc}") from None

    synthetic = raw.get("synthetic", {})
    param_names = [f.name for f in fields(SyntheticQualityParams)]
    _reject_unknown(synthetic, param_names, f"{path}: synthetic")
    try:
        params = SyntheticQualityParams(**synthetic)
    except (ArgumentError, TypeError) as exc:
        raise ConfigError(f"{path}: bad synthetic section: {exc}") from None

    simulator = raw.get("simulator", {})
    _reject_unknown(simulator, ("iframe_bit_multiplier", "jitter_pct"),
                    f"{path}: simulator")
    multiplier = int(simulator.get("iframe_bit_multiplier", IFRAME_BIT_MULTIPLIER))
    jitter = float(simulator.get("jitter_pct", 0.0))
    if multiplier < 1:
        raise ConfigError(f"{path}: iframe_bit_multiplier must be >= 1")
    if not 0.0 <= jitter < 100.0:
        raise ConfigError(f"{path}: jitter_pct must be in [0, 100)")

    return Config(ladder, graph, params, multiplier, jitter)
