"""Codec configuration and the flat ``key=value`` config file loader."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

NUM_SUBBANDS = 8


class ConfigError(ValueError):
    pass


def _tuple(*values):
    return field(default_factory=lambda: tuple(values))


@dataclass(frozen=True)
class CodecConfig:
    """All tunables of the codec. Defaults describe the 12.8 kHz core coder.

    Subband edges are upper bin boundaries: band ``b`` covers bins
    ``edges[b-1] <= f < edges[b]`` with an implicit lower edge of 0.
    """

    sample_rate_hz: int = 12800
    hop_n: int = 512
    lpc_order_fdns: int = 16
    lpc_order_ctns: int = 10
    weight_fdns: float = 0.93
    weight_ctns: float = 0.94
    ctns_gain_threshold_db: float = -3.0
    ctns_start_bin: int = 25
    subband_edges: tuple = _tuple(40, 90, 140, 200, 260, 330, 410, 512)
    power_factors: tuple = _tuple(4 / 3, 4 / 3, 4 / 3, 1.0, 1.0, 3 / 4, 3 / 4, 3 / 4)
    fixed_bits: tuple = _tuple(338, 237, 152, 135, 68, 10, 7, 3)
    add_bits: tuple = _tuple(7, 7, 5, 5, 3, 3, 3, 3)
    fer_thresholds: tuple = _tuple(0.125, 0.125, 0.125, 0.125, 0.07, 0.07, 0.07, 0.07)
    gain_gate: float = 9.5
    gate_relax: float = 0.025
    phase_bits: int = 6
    bit_budget_scale: float = 1.0
    # slope of the scale-factor bit estimate
    k_fit: float = 1.0
    lsf_bits: int = 10
    lsf_stages: int = 2
    root_bits: int = 11
    root_stages: int = 3

    def __post_init__(self):
        for name in ("subband_edges", "power_factors", "fixed_bits", "add_bits", "fer_thresholds"):
            value = tuple(getattr(self, name))
            object.__setattr__(self, name, value)
            if len(value) != NUM_SUBBANDS:
                raise ConfigError(f"{name} must have {NUM_SUBBANDS} entries, got {len(value)}")
        edges = self.subband_edges
        if any(b <= a for a, b in zip(edges, edges[1:])) or edges[0] <= 0:
            raise ConfigError(f"subband_edges must be strictly ascending and positive: {edges}")
        if edges[-1] != self.num_bins:
            raise ConfigError(f"last subband edge {edges[-1]} != num_bins {self.num_bins}")
        if self.hop_n <= 0:
            raise ConfigError("hop_n must be positive")
        if not 0 <= self.ctns_start_bin < self.num_bins:
            raise ConfigError("ctns_start_bin out of range")
        if self.k_fit <= 0:
            raise ConfigError("k_fit must be positive")
        if self.bit_budget_scale <= 0:
            raise ConfigError("bit_budget_scale must be positive")
        for name in ("weight_fdns", "weight_ctns"):
            if not 0 < getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in (0, 1]")

    @property
    def window_len(self) -> int:
        return 2 * self.hop_n

    @property
    def num_bins(self) -> int:
        return self.hop_n

    @property
    def band_starts(self) -> tuple:
        return (0,) + self.subband_edges[:-1]

    def band_slices(self):
        return [slice(a, b) for a, b in zip(self.band_starts, self.subband_edges)]

    def replace(self, **changes) -> "CodecConfig":
        return dataclasses.replace(self, **changes)


def _parse_value(raw: str, default):
    if isinstance(default, tuple):
        items = [s for s in raw.replace(",", " ").split() if s]
        caster = int if all(isinstance(v, int) for v in default) else float
        return tuple(caster(_eval_number(s)) for s in items)
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    return float(_eval_number(raw))


def _eval_number(text: str) -> float:
    # accepts plain numbers and simple ratios such as 4/3
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def load_config(path) -> CodecConfig:
    """Read a flat ``key = value`` file; unknown keys are rejected.

    Lines starting with ``#`` are comments. List values are comma or
    whitespace separated, e.g. ``power_factors = 4/3, 4/3, 1, ...``.
    """
    defaults = CodecConfig()
    known = {f.name: getattr(defaults, f.name) for f in dataclasses.fields(CodecConfig)}
    changes = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            changes[key] = _parse_value(raw, known[key])
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {raw!r}") from exc
    return CodecConfig(**changes)


def dump_config(config: CodecConfig) -> str:
    lines = []
    for f in dataclasses.fields(CodecConfig):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = ", ".join(repr(v) for v in value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
