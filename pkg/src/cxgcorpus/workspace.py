"""Workspace configuration: `key = value` config files, the effective
settings a run uses, and config-hash sidecars for staleness detection.

Every derived file gets a `<name>.meta` sidecar recording the hash of
the effective configuration that produced it. Commands that consume a
derived file refuse to run when the recorded hash differs from the
current one, so stale intermediate files are caught without relying on
timestamps.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, StaleInputError

DEFAULT_BAND = (2, 10000)
DEFAULT_BAND_EDGES = (2, 50, 100, 1000, 10000)


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Parse `key = value` lines; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError(f"{path}:{lineno}: expected `key = value`")
        values[key.strip()] = value.strip()
    return values


def parse_band(text: str) -> tuple[int, int | None]:
    """Parse `LO:HI` where HI may be `inf`."""
    lo_text, sep, hi_text = text.partition(":")
    if not sep:
        raise ParseError(f"band must be LO:HI, got {text!r}")
    try:
        lo = int(lo_text)
        hi = None if hi_text.strip() in ("inf", "") else int(hi_text)
    except ValueError:
        raise ParseError(f"bad band {text!r}")
    if hi is not None and hi < lo:
        raise ParseError(f"band upper bound {hi} below lower bound {lo}")
    return lo, hi


@dataclass
class EffectiveConfig:
    """The settings that affect derived outputs (worker count excluded)."""

    seed: int = 0
    band: tuple[int, int | None] = DEFAULT_BAND
    max_gap: int = 1
    strictness: str = "anchor"
    band_edges: tuple[int, ...] = DEFAULT_BAND_EDGES

    @classmethod
    def from_sources(cls, config_path: str | Path | None, overrides: dict) -> "EffectiveConfig":
        """Config-file values first, command-line overrides on top."""
        cfg = cls()
        if config_path is not None:
            raw = parse_config_file(config_path)
            if "seed" in raw:
                cfg.seed = int(raw["seed"])
            if "band" in raw:
                cfg.band = parse_band(raw["band"])
            if "max_gap" in raw:
                cfg.max_gap = int(raw["max_gap"])
            if "strictness" in raw:
                cfg.strictness = raw["strictness"]
            if "band_edges" in raw:
                cfg.band_edges = tuple(int(x) for x in raw["band_edges"].split(","))
        for key, value in overrides.items():
            if value is not None:
                setattr(cfg, key, value)
        return cfg

    def canonical(self, keys: tuple[str, ...]) -> str:
        hi = "inf" if self.band[1] is None else str(self.band[1])
        rendered = {
            "band": f"{self.band[0]}:{hi}",
            "band_edges": ",".join(str(e) for e in self.band_edges),
            "max_gap": str(self.max_gap),
            "seed": str(self.seed),
            "strictness": self.strictness,
        }
        return "".join(f"{k} = {rendered[k]}\n" for k in sorted(keys))

    def subset_hash(self, keys: tuple[str, ...]) -> str:
        return hashlib.sha256(self.canonical(keys).encode("utf-8")).hexdigest()[:16]


# The config keys each derived artifact actually depends on; a file's
# sidecar records the hash over its own subset, so e.g. changing the
# band never invalidates an annotated corpus or an occurrence table.
ANNOTATE_KEYS: tuple[str, ...] = ()
TABLE_KEYS = ("max_gap",)
STATS_KEYS = ("max_gap", "band_edges")
BUILD_KEYS = ("max_gap", "band", "seed")
PAIRS_KEYS = ("max_gap", "band", "seed", "strictness")


def write_sidecar(
    out_path: str | Path,
    config: EffectiveConfig,
    command: str,
    keys: tuple[str, ...],
) -> None:
    meta = Path(str(out_path) + ".meta")
    body = f"config_hash = {config.subset_hash(keys)}\ncommand = {command}\n"
    for line in config.canonical(keys).splitlines():
        body += f"# {line}\n"
    meta.write_text(body, encoding="utf-8")


def check_sidecar(
    in_path: str | Path, config: EffectiveConfig, keys: tuple[str, ...]
) -> None:
    """Raise when a derived input was built under a different config.

    Files without a sidecar (external inputs) are accepted as-is.
    """
    meta = Path(str(in_path) + ".meta")
    if not meta.exists():
        return
    recorded = parse_config_file(meta).get("config_hash")
    current = config.subset_hash(keys)
    if recorded != current:
        raise StaleInputError(
            f"{in_path} was built under config hash {recorded}, "
            f"current is {current}; rebuild it or restore the config"
        )
