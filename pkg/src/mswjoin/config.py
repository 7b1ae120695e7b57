"""Experiment configuration: flat key=value files plus CLI overrides."""
from __future__ import annotations

from dataclasses import dataclass, replace

from .join import JoinPredicate, parse_predicate


def parse_kv(text: str) -> dict[str, str]:
    """Parse `key=value` lines; '#' starts a comment, blanks are skipped."""
    out: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {line_no}: expected key=value, got {raw!r}")
        out[key.strip()] = value.strip()
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs; validate() lists every violated rule."""

    mode: str = "quality"                 # quality | none | max
    gamma: float = 0.95
    period_ms: int = 60_000
    interval_ms: int = 1_000
    b_ms: int = 10
    g_ms: int = 10
    strategy: str = "noneqsel"            # eqsel | noneqsel
    windows_ms: tuple[int, ...] = (100, 100)
    predicate: str = "cross"
    trace_path: str | None = None
    gen_spec_path: str | None = None
    seed: int = 0
    out_dir: str | None = None

    @property
    def m(self) -> int:
        return len(self.windows_ms)

    def parsed_predicate(self) -> JoinPredicate:
        return parse_predicate(self.predicate)

    def validate(self) -> None:
        problems = []
        if self.mode not in ("quality", "none", "max"):
            problems.append(f"mode must be quality|none|max, got {self.mode!r}")
        if not 0.0 < self.gamma <= 1.0:
            problems.append(f"gamma must be in (0, 1], got {self.gamma}")
        if self.interval_ms <= 0:
            problems.append("interval must be positive")
        elif self.period_ms < self.interval_ms or self.period_ms % self.interval_ms:
            problems.append("period must be a positive multiple of the interval")
        if self.g_ms <= 0:
            problems.append("granularity must be positive")
        elif self.b_ms < self.g_ms or self.b_ms % self.g_ms:
            problems.append("basic window must be a positive multiple of the granularity")
        if not self.windows_ms or any(w <= 0 for w in self.windows_ms):
            problems.append("windows must be positive")
        if self.strategy not in ("eqsel", "noneqsel"):
            problems.append(f"strategy must be eqsel|noneqsel, got {self.strategy!r}")
        if bool(self.trace_path) == bool(self.gen_spec_path):
            problems.append("exactly one of trace or generation spec is required")
        try:
            pred = self.parsed_predicate()
            if self.windows_ms:
                pred.validate(len(self.windows_ms))
        except ValueError as exc:
            problems.append(f"predicate: {exc}")
        if problems:
            raise ValueError("invalid config: " + "; ".join(problems))


_INT_KEYS = {"period_ms": "period_ms", "interval_ms": "interval_ms",
             "b_ms": "b_ms", "g_ms": "g_ms", "seed": "seed"}


def config_from_kv(kv: dict[str, str]) -> ExperimentConfig:
    """Build a config from parsed keys, applying defaults for the rest."""
    fields: dict = {}
    if "mode" in kv:
        fields["mode"] = kv["mode"]
    if "gamma" in kv:
        fields["gamma"] = float(kv["gamma"])
    for key, attr in _INT_KEYS.items():
        if key in kv:
            fields[attr] = int(kv[key])
    if "strategy" in kv:
        fields["strategy"] = kv["strategy"].lower()
    if "windows_ms" in kv:
        fields["windows_ms"] = tuple(int(w) for w in kv["windows_ms"].split(","))
    if "predicate" in kv:
        fields["predicate"] = kv["predicate"]
    if "trace" in kv:
        fields["trace_path"] = kv["trace"]
    if "gen_spec" in kv:
        fields["gen_spec_path"] = kv["gen_spec"]
    if "out" in kv:
        fields["out_dir"] = kv["out"]
    unknown = set(kv) - {"mode", "gamma", "strategy", "windows_ms", "predicate",
                         "trace", "gen_spec", "out", *_INT_KEYS}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**fields)


def load_config(path: str, overrides: dict | None = None) -> ExperimentConfig:
    """Read a config file, apply non-None overrides, and validate."""
    with open(path, encoding="utf-8") as fh:
        cfg = config_from_kv(parse_kv(fh.read()))
    if overrides:
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    cfg.validate()
    return cfg
