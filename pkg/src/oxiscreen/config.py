"""Run configuration: one flat key=value namespace covering every tunable.

Precedence is CLI flags > config file > defaults; the effective configuration
is echoed into every output directory so a run can be reproduced from its
artifacts alone.
"""

from dataclasses import dataclass, fields, replace

MODEL_KINDS = ("model1", "model2", "model3", "model4")
CLASSIFIERS = ("lr", "rf")


@dataclass(frozen=True)
class RunConfig:
    # preprocessing
    spo2_min: float = 50.0
    spo2_max: float = 100.0
    median_window: int = 9
    # desaturation detectors
    relative_threshold: float = 3.0
    relative_max_len_s: float = 120.0
    ct_level: float = 90.0
    hypoxic_detector: str = "relative"  # events feeding the burden features
    # general statistics
    percentile: float = 1.0
    below_median_drop: float = 2.0
    delta_window_s: float = 12.0
    # complexity
    entropy_m: int = 1
    entropy_r_factor: float = 0.25
    ctm_radius: float = 0.25
    dfa_scale: int = 20
    # periodicity
    prsa_halfwidth: int = 10
    psd_method: str = "welch"
    psd_segment: int = 512
    psd_overlap: float = 0.5
    psd_band_low: float = 0.014
    psd_band_high: float = 0.033
    # windowing / feature assembly
    window_s: float = 7200.0
    hop_s: float = 3600.0
    augment: bool = False  # extract command: overlap COPD windows
    model_kind: str = "model3"
    # selection
    mi_bins: int = 10
    select_k_model2: int = 38
    select_k_model3: int = 35
    select_k_model4: int = 35
    # learning
    classifier: str = "rf"
    search_budget: int = 60
    n_outer: int = 5
    n_inner: int = 5
    test_fraction: float = 0.2
    lr_epochs: int = 500
    lr_tol: float = 1e-9
    # reproducibility / execution
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise ValueError(f"model_kind must be one of {MODEL_KINDS}, "
                             f"got {self.model_kind!r}")
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"classifier must be one of {CLASSIFIERS}, "
                             f"got {self.classifier!r}")
        if self.hypoxic_detector not in ("relative", "hard"):
            raise ValueError("hypoxic_detector must be 'relative' or 'hard'")

    def select_k(self, model_kind=None) -> int:
        kind = model_kind or self.model_kind
        return {"model1": 0, "model2": self.select_k_model2,
                "model3": self.select_k_model3,
                "model4": self.select_k_model4}[kind]

    def with_overrides(self, overrides: dict) -> "RunConfig":
        return replace(self, **_parse_values(overrides))

    def to_lines(self) -> list:
        return [f"{f.name} = {_format_value(getattr(self, f.name))}"
                for f in fields(self)]

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("\n".join(self.to_lines()) + "\n")


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def _field_types():
    # f.type is the class itself or its name, depending on annotation mode
    return {f.name: getattr(f.type, "__name__", f.type) for f in fields(RunConfig)}


def _parse_values(raw: dict) -> dict:
    types = _field_types()
    parsed = {}
    for key, value in raw.items():
        if key not in types:
            raise ValueError(f"unknown configuration key {key!r}")
        if not isinstance(value, str):
            parsed[key] = value
            continue
        kind = types[key]
        text = value.strip()
        if kind == "bool":
            if text.lower() not in ("true", "false", "0", "1"):
                raise ValueError(f"{key} must be boolean, got {text!r}")
            parsed[key] = text.lower() in ("true", "1")
        elif kind == "int":
            parsed[key] = int(text)
        elif kind == "float":
            parsed[key] = float(text)
        else:
            parsed[key] = text
    return parsed


def read_config_file(path) -> dict:
    """Parse a key = value config file (blank lines and # comments allowed)."""
    raw = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, value = stripped.partition("=")
            raw[key.strip()] = value.strip()
    return raw


def load_config(path=None, overrides=None) -> RunConfig:
    config = RunConfig()
    if path is not None:
        config = config.with_overrides(read_config_file(path))
    if overrides:
        config = config.with_overrides(overrides)
    return config
