"""Line-based `key = value` experiment configuration files.

Blank lines and lines starting with '#' are skipped; unknown keys are
errors. snr_db_list takes comma-separated values.
"""

from __future__ import annotations

from .bench import ExperimentConfig

_INT_KEYS = {"n_t", "n_r", "size_tx", "size_rx", "dim_d", "t_fe", "t_ks",
             "l_samples", "trials", "seed", "bcd_iters"}
_FLOAT_KEYS = {"sr", "alpha", "tau_db", "eps_acc"}
_STR_KEYS = {"estimator", "solver", "subsample"}
_LIST_KEYS = {"snr_db_list"}
KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _LIST_KEYS


def parse_config_text(text):
    """Parse config text into an ExperimentConfig."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        if key in _INT_KEYS:
            values[key] = int(value)
        elif key in _FLOAT_KEYS:
            values[key] = float(value)
        elif key in _LIST_KEYS:
            values[key] = tuple(float(x) for x in value.split(","))
        else:
            values[key] = value
    return ExperimentConfig(**values)


def load_config(path):
    with open(path) as fh:
        return parse_config_text(fh.read())


def format_config(cfg):
    """Render a config back to the file format (round-trips parse)."""
    lines = []
    for key in sorted(KNOWN_KEYS):
        value = getattr(cfg, key)
        if key in _LIST_KEYS:
            value = ",".join(repr(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
