"""
Experiment configuration.

A configuration is resolved from three layers, later layers winning:
a named preset, a flat YAML (or JSON) file and command-line overrides.
"""

import copy
import dataclasses
import json
import logging
from dataclasses import dataclass, field

import numpy as np
import yaml

from .inverse import FilterKind
from .profiles import ContrastProfile, sign_changing

LOGGER = logging.getLogger("prolate_sampling.config")

MODES = ("standard", "sign_changing")
BASIS_MARGIN = 40

_COERCE = {
    **dict.fromkeys(
        (
            "c",
            "epsilon",
            "delta",
            "z_start",
            "z_stop",
            "alpha",
            "q_inf",
            "d_radius",
            "lambda_floor",
            "by_prolate",
        ),
        float,
    ),
    **dict.fromkeys(
        ("n", "n_t", "n_q", "seed", "z_count", "index_count", "workers"), int
    ),
    **dict.fromkeys(("name", "reg", "mode"), str),
}


def _default_profile():
    return ContrastProfile.constant(0.66)


@dataclass(frozen=True)
class ExperimentConfig:
    """All inputs of one indicator run.

    `n` and `n_t` default to int(c) + 40 and 2n + 30. `index_count` pins the
    dimension of J; otherwise J holds the leading modes with |lambda_n| above
    `by_prolate` when set, else delta (noisy runs) or `lambda_floor`
    (noiseless runs).
    """

    name: str = "custom"
    c: float = 20.0
    n: int | None = None
    n_t: int | None = None
    n_q: int = 100
    epsilon: float = 0.05
    delta: float = 0.0
    seed: int = 0
    profile: ContrastProfile = field(default_factory=_default_profile)
    z_start: float = -0.9
    z_stop: float = 0.9
    z_count: int = 181
    reg: str = "cutoff"
    alpha: float | None = None
    mode: str = "standard"
    q_inf: float = 1.0
    d_radius: float = 0.8
    index_count: int | None = None
    lambda_floor: float = 1e-16
    by_prolate: float | None = None
    alpha_from_noise: bool = False
    save_matrix: bool = False
    workers: int = 1

    @property
    def basis_size(self):
        return self.n if self.n is not None else int(self.c) + BASIS_MARGIN

    @property
    def truncation(self):
        return self.n_t if self.n_t is not None else 2 * self.basis_size + 30

    @property
    def zs(self):
        return np.linspace(self.z_start, self.z_stop, self.z_count)

    def validate(self):
        """Raise ValueError naming the first violated invariant."""
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.basis_size < 0:
            raise ValueError(f"n must be >= 0, got {self.basis_size}")
        if self.truncation < 2 * self.basis_size + 30:
            raise ValueError(
                f"N_t >= 2N+30 violated: N_t={self.truncation}, N={self.basis_size}"
            )
        if self.n_q < 2:
            raise ValueError(f"n_q must be >= 2, got {self.n_q}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.delta < 0:
            raise ValueError(f"delta >= 0 violated: delta={self.delta}")
        if self.z_count < 0:
            raise ValueError(f"z_count must be >= 0, got {self.z_count}")
        if self.z_count and (
            min(self.z_start, self.z_stop) - self.epsilon < -1
            or max(self.z_start, self.z_stop) + self.epsilon > 1
        ):
            raise ValueError(
                f"z grid +/- epsilon must stay inside (-1, 1): grid "
                f"[{self.z_start}, {self.z_stop}], epsilon={self.epsilon}"
            )
        if self.reg not in {k.value for k in FilterKind}:
            raise ValueError(
                f"reg must be one of {[k.value for k in FilterKind]}, got {self.reg!r}"
            )
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {list(MODES)}, got {self.mode!r}")
        if self.mode == "sign_changing":
            if not self.q_inf > 0:
                raise ValueError(f"q_inf must be positive, got {self.q_inf}")
            if not 0 < self.d_radius < 1:
                raise ValueError(f"d_radius must lie in (0, 1), got {self.d_radius}")
            lo, hi = self.profile.support
            if lo < -self.d_radius or hi > self.d_radius:
                raise ValueError(
                    f"profile support ({lo}, {hi}) must lie inside "
                    f"(-d_radius, d_radius) = (-{self.d_radius}, {self.d_radius})"
                )
        if self.index_count is not None and not (
            1 <= self.index_count <= self.basis_size + 1
        ):
            raise ValueError(
                f"index_count must lie in 1..{self.basis_size + 1}, "
                f"got {self.index_count}"
            )
        if not self.lambda_floor > 0:
            raise ValueError(f"lambda_floor must be positive, got {self.lambda_floor}")
        if self.by_prolate is not None and not self.by_prolate > 0:
            raise ValueError(f"by_prolate must be positive, got {self.by_prolate}")
        for key in ("alpha_from_noise", "save_matrix"):
            value = getattr(self, key)
            if not isinstance(value, bool):
                raise ValueError(f"{key} must be true or false, got {value!r}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        return self

    def to_mapping(self):
        data = dataclasses.asdict(self)
        data["profile"] = self.profile.to_mapping()
        return data

    @classmethod
    def from_mapping(cls, data):
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"Unknown config keys: {unknown}")
        if "profile" in data and not isinstance(data["profile"], ContrastProfile):
            data["profile"] = ContrastProfile.from_mapping(data["profile"])
        # PyYAML reads exponent-only floats such as 1e-16 as strings
        for key, kind in _COERCE.items():
            if data.get(key) is not None:
                try:
                    data[key] = kind(data[key])
                except (TypeError, ValueError) as err:
                    raise ValueError(f"Config key {key!r}: {err}") from err
        return cls(**data)


def _fig4(c, noisy):
    return {
        "name": f"fig4_c{c}_{'noisy' if noisy else 'clean'}",
        "c": float(c),
        "epsilon": 0.1,
        "delta": 0.05 if noisy else 0.0,
        "profile": {"kind": "constant", "r": 0.66},
    }


def _fig6(gap):
    return {
        "name": f"fig6_gap_{gap}",
        "c": 100.0,
        "n_q": 200,
        "epsilon": 0.05,
        "profile": {"kind": "two_component", "r": 0.16, "gap": gap},
    }


PRESETS = {
    "fig2_c20": {
        "name": "fig2_c20",
        "c": 20.0,
        "epsilon": 0.05,
        "profile": {"kind": "constant", "r": 0.66},
        "index_count": 37,
    },
    "fig2_c40": {
        "name": "fig2_c40",
        "c": 40.0,
        "epsilon": 0.05,
        "profile": {"kind": "constant", "r": 0.66},
        "index_count": 54,
    },
    "fig3_noisy_c20": {
        "name": "fig3_noisy_c20",
        "c": 20.0,
        "epsilon": 0.05,
        "delta": 0.05,
        "profile": {"kind": "constant", "r": 0.66},
    },
    **{
        f"fig4_c{c}_{tag}": _fig4(c, tag == "noisy")
        for c in (3, 5, 7, 10)
        for tag in ("clean", "noisy")
    },
    "fig5_sign": {
        "name": "fig5_sign",
        "c": 40.0,
        "epsilon": 0.05,
        "mode": "sign_changing",
        "profile": sign_changing(0.6).to_mapping(),
        "q_inf": 1.0,
        "d_radius": 0.8,
    },
    **{f"fig6_gap_{gap}": _fig6(gap) for gap in (1.16, 0.08, 0.06, 0.04, 0.02, 0.01)},
}


def list_presets():
    """Return the preset names in figure order."""
    return list(PRESETS)


def load_config(path):
    """Read a flat YAML/JSON mapping, unwrapping a run summary's `config` key."""
    with open(path, encoding="utf-8") as fp:
        if str(path).endswith(".json"):
            data = json.load(fp)
        else:
            data = yaml.safe_load(fp)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must hold a mapping")
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    return data


def _merge(base, update):
    out = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def parse_override(text):
    """Turn `key=value` (dotted keys nest) into a mapping; values parse as YAML."""
    if "=" not in text:
        raise ValueError(f"Override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    value = yaml.safe_load(raw) if raw.strip() else None
    out = value
    for part in reversed(key.strip().split(".")):
        out = {part: out}
    return out


def resolve_config(preset=None, path=None, overrides=None, set_values=()):
    """Build and validate a config from preset < file < overrides.

    Parameters
    ----------
    preset : str, optional
        Name of a preset.
    path : str, optional
        Config file.
    overrides : dict, optional
        Explicit key/value overrides; `None` values are skipped.
    set_values : sequence of str
        `key=value` strings, applied last.
    """
    data = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ValueError(
                f"Unknown preset {preset!r}; available: {', '.join(PRESETS)}"
            )
        data = copy.deepcopy(PRESETS[preset])
    if path is not None:
        data = _merge(data, load_config(path))
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    for text in set_values:
        data = _merge(data, parse_override(text))
    config = ExperimentConfig.from_mapping(data).validate()
    LOGGER.debug("resolved config %s", config)
    return config
