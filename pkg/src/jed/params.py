"""Method parameters and their flat ``key = value`` text form."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ParameterError


@dataclass(frozen=True)
class JedParams:
    """Every scalar knob of the enhancement method.

    ``sigma`` and ``eps_thresh`` are in [0, 1] gradient units; the commonly
    quoted value of 10 on the 0-255 scale is ``10/255`` here. ``lam`` is
    exposed as ``lambda`` in config files, reports and on the command line.
    """

    alpha: float = 0.007
    beta: float = 0.001
    omega: float = 0.016
    lam: float = 6.0
    sigma: float = 10 / 255
    eps_thresh: float = 10 / 255
    eps_stab: float = 1e-4
    eps_div: float = 1 / 255
    gamma: float = 2.2
    tol: float = 1e-5
    max_iter: int = 1000

    def __post_init__(self):
        for name in ("alpha", "beta", "omega", "lam", "eps_thresh"):
            if not getattr(self, name) >= 0:
                raise ParameterError(f"{_key(name)} must be >= 0, got {getattr(self, name)}")
        for name in ("sigma", "eps_stab", "eps_div", "tol"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.eps_div <= 1:
            raise ParameterError(f"eps_div must be <= 1, got {self.eps_div}")
        if not self.gamma >= 1:
            raise ParameterError(f"gamma must be >= 1, got {self.gamma}")
        if isinstance(self.max_iter, bool) or int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ParameterError(f"max_iter must be a positive integer, got {self.max_iter}")
        object.__setattr__(self, "max_iter", int(self.max_iter))

    def replace(self, **changes) -> "JedParams":
        return dataclasses.replace(self, **{_attr(k): v for k, v in changes.items()})

    def to_dict(self) -> dict:
        return {_key(f.name): getattr(self, f.name) for f in dataclasses.fields(self)}

    @classmethod
    def from_dict(cls, values: dict) -> "JedParams":
        return cls().replace(**values)

    def to_config(self) -> str:
        return "".join(f"{k} = {v!r}\n" for k, v in self.to_dict().items())

    @classmethod
    def from_config(cls, text: str, base: "JedParams | None" = None) -> "JedParams":
        """Parse ``key = value`` lines; ``#`` starts a comment."""
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not key or not value:
                raise ParameterError(f"line {lineno}: expected 'key = value', got {raw!r}")
            if _attr(key) not in _FIELD_TYPES:
                raise ParameterError(f"line {lineno}: unknown parameter {key!r}")
            try:
                values[key] = _FIELD_TYPES[_attr(key)](value)
            except ValueError:
                raise ParameterError(f"line {lineno}: bad value {value!r} for {key}") from None
        return (base or cls()).replace(**values)


def _key(attr: str) -> str:
    return "lambda" if attr == "lam" else attr


def _attr(key: str) -> str:
    return "lam" if key == "lambda" else key


def _to_int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(text)
    return int(value)


_FIELD_TYPES = {f.name: (_to_int if f.name == "max_iter" else float) for f in dataclasses.fields(JedParams)}

PARAM_KEYS = tuple(_key(name) for name in _FIELD_TYPES)


def default_params() -> JedParams:
    return JedParams()


def load_config(path) -> JedParams:
    return JedParams.from_config(Path(path).read_text())
