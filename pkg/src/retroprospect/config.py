"""Flat ``key = value`` run configurations.

One setting per line, ``#`` starts a comment, no sections or nesting.
Parameters of the named dynamics and tube use dotted keys, e.g.::

    dynamics = decay
    dynamics.rate = 1.0
    tube = box
    tube.lower = 0
    tube.upper = 1
    x0 = 1.0
    h = 0.01
    steps = 100
"""

import configparser
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

__all__ = ["REQUIRED", "RunConfig", "parse_config", "load_config"]

_SECTION = "run"

# sentinel default for keys that must be present
REQUIRED = object()


@dataclass
class RunConfig:
    values: dict
    source: str = "<string>"

    def __contains__(self, key):
        return key in self.values

    def _raw(self, key, default):
        if key in self.values:
            return self.values[key]
        if default is REQUIRED:
            raise ValidationError(f"{self.source}: missing required key {key!r}")
        return default

    def get_str(self, key, default=None):
        return self._raw(key, default)

    def get_float(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None or isinstance(raw, float):
            return raw
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ValidationError(f"{self.source}: {key} = {raw!r} is not a number") from None
        if not math.isfinite(value):
            raise ValidationError(f"{self.source}: {key} must be finite")
        return value

    def get_int(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None or isinstance(raw, int):
            return raw
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise ValidationError(f"{self.source}: {key} = {raw!r} is not an integer") from None

    def get_bool(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None or isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ValidationError(f"{self.source}: {key} = {raw!r} is not a boolean")

    def get_vector(self, key, default=None, dim=None):
        """Comma-separated floats; a single value is broadcast to ``dim``."""
        raw = self._raw(key, default)
        if raw is None:
            return None
        if isinstance(raw, str):
            try:
                values = [float(part) for part in raw.split(",")]
            except ValueError:
                raise ValidationError(f"{self.source}: {key} = {raw!r} is not a vector") from None
        else:
            values = list(np.atleast_1d(np.asarray(raw, dtype=np.float64)))
        vec = np.array(values, dtype=np.float64)
        if not np.all(np.isfinite(vec)):
            raise ValidationError(f"{self.source}: {key} must be finite")
        if dim is not None:
            if vec.size == 1:
                vec = np.full(dim, vec[0])
            elif vec.size != dim:
                raise ValidationError(f"{self.source}: {key} has {vec.size} entries, expected {dim}")
        return vec

    def prefixed(self, prefix):
        """View of the keys under ``prefix.``, with the prefix stripped."""
        sub = {k[len(prefix) + 1:]: v for k, v in self.values.items()
               if k.startswith(prefix + ".")}
        return RunConfig(sub, f"{self.source} [{prefix}]")


def parse_config(text, source="<string>"):
    parser = configparser.ConfigParser(
        delimiters=("=",),
        comment_prefixes=("#",),
        inline_comment_prefixes=("#",),
        interpolation=None,
        strict=True,
    )
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n{text}", source=source)
    except configparser.Error as exc:
        raise ValidationError(f"{source}: malformed configuration: {exc}") from None
    if parser.sections() != [_SECTION]:
        raise ValidationError(f"{source}: sections are not supported")
    values = {k.strip(): v.strip() for k, v in parser.items(_SECTION)}
    return RunConfig(values, source)


def load_config(path):
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))
