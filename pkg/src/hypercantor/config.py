"""Run configuration: strict JSON schema, canonical form, provenance hash."""
import hashlib
import json
from dataclasses import dataclass, field, fields

from . import __version__
from .errors import ConfigError
from .system import FAMILIES, make_builtin

CONFIG_VERSION = 1
SYSTEM_KEYS = {"family", "params", "base", "phi0", "phi1"}


def _check_system(spec, where="system"):
    if not isinstance(spec, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(spec) - SYSTEM_KEYS
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    if spec.get("family") not in FAMILIES:
        raise ConfigError(f"{where}.family must be one of {list(FAMILIES)}")
    params = spec.get("params", [])
    if not isinstance(params, list) or not all(isinstance(p, (int, float)) for p in params):
        raise ConfigError(f"{where}.params must be a list of numbers")
    for key in ("phi0", "phi1"):
        if key in spec and not isinstance(spec[key], list):
            raise ConfigError(f"{where}.{key} must be a list of coefficients")
    if "base" in spec:
        _check_system(spec["base"], where + ".base")
    out = {"family": spec["family"], "params": [float(p) for p in params]}
    for key in ("phi0", "phi1"):
        if key in spec:
            out[key] = [str(c) for c in spec[key]]
    if "base" in spec:
        out["base"] = _check_system(spec["base"], where + ".base")
    return out


_TYPES = {
    "precision_bits": int, "depth_cap": int, "seed": int, "depth": int, "est_depth": int,
    "table_depth": int, "grid": int, "steps": int, "n_max": int, "tol": float,
    "dual": str, "prefix": str, "functional": str, "out": str,
}


@dataclass
class RunConfig:
    system: dict = field(default_factory=lambda: {"family": "middle-third", "params": []})
    system_b: dict = None
    precision_bits: int = 128
    depth_cap: int = 26
    seed: int = 0
    depth: int = None
    est_depth: int = None
    table_depth: int = None
    grid: int = None
    steps: int = None
    n_max: int = None
    tol: float = None
    dual: str = None
    prefix: str = None
    functional: str = None
    out: str = None
    version: int = CONFIG_VERSION

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if data.get("version", CONFIG_VERSION) != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {data.get('version')!r}")
        kw = {}
        for key, value in data.items():
            if key in ("system", "system_b"):
                kw[key] = None if value is None else _check_system(value, key)
            elif key == "version":
                kw[key] = value
            elif value is not None:
                want = _TYPES[key]
                if want is float and isinstance(value, int) and not isinstance(value, bool):
                    value = float(value)
                if not isinstance(value, want) or isinstance(value, bool):
                    raise ConfigError(f"{key} must be {want.__name__}")
                kw[key] = value
        cfg = cls(**kw)
        cfg.check()
        return cfg

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def check(self):
        self.system = _check_system(self.system)
        if self.system_b is not None:
            self.system_b = _check_system(self.system_b, "system_b")
        if not 53 <= self.precision_bits <= 4096:
            raise ConfigError("precision_bits must be in [53, 4096]")
        for key in ("depth", "est_depth", "table_depth", "steps", "n_max", "grid"):
            v = getattr(self, key)
            if v is not None and v < 0:
                raise ConfigError(f"{key} must be nonnegative")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("tol must be positive")
        for key in ("dual", "prefix"):
            v = getattr(self, key)
            if v is not None and set(v.lstrip("…").lstrip(".")) - {"0", "1"}:
                raise ConfigError(f"{key} must be a binary string")

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    def provenance_hash(self, command=""):
        """sha256 of the canonical config and command; the output path is excluded."""
        body = {k: v for k, v in self.to_dict().items() if k != "out"}
        text = json.dumps({"command": command, "config": body}, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def provenance(self, command=""):
        return {"library": "hypercantor", "version": __version__,
                "config_hash": self.provenance_hash(command), "command": command}

    def build(self, which="system"):
        spec = getattr(self, which)
        if spec is None:
            raise ConfigError(f"{which} is not configured")
        return build_system(spec, self.precision_bits, self.depth_cap)


def build_system(spec, precision_bits=128, depth_cap=26):
    base = spec.get("base")
    return make_builtin(spec["family"], tuple(spec.get("params", ())), precision_bits=precision_bits,
                        depth_cap=depth_cap,
                        base=None if base is None else build_system(base, precision_bits, depth_cap),
                        phi0=spec.get("phi0"), phi1=spec.get("phi1"))
