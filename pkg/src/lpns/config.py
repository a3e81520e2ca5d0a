"""Run configuration: defaults, flat config file, command-line overrides (in that order)."""
import dataclasses
from dataclasses import dataclass

from .io import ConfigError, read_config_file
from .lpbank import q_max_for
from .spectral import make_grid


def _floats(text):
    if isinstance(text, (int, float)):
        return (float(text),)
    if isinstance(text, (tuple, list)):
        return tuple(float(x) for x in text)
    return tuple(float(x) for x in str(text).replace(",", " ").split())


GRADED_DENSITY = 8  # samples per time-to-go interval under a graded schedule


@dataclass
class RunConfig:
    n: int = 16
    nu: float = 1.0
    t_end: float = 1.0
    dt: float = 2e-3
    cfl: float = 0.0  # > 0 switches to adaptive steps capped by dt
    ic: str = "random"
    seed: int = 0
    amplitude: float = 1.0
    slope: float = -5.0 / 3.0
    k_peak: float = 2.0
    p_min: int = 0
    p_max: int = -1  # -1: q_max - 1
    b: int = 2
    c_bkm: float = 0.0  # 0: 4^b
    m: tuple = (2.0,)
    alpha: float = 1.5
    delta: float = 0.0
    sample_every: int = 2
    graded: bool = False  # stride shrinks towards t_end, capped by sample_every
    snapshot_every: int = 0  # 0: same as sample_every
    out_dir: str = "out"
    strict_cadence: bool = True

    # resolved views ----------------------------------------------------------
    @property
    def q_max(self):
        return q_max_for(self.n)

    @property
    def monitored_p(self):
        hi = self.q_max - 1 if self.p_max < 0 else self.p_max
        return tuple(range(self.p_min, hi + 1))

    @property
    def c_bkm_value(self):
        return float(4**self.b) if self.c_bkm <= 0 else float(self.c_bkm)

    def sample_stride(self, t):
        """Steps until the next sample from time t."""
        if not self.graded:
            return self.sample_every
        k = int((self.t_end - t) / (GRADED_DENSITY * self.dt) + 1e-9)
        return max(1, min(self.sample_every, k))

    @property
    def snapshot_cadence(self):
        return self.sample_every if self.snapshot_every <= 0 else self.snapshot_every

    def validate(self):
        try:
            make_grid(self.n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not self.nu > 0:
            raise ConfigError(f"nu must be positive, got {self.nu}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ConfigError(f"t_end must be non-negative, got {self.t_end}")
        if not 0 <= self.cfl <= 0.5:
            raise ConfigError(f"cfl must lie in [0, 0.5], got {self.cfl}")
        if self.ic not in ("taylor-green", "random"):
            raise ConfigError(f"unknown initial condition {self.ic!r} (taylor-green | random)")
        ps = self.monitored_p
        if not ps or ps[0] < 0 or ps[-1] > self.q_max:
            raise ConfigError(f"monitored bands {ps} must be non-empty and lie in [0, {self.q_max}]")
        if self.b < 1:
            raise ConfigError(f"band offset b must be >= 1, got {self.b}")
        for x in self.m:
            if not 2.0 <= x <= 3.0:
                raise ConfigError(f"Lebesgue exponent m must lie in [2, 3], got {x}")
        if self.sample_every < 1:
            raise ConfigError("sample_every must be >= 1")
        if self.ic == "random" and not 0 < self.k_peak < self.n / 3:
            raise ConfigError(f"k_peak must lie in (0, n/3), got {self.k_peak}")
        # a graded schedule samples every step close to t_end
        cadence = (1 if self.graded else self.sample_every) * self.dt
        limit = 4.0 ** (-ps[-1]) / 8.0
        if self.strict_cadence and cadence > limit * (1 + 1e-12):
            raise ConfigError(
                f"sampling interval {cadence:g} too coarse for p_max={ps[-1]}: need <= {limit:g} "
                "(lower sample_every/dt or p_max)"
            )
        return self

    def items(self):
        """Flat (key, value) pairs for echoing into run_meta."""
        out = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(repr(float(x)) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            out.append((f.name, v))
        return out


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(key, value):
    f = _FIELDS.get(key)
    if f is None:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        if f.type in (int, "int"):
            return int(value)
        if f.type in (float, "float"):
            return float(value)
        if f.type in (bool, "bool"):
            if isinstance(value, bool):
                return value
            s = str(value).strip().lower()
            if s in ("1", "true", "yes", "on"):
                return True
            if s in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if f.type in (tuple, "tuple"):
            vals = _floats(value)
            if not vals:
                raise ValueError(value)
            return vals
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def build_config(file_values=None, flag_values=None, validate=True):
    """Layer defaults < file < flags.  Both mappings may hold strings."""
    cfg = RunConfig()
    for layer in (file_values or {}, flag_values or {}):
        for key, value in layer.items():
            if value is None:
                continue
            key = key.replace("-", "_")
            setattr(cfg, key, _coerce(key, value))
    return cfg.validate() if validate else cfg


def load_config(path=None, flag_values=None, validate=True):
    file_values = read_config_file(path) if path else {}
    return build_config(file_values, flag_values, validate)
