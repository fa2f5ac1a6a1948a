"""Limiting dimensionless constants, admissibility, and regime selection.

The model carries a fixed set of limit constants for the saturated
rigid-skeleton medium.  Depending on which of the viscosity limit mu1
and the time-scale limit tau0 vanish, the macroscopic seepage law takes
one of three forms; ``classify`` picks the variant.
"""

import enum
import math
from dataclasses import dataclass


class Regime(enum.Enum):
    """The three mutually exclusive seepage-law variants."""

    MEMORY_DARCY = "MemoryDarcy"      # tau0 > 0 and mu1 > 0: convolution kernel
    STEADY_DARCY = "SteadyDarcy"      # tau0 = 0: instantaneous Darcy law
    INVISCID_DARCY = "InviscidDarcy"  # mu1 = 0: inertial (potential-flow) law


@dataclass(frozen=True)
class LimitParameters:
    """Limit values of the dimensionless material constants.

    ``mu1`` is the limit of (viscosity)/eps^2, ``tau0`` the time-scale
    factor multiplying inertia and heat capacity, ``pstar`` the fluid
    compressibility modulus, ``nu0`` the bulk-viscosity factor in the
    state equation, ``beta0f``/``beta0s`` the thermal expansion factors,
    ``kappa0f``/``kappa0s`` the phase conductivities.  ``beta0s`` and
    ``rho_s`` are carried for completeness; the homogenized equations do
    not contain them.
    """

    mu1: float = 1.0
    tau0: float = 0.0
    pstar: float = 1.0
    nu0: float = 0.0
    beta0f: float = 0.0
    beta0s: float = 0.0
    kappa0f: float = 1.0
    kappa0s: float = 1.0
    rho_f: float = 1.0
    rho_s: float = 1.0
    c_pf: float = 1.0
    c_ps: float = 1.0


def validate(p):
    """Return the list of violated admissibility constraints (empty = ok)."""
    v = []

    def positive_finite(name, val):
        if not (val > 0.0) or not math.isfinite(val):
            v.append(f"{name} must be positive and finite, got {val}")

    def nonnegative(name, val):
        if not (val >= 0.0) or not math.isfinite(val):
            v.append(f"{name} must be nonnegative and finite, got {val}")

    nonnegative("mu1", p.mu1)
    nonnegative("tau0", p.tau0)
    if not (p.mu1 + p.tau0 > 0.0):
        v.append("mu1 + tau0 > 0 is required (at least one seepage mechanism)")
    positive_finite("pstar", p.pstar)
    nonnegative("nu0", p.nu0)
    nonnegative("beta0f", p.beta0f)
    nonnegative("beta0s", p.beta0s)
    positive_finite("kappa0f", p.kappa0f)
    positive_finite("kappa0s", p.kappa0s)
    positive_finite("rho_f", p.rho_f)
    positive_finite("rho_s", p.rho_s)
    positive_finite("c_pf", p.c_pf)
    positive_finite("c_ps", p.c_ps)
    return v


def require_admissible(p):
    violations = validate(p)
    if violations:
        from .errors import ConfigError
        raise ConfigError("inadmissible parameters: " + "; ".join(violations))
    return p


def classify(p):
    """Pick the seepage regime; parameters must be admissible."""
    require_admissible(p)
    if p.tau0 > 0.0 and p.mu1 > 0.0:
        return Regime.MEMORY_DARCY
    if p.tau0 == 0.0:
        return Regime.STEADY_DARCY
    return Regime.INVISCID_DARCY


def effective_capacity(p, m):
    """Porosity-weighted heat capacity m*c_pf + (1-m)*c_ps."""
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"porosity must lie in [0,1], got {m}")
    return m * p.c_pf + (1.0 - m) * p.c_ps


@dataclass(frozen=True)
class DnsParameters:
    """Finite-scale coefficients used by the fine-grid oracles.

    At scale separation eps the fine problem runs with viscosity
    ``alpha_mu = mu1 * eps**2`` while the conductivities and the time
    factor stay at their limit values.
    """

    eps: float
    mu1: float = 1.0
    kappa0f: float = 1.0
    kappa0s: float = 1.0
    tau0: float = 0.0

    @property
    def alpha_mu(self):
        return self.mu1 * self.eps ** 2

    @property
    def alpha_kappa_f(self):
        return self.kappa0f

    @property
    def alpha_kappa_s(self):
        return self.kappa0s

    @property
    def alpha_tau(self):
        return self.tau0


# ---------------------------------------------------------------------------
# flat key = value configs

_BOOL_WORDS = {"true": True, "false": False, "yes": True, "no": False,
               "on": True, "off": False}


def parse_config_text(text, path="<config>"):
    """Parse flat "key = value" lines into an ordered dict of strings.

    Blank lines and #-comments are skipped; duplicate keys are errors so
    a typo cannot silently override physics.
    """
    from .errors import ConfigError

    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def coerce(value, kind, key="value"):
    from .errors import ConfigError

    try:
        if kind is bool:
            low = value.lower()
            if low not in _BOOL_WORDS:
                raise ValueError(value)
            return _BOOL_WORDS[low]
        return kind(value)
    except ValueError:
        raise ConfigError(f"cannot read {key} = {value!r} as {kind.__name__}")


_PARAM_KEYS = {
    "mu1": float, "tau0": float, "pstar": float, "nu0": float,
    "beta0f": float, "beta0s": float, "kappa0f": float, "kappa0s": float,
    "rho_f": float, "rho_s": float, "c_pf": float, "c_ps": float,
}


def limit_parameters_from_config(entries, prefix="params."):
    """Build LimitParameters from config entries with the given key prefix.

    Consumes (removes) the keys it recognizes; the caller rejects
    whatever remains unknown.
    """
    kwargs = {}
    for name, kind in _PARAM_KEYS.items():
        key = prefix + name
        if key in entries:
            kwargs[name] = coerce(entries.pop(key), kind, key)
    return LimitParameters(**kwargs)
