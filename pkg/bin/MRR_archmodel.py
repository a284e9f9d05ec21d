# ## @DOC
# ### MRR Arch Model
# Typed accelerator organizations, device parameters, peripherals and config validation.


"""
Architecture model of MRR-based tensor product cores (TPCs).

Holds the four TPC organizations (AMM, MAM and their reconfigurable
counterparts RAMM, RMAM), the photonic link constants, the peripheral
records and the arch config that ties them together. `validate_config`
is the single gate every analysis goes through: it fills defaults,
checks dimensions and enums, and rejects VDPE sizes the link budget
cannot support.

All internal arithmetic is in linear units (W, ratios); dB and dBm are
converted once, here, with `db_to_ratio` and `dbm_to_w`.
"""

import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from functools import lru_cache
from pathlib import Path

from scipy import constants

sys.path.append(str(Path(__file__).parent))
from MRR_config_utils import load_document, load_preset  # noqa: E402
from MRR_errors import (  # noqa: E402
    ConfigError,
    InvalidConfig,
    InvalidEnum,
    InvalidN,
    InvalidParameter,
    MissingPeripheral,
    NonPositiveDimension,
)

logger = logging.getLogger(__name__)

SUPPORTED_BIT_RATES = (1, 3, 5, 10)
PRECISION_RANGE = range(1, 9)
DEFAULT_X = 9


def db_to_ratio(db):
    return 10.0 ** (db / 10.0)


def dbm_to_w(dbm):
    return 1e-3 * db_to_ratio(dbm)


def w_to_dbm(watts):
    return 10.0 * math.log10(watts / 1e-3)


class Organization(str, Enum):
    AMM = "AMM"
    MAM = "MAM"
    RAMM = "RAMM"
    RMAM = "RMAM"

    @property
    def reconfigurable(self):
        return self in (Organization.RAMM, Organization.RMAM)

    @property
    def family(self):
        """The fixed organization this one is built on."""
        if self in (Organization.AMM, Organization.RAMM):
            return Organization.AMM
        return Organization.MAM

    @property
    def traversals(self):
        # AMM buses cross a DIV element and a DKV element in series.
        return 2 if self.family is Organization.AMM else 1

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            choices = ", ".join(o.value for o in cls)
            raise InvalidEnum(
                f"unknown organization {value!r} (expected one of {choices})",
                field="organization",
                value=value,
            ) from None


@dataclass(frozen=True)
class PhotonicParams:
    """Link constants. Losses in dB, lengths in um, currents in A."""

    p_laser: float = 10.0  # dBm per laser diode
    responsivity: float = 1.2  # A/W
    load_resistance: float = 50.0  # ohm
    dark_current: float = 35e-9  # A
    temperature: float = 300.0  # K
    rin: float = -140.0  # dB/Hz
    wall_plug_eff: float = 0.1
    il_smf: float = 0.0
    il_ec: float = 1.6
    il_wg: float = 0.3  # dB/mm
    el_splitter: float = 0.01
    il_mrm: float = 4.0
    obl_mrm: float = 0.01
    il_mrr: float = 0.01
    obl_mrr: float = 0.01
    il_penalty: float = 4.8
    d_mrr: float = 20.0  # um
    d_element: float = 0.0  # um
    mrr_radius: float = 5.0  # um
    link_margin: float = 2.8  # dB
    electron_charge: float = constants.e  # C
    boltzmann: float = constants.k  # J/K

    @property
    def rin_linear(self):
        return db_to_ratio(self.rin)

    @property
    def mrr_pitch_mm(self):
        """Waveguide length one MRR occupies along the bus."""
        return (self.d_mrr + 2.0 * self.mrr_radius) / 1000.0

    def violations(self):
        found = []
        for name in (
            "il_smf", "il_ec", "il_wg", "el_splitter", "il_mrm", "obl_mrm",
            "il_mrr", "obl_mrr", "il_penalty", "link_margin",
        ):
            if getattr(self, name) < 0:
                found.append(
                    InvalidParameter(f"{name} must be >= 0 dB", field=name)
                )
        if not 0 < self.wall_plug_eff <= 1:
            found.append(
                InvalidParameter("wall_plug_eff must be in (0, 1]", field="wall_plug_eff")
            )
        for name in (
            "responsivity", "load_resistance", "temperature",
            "electron_charge", "boltzmann",
        ):
            if getattr(self, name) <= 0:
                found.append(InvalidParameter(f"{name} must be > 0", field=name))
        for name in ("dark_current", "d_mrr", "d_element", "mrr_radius"):
            if getattr(self, name) < 0:
                found.append(InvalidParameter(f"{name} must be >= 0", field=name))
        return found

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data, base=None):
        """Whole-field overrides on top of `base` (device defaults otherwise)."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(
                f"unknown photonic parameter(s): {', '.join(unknown)}", keys=unknown
            )
        return replace(base or cls(), **{k: float(v) for k, v in data.items()})


FAMILY_DEFAULTS = {
    Organization.MAM: {"il_penalty": 4.8, "d_element": 0.0},
    Organization.AMM: {"il_penalty": 5.8, "d_element": 100.0},
}


def default_params(org):
    """Device defaults with the family-dependent penalty and isolation gap."""
    org = Organization.parse(org)
    return PhotonicParams(**FAMILY_DEFAULTS[org.family])


def load_params(path, org):
    """Read a `--params` file; a `[photonic]` table and per-family sub-tables are honoured."""
    org = Organization.parse(org)
    doc = load_document(path)
    section = dict(doc.get("photonic", doc))
    family_section = section.pop(org.family.value, {})
    for other in Organization:
        section.pop(other.value, None)
    params = PhotonicParams.from_dict(section, default_params(org))
    return PhotonicParams.from_dict(family_section, params)


@dataclass(frozen=True)
class Component:
    """Power in mW, area in mm2, latency in ns (or clock cycles)."""

    power: float = 0.0
    area: float = 0.0
    latency: float = 0.0
    cycles: int = 0

    @classmethod
    def from_dict(cls, name, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(
                f"unknown key(s) {', '.join(unknown)} in peripheral {name!r}",
                component=name,
            )
        return cls(**data)


TILE_COMPONENTS = ("reduction_network", "activation", "io", "pooling", "edram", "bus", "router")


@dataclass(frozen=True, eq=True)
class PeripheralParams:
    components: dict = field(default_factory=dict)
    adc: dict = field(default_factory=dict)
    eo_tuned_fraction: float = 0.5
    to_bias_fraction: float = 0.1
    vdp_element: dict = field(default_factory=dict)
    div_feed: tuple = ("dac", "edram")  # stages that pace the DIV stream

    def component(self, name):
        try:
            return self.components[name]
        except KeyError:
            raise MissingPeripheral(f"no peripheral record for {name!r}", component=name) from None

    def adc_for(self, bit_rate):
        try:
            return self.adc[int(bit_rate)]
        except KeyError:
            raise MissingPeripheral(
                f"no ADC record for {bit_rate} Gbps", component="adc", bit_rate=bit_rate
            ) from None

    def tile_area(self):
        return sum(self.component(name).area for name in TILE_COMPONENTS)

    def violations(self):
        found = []
        records = [(n, c) for n, c in self.components.items()]
        records += [(f"adc.{br}", c) for br, c in self.adc.items()]
        for name, record in records:
            for attr in ("power", "area", "latency", "cycles"):
                if getattr(record, attr) < 0:
                    found.append(
                        InvalidParameter(f"{name}.{attr} must be >= 0", field=f"{name}.{attr}")
                    )
        for name in ("eo_tuned_fraction", "to_bias_fraction"):
            if not 0 <= getattr(self, name) <= 1:
                found.append(InvalidParameter(f"{name} must be in [0, 1]", field=name))
        for name in self.div_feed:
            if name not in self.components:
                found.append(
                    InvalidParameter(f"div_feed names unknown component {name!r}", field="div_feed")
                )
        return found

    def to_dict(self):
        return {
            "component": {k: asdict(v) for k, v in sorted(self.components.items())},
            "adc": {str(k): asdict(v) for k, v in sorted(self.adc.items())},
            "eo_tuned_fraction": self.eo_tuned_fraction,
            "to_bias_fraction": self.to_bias_fraction,
            "vdp_element": dict(self.vdp_element),
            "div_feed": list(self.div_feed),
        }

    @classmethod
    def from_dict(cls, data, base=None):
        known = {
            "component", "adc", "eo_tuned_fraction", "to_bias_fraction", "vdp_element", "div_feed",
        }
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown peripheral key(s): {', '.join(unknown)}", keys=unknown)
        base = base or cls()
        components = dict(base.components)
        for name, record in data.get("component", {}).items():
            components[name] = Component.from_dict(name, record)
        adc = dict(base.adc)
        for rate, record in data.get("adc", {}).items():
            adc[int(rate)] = Component.from_dict(f"adc.{rate}", record)
        return cls(
            components=components,
            adc=adc,
            eo_tuned_fraction=float(data.get("eo_tuned_fraction", base.eo_tuned_fraction)),
            to_bias_fraction=float(data.get("to_bias_fraction", base.to_bias_fraction)),
            vdp_element={**base.vdp_element, **data.get("vdp_element", {})},
            div_feed=tuple(data.get("div_feed", base.div_feed)),
        )


@lru_cache(maxsize=1)
def default_peripherals():
    return PeripheralParams.from_dict(load_preset("peripherals"))


def load_peripherals(path):
    peripherals = PeripheralParams.from_dict(load_document(path), default_peripherals())
    violations = peripherals.violations()
    if violations:
        raise InvalidConfig(violations)
    return peripherals


ARCH_KEYS = (
    "organization", "bit_rate_gbps", "precision_bits", "n", "m", "x",
    "tiles", "tpcs_per_tile", "total_vdpes", "params",
)


@dataclass
class ArchConfig:
    """Unvalidated accelerator description, as read from an arch file."""

    organization: object
    bit_rate: int = 1
    precision: int = 4
    n: object = "auto"
    m: object = None  # defaults to n (M = N)
    x: int = DEFAULT_X
    tpcs_per_tile: int = 4
    tiles: int = 1
    total_vdpes: object = None
    params: object = None

    @classmethod
    def from_dict(cls, data):
        unknown = sorted(set(data) - set(ARCH_KEYS))
        if unknown:
            raise ConfigError(f"unknown arch key(s): {', '.join(unknown)}", keys=unknown)
        if "organization" not in data:
            raise ConfigError("arch config needs an 'organization'", field="organization")
        params = data.get("params")
        if params is not None:
            try:
                org = Organization.parse(data["organization"])
                params = PhotonicParams.from_dict(params, default_params(org))
            except InvalidEnum:
                params = PhotonicParams.from_dict(params)
        return cls(
            organization=data["organization"],
            bit_rate=data.get("bit_rate_gbps", 1),
            precision=data.get("precision_bits", 4),
            n=data.get("n", "auto"),
            m=data.get("m"),
            x=data.get("x", DEFAULT_X),
            tpcs_per_tile=data.get("tpcs_per_tile", 4),
            tiles=data.get("tiles", 1),
            total_vdpes=data.get("total_vdpes"),
            params=params,
        )


def load_arch(path):
    return ArchConfig.from_dict(load_document(path))


@dataclass(frozen=True)
class ValidatedArchConfig:
    organization: Organization
    bit_rate: int
    precision: int
    n: int
    m: int
    x: int
    y: int
    tpcs_per_tile: int
    tiles: int
    total_vdpes: int
    max_n: int
    params: PhotonicParams

    @property
    def reconfigurable(self):
        return self.organization.reconfigurable and self.y >= 1

    @property
    def tpcs(self):
        """TPC count; fractional when total_vdpes was resized for area."""
        return self.total_vdpes / self.m

    @property
    def tile_count(self):
        return self.tpcs / self.tpcs_per_tile

    @property
    def label(self):
        return f"{self.organization.value}@{self.bit_rate}"

    def with_total_vdpes(self, total_vdpes):
        return replace(self, total_vdpes=int(total_vdpes))

    def to_dict(self):
        return {
            "organization": self.organization.value,
            "bit_rate_gbps": self.bit_rate,
            "precision_bits": self.precision,
            "n": self.n,
            "m": self.m,
            "x": self.x,
            "tiles": self.tiles,
            "tpcs_per_tile": self.tpcs_per_tile,
            "total_vdpes": self.total_vdpes,
            "params": self.params.to_dict(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _positive_int(value, name, violations, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, int):
        violations.append(
            NonPositiveDimension(f"{name} must be an integer, got {value!r}", field=name)
        )
        return None
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else ">= 1"
        violations.append(NonPositiveDimension(f"{name} must be {bound}", field=name, value=value))
        return None
    return value


def validate_config(cfg):
    """Return an immutable config or raise InvalidConfig listing every violation."""
    from MRR_linkbudget import max_vdpe_size
    from MRR_mapper import reconfig_group_count

    violations = []
    org = None
    try:
        org = Organization.parse(cfg.organization)
    except InvalidEnum as e:
        violations.append(e)

    if cfg.bit_rate not in SUPPORTED_BIT_RATES:
        violations.append(
            InvalidEnum(
                f"bit rate must be one of {SUPPORTED_BIT_RATES} Gbps", field="bit_rate_gbps",
                value=cfg.bit_rate,
            )
        )
    if cfg.precision not in PRECISION_RANGE:
        violations.append(
            InvalidEnum("precision must be 1..8 bits", field="precision_bits", value=cfg.precision)
        )

    n = cfg.n
    if n != "auto":
        n = _positive_int(n, "n", violations)
    x = _positive_int(cfg.x, "x", violations)
    tpcs_per_tile = _positive_int(cfg.tpcs_per_tile, "tpcs_per_tile", violations)
    tiles = _positive_int(cfg.tiles, "tiles", violations, allow_zero=True)
    m = cfg.m
    if m is not None:
        m = _positive_int(m, "m", violations)
    total = cfg.total_vdpes
    if total is not None:
        total = _positive_int(total, "total_vdpes", violations, allow_zero=True)

    params = cfg.params
    if params is None and org is not None:
        params = default_params(org)
    if params is not None:
        violations.extend(params.violations())

    if violations:
        raise InvalidConfig(violations)

    max_n = max_vdpe_size(org, cfg.precision, cfg.bit_rate, params, x=x)
    if n == "auto":
        n = max_n
        logger.debug("auto VDPE size for %s@%s: %d", org.value, cfg.bit_rate, n)
    if n < 1 or n > max_n:
        raise InvalidConfig(
            [
                InvalidN(
                    f"n={n} exceeds the link-budget limit {max_n} for "
                    f"{org.value} at {cfg.precision}-bit, {cfg.bit_rate} Gbps",
                    field="n", value=n, max_n=max_n,
                )
            ]
        )

    m = n if m is None else m
    y = reconfig_group_count(n, x) if org.reconfigurable else 0
    if total is None:
        total = tiles * tpcs_per_tile * m
    return ValidatedArchConfig(
        organization=org,
        bit_rate=int(cfg.bit_rate),
        precision=int(cfg.precision),
        n=n,
        m=m,
        x=x,
        y=y,
        tpcs_per_tile=tpcs_per_tile,
        tiles=tiles,
        total_vdpes=total,
        max_n=max_n,
        params=params,
    )
