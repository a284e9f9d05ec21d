# ## @DOC
# ### MRR Comb Switch
# Comb-switch channel spacing, FSR, ring radius, pair count and insertion loss.


"""
Comb switch (CS) design for the reconfigurable VDPEs.

A comb switch is an MRR whose FSR equals x channel spacings, so it drops
every x-th wavelength of the VDPE at once. Its radius follows from the
required FSR through the ring group index, which is calibrated once
against the reference designs below.
"""

import logging
import math
import sys
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.optimize import curve_fit

sys.path.append(str(Path(__file__).parent))
from MRR_archmodel import DEFAULT_X, Organization  # noqa: E402
from MRR_mapper import reconfig_group_count  # noqa: E402

logger = logging.getLogger(__name__)

CENTER_WAVELENGTH_NM = 1550.0


@dataclass(frozen=True)
class ReferenceDesign:
    organization: Organization
    bit_rate: int
    n: int
    cs_fsr: float  # nm
    radius: float  # um
    pairs: int
    insertion_loss: float  # dB


# Foundry-tool designs for x = 9; the 5 Gbps RAMM VDPE is too small to reconfigure.
REFERENCE_DESIGNS = (
    ReferenceDesign(Organization.RAMM, 1, 31, 4.83, 18.17, 3, 0.029),
    ReferenceDesign(Organization.RAMM, 3, 20, 5.0, 17.5, 2, 0.028),
    ReferenceDesign(Organization.RAMM, 5, 16, math.nan, math.nan, 0, 0.0),
    ReferenceDesign(Organization.RMAM, 1, 43, 4.65, 18.98, 4, 0.029),
    ReferenceDesign(Organization.RMAM, 3, 28, 5.35, 16.2, 3, 0.026),
    ReferenceDesign(Organization.RMAM, 5, 22, 4.54, 19.49, 2, 0.031),
)


def populated_designs():
    return [d for d in REFERENCE_DESIGNS if d.pairs > 0]


def reference_design(org, bit_rate):
    org = Organization.parse(org)
    for design_row in REFERENCE_DESIGNS:
        if design_row.organization is org and design_row.bit_rate == bit_rate:
            return design_row
    return None


MEAN_INSERTION_LOSS = round(
    float(np.mean([d.insertion_loss for d in populated_designs()])), 3
)


@dataclass(frozen=True)
class CombSwitchDesign:
    organization: Organization
    bit_rate: int
    n: int
    x: int
    modulator_fsr: float  # nm
    delta: float  # nm
    cs_fsr: float  # nm, None without pairs
    radius: float  # um, None without pairs
    pairs: int
    insertion_loss: float  # dB
    loss_provenance: str  # "table", "mean" or "none"
    fsr_provenance: str  # "input", "table" or "mean"

    def to_dict(self):
        data = asdict(self)
        data["organization"] = self.organization.value
        return data


def channel_spacing(modulator_fsr, n):
    return modulator_fsr / (n + 1)


def cs_fsr(delta, n, x):
    return n * delta / x


def implied_modulator_fsr(cs_fsr_nm, n, x=DEFAULT_X):
    """Modulator FSR that makes a CS of `cs_fsr_nm` drop every x-th of n channels."""
    return cs_fsr_nm * x / n * (n + 1)


def radius_from_fsr(cs_fsr_nm, center_wavelength=CENTER_WAVELENGTH_NM, group_index=None):
    if group_index is None:
        group_index = calibrated_group_index()
    return center_wavelength**2 / (2.0 * math.pi * group_index * cs_fsr_nm) / 1000.0


def fit_group_index(designs, center_wavelength=CENTER_WAVELENGTH_NM):
    """Least-squares group index over (cs_fsr, radius) pairs."""
    fsr = np.array([d.cs_fsr for d in designs], dtype=float)
    radius = np.array([d.radius for d in designs], dtype=float)

    def model(x, group_index):
        return center_wavelength**2 / (2.0 * np.pi * group_index * x) / 1000.0

    (group_index,), _ = curve_fit(model, fsr, radius, p0=[4.0])
    return float(group_index)


@lru_cache(maxsize=None)
def calibrated_group_index(center_wavelength=CENTER_WAVELENGTH_NM):
    group_index = fit_group_index(populated_designs(), center_wavelength)
    logger.debug("calibrated CS group index %.4f at %.1f nm", group_index, center_wavelength)
    return group_index


def mean_modulator_fsr(x=DEFAULT_X):
    return float(
        np.mean([implied_modulator_fsr(d.cs_fsr, d.n, x) for d in populated_designs()])
    )


def insertion_loss_for(org, bit_rate, pairs):
    """CS insertion loss in dB and where it came from."""
    if pairs <= 0:
        return 0.0, "none"
    row = reference_design(org, bit_rate)
    if row is not None and row.pairs > 0:
        return row.insertion_loss, "table"
    _warn_mean_loss(Organization.parse(org).value, bit_rate)
    return MEAN_INSERTION_LOSS, "mean"


@lru_cache(maxsize=None)
def _warn_mean_loss(org, bit_rate):
    # once per organization and bit rate
    logger.warning(
        "no reference comb switch for %s at %s Gbps; using mean loss %.3f dB",
        org,
        bit_rate,
        MEAN_INSERTION_LOSS,
    )


def design(
    n,
    x,
    arch,
    bit_rate,
    *,
    modulator_fsr=None,
    center_wavelength=CENTER_WAVELENGTH_NM,
    group_index=None,
):
    org = Organization.parse(arch)
    pairs = reconfig_group_count(n, x) if org.reconfigurable else 0

    if modulator_fsr is not None:
        fsr_provenance = "input"
    else:
        row = reference_design(org, bit_rate)
        if row is not None and row.pairs > 0 and x == DEFAULT_X:
            modulator_fsr = implied_modulator_fsr(row.cs_fsr, row.n, x)
            fsr_provenance = "table"
        else:
            modulator_fsr = mean_modulator_fsr()
            fsr_provenance = "mean"

    delta = channel_spacing(modulator_fsr, n)
    loss, loss_provenance = insertion_loss_for(org, bit_rate, pairs)
    if pairs > 0:
        fsr = cs_fsr(delta, n, x)
        radius = radius_from_fsr(fsr, center_wavelength, group_index)
    else:
        fsr = radius = None

    return CombSwitchDesign(
        organization=org,
        bit_rate=bit_rate,
        n=n,
        x=x,
        modulator_fsr=modulator_fsr,
        delta=delta,
        cs_fsr=fsr,
        radius=radius,
        pairs=pairs,
        insertion_loss=loss,
        loss_provenance=loss_provenance,
        fsr_provenance=fsr_provenance,
    )
