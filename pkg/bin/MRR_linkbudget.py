# ## @DOC
# ### MRR Link Budget
# Photodetector sensitivity, laser power and maximum VDPE size per organization, precision and bit rate.


"""
Scalability analysis of MRR-based TPCs.

The achievable VDPE size N is the largest N for which the laser can still
deliver the photodetector sensitivity needed for the requested precision
at the requested bit rate, after every loss the optical signal meets on
its way through the TPC.
"""

import csv
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from scipy.optimize import brentq

sys.path.append(str(Path(__file__).parent))
from MRR_archmodel import (  # noqa: E402
    DEFAULT_X,
    Organization,
    db_to_ratio,
    dbm_to_w,
    default_params,
    w_to_dbm,
)
from MRR_errors import NoConvergence, NonPhysical  # noqa: E402

logger = logging.getLogger(__name__)

P_MIN_W = 1e-12
P_MAX_W = 1.0
MAX_ITER = 200
N_CAP = 4096

CSV_COLUMNS = (
    "organization",
    "precision_bits",
    "bit_rate_gbps",
    "n_max",
    "received_power_dbm",
)


@dataclass(frozen=True)
class SensitivitySolution:
    precision: int
    bit_rate: float  # samples/s
    p_pd_opt: float  # W
    beta: float  # A

    @property
    def received_power_dbm(self):
        return w_to_dbm(self.p_pd_opt)


@dataclass(frozen=True)
class ScalabilityPoint:
    organization: Organization
    precision: int
    bit_rate: int  # Gbps
    n_max: int
    received_power: float  # dBm, None when no sensitivity exists


def noise_beta(p_pd, params):
    """Noise current scale: shot, thermal and laser RIN terms."""
    r = params.responsivity
    shot = 2.0 * params.electron_charge * (r * p_pd + params.dark_current)
    thermal = 4.0 * params.boltzmann * params.temperature / params.load_resistance
    rin = (r * p_pd) ** 2 * params.rin_linear
    return math.sqrt(shot + thermal + rin)


def effective_bits(p_pd, bit_rate, params):
    """Resolution reached with `p_pd` watts on the detector at `bit_rate` samples/s."""
    beta = noise_beta(p_pd, params)
    snr = params.responsivity * p_pd / (beta * math.sqrt(bit_rate / math.sqrt(2.0)))
    return (20.0 * math.log10(snr) - 1.76) / 6.02


def solve_pd_sensitivity(precision, bit_rate, params):
    """Smallest detector power giving `precision` bits at `bit_rate` samples/s."""
    if bit_rate <= 0:
        raise NonPhysical("bit rate must be positive", bit_rate=bit_rate)

    def residual(log_p):
        return effective_bits(math.exp(log_p), bit_rate, params) - precision

    lo, hi = math.log(P_MIN_W), math.log(P_MAX_W)
    if residual(hi) < 0:
        raise NonPhysical(
            f"{precision}-bit resolution is out of reach below {P_MAX_W} W "
            f"at {bit_rate:.3g} samples/s",
            precision=precision,
            bit_rate=bit_rate,
        )
    if residual(lo) >= 0:
        raise NonPhysical(
            f"{precision}-bit resolution is met below {P_MIN_W} W; no positive root in range",
            precision=precision,
            bit_rate=bit_rate,
        )

    root, result = brentq(
        residual, lo, hi, xtol=1e-14, maxiter=MAX_ITER, full_output=True, disp=False
    )
    if not result.converged:
        raise NoConvergence(
            f"sensitivity solver stopped after {result.iterations} iterations: {result.flag}",
            precision=precision,
            bit_rate=bit_rate,
        )
    p_pd = math.exp(root)
    return SensitivitySolution(precision, bit_rate, p_pd, noise_beta(p_pd, params))


def cs_insertion_loss(org, n, bit_rate, x=DEFAULT_X):
    from MRR_combswitch import insertion_loss_for
    from MRR_mapper import reconfig_group_count

    org = Organization.parse(org)
    if not org.reconfigurable or bit_rate is None:
        return 0.0
    pairs = reconfig_group_count(n, x)
    loss, _ = insertion_loss_for(org, bit_rate, pairs)
    # light crosses every pair of the VDPE on its way to the summation element
    return loss * pairs


def loss_db(n, m, org, params, cs_loss=0.0):
    """Total optical loss between a laser diode and its summation element."""
    org = Organization.parse(org)
    passes = org.traversals
    waveguide_mm = passes * n * params.mrr_pitch_mm + params.d_element / 1000.0
    return (
        params.il_wg * waveguide_mm
        + passes * (n - 1) * (params.obl_mrm + params.obl_mrr)
        + params.il_smf
        + params.il_ec
        + params.il_mrm
        + params.il_mrr
        + params.el_splitter * math.log2(m)
        + 10.0 * math.log10(m)
        + params.il_penalty
        + params.link_margin
        + cs_loss
    )


def required_laser_power(n, m, p_pd_opt, org, params, *, bit_rate=None, x=DEFAULT_X):
    """Electrical laser power per wavelength that lands `p_pd_opt` on the detector.

    `bit_rate` (Gbps) enables the comb-switch insertion loss of the
    reconfigurable organizations.
    """
    cs_loss = cs_insertion_loss(org, n, bit_rate, x)
    optical = p_pd_opt * db_to_ratio(loss_db(n, m, org, params, cs_loss))
    return optical / params.wall_plug_eff


def laser_power_budget(params):
    """Electrical draw of one laser diode emitting `p_laser`."""
    return dbm_to_w(params.p_laser) / params.wall_plug_eff


def max_vdpe_size(org, precision, bit_rate, params=None, *, x=DEFAULT_X):
    """Largest N (with M = N) the laser budget supports; 0 when none does."""
    org = Organization.parse(org)
    params = params or default_params(org)
    try:
        solution = solve_pd_sensitivity(precision, bit_rate * 1e9, params)
    except NonPhysical as e:
        logger.warning("%s: %s", org.value, e)
        return 0
    budget = laser_power_budget(params)

    def fits(n):
        return (
            required_laser_power(n, n, solution.p_pd_opt, org, params, bit_rate=bit_rate, x=x)
            <= budget
        )

    if not fits(1):
        return 0
    lo, hi = 1, 2
    while hi <= N_CAP and fits(hi):
        lo, hi = hi, hi * 2
    if hi > N_CAP:
        return N_CAP if fits(N_CAP) else _bisect_fit(fits, lo, N_CAP)
    return _bisect_fit(fits, lo, hi)


def _bisect_fit(fits, lo, hi):
    # fits(lo) holds and fits(hi) does not
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fits(mid):
            lo = mid
        else:
            hi = mid
    return lo


def scalability_sweep(org, precisions, bit_rates, params=None):
    org = Organization.parse(org)
    params = params or default_params(org)
    points = []
    for precision in sorted(precisions):
        for bit_rate in sorted(bit_rates):
            try:
                received = solve_pd_sensitivity(precision, bit_rate * 1e9, params)
                received_dbm = received.received_power_dbm
            except NonPhysical:
                received_dbm = None
            n_max = max_vdpe_size(org, precision, bit_rate, params)
            logger.debug("%s %d-bit %d Gbps -> N=%d", org.value, precision, bit_rate, n_max)
            points.append(ScalabilityPoint(org, precision, bit_rate, n_max, received_dbm))
    return points


def scalability_rows(points):
    for p in points:
        received = "" if p.received_power is None else f"{p.received_power:.4f}"
        yield [p.organization.value, p.precision, p.bit_rate, p.n_max, received]


def write_scalability_csv(points, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(scalability_rows(points))
