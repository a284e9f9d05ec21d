# ## @DOC
# ### MRR Sim Engine
# Weight-stationary latency, power and area model with area-proportionate comparison across organizations.


"""
Transaction-level performance model of an MRR accelerator.

Layers run one after another with batch size 1. Thermal bias settles once
before the first layer. Inside a layer every pass programs its DKV slices
(EO tuning), streams all DIVs, and drains the converter/reduction pipeline.
DIVs stream no faster than the slowest `div_feed` peripheral allows.

Power is the steady-state sum over the instantiated hardware; area is
counted per VDPE and scaled by the VDPE count, which is what the
area-proportionate comparison resizes.
"""

import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from scipy.stats import gmean

sys.path.append(str(Path(__file__).parent))
from MRR_archmodel import (  # noqa: E402
    TILE_COMPONENTS,
    ArchConfig,
    Organization,
    dbm_to_w,
    default_peripherals,
    validate_config,
)
from MRR_cnnworkload import decompose  # noqa: E402
from MRR_errors import NoWork  # noqa: E402
from MRR_mapper import PassSchedule, schedule_stats  # noqa: E402

logger = logging.getLogger(__name__)

NS = 1e-9
MW = 1e-3
CS_PAIR_MRR_EQUIVALENTS = 6


@dataclass(frozen=True)
class LatencyModel:
    """Stage latencies in seconds."""

    symbol_time: float
    dac_latency: float = 0.0
    adc_conversion: float = 0.0
    pd_latency: float = 0.0
    tia_latency: float = 0.0
    reduction_step: float = 0.0
    eo_tuning: float = 0.0
    to_tuning: float = 0.0
    stage_interval: float = 0.0
    transfer_cycles: int = 0

    @classmethod
    def for_arch(cls, arch, peripherals=None):
        peripherals = peripherals or default_peripherals()
        symbol = NS / arch.bit_rate
        dac = peripherals.component("dac").latency * NS
        feed = [peripherals.component(name).latency * NS for name in peripherals.div_feed]
        return cls(
            symbol_time=symbol,
            dac_latency=dac,
            adc_conversion=symbol,
            pd_latency=peripherals.component("photodetector").latency * NS,
            tia_latency=peripherals.component("tia").latency * NS,
            reduction_step=peripherals.component("reduction_network").latency * NS,
            eo_tuning=peripherals.component("eo_tuning").latency * NS,
            to_tuning=peripherals.component("to_tuning").latency * NS,
            stage_interval=max(feed, default=0.0),
            # bus and router cycles run on the symbol clock
            transfer_cycles=peripherals.component("bus").cycles
            + peripherals.component("router").cycles,
        )

    @property
    def div_interval(self):
        return max(self.symbol_time, self.stage_interval)

    def drain(self, slices_per_row):
        depth = math.ceil(math.log2(slices_per_row)) if slices_per_row > 1 else 0
        return (
            self.dac_latency
            + self.pd_latency
            + self.tia_latency
            + self.adc_conversion
            + self.reduction_step * depth
        )


def _pass_profile(schedule):
    """(DIVs streamed per pass, slices per DKV row) of a schedule or its stats."""
    if isinstance(schedule, PassSchedule):
        return [p.divs_streamed for p in schedule.passes], schedule.plan.count
    return [schedule.divs_streamed] * schedule.passes, schedule.slices_per_row


def layer_latency(schedule, lat):
    divs, slices = _pass_profile(schedule)
    per_pass = lat.eo_tuning + lat.drain(slices)
    streaming = sum(divs) * lat.div_interval
    return lat.transfer_cycles * lat.symbol_time + len(divs) * per_pass + streaming


@dataclass(frozen=True)
class PowerBreakdown:
    """Watts."""

    laser: float = 0.0
    tuning: float = 0.0
    dac: float = 0.0
    adc: float = 0.0
    pd_tia: float = 0.0
    peripherals: float = 0.0

    @property
    def total(self):
        return self.laser + self.tuning + self.dac + self.adc + self.pd_tia + self.peripherals

    def to_dict(self):
        return {**asdict(self), "total": self.total}


def mrr_counts(arch):
    """Instantiated MRRs per VDPE: DKV element, DIV share and comb switches."""
    if arch.organization.family is Organization.AMM:
        div = arch.n
    else:
        div = arch.n / arch.m
    return {"dkv": arch.n, "div": div, "comb_switch": 2 * arch.y}


def power(arch, mean_utilization=1.0, peripherals=None):
    peripherals = peripherals or default_peripherals()
    v = arch.total_vdpes
    n = arch.n

    laser = arch.tpcs * n * dbm_to_w(arch.params.p_laser) / arch.params.wall_plug_eff

    if arch.organization.family is Organization.AMM:
        dacs = 2 * n * v
    else:
        dacs = n * v + n * arch.tpcs
    dac = dacs * peripherals.component("dac").power * MW

    summation_elements = (1 + arch.y) * v
    adc = summation_elements * peripherals.adc_for(arch.bit_rate).power * MW
    pd_tia = summation_elements * (
        2 * peripherals.component("photodetector").power + peripherals.component("tia").power
    ) * MW

    sites = sum(mrr_counts(arch).values()) * v
    eo = (
        peripherals.component("eo_tuning").power
        * peripherals.eo_tuned_fraction
        * n * v * mean_utilization
    )
    to = peripherals.component("to_tuning").power * peripherals.to_bias_fraction * sites
    cs = peripherals.component("comb_switch_driver").power * arch.y * v
    tuning = (eo + to + cs) * MW

    tile_power = sum(peripherals.component(name).power for name in TILE_COMPONENTS)
    tile = arch.tile_count * tile_power * MW

    return PowerBreakdown(
        laser=laser, tuning=tuning, dac=dac, adc=adc, pd_tia=pd_tia, peripherals=tile
    )


@dataclass(frozen=True)
class AreaModel:
    """mm2; `per_vdpe` splits one VDPE's amortised footprint by contributor."""

    mrr_unit_area: float
    cs_pair_area: float
    per_vdpe: dict
    total_vdpes: int

    @property
    def vdpe_area(self):
        return sum(self.per_vdpe.values())

    @property
    def total(self):
        return self.total_vdpes * self.vdpe_area

    def to_dict(self):
        return {
            "mrr_unit_area": self.mrr_unit_area,
            "cs_pair_area": self.cs_pair_area,
            "per_vdpe": dict(self.per_vdpe),
            "vdpe_area": self.vdpe_area,
            "total_vdpes": self.total_vdpes,
            "total": self.total,
        }


def mrr_equivalents(arch):
    """MRR sites of one VDPE with its own DIV element counted, CS pairs as 6 MRRs."""
    dkv = arch.n
    div = arch.n if arch.organization.family is Organization.AMM else 0
    return dkv + div + CS_PAIR_MRR_EQUIVALENTS * arch.y


def area(arch, peripherals=None):
    peripherals = peripherals or default_peripherals()
    params = arch.params
    n, m = arch.n, arch.m
    unit = (params.d_mrr / 1000.0) ** 2
    cs_pair = CS_PAIR_MRR_EQUIVALENTS * unit

    if arch.organization.family is Organization.AMM:
        # thermal isolation strip beside the dedicated DIV element
        div_element = (params.d_element / 1000.0) * (params.d_mrr / 1000.0)
    else:
        div_element = n * unit / m

    per_vdpe = {
        "mrr_sites": mrr_equivalents(arch) * unit,
        "dkv_tuning": n * peripherals.component("eo_tuning").area,
        "summation": 2 * peripherals.component("photodetector").area
        + peripherals.component("tia").area,
        "adc": peripherals.adc_for(arch.bit_rate).area,
        "comb_switches": arch.y * peripherals.component("comb_switch_driver").area,
        "div_dac": n * peripherals.component("dac").area / m,
        "div_element": div_element,
        "tile_peripherals": peripherals.tile_area() / (arch.tpcs_per_tile * m),
    }
    return AreaModel(unit, cs_pair, per_vdpe, arch.total_vdpes)


def area_proportionate_counts(reference, candidates, peripherals=None):
    """Largest VDPE count per candidate that fits in the reference's area."""
    budget = area(reference, peripherals).total
    counts = []
    for candidate in candidates:
        per_vdpe = area(candidate, peripherals).vdpe_area
        count = int(budget // per_vdpe)
        while (count + 1) * per_vdpe <= budget:
            count += 1
        while count > 0 and count * per_vdpe > budget:
            count -= 1
        logger.debug("%s fits %d VDPEs in %.3f mm2", candidate.label, count, budget)
        counts.append(count)
    return counts


@dataclass(frozen=True)
class LayerResult:
    name: str
    kind: str
    case: str
    mode: str
    passes: int
    latency: float
    utilization: float


@dataclass(frozen=True)
class SimReport:
    workload: str
    arch: dict
    total_latency: float
    fps: float
    power_breakdown: PowerBreakdown
    total_power: float
    fps_per_watt: float
    mean_utilization: float
    total_area: float
    pass_count: int
    layers: tuple = field(default_factory=tuple)

    def to_dict(self, include_layers=True):
        data = {
            "workload": self.workload,
            "arch": self.arch,
            "total_latency": self.total_latency,
            "fps": self.fps,
            "power_breakdown": self.power_breakdown.to_dict(),
            "total_power": self.total_power,
            "fps_per_watt": self.fps_per_watt,
            "mean_utilization": self.mean_utilization,
            "total_area": self.total_area,
            "pass_count": self.pass_count,
        }
        if include_layers:
            data["layers"] = [asdict(layer) for layer in self.layers]
        return data


def simulate(workload, arch, peripherals=None):
    if len(workload) == 0:
        raise NoWork(f"workload {workload.name!r} has no layers", workload=workload.name)
    peripherals = peripherals or default_peripherals()
    lat = LatencyModel.for_arch(arch, peripherals)

    results = []
    util_sum = util_weight = 0.0
    for layer in workload:
        stats = schedule_stats(decompose(layer), arch)
        latency = layer_latency(stats, lat)
        if not results:
            latency += lat.to_tuning
        weight = stats.divs_streamed * stats.passes
        util_sum += stats.mean_utilization * weight
        util_weight += weight
        results.append(
            LayerResult(
                name=layer.name,
                kind=layer.kind.value,
                case=stats.case.value,
                mode=stats.mode.value,
                passes=stats.passes,
                latency=latency,
                utilization=stats.mean_utilization,
            )
        )

    total_latency = sum(r.latency for r in results)
    mean_utilization = util_sum / util_weight
    breakdown = power(arch, mean_utilization, peripherals)
    fps = 1.0 / total_latency
    logger.info(
        "%s on %s: %.1f FPS, %.2f W", workload.name, arch.label, fps, breakdown.total
    )
    return SimReport(
        workload=workload.name,
        arch=arch.to_dict(),
        total_latency=total_latency,
        fps=fps,
        power_breakdown=breakdown,
        total_power=breakdown.total,
        fps_per_watt=fps / breakdown.total,
        mean_utilization=mean_utilization,
        total_area=area(arch, peripherals).total,
        pass_count=sum(r.passes for r in results),
        layers=tuple(results),
    )


def parse_label(label):
    """'RMAM@1' -> ('RMAM', 1)."""
    name, _, rate = str(label).partition("@")
    return name.strip().upper(), int(rate) if rate else None


@dataclass
class CompareResult:
    baseline: str
    counts: dict  # label -> VDPE count
    rows: list
    ratios: list


def build_compare_archs(
    orgs, bit_rates, reference_org, reference_count, precision, n_overrides=None
):
    """Area-proportionate arch per (org, bit rate), keyed by 'ORG@BR'."""
    n_overrides = n_overrides or {}
    archs = {}
    for bit_rate in bit_rates:
        ref_label = f"{Organization.parse(reference_org).value}@{bit_rate}"
        reference = validate_config(
            ArchConfig(
                reference_org, bit_rate, precision,
                n=n_overrides.get(ref_label, "auto"),
                total_vdpes=reference_count,
            )
        )
        for org in orgs:
            label = f"{Organization.parse(org).value}@{bit_rate}"
            candidate = validate_config(
                ArchConfig(org, bit_rate, precision, n=n_overrides.get(label, "auto"))
            )
            if label == ref_label and candidate.n == reference.n:
                archs[label] = reference
                continue
            (count,) = area_proportionate_counts(reference, [candidate])
            archs[label] = candidate.with_total_vdpes(count)
    return archs


def compare(
    workloads,
    orgs,
    bit_rates,
    reference_org="RMAM",
    reference_count=512,
    precision=4,
    *,
    baseline="RMAM@1",
    n_overrides=None,
    published=None,
    external_baselines=None,
    peripherals=None,
    jobs=1,
):
    archs = build_compare_archs(
        orgs, bit_rates, reference_org, reference_count, precision, n_overrides
    )
    if baseline not in archs:
        raise NoWork(f"baseline {baseline} is not part of the comparison", baseline=baseline)

    pairs = [(w, label) for w in workloads for label in archs]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
        reports = list(
            executor.map(lambda p: simulate(p[0], archs[p[1]], peripherals), pairs)
        )
    by_key = {(w.name, label): r for (w, label), r in zip(pairs, reports)}

    rows = []
    for w in workloads:
        base = by_key[(w.name, baseline)]
        for label, arch in archs.items():
            r = by_key[(w.name, label)]
            rows.append(
                {
                    "workload": w.name,
                    "label": label,
                    "organization": arch.organization.value,
                    "bit_rate_gbps": arch.bit_rate,
                    "n": arch.n,
                    "y": arch.y,
                    "total_vdpes": arch.total_vdpes,
                    "fps": r.fps,
                    "fps_per_watt": r.fps_per_watt,
                    "total_power": r.total_power,
                    "total_area": r.total_area,
                    "mean_utilization": r.mean_utilization,
                    "norm_fps": r.fps / base.fps,
                    "norm_fps_per_watt": r.fps_per_watt / base.fps_per_watt,
                    "external": False,
                }
            )

    for name, divisors in (external_baselines or {}).items():
        for w in workloads:
            base = by_key[(w.name, baseline)]
            for rate, divisor in sorted(divisors.items(), key=lambda kv: int(kv[0])):
                rows.append(
                    {
                        "workload": w.name,
                        "label": f"{name}@{int(rate)}",
                        "organization": name,
                        "bit_rate_gbps": int(rate),
                        "n": None,
                        "y": None,
                        "total_vdpes": None,
                        "fps": base.fps / divisor,
                        "fps_per_watt": None,
                        "total_power": None,
                        "total_area": None,
                        "mean_utilization": None,
                        "norm_fps": 1.0 / divisor,
                        "norm_fps_per_watt": None,
                        "external": True,
                    }
                )

    rows.extend(gmean_rows(rows))
    ratios = achieved_ratios(rows, published or {})
    return CompareResult(
        baseline=baseline,
        counts={label: arch.total_vdpes for label, arch in archs.items()},
        rows=rows,
        ratios=ratios,
    )


def gmean_rows(rows):
    """Geometric mean across workloads per label."""
    labels = []
    for row in rows:
        if row["label"] not in labels:
            labels.append(row["label"])
    aggregated = []
    for label in labels:
        group = [r for r in rows if r["label"] == label]
        first = group[0]
        row = {key: first[key] for key in ("label", "organization", "bit_rate_gbps", "n", "y", "total_vdpes", "external")}
        row["workload"] = "gmean"
        for key in ("fps", "fps_per_watt", "norm_fps", "norm_fps_per_watt", "mean_utilization"):
            values = [r[key] for r in group]
            row[key] = None if any(v is None for v in values) else float(gmean(values))
        for key in ("total_power", "total_area"):
            row[key] = first[key]
        aggregated.append(row)
    return aggregated


def achieved_ratios(rows, published):
    """FPS ratio 'A@x/B@y' on the gmean rows, next to the published figure."""
    fps = {r["label"]: r["fps"] for r in rows if r["workload"] == "gmean"}
    ratios = []
    for key, expected in published.items():
        numerator, _, denominator = key.partition("/")
        achieved = None
        if numerator in fps and denominator in fps:
            achieved = fps[numerator] / fps[denominator]
        ratios.append({"ratio": key, "achieved": achieved, "published": float(expected)})
    return ratios
