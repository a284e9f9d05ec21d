# ## @DOC
# ### MRR Mapper
# Fixed and reconfigurable VDPE mapping: case selection, slicing, pass scheduling, utilization and functional evaluation.


"""
Mapping of flattened DKV matrices onto VDPEs.

A VDPE of size n either holds one DKV slice of up to n points (Mode 1),
or, when its comb switches are engaged, y independent groups of up to x
points each (Mode 2). The mapping is weight-stationary: once a pass has
programmed its slices, every DIV of the layer streams through before the
next pass starts.

Case 1   S > n          slices of n, Mode 1
ExactFit S = n          one slice, Mode 1
Case 2   x < S < n      slices of x, Mode 2, issued one slice index per load
Case 3   S <= x < n     one slice per group, Mode 2

Without comb switches a short DKV sits whole on one VDPE in Mode 1 and is
reported as Case 3 / Mode 1.

In the MAM family the VDPEs of a TPC share one DIV element. Depthwise
rows each need their own channel's DIVs, so such a TPC hosts one load
per pass (one row in Mode 1, up to y rows on the group bands in Mode 2).
"""

import logging
import math
import sys
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

sys.path.append(str(Path(__file__).parent))
from MRR_archmodel import Organization  # noqa: E402
from MRR_cnnworkload import decompose  # noqa: E402
from MRR_errors import EmptyMatrix, NoWork, ShapeMismatch  # noqa: E402

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    MODE1 = "Mode1"
    MODE2 = "Mode2"


class Case(str, Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"
    EXACT_FIT = "ExactFit"


def reconfig_group_count(n, x):
    """Comb-switch pairs of a VDPE: floor(n/x) once n reaches 2x."""
    return n // x if n >= 2 * x else 0


@dataclass(frozen=True)
class ReconfigurableVdpe:
    n: int
    x: int = 9
    y: int = 0
    mode: Mode = Mode.MODE1
    div_share: int = 1  # VDPEs fed by one DIV element

    @classmethod
    def build(cls, n, x=9, reconfigurable=True):
        return cls(n=n, x=x, y=reconfig_group_count(n, x) if reconfigurable else 0)

    @classmethod
    def for_arch(cls, arch):
        share = arch.m if arch.organization.family is Organization.MAM else 1
        return cls(n=arch.n, x=arch.x, y=arch.y, div_share=share)


@dataclass(frozen=True)
class SlicePlan:
    case: Case
    mode: Mode
    b: int
    c: int
    slice_lengths: tuple

    @property
    def count(self):
        return len(self.slice_lengths)


@dataclass(frozen=True)
class Assignment:
    vdpe_id: int
    group_id: int  # None when the slice uses the whole VDPE
    dkv_row: int
    slice_index: int
    slice_len: int


@dataclass(frozen=True)
class Pass:
    assignments: tuple
    divs_streamed: int

    def occupied_vdpes(self):
        return sorted({a.vdpe_id for a in self.assignments})


@dataclass(frozen=True)
class PassSchedule:
    matrix: object
    plan: SlicePlan
    n: int
    passes: tuple
    total_vdpes_used: int
    psum_edges: dict  # dkv_row -> ((pass_index, vdpe_id, group_id, slice_index), ...)

    @property
    def pass_count(self):
        return len(self.passes)


@dataclass(frozen=True)
class UtilizationReport:
    per_pass: tuple
    weights: tuple  # DIVs streamed per pass

    @property
    def mean(self):
        total = sum(self.weights)
        if not total:
            return 0.0
        return sum(f * w for f, w in zip(self.per_pass, self.weights)) / total


@dataclass(frozen=True)
class ScheduleStats:
    case: Case
    mode: Mode
    passes: int
    vdpes_used: int
    slices_per_row: int
    divs_streamed: int
    per_pass_utilization: np.ndarray

    @property
    def mean_utilization(self):
        return float(self.per_pass_utilization.mean()) if self.passes else 0.0


def select_case(s, vdpe):
    if s > vdpe.n:
        return Case.CASE1, Mode.MODE1
    if s == vdpe.n:
        return Case.EXACT_FIT, Mode.MODE1
    if vdpe.y >= 1:
        if s <= vdpe.x:
            return Case.CASE3, Mode.MODE2
        return Case.CASE2, Mode.MODE2
    return Case.CASE3, Mode.MODE1


def plan_slices(s, vdpe):
    case, mode = select_case(s, vdpe)
    if case is Case.CASE1:
        b, c = divmod(s, vdpe.n)
        lengths = [vdpe.n] * b + ([c] if c else [])
    elif case is Case.CASE2:
        b, c = divmod(s, vdpe.x)
        lengths = [vdpe.x] * b + ([c] if c else [])
    elif case is Case.EXACT_FIT:
        b, c, lengths = 1, 0, [s]
    else:
        b, c, lengths = 0, s, [s]
    return SlicePlan(case, mode, b, c, tuple(lengths))


def _check_matrix(matrix, total_vdpes):
    if matrix.h < 1 or matrix.s < 1:
        raise EmptyMatrix(f"DKV matrix is {matrix.h}x{matrix.s}", h=matrix.h, s=matrix.s)
    if total_vdpes < 1:
        raise NoWork("accelerator has no VDPEs", total_vdpes=total_vdpes)


def load_slots(matrix, vdpe, total_vdpes):
    """VDPE ids a single pass can fill with loads of `matrix`."""
    if matrix.channel_matched and vdpe.div_share > 1:
        return range(0, total_vdpes, vdpe.div_share)
    return range(total_vdpes)


def _mode2_loads(h, y, slice_count):
    """Slice-major loads, each the same slice of up to y consecutive rows."""
    groups = math.ceil(h / y)
    for k in range(slice_count):
        for g in range(groups):
            yield k, range(g * y, min(h, (g + 1) * y))


def plan_mapping_for(matrix, vdpe, total_vdpes):
    _check_matrix(matrix, total_vdpes)
    plan = plan_slices(matrix.s, vdpe)
    lengths = plan.slice_lengths

    units = []  # one entry per VDPE occupancy: list of (group_id, row, k)
    if plan.mode is Mode.MODE1:
        for row in range(matrix.h):
            for k in range(plan.count):
                units.append([(None, row, k)])
    else:
        for k, rows in _mode2_loads(matrix.h, vdpe.y, plan.count):
            units.append([(g, row, k) for g, row in enumerate(rows)])

    slots = load_slots(matrix, vdpe, total_vdpes)
    passes = []
    psum_edges = defaultdict(list)
    for p, start in enumerate(range(0, len(units), len(slots))):
        assignments = []
        for vdpe_id, unit in zip(slots, units[start : start + len(slots)]):
            for group_id, row, k in unit:
                assignments.append(Assignment(vdpe_id, group_id, row, k, lengths[k]))
                psum_edges[row].append((p, vdpe_id, group_id, k))
        passes.append(Pass(tuple(assignments), matrix.div_count))

    return PassSchedule(
        matrix=matrix,
        plan=plan,
        n=vdpe.n,
        passes=tuple(passes),
        total_vdpes_used=min(len(slots), len(units)),
        psum_edges={row: tuple(sorted(e, key=lambda t: t[3])) for row, e in psum_edges.items()},
    )


def plan_mapping(matrix, arch):
    return plan_mapping_for(matrix, ReconfigurableVdpe.for_arch(arch), arch.total_vdpes)


def utilization(schedule, n=None):
    n = n or schedule.n
    per_pass = []
    for p in schedule.passes:
        active = Counter()
        for a in p.assignments:
            active[a.vdpe_id] += a.slice_len
        per_pass.append(sum(active.values()) / (n * len(active)))
    return UtilizationReport(tuple(per_pass), tuple(p.divs_streamed for p in schedule.passes))


def schedule_stats_for(matrix, vdpe, total_vdpes):
    """Pass count and utilization of plan_mapping_for without building assignments."""
    _check_matrix(matrix, total_vdpes)
    plan = plan_slices(matrix.s, vdpe)
    lengths = np.array(plan.slice_lengths, dtype=np.int64)

    if plan.mode is Mode.MODE1:
        active = np.tile(lengths, matrix.h)
    else:
        groups = math.ceil(matrix.h / vdpe.y)
        rows = np.full(groups, vdpe.y, dtype=np.int64)
        rows[-1] = matrix.h - (groups - 1) * vdpe.y
        active = np.outer(lengths, rows).ravel()

    units = active.size
    width = len(load_slots(matrix, vdpe, total_vdpes))
    passes = math.ceil(units / width)
    padded = np.zeros(passes * width, dtype=np.int64)
    padded[:units] = active
    padded = padded.reshape(passes, width)
    slots = np.arange(passes * width).reshape(passes, width)
    occupied = (slots < units).sum(axis=1)
    per_pass = padded.sum(axis=1) / (vdpe.n * occupied)

    return ScheduleStats(
        case=plan.case,
        mode=plan.mode,
        passes=passes,
        vdpes_used=min(width, units),
        slices_per_row=plan.count,
        divs_streamed=matrix.div_count,
        per_pass_utilization=per_pass,
    )


def schedule_stats(matrix, arch):
    return schedule_stats_for(matrix, ReconfigurableVdpe.for_arch(arch), arch.total_vdpes)


def _as_exact(values):
    array = np.asarray(values)
    if array.dtype.kind in "iub":
        return array.astype(np.int64)
    return array


def functional_eval(schedule, kernel_values, div_values):
    """Execute the schedule slice by slice and reduce the partial sums per DKV row."""
    matrix = schedule.matrix
    kernels = _as_exact(kernel_values)
    divs = _as_exact(div_values)
    if kernels.shape != (matrix.h, matrix.s):
        raise ShapeMismatch(
            f"kernel values are {kernels.shape}, expected {(matrix.h, matrix.s)}",
            got=kernels.shape,
        )
    expected = (
        (matrix.h, matrix.div_count, matrix.s)
        if matrix.channel_matched
        else (matrix.div_count, matrix.s)
    )
    if divs.shape != expected:
        raise ShapeMismatch(f"DIV values are {divs.shape}, expected {expected}", got=divs.shape)

    offsets = np.concatenate(([0], np.cumsum(schedule.plan.slice_lengths)))
    psums = {}
    for p_index, p in enumerate(schedule.passes):
        for a in p.assignments:
            lo, hi = offsets[a.slice_index], offsets[a.slice_index] + a.slice_len
            stream = divs[a.dkv_row] if matrix.channel_matched else divs
            psums[(p_index, a.vdpe_id, a.group_id, a.slice_index)] = (
                stream[:, lo:hi] @ kernels[a.dkv_row, lo:hi]
            )

    dtype = np.result_type(kernels.dtype, divs.dtype)
    results = np.zeros((matrix.div_count, matrix.h), dtype=dtype)
    for row, edges in schedule.psum_edges.items():
        total = psums[edges[0]]
        for edge in edges[1:]:
            total = total + psums[edge]
        results[:, row] = total
    return results


def case_shares(workload, n, x, y):
    """Share of DKVs (by instance and by distinct shape) falling in each case."""
    vdpe = ReconfigurableVdpe(n=n, x=x, y=y)
    by_instance, by_shape = Counter(), Counter()
    seen = set()
    for layer in workload:
        case, _ = select_case(layer.s, vdpe)
        by_instance[case.value] += layer.h
        key = (layer.kind.value, layer.kernel_shape)
        if key not in seen:
            seen.add(key)
            by_shape[case.value] += 1
    total_instances = sum(by_instance.values()) or 1
    total_shapes = sum(by_shape.values()) or 1
    return {
        "instances": {c.value: by_instance[c.value] / total_instances for c in Case},
        "shapes": {c.value: by_shape[c.value] / total_shapes for c in Case},
    }


def single_vdpe_utilization(s, vdpe):
    """Utilization of a fully loaded VDPE running DKVs of length s."""
    plan = plan_slices(s, vdpe)
    if plan.mode is Mode.MODE2:
        return vdpe.y * s / (plan.count * vdpe.n)
    return s / (plan.count * vdpe.n)


def utilization_by_s(s_values, n, x):
    fixed = ReconfigurableVdpe(n=n, x=x, y=0)
    reconfigurable = ReconfigurableVdpe.build(n, x)
    return [
        {
            "s": s,
            "fixed": single_vdpe_utilization(s, fixed),
            "reconfigurable": single_vdpe_utilization(s, reconfigurable),
        }
        for s in sorted(set(s_values))
    ]


def map_workload(workload, arch):
    """Schedule statistics of every layer, in order."""
    return [(layer, schedule_stats(decompose(layer), arch)) for layer in workload]
