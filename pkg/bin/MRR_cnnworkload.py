# ## @DOC
# ### MRR CNN Workload
# CNN layer records, weight/operation cost formulas and DKV flattening.


"""
CNN workloads for the MRR accelerator simulator.

A workload is an ordered list of layers read from a CSV file with the
header `name,kind,K,D,F,H_out,W_out`. Each layer flattens into a DKV
matrix: h decomposed kernel vectors of length s, each paired with
div_count decomposed input vectors.

Stride, padding and dilation are not modelled; output extents come
straight from the file. DC rows list the per-channel kernel count as F
(equal to D in the bundled files); flattening uses h = D.
"""

import csv
import logging
import sys
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path

sys.path.append(str(Path(__file__).parent))
from MRR_errors import InvariantViolation, IoError, ParseError, WrongKind  # noqa: E402

logger = logging.getLogger(__name__)

HEADER = ("name", "kind", "K", "D", "F", "H_out", "W_out")


class LayerKind(str, Enum):
    SC = "SC"
    DC = "DC"
    PC = "PC"
    FC = "FC"


@dataclass(frozen=True)
class LayerSpec:
    name: str
    kind: LayerKind
    K: int
    D: int
    F: int
    H_out: int
    W_out: int

    def __post_init__(self):
        for dim in ("K", "D", "F", "H_out", "W_out"):
            if getattr(self, dim) < 1:
                raise InvariantViolation(f"{self.name}: {dim} must be >= 1", layer=self.name)
        if self.kind is LayerKind.PC and self.K != 1:
            raise InvariantViolation(f"{self.name}: PC layers need K = 1", layer=self.name)
        if self.kind is LayerKind.FC and (self.H_out, self.W_out) != (1, 1):
            raise InvariantViolation(
                f"{self.name}: FC layers need H_out = W_out = 1", layer=self.name
            )

    @property
    def s(self):
        """DKV length."""
        if self.kind is LayerKind.SC:
            return self.K * self.K * self.D
        if self.kind is LayerKind.DC:
            return self.K * self.K
        return self.D

    @property
    def h(self):
        """DKV count."""
        return self.D if self.kind is LayerKind.DC else self.F

    @property
    def div_count(self):
        return 1 if self.kind is LayerKind.FC else self.H_out * self.W_out

    @property
    def kernel_shape(self):
        if self.kind is LayerKind.DC:
            return (self.K, self.K, 1)
        if self.kind is LayerKind.FC:
            return (self.D, 1, 1)
        return (self.K, self.K, self.D)


@dataclass(frozen=True)
class CostReport:
    w: int
    o: int
    r_w: Fraction = None
    r_o: Fraction = None
    o_dc: int = None
    o_pc: int = None


@dataclass(frozen=True)
class DkvMatrix:
    layer: LayerSpec
    h: int
    s: int
    channel_matched: bool
    div_count: int

    @property
    def weight_points(self):
        return self.h * self.s


@dataclass(frozen=True)
class Workload:
    name: str
    layers: tuple

    def __len__(self):
        return len(self.layers)

    def __iter__(self):
        return iter(self.layers)

    @property
    def total_dkvs(self):
        return sum(layer.h for layer in self.layers)

    def s_histogram(self):
        """DKV count per DKV length."""
        histogram = Counter()
        for layer in self.layers:
            histogram[layer.s] += layer.h
        return histogram

    def shapes(self):
        """(kind, kernel shape) -> kernel count, aggregated over layers."""
        totals = Counter()
        for layer in self.layers:
            totals[(layer.kind.value, layer.kernel_shape)] += layer.h if layer.kind is LayerKind.DC else layer.F
        return totals


def sc_costs(layer):
    if layer.kind is not LayerKind.SC:
        raise WrongKind(f"{layer.name} is {layer.kind.value}, not SC", layer=layer.name)
    w = layer.K**2 * layer.D * layer.F
    return CostReport(w=w, o=layer.H_out * layer.W_out * w)


def dsc_costs(layer_dc, f_pc):
    """Depthwise layer followed by a pointwise layer with `f_pc` kernels."""
    if layer_dc.kind is not LayerKind.DC:
        raise WrongKind(f"{layer_dc.name} is {layer_dc.kind.value}, not DC", layer=layer_dc.name)
    k2, d = layer_dc.K**2, layer_dc.D
    pixels = layer_dc.H_out * layer_dc.W_out
    w = k2 * d + d * f_pc
    o_dc = pixels * k2 * d
    o_pc = pixels * d * f_pc
    w_sc = k2 * d * f_pc
    return CostReport(
        w=w,
        o=o_dc + o_pc,
        r_w=Fraction(w, w_sc),
        r_o=Fraction(o_dc + o_pc, pixels * w_sc),
        o_dc=o_dc,
        o_pc=o_pc,
    )


def reduction_factors(K, F):
    r = Fraction(1, F) + Fraction(1, K * K)
    return r, r


def decompose(layer):
    return DkvMatrix(
        layer=layer,
        h=layer.h,
        s=layer.s,
        channel_matched=layer.kind is LayerKind.DC,
        div_count=layer.div_count,
    )


def layer_costs(layer):
    """Weights and multiplications of a single layer."""
    if layer.kind is LayerKind.SC:
        return sc_costs(layer)
    if layer.kind is LayerKind.DC:
        w = layer.K**2 * layer.D
        return CostReport(w=w, o=layer.H_out * layer.W_out * w)
    w = layer.D * layer.F
    return CostReport(w=w, o=layer.div_count * w)


def network_costs(workload):
    weights = ops = 0
    for layer in workload:
        cost = layer_costs(layer)
        weights += cost.w
        ops += cost.o
    return {"layers": len(workload), "weights": weights, "ops": ops, "dkvs": workload.total_dkvs}


def dsc_pairs(workload):
    """Each DC layer with the PC layer that directly follows it."""
    pairs = []
    layers = list(workload)
    for dc, pc in zip(layers, layers[1:]):
        if dc.kind is LayerKind.DC and pc.kind is LayerKind.PC and pc.D == dc.D:
            pairs.append((dc, pc, dsc_costs(dc, pc.F)))
    return pairs


def _parse_row(path, lineno, row):
    if len(row) != len(HEADER):
        raise ParseError(
            f"{path}:{lineno}: expected {len(HEADER)} fields, got {len(row)}",
            file=path, line=lineno, reason="field count",
        )
    name, kind, *dims = (cell.strip() for cell in row)
    try:
        kind = LayerKind(kind.upper())
    except ValueError:
        raise ParseError(
            f"{path}:{lineno}: unknown layer kind {kind!r}",
            file=path, line=lineno, reason="kind",
        ) from None
    try:
        K, D, F, H, W = (int(v) for v in dims)
    except ValueError:
        raise ParseError(
            f"{path}:{lineno}: dimensions must be integers",
            file=path, line=lineno, reason="dimension",
        ) from None
    try:
        return LayerSpec(name, kind, K, D, F, H, W)
    except InvariantViolation as e:
        raise InvariantViolation(f"{path}:{lineno}: {e}", file=path, line=lineno, reason=str(e)) from None


def load_workload(path):
    path = Path(path)
    if not path.exists():
        raise IoError(f"workload not found: {path}", path=path)

    layers = []
    header_seen = False
    with open(path, "rb") as f:
        for lineno, raw in enumerate(f, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError:
                raise ParseError(
                    f"{path}:{lineno}: not valid UTF-8",
                    file=path, line=lineno, reason="encoding",
                ) from None
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            row = next(csv.reader([stripped]))
            if not header_seen:
                if tuple(cell.strip() for cell in row) != HEADER:
                    raise ParseError(
                        f"{path}:{lineno}: header must be {','.join(HEADER)}",
                        file=path, line=lineno, reason="header",
                    )
                header_seen = True
                continue
            layers.append(_parse_row(path, lineno, row))

    logger.debug("loaded %d layers from %s", len(layers), path)
    return Workload(name=path.stem, layers=tuple(layers))
