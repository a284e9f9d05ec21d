#!/usr/bin/env python3
# ## @DOC
# ### MRR Sim
# Command-line front end for scalability sweeps, comb-switch design, mapping, simulation and comparison.
#
# **Subcommands:**
# - **scalability**: supported VDPE size per organization, precision and bit rate.
# - **csdesign**: comb-switch FSR, radius, pairs and insertion loss.
# - **map**: per-layer mapping summary of a workload on one arch.
# - **simulate**: FPS, power, FPS/W, utilization and area per (workload, arch).
# - **compare**: area-proportionate comparison normalised to a baseline.

"""
MRR accelerator simulator CLI.

Primary artifacts go to `<out-dir>/<command>.<format>` (or stdout without
--out-dir); run metadata goes to `<command>.meta.json`. Errors are
reported as JSON on stderr (and `<out-dir>/error.json`); the exit code is
2 for configuration errors and 1 for everything else.
"""

import argparse
import json
import logging
import sys
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

sys.path.append(str(Path(__file__).parent))
from MRR_archmodel import (  # noqa: E402
    SUPPORTED_BIT_RATES,
    Organization,
    default_params,
    default_peripherals,
    load_arch,
    load_params,
    load_peripherals,
    validate_config,
)
from MRR_cnnworkload import decompose, dsc_pairs, load_workload, network_costs  # noqa: E402
from MRR_combswitch import design  # noqa: E402
from MRR_config_utils import (  # noqa: E402
    ARCH_DIR,
    ROOT_DIR,
    WORKLOADS_DIR,
    get_or_default,
    get_value,
    load_config,
    load_document,
)
from MRR_errors import ConfigError, IoError, MrrSimError  # noqa: E402
from MRR_linkbudget import CSV_COLUMNS, scalability_rows, scalability_sweep  # noqa: E402
from MRR_mapper import case_shares, map_workload, plan_mapping, utilization_by_s  # noqa: E402
from MRR_report import print_markdown_table, to_csv, to_json, write_artifacts  # noqa: E402
from MRR_simengine import compare, simulate  # noqa: E402

logger = logging.getLogger("mrrsim")

COMMANDS = ("scalability", "csdesign", "map", "simulate", "compare")
ALL_ORGS = tuple(o.value for o in Organization)


@dataclass
class ExperimentSpec:
    command: str
    archs: list = field(default_factory=list)
    workloads: list = field(default_factory=list)
    organizations: list = field(default_factory=list)
    bit_rates: list = field(default_factory=list)
    precisions: list = field(default_factory=list)
    out_dir: Path = None
    fmt: str = "json"
    seed: int = None
    params_path: Path = None
    peripherals_path: Path = None
    options: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def check(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}", command=self.command)
        for path in [*self.archs, *self.workloads, self.params_path, self.peripherals_path]:
            if path is not None and not Path(path).exists():
                raise IoError(f"file not found: {path}", path=path)
        if self.command in ("scalability", "compare"):
            for axis in ("organizations", "bit_rates"):
                if not getattr(self, axis):
                    raise ConfigError(f"sweep axis {axis} is empty", axis=axis)
        if self.command == "scalability" and not self.precisions:
            raise ConfigError("sweep axis precisions is empty", axis="precisions")


def resolve(ref, directory, suffix):
    """A bundled name (e.g. 'dsc_heavy') or a path."""
    path = Path(ref)
    if path.exists() or path.suffix:
        return path
    return directory / f"{ref}{suffix}"


def add_common_flags(parser):
    parser.add_argument("--config", type=Path, help="Project config.toml (default: repo root)")
    parser.add_argument("--params", type=Path, help="Photonic parameter overrides (TOML/JSON)")
    parser.add_argument("--peripherals", type=Path, help="Peripheral record overrides (TOML/JSON)")
    parser.add_argument("--out-dir", type=Path, help="Directory for artifacts")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--seed", type=int, help="Recorded for provenance only")
    parser.add_argument("--jobs", type=int, help="Concurrent simulations for compare")
    parser.add_argument("-v", "--verbose", action="count", default=0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mrrsim", description="MRR photonic CNN accelerator simulator"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("scalability", help="Maximum VDPE size sweep")
    p.add_argument("--org", nargs="+", dest="organizations")
    p.add_argument("--precisions", nargs="+", type=int)
    p.add_argument("--bit-rates", nargs="+", type=int)
    add_common_flags(p)

    p = subparsers.add_parser("csdesign", help="Comb switch design")
    p.add_argument("--org", required=True)
    p.add_argument("--bit-rate", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=int, default=9)
    p.add_argument("--modulator-fsr", type=float)
    p.add_argument("--center-wavelength", type=float, default=1550.0)
    add_common_flags(p)

    p = subparsers.add_parser("map", help="Map a workload onto one arch")
    p.add_argument("workload")
    p.add_argument("arch")
    p.add_argument("--dump", action="store_true", help="Include every pass assignment")
    add_common_flags(p)

    p = subparsers.add_parser("simulate", help="Simulate workloads on archs")
    p.add_argument("workloads", nargs="+")
    p.add_argument("--arch", nargs="+", required=True, dest="archs")
    add_common_flags(p)

    p = subparsers.add_parser("compare", help="Area-proportionate comparison")
    p.add_argument("--workloads", nargs="+")
    p.add_argument("--orgs", nargs="+", dest="organizations")
    p.add_argument("--bit-rates", nargs="+", type=int)
    p.add_argument("--reference-org")
    p.add_argument("--reference-count", type=int)
    p.add_argument("--baseline", help="ORG@BR every ratio is normalised to")
    p.add_argument("--auto-n", action="store_true", help="Ignore configured N values")
    add_common_flags(p)
    return parser


def spec_from_args(args):
    if args.config is not None:
        config = load_document(args.config)
    else:
        config = load_config(ROOT_DIR)
    sim = get_value(config, "simulation") or {}

    spec = ExperimentSpec(
        command=args.command,
        out_dir=args.out_dir,
        fmt=args.format,
        seed=args.seed,
        params_path=args.params,
        peripherals_path=args.peripherals,
        config=config,
    )
    if args.command == "scalability":
        spec.organizations = args.organizations or list(ALL_ORGS)
        spec.precisions = args.precisions or list(range(1, 9))
        spec.bit_rates = args.bit_rates or list(SUPPORTED_BIT_RATES)
    elif args.command == "csdesign":
        spec.options = {
            "org": args.org,
            "bit_rate": args.bit_rate,
            "n": args.n,
            "x": args.x,
            "modulator_fsr": args.modulator_fsr,
            "center_wavelength": args.center_wavelength,
        }
    elif args.command == "map":
        spec.workloads = [resolve(args.workload, WORKLOADS_DIR, ".csv")]
        spec.archs = [resolve(args.arch, ARCH_DIR, ".json")]
        spec.options = {"dump": args.dump}
    elif args.command == "simulate":
        spec.workloads = [resolve(w, WORKLOADS_DIR, ".csv") for w in args.workloads]
        spec.archs = [resolve(a, ARCH_DIR, ".json") for a in args.archs]
    elif args.command == "compare":
        workloads = args.workloads or sim.get("workloads", [])
        spec.workloads = [resolve(w, WORKLOADS_DIR, ".csv") for w in workloads]
        spec.organizations = args.organizations or sim.get("organizations", list(ALL_ORGS))
        spec.bit_rates = args.bit_rates or sim.get("bit_rates", [1, 3, 5])
        spec.precisions = [sim.get("precision_bits", 4)]
        n_overrides = {} if args.auto_n else dict(get_or_default(config, "compare.n_values", {}))
        spec.options = {
            "reference_org": args.reference_org or sim.get("reference_organization", "RMAM"),
            "reference_count": args.reference_count or sim.get("reference_count", 512),
            "baseline": (args.baseline or sim.get("baseline", "RMAM@1")).upper(),
            "jobs": args.jobs or sim.get("jobs", 1),
            "n_overrides": n_overrides,
        }
        if not spec.workloads:
            raise ConfigError("compare needs at least one workload", axis="workloads")
    spec.check()
    return spec


def _params_for(spec, org):
    if spec.params_path is None:
        return default_params(org)
    return load_params(spec.params_path, org)


def _peripherals(spec):
    if spec.peripherals_path is None:
        return default_peripherals()
    return load_peripherals(spec.peripherals_path)


def _arch(spec, path):
    cfg = load_arch(path)
    if cfg.params is None and spec.params_path is not None:
        cfg.params = _params_for(spec, cfg.organization)
    return validate_config(cfg)


def _provenance(spec):
    return {
        "command": spec.command,
        "archs": [str(p) for p in spec.archs],
        "workloads": [str(p) for p in spec.workloads],
        "params": None if spec.params_path is None else str(spec.params_path),
        "peripherals": _peripherals(spec).to_dict(),
        "seed": spec.seed,
        "options": {k: v for k, v in spec.options.items()},
    }


def run_scalability(spec):
    points = []
    for org in spec.organizations:
        points.extend(
            scalability_sweep(org, spec.precisions, spec.bit_rates, _params_for(spec, org))
        )
    rows = list(scalability_rows(points))
    config = _provenance(spec)
    config["sweep"] = {
        "organizations": [Organization.parse(o).value for o in spec.organizations],
        "precisions": sorted(spec.precisions),
        "bit_rates": sorted(spec.bit_rates),
        "params": {
            Organization.parse(o).value: _params_for(spec, o).to_dict()
            for o in spec.organizations
        },
    }
    payload = {"config": config, "points": [dict(zip(CSV_COLUMNS, r)) for r in rows]}
    return payload, list(CSV_COLUMNS), rows


def run_csdesign(spec):
    opts = spec.options
    result = design(
        opts["n"],
        opts["x"],
        opts["org"],
        opts["bit_rate"],
        modulator_fsr=opts["modulator_fsr"],
        center_wavelength=opts["center_wavelength"],
    )
    data = result.to_dict()
    payload = {"config": _provenance(spec), "design": data}
    return payload, list(data), [list(data.values())]


def utilization_histogram(values, bins=10):
    counts = Counter(min(int(v * bins), bins - 1) for v in values)
    return {f"{b / bins:.1f}-{(b + 1) / bins:.1f}": counts.get(b, 0) for b in range(bins)}


def _pair_summary(workload):
    return [
        {
            "dc": dc.name,
            "pc": pc.name,
            "weights": cost.w,
            "ops": cost.o,
            "weight_reduction": float(cost.r_w),
            "ops_reduction": float(cost.r_o),
        }
        for dc, pc, cost in dsc_pairs(workload)
    ]


def run_map(spec):
    workload = load_workload(spec.workloads[0])
    arch = _arch(spec, spec.archs[0])
    layers = []
    utilizations = []
    for layer, stats in map_workload(workload, arch):
        utilizations.extend(float(u) for u in stats.per_pass_utilization)
        entry = {
            "name": layer.name,
            "kind": layer.kind.value,
            "s": layer.s,
            "h": layer.h,
            "case": stats.case.value,
            "mode": stats.mode.value,
            "slices_per_row": stats.slices_per_row,
            "passes": stats.passes,
            "vdpes_used": stats.vdpes_used,
            "utilization": stats.mean_utilization,
        }
        if spec.options.get("dump"):
            schedule = plan_mapping(decompose(layer), arch)
            entry["schedule"] = [
                [
                    [a.vdpe_id, a.group_id, a.dkv_row, a.slice_index, a.slice_len]
                    for a in p.assignments
                ]
                for p in schedule.passes
            ]
        layers.append(entry)

    config = _provenance(spec)
    config["arch"] = arch.to_dict()
    short = [layer.s for layer in workload if layer.s < arch.n]
    payload = {
        "config": config,
        "workload": workload.name,
        "passes": sum(entry["passes"] for entry in layers),
        "vdpes_used": max((entry["vdpes_used"] for entry in layers), default=0),
        "utilization_histogram": utilization_histogram(utilizations),
        "case_shares": case_shares(workload, arch.n, arch.x, arch.y),
        "utilization_by_s": utilization_by_s(short, arch.n, arch.x),
        "network_costs": network_costs(workload),
        "dsc_pairs": _pair_summary(workload),
        "layers": layers,
    }
    headers = ["name", "kind", "s", "h", "case", "mode", "slices_per_row", "passes", "vdpes_used", "utilization"]
    rows = [[entry[h] for h in headers] for entry in layers]
    return payload, headers, rows


SIM_COLUMNS = [
    "workload", "organization", "bit_rate_gbps", "n", "y", "total_vdpes",
    "total_latency", "fps", "total_power", "fps_per_watt", "mean_utilization",
    "total_area", "pass_count",
]


def run_simulate(spec):
    peripherals = _peripherals(spec)
    archs = [_arch(spec, path) for path in spec.archs]
    reports = []
    rows = []
    for path in spec.workloads:
        workload = load_workload(path)
        for arch in archs:
            print(f"⚙️  {workload.name} on {arch.label}", file=sys.stderr)
            report = simulate(workload, arch, peripherals)
            reports.append(report.to_dict())
            rows.append(
                [
                    report.workload, arch.organization.value, arch.bit_rate, arch.n,
                    arch.y, arch.total_vdpes, report.total_latency, report.fps,
                    report.total_power, report.fps_per_watt, report.mean_utilization,
                    report.total_area, report.pass_count,
                ]
            )
    config = _provenance(spec)
    config["resolved_archs"] = [a.to_dict() for a in archs]
    return {"config": config, "reports": reports}, SIM_COLUMNS, rows


COMPARE_COLUMNS = [
    "workload", "label", "organization", "bit_rate_gbps", "n", "y", "total_vdpes",
    "fps", "fps_per_watt", "total_power", "total_area", "mean_utilization",
    "norm_fps", "norm_fps_per_watt", "external",
]


def run_compare(spec):
    opts = spec.options
    workloads = [load_workload(p) for p in spec.workloads]
    external = {
        name: entry.get("fps_divisor_vs_reference", {})
        for name, entry in (get_value(spec.config, "compare.external_baselines") or {}).items()
    }
    published = get_value(spec.config, "compare.published_ratios") or {}
    print(
        f"⚙️  comparing {len(spec.organizations)} organizations x {len(spec.bit_rates)} bit rates "
        f"on {len(workloads)} workloads",
        file=sys.stderr,
    )
    result = compare(
        workloads,
        spec.organizations,
        spec.bit_rates,
        opts["reference_org"],
        opts["reference_count"],
        spec.precisions[0],
        baseline=opts["baseline"],
        n_overrides=opts["n_overrides"],
        published=published,
        external_baselines=external,
        peripherals=_peripherals(spec),
        jobs=opts["jobs"],
    )

    gmean = [r for r in result.rows if r["workload"] == "gmean"]
    print(f"\nNormalised to {result.baseline} (gmean over workloads)\n", file=sys.stderr)
    print_markdown_table(
        ["Accelerator", "N", "y", "VDPEs", "FPS", "FPS/W", "Norm FPS", "Norm FPS/W"],
        [
            [r["label"], r["n"], r["y"], r["total_vdpes"], r["fps"], r["fps_per_watt"],
             r["norm_fps"], r["norm_fps_per_watt"]]
            for r in gmean
        ],
        stream=sys.stderr,
    )
    if result.ratios:
        print("", file=sys.stderr)
        print_markdown_table(
            ["FPS ratio", "Achieved", "Published"],
            [[r["ratio"], r["achieved"], r["published"]] for r in result.ratios],
            stream=sys.stderr,
        )

    config = _provenance(spec)
    config["organizations"] = [Organization.parse(o).value for o in spec.organizations]
    config["bit_rates"] = list(spec.bit_rates)
    config["precision_bits"] = spec.precisions[0]
    payload = {
        "config": config,
        "baseline": result.baseline,
        "counts": result.counts,
        "rows": result.rows,
        "ratios": result.ratios,
    }
    rows = [[r[c] for c in COMPARE_COLUMNS] for r in result.rows]
    return payload, COMPARE_COLUMNS, rows


RUNNERS = {
    "scalability": run_scalability,
    "csdesign": run_csdesign,
    "map": run_map,
    "simulate": run_simulate,
    "compare": run_compare,
}


def run(spec, argv=None):
    logger.info("running %s", spec.command)
    payload, headers, rows = RUNNERS[spec.command](spec)
    if spec.out_dir is None:
        if spec.fmt == "csv":
            sys.stdout.write(to_csv(headers, rows, payload.get("config")))
        else:
            sys.stdout.write(to_json(payload))
        return 0
    primary, _ = write_artifacts(
        spec.out_dir,
        spec.command,
        spec.fmt,
        payload,
        headers=headers,
        rows=rows,
        meta={"argv": list(argv or []), "seed": spec.seed},
    )
    print(f"✅ {spec.command} written to {primary}", file=sys.stderr)
    return 0


def report_error(error, out_dir):
    report = error.to_dict()
    print(json.dumps(report, sort_keys=True), file=sys.stderr)
    if out_dir is not None:
        try:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            (Path(out_dir) / "error.json").write_text(to_json(report), encoding="utf-8")
        except OSError as e:
            print(f"❌ cannot write error report: {e}", file=sys.stderr)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)

    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        spec = spec_from_args(args)
        return run(spec, argv)
    except ConfigError as e:
        report_error(e, args.out_dir)
        return 2
    except MrrSimError as e:
        report_error(e, args.out_dir)
        return 1


if __name__ == "__main__":
    sys.exit(main())
