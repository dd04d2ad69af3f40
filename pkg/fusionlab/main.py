#!/usr/bin/env python3
"""
fusionlab command line.

Subcommands: construct, analyze, verify, zoo (build | list) and export.
Exit codes: 0 success or pass, 1 verification or validation failure,
2 usage, parse or spec error.
"""

import argparse
import json
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from fusionlab import __version__
from fusionlab.config_manager import LimitsConfig, get_config_manager
from fusionlab.core.abelian import FiniteAbelianGroup, parse_cocycle
from fusionlab.core.codec import (
    atomic_write,
    census_to_model,
    dumps,
    load_modular,
    load_spec_of,
    modular_to_model,
    read_json,
)
from fusionlab.core.construct import (
    TwistedDoubleResult,
    ZooEntry,
    build_from_spec,
    build_zoo,
    spec_id,
)
from fusionlab.core.errors import FusionLabError, LimitExceeded, ShapeMismatch, SpecError, ValidationFailure
from fusionlab.core.fusion import (
    dimensional_grading,
    enumerate_subcategories,
    integral_part,
    is_nilpotent,
    nilpotency_class,
    pointed_part,
    universal_grading,
)
from fusionlab.core.modular import (
    ModularData,
    classify_symmetric,
    deligne_product,
    is_nondegenerate,
    is_slightly_degenerate,
    muger_center,
    prime_decomposition,
    restrict,
    tannakian_subcategories,
    verlinde_mismatch,
)
from fusionlab.core.schemas import (
    AnalysisReport,
    CensusModel,
    IsingSpec,
    MetricGroupSpec,
    ProductSpec,
    TwistedDoubleSpec,
    ZooSpec,
)
from fusionlab.core.verify import SUITES, VerifyContext, load_extra, resolve_suites
from fusionlab.core.zoo_store import ZooStore

console = Console()
logger = logging.getLogger("fusionlab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

FAMILIES = {
    "metric-group": "metric_group",
    "ising": "ising",
    "twisted-double": "twisted_double",
    "product": "product",
}

# value of the form on the generator of Z2 -> coefficient a in zeta_4^(a x^2)
Z2_FORM_VALUES = {"1": 0, "i": 1, "-1": 2, "-i": 3}

ANALYSIS_FIELDS = (
    "fpdims", "universal_grading", "dimensional_grading", "nilpotency_class",
    "pointed_part", "integral_part", "center", "lattice", "tannakian",
    "prime_decomposition", "verlinde",
)


class UsageError(FusionLabError):
    kind = "usage"


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _setup_logging(level: str):
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _emit_json(data: Any):
    sys.stdout.write(dumps(data))


def _limits(args: argparse.Namespace, base: LimitsConfig) -> LimitsConfig:
    overrides = {f.name: getattr(args, f.name) for f in fields(LimitsConfig)
                 if getattr(args, f.name, None) is not None}
    return replace(base, **overrides)


# --- construct ---------------------------------------------------------------------------


def spec_from_args(args: argparse.Namespace) -> ZooSpec:
    """Build a zoo spec from construct flags; raises UsageError on bad combinations."""
    family = FAMILIES[args.family]
    try:
        if family == "metric_group":
            if not args.group:
                raise UsageError("--group is required for --family metric-group")
            coefficients = args.coefficients
            if args.form_value is not None:
                if FiniteAbelianGroup.parse(args.group) != FiniteAbelianGroup.cyclic(2):
                    raise UsageError("--form-value is only defined on Z2")
                value = args.form_value.replace("−", "-").replace(" ", "")
                if value not in Z2_FORM_VALUES:
                    raise UsageError(f"--form-value must be one of {', '.join(Z2_FORM_VALUES)}")
                coefficients = [Z2_FORM_VALUES[value]]
            return MetricGroupSpec(family=family, group=args.group, form=args.form,
                                   coefficients=coefficients, name=args.name)
        if family == "ising":
            return IsingSpec(family=family, twist=args.twist, name=args.name)
        if family == "twisted_double":
            if not args.group:
                raise UsageError("--group is required for --family twisted-double")
            parse_cocycle(args.cocycle)
            return TwistedDoubleSpec(family=family, group=args.group, cocycle=args.cocycle, name=args.name)
    except ValidationError as exc:
        raise SpecError(f"invalid flags: {exc.errors()[0]['msg']}") from exc
    raise UsageError("--family product takes --factors FILE FILE ...")


def _product_of_files(paths: List[str], name: Optional[str]):
    if len(paths) < 2:
        raise UsageError("--family product needs at least two --factors files")
    parts = [load_modular(p) for p in paths]
    specs = [load_spec_of(p) for p in paths]
    data = parts[0]
    for part in parts[1:]:
        data = deligne_product(data, part)
    spec = ProductSpec(family="product", factors=specs, name=name) if all(specs) else None
    if name:
        data.name = name
    return data, spec


def _summary(data: Optional[ModularData], census: Optional[TwistedDoubleResult]) -> Dict[str, Any]:
    if data is None:
        return {"rank": census.simples, "fpdim": census.total_dim, "census_only": True,
                "pointed": census.pointed, "modular_data": census.marker}
    nondegenerate = is_nondegenerate(data)
    out: Dict[str, Any] = {"name": data.name, "rank": data.rank, "fpdim": data.global_dim,
                           "nondegenerate": nondegenerate}
    if not nondegenerate:
        center = muger_center(data)
        out["center"] = list(center.members)
        if is_slightly_degenerate(data):
            out["flag"] = "svect"
    return out


def cmd_construct(args: argparse.Namespace) -> int:
    config = get_config_manager()
    limits = _limits(args, config.limits)
    if FAMILIES[args.family] == "product":
        data, spec = _product_of_files(args.factors or [], args.name)
        entry = ZooEntry(spec_id(spec) if spec else "product", spec, data=data)
    else:
        if args.factors:
            raise UsageError("--factors only applies to --family product")
        spec = spec_from_args(args)
        entry = build_from_spec(spec, limits.zoo_limits())
    out = Path(args.out or f"{entry.id}.json")
    if entry.data is not None:
        model = modular_to_model(entry.data, entry.spec)
    else:
        model = census_to_model(entry.census, entry.spec)
    atomic_write(out, dumps(model))
    summary = {"file": str(out), **_summary(entry.data, entry.census)}
    if args.json:
        _emit_json(summary)
    else:
        status = "census only" if entry.data is None else (
            "nondegenerate" if summary["nondegenerate"] else f"degenerate{' (svect)' if summary.get('flag') else ''}")
        console.print(f"[green]wrote[/green] {out}: rank {summary['rank']}, FPdim {summary['fpdim']}, {status}")
    return EXIT_OK


# --- analyze -----------------------------------------------------------------------------


def _bounded(func: Callable[[], Any]) -> Any:
    try:
        return func()
    except LimitExceeded as exc:
        return {"skipped": exc.message}


def _prime_components(data: ModularData, lattice_rank: Optional[int]) -> Any:
    if not is_nondegenerate(data):
        return {"skipped": "degenerate"}
    if not is_nilpotent(data.ring):
        return {"skipped": "not nilpotent"}
    return [
        {"members": list(c.members), "fpdim": c.fpdim, "nondegenerate": is_nondegenerate(restrict(data, c))}
        for c in prime_decomposition(data, lattice_rank)
    ]


def _verlinde(data: ModularData) -> Dict[str, Any]:
    if not is_nondegenerate(data):
        return {"skipped": "degenerate"}
    mismatch = verlinde_mismatch(data)
    return {"recovered": mismatch is None, "witness": list(mismatch or ())}


def analyze(data: ModularData, wanted: List[str], lattice_rank: Optional[int]) -> AnalysisReport:
    R = data.ring
    out: Dict[str, Any] = {}
    for name in wanted:
        if name == "fpdims":
            out[name] = [{"label": R.labels[i], "d2": d.square} for i, d in enumerate(R.fpdims)]
        elif name == "universal_grading":
            out[name] = universal_grading(R).to_dict()
        elif name == "dimensional_grading":
            out[name] = dimensional_grading(R).to_dict()
        elif name == "nilpotency_class":
            out[name] = nilpotency_class(R)
        elif name == "pointed_part":
            out[name] = pointed_part(R).to_dict()
        elif name == "integral_part":
            out[name] = integral_part(R).to_dict()
        elif name == "center":
            center = muger_center(data)
            out[name] = {
                **center.to_dict(),
                "nondegenerate": is_nondegenerate(data),
                "slightly_degenerate": is_slightly_degenerate(data),
                "symmetric": classify_symmetric(data, center).to_dict(),
            }
        elif name == "lattice":
            def lattice():
                subs = enumerate_subcategories(R, lattice_rank)
                return {"count": len(subs), "fpdims": sorted({s.fpdim for s in subs})}
            out[name] = _bounded(lattice)
        elif name == "tannakian":
            out[name] = _bounded(lambda: [list(s.members) for s in tannakian_subcategories(data, lattice_rank)])
        elif name == "prime_decomposition":
            out[name] = _bounded(lambda: _prime_components(data, lattice_rank))
        elif name == "verlinde":
            out[name] = _bounded(lambda: _verlinde(data))
    return AnalysisReport(name=data.name, rank=data.rank, fpdim=data.global_dim, fields=out)


def cmd_analyze(args: argparse.Namespace) -> int:
    config = get_config_manager()
    limits = _limits(args, config.limits)
    data = load_modular(args.file)
    data.name = data.name or Path(args.file).stem
    wanted = args.report or list(ANALYSIS_FIELDS)
    report = analyze(data, wanted, limits.lattice_rank)
    if args.json:
        _emit_json(report)
        return EXIT_OK
    table = Table(title=f"{report.name}: rank {report.rank}, FPdim {report.fpdim}")
    table.add_column("field", style="cyan")
    table.add_column("value")
    for key, value in report.fields.items():
        table.add_row(key, json.dumps(value, ensure_ascii=False))
    console.print(table)
    return EXIT_OK


# --- verify ------------------------------------------------------------------------------


def _zoo_entries(args: argparse.Namespace, limits: LimitsConfig) -> List[ZooEntry]:
    store = ZooStore(args.zoo_dir)
    if store.exists() and not args.rebuild:
        logger.info("verify: reading zoo from %s", store.zoo_dir)
        return store.load_entries(limits.zoo_limits())
    return build_zoo(limits.zoo_limits())


def cmd_verify(args: argparse.Namespace) -> int:
    config = get_config_manager()
    limits = _limits(args, config.limits)
    names = resolve_suites(args.suite or ["all"])
    entries = [load_extra(path) for path in (args.extra or [])]
    if not args.extra_only:
        entries = _zoo_entries(args, limits) + entries
    context = VerifyContext(
        entries,
        lattice_rank=limits.lattice_rank,
        random_draws=limits.random_draws,
        seed=limits.seed,
        timings=args.timings,
    ).select(args.instance)
    reports = [SUITES[name].run(context) for name in names]
    passed = all(r.passed for r in reports)
    document = {"passed": passed, "reports": [r.model_dump(mode="json", exclude_none=True) for r in reports]}
    if args.out:
        atomic_write(args.out, dumps(document))
    if args.json:
        _emit_json(document)
    else:
        table = Table(title="verification")
        for column in ("suite", "checked", "skipped", "failures", "result"):
            table.add_column(column)
        for r in reports:
            result = "[green]pass[/green]" if r.passed else "[red]FAIL[/red]"
            table.add_row(r.suite, str(r.checked), str(r.skipped), str(len(r.failures)), result)
        console.print(table)
        for r in reports:
            for f in r.failures:
                console.print(f"[red]{r.suite}[/red] {f.instance}: {f.identity} at {f.witness}")
                console.print(f"  [dim]{f.reproduce}[/dim]")
        console.print(f"[dim]{reports[0].disclaimer if reports else ''}[/dim]")
    return EXIT_OK if passed else EXIT_FAIL


# --- zoo and export ----------------------------------------------------------------------


def cmd_zoo(args: argparse.Namespace) -> int:
    config = get_config_manager()
    store = ZooStore(args.zoo_dir)
    if args.zoo_command == "build":
        limits = _limits(args, config.limits)
        index = store.save(build_zoo(limits.zoo_limits()))
    else:
        index = store.load_index()
    if args.json:
        _emit_json(index)
        return EXIT_OK
    table = Table(title=f"zoo at {store.zoo_dir} ({len(index.entries)} members)")
    for column in ("id", "family", "rank", "FPdim", "nondegenerate"):
        table.add_column(column)
    for item in index.entries:
        flag = "census" if item.census_only else ("yes" if item.nondegenerate else "no")
        table.add_row(item.id, item.family, str(item.rank), str(item.fpdim), flag)
    console.print(table)
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    """Re-encode a category file in canonical form."""
    raw = read_json(args.file)
    if isinstance(raw, dict) and "sectors" in raw:
        try:
            text = dumps(CensusModel.model_validate(raw))
        except ValidationError as exc:
            raise SpecError(f"{args.file}: {exc.errors()[0]['msg']}", path=args.file) from exc
    else:
        text = dumps(modular_to_model(load_modular(args.file), load_spec_of(args.file)))
    if args.out:
        atomic_write(args.out, text)
        if not args.json:
            console.print(f"[green]exported[/green] {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- parser ------------------------------------------------------------------------------


def _add_limit_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("limits (defaults from the configuration)")
    group.add_argument("--max-group-order", dest="max_group_order", type=int)
    group.add_argument("--max-rank", dest="max_rank", type=int)
    group.add_argument("--lattice-rank", dest="lattice_rank", type=int)
    group.add_argument("--q5-samples", dest="q5_samples", type=int)
    group.add_argument("--random-draws", dest="random_draws", type=int)
    group.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Print machine-readable JSON")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")

    parser = argparse.ArgumentParser(
        prog="fusionlab",
        description="Exact fusion rings and modular data, with theorem verification suites",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  fusionlab construct --family ising --twist 1
  fusionlab construct --family metric-group --group Z2 --form-value -1 --out svect.json
  fusionlab construct --family twisted-double --group Z3xZ3 --cocycle I1:1,I2:0,II:2
  fusionlab construct --family product --factors ising-1.json svect.json
  fusionlab analyze ising-1.json
  fusionlab verify --suite pt-ddqq
  fusionlab zoo build
        """,
    )
    parser.add_argument("--version", action="version", version=f"fusionlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="Construct a category and write its JSON")
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p.add_argument("--group")
    p.add_argument("--form", choices=["residue", "nonresidue"])
    p.add_argument("--form-value", dest="form_value", help="Z2 only: 1, -1, i or -i (write --form-value=-i)")
    p.add_argument("--coefficients", type=_int_list, help="Diagonal form coefficients, e.g. 1,3")
    p.add_argument("--twist", type=int, default=1, help="Ising twist index (odd)")
    p.add_argument("--cocycle", default="trivial", help='e.g. "I:1" or "I1:1,I2:0,II:2"')
    p.add_argument("--factors", nargs="+", metavar="FILE")
    p.add_argument("--name")
    p.add_argument("--out")
    _add_limit_flags(p)
    p.set_defaults(handler=cmd_construct)

    p = sub.add_parser("analyze", parents=[common], help="Structural analysis of a category file")
    p.add_argument("file")
    p.add_argument("--report", nargs="+", choices=ANALYSIS_FIELDS)
    _add_limit_flags(p)
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("verify", parents=[common], help="Run verification suites")
    p.add_argument("--suite", action="append", help=f"one of: all, {', '.join(SUITES)} (repeatable)")
    p.add_argument("--instance", help="Only this instance id")
    p.add_argument("--extra", action="append", metavar="FILE", help="Add a category file as an instance")
    p.add_argument("--extra-only", dest="extra_only", action="store_true", help="Skip the zoo")
    p.add_argument("--zoo-dir", dest="zoo_dir")
    p.add_argument("--rebuild", action="store_true", help="Build the zoo in memory even if a store exists")
    p.add_argument("--timings", action="store_true", help="Include wall time in reports")
    p.add_argument("--out")
    _add_limit_flags(p)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("zoo", parents=[common], help="Build or list the persisted zoo")
    p.add_argument("zoo_command", choices=["build", "list"])
    p.add_argument("--zoo-dir", dest="zoo_dir")
    _add_limit_flags(p)
    p.set_defaults(handler=cmd_zoo)

    p = sub.add_parser("export", parents=[common], help="Re-encode a category file canonically")
    p.add_argument("file")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_export)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config = get_config_manager()
    _setup_logging(args.log_level or config.config.logging.level)
    try:
        return args.handler(args)
    except (UsageError, SpecError, ShapeMismatch, LimitExceeded) as exc:
        return _error(args, exc, EXIT_USAGE)
    except FusionLabError as exc:
        return _error(args, exc, EXIT_FAIL)


def _error(args: argparse.Namespace, exc: FusionLabError, code: int) -> int:
    if args.json:
        _emit_json(exc.to_dict())
    else:
        console.print(f"[red]error:[/red] {exc.message}")
        if isinstance(exc, ValidationFailure):
            console.print(f"  [dim]{exc.violation.to_dict()}[/dim]")
    return code


if __name__ == "__main__":
    sys.exit(main())
