from types import SimpleNamespace

import pytest

from fusionlab.core import verify
from fusionlab.core.codec import dumps, modular_to_model, save_modular
from fusionlab.core.construct import ZooLimits, build_from_spec, build_zoo
from fusionlab.core.errors import SpecError
from fusionlab.core.schemas import IsingSpec, MetricGroupSpec, ProductSpec, TwistedDoubleSpec
from fusionlab.core.verify import (
    SUITES,
    VerifyContext,
    asf_shape,
    load_extra,
    reproduce_command,
    resolve_suites,
    run_suites,
)

LIMITS = ZooLimits(max_rank=32, q5_samples=1)


def metric(group, form=None, coefficients=None):
    return MetricGroupSpec(family="metric_group", group=group, form=form, coefficients=coefficients)


def ising_spec(twist=1):
    return IsingSpec(family="ising", twist=twist)


def double(group, cocycle="trivial"):
    return TwistedDoubleSpec(family="twisted_double", group=group, cocycle=cocycle)


def product(*factors):
    return ProductSpec(family="product", factors=list(factors))


SPECS = [
    metric("Z3", form="residue"),
    metric("Z5", form="nonresidue"),
    metric("Z2", coefficients=[1]),
    metric("Z2", coefficients=[2]),
    metric("Z6", coefficients=[1]),
    ising_spec(1),
    ising_spec(3),
    product(ising_spec(1), metric("Z3", form="residue")),
    product(ising_spec(1), ising_spec(3)),
    product(metric("Z2", coefficients=[2]), metric("Z3", form="residue")),
    product(metric("Z3", form="residue"), metric("Z7", form="residue")),
    double("Z2", "I:1"),
    double("Z4", "I:1"),
    double("Z3", "I:2"),
    double("Z2xZ2", "I1:1,II:1"),
    double("Z3xZ3", "II:1"),
    double("Z9", "I:1"),
    double("Z25", "I:3"),
]


@pytest.fixture(scope="module")
def entries():
    cache = {}
    return [build_from_spec(spec, LIMITS, cache) for spec in SPECS]


@pytest.fixture
def context(entries):
    return VerifyContext(list(entries), random_draws=60)


@pytest.fixture
def bad_ising(tmp_path, ising):
    model = modular_to_model(ising)
    model.S[1][2] = model.S[0][2]
    model.S[2][1] = model.S[0][2]
    path = tmp_path / "bad.json"
    path.write_text(dumps(model), encoding="utf-8")
    return path


def test_registry():
    assert list(SUITES) == [
        "uppbound", "2squarefree", "pt-ddqq", "asf-nilpotent", "dimq4-pointed",
        "structure-swi", "cnil", "gen-nil", "gradings", "squarefree-pointed",
    ]
    assert resolve_suites(["all"]) == list(SUITES)
    assert resolve_suites(["cnil", "cnil", "uppbound"]) == ["cnil", "uppbound"]
    with pytest.raises(SpecError):
        resolve_suites(["nonsense"])


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suites_pass_on_constructed_instances(name, context):
    report = SUITES[name].run(context)
    assert report.passed, report.failures
    assert report.checked > 0
    assert report.disclaimer == verify.DISCLAIMER
    assert report.wall_time is None


def test_counts(context):
    reports = {r.suite: r for r in run_suites(["pt-ddqq", "dimq4-pointed"], context)}
    # Z4, Z2xZ2, Z3xZ3, Z9 and Z25 have order q^2 with q in {2, 3, 5}
    assert reports["pt-ddqq"].checked == 5
    assert reports["pt-ddqq"].skipped == len(SPECS) - 5
    # D(Z3xZ3), D(Z9) and D(Z25) have FPdim q^4
    assert reports["dimq4-pointed"].checked == 3


def test_reports_are_deterministic(entries):
    first = [dumps(r) for r in run_suites(["gen-nil", "gradings"], VerifyContext(list(entries), random_draws=40))]
    second = [dumps(r) for r in run_suites(["gen-nil", "gradings"], VerifyContext(list(entries), random_draws=40))]
    assert first == second


def test_timings(entries):
    report = SUITES["uppbound"].run(VerifyContext(list(entries), timings=True))
    assert report.wall_time is not None


def test_select(context):
    assert [e.id for e in context.select("ising-1").entries] == ["ising-1"]
    assert context.select(None) is context
    with pytest.raises(SpecError):
        context.select("missing")


def test_invalid_extra_file_fails_with_witness(bad_ising):
    entry = load_extra(str(bad_ising))
    assert entry.id == "file-bad"
    report = SUITES["uppbound"].run(VerifyContext([entry]))
    assert not report.passed
    assert report.checked == 1
    failure = report.failures[0]
    assert failure.identity == "verlinde_character"
    assert failure.witness == [2, 2, 2]
    assert failure.reproduce == f"fusionlab verify --suite uppbound --extra {bad_ising} --instance file-bad"


def test_valid_extra_file(tmp_path, ising):
    path = save_modular(tmp_path / "good.json", ising, IsingSpec(family="ising", twist=1))
    entry = load_extra(str(path))
    assert entry.spec is not None
    report = SUITES["gradings"].run(VerifyContext([entry]))
    assert report.passed
    assert report.checked == 1


def test_broken_statement_is_reported(monkeypatch, entries):
    monkeypatch.setattr(verify, "dimensional_grading", lambda R: SimpleNamespace(order=4))
    context = VerifyContext([e for e in entries if e.id == "ising-1"])
    report = SUITES["uppbound"].run(context)
    assert not report.passed
    assert report.failures[0].identity == "dimension_group_square_divides"
    assert report.failures[0].witness == [4, 4]
    assert report.failures[0].reproduce == "fusionlab verify --suite uppbound --instance ising-1"


def test_double_centralizer_failure_is_reported(monkeypatch, entries):
    monkeypatch.setattr(verify, "centralizer_of", lambda M, sub: M.ring.whole)
    context = VerifyContext([e for e in entries if e.id == "ising-1"])
    report = SUITES["cnil"].run(context)
    assert not report.passed
    failures = {f.identity: f.witness for f in report.failures}
    assert failures["double_centralizer"] == [0]


def test_cnil_checks_every_centralizer(entries):
    context = VerifyContext([e for e in entries if e.id in ("ising-1", "ising-1__ising-3")])
    report = SUITES["cnil"].run(context)
    assert report.passed
    assert report.checked == 2


def test_lattice_limit_becomes_skip(entries):
    # Ising x Z3 has rank 9; its Ising-factor search needs the lattice
    context = VerifyContext([e for e in entries if e.id == "ising-1__metric-Z3-residue"], lattice_rank=4)
    report = SUITES["structure-swi"].run(context)
    assert report.passed
    assert (report.checked, report.skipped) == (0, 1)


def test_census_only_entries_are_skipped(entries):
    census_only = [e for e in entries if e.census_only]
    assert census_only
    report = SUITES["uppbound"].run(VerifyContext(census_only))
    assert report.checked == 0
    assert report.skipped == len(census_only)


def test_reproduce_command(entries):
    entry = entries[0]
    assert reproduce_command("cnil", entry) == f"fusionlab verify --suite cnil --instance {entry.id}"


def test_dimq4_covers_a_cofactor_of_five():
    entry = build_from_spec(product(metric("Z5", form="residue"), double("Z3xZ3", "II:1")), ZooLimits())
    assert (entry.rank, entry.fpdim) == (405, 405)
    context = VerifyContext([entry])
    for name in ("dimq4-pointed", "asf-nilpotent"):
        report = SUITES[name].run(context)
        assert report.passed, report.failures
        assert report.checked == 1


@pytest.mark.parametrize("dim,q,expected", [
    (405, None, (5, 3, 4)),
    (12, None, None),
    (12, 2, (3, 2, 2)),
    (6, None, (2, 3, 1)),
    (16, 2, (1, 2, 4)),
    (9, 2, None),
])
def test_asf_shape(dim, q, expected):
    assert asf_shape(dim, q) == expected


@pytest.mark.slow
def test_full_zoo_passes_every_suite():
    context = VerifyContext(build_zoo(), random_draws=500)
    for report in run_suites(["all"], context):
        assert report.passed, (report.suite, report.failures)
