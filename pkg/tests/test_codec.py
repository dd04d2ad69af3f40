import json

import pytest

from fusionlab.core.abelian import FiniteAbelianGroup, cocycle_generator, standard_form
from fusionlab.core.codec import (
    atomic_write,
    census_to_model,
    cocycle_to_model,
    cyclo_from_model,
    cyclo_to_model,
    dumps,
    form_to_model,
    load_modular,
    load_spec_of,
    modular_from_model,
    modular_to_model,
    read_json,
    save_modular,
    spec_from_json,
)
from fusionlab.core.construct import build_from_spec, twisted_double
from fusionlab.core.cyclo import root_of_unity, sqrt_integer
from fusionlab.core.errors import SpecError, ValidationFailure
from fusionlab.core.schemas import IsingSpec, ModularDataModel, TwistedDoubleSpec


def test_cyclotomic_model():
    x = sqrt_integer(2) - root_of_unity(3)
    m = cyclo_to_model(x)
    assert m.N == x.conductor
    assert cyclo_from_model(m) == x


def test_modular_file_is_canonical(tmp_path, ising):
    path = save_modular(tmp_path / "ising.json", ising, IsingSpec(family="ising", twist=1))
    text = path.read_text(encoding="utf-8")
    assert text.endswith("\n")
    assert "σ" in text
    again = dumps(modular_to_model(load_modular(path), load_spec_of(path)))
    assert again == text


def test_pointed_double_is_canonical(tmp_path):
    entry = build_from_spec(TwistedDoubleSpec(family="twisted_double", group="Z4", cocycle="I:1"))
    path = save_modular(tmp_path / "d.json", entry.data, entry.spec)
    data = read_json(path)
    assert data["D2"] == 16
    assert data["spec"]["cocycle"] == "I:1"
    assert dumps(modular_to_model(load_modular(path), load_spec_of(path))) == path.read_text(encoding="utf-8")


def test_d2_mismatch(tmp_path, ising):
    model = modular_to_model(ising)
    model.D2 = 5
    with pytest.raises(SpecError):
        modular_from_model(model)


def test_tampered_data_is_rejected(ising):
    model = modular_to_model(ising)
    model.S[1][2] = model.S[0][2]
    model.S[2][1] = model.S[0][2]
    with pytest.raises(ValidationFailure) as info:
        modular_from_model(model)
    assert info.value.violation.identity == "verlinde_character"
    assert modular_from_model(model, validate=False).rank == 3


def test_bad_fusion_triple(ising):
    model = modular_to_model(ising)
    model.N.append((0, 0, 7, 1))
    with pytest.raises(SpecError):
        modular_from_model(model)


@pytest.mark.parametrize("content", ["{not json", json.dumps({"labels": ["1"]}), json.dumps([1, 2])])
def test_malformed_files(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(SpecError):
        load_modular(path)


def test_missing_file(tmp_path):
    with pytest.raises(SpecError):
        read_json(tmp_path / "absent.json")


def test_spec_round_trip():
    spec = spec_from_json({"family": "product", "factors": [{"family": "ising", "twist": 3},
                                                            {"family": "metric_group", "group": "Z5",
                                                             "form": "nonresidue"}]})
    assert spec.factors[1].form == "nonresidue"
    with pytest.raises(SpecError):
        spec_from_json({"family": "unknown"})


def test_spec_inside_a_data_file(ising):
    spec = IsingSpec(family="ising", twist=3)
    model = ModularDataModel.model_validate_json(dumps(modular_to_model(ising, spec)))
    assert model.spec == spec
    assert isinstance(model.spec, IsingSpec)


def test_census_model():
    G = FiniteAbelianGroup.parse("Z5xZ5")
    result = twisted_double(G, cocycle_generator(G, "II"), max_rank=100)
    model = census_to_model(result)
    assert model.simples == 625
    assert model.modular_data.startswith("modular data not constructed")
    assert model.cocycle == "II:1"


def test_form_and_cocycle_tables():
    phi = standard_form(3)
    assert len(form_to_model(phi).values) == 3
    omega = cocycle_generator(FiniteAbelianGroup.cyclic(2), "I")
    model = cocycle_to_model(omega)
    assert len(model.values) == 8
    assert model.exponents == {"I": 1}


def test_atomic_write_leaves_no_temporaries(tmp_path):
    target = tmp_path / "nested" / "out.json"
    atomic_write(target, "one\n")
    atomic_write(target, "two\n")
    assert target.read_text(encoding="utf-8") == "two\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.json"]
