import pytest

from relu_landscape.errors import UnknownFamilyError
from relu_landscape.families import FamilyId, catalog


def test_catalog_contents():
    labels = [f.label for f in catalog()]
    assert labels == ["I_p0_m0", "I_p0_m1", "I_p1_m0", "I_p1_m1", "I_p1_m2", "II_p1_m0", "II_p1_m1", "II_p1_m2"]


@pytest.mark.parametrize("label,kappa", [("I_p1_m1", 4), ("I_p1_m2", 4), ("I_p1_m0", 2), ("II_p1_m2", 2), ("I_p0_m1", 2)])
def test_series_base(label, kappa):
    assert FamilyId.parse(label).kappa == kappa


@pytest.mark.parametrize("args", [("II", 0, 0), ("I", 0, 2), ("I", 2, 0), ("III", 1, 0), ("I", "x", 0)])
def test_unknown_family_rejected(args):
    with pytest.raises(UnknownFamilyError):
        FamilyId(*args)


def test_parse_round_trip_and_errors():
    for fam in catalog():
        assert FamilyId.parse(fam.label) == fam
    with pytest.raises(UnknownFamilyError):
        FamilyId.parse("I-p1-m1")


def test_string_integers_are_accepted():
    assert FamilyId("ii", "1", "2") == FamilyId("II", 1, 2)
