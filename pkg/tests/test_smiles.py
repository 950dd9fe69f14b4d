import pytest

from wlembed.errors import DanglingRingClosure, EmptyInput, SmilesError, UnbalancedParenthesis, UnknownAtom
from wlembed.smiles import parse_smiles


@pytest.mark.parametrize("text,n,edges", [
    ("C", 1, set()),
    ("CCO", 3, {(0, 1), (1, 2)}),
    ("C1CC1", 3, {(0, 1), (1, 2), (0, 2)}),
    ("c1ccccc1", 6, {(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)}),
])
def test_examples(text, n, edges):
    g = parse_smiles(text)
    assert g.num_nodes == n
    assert set(g.edges) == edges
    assert len(g.edges) == len(edges)


def test_labels_and_bond_orders():
    g = parse_smiles("CC(=O)O")
    assert g.labels == (1, 1, 3, 3)
    assert g.edges == ((0, 1), (1, 2), (1, 3))
    assert g.bond_orders == (1, 2, 1)
    g = parse_smiles("ClC#N")
    assert g.labels == (6, 1, 2)
    assert g.bond_orders == (1, 3)


def test_aromatic_maps_to_element():
    assert parse_smiles("c1ccncc1").labels == parse_smiles("C1CCNCC1").labels


def test_brackets_and_percent_rings():
    g = parse_smiles("[NH4+]")
    assert g.labels == (2,) and g.num_nodes == 1
    g = parse_smiles("C%12CCC%12")
    assert (0, 3) in g.edges and len(g.edges) == 4
    assert parse_smiles("[13CH3]O").labels == (1, 3)


def test_branches_return_to_anchor():
    g = parse_smiles("CC(C)(C)C")
    assert sorted(g.degrees) == [1, 1, 1, 1, 4]


def test_deterministic_and_connected():
    text = "CC1=CC(=O)c2ccccc2C1=O"
    a, b = parse_smiles(text), parse_smiles(text)
    assert a == b
    assert a.is_connected()


@pytest.mark.parametrize("text,err", [
    ("", EmptyInput),
    ("   ", EmptyInput),
    ("CX", UnknownAtom),
    ("[Xe]", UnknownAtom),
    ("C(C", UnbalancedParenthesis),
    ("CC)", UnbalancedParenthesis),
    ("(C)", UnbalancedParenthesis),
    ("C1CC", DanglingRingClosure),
    ("1CC", DanglingRingClosure),
    ("CC.O", SmilesError),
    ("CC=", SmilesError),
])
def test_errors(text, err):
    with pytest.raises(err):
        parse_smiles(text)
