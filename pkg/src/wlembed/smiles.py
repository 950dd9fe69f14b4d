"""Parser for a practical subset of SMILES.

Supported: organic-subset atoms (plus aromatic lowercase b, c, n, o, s, p),
bracket atoms reduced to their element, bonds ``- = #``, branches and ring
closures (``1``-``9`` and ``%nn``). Hydrogens are implicit and never become
nodes. Bond orders are kept on the graph but ignored downstream.
"""
from __future__ import annotations

import re
from types import MappingProxyType

from .errors import DanglingRingClosure, EmptyInput, SmilesError, UnbalancedParenthesis, UnknownAtom
from .graph import LabeledMultigraph, build_graph

DEFAULT_ALPHABET = MappingProxyType({
    "C": 1, "N": 2, "O": 3, "S": 4, "F": 5, "Cl": 6, "Br": 7, "I": 8, "P": 9,
})

_AROMATIC = {"b": "B", "c": "C", "n": "N", "o": "O", "s": "S", "p": "P"}
_BOND_ORDER = {"-": 1, "=": 2, "#": 3}
_BRACKET_ELEMENT = re.compile(r"\d*([A-Z][a-z]?|[a-z][a-z]?)")


def _element(symbol: str, alphabet) -> int:
    if symbol in _AROMATIC:
        symbol = _AROMATIC[symbol]
    elif symbol in ("se", "as"):
        symbol = symbol.capitalize()
    if symbol not in alphabet:
        raise UnknownAtom(f"atom {symbol!r} is not in the alphabet")
    return alphabet[symbol]


def _bracket(text: str, pos: int, alphabet) -> tuple[int, int]:
    end = text.find("]", pos)
    if end < 0:
        raise SmilesError(f"unterminated bracket atom at position {pos}")
    m = _BRACKET_ELEMENT.match(text, pos + 1, end)
    if not m:
        raise UnknownAtom(f"cannot read an element in {text[pos:end + 1]!r}")
    return _element(m.group(1), alphabet), end + 1


def parse_smiles(text: str, alphabet=DEFAULT_ALPHABET) -> LabeledMultigraph:
    """Parse one molecule; nodes follow the atoms' reading order.

    >>> g = parse_smiles("C1CC1")
    >>> g.num_nodes, g.edges
    (3, ((0, 1), (1, 2), (0, 2)))
    """
    if not text or not text.strip():
        raise EmptyInput("empty SMILES string")
    text = text.strip()
    labels: list[int] = []
    edges: list[tuple[int, int]] = []
    orders: list[int] = []
    stack: list[int] = []
    rings: dict[int, tuple[int, int | None]] = {}
    prev: int | None = None
    bond: int | None = None
    pos = 0

    def add_atom(label: int):
        nonlocal prev, bond
        labels.append(label)
        cur = len(labels) - 1
        if prev is not None:
            edges.append((prev, cur))
            orders.append(bond or 1)
        prev, bond = cur, None

    while pos < len(text):
        ch = text[pos]
        if ch == "[":
            label, pos = _bracket(text, pos, alphabet)
            add_atom(label)
            continue
        if ch in ("C", "B") and text[pos:pos + 2] in ("Cl", "Br"):
            add_atom(_element(text[pos:pos + 2], alphabet))
            pos += 2
            continue
        if ch.isalpha():
            add_atom(_element(ch, alphabet))
            pos += 1
            continue
        if ch in _BOND_ORDER:
            bond = _BOND_ORDER[ch]
        elif ch == "(":
            if prev is None:
                raise UnbalancedParenthesis(f"branch opened before any atom at position {pos}")
            stack.append(prev)
        elif ch == ")":
            if not stack:
                raise UnbalancedParenthesis(f"unmatched ')' at position {pos}")
            prev = stack.pop()
        elif ch.isdigit() or ch == "%":
            if ch == "%":
                digits = text[pos + 1:pos + 3]
                if len(digits) != 2 or not digits.isdigit():
                    raise SmilesError(f"'%' must be followed by two digits at position {pos}")
                num = int(digits)
                pos += 2
            else:
                num = int(ch)
            if prev is None:
                raise DanglingRingClosure(f"ring bond {num} before any atom")
            if num in rings:
                other, order = rings.pop(num)
                if other == prev:
                    raise SmilesError(f"ring bond {num} closes on its own atom")
                edges.append((other, prev))
                orders.append(bond or order or 1)
                bond = None
            else:
                rings[num] = (prev, bond)
                bond = None
        elif ch == ".":
            raise SmilesError("multi-fragment SMILES ('.') is not supported")
        elif ch in "/\\":
            pass  # stereo bonds read as single bonds
        else:
            raise SmilesError(f"unexpected character {ch!r} at position {pos}")
        pos += 1

    if stack:
        raise UnbalancedParenthesis(f"{len(stack)} unclosed branch(es)")
    if rings:
        raise DanglingRingClosure(f"unclosed ring bond(s) {sorted(rings)}")
    if bond is not None:
        raise SmilesError("trailing bond symbol")
    return build_graph(len(labels), labels, edges, K=max(alphabet.values()), bond_orders=orders)
