"""Finite Abelian groups as products of cyclic factors.

A group is specified by its cyclic orders ``(n_1, ..., n_k)``; elements and
charges are integer tuples with the j-th entry reduced mod ``n_j``.  Charges
label the characters of the dual group: a charge ``kappa`` evaluates on an
element ``g`` as ``exp(2 pi i sum_j kappa_j g_j / n_j)``.  Both kinds of
tuple are immutable and safe to share.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

GroupElement = tuple[int, ...]
Charge = tuple[int, ...]


class FiniteAbelianGroup:
    """Product of cyclic groups Z_{n_1} x ... x Z_{n_k}.

    Elements compose by componentwise addition mod n_j; charges add the same
    way in the dual group.  The presentation is taken as given: isomorphic
    presentations are not canonicalized.
    """

    def __init__(self, cyclic_orders):
        orders = tuple(int(n) for n in cyclic_orders)
        if not orders or any(n < 1 for n in orders):
            raise ValueError(f"cyclic orders must be >= 1, got {orders}")
        self.cyclic_orders = orders
        self.order = math.prod(orders)
        self.rank = len(orders)

    def __repr__(self):
        return f"FiniteAbelianGroup({list(self.cyclic_orders)})"

    def __eq__(self, other):
        return (isinstance(other, FiniteAbelianGroup)
                and self.cyclic_orders == other.cyclic_orders)

    def __hash__(self):
        return hash(("FiniteAbelianGroup", self.cyclic_orders))

    @property
    def identity(self) -> GroupElement:
        return (0,) * self.rank

    @property
    def trivial_charge(self) -> Charge:
        return (0,) * self.rank

    def element(self, residues) -> GroupElement:
        """Reduce an integer sequence into a valid element tuple."""
        res = tuple(int(r) for r in residues)
        if len(res) != self.rank:
            raise DimensionMismatch(
                f"expected {self.rank} residues, got {len(res)}")
        return tuple(r % n for r, n in zip(res, self.cyclic_orders))

    # charges live in the dual group, which has the same presentation
    charge = element

    def elements(self):
        """Iterate all group elements in lexicographic order."""
        return itertools.product(*[range(n) for n in self.cyclic_orders])

    charges = elements

    def _check(self, x) -> None:
        if len(x) != self.rank:
            raise DimensionMismatch(
                f"tuple of length {len(x)} invalid for rank-{self.rank} group")

    def compose(self, g: GroupElement, h: GroupElement) -> GroupElement:
        self._check(g)
        self._check(h)
        return tuple((a + b) % n for a, b, n in zip(g, h, self.cyclic_orders))

    def inverse(self, g: GroupElement) -> GroupElement:
        self._check(g)
        return tuple((-a) % n for a, n in zip(g, self.cyclic_orders))

    def power(self, g: GroupElement, k: int) -> GroupElement:
        self._check(g)
        return tuple((a * k) % n for a, n in zip(g, self.cyclic_orders))

    def element_order(self, g: GroupElement) -> int:
        self._check(g)
        return math.lcm(*(n // math.gcd(a, n) for a, n in zip(g, self.cyclic_orders)))

    def character_value(self, kappa: Charge, g: GroupElement) -> complex:
        """exp(2 pi i sum_j kappa_j g_j / n_j), a unit-modulus complex."""
        self._check(kappa)
        self._check(g)
        phase = sum(k * a / n for k, a, n in zip(kappa, g, self.cyclic_orders))
        return complex(np.exp(2j * np.pi * phase))

    def add_charges(self, k1: Charge, k2: Charge) -> Charge:
        self._check(k1)
        self._check(k2)
        return tuple((a + b) % n for a, b, n in zip(k1, k2, self.cyclic_orders))

    def negate_charge(self, kappa: Charge) -> Charge:
        return self.inverse(kappa)


@dataclass(frozen=True)
class SubgroupEmbedding:
    """A group isomorphic to a generated subgroup, plus the injection into G.

    ``embedding`` maps each element of ``subgroup`` to its image in the
    parent group; the image set is closed under composition.
    """

    parent: FiniteAbelianGroup
    subgroup: FiniteAbelianGroup
    embedding: dict[GroupElement, GroupElement]

    def embed(self, h: GroupElement) -> GroupElement:
        return self.embedding[self.subgroup.element(h)]

    def image(self) -> list[GroupElement]:
        return sorted(self.embedding.values())


def _closure(G: FiniteAbelianGroup, generators) -> set[GroupElement]:
    gens = [G.element(g) for g in generators]
    seen = {G.identity}
    frontier = [G.identity]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = G.compose(x, g)
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return seen


def _cyclic_basis(elems, add, neg, zero):
    """Decompose a finite abelian group given as a closed set of hashables.

    Returns ``[(b_1, m_1), (b_2, m_2), ...]`` with the group equal to the
    internal direct sum of the cyclic subgroups <b_i>, m_1 >= m_2 >= ... and
    m_{i+1} | m_i.  Classic peeling construction: split off a maximal-order
    cyclic subgroup, decompose the quotient on coset representatives, and
    correct each lift so its order matches its coset's order.
    """
    if len(elems) == 1:
        return []

    def order_of(a):
        x, n = a, 1
        while x != zero:
            x = add(x, a)
            n += 1
        return n

    orders = {e: order_of(e) for e in elems}
    a = min(sorted(elems), key=lambda e: -orders[e])
    m = orders[a]
    cyc = [zero]
    for _ in range(m - 1):
        cyc.append(add(cyc[-1], a))
    if m == len(elems):
        return [(a, m)]

    cyc_index = {c: s for s, c in enumerate(cyc)}
    coset_of = {}
    for e in sorted(elems):
        if e in coset_of:
            continue
        members = [add(e, c) for c in cyc]
        canon = min(members)
        for x in members:
            coset_of[x] = canon

    def q_add(x, y):
        return coset_of[add(x, y)]

    def q_neg(x):
        return coset_of[neg(x)]

    quotient = set(coset_of.values())
    basis = [(a, m)]
    for cbar, mi in _cyclic_basis(quotient, q_add, q_neg, coset_of[zero]):
        x = cbar
        y = x
        for _ in range(mi - 1):
            y = add(y, x)
        # y = mi * x lies in <a>; maximality of m forces mi | s below
        s = cyc_index[y]
        if s % mi != 0:
            raise AssertionError("lift correction failed; not an abelian group?")
        corr = zero
        for _ in range(s // mi):
            corr = add(corr, a)
        basis.append((add(x, neg(corr)), mi))
    return basis


def subgroup_embedding(G: FiniteAbelianGroup, generators) -> SubgroupEmbedding:
    """Group isomorphic to the subgroup generated by ``generators``.

    The returned presentation has non-increasing cyclic orders with a
    divisibility chain, and the embedding sends the j-th unit vector to the
    j-th basis element of the subgroup inside G.
    """
    elems = _closure(G, generators)
    basis = _cyclic_basis(elems, G.compose, G.inverse, G.identity)
    if not basis:
        sub = FiniteAbelianGroup([1])
        return SubgroupEmbedding(G, sub, {(0,): G.identity})
    sub = FiniteAbelianGroup([m for _, m in basis])
    table = {}
    for h in sub.elements():
        img = G.identity
        for coeff, (b, _) in zip(h, basis):
            img = G.compose(img, G.power(b, coeff))
        table[h] = img
    if len(set(table.values())) != sub.order or set(table.values()) != elems:
        raise AssertionError("subgroup decomposition is not bijective")
    return SubgroupEmbedding(G, sub, table)
