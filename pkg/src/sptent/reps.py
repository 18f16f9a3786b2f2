"""Projective unitary representations of finite Abelian groups.

A projective rep satisfies ``V(g) V(h) = omega(g, h) V(gh)`` for a 2-cocycle
``omega`` of unit-modulus phases.  The gauge-invariant fingerprint of the
cohomology class ``[omega]`` is the commutator bicharacter
``beta(g, h) = omega(g, h) / omega(h, g)``; for Abelian groups two cocycles
are cohomologous exactly when their bicharacters agree, and every irrep in a
class has the common dimension ``d = sqrt(|G| / |Rad(beta)|)``.

Constructive tools: the omega-twisted regular representation
``L(g) e_h = omega(g, h) e_{gh}`` decomposes into blocks of dimension d, one
of which serves as the canonical irrep; any projective rep splits as a
canonical-irrep factor tensored with a linear representation.
"""

from __future__ import annotations

import numpy as np

from .errors import (ClosureViolation, DimensionMismatch, GroupMismatch,
                     NonIntegerDimension)
from .groups import Charge, FiniteAbelianGroup, GroupElement
from .linalg import hermitize, random_hermitian, unitarity_defect

UNITARITY_TOL = 1e-10
CLOSURE_TOL = 1e-9
COCYCLE_TOL = 1e-10
BICHAR_TOL = 1e-8
WITNESS_TOL = 1e-9
RECONSTRUCT_TOL = 1e-8


class UnitaryRep:
    """Map g -> unitary matrix, closed under multiplication up to phase.

    The identity matrix is gauge-normalized to the exact identity on
    construction (allowed: V(e) must be a scalar multiple of the identity
    for any projective rep).
    """

    def __init__(self, group: FiniteAbelianGroup, matrices, validate: bool = True):
        self.group = group
        mats = {}
        dim = None
        for g in group.elements():
            m = np.asarray(matrices[g], dtype=complex)
            if dim is None:
                dim = m.shape[0]
            if m.shape != (dim, dim):
                raise DimensionMismatch(f"matrix for {g} has shape {m.shape}")
            mats[g] = m
        self.dim = dim
        e = group.identity
        c = np.trace(mats[e]) / dim
        if validate:
            if abs(abs(c) - 1) > 1e-6 or np.linalg.norm(mats[e] - c * np.eye(dim)) > 1e-6:
                raise ClosureViolation("V(identity) is not a unit scalar multiple of I")
        mats[e] = np.eye(dim, dtype=complex)
        if validate:
            for g, m in mats.items():
                defect = unitarity_defect(m)
                if defect > max(UNITARITY_TOL, 1e-12 * dim):
                    raise ClosureViolation(f"matrix for {g} not unitary (defect {defect:.2e})")
        self.matrices = mats

    def __call__(self, g: GroupElement) -> np.ndarray:
        return self.matrices[g]

    def __repr__(self):
        return f"UnitaryRep(group={self.group!r}, dim={self.dim})"

    @classmethod
    def from_function(cls, group: FiniteAbelianGroup, fn, validate: bool = True):
        return cls(group, {g: fn(g) for g in group.elements()}, validate=validate)


class FactorSystem:
    """2-cocycle omega(g, h) of a projective rep, normalized at the identity."""

    def __init__(self, group: FiniteAbelianGroup, table, validate: bool = True):
        self.group = group
        self.table = {k: complex(v) for k, v in table.items()}
        if validate:
            self.validate()

    def __call__(self, g: GroupElement, h: GroupElement) -> complex:
        return self.table[g, h]

    def validate(self, tol: float = COCYCLE_TOL) -> float:
        """Check normalization and the cocycle identity; return max residual."""
        G = self.group
        e = G.identity
        worst = 0.0
        for g in G.elements():
            worst = max(worst, abs(self.table[e, g] - 1), abs(self.table[g, e] - 1))
            for h in G.elements():
                if abs(abs(self.table[g, h]) - 1) > tol:
                    raise ClosureViolation("factor system entry is not unit modulus")
        for g in G.elements():
            for h in G.elements():
                gh = G.compose(g, h)
                for k in G.elements():
                    lhs = self.table[g, h] * self.table[gh, k]
                    rhs = self.table[h, k] * self.table[g, G.compose(h, k)]
                    worst = max(worst, abs(lhs - rhs))
        if worst > tol:
            raise ClosureViolation(f"cocycle identity violated ({worst:.2e})")
        return worst

    def conj(self) -> "FactorSystem":
        return FactorSystem(self.group, {k: np.conj(v) for k, v in self.table.items()},
                            validate=False)

    def mul(self, other: "FactorSystem") -> "FactorSystem":
        if other.group != self.group:
            raise GroupMismatch("factor systems on different groups")
        return FactorSystem(self.group, {k: v * other.table[k] for k, v in self.table.items()},
                            validate=False)

    def max_difference(self, other: "FactorSystem") -> float:
        return max(abs(self.table[k] - other.table[k]) for k in self.table)

    @classmethod
    def trivial(cls, group: FiniteAbelianGroup) -> "FactorSystem":
        return cls(group, {(g, h): 1.0 for g in group.elements() for h in group.elements()},
                   validate=False)


class Bicharacter:
    """beta(g, h) = omega(g, h) / omega(h, g); coboundary-invariant."""

    def __init__(self, group: FiniteAbelianGroup, table):
        self.group = group
        self.table = {k: complex(v) for k, v in table.items()}

    def __call__(self, g: GroupElement, h: GroupElement) -> complex:
        return self.table[g, h]

    def max_difference(self, other: "Bicharacter") -> float:
        return max(abs(self.table[k] - other.table[k]) for k in self.table)

    def is_trivial(self, tol: float = BICHAR_TOL) -> bool:
        return all(abs(v - 1) <= tol for v in self.table.values())

    def radical(self, tol: float = 1e-6) -> list[GroupElement]:
        """Elements pairing trivially with everything: Rad = {g : beta(g, .) = 1}."""
        G = self.group
        return [g for g in G.elements()
                if all(abs(self.table[g, h] - 1) <= tol for h in G.elements())]


class GaugePhases:
    """Witness theta for a coboundary: omega'(g,h)/omega(g,h) = e^{i(theta(gh)-theta(g)-theta(h))}."""

    def __init__(self, group: FiniteAbelianGroup, theta):
        self.group = group
        self.theta = {g: float(t) % (2 * np.pi) for g, t in theta.items()}

    def __call__(self, g: GroupElement) -> float:
        return self.theta[g]

    def coboundary(self) -> FactorSystem:
        G = self.group
        tab = {}
        for g in G.elements():
            for h in G.elements():
                gh = G.compose(g, h)
                tab[g, h] = np.exp(1j * (self.theta[gh] - self.theta[g] - self.theta[h]))
        return FactorSystem(G, tab, validate=False)


def factor_system(rep: UnitaryRep) -> FactorSystem:
    """Extract omega(g, h) as the unique unit scalar with V(g)V(h) = omega V(gh)."""
    G = rep.group
    table = {}
    for g in G.elements():
        Vg = rep(g)
        for h in G.elements():
            gh = G.compose(g, h)
            prod = Vg @ rep(h)
            s = np.trace(rep(gh).conj().T @ prod) / rep.dim
            if abs(s) < 0.5:
                raise ClosureViolation(f"no unit scalar relates V({g})V({h}) to V({g}{h})")
            s /= abs(s)
            defect = np.linalg.norm(prod - s * rep(gh))
            if defect > CLOSURE_TOL * np.sqrt(rep.dim):
                raise ClosureViolation(
                    f"closure defect {defect:.2e} at ({g},{h}): rep is not projective")
            table[g, h] = complex(s)
    fs = FactorSystem(G, table, validate=False)
    fs.validate()
    return fs


def commutator_bicharacter(omega: FactorSystem) -> Bicharacter:
    G = omega.group
    return Bicharacter(G, {(g, h): omega(g, h) / omega(h, g)
                           for g in G.elements() for h in G.elements()})


def twisted_regular_rep(omega: FactorSystem) -> UnitaryRep:
    """L(g) e_h = omega(g, h) e_{gh} on C^|G|; factor system is omega exactly."""
    G = omega.group
    elems = list(G.elements())
    index = {g: i for i, g in enumerate(elems)}
    mats = {}
    for g in elems:
        m = np.zeros((G.order, G.order), dtype=complex)
        for h in elems:
            m[index[G.compose(g, h)], index[h]] = omega(g, h)
        mats[g] = m
    return UnitaryRep(G, mats)


def _symmetrized_random_commutant(rep: UnitaryRep, rng: np.random.Generator) -> np.ndarray:
    """Group-average of a random Hermitian: commutes with every V(g) exactly."""
    x = random_hermitian(rep.dim, rng)
    acc = np.zeros_like(x)
    for g in rep.group.elements():
        V = rep(g)
        acc += V @ x @ V.conj().T
    return hermitize(acc / rep.group.order)


def _eigenvalue_clusters(w: np.ndarray, rel_gap: float = 1e-6) -> list[list[int]]:
    scale = max(1.0, float(np.max(np.abs(w))))
    clusters = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > rel_gap * scale:
            clusters.append([])
        clusters[-1].append(i)
    return clusters


def regular_rep_block_dimension(omega: FactorSystem, seed: int = 0) -> int:
    """Common invariant-block dimension of the omega-twisted regular rep.

    Independent of the radical formula: decomposes the twisted regular
    representation with a random commutant element and reads off the block
    size (all blocks must agree).
    """
    L = twisted_regular_rep(omega)
    for attempt in range(8):
        rng = np.random.default_rng(seed + attempt)
        w, _ = np.linalg.eigh(_symmetrized_random_commutant(L, rng))
        sizes = {len(c) for c in _eigenvalue_clusters(w)}
        if len(sizes) == 1:
            return sizes.pop()
    raise NonIntegerDimension("twisted regular rep did not split into equal blocks")


def irrep_dimension(omega: FactorSystem) -> int:
    """d = sqrt(|G| / |Rad(beta)|); any irrep of the class has this dimension."""
    beta = commutator_bicharacter(omega)
    rad = beta.radical()
    ratio = omega.group.order / len(rad)
    d = round(np.sqrt(ratio))
    if abs(d * d - ratio) > 1e-6:
        raise NonIntegerDimension(
            f"|G|/|Rad| = {ratio} is not a perfect square; corrupted cocycle")
    return int(d)


def _one_dim_projective_rep(delta: FactorSystem) -> dict[GroupElement, complex]:
    """Phase function phi with phi(g) phi(h) = delta(g, h) phi(gh).

    Exists exactly when the bicharacter of delta is trivial (the twisted
    group algebra is then commutative); found as a common eigenvector of the
    delta-twisted regular representation.
    """
    G = delta.group
    L = twisted_regular_rep(delta)
    for attempt in range(8):
        rng = np.random.default_rng(attempt)
        coeff = rng.normal(size=G.order) + 1j * rng.normal(size=G.order)
        T = np.zeros((G.order, G.order), dtype=complex)
        for c, g in zip(coeff, G.elements()):
            T += c * L(g) + np.conj(c) * L(g).conj().T
        _, U = np.linalg.eigh(hermitize(T))
        for col in range(G.order):
            v = U[:, col]
            phi = {}
            ok = True
            for g in G.elements():
                lam = np.vdot(v, L(g) @ v)
                if abs(abs(lam) - 1) > 1e-8 or np.linalg.norm(L(g) @ v - lam * v) > 1e-8:
                    ok = False
                    break
                phi[g] = complex(lam / abs(lam))
            if ok:
                return phi
    raise ClosureViolation("no joint eigenvector found: bicharacter not trivial?")


def cohomology_equivalent(omega1: FactorSystem, omega2: FactorSystem,
                          ) -> tuple[bool, GaugePhases | None]:
    """Decide whether omega1 / omega2 is a coboundary; return a witness if so.

    Equality of commutator bicharacters decides the class for Abelian groups;
    the witness theta is constructed explicitly and verified, so a mismatch
    between the two methods cannot pass silently.
    """
    if omega1.group != omega2.group:
        raise GroupMismatch("cocycles on different groups")
    G = omega1.group
    b1 = commutator_bicharacter(omega1)
    b2 = commutator_bicharacter(omega2)
    if b1.max_difference(b2) > BICHAR_TOL:
        return False, None
    delta = omega1.mul(omega2.conj())
    if all(abs(v - 1) <= 1e-12 for v in delta.table.values()):
        return True, GaugePhases(G, {g: 0.0 for g in G.elements()})
    phi = _one_dim_projective_rep(delta)
    theta = {g: float(-np.angle(phi[g])) for g in G.elements()}
    witness = GaugePhases(G, theta)
    residual = delta.max_difference(witness.coboundary())
    if residual > WITNESS_TOL:
        raise ClosureViolation(
            f"bicharacters agree but no coboundary witness found ({residual:.2e})")
    return True, witness


def canonical_irrep(omega: FactorSystem, seed: int = 0) -> UnitaryRep:
    """An irreducible projective rep whose factor system equals omega.

    For d > 1 a block of the omega-twisted regular representation is
    extracted with a random commutant element; restriction to an invariant
    subspace reproduces omega exactly.  For d = 1 the coboundary witness
    against the trivial cocycle supplies the phase function directly, so the
    trivial class yields the trivial rep.
    """
    G = omega.group
    d = irrep_dimension(omega)
    if d == 1:
        ok, witness = cohomology_equivalent(omega, FactorSystem.trivial(G))
        if not ok:
            raise NonIntegerDimension("d=1 cocycle is not a coboundary")
        mats = {g: np.array([[np.exp(-1j * witness(g))]]) for g in G.elements()}
        return UnitaryRep(G, mats)
    L = twisted_regular_rep(omega)
    last = None
    for attempt in range(8):
        rng = np.random.default_rng(seed + attempt)
        w, U = np.linalg.eigh(_symmetrized_random_commutant(L, rng))
        clusters = _eigenvalue_clusters(w)
        if any(len(c) != d for c in clusters):
            continue
        Q = U[:, clusters[0]]
        mats = {g: Q.conj().T @ L(g) @ Q for g in G.elements()}
        rep = UnitaryRep(G, mats)
        last = factor_system(rep).max_difference(omega)
        if last <= WITNESS_TOL and _has_trivial_commutant(rep, rng):
            return rep
    raise ClosureViolation(f"canonical irrep extraction failed (residual {last})")


def _has_trivial_commutant(rep: UnitaryRep, rng: np.random.Generator,
                           draws: int = 2, tol: float = 1e-8) -> bool:
    for _ in range(draws):
        xbar = _symmetrized_random_commutant(rep, rng)
        c = np.trace(xbar) / rep.dim
        if np.linalg.norm(xbar - c * np.eye(rep.dim)) > tol * max(1.0, abs(c)):
            return False
    return True


def conjugate_rep(rep: UnitaryRep) -> UnitaryRep:
    return UnitaryRep(rep.group, {g: rep(g).conj() for g in rep.group.elements()})


def tensor_rep(rep1: UnitaryRep, rep2: UnitaryRep) -> UnitaryRep:
    if rep1.group != rep2.group:
        raise GroupMismatch("tensor of reps on different groups")
    return UnitaryRep(rep1.group,
                      {g: np.kron(rep1(g), rep2(g)) for g in rep1.group.elements()})


def equal_up_to_character(u: UnitaryRep, v: UnitaryRep,
                          ) -> tuple[np.ndarray, Charge] | None:
    """Witness (W, kappa) with u(g) = e^{i kappa(g)} W v(g) W†, if one exists.

    Requires irreducible inputs of equal dimension whose factor systems agree
    entrywise: taking factor systems of both sides of the witness equation
    forces omega_u = omega_v exactly, so cocycles that are merely cohomologous
    admit no such witness.  The witness vector is a joint eigenvector of the
    linear rep u tensor v*, maximally entangled by Schur's lemma.
    """
    if u.group != v.group:
        raise GroupMismatch("reps on different groups")
    G = u.group
    if u.dim != v.dim:
        return None
    wu = factor_system(u)
    wv = factor_system(v)
    bu = commutator_bicharacter(wu)
    if bu.max_difference(commutator_bicharacter(wv)) > BICHAR_TOL:
        return None
    if wu.max_difference(wv) > 1e-9:
        return None
    d = u.dim
    lam = {g: np.kron(u(g), v(g).conj()) for g in G.elements()}
    for eta in G.charges():
        P = np.zeros((d * d, d * d), dtype=complex)
        for g in G.elements():
            P += np.conj(G.character_value(eta, g)) * lam[g]
        P /= G.order
        if np.trace(P).real < 0.5:
            continue
        w, U = np.linalg.eigh(hermitize(P))
        vec = U[:, -1]
        if w[-1] < 1 - 1e-8:
            continue
        theta = vec.reshape(d, d)
        sv = np.linalg.svd(theta, compute_uv=False)
        if np.max(np.abs(sv - 1 / np.sqrt(d))) > 1e-8:
            continue
        W = theta * np.sqrt(d)
        worst = max(np.linalg.norm(u(g) - G.character_value(eta, g) * W @ v(g) @ W.conj().T)
                    for g in G.elements())
        if worst <= RECONSTRUCT_TOL * np.sqrt(d):
            return W, eta
    return None


def decompose_projective_rep(T: UnitaryRep, seed: int = 0,
                             ) -> tuple[np.ndarray, UnitaryRep, UnitaryRep]:
    """Split T(g) = W [t(g) tensor t'(g)] W† with t canonical and t' linear.

    Invariant blocks of T are found from a random commutant element; each
    block is matched to the canonical irrep up to a character, and those
    characters assemble the diagonal linear factor t'.
    """
    omega = factor_system(T)
    d = irrep_dimension(omega)
    if T.dim % d != 0:
        raise DimensionMismatch(f"dim {T.dim} not divisible by class dimension {d}")
    n = T.dim // d
    G = T.group
    t = canonical_irrep(omega, seed=seed)
    if d == 1:
        # t is a phase function with factor system omega; dividing it out
        # leaves a linear rep, so W = identity does the job
        tprime = UnitaryRep(G, {g: T(g) * np.conj(t(g)[0, 0]) for g in G.elements()})
        return np.eye(T.dim, dtype=complex), t, tprime
    for attempt in range(8):
        rng = np.random.default_rng(seed + attempt)
        w, U = np.linalg.eigh(_symmetrized_random_commutant(T, rng))
        clusters = _eigenvalue_clusters(w)
        if any(len(c) != d for c in clusters) or len(clusters) != n:
            continue
        cols = []
        chars = []
        ok = True
        for cluster in clusters:
            Q = U[:, cluster]
            block = UnitaryRep(G, {g: Q.conj().T @ T(g) @ Q for g in G.elements()})
            witness = equal_up_to_character(block, t)
            if witness is None:
                ok = False
                break
            Wb, eta = witness
            cols.append(Q @ Wb)
            chars.append(eta)
        if not ok:
            continue
        # column (i, a) of W is the i-th column of the a-th aligned block
        W = np.zeros((T.dim, T.dim), dtype=complex)
        for a, Qt in enumerate(cols):
            for i in range(d):
                W[:, i * n + a] = Qt[:, i]
        tprime = UnitaryRep(G, {
            g: np.diag([G.character_value(chars[a], g) for a in range(n)])
            for g in G.elements()})
        worst = max(
            np.linalg.norm(T(g) - W @ np.kron(t(g), tprime(g)) @ W.conj().T)
            for g in G.elements())
        if worst <= RECONSTRUCT_TOL * np.sqrt(T.dim) and unitarity_defect(W) < 1e-9:
            return W, t, tprime
    raise ClosureViolation("projective rep decomposition failed to converge")


def character_rep(group: FiniteAbelianGroup, kappa: Charge) -> UnitaryRep:
    """1-dimensional linear rep g -> e^{i kappa(g)}."""
    kappa = group.charge(kappa)
    return UnitaryRep(group, {g: np.array([[group.character_value(kappa, g)]])
                              for g in group.elements()})


def isotypic_projector(rep: UnitaryRep, kappa: Charge) -> np.ndarray:
    """Charge projector of a linear rep: (1/|G|) sum_g conj(chi_kappa(g)) V(g)."""
    G = rep.group
    P = np.zeros((rep.dim, rep.dim), dtype=complex)
    for g in G.elements():
        P += np.conj(G.character_value(kappa, g)) * rep(g)
    return P / G.order


def pauli_rep() -> UnitaryRep:
    """Z2 x Z2 projective rep V(a, b) = Z^a X^b on a qubit (Haldane class)."""
    G = FiniteAbelianGroup([2, 2])
    Z = np.diag([1.0, -1.0]).astype(complex)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    return UnitaryRep(G, {(a, b): np.linalg.matrix_power(Z, a) @ np.linalg.matrix_power(X, b)
                          for (a, b) in G.elements()})


def heisenberg_rep() -> UnitaryRep:
    """Z3 x Z3 clock/shift rep V(a, b) = Z3^a X3^b on a qutrit."""
    G = FiniteAbelianGroup([3, 3])
    zeta = np.exp(2j * np.pi / 3)
    Z3 = np.diag([zeta ** k for k in range(3)])
    X3 = np.roll(np.eye(3, dtype=complex), 1, axis=0)
    return UnitaryRep(G, {(a, b): np.linalg.matrix_power(Z3, a) @ np.linalg.matrix_power(X3, b)
                          for (a, b) in G.elements()})


def rep_preset(name: str, group: FiniteAbelianGroup | None = None) -> UnitaryRep:
    """Look up a named representation preset.

    Supported: "pauli-z2z2", "heisenberg-z3z3", "char:<residues>" (comma or
    space separated dual residues; requires the group).
    """
    if name == "pauli-z2z2":
        return pauli_rep()
    if name == "heisenberg-z3z3":
        return heisenberg_rep()
    if name.startswith("char:"):
        if group is None:
            raise GroupMismatch("character preset requires a group")
        body = name[len("char:"):].replace(",", " ")
        residues = tuple(int(x) for x in body.split())
        return character_rep(group, residues)
    raise KeyError(f"unknown rep preset {name!r}")
