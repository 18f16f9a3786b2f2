"""Chains of sites with on-site symmetry reps, dense pure states, fixed
points, regions, and symmetric low-depth circuits.

Amplitude layout: site 0 is the slowest index (C order over per-site axes).
Fixed points are built on rings from a virtual rep V and a bond Schmidt
vector lambda: the bond state pairs site i's right virtual slot with site
i+1's left virtual slot, and the canonical isometry is the identity
embedding, so each physical site has dimension dim(V)^2 and carries the
on-site rep V tensor V*.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (CapExceeded, DimensionMismatch, GroupMismatch,
                     IntertwinerViolation, InvariantViolation,
                     LambdaNotInvariant, NonPositiveSchmidt, RegionError)
from .groups import GroupElement
from .linalg import apply_to_axes, random_unitary
from .reps import UnitaryRep, conjugate_rep, isotypic_projector, tensor_rep

DENSE_CAP = 2 ** 22
SYMMETRY_TOL = 1e-9
GATE_SYMMETRY_TOL = 1e-10


class Chain:
    """Ordered sites, each with a local dimension and an on-site linear rep."""

    def __init__(self, site_reps: list[UnitaryRep], boundary: str = "ring"):
        if boundary not in ("ring", "open"):
            raise ValueError(f"boundary must be 'ring' or 'open', got {boundary!r}")
        if not site_reps:
            raise ValueError("chain needs at least one site")
        group = site_reps[0].group
        for r in site_reps:
            if r.group != group:
                raise GroupMismatch("all site reps must share one group")
        self.site_reps = list(site_reps)
        self.boundary = boundary
        self.group = group
        self.local_dims = tuple(r.dim for r in site_reps)
        self.total_dim = math.prod(self.local_dims)
        if self.total_dim > DENSE_CAP:
            raise CapExceeded(
                f"total dimension {self.total_dim} exceeds the dense cap {DENSE_CAP}")

    @property
    def n_sites(self) -> int:
        return len(self.site_reps)

    def site_rep(self, site: int) -> UnitaryRep:
        return self.site_reps[site]

    def __repr__(self):
        return (f"Chain(n_sites={self.n_sites}, local_dims={self.local_dims}, "
                f"boundary={self.boundary!r})")


def uniform_chain(n_sites: int, site_rep: UnitaryRep, boundary: str = "ring") -> Chain:
    return Chain([site_rep] * n_sites, boundary=boundary)


class PureState:
    """Dense complex amplitude vector over a chain."""

    def __init__(self, chain: Chain, amplitudes: np.ndarray, validate: bool = True):
        amp = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amp.size != chain.total_dim:
            raise DimensionMismatch(
                f"amplitude length {amp.size} != chain dimension {chain.total_dim}")
        if validate:
            norm = np.linalg.norm(amp)
            if abs(norm - 1) > 1e-12:
                raise InvariantViolation(f"state norm {norm} deviates from 1")
        self.chain = chain
        self.amplitudes = amp

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.chain.local_dims)

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def apply_site_operators(state: PureState, ops: dict[int, np.ndarray]) -> PureState:
    """Apply one single-site operator per listed site; no norm assumption."""
    t = state.tensor()
    for site, op in ops.items():
        t = np.moveaxis(np.tensordot(op, t, axes=([1], [site])), 0, site)
    return PureState(state.chain, t.reshape(-1), validate=False)


def apply_symmetry(state: PureState, g: GroupElement) -> PureState:
    return apply_site_operators(
        state, {s: state.chain.site_rep(s)(g) for s in range(state.chain.n_sites)})


def global_symmetry_residual(state: PureState) -> float:
    """max_g || U(g)^{tensor N} psi - psi ||."""
    return max(
        float(np.linalg.norm(apply_symmetry(state, g).amplitudes - state.amplitudes))
        for g in state.chain.group.elements())


# -------------------------------------------------------------- regions

@dataclass(frozen=True)
class Region:
    """A set of site indices with an optional role tag."""

    sites: tuple[int, ...]
    role: str = ""

    def __init__(self, sites, role: str = ""):
        object.__setattr__(self, "sites", tuple(sorted(set(int(s) for s in sites))))
        object.__setattr__(self, "role", role)

    def __len__(self):
        return len(self.sites)

    def __contains__(self, site):
        return site in self.sites

    def as_set(self) -> frozenset:
        return frozenset(self.sites)


def _ring_arc(sites: set[int], n: int) -> tuple[int, int] | None:
    """(start, length) if sites form a contiguous arc mod n, else None."""
    if not sites:
        return None
    if len(sites) == n:
        return 0, n
    boundaries = [s for s in sites if (s + 1) % n not in sites]
    if len(boundaries) != 1:
        return None
    end = boundaries[0]
    start = (end - len(sites) + 1) % n
    arc = {(start + k) % n for k in range(len(sites))}
    return (start, len(sites)) if arc == sites else None


def _is_contiguous(sites: set[int], n: int, boundary: str) -> bool:
    if not sites:
        return True
    if boundary == "open":
        return max(sites) - min(sites) + 1 == len(sites)
    return _ring_arc(sites, n) is not None


def _c_neighbors(c: set[int], n: int, boundary: str) -> tuple[int | None, int | None]:
    """(left neighbor, right neighbor) of a contiguous region, None at a wall."""
    if boundary == "open":
        left = min(c) - 1 if min(c) > 0 else None
        right = max(c) + 1 if max(c) < n - 1 else None
        return left, right
    arc = _ring_arc(c, n)
    if arc is None or arc[1] == n:
        return None, None
    start, length = arc
    return (start - 1) % n, (start + length) % n


def validate_regions(chain: Chain, A: Region, B: Region, C: Region) -> None:
    """Check the A/B/C geometry: disjoint, C contiguous and surrounded by A and B."""
    n = chain.n_sites
    for r in (A, B, C):
        if any(s < 0 or s >= n for s in r.sites):
            raise RegionError(f"region {r.sites} outside chain of {n} sites")
    sa, sb, sc = A.as_set(), B.as_set(), C.as_set()
    for x, y, names in ((sa, sb, "A,B"), (sa, sc, "A,C"), (sb, sc, "B,C")):
        overlap = x & y
        if overlap:
            raise RegionError(f"regions {names} overlap at sites {sorted(overlap)}")
    if not sa or not sb:
        raise RegionError("regions A and B must be nonempty")
    if not _is_contiguous(sc, n, chain.boundary):
        raise RegionError(f"region C {sorted(sc)} is not contiguous")
    if not sc:
        return
    left, right = _c_neighbors(sc, n, chain.boundary)
    sides = [s for s in (left, right) if s is not None]
    for s in sides:
        if s not in sa and s not in sb:
            raise RegionError(
                f"site {s} adjacent to C belongs to neither A nor B: C is not surrounded")
    if len(sides) == 2:
        in_a = [s in sa for s in sides]
        if all(in_a) or not any(in_a):
            raise RegionError("C must have A on one side and B on the other")
    if chain.boundary == "open":
        lo, hi = min(sc), max(sc)
        left_set, right_set = (sa, sb) if (left is not None and left in sa) else (sb, sa)
        if any(s > lo for s in left_set) or any(s < hi for s in right_set):
            raise RegionError("on an open chain A and B must lie on opposite sides of C")


def complement_region(chain: Chain, *regions: Region) -> Region:
    used = set().union(*(r.as_set() for r in regions))
    return Region([s for s in range(chain.n_sites) if s not in used], role="D")


def region_ball(chain: Chain, region: Region, radius: int) -> Region:
    """Region enlarged by ``radius`` sites on each side, clipped to the chain."""
    if radius < 0:
        raise RegionError("radius must be >= 0")
    n = chain.n_sites
    out = set(region.sites)
    for s in region.sites:
        for k in range(1, radius + 1):
            if chain.boundary == "ring":
                out.add((s + k) % n)
                out.add((s - k) % n)
            else:
                if s + k < n:
                    out.add(s + k)
                if s - k >= 0:
                    out.add(s - k)
    return Region(out, role=region.role)


def inflate_regions(chain: Chain, A: Region, B: Region, C: Region, radius: int,
                    ) -> tuple[Region, Region, Region]:
    """Balls A_l, B_l of radius l and the residual C-tilde = C \\ (A_l u B_l)."""
    al = region_ball(chain, A, radius)
    bl = region_ball(chain, B, radius)
    collide = al.as_set() & bl.as_set()
    if collide:
        raise RegionError(f"inflated regions collide at sites {sorted(collide)}")
    ct = Region([s for s in C.sites if s not in al.as_set() and s not in bl.as_set()],
                role="C")
    return al, bl, ct


# -------------------------------------------------------------- states

def product_state(chain: Chain, local_vectors) -> PureState:
    if len(local_vectors) != chain.n_sites:
        raise DimensionMismatch(
            f"need {chain.n_sites} local vectors, got {len(local_vectors)}")
    amp = np.array([1.0], dtype=complex)
    for site, vec in enumerate(local_vectors):
        v = np.asarray(vec, dtype=complex).reshape(-1)
        if v.size != chain.local_dims[site]:
            raise DimensionMismatch(
                f"site {site}: vector length {v.size} != local dim {chain.local_dims[site]}")
        if abs(np.linalg.norm(v) - 1) > 1e-10:
            raise DimensionMismatch(f"site {site}: local vector is not unit norm")
        amp = np.kron(amp, v)
    return PureState(chain, amp)


@dataclass
class FixedPointSpec:
    """Inputs for the ring fixed-point builder.

    ``isometry`` is either "canonical" (identity embedding, physical dim =
    dim(V)^2, on-site rep V tensor V*) or an explicit isometry matrix from the
    virtual pair into the physical site, in which case ``site_rep`` must be
    supplied and satisfy the intertwiner relation.
    """

    virtual_rep: UnitaryRep
    schmidt: np.ndarray
    blocks: int
    isometry: str | np.ndarray = "canonical"
    site_rep: UnitaryRep | None = None
    validate_tol: float = SYMMETRY_TOL

    def __post_init__(self):
        self.schmidt = np.asarray(self.schmidt, dtype=float).reshape(-1)


def _validate_fixed_point(spec: FixedPointSpec) -> tuple[np.ndarray, UnitaryRep]:
    V = spec.virtual_rep
    dv = V.dim
    lam = spec.schmidt
    if lam.size != dv:
        raise DimensionMismatch(f"schmidt vector length {lam.size} != dim V = {dv}")
    if np.any(lam <= 0):
        raise NonPositiveSchmidt("schmidt coefficients must be strictly positive")
    lam = lam / np.linalg.norm(lam)
    if spec.blocks < 2:
        raise DimensionMismatch("fixed point needs at least 2 blocks")
    # lambda-invariance: [V*(g) tensor V(g)] |lambda> = |lambda>
    lvec = np.zeros(dv * dv, dtype=complex)
    for k in range(dv):
        lvec[k * dv + k] = lam[k]
    for g in V.group.elements():
        out = np.kron(V(g).conj(), V(g)) @ lvec
        if np.linalg.norm(out - lvec) > spec.validate_tol:
            raise LambdaNotInvariant(
                f"bond state not invariant under g={g}; "
                "diag(lambda) must commute with the virtual rep")
    if isinstance(spec.isometry, str):
        if spec.isometry != "canonical":
            raise DimensionMismatch(f"unknown isometry {spec.isometry!r}")
        site_rep = tensor_rep(V, conjugate_rep(V))
        return lam, site_rep
    S = np.asarray(spec.isometry, dtype=complex)
    if S.ndim != 2 or S.shape[1] != dv * dv:
        raise DimensionMismatch(f"isometry shape {S.shape} incompatible with dim V^2")
    if np.linalg.norm(S.conj().T @ S - np.eye(dv * dv)) > 1e-10:
        raise IntertwinerViolation("S is not an isometry")
    if spec.site_rep is None:
        raise DimensionMismatch("explicit isometry requires site_rep")
    U = spec.site_rep
    if U.group != V.group:
        raise GroupMismatch("site rep and virtual rep on different groups")
    if U.dim != S.shape[0]:
        raise DimensionMismatch("site rep dimension != isometry rows")
    for g in V.group.elements():
        lhs = U(g) @ S
        rhs = S @ np.kron(V(g), V(g).conj())
        if np.linalg.norm(lhs - rhs) > spec.validate_tol:
            raise IntertwinerViolation(f"intertwiner relation fails at g={g}")
    return lam, U


def fixed_point_chain(spec: FixedPointSpec) -> Chain:
    _, site_rep = _validate_fixed_point(spec)
    return Chain([site_rep] * spec.blocks, boundary="ring")


def fixed_point_state(spec: FixedPointSpec) -> PureState:
    """|Psi> = S^{tensor N} |lambda>^{tensor N} on a ring of N blocks.

    The output is unit-normalized and an exact +1 eigenvector of the global
    symmetry (validated, tolerance 1e-9).
    """
    lam, site_rep = _validate_fixed_point(spec)
    V = spec.virtual_rep
    dv = V.dim
    N = spec.blocks
    phys = site_rep.dim
    if phys ** N > DENSE_CAP:
        raise CapExceeded(
            f"fixed point needs {phys}^{N} amplitudes, over the cap {DENSE_CAP}")
    # virtual tensor over axes (0L, 0R, 1L, 1R, ...); bond i pins (i_R, (i+1)_L)
    virt = np.zeros((dv,) * (2 * N), dtype=complex)
    for ks in itertools.product(range(dv), repeat=N):
        idx = [0] * (2 * N)
        w = 1.0
        for i in range(N):
            idx[2 * i + 1] = ks[i]
            idx[(2 * i + 2) % (2 * N)] = ks[i]
            w *= lam[ks[i]]
        virt[tuple(idx)] = w
    t = virt.reshape((dv * dv,) * N)
    if not isinstance(spec.isometry, str):
        S = np.asarray(spec.isometry, dtype=complex)
        for site in range(N):
            t = np.moveaxis(np.tensordot(S, t, axes=([1], [site])), 0, site)
    amp = t.reshape(-1)
    amp = amp / np.linalg.norm(amp)
    chain = Chain([site_rep] * N, boundary="ring")
    state = PureState(chain, amp)
    residual = global_symmetry_residual(state)
    if residual > spec.validate_tol:
        raise InvariantViolation(
            f"fixed point failed global symmetry check (residual {residual:.2e})")
    return state


# -------------------------------------------------------------- circuits

@dataclass(eq=False)
class Gate:
    """Unitary on a contiguous run of sites (listed in application order)."""

    sites: tuple[int, ...]
    matrix: np.ndarray
    symmetric: bool = False

    @property
    def diameter(self) -> int:
        return len(self.sites)


class Circuit:
    """Layered local gates; gates within one layer have disjoint supports."""

    def __init__(self, layers: list[list[Gate]]):
        self.layers = [list(layer) for layer in layers]
        for k, layer in enumerate(self.layers):
            seen: set[int] = set()
            for gate in layer:
                overlap = seen & set(gate.sites)
                if overlap:
                    raise RegionError(
                        f"layer {k}: gates overlap at sites {sorted(overlap)}")
                seen |= set(gate.sites)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def range_bound(self) -> int:
        """Depth times the maximum gate diameter."""
        widths = [g.diameter for layer in self.layers for g in layer]
        return self.depth * max(widths, default=0)

    def support(self) -> set[int]:
        return {s for layer in self.layers for g in layer for s in g.sites}


def _contiguous_run(chain: Chain, support: tuple[int, ...]) -> None:
    n = chain.n_sites
    for a, b in zip(support, support[1:]):
        step = (b - a) % n if chain.boundary == "ring" else b - a
        if step != 1:
            raise RegionError(f"support {support} is not a contiguous run")


def _joint_rep(chain: Chain, support: tuple[int, ...]) -> UnitaryRep:
    mats = {}
    for g in chain.group.elements():
        m = np.array([[1.0]], dtype=complex)
        for s in support:
            m = np.kron(m, chain.site_rep(s)(g))
        mats[g] = m
    return UnitaryRep(chain.group, mats)


def random_symmetric_gate(chain: Chain, support, seed: int) -> Gate:
    """Haar-random unitary drawn block-wise within each charge sector.

    Deterministic per seed; commutes with the restricted symmetry rep to
    1e-10 by construction (checked).
    """
    support = tuple(int(s) for s in support)
    _contiguous_run(chain, support)
    rep = _joint_rep(chain, support)
    rng = np.random.default_rng(seed)
    dim = rep.dim
    U = np.zeros((dim, dim), dtype=complex)
    for kappa in chain.group.charges():
        P = isotypic_projector(rep, kappa)
        w, vecs = np.linalg.eigh((P + P.conj().T) / 2)
        cols = vecs[:, w > 0.5]
        if cols.shape[1] == 0:
            continue
        block = random_unitary(cols.shape[1], rng)
        U += cols @ block @ cols.conj().T
    worst = max(np.linalg.norm(U @ rep(g) - rep(g) @ U)
                for g in chain.group.elements())
    if worst > GATE_SYMMETRY_TOL * np.sqrt(dim):
        raise InvariantViolation(f"symmetric gate fails commutation ({worst:.2e})")
    return Gate(support, U, symmetric=True)


def brickwork_circuit(chain: Chain, depth: int, width: int, seed: int,
                      support_sites=None, align_start: int = 0) -> Circuit:
    """Random symmetric brickwork: layer k places width-``width`` gates at
    offset ``align_start + k`` (mod width), restricted to ``support_sites``
    when given.  Windows never wrap around the ring.
    """
    if width < 1 or depth < 0:
        raise RegionError("depth must be >= 0 and width >= 1")
    n = chain.n_sites
    allowed = set(range(n)) if support_sites is None else set(support_sites)
    rng = np.random.default_rng(seed)
    layers = []
    for k in range(depth):
        offset = (align_start + k) % width
        layer = []
        for start in range(offset, n - width + 1, width):
            window = tuple(range(start, start + width))
            if not set(window) <= allowed:
                continue
            layer.append(random_symmetric_gate(
                chain, window, int(rng.integers(0, 2 ** 63 - 1))))
        layers.append(layer)
    return Circuit(layers)


def apply_circuit(state: PureState, circuit: Circuit) -> PureState:
    """Apply layers in order; preserves the norm to 1e-12."""
    n = state.chain.n_sites
    t = state.tensor()
    for layer in circuit.layers:
        for gate in layer:
            if any(s < 0 or s >= n for s in gate.sites):
                raise RegionError(f"gate support {gate.sites} outside chain")
            t = apply_to_axes(t, gate.matrix, list(gate.sites))
    amp = t.reshape(-1)
    norm = np.linalg.norm(amp)
    if abs(norm - 1) > 1e-12:
        raise InvariantViolation(f"circuit application drifted norm to {norm}")
    return PureState(state.chain, amp, validate=False)
