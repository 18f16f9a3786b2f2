"""Charge projectors, the charge-resolved block ensemble, and the
entanglement measures built on it.

Measuring the total charge in region C on state rho yields charge kappa with
probability p_kappa = tr(rho Pi_kappa) and conditional reduced state
rho_kappa on A u B; the ensemble pairs each kappa with (p_kappa, rho_kappa).
The negativity of this classical-quantum state is
(sum_kappa p_kappa ||rho_kappa^{T_A}||_1 - 1) / 2 and the order parameter is
twice that, which saturates at d - 1 for a fixed point whose virtual rep has
class dimension d.

Layout: rho_kappa is indexed as (A sites ascending) tensor (B sites
ascending); the partial transpose acts on the A factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, MixedBlocks, RegionError
from .groups import Charge, FiniteAbelianGroup
from .groups import SubgroupEmbedding
from .linalg import trace_norm_hermitian, von_neumann_entropy_bits
from .chains import (Chain, PureState, Region, apply_site_operators,
                     validate_regions)
from .reps import isotypic_projector

PROB_FLOOR = 1e-12
SECTOR_PATH_MIN_DIM = 2048


@dataclass(eq=False)
class ChargeProjector:
    """Dense projector onto the charge-kappa subspace of a region."""

    region: Region
    charge: Charge
    matrix: np.ndarray


class Block:
    """One charge sector: (kappa, p_kappa, rho_kappa).

    The density matrix may be held as a factor F with rho = F F† (always
    positive semidefinite); ``rho`` materializes the dense matrix.
    """

    def __init__(self, charge: Charge, probability: float,
                 rho: np.ndarray | None = None, factor: np.ndarray | None = None):
        if rho is None and factor is None:
            raise ValueError("block needs rho or factor")
        self.charge = tuple(charge)
        self.probability = float(probability)
        self._rho = rho
        self.factor = factor

    @property
    def dim(self) -> int:
        return self._rho.shape[0] if self._rho is not None else self.factor.shape[0]

    @property
    def rho(self) -> np.ndarray:
        if self._rho is None:
            self._rho = self.factor @ self.factor.conj().T
        return self._rho

    def purity(self) -> float:
        if self.factor is not None:
            g = self.factor.conj().T @ self.factor
            return float(np.sum(np.abs(g) ** 2))
        return float(np.trace(self.rho @ self.rho).real)

    def reduced_a(self, dA: int, dB: int) -> np.ndarray:
        if self.factor is not None:
            f3 = self.factor.reshape(dA, dB, -1)
            return np.tensordot(f3, f3.conj(), axes=([1, 2], [1, 2]))
        r4 = self.rho.reshape(dA, dB, dA, dB)
        return np.trace(r4, axis1=1, axis2=3)


class BlockEnsemble:
    """The charge-resolved state: blocks plus region/layout metadata.

    ``label_group`` is the group whose charges label the blocks (a subgroup
    for generalized ensembles); ``chain`` is kept when known so large blocks
    can exploit local charge sectors.
    """

    def __init__(self, label_group: FiniteAbelianGroup, blocks: list[Block],
                 dims: tuple[int, int], regions: tuple[Region, Region, Region],
                 chain: Chain | None = None):
        self.label_group = label_group
        self.blocks = list(blocks)
        self.dims = (int(dims[0]), int(dims[1]))
        self.regions = regions
        self.chain = chain

    def block(self, charge) -> Block | None:
        charge = tuple(charge)
        for b in self.blocks:
            if b.charge == charge:
                return b
        return None

    def probabilities(self) -> dict[Charge, float]:
        return {b.charge: b.probability for b in self.blocks}

    def validate(self, psd_dim_limit: int = 1024) -> None:
        total = sum(b.probability for b in self.blocks)
        if abs(total - 1) > 1e-10:
            raise InvariantViolation(f"block probabilities sum to {total}")
        for b in self.blocks:
            if b.probability < -PROB_FLOOR:
                raise InvariantViolation(f"negative probability at {b.charge}")
            if b.factor is None and b.dim <= psd_dim_limit:
                rho = b.rho
                if np.linalg.norm(rho - rho.conj().T) > 1e-10:
                    raise InvariantViolation(f"block {b.charge} not Hermitian")
                if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -1e-10:
                    raise InvariantViolation(f"block {b.charge} not PSD")
            if b.factor is not None:
                trace = float(np.sum(np.abs(b.factor) ** 2))
            else:
                trace = float(np.trace(b.rho).real)
            if abs(trace - 1) > 1e-9:
                raise InvariantViolation(f"block {b.charge} trace {trace} != 1")


def charge_projector(chain: Chain, C: Region, kappa) -> ChargeProjector:
    """Pi_kappa = (1/|G|) sum_g conj(chi_kappa(g)) tensor_{l in C} u_l(g)."""
    G = chain.group
    kappa = G.charge(kappa)
    sites = sorted(C.sites)
    if any(s < 0 or s >= chain.n_sites for s in sites):
        raise RegionError(f"region {sites} outside chain")
    dim = int(np.prod([chain.local_dims[s] for s in sites])) if sites else 1
    P = np.zeros((dim, dim), dtype=complex)
    for g in G.elements():
        m = np.array([[1.0]], dtype=complex)
        for s in sites:
            m = np.kron(m, chain.site_rep(s)(g))
        P += np.conj(G.character_value(kappa, g)) * m
    return ChargeProjector(C, kappa, P / G.order)


def _apply_region_symmetry(state: PureState, sites, g) -> PureState:
    return apply_site_operators(
        state, {s: state.chain.site_rep(s)(g) for s in sites})


def charge_distribution(state: PureState, C: Region) -> dict[Charge, float]:
    """p_kappa = <psi| Pi_kappa^{(C)} |psi> for every charge kappa."""
    G = state.chain.group
    sites = sorted(C.sites)
    f = {g: np.vdot(state.amplitudes,
                    _apply_region_symmetry(state, sites, g).amplitudes)
         for g in G.elements()}
    out = {}
    for kappa in G.charges():
        p = sum(np.conj(G.character_value(kappa, g)) * f[g] for g in G.elements())
        out[kappa] = max(0.0, float(np.real(p)) / G.order)
    return out


def _keep_factor(state_vec: np.ndarray, chain: Chain, keep: list[int]) -> np.ndarray:
    """Reshape a full state into a (dim_keep, dim_rest) matrix, keep-major."""
    rest = [s for s in range(chain.n_sites) if s not in keep]
    t = state_vec.reshape(chain.local_dims)
    t = np.transpose(t, keep + rest)
    dk = int(np.prod([chain.local_dims[s] for s in keep])) if keep else 1
    return t.reshape(dk, -1)


def omega_state(state: PureState, A: Region, B: Region, C: Region,
                threshold: float = PROB_FLOOR) -> BlockEnsemble:
    """Build the charge-resolved ensemble over region C's charges."""
    G = state.chain.group
    embedding = None
    return _omega_impl(state, A, B, C, G, embedding, threshold)


def generalized_omega(state: PureState, A: Region, B: Region, C: Region,
                      subgroup: SubgroupEmbedding,
                      threshold: float = PROB_FLOOR) -> BlockEnsemble:
    """Ensemble resolved on the charges of an embedded subgroup."""
    return _omega_impl(state, A, B, C, subgroup.subgroup, subgroup, threshold)


def _omega_impl(state, A, B, C, label_group, embedding, threshold):
    chain = state.chain
    validate_regions(chain, A, B, C)
    keep = sorted(A.sites) + sorted(B.sites)
    dA = int(np.prod([chain.local_dims[s] for s in sorted(A.sites)]))
    dB = int(np.prod([chain.local_dims[s] for s in sorted(B.sites)]))
    csites = sorted(C.sites)
    transformed = {}
    for h in label_group.elements():
        g = embedding.embed(h) if embedding is not None else h
        transformed[h] = _apply_region_symmetry(state, csites, g).amplitudes
    blocks = []
    total = 0.0
    for kappa in label_group.charges():
        acc = np.zeros_like(state.amplitudes)
        for h in label_group.elements():
            acc += np.conj(label_group.character_value(kappa, h)) * transformed[h]
        acc /= label_group.order
        p = float(np.vdot(acc, acc).real)
        total += p
        if p < threshold:
            continue
        M = _keep_factor(acc, chain, keep)
        blocks.append(Block(kappa, p, factor=M / np.sqrt(p)))
    if abs(total - 1) > 1e-10:
        raise InvariantViolation(f"charge probabilities sum to {total}")
    ens = BlockEnsemble(label_group, blocks, (dA, dB), (A, B, C), chain=chain)
    return ens


# -------------------------------------------------------------- measures

def _partial_transpose(rho: np.ndarray, dA: int, dB: int) -> np.ndarray:
    r4 = rho.reshape(dA, dB, dA, dB)
    return np.transpose(r4, (2, 1, 0, 3)).reshape(dA * dB, dA * dB)


def _side_sector_basis(chain: Chain, sites: list[int]):
    """Orthonormal basis sorted into charge sectors of the joint local rep.

    Returns (P, labels): unitary whose columns are sector vectors and the
    flattened charge index of each column.
    """
    G = chain.group
    charges = list(G.charges())
    mats = {}
    for g in G.elements():
        m = np.array([[1.0]], dtype=complex)
        for s in sites:
            m = np.kron(m, chain.site_rep(s)(g))
        mats[g] = m
    dim = mats[G.identity].shape[0]
    cols = []
    labels = []
    for ci, kappa in enumerate(charges):
        P = np.zeros((dim, dim), dtype=complex)
        for g in G.elements():
            P += np.conj(G.character_value(kappa, g)) * mats[g]
        P /= G.order
        w, vecs = np.linalg.eigh((P + P.conj().T) / 2)
        sel = vecs[:, w > 0.5]
        if sel.shape[1]:
            cols.append(sel)
            labels.extend([ci] * sel.shape[1])
    basis = np.hstack(cols)
    if basis.shape[1] != dim:
        raise InvariantViolation("charge sectors do not span the local space")
    return basis, np.array(labels, dtype=int)


def _sector_trace_norm(ens: BlockEnsemble, block: Block) -> float | None:
    """Trace norm of rho^{T_A} using the local-charge block structure.

    Valid for globally symmetric states, where each block commutes with the
    joint A x B symmetry action; verified structurally, returning None (so
    the caller falls back to a dense solve) if the off-sector mass is not
    negligible.
    """
    if ens.chain is None or block.factor is None:
        return None
    dA, dB = ens.dims
    A, B, _ = ens.regions
    G = ens.chain.group
    charges = list(G.charges())
    code = {k: i for i, k in enumerate(charges)}
    pa, la = _side_sector_basis(ens.chain, sorted(A.sites))
    pb, lb = _side_sector_basis(ens.chain, sorted(B.sites))
    f3 = block.factor.reshape(dA, dB, -1)
    f3 = np.tensordot(pa.conj().T, f3, axes=([1], [0]))
    f3 = np.moveaxis(np.tensordot(pb.conj().T, f3, axes=([1], [1])), 0, 1)
    d = dA * dB
    flat = f3.reshape(d, -1)
    rho = flat @ flat.conj().T
    ta = _partial_transpose(rho, dA, dB)
    del rho
    # row (a, b) of the transposed block carries sector q = alpha(a) - beta(b)
    diff = np.zeros((dA, dB), dtype=int)
    for i in range(dA):
        for j in range(dB):
            ka = charges[la[i]]
            kb = charges[lb[j]]
            diff[i, j] = code[G.add_charges(ka, G.negate_charge(kb))]
    q = diff.reshape(-1)
    off = ta[q[:, None] != q[None, :]]
    if off.size and float(np.abs(off).max()) > 1e-10:
        return None
    total = 0.0
    for qv in np.unique(q):
        idx = np.where(q == qv)[0]
        sub = ta[np.ix_(idx, idx)]
        total += trace_norm_hermitian(sub)
    return total


def _block_trace_norm(ens: BlockEnsemble, block: Block) -> float:
    d = block.dim
    if d >= SECTOR_PATH_MIN_DIM:
        via_sectors = _sector_trace_norm(ens, block)
        if via_sectors is not None:
            return via_sectors
    dA, dB = ens.dims
    return trace_norm_hermitian(_partial_transpose(block.rho, dA, dB))


def negativity(ens: BlockEnsemble) -> float:
    """(sum_kappa p_kappa ||rho_kappa^{T_A}||_1 - 1) / 2."""
    total = sum(b.probability * _block_trace_norm(ens, b) for b in ens.blocks)
    return (total - 1.0) / 2.0


def order_parameter(ens: BlockEnsemble) -> float:
    """sum_kappa ||(p_kappa rho_kappa)^{T_A}||_1 - 1; equals 2 x negativity."""
    total = sum(b.probability * _block_trace_norm(ens, b) for b in ens.blocks)
    return total - 1.0


def block_entropy(ens: BlockEnsemble, purity_tol: float = 1e-8) -> float:
    """sum_kappa p_kappa S(tr_B rho_kappa) in bits; requires pure blocks."""
    dA, dB = ens.dims
    out = 0.0
    for b in ens.blocks:
        purity = b.purity()
        if purity < 1 - purity_tol:
            raise MixedBlocks(
                f"block {b.charge} has purity {purity:.6f}; entropy undefined")
        out += b.probability * von_neumann_entropy_bits(b.reduced_a(dA, dB))
    return out


def max_block_difference(e1: BlockEnsemble, e2: BlockEnsemble) -> float:
    """Entrywise distance between two ensembles over matching charges."""
    worst = 0.0
    charges = {b.charge for b in e1.blocks} | {b.charge for b in e2.blocks}
    for kappa in charges:
        b1 = e1.block(kappa)
        b2 = e2.block(kappa)
        if b1 is None or b2 is None:
            missing = b1 or b2
            worst = max(worst, missing.probability)
            continue
        worst = max(worst, abs(b1.probability - b2.probability))
        worst = max(worst, float(np.max(np.abs(
            b1.probability * b1.rho - b2.probability * b2.rho))))
    return worst
