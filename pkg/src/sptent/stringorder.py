"""String operator expectation values and ensemble reconstruction.

A string operator is a local operator on region A, the symmetry string
``tensor_{l in C} u_l(g)`` across C, and a local operator on region B.  With
matrix-unit bases on A and B the full table of expectation values determines
the charge-resolved ensemble: averaging the g-slices against conj(chi_kappa)
with a 1/|G| prefactor yields the matrix elements of p_kappa rho_kappa.  No
single slice carries that information by itself.
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import (DimensionMismatch, IncompleteTable,
                     NonPhysicalReconstruction, RegionError)
from .groups import FiniteAbelianGroup
from .chains import Chain, PureState, Region, apply_site_operators, validate_regions
from .ensemble import Block, BlockEnsemble, PROB_FLOOR

CLIP_FLOOR = -1e-8


def local_operator_basis(dim: int) -> list[np.ndarray]:
    """Matrix units E_ab = |a><b|, ordered row-major: index i = a * dim + b."""
    if dim < 1:
        raise DimensionMismatch("operator basis needs dim >= 1")
    out = []
    for a in range(dim):
        for b in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[a, b] = 1.0
            out.append(e)
    return out


def _region_dims(chain: Chain, region: Region) -> int:
    return int(np.prod([chain.local_dims[s] for s in sorted(region.sites)]))


def _apply_region_operator(state: PureState, region: Region, op: np.ndarray) -> PureState:
    """Apply a dense operator on the combined (ascending-site) region space."""
    sites = sorted(region.sites)
    t = state.tensor()
    axes = sites
    moved = np.moveaxis(t, axes, range(len(axes)))
    shp = moved.shape
    flat = moved.reshape(int(np.prod(shp[:len(axes)])), -1)
    flat = op @ flat
    t = np.moveaxis(flat.reshape(shp), range(len(axes)), axes)
    return PureState(state.chain, t.reshape(-1), validate=False)


def string_expectation(state: PureState, g, X: np.ndarray, Y: np.ndarray,
                       A: Region, B: Region, C: Region) -> complex:
    """<psi| X_A tensor U_C(g) tensor Y_B |psi>."""
    chain = state.chain
    validate_regions(chain, A, B, C)
    g = chain.group.element(g)
    dA = _region_dims(chain, A)
    dB = _region_dims(chain, B)
    if X.shape != (dA, dA) or Y.shape != (dB, dB):
        raise DimensionMismatch(
            f"operator shapes {X.shape}, {Y.shape} do not match region dims {dA}, {dB}")
    out = apply_site_operators(
        state, {s: chain.site_rep(s)(g) for s in sorted(C.sites)})
    out = _apply_region_operator(out, A, X)
    out = _apply_region_operator(out, B, Y)
    return complex(np.vdot(state.amplitudes, out.amplitudes))


class StringExpectationTable:
    """Complete table tr(rho O_ij(g)) over all g and matrix-unit pairs.

    ``data[gi, a, b, c, d]`` holds the expectation with X = E_ab on A and
    Y = E_cd on B, where gi indexes group elements in lexicographic order.
    """

    def __init__(self, group: FiniteAbelianGroup, dims: tuple[int, int],
                 data: np.ndarray, regions=None):
        self.group = group
        self.dims = (int(dims[0]), int(dims[1]))
        dA, dB = self.dims
        expected = (group.order, dA, dA, dB, dB)
        data = np.asarray(data, dtype=complex)
        if data.shape != expected:
            raise IncompleteTable(f"table shape {data.shape}, expected {expected}")
        if not np.all(np.isfinite(data)):
            raise IncompleteTable("table contains non-finite entries")
        self.data = data
        self.regions = regions

    def entry(self, g, i: int, j: int) -> complex:
        """Entry for group element g, A-basis index i, B-basis index j."""
        gi = list(self.group.elements()).index(self.group.element(g))
        dA, dB = self.dims
        a, b = divmod(i, dA)
        c, d = divmod(j, dB)
        return complex(self.data[gi, a, b, c, d])

    def n_entries(self) -> int:
        return int(np.prod(self.data.shape))


def build_table(state: PureState, A: Region, B: Region, C: Region,
                ) -> StringExpectationTable:
    """All string expectations at once via the g-twisted reduced matrices.

    For each g, rho_g = tr_rest(U_C(g)|psi><psi|) on A tensor B determines
    every entry: tr(rho_g E_ab tensor E_cd) = <b d| rho_g |a c>.
    """
    chain = state.chain
    validate_regions(chain, A, B, C)
    keep = sorted(A.sites) + sorted(B.sites)
    rest = [s for s in range(chain.n_sites) if s not in keep]
    dA = _region_dims(chain, A)
    dB = _region_dims(chain, B)

    def keep_matrix(vec):
        t = vec.reshape(chain.local_dims)
        t = np.transpose(t, keep + rest)
        return t.reshape(dA * dB, -1)

    L = keep_matrix(state.amplitudes)
    slices = []
    for g in chain.group.elements():
        moved = apply_site_operators(
            state, {s: chain.site_rep(s)(g) for s in sorted(C.sites)})
        K = keep_matrix(moved.amplitudes)
        rho_g = K @ L.conj().T
        r4 = rho_g.reshape(dA, dB, dA, dB)
        # entry (a,b,c,d) = rho_g[(b,d),(a,c)]
        slices.append(np.transpose(r4, (2, 0, 3, 1)))
    table = StringExpectationTable(chain.group, (dA, dB), np.stack(slices),
                                   regions=(A, B, C))
    return table


def fourier_reconstruct(table: StringExpectationTable,
                        group: FiniteAbelianGroup | None = None) -> BlockEnsemble:
    """Recover the ensemble from the table with the 1/|G| prefactor.

    sigma_kappa = (1/|G|) sum_g conj(chi_kappa(g)) table(g) gives
    p_kappa rho_kappa; eigenvalues in [-1e-8, 0) are clipped to zero with
    renormalization, anything lower is rejected as inconsistent data.
    """
    G = table.group if group is None else group
    if G.order != table.group.order or G.cyclic_orders != table.group.cyclic_orders:
        raise IncompleteTable("table group does not match requested group")
    dA, dB = table.dims
    elems = list(G.elements())
    chars = np.array([[np.conj(G.character_value(kappa, g)) for g in elems]
                      for kappa in G.charges()])
    blocks = []
    for ki, kappa in enumerate(G.charges()):
        sigma4 = np.tensordot(chars[ki], table.data, axes=([0], [0])) / G.order
        # sigma[(b,d),(a,c)] = sigma4[a,b,c,d]
        sigma = np.transpose(sigma4, (1, 3, 0, 2)).reshape(dA * dB, dA * dB)
        herm_defect = float(np.linalg.norm(sigma - sigma.conj().T))
        if herm_defect > 1e-8 * max(1.0, np.linalg.norm(sigma)):
            raise NonPhysicalReconstruction(
                f"charge {kappa}: reconstructed block not Hermitian "
                f"(defect {herm_defect:.2e})")
        sigma = (sigma + sigma.conj().T) / 2
        w, vecs = np.linalg.eigh(sigma)
        if w.min() < CLIP_FLOOR:
            raise NonPhysicalReconstruction(
                f"charge {kappa}: eigenvalue {w.min():.2e} below {CLIP_FLOOR}")
        w = np.clip(w, 0.0, None)
        p = float(w.sum())
        if p < PROB_FLOOR:
            continue
        rho = (vecs * w) @ vecs.conj().T / p
        blocks.append(Block(kappa, p, rho=rho))
    total = sum(b.probability for b in blocks)
    if abs(total - 1) > 1e-8:
        raise NonPhysicalReconstruction(f"probabilities sum to {total}")
    # renormalize residual clipping drift exactly
    for b in blocks:
        b.probability /= total
    regions = table.regions if table.regions is not None else (
        Region([], "A"), Region([], "B"), Region([], "C"))
    return BlockEnsemble(G, blocks, (dA, dB), regions, chain=None)


def detect_phase(table: StringExpectationTable,
                 group: FiniteAbelianGroup | None = None) -> dict:
    """Order parameter and the inferred class dimension from a table."""
    from .ensemble import order_parameter
    ens = fourier_reconstruct(table, group)
    op = order_parameter(ens)
    return {"order_parameter": op, "d_estimate": int(round(op)) + 1}


def convert_operator_basis_table(group: FiniteAbelianGroup,
                                 dims: tuple[int, int],
                                 entries: np.ndarray,
                                 basis_a: list[np.ndarray],
                                 basis_b: list[np.ndarray],
                                 regions=None) -> StringExpectationTable:
    """Adapter: re-express a table measured in arbitrary operator bases.

    ``entries[gi, i, j] = tr(rho_g (F_i tensor K_j))`` for user bases {F_i},
    {K_j} spanning the region operator spaces; solves the linear basis change
    to matrix units.
    """
    dA, dB = dims
    entries = np.asarray(entries, dtype=complex)
    if entries.shape != (group.order, dA * dA, dB * dB):
        raise IncompleteTable(f"entries shape {entries.shape} unexpected")
    units_a = local_operator_basis(dA)
    units_b = local_operator_basis(dB)
    # coefficient matrices: E_u = sum_i conv[u, i] F_i
    ma = np.array([f.reshape(-1) for f in basis_a]).T
    mb = np.array([k.reshape(-1) for k in basis_b]).T
    ua = np.array([e.reshape(-1) for e in units_a]).T
    ub = np.array([e.reshape(-1) for e in units_b]).T
    ca, resa, *_ = np.linalg.lstsq(ma, ua, rcond=None)
    cb, resb, *_ = np.linalg.lstsq(mb, ub, rcond=None)
    if np.linalg.norm(ma @ ca - ua) > 1e-9 or np.linalg.norm(mb @ cb - ub) > 1e-9:
        raise IncompleteTable("supplied operator bases do not span the region spaces")
    data = np.einsum('gij,iu,jv->guv', entries, ca, cb)
    data = data.reshape(group.order, dA, dA, dB, dB)
    return StringExpectationTable(group, dims, data, regions=regions)


# -------------------------------------------------------------- CSV I/O

CSV_HEADER = ["g", "i_row", "i_col", "j_row", "j_col", "re", "im"]


def table_to_csv(table: StringExpectationTable, path) -> None:
    dA, dB = table.dims
    elems = list(table.group.elements())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for gi, g in enumerate(elems):
            gtxt = " ".join(str(x) for x in g)
            for a in range(dA):
                for b in range(dA):
                    for c in range(dB):
                        for d in range(dB):
                            z = table.data[gi, a, b, c, d]
                            writer.writerow([gtxt, a, b, c, d,
                                             f"{z.real:.17g}", f"{z.imag:.17g}"])


def table_from_csv(path, group: FiniteAbelianGroup,
                   dims: tuple[int, int]) -> StringExpectationTable:
    dA, dB = dims
    elems = {g: i for i, g in enumerate(group.elements())}
    data = np.full((group.order, dA, dA, dB, dB), np.nan, dtype=complex)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise IncompleteTable(f"unexpected CSV header {header}")
        for row in reader:
            if not row:
                continue
            g = group.element(int(x) for x in row[0].split())
            a, b, c, d = (int(x) for x in row[1:5])
            data[elems[g], a, b, c, d] = float(row[5]) + 1j * float(row[6])
    if np.any(np.isnan(data)):
        missing = int(np.isnan(data.real).sum())
        raise IncompleteTable(f"table is missing {missing} entries")
    return StringExpectationTable(group, dims, data)
