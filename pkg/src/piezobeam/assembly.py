"""Assembly of the semi-discrete system  M xdd + K x = B V(t).

M and K are the exact Hessians of the kinetic(+magnetic) and stored energy
functionals defined in forms.py, evaluated with the same quadrature rules, so
0.5 x^T K x reproduces the stored energy of the interpolated fields to
round-off.  B collects the gradient of the voltage work, one column per
voltage signal.

Element contributions are accumulated with np.add.at in a fixed element
order, so assembled matrices are bit-identical run to run regardless of
thread environment.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .errors import MeshSpecMismatch, SingularElectricBlock
from .fem import GAUSS_FULL, GAUSS_REDUCED, endpoint_values, shape_table
from .forms import FormSet, build_forms, _term_elements
from .layout import CHARGE_FIELDS, DofLayout, FieldState, build_layout
from .materials import BoundaryCondition, Regime, ValidatedModelSpec
from .mesh import Mesh


@dataclass
class SemiDiscreteSystem:
    """Assembled matrices plus the bookkeeping to map dofs back to fields.

    free_dofs maps the current (possibly constrained/reduced) dof numbering
    into the layout's full numbering; constrained dofs are implicitly zero.
    """

    vspec: ValidatedModelSpec
    mesh: Mesh
    layout: DofLayout
    M: np.ndarray
    K: np.ndarray
    B: np.ndarray
    free_dofs: np.ndarray
    bc: BoundaryCondition | None = None
    charge_reduced: bool = False
    _caches: dict = field(default_factory=dict, repr=False)

    @property
    def n_dofs(self) -> int:
        return self.M.shape[0]

    def embed(self, x: np.ndarray) -> np.ndarray:
        """Lift a vector in current numbering to the full layout numbering."""
        full = np.zeros(self.layout.n_dofs)
        full[self.free_dofs] = x
        return full

    def state(self, x: np.ndarray, xdot: np.ndarray) -> FieldState:
        return FieldState.from_vectors(self.layout, self.embed(x), self.embed(xdot))

    def dofs_of(self, name: str) -> np.ndarray:
        """Current-numbering indices of a field's surviving dofs."""
        sl = self.layout.dof_slice(name)
        return np.where((self.free_dofs >= sl.start) & (self.free_dofs < sl.stop))[0]

    def value_dofs_of(self, name: str) -> np.ndarray:
        return np.where(np.isin(self.free_dofs, self.layout.value_dofs(name)))[0]

    def charge_dofs(self) -> np.ndarray:
        return np.where(np.isin(self.free_dofs, self.layout.charge_dofs()))[0]

    def mechanical_dofs(self) -> np.ndarray:
        return np.where(~np.isin(self.free_dofs, self.layout.charge_dofs()))[0]

    def voltages_at(self, t):
        return np.array([sig(t) for sig in self.vspec.voltages])


def _assemble_terms(layout: DofLayout, terms, n: int) -> np.ndarray:
    A = np.zeros((n, n))
    for term in terms:
        elems, lengths = _term_elements(layout, term.region)
        if len(elems) == 0:
            continue
        xi, wq = GAUSS_REDUCED if term.reduced_quad else GAUSS_FULL
        tables = []
        dof_tabs = []
        for fname, deriv in term.channels:
            fd = layout.fields[fname]
            pos = elems - layout.field_elements(fname)[0]
            dof_tabs.append(layout.element_dofs(fname)[pos])
            tables.append(shape_table(fd.basis, deriv, xi, lengths))
        k = len(term.channels)
        for i in range(k):
            for j in range(i, k):
                c = term.coeff[i, j]
                if c == 0.0:
                    continue
                # (n_e, n_loc_i, n_loc_j), exact Gauss quadrature
                block = c * np.einsum(
                    "q,e,eqa,eqb->eab", wq, lengths, tables[i], tables[j]
                )
                if i == j:
                    # einsum's contraction order is not symmetric in (a, b);
                    # averaging restores bitwise-symmetric element blocks
                    block = 0.5 * (block + np.swapaxes(block, 1, 2))
                rows = dof_tabs[i]
                cols = dof_tabs[j]
                np.add.at(
                    A,
                    (rows[:, :, None], cols[:, None, :]),
                    block,
                )
                if i != j:
                    np.add.at(
                        A,
                        (cols[:, :, None], rows[:, None, :]),
                        np.swapaxes(block, 1, 2),
                    )
    return A


def _assemble_loads(layout: DofLayout, loads, n: int, n_sig: int) -> np.ndarray:
    """B[:, j] = d(work)/d(dofs) per unit signal j.

    Each load term integrates a pure derivative over its region, so only the
    region-boundary shape values survive: the column is coeff * [phi]_edges.
    """
    B = np.zeros((n, n_sig))
    for lt in loads:
        elems, lengths = _term_elements(layout, lt.region)
        fd = layout.fields[lt.field]
        pos = elems - layout.field_elements(lt.field)[0]
        dof_tab = layout.element_dofs(lt.field)[pos]
        left = endpoint_values(fd.basis, lt.deriv - 1, False, lengths[0])
        right = endpoint_values(fd.basis, lt.deriv - 1, True, lengths[-1])
        np.add.at(B[:, lt.signal], dof_tab[-1], lt.coeff * right)
        np.add.at(B[:, lt.signal], dof_tab[0], -lt.coeff * left)
    return B


def assemble(vspec: ValidatedModelSpec, mesh: Mesh) -> SemiDiscreteSystem:
    """Build M, K, B on the given mesh (must match the spec's geometry)."""
    if vspec.is_patch:
        if mesh.patch_span is None:
            raise MeshSpecMismatch("patch variant requires a mesh with a patch span")
        ia, ib = mesh.patch_span
        a, b = vspec.geometry.patch_start, vspec.geometry.patch_end
        if abs(mesh.nodes[ia] - a) > 1e-12 or abs(mesh.nodes[ib] - b) > 1e-12:
            raise MeshSpecMismatch("mesh patch span does not match the spec geometry")
    if abs(mesh.length - vspec.geometry.length) > 1e-12:
        raise MeshSpecMismatch("mesh length does not match the spec geometry")

    layout = build_layout(vspec, mesh)
    forms = build_forms(vspec)
    n = layout.n_dofs
    M = _assemble_terms(layout, forms.kinetic, n)
    K = _assemble_terms(layout, forms.stored, n)
    B = _assemble_loads(layout, forms.loads, n, vspec.n_signals)
    return SemiDiscreteSystem(
        vspec=vspec,
        mesh=mesh,
        layout=layout,
        M=M,
        K=K,
        B=B,
        free_dofs=np.arange(n),
    )


def apply_mechanical_bc(system: SemiDiscreteSystem, bc: BoundaryCondition) -> SemiDiscreteSystem:
    """Eliminate essential mechanical dofs (homogeneous) by row/col deletion."""
    fixed_full = system.layout.constrained_dofs(bc)
    keep = np.where(~np.isin(system.free_dofs, fixed_full))[0]
    return replace(
        system,
        M=system.M[np.ix_(keep, keep)],
        K=system.K[np.ix_(keep, keep)],
        B=system.B[keep],
        free_dofs=system.free_dofs[keep],
        bc=bc,
        _caches={},
    )


def _grounded_charge_split(system: SemiDiscreteSystem):
    """Partition current dofs into mechanical and grounded charge dofs.

    One dof per charge field is pinned to zero: the charge fields only enter
    the energy through their gradients and the voltage loads sum to zero
    against constants, so the constant charge offsets are pure gauge and the
    reduction does not depend on which dof is pinned.
    """
    mech = system.mechanical_dofs()
    charge = []
    for name in system.layout.fields:
        if name in CHARGE_FIELDS:
            dofs = system.dofs_of(name)
            charge.append(dofs[1:])  # pin the first dof of each charge field
    charge = np.concatenate(charge)
    return mech, charge


def reduce_electrostatic(system: SemiDiscreteSystem) -> SemiDiscreteSystem:
    """Schur-complement elimination of the charge dofs (electrostatic limit).

    Returns a system over the mechanical dofs only:
        K_red = K_mm - K_mq K_qq^-1 K_qm
        B_red = -K_mq K_qq^-1 B_q
        M_red = M_mm   (magnetic mass dropped)
    """
    if system.vspec.regime != Regime.FULL_MAGNETIC or system.charge_reduced:
        raise SingularElectricBlock("reduce_electrostatic needs a fully dynamic system")
    mech, charge = _grounded_charge_split(system)
    K_mm = system.K[np.ix_(mech, mech)]
    K_mq = system.K[np.ix_(mech, charge)]
    K_qq = system.K[np.ix_(charge, charge)]
    B_q = system.B[charge]
    try:
        cho = scipy.linalg.cho_factor(K_qq, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularElectricBlock(
            "charge-charge stiffness block is singular after grounding"
        ) from exc
    K_red = K_mm - K_mq @ scipy.linalg.cho_solve(cho, K_mq.T)
    B_red = -K_mq @ scipy.linalg.cho_solve(cho, B_q)
    K_red = 0.5 * (K_red + K_red.T)  # symmetrize round-off
    return replace(
        system,
        M=system.M[np.ix_(mech, mech)],
        K=K_red,
        B=B_red,
        free_dofs=system.free_dofs[mech],
        charge_reduced=True,
        _caches={},
    )


def build_system(vspec: ValidatedModelSpec, n_elements: int) -> SemiDiscreteSystem:
    """Mesh, assemble and apply the spec's mechanical boundary condition."""
    from .mesh import build_mesh

    mesh = build_mesh(vspec.geometry, n_elements, patch=vspec.is_patch)
    system = assemble(vspec, mesh)
    if vspec.mechanical_bc != BoundaryCondition.FREE_FREE:
        system = apply_mechanical_bc(system, vspec.mechanical_bc)
    return system


def stored_energy_of(system: SemiDiscreteSystem, x: np.ndarray) -> float:
    """0.5 x^T K x (matches forms.stored_energy on the embedded state)."""
    return 0.5 * float(x @ (system.K @ x))


def kinetic_energy_of(system: SemiDiscreteSystem, xdot: np.ndarray) -> float:
    return 0.5 * float(xdot @ (system.M @ xdot))


def magnetic_energy_of(system: SemiDiscreteSystem, xdot: np.ndarray) -> float:
    q = system.charge_dofs()
    if len(q) == 0:
        return 0.0
    vq = xdot[q]
    return 0.5 * float(vq @ (system.M[np.ix_(q, q)] @ vq))
