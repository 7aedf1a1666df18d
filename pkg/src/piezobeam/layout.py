"""Degree-of-freedom layout and discrete field states.

Dofs are numbered field-major: all dofs of the first field, then the second,
and so on, contiguous and non-overlapping.  Mechanical fields live on the
whole mesh; charge fields of patch variants live only on the patch submesh.

Field bases:
    v, psi            P1 Lagrange
    w                 Hermite cubic (Euler-Bernoulli), P1 (Mindlin-Timoshenko)
    q                 P1 (single beam)
    qT, qB            P2 on the patch submesh (E-B), P1 (M-T)

The P2 charge space in the Euler-Bernoulli patch model is deliberate: the
statically eliminated charge gradient tracks v' + h0 w'', which is piecewise
linear when w is Hermite cubic, so a piecewise-linear charge could not
reproduce the exact electrostatic reduction element by element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FieldShapeMismatch, UnknownBc
from .fem import N_LOCAL
from .materials import BoundaryCondition, ValidatedModelSpec, Variant
from .mesh import Mesh


@dataclass(frozen=True)
class FieldDofs:
    """One field's slot in the global vector."""

    name: str
    basis: str          # 'p1' | 'p2' | 'hermite'
    offset: int         # first global dof index
    count: int          # number of dofs
    region: str         # 'all' | 'patch' (which elements support the field)


def field_plan(vspec: ValidatedModelSpec) -> list:
    """(name, basis, region) triples for the variant/regime, in layout order."""
    eb = not vspec.is_mindlin
    plan = [("v", "p1", "all")]
    plan.append(("w", "hermite" if eb else "p1", "all"))
    if vspec.is_mindlin:
        plan.append(("psi", "p1", "all"))
    if vspec.regime.value == "full_magnetic":
        if vspec.is_patch:
            qbasis = "p2" if eb else "p1"
            plan.append(("qT", qbasis, "patch"))
            plan.append(("qB", qbasis, "patch"))
        else:
            plan.append(("q", "p1", "all"))
    return plan


CHARGE_FIELDS = ("q", "qT", "qB")


@dataclass(frozen=True)
class DofLayout:
    """Global dof numbering for a validated spec on a mesh."""

    vspec: ValidatedModelSpec
    mesh: Mesh
    fields: dict
    n_dofs: int

    @property
    def field_names(self) -> tuple:
        return tuple(self.fields)

    def dof_slice(self, name: str) -> slice:
        f = self.fields[name]
        return slice(f.offset, f.offset + f.count)

    def charge_dofs(self) -> np.ndarray:
        idx = [np.arange(self.n_dofs)[self.dof_slice(n)] for n in self.fields if n in CHARGE_FIELDS]
        return np.concatenate(idx) if idx else np.array([], dtype=int)

    def mechanical_dofs(self) -> np.ndarray:
        idx = [np.arange(self.n_dofs)[self.dof_slice(n)] for n in self.fields if n not in CHARGE_FIELDS]
        return np.concatenate(idx)

    def field_elements(self, name: str) -> np.ndarray:
        """Indices of mesh elements supporting the field."""
        f = self.fields[name]
        if f.region == "all":
            return np.arange(self.mesh.n_elements)
        sl = self.mesh.patch_elements
        return np.arange(sl.start, sl.stop)

    def element_dofs(self, name: str) -> np.ndarray:
        """Global dof indices per supporting element, shape (n_elem, n_local)."""
        f = self.fields[name]
        elems = self.field_elements(name)
        local = np.arange(len(elems))  # element index within the field's submesh
        if f.basis == "p1":
            tab = np.stack([local, local + 1], axis=1)
        elif f.basis == "p2":
            tab = np.stack([2 * local, 2 * local + 1, 2 * local + 2], axis=1)
        else:  # hermite: (value, slope) per node
            tab = np.stack([2 * local, 2 * local + 1, 2 * local + 2, 2 * local + 3], axis=1)
        return tab + f.offset

    def node_positions(self, name: str) -> np.ndarray:
        """Coordinates associated with each dof of the field.

        Hermite slope dofs share their node's coordinate; P2 midside dofs sit
        at element midpoints.
        """
        f = self.fields[name]
        elems = self.field_elements(name)
        nodes = self.mesh.nodes[elems[0]: elems[-1] + 2]
        if f.basis == "p1":
            return nodes
        if f.basis == "p2":
            mids = 0.5 * (nodes[:-1] + nodes[1:])
            out = np.empty(2 * len(mids) + 1)
            out[0::2] = nodes
            out[1::2] = mids
            return out
        return np.repeat(nodes, 2)

    def value_dofs(self, name: str) -> np.ndarray:
        """Global indices of the dofs that are nodal *values* of the field."""
        f = self.fields[name]
        all_idx = np.arange(f.offset, f.offset + f.count)
        if f.basis == "hermite":
            return all_idx[0::2]
        return all_idx

    def constrained_dofs(self, bc: BoundaryCondition) -> np.ndarray:
        """Essential dofs for the mechanical boundary condition at x = 0."""
        if bc == BoundaryCondition.FREE_FREE:
            return np.array([], dtype=int)
        if bc != BoundaryCondition.CLAMPED_FREE:
            raise UnknownBc(f"unsupported boundary condition {bc!r}")
        fixed = [self.fields["v"].offset, self.fields["w"].offset]
        if self.fields["w"].basis == "hermite":
            fixed.append(self.fields["w"].offset + 1)  # slope at x = 0
        if "psi" in self.fields:
            fixed.append(self.fields["psi"].offset)
        return np.array(sorted(fixed), dtype=int)


def build_layout(vspec: ValidatedModelSpec, mesh: Mesh) -> DofLayout:
    fields = {}
    offset = 0
    for name, basis, region in field_plan(vspec):
        if region == "patch":
            n_el = mesh.patch_elements.stop - mesh.patch_elements.start
        else:
            n_el = mesh.n_elements
        if basis == "p1":
            count = n_el + 1
        elif basis == "p2":
            count = 2 * n_el + 1
        else:
            count = 2 * (n_el + 1)
        fields[name] = FieldDofs(name, basis, offset, count, region)
        offset += count
    return DofLayout(vspec=vspec, mesh=mesh, fields=fields, n_dofs=offset)


@dataclass
class FieldState:
    """Nodal coefficients and velocities of every field on a layout."""

    layout: DofLayout
    coeffs: dict
    velocities: dict

    def __post_init__(self):
        for name, f in self.layout.fields.items():
            for store in (self.coeffs, self.velocities):
                arr = np.asarray(store.get(name, np.zeros(f.count)), dtype=float)
                if arr.shape != (f.count,):
                    raise FieldShapeMismatch(
                        f"field {name!r}: expected shape ({f.count},), got {arr.shape}"
                    )
                store[name] = arr

    @classmethod
    def zeros(cls, layout: DofLayout) -> "FieldState":
        return cls(layout, {}, {})

    @classmethod
    def from_vectors(cls, layout: DofLayout, x: np.ndarray, xdot: np.ndarray) -> "FieldState":
        x = np.asarray(x, dtype=float)
        xdot = np.asarray(xdot, dtype=float)
        if x.shape != (layout.n_dofs,) or xdot.shape != (layout.n_dofs,):
            raise FieldShapeMismatch(
                f"state vectors must have shape ({layout.n_dofs},)"
            )
        coeffs = {n: x[layout.dof_slice(n)].copy() for n in layout.fields}
        vels = {n: xdot[layout.dof_slice(n)].copy() for n in layout.fields}
        return cls(layout, coeffs, vels)

    def to_vectors(self):
        x = np.zeros(self.layout.n_dofs)
        xdot = np.zeros(self.layout.n_dofs)
        for name in self.layout.fields:
            x[self.layout.dof_slice(name)] = self.coeffs[name]
            xdot[self.layout.dof_slice(name)] = self.velocities[name]
        return x, xdot


def interpolate_field(layout: DofLayout, name: str, f, df=None) -> np.ndarray:
    """Nodal coefficients interpolating callable f (and slope df for Hermite)."""
    spec = layout.fields[name]
    if spec.basis == "hermite":
        if df is None:
            raise FieldShapeMismatch("Hermite interpolation needs the slope callable df")
        elems = layout.field_elements(name)
        nodes = layout.mesh.nodes[elems[0]: elems[-1] + 2]
        out = np.empty(2 * len(nodes))
        out[0::2] = [f(x) for x in nodes]
        out[1::2] = [df(x) for x in nodes]
        return out
    pos = layout.node_positions(name)
    return np.array([f(x) for x in pos], dtype=float)
