"""Coherent intertwiners: group averaging, saddle-point formulas and the C_a coefficients."""
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    FLUX_PREFACTOR_OVER_IMMIRZI_LP2,
    HessianH,
    NodeGeometry,
    closure_defect,
    det_h_explicit,
    hessian,
    is_closed,
    is_collinear,
    load_node_file,
    parse_node_records,
    random_closed_node,
    regular_tetrahedron,
    squashed_tetrahedron,
)
from .haar import (
    HaarGrid,
    apply_projector,
    edge_frame,
    haar_coefficients,
    haar_expectation,
    haar_grid,
    haar_norm,
    haar_triple_product,
    node_integrals,
    node_space,
    node_spin_operators,
    node_state,
    projector_matrix,
    total_spin_operators,
    triple_product_operator,
    wigner_top_row,
)
from .recoupling import clebsch_gordan, recoupling_projector, singlet_basis
from .saddle import (
    coefficients,
    coefficients_epsilon_form,
    commutator_gradients,
    norm_correction_complete,
    saddle_norm,
    semiclassical_expectation,
    triple_product_complete,
    triple_product_expectation,
)


@dataclass
class IntertwinerReport:
    norm_quadrature: float
    norm_saddle_leading: float
    norm_saddle_corrected: float
    norm_saddle_complete: float
    coefficients: np.ndarray
    coefficients_quadrature: np.ndarray
    expectations: dict = field(default_factory=dict)


def intertwiner_report(node: NodeGeometry, triple=(0, 1, 2)) -> IntertwinerReport:
    """Quadrature and saddle-point values side by side (closed node, integer total spin)."""
    ints = node_integrals(node, triple=triple if node.n_edges >= 3 else None)
    norm = ints.norm.real
    cq = (ints.c_numerators / ints.norm).real
    rep = IntertwinerReport(
        norm_quadrature=float(norm),
        norm_saddle_leading=saddle_norm(node, "leading"),
        norm_saddle_corrected=saddle_norm(node, "corrected"),
        norm_saddle_complete=saddle_norm(node, "complete"),
        coefficients=coefficients(node),
        coefficients_quadrature=cq,
    )
    if ints.triple_numerator is not None:
        lead, corr = triple_product_expectation(node, triple)
        rep.expectations["triple_product"] = {
            "quadrature": float((ints.triple_numerator / ints.norm).real),
            "leading": lead,
            "corrected": corr,
            "complete": triple_product_complete(node, triple),
        }
    return rep
